//! Centroidal relaxation of weighted spherical Voronoi tessellations.
//!
//! [`run_wscvt`] drives the loop: tessellate, measure how far each cell's
//! area fraction sits from its target share, move every generator to its
//! cell centroid, and nudge the working weights so undersized cells grow.
//! Targets are fixed once from the input weights, so the result is
//! invariant under uniform input scaling; working weights are kept
//! normalized to a fixed sum with a small floor so no site ever loses
//! its cell entirely.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hull::convex_hull;
use crate::tessellation::{detect_wrong_edges, swap_wrong_edges, Tessellation};
use crate::vec3::UnitVec;

/// Minimum pairwise chord distance enforced when sampling generators.
const MIN_SAMPLE_CHORD: f64 = 1e-6;

/// How degenerate-geometry retries are budgeted per solve.
const MAX_RESEEDS: usize = 10;

/// How the per-cell size mismatches aggregate into one error number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMode {
    /// Worst cell decides: `max_i |actual_i - desired_i|`.
    Max,
    /// Mean mismatch: `sum_i |actual_i - desired_i| / n`.
    Average,
}

/// Whether irregular edges are repaired during iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapPolicy {
    /// Flip wrong edges whenever a round produces overlapping cells.
    EachIteration,
    /// Leave the triangulation as the hull produced it.
    Never,
}

/// The weight update applied after each measurement round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightRule {
    /// Grow undersized cells: `w * (1 + (desired - actual) / desired)`.
    Corrective,
    /// The sign-flipped variant, kept selectable for comparison runs:
    /// `w * (1 + (actual - desired) / desired)`. It feeds growth back into
    /// oversized cells and is expected to stall.
    Inverted,
}

/// Solver knobs with the defaults used throughout the crate.
#[derive(Debug, Clone)]
pub struct LloydConfig {
    /// Convergence threshold on the aggregated size error.
    pub epsilon: f64,
    /// Weight floor; also the clamp value when a correction hits zero.
    pub delta: f64,
    /// Iteration budget before giving up.
    pub max_iterations: usize,
    /// Seed for initial placement and reseeding.
    pub seed: u64,
    /// Aggregation used for the convergence test.
    pub error_mode: ErrorMode,
    /// Wrong-edge repair policy.
    pub swap_policy: SwapPolicy,
    /// Weight update variant.
    pub weight_rule: WeightRule,
}

impl Default for LloydConfig {
    fn default() -> Self {
        LloydConfig {
            epsilon: 5e-4,
            delta: 1e-6,
            max_iterations: 10_000,
            seed: 0,
            error_mode: ErrorMode::Max,
            swap_policy: SwapPolicy::EachIteration,
            weight_rule: WeightRule::Corrective,
        }
    }
}

/// Snapshot of one generator during a measurement round.
#[derive(Debug, Clone, Copy)]
pub struct GeneratorState {
    pub position: UnitVec,
    /// Current working weight.
    pub weight: f64,
    /// Target area fraction.
    pub desired: f64,
    /// Measured area fraction this round.
    pub actual: f64,
}

/// What happened over a whole solve.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// Whether the error dropped under epsilon within budget.
    pub converged: bool,
    /// Measurement rounds performed.
    pub iterations: usize,
    /// Error of the returned state (last round when converged, best round
    /// otherwise).
    pub final_error: f64,
    /// Aggregated error after every round, in order.
    pub error_history: Vec<f64>,
    /// Irregular edges still present in the returned tessellation.
    pub residual_wrong_edges: usize,
}

/// A solved (or best-effort) placement plus its tessellation and report.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// Generator directions, in input order.
    pub positions: Vec<UnitVec>,
    /// Final working weights (fixed sum, floored at delta).
    pub weights: Vec<f64>,
    /// The tessellation measured for `final_error`.
    pub tessellation: Tessellation,
    pub report: ConvergenceReport,
}

/// Uniform random directions with pairwise chord distance at least
/// [`MIN_SAMPLE_CHORD`], reproducible from the seed.
pub fn initial_distribution(n: usize, seed: u64) -> Vec<UnitVec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_distinct(n, &mut rng)
}

fn sample_unit(rng: &mut ChaCha8Rng) -> UnitVec {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    UnitVec::from_xyz(r * phi.cos(), r * phi.sin(), z).unwrap()
}

fn sample_distinct(n: usize, rng: &mut ChaCha8Rng) -> Vec<UnitVec> {
    let mut points: Vec<UnitVec> = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while points.len() < n {
        attempts += 1;
        assert!(
            attempts <= 1000 * n + 1000,
            "cannot fit {} points at chord spacing {}",
            n,
            MIN_SAMPLE_CHORD
        );
        let p = sample_unit(rng);
        if points.iter().all(|q| q.chord_to(p) > MIN_SAMPLE_CHORD) {
            points.push(p);
        }
    }
    points
}

/// True when the hull of `positions` strictly encloses the sphere center,
/// which the spherical dual construction requires.
fn wraps_center(positions: &[UnitVec]) -> bool {
    convex_hull(positions).map_or(false, |m| m.encloses_origin())
}

/// Fresh full set of positions whose hull wraps the center. A draw confined
/// to one hemisphere (likely for very small `n`) has no spherical dual, so
/// such draws are discarded.
fn draw_wrapping_start(n: usize, rng: &mut ChaCha8Rng) -> Vec<UnitVec> {
    let mut draws = 0usize;
    loop {
        draws += 1;
        assert!(draws < 10_000, "no center-enclosing start after {draws} draws");
        let positions = sample_distinct(n, rng);
        if wraps_center(&positions) {
            return positions;
        }
    }
}

/// Fresh direction for site `i`, kept clear of all other sites.
fn resample_site(positions: &[UnitVec], i: usize, rng: &mut ChaCha8Rng) -> UnitVec {
    loop {
        let p = sample_unit(rng);
        let clear = positions
            .iter()
            .enumerate()
            .all(|(j, q)| j == i || q.chord_to(p) > MIN_SAMPLE_CHORD);
        if clear {
            return p;
        }
    }
}

/// One multiplicative weight update, clamped at `delta`.
///
/// With the corrective rule a cell at exactly its target keeps its weight,
/// an undersized cell grows it, and a cell at twice its target hits the
/// clamp (factor zero becomes `delta`).
pub fn adjust_weight(weight: f64, desired: f64, actual: f64, delta: f64, rule: WeightRule) -> f64 {
    let factor = match rule {
        WeightRule::Corrective => 1.0 + (desired - actual) / desired,
        WeightRule::Inverted => 1.0 + (actual - desired) / desired,
    };
    (weight * factor).max(delta)
}

/// Aggregates per-cell mismatches per the chosen mode.
pub fn size_error(states: &[GeneratorState], mode: ErrorMode) -> f64 {
    match mode {
        ErrorMode::Max => states
            .iter()
            .map(|s| (s.actual - s.desired).abs())
            .fold(0.0, f64::max),
        ErrorMode::Average => {
            states.iter().map(|s| (s.actual - s.desired).abs()).sum::<f64>()
                / states.len() as f64
        }
    }
}

struct BestState {
    error: f64,
    positions: Vec<UnitVec>,
    weights: Vec<f64>,
    tessellation: Tessellation,
}

/// Relaxes `weights.len()` generators until each cell's area fraction is
/// within epsilon of `weights[i] / sum(weights)`.
///
/// Degenerate geometry (coincident sites, collapsed cells, a circumcenter
/// at the sphere center) is handled by reseeding the offending generator,
/// at most [`MAX_RESEEDS`] times per solve. When the iteration budget runs
/// out the best round seen is returned inside [`Error::NotConverged`].
pub fn run_wscvt(weights: &[f64], config: &LloydConfig) -> Result<SolveOutcome> {
    let n = weights.len();
    if n < 4 {
        return Err(Error::TooFewPoints(n));
    }
    for (index, &weight) in weights.iter().enumerate() {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidWeight { index, weight });
        }
    }

    // Targets come from the input once; everything after runs on the
    // normalized working copy, making the solve scale-invariant.
    let total: f64 = weights.iter().sum();
    let desired: Vec<f64> = weights.iter().map(|w| w / total).collect();
    // Working weights live on the squared-chord scale: a cap of area
    // fraction f has squared chord radius exactly 4f, so target-sized caps
    // are a fixed point of the update exactly when w_i = 4 d_i. Keeping the
    // working sum at 4 (restored by the per-round renormalization) gives
    // equilibrium weights room to spread by the required 4 * (f_i - f_j)
    // without pinning light sites to the floor. Step size is a separate
    // concern: with only a few cells every boundary couples every pair, and
    // full-strength corrections overshoot into degeneracy, so the update is
    // under-relaxed by a factor ramping from 1/12 at n = 4 to 1 at n >= 15.
    // Weights start uniform: a random draw tessellated with the full target
    // spread folds badly, while equal weights differentiate smoothly as the
    // measurements come in.
    let working_sum = 4.0;
    let relaxation = ((n as f64 - 3.0) / 12.0).clamp(1.0 / 12.0, 1.0);
    let mut work: Vec<f64> = vec![working_sum / n as f64; n];

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut positions = draw_wrapping_start(n, &mut rng);
    let mut reseeds_left = MAX_RESEEDS;
    let mut history: Vec<f64> = Vec::new();
    let mut best: Option<BestState> = None;

    for iteration in 1..=config.max_iterations {
        // Tessellate, reseeding past degeneracies.
        let tess = loop {
            match build_round(&positions, &work, config) {
                Ok(t) => break t,
                Err(e) => match reseed_target(&e, &work) {
                    Some(victims) if reseeds_left > 0 => {
                        reseeds_left -= 1;
                        if victims.len() == n {
                            // Whole-configuration restart: the working
                            // weights drove it here, so they start over too.
                            positions = draw_wrapping_start(n, &mut rng);
                            work = vec![working_sum / n as f64; n];
                        } else {
                            for v in victims {
                                positions[v] = resample_site(&positions, v, &mut rng);
                            }
                        }
                    }
                    Some(_) => return Err(give_up(best, history, e)),
                    None => return Err(e),
                },
            }
        };

        let actual = tess.area_fractions();
        let states: Vec<GeneratorState> = (0..n)
            .map(|i| GeneratorState {
                position: positions[i],
                weight: work[i],
                desired: desired[i],
                actual: actual[i],
            })
            .collect();
        let error = size_error(&states, config.error_mode);
        history.push(error);

        if best.as_ref().map_or(true, |b| error < b.error) {
            best = Some(BestState {
                error,
                positions: positions.clone(),
                weights: work.clone(),
                tessellation: tess.clone(),
            });
        }

        if error < config.epsilon {
            let residual = residual_wrong(&tess);
            return Ok(SolveOutcome {
                positions,
                weights: work,
                tessellation: tess,
                report: ConvergenceReport {
                    converged: true,
                    iterations: iteration,
                    final_error: error,
                    error_history: history,
                    residual_wrong_edges: residual,
                },
            });
        }
        if iteration == config.max_iterations {
            break;
        }

        // Move each generator to its cell centroid; a collapsed cell gets
        // a fresh start instead.
        for i in 0..n {
            match tess.cells()[i].centroid() {
                Ok(c) => positions[i] = c,
                Err(_) if reseeds_left > 0 => {
                    reseeds_left -= 1;
                    positions[i] = resample_site(&positions, i, &mut rng);
                }
                Err(e) => return Err(give_up(best, history, e)),
            }
        }

        // Grow undersized cells (under-relaxed), then renormalize and re-floor.
        for i in 0..n {
            let full = adjust_weight(work[i], desired[i], actual[i], config.delta, config.weight_rule);
            work[i] = (work[i] + relaxation * (full - work[i])).max(config.delta);
        }
        let sum: f64 = work.iter().sum();
        for w in &mut work {
            *w *= working_sum / sum;
            if *w < config.delta {
                *w = config.delta;
            }
        }
    }

    let b = best.expect("at least one round was measured");
    let residual = residual_wrong(&b.tessellation);
    Err(Error::NotConverged(Box::new(SolveOutcome {
        positions: b.positions,
        weights: b.weights,
        tessellation: b.tessellation,
        report: ConvergenceReport {
            converged: false,
            iterations: config.max_iterations,
            final_error: b.error,
            error_history: history,
            residual_wrong_edges: residual,
        },
    })))
}

/// Hull, dual, and (per policy) edge repair for one round.
fn build_round(positions: &[UnitVec], work: &[f64], config: &LloydConfig) -> Result<Tessellation> {
    let mesh = convex_hull(positions)?;
    let tess = Tessellation::from_mesh(mesh, work)?;
    if config.swap_policy == SwapPolicy::EachIteration && tess.has_overlap() {
        let (fixed, report) = swap_wrong_edges(tess.mesh(), work, None)?;
        if report.swaps_performed > 0 {
            return Tessellation::from_mesh(fixed, work);
        }
    }
    Ok(tess)
}

fn residual_wrong(tess: &Tessellation) -> usize {
    let weights: Vec<f64> = tess.generators().iter().map(|g| g.weight).collect();
    detect_wrong_edges(tess.mesh(), &weights).len()
}

/// Which sites to reseed for a given geometry failure; `None` means the
/// error is not a transient degeneracy and must propagate.
fn reseed_target(error: &Error, work: &[f64]) -> Option<Vec<usize>> {
    match error {
        Error::DuplicatePoint(_, hi) => Some(vec![*hi]),
        Error::DegenerateCell { generator } => Some(vec![*generator]),
        Error::CircumcenterAtOrigin { triangle } | Error::FlatTriangle { triangle } => {
            // Move the heaviest corner: excess weight pushes the power
            // center toward the sphere center, and a flattened triangle
            // means two of its sites drifted together.
            let heaviest = triangle
                .iter()
                .copied()
                .max_by(|&a, &b| {
                    work[a]
                        .partial_cmp(&work[b])
                        .unwrap()
                        .then(b.cmp(&a))
                })
                .unwrap();
            Some(vec![heaviest])
        }
        // All sites coplanar or crowded into one hemisphere: start the
        // positions over entirely.
        Error::DegenerateInput | Error::HemisphereConfined => Some((0..work.len()).collect()),
        _ => None,
    }
}

fn give_up(best: Option<BestState>, history: Vec<f64>, error: Error) -> Error {
    match best {
        Some(b) => {
            let residual = residual_wrong(&b.tessellation);
            let iterations = history.len();
            Error::NotConverged(Box::new(SolveOutcome {
                positions: b.positions,
                weights: b.weights,
                tessellation: b.tessellation,
                report: ConvergenceReport {
                    converged: false,
                    iterations,
                    final_error: b.error,
                    error_history: history,
                    residual_wrong_edges: residual,
                },
            }))
        }
        None => error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_update_matches_worked_examples() {
        // Cell at double its target: factor 0, clamped to delta.
        let w = adjust_weight(0.1, 0.05, 0.1, 1e-6, WeightRule::Corrective);
        assert_eq!(w, 1e-6);
        // Cell exactly on target keeps its weight.
        let w = adjust_weight(0.2, 0.25, 0.25, 1e-6, WeightRule::Corrective);
        assert!((w - 0.2).abs() < 1e-15);
        // Undersized cell grows.
        let w = adjust_weight(0.2, 0.25, 0.20, 1e-6, WeightRule::Corrective);
        assert!(w > 0.2);
        // The inverted rule does the opposite: oversized cells grow.
        let w = adjust_weight(0.2, 0.25, 0.30, 1e-6, WeightRule::Inverted);
        assert!(w > 0.2);
    }

    #[test]
    fn error_modes_aggregate_as_documented() {
        let state = |desired: f64, actual: f64| GeneratorState {
            position: UnitVec::from_xyz(0.0, 0.0, 1.0).unwrap(),
            weight: 0.25,
            desired,
            actual,
        };
        let states = vec![state(0.25, 0.25), state(0.25, 0.35), state(0.25, 0.21), state(0.25, 0.19)];
        assert!((size_error(&states, ErrorMode::Max) - 0.10).abs() < 1e-15);
        let avg = (0.0 + 0.10 + 0.04 + 0.06) / 4.0;
        assert!((size_error(&states, ErrorMode::Average) - avg).abs() < 1e-15);
    }

    #[test]
    fn initial_distribution_is_reproducible_and_spread() {
        let a = initial_distribution(50, 42);
        let b = initial_distribution(50, 42);
        assert_eq!(a.len(), 50);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.as_vec3().to_array(), y.as_vec3().to_array());
        }
        for (i, x) in a.iter().enumerate() {
            assert!((x.norm() - 1.0).abs() < 1e-12);
            for y in &a[i + 1..] {
                assert!(x.chord_to(*y) > MIN_SAMPLE_CHORD);
            }
        }
        let c = initial_distribution(50, 43);
        assert!(a.iter().zip(&c).any(|(x, y)| x.chord_to(*y) > 1e-3));
    }

    #[test]
    fn four_equal_generators_converge_to_quarter_cells() {
        let config = LloydConfig::default();
        let outcome = run_wscvt(&[1.0, 1.0, 1.0, 1.0], &config).unwrap();
        assert!(outcome.report.converged);
        assert!(outcome.report.final_error < config.epsilon);
        let fractions = outcome.tessellation.area_fractions();
        for f in fractions {
            assert!((f - 0.25).abs() < config.epsilon);
        }
        assert_eq!(outcome.report.error_history.len(), outcome.report.iterations);
    }

    #[test]
    fn unequal_weights_meet_their_targets() {
        let weights = [1.0, 2.0, 3.0, 4.0, 5.0, 5.0, 2.0, 2.0];
        let config = LloydConfig::default();
        let outcome = run_wscvt(&weights, &config).unwrap();
        assert!(outcome.report.converged);
        let total: f64 = weights.iter().sum();
        let fractions = outcome.tessellation.area_fractions();
        for (i, f) in fractions.iter().enumerate() {
            assert!(
                (f - weights[i] / total).abs() < config.epsilon,
                "cell {}: fraction {} target {}",
                i,
                f,
                weights[i] / total
            );
        }
    }

    #[test]
    fn hundred_generators_with_linear_weights_converge() {
        let weights: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let config = LloydConfig::default();
        let outcome = run_wscvt(&weights, &config).unwrap();
        assert!(outcome.report.converged);
        assert!(outcome.report.final_error < config.epsilon);
        let fractions = outcome.tessellation.area_fractions();
        for (i, f) in fractions.iter().enumerate() {
            let target = (i + 1) as f64 / 5050.0;
            assert!((f - target).abs() < config.epsilon);
        }
    }

    #[test]
    fn report_error_matches_recomputation_from_tessellation() {
        let weights = [2.0, 1.0, 1.0, 1.0, 1.0, 2.0];
        let outcome = run_wscvt(&weights, &LloydConfig::default()).unwrap();
        let total: f64 = weights.iter().sum();
        let fractions = outcome.tessellation.area_fractions();
        let recomputed = fractions
            .iter()
            .enumerate()
            .map(|(i, f)| (f - weights[i] / total).abs())
            .fold(0.0, f64::max);
        assert!((recomputed - outcome.report.final_error).abs() < 1e-15);
    }

    #[test]
    fn uniform_scaling_of_weights_changes_nothing() {
        // Capped iteration budget: the comparison needs identical
        // trajectories, not convergence, and must hold either way.
        let run = |weights: &[f64]| -> SolveOutcome {
            let config = LloydConfig { max_iterations: 40, ..LloydConfig::default() };
            match run_wscvt(weights, &config) {
                Ok(o) => o,
                Err(Error::NotConverged(o)) => *o,
                Err(e) => panic!("unexpected failure: {e}"),
            }
        };
        let base = [1.0, 2.0, 3.0, 4.0, 2.0];
        let scaled: Vec<f64> = base.iter().map(|w| w * 4.0).collect();
        let a = run(&base);
        let b = run(&scaled);
        // Power-of-two scaling keeps every division exact, so the two
        // trajectories agree bit for bit.
        assert_eq!(a.report.error_history, b.report.error_history);
        for (x, y) in a.positions.iter().zip(&b.positions) {
            assert_eq!(x.as_vec3().to_array(), y.as_vec3().to_array());
        }
        for (x, y) in a.weights.iter().zip(&b.weights) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn exhausted_budget_reports_best_round() {
        let weights = [10.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 5.0];
        let config = LloydConfig { max_iterations: 3, ..LloydConfig::default() };
        match run_wscvt(&weights, &config) {
            Err(Error::NotConverged(outcome)) => {
                assert!(!outcome.report.converged);
                assert_eq!(outcome.report.iterations, 3);
                assert_eq!(outcome.report.error_history.len(), 3);
                let best = outcome
                    .report
                    .error_history
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(outcome.report.final_error, best);
                assert_eq!(outcome.positions.len(), weights.len());
            }
            other => panic!("expected NotConverged, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let config = LloydConfig::default();
        assert!(matches!(
            run_wscvt(&[1.0, 1.0, 1.0], &config),
            Err(Error::TooFewPoints(3))
        ));
        assert!(matches!(
            run_wscvt(&[1.0, -2.0, 1.0, 1.0], &config),
            Err(Error::InvalidWeight { index: 1, .. })
        ));
        assert!(matches!(
            run_wscvt(&[1.0, f64::NAN, 1.0, 1.0], &config),
            Err(Error::InvalidWeight { index: 1, .. })
        ));
    }

    #[test]
    fn average_mode_converges_too() {
        let config = LloydConfig { error_mode: ErrorMode::Average, ..LloydConfig::default() };
        let outcome = run_wscvt(&[1.0; 10], &config).unwrap();
        assert!(outcome.report.converged);
        assert!(outcome.report.final_error < config.epsilon);
    }
}
