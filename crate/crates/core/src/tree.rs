//! 3D tree layout on nested spheres.
//!
//! The root sits at the origin; its children share the unit sphere, their
//! children the sphere of radius 2, and so on. Every node owns a convex
//! spherical region, and its children are laid out inside the radial
//! projection of that region onto their own sphere — so every descendant
//! stays inside the cone its ancestor spans, and sibling subtrees never
//! interleave.
//!
//! Node weights size the regions: a node's share of its parent's region is
//! proportional to its weight (explicit, or the subtree's leaf count).
//! Level-one placement uses the centroidal solver; deeper levels run a
//! restricted variant of the same relaxation inside the parent region.
//! A face-budget alternative places nodes on icosphere face centroids with
//! children nested inside their parent's face.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hull::convex_hull;
use crate::lloyd::{run_wscvt, size_error, GeneratorState, LloydConfig};
use crate::spherical::SphericalPolygon;
use crate::tessellation::Tessellation;
use crate::trisphere::{face_count_at, IcoSphere, MAX_LEVEL};
use crate::vec3::{UnitVec, Vec3};

/// Input tree. Ids must be unique; explicit weights must be positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub id: String,
    pub label: String,
    /// Explicit weight; `None` falls back to the subtree's leaf count.
    pub weight: Option<f64>,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn new(id: impl Into<String>, label: impl Into<String>) -> TreeNode {
        TreeNode { id: id.into(), label: label.into(), weight: None, children: Vec::new() }
    }

    pub fn with_weight(mut self, weight: f64) -> TreeNode {
        self.weight = Some(weight);
        self
    }

    pub fn with_children(mut self, children: Vec<TreeNode>) -> TreeNode {
        self.children = children;
        self
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Leaves in this subtree (a leaf counts itself).
    pub fn leaf_count(&self) -> usize {
        if self.children.is_empty() {
            1
        } else {
            self.children.iter().map(TreeNode::leaf_count).sum()
        }
    }
}

/// Effective weight of every node, keyed by id.
///
/// A node weighs its explicit weight when present, otherwise its subtree's
/// leaf count (so a leaf defaults to 1). Rejects duplicate ids and
/// non-positive or non-finite explicit weights.
pub fn subtree_weights(root: &TreeNode) -> Result<HashMap<String, f64>> {
    let mut map = HashMap::new();
    let mut seen = HashSet::new();
    collect_weights(root, &mut map, &mut seen)?;
    Ok(map)
}

fn collect_weights(
    node: &TreeNode,
    map: &mut HashMap<String, f64>,
    seen: &mut HashSet<String>,
) -> Result<()> {
    if !seen.insert(node.id.clone()) {
        return Err(Error::DuplicateNodeId(node.id.clone()));
    }
    let weight = match node.weight {
        Some(w) if w.is_finite() && w > 0.0 => w,
        Some(w) => {
            return Err(Error::NonPositiveExplicitWeight { id: node.id.clone(), weight: w })
        }
        None => node.leaf_count() as f64,
    };
    map.insert(node.id.clone(), weight);
    for child in &node.children {
        collect_weights(child, map, seen)?;
    }
    Ok(())
}

/// Placement strategy for the spheres.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Weight-proportional regions via centroidal relaxation.
    Wscvt,
    /// Icosphere face centroids with nested subdivision per level.
    TriSphere,
}

/// Layout parameters.
#[derive(Debug, Clone)]
pub struct LayoutConfig {
    /// Solver settings for the relaxation-based placements.
    pub solver: LloydConfig,
    /// Sphere radius step per tree level.
    pub radius_scale: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig { solver: LloydConfig::default(), radius_scale: 1.0 }
    }
}

/// A placed node.
#[derive(Debug, Clone)]
pub struct LayoutNode {
    pub id: String,
    pub label: String,
    /// Tree depth; the root is level 0.
    pub level: u32,
    /// Cartesian position at radius `level * radius_scale`.
    pub position: Vec3,
    /// Distance from the origin (0 for the root).
    pub radius: f64,
    /// Region owned on the node's sphere; `None` only for the root.
    pub region: Option<SphericalPolygon>,
}

impl LayoutNode {
    /// Direction from the origin; `None` for the root.
    pub fn direction(&self) -> Option<UnitVec> {
        if self.radius == 0.0 {
            None
        } else {
            UnitVec::new(self.position).ok()
        }
    }
}

/// Diagnostics from the first sphere's placement (deeper groups stop at
/// their best state within the same iteration budget).
#[derive(Debug, Clone, Copy, Default)]
pub struct LayoutStats {
    /// Relaxation rounds spent on the first sphere (0 for analytic and
    /// face-budget placements).
    pub solver_iterations: usize,
    /// Worst cell-size error of the first sphere's placement (0 when no
    /// relaxation ran).
    pub final_error: f64,
}

/// A fully placed tree, nodes in preorder.
#[derive(Debug, Clone)]
pub struct Layout {
    nodes: Vec<LayoutNode>,
    level_radii: Vec<f64>,
    stats: LayoutStats,
}

impl Layout {
    pub fn nodes(&self) -> &[LayoutNode] {
        &self.nodes
    }

    /// Sphere radius for each level, `level_radii[level]`.
    pub fn level_radii(&self) -> &[f64] {
        &self.level_radii
    }

    pub fn find(&self, id: &str) -> Option<&LayoutNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// First-sphere solver diagnostics.
    pub fn stats(&self) -> LayoutStats {
        self.stats
    }
}

/// Positions and sub-regions produced by a placement inside one region.
#[derive(Debug, Clone)]
pub struct RestrictedPlacement {
    /// Directions, all inside the region, in input order.
    pub positions: Vec<UnitVec>,
    /// Weight-proportional sub-regions, all inside the region.
    pub regions: Vec<SphericalPolygon>,
}

/// Lays out a whole tree.
pub fn layout_tree(root: &TreeNode, algorithm: Algorithm, config: &LayoutConfig) -> Result<Layout> {
    let weights = subtree_weights(root)?;
    let mut nodes = vec![LayoutNode {
        id: root.id.clone(),
        label: root.label.clone(),
        level: 0,
        position: Vec3::new(0.0, 0.0, 0.0),
        radius: 0.0,
        region: None,
    }];
    let mut stats = LayoutStats::default();
    let max_level = match algorithm {
        Algorithm::Wscvt => {
            let mut ctx = WscvtCtx {
                weights: &weights,
                config,
                nodes: &mut nodes,
                group: 0,
                stats: &mut stats,
            };
            place_wscvt(root, None, 0, &mut ctx)?;
            ctx.nodes.iter().map(|n| n.level).max().unwrap_or(0)
        }
        Algorithm::TriSphere => {
            let levels = sphere_levels(root)?;
            let mut ctx =
                TriCtx { config, nodes: &mut nodes, levels: &levels, spheres: HashMap::new() };
            place_trisphere(root, 0, 0, &mut ctx)?;
            levels.len() as u32
        }
    };
    let level_radii = (0..=max_level).map(|l| l as f64 * config.radius_scale).collect();
    Ok(Layout { nodes, level_radii, stats })
}

struct WscvtCtx<'a> {
    weights: &'a HashMap<String, f64>,
    config: &'a LayoutConfig,
    nodes: &'a mut Vec<LayoutNode>,
    group: u64,
    stats: &'a mut LayoutStats,
}

fn place_wscvt(
    parent: &TreeNode,
    parent_region: Option<&SphericalPolygon>,
    parent_level: u32,
    ctx: &mut WscvtCtx<'_>,
) -> Result<()> {
    if parent.children.is_empty() {
        return Ok(());
    }
    let child_weights: Vec<f64> =
        parent.children.iter().map(|c| ctx.weights[&c.id]).collect();
    let mut solver = ctx.config.solver.clone();
    solver.seed = derive_seed(ctx.config.solver.seed, ctx.group);
    ctx.group += 1;

    let placed = match parent_region {
        None => {
            let (placed, stats) = top_level_placement(&child_weights, &solver)?;
            *ctx.stats = stats;
            placed
        }
        Some(region) => restricted_placement(region, &child_weights, &solver)?,
    };

    let level = parent_level + 1;
    let radius = level as f64 * ctx.config.radius_scale;
    for (i, child) in parent.children.iter().enumerate() {
        let region = placed.regions[i].clone();
        let mut direction = placed.positions[i];
        if !region.contains(direction) {
            // Numerical safety net: a direction that drifted out of its
            // region is pulled back to the region centroid.
            direction = region.centroid()?;
        }
        ctx.nodes.push(LayoutNode {
            id: child.id.clone(),
            label: child.label.clone(),
            level,
            position: direction.as_vec3() * radius,
            radius,
            region: Some(region.clone()),
        });
        place_wscvt(child, Some(&region), level, ctx)?;
    }
    Ok(())
}

/// Placement on the full first sphere: the solver for four or more
/// children, fixed symmetric placements below that (where a full
/// tessellation is degenerate or trivial).
fn top_level_placement(
    weights: &[f64],
    solver: &LloydConfig,
) -> Result<(RestrictedPlacement, LayoutStats)> {
    let k = weights.len();
    if k >= 4 {
        // A run that stalls short of epsilon is retried on fresh seeds
        // derived from the configured one, so the layout stays
        // deterministic; only a stall on every attempt propagates.
        let mut attempt = 0u64;
        let outcome = loop {
            let mut run = solver.clone();
            if attempt > 0 {
                run.seed = derive_seed(solver.seed, attempt);
            }
            match run_wscvt(weights, &run) {
                Ok(o) => break o,
                Err(Error::NotConverged(o)) => {
                    attempt += 1;
                    if attempt >= 5 {
                        return Err(Error::NotConverged(o));
                    }
                }
                Err(e) => return Err(e),
            }
        };
        let regions = outcome.tessellation.cells().to_vec();
        let stats = LayoutStats {
            solver_iterations: outcome.report.iterations,
            final_error: outcome.report.final_error,
        };
        return Ok((RestrictedPlacement { positions: outcome.positions, regions }, stats));
    }
    // Tiny fanouts: symmetric axis placements with regions sized by the
    // pairwise spacing, independent of the weights.
    let z = UnitVec::from_xyz(0.0, 0.0, 1.0).unwrap();
    let (positions, cap_radius) = match k {
        1 => (vec![z], 1.0),
        2 => (vec![z, z.antipode()], 0.45 * std::f64::consts::PI),
        3 => {
            let third = 2.0 * std::f64::consts::PI / 3.0;
            let pts = vec![
                UnitVec::from_xyz(1.0, 0.0, 0.0).unwrap(),
                UnitVec::from_xyz(third.cos(), third.sin(), 0.0).unwrap(),
                UnitVec::from_xyz((2.0 * third).cos(), (2.0 * third).sin(), 0.0).unwrap(),
            ];
            (pts, 0.45 * third)
        }
        _ => {
            return Ok((
                RestrictedPlacement { positions: vec![], regions: vec![] },
                LayoutStats::default(),
            ))
        }
    };
    let regions = positions
        .iter()
        .map(|&p| cap_polygon(p, cap_radius, 8))
        .collect::<Result<Vec<_>>>()?;
    Ok((RestrictedPlacement { positions, regions }, LayoutStats::default()))
}

/// Regular `sides`-gon inscribed in the cap of angular radius `rho`
/// around `center`, wound counter-clockwise seen from outside.
fn cap_polygon(center: UnitVec, rho: f64, sides: usize) -> Result<SphericalPolygon> {
    let (e1, e2) = orthonormal_frame(center);
    let verts = (0..sides)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / sides as f64;
            let rim = e1 * theta.cos() + e2 * theta.sin();
            UnitVec::new(center.as_vec3() * rho.cos() + rim * rho.sin())
        })
        .collect::<Result<Vec<_>>>()?;
    SphericalPolygon::new(verts)
}

/// Right-handed tangent frame: `e1 x e2 = axis`.
fn orthonormal_frame(axis: UnitVec) -> (Vec3, Vec3) {
    let helper = if axis.as_vec3().x.abs() < 0.9 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    let e1 = UnitVec::new(helper.cross(axis.as_vec3())).expect("helper not parallel");
    let e2 = axis.as_vec3().cross(e1.as_vec3());
    (e1.as_vec3(), e2)
}

/// Stream-splits one seed into independent per-group seeds.
fn derive_seed(seed: u64, group: u64) -> u64 {
    // splitmix64 step over seed + group index.
    let mut x = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(group.wrapping_add(1)));
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Places weighted children inside a convex region of the sphere.
///
/// One child takes the region centroid and keeps the whole region. Two or
/// three children split the region by cuts perpendicular to its longest
/// axis, placed so the pieces' areas match the weight shares. Four or more
/// run the centroidal relaxation restricted to the region: the sphere is
/// tessellated from the real sites plus low-weight antipodal mirror ghosts
/// (which keep the hull non-degenerate however small the region is), and
/// every real cell is clipped to the region before measuring.
pub fn restricted_placement(
    region: &SphericalPolygon,
    weights: &[f64],
    solver: &LloydConfig,
) -> Result<RestrictedPlacement> {
    let k = weights.len();
    if k == 0 {
        return Ok(RestrictedPlacement { positions: vec![], regions: vec![] });
    }
    for (index, &weight) in weights.iter().enumerate() {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidWeight { index, weight });
        }
    }
    let area = region.area();
    if area < 1e-9 {
        return Err(Error::RegionTooSmall {
            children: k,
            reason: format!("region area {:.3e} is below the workable minimum", area),
        });
    }
    let total: f64 = weights.iter().sum();
    let desired: Vec<f64> = weights.iter().map(|w| w / total).collect();

    match k {
        1 => {
            let c = region.centroid()?;
            Ok(RestrictedPlacement { positions: vec![c], regions: vec![region.clone()] })
        }
        2 | 3 => split_along_longest_axis(region, &desired),
        _ => relax_in_region(region, &desired, solver),
    }
}

/// Cuts the region into 2 or 3 weight-proportional strips perpendicular to
/// its longest axis (the farthest pair of region vertices).
fn split_along_longest_axis(
    region: &SphericalPolygon,
    desired: &[f64],
) -> Result<RestrictedPlacement> {
    let verts = region.vertices();
    let mut axis: Option<(UnitVec, Vec3, f64)> = None; // (start, tangent, length)
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            let arc = verts[i].arc_to(verts[j]);
            if axis.as_ref().map_or(true, |&(_, _, best)| arc > best) {
                let n = verts[i].as_vec3().cross(verts[j].as_vec3());
                if let Ok(n) = UnitVec::new(n) {
                    let e = n.as_vec3().cross(verts[i].as_vec3());
                    axis = Some((verts[i], e, arc));
                }
            }
        }
    }
    let (start, tangent, length) = axis.ok_or_else(|| Error::RegionTooSmall {
        children: desired.len(),
        reason: "no usable split axis (all vertex pairs coincident or antipodal)".into(),
    })?;

    let area = region.area();
    // Plane normal sweeping along the axis; the early side (containing the
    // axis start) is x . cut(t) <= 0.
    let cut = |t: f64| tangent * t.cos() - start.as_vec3() * t.sin();
    let early_area = |t: f64| region.clip_halfspace(cut(t) * -1.0).map_or(0.0, |p| p.area());

    let mut cuts = Vec::new();
    let mut acc = 0.0;
    for d in &desired[..desired.len() - 1] {
        acc += d;
        cuts.push(bisect_cut(&early_area, length, acc * area)?);
    }

    let mut pieces: Vec<SphericalPolygon> = Vec::with_capacity(desired.len());
    for i in 0..desired.len() {
        let mut piece = region.clone();
        if i > 0 {
            piece = piece.clip_halfspace(cut(cuts[i - 1])).ok_or_else(|| too_thin(desired.len()))?;
        }
        if i < cuts.len() {
            piece =
                piece.clip_halfspace(cut(cuts[i]) * -1.0).ok_or_else(|| too_thin(desired.len()))?;
        }
        pieces.push(piece);
    }
    let positions = pieces.iter().map(|p| p.centroid()).collect::<Result<Vec<_>>>()?;
    Ok(RestrictedPlacement { positions, regions: pieces })
}

fn too_thin(children: usize) -> Error {
    Error::RegionTooSmall {
        children,
        reason: "a weight share produced an empty strip".into(),
    }
}

/// Finds `t` with `early_area(t) = target` by bracketed bisection.
fn bisect_cut(early_area: &dyn Fn(f64) -> f64, length: f64, target: f64) -> Result<f64> {
    let mut lo = 0.0f64;
    let mut hi = length;
    // The farthest vertex pair may not span the full region footprint;
    // widen until the bracket holds.
    let mut guard = 0;
    while early_area(hi) < target && hi < std::f64::consts::PI - 1e-3 {
        hi = (hi + 0.2).min(std::f64::consts::PI - 1e-3);
        guard += 1;
        if guard > 32 {
            break;
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if early_area(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Centroidal relaxation restricted to a region (four or more children).
fn relax_in_region(
    region: &SphericalPolygon,
    desired: &[f64],
    solver: &LloydConfig,
) -> Result<RestrictedPlacement> {
    let k = desired.len();
    let area = region.area();
    let region_centroid = region.centroid()?;
    let cap_radius = region
        .vertices()
        .iter()
        .map(|v| region_centroid.arc_to(*v))
        .fold(0.0, f64::max)
        + 0.05;
    let cap_radius = cap_radius.min(std::f64::consts::PI - 0.01);

    let mut rng = ChaCha8Rng::seed_from_u64(solver.seed);
    let mut positions = sample_in_region(region, region_centroid, cap_radius, k, &mut rng)?;

    // Working weights live on the whole-sphere scale: a cell covering the
    // share d of this region covers d * area / (4 pi) of the sphere. In the
    // cap model a cell of sphere fraction f has squared cap-chord radius 4f,
    // so equilibrium weight spreads are 4x the fraction spreads; budgeting
    // 4 * scale keeps the multiplicative update near unit gain instead of
    // stalling on the weight floor. Starting uniform lets the spread grow
    // smoothly.
    let scale = area / (4.0 * std::f64::consts::PI);
    let work_total = 4.0 * scale;
    let mut work: Vec<f64> = vec![(work_total / k as f64).max(solver.delta); k];

    let mut best: Option<(f64, Vec<UnitVec>, Vec<Option<SphericalPolygon>>)> = None;
    let mut reseeds_left = 10usize;

    for _ in 0..solver.max_iterations {
        let round = match restricted_round(region, &positions, &work, solver) {
            Ok(r) => r,
            Err(_) if reseeds_left > 0 => {
                reseeds_left -= 1;
                positions =
                    sample_in_region(region, region_centroid, cap_radius, k, &mut rng)?;
                continue;
            }
            Err(e) => return Err(e),
        };

        let states: Vec<GeneratorState> = (0..k)
            .map(|i| GeneratorState {
                position: positions[i],
                weight: work[i],
                desired: desired[i],
                actual: round.fractions[i],
            })
            .collect();
        let error = size_error(&states, solver.error_mode);

        if best.as_ref().map_or(true, |(b, _, _)| error < *b) {
            best = Some((error, positions.clone(), round.cells.clone()));
        }
        if error < solver.epsilon {
            break;
        }

        // Move: each site to its clipped cell's centroid; empty cells are
        // restarted inside the region.
        for i in 0..k {
            let moved = round.cells[i]
                .as_ref()
                .and_then(|c| c.centroid().ok())
                .filter(|&c| region.contains(c));
            match moved {
                Some(c) => positions[i] = c,
                None => {
                    positions[i] =
                        sample_in_region(region, region_centroid, cap_radius, 1, &mut rng)?[0]
                }
            }
        }
        // Adjust, floor, and renormalize to the region's weight budget.
        for i in 0..k {
            work[i] = crate::lloyd::adjust_weight(
                work[i],
                desired[i],
                round.fractions[i],
                solver.delta,
                solver.weight_rule,
            );
        }
        let sum: f64 = work.iter().sum();
        for w in &mut work {
            *w *= work_total / sum;
            if *w < solver.delta {
                *w = solver.delta;
            }
        }
    }

    let (_, final_positions, cells) = best.ok_or_else(|| Error::RegionTooSmall {
        children: k,
        reason: "no valid relaxation round".into(),
    })?;
    let mut regions = Vec::with_capacity(k);
    for (i, cell) in cells.into_iter().enumerate() {
        regions.push(match cell {
            Some(c) => c,
            // A cell can be empty when its share rounds to nothing; give
            // it a minimal patch around its site so the invariant "every
            // node owns a region inside its parent's" still holds.
            None => fallback_patch(region, final_positions[i], area)?,
        });
    }
    Ok(RestrictedPlacement { positions: final_positions, regions })
}

struct RestrictedRound {
    /// Clipped cell per real site (`None` when the cell misses the region).
    cells: Vec<Option<SphericalPolygon>>,
    /// Area fractions relative to the region.
    fractions: Vec<f64>,
}

/// One tessellate-and-clip round over the real sites plus mirror ghosts.
fn restricted_round(
    region: &SphericalPolygon,
    positions: &[UnitVec],
    work: &[f64],
    solver: &LloydConfig,
) -> Result<RestrictedRound> {
    let k = positions.len();
    let mut all: Vec<UnitVec> = positions.to_vec();
    let mut weights: Vec<f64> = work.to_vec();
    // Antipodal mirrors guarantee the sites span a volume containing the
    // origin, however small the region is. They carry the floor weight and
    // are dropped when they collide with an existing site.
    for i in 0..k {
        let ghost = positions[i].antipode();
        if all.iter().all(|q| q.chord_to(ghost) > 1e-6) {
            all.push(ghost);
            weights.push(solver.delta);
        }
    }
    let mesh = convex_hull(&all)?;
    let tess = Tessellation::from_mesh(mesh, &weights)?;

    let area = region.area();
    let mut cells = Vec::with_capacity(k);
    let mut fractions = Vec::with_capacity(k);
    for i in 0..k {
        let clipped = clip_to_region(&tess.cells()[i], region);
        fractions.push(clipped.as_ref().map_or(0.0, |c| c.area() / area));
        cells.push(clipped);
    }
    Ok(RestrictedRound { cells, fractions })
}

/// Intersects a convex cell with a convex region by clipping against each
/// region edge's great circle.
fn clip_to_region(
    cell: &SphericalPolygon,
    region: &SphericalPolygon,
) -> Option<SphericalPolygon> {
    let verts = region.vertices();
    let mut out = cell.clone();
    for i in 0..verts.len() {
        let n = verts[i].as_vec3().cross(verts[(i + 1) % verts.len()].as_vec3());
        out = out.clip_halfspace(n)?;
    }
    Some(out)
}

/// Uniform rejection sampling of `count` pairwise-distinct directions
/// inside the region, drawing from the cap that encloses it.
fn sample_in_region(
    region: &SphericalPolygon,
    cap_center: UnitVec,
    cap_radius: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<UnitVec>> {
    let (e1, e2) = orthonormal_frame(cap_center);
    let z_min = cap_radius.cos();
    let mut out: Vec<UnitVec> = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 4000 * count {
            return Err(Error::RegionTooSmall {
                children: count,
                reason: "rejection sampling found too few interior points".into(),
            });
        }
        let z: f64 = rng.gen_range(z_min..=1.0);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = (1.0 - z * z).max(0.0).sqrt();
        let p = UnitVec::new(
            cap_center.as_vec3() * z + e1 * (r * phi.cos()) + e2 * (r * phi.sin()),
        )?;
        if region.contains(p) && out.iter().all(|q| q.chord_to(p) > 1e-6) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Small octagonal patch around `position`, clipped into the region.
fn fallback_patch(
    region: &SphericalPolygon,
    position: UnitVec,
    region_area: f64,
) -> Result<SphericalPolygon> {
    let rho = 0.1 * region_area.sqrt();
    if let Ok(cap) = cap_polygon(position, rho, 8) {
        if let Some(clipped) = clip_to_region(&cap, region) {
            return Ok(clipped);
        }
    }
    Ok(region.clone())
}

// ---------------------------------------------------------------------------
// Face-budget placement.

struct TriCtx<'a> {
    config: &'a LayoutConfig,
    nodes: &'a mut Vec<LayoutNode>,
    /// Subdivision level shared by all nodes at tree depth `d+1`.
    levels: &'a [u32],
    /// Cache of built spheres by level.
    spheres: HashMap<u32, IcoSphere>,
}

/// Global subdivision level per tree depth: each depth adds enough nesting
/// steps for the widest fanout at the previous depth (`ceil(log4 k)`), so
/// siblings anywhere fit inside their parent's face.
fn sphere_levels(root: &TreeNode) -> Result<Vec<u32>> {
    let mut widest: Vec<usize> = Vec::new(); // per depth, max fanout
    collect_fanouts(root, 0, &mut widest);
    let mut levels = Vec::with_capacity(widest.len());
    let mut current: u32 = 0;
    for (depth, &fanout) in widest.iter().enumerate() {
        if depth == 0 {
            // The first sphere needs a face per root child.
            current = crate::trisphere::level_for(fanout.max(1))?;
        } else {
            current += ceil_log4(fanout.max(1));
        }
        if current > MAX_LEVEL {
            return Err(Error::LevelTooLarge(current));
        }
        levels.push(current);
    }
    Ok(levels)
}

fn collect_fanouts(node: &TreeNode, depth: usize, widest: &mut Vec<usize>) {
    if node.children.is_empty() {
        return;
    }
    if widest.len() <= depth {
        widest.resize(depth + 1, 0);
    }
    widest[depth] = widest[depth].max(node.children.len());
    for child in &node.children {
        collect_fanouts(child, depth + 1, widest);
    }
}

fn ceil_log4(n: usize) -> u32 {
    let mut level = 0u32;
    let mut capacity = 1usize;
    while capacity < n {
        capacity *= 4;
        level += 1;
    }
    level
}

fn place_trisphere(
    parent: &TreeNode,
    parent_face: usize,
    parent_depth: usize,
    ctx: &mut TriCtx<'_>,
) -> Result<()> {
    if parent.children.is_empty() {
        return Ok(());
    }
    let depth = parent_depth; // children live at tree depth `depth + 1`
    let sub_level = ctx.levels[depth];
    if !ctx.spheres.contains_key(&sub_level) {
        ctx.spheres.insert(sub_level, IcoSphere::build(sub_level)?);
    }

    // Children occupy the first descendants of the parent face at the new
    // level (the whole sphere for the root's children).
    let base = if depth == 0 {
        0
    } else {
        let step = sub_level - ctx.levels[depth - 1];
        parent_face * 4usize.pow(step)
    };
    let budget = if depth == 0 {
        face_count_at(sub_level) as usize
    } else {
        4usize.pow(sub_level - ctx.levels[depth - 1])
    };
    if parent.children.len() > budget {
        return Err(Error::RegionTooSmall {
            children: parent.children.len(),
            reason: format!("face budget {} at subdivision level {}", budget, sub_level),
        });
    }

    let level = depth as u32 + 1;
    let radius = level as f64 * ctx.config.radius_scale;
    for (i, child) in parent.children.iter().enumerate() {
        let face = base + i;
        let sphere = &ctx.spheres[&sub_level];
        let direction = sphere.face_centroid(face);
        let tri = sphere.face_triangle(face);
        let region = SphericalPolygon::new(vec![tri.a, tri.b, tri.c])?;
        ctx.nodes.push(LayoutNode {
            id: child.id.clone(),
            label: child.label.clone(),
            level,
            position: direction.as_vec3() * radius,
            radius,
            region: Some(region),
        });
        place_trisphere(child, face, depth + 1, ctx)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(ids: &[&str]) -> TreeNode {
        let mut node = TreeNode::new(ids[ids.len() - 1], ids[ids.len() - 1]);
        for id in ids[..ids.len() - 1].iter().rev() {
            node = TreeNode::new(*id, *id).with_children(vec![node]);
        }
        node
    }

    fn star(root: &str, n: usize) -> TreeNode {
        let children = (0..n)
            .map(|i| TreeNode::new(format!("{}.{}", root, i), format!("{}.{}", root, i)))
            .collect();
        TreeNode::new(root, root).with_children(children)
    }

    #[test]
    fn weights_default_to_leaf_counts() {
        let tree = TreeNode::new("r", "r").with_children(vec![
            star("a", 3),
            TreeNode::new("b", "b"),
            TreeNode::new("c", "c").with_weight(7.5),
        ]);
        let w = subtree_weights(&tree).unwrap();
        assert_eq!(w["r"], 5.0); // five leaves below r; c's override applies to c only
        assert_eq!(w["a"], 3.0);
        assert_eq!(w["a.1"], 1.0);
        assert_eq!(w["b"], 1.0);
        assert_eq!(w["c"], 7.5);
    }

    #[test]
    fn bad_trees_are_rejected() {
        let dup = TreeNode::new("r", "r")
            .with_children(vec![TreeNode::new("x", "x"), TreeNode::new("x", "x")]);
        assert!(matches!(subtree_weights(&dup), Err(Error::DuplicateNodeId(id)) if id == "x"));

        let neg = TreeNode::new("r", "r")
            .with_children(vec![TreeNode::new("x", "x").with_weight(-1.0)]);
        assert!(matches!(
            subtree_weights(&neg),
            Err(Error::NonPositiveExplicitWeight { .. })
        ));
    }

    #[test]
    fn single_chain_stacks_along_one_ray() {
        let layout =
            layout_tree(&chain(&["r", "a", "b"]), Algorithm::Wscvt, &LayoutConfig::default())
                .unwrap();
        assert_eq!(layout.nodes().len(), 3);
        let a = layout.find("a").unwrap();
        let b = layout.find("b").unwrap();
        assert_eq!(a.level, 1);
        assert_eq!(b.level, 2);
        assert!((a.position.norm() - 1.0).abs() < 1e-12);
        assert!((b.position.norm() - 2.0).abs() < 1e-12);
        // A lone child keeps its parent's whole region, so the chain stays
        // inside the level-1 cap around +z.
        let dir_a = a.direction().unwrap();
        let dir_b = b.direction().unwrap();
        assert!(a.region.as_ref().unwrap().contains(dir_a));
        assert!(a.region.as_ref().unwrap().contains(dir_b));
    }

    #[test]
    fn two_children_take_opposite_poles() {
        let layout = layout_tree(&star("r", 2), Algorithm::Wscvt, &LayoutConfig::default()).unwrap();
        let a = layout.find("r.0").unwrap().direction().unwrap();
        let b = layout.find("r.1").unwrap().direction().unwrap();
        assert!((a.arc_to(b) - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn three_children_sit_at_equatorial_thirds() {
        let layout = layout_tree(&star("r", 3), Algorithm::Wscvt, &LayoutConfig::default()).unwrap();
        let dirs: Vec<UnitVec> = (0..3)
            .map(|i| layout.find(&format!("r.{}", i)).unwrap().direction().unwrap())
            .collect();
        for i in 0..3 {
            let next = dirs[(i + 1) % 3];
            assert!((dirs[i].arc_to(next) - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn restricted_split_matches_weight_shares() {
        let region = cap_polygon(UnitVec::from_xyz(0.0, 0.0, 1.0).unwrap(), 0.8, 8).unwrap();
        let area = region.area();
        for weights in [vec![1.0, 1.0], vec![3.0, 1.0], vec![1.0, 2.0, 1.0]] {
            let placed =
                restricted_placement(&region, &weights, &LloydConfig::default()).unwrap();
            let total: f64 = weights.iter().sum();
            let mut piece_sum = 0.0;
            for (i, piece) in placed.regions.iter().enumerate() {
                let share = piece.area() / area;
                piece_sum += piece.area();
                assert!(
                    (share - weights[i] / total).abs() < 1e-6,
                    "weights {:?} piece {} share {}",
                    weights,
                    i,
                    share
                );
                assert!(piece.contains(placed.positions[i]));
            }
            assert!((piece_sum - area).abs() < 1e-6 * area);
        }
    }

    #[test]
    fn four_way_relaxation_balances_a_symmetric_cap() {
        // Four equal weights in a symmetric cap end up with equal shares
        // that exactly cover the region. The relaxed positions themselves
        // are not mirror-symmetric — seeding is random and the fan
        // centroid formula depends on each ring's starting vertex — so
        // only the area outcome is asserted.
        let region = cap_polygon(UnitVec::from_xyz(0.0, 0.0, 1.0).unwrap(), 0.7, 8).unwrap();
        let solver = LloydConfig { epsilon: 1e-5, ..LloydConfig::default() };
        let placed = restricted_placement(&region, &[1.0; 4], &solver).unwrap();
        let area = region.area();
        let covered: f64 = placed.regions.iter().map(|p| p.area()).sum();
        assert!((covered - area).abs() < 1e-6 * area);
        for (pos, piece) in placed.positions.iter().zip(&placed.regions) {
            assert!((piece.area() / area - 0.25).abs() < 1e-4);
            assert!(piece.contains(*pos));
        }
    }

    #[test]
    fn equal_split_halves_the_cap() {
        // An equal two-way split of a symmetric cap: congruent pieces that
        // partition the region, each owning its own centroid. The fan
        // centroid formula depends on where the vertex ring starts, so the
        // two positions are each piece's own centroid rather than exact
        // mirror images of one another.
        let region = cap_polygon(UnitVec::from_xyz(0.0, 0.0, 1.0).unwrap(), 0.7, 8).unwrap();
        let placed =
            restricted_placement(&region, &[1.0, 1.0], &LloydConfig::default()).unwrap();
        assert!((placed.regions[0].area() - placed.regions[1].area()).abs() < 1e-6);
        let covered: f64 = placed.regions.iter().map(|p| p.area()).sum();
        assert!((covered - region.area()).abs() < 1e-6 * region.area());
        for (pos, piece) in placed.positions.iter().zip(&placed.regions) {
            assert!(piece.contains(*pos));
            assert!(pos.chord_to(piece.centroid().unwrap()) < 1e-12);
        }
    }

    #[test]
    fn restricted_relaxation_respects_region_and_weights() {
        let region = cap_polygon(UnitVec::from_xyz(1.0, 0.0, 0.0).unwrap(), 0.9, 8).unwrap();
        let weights = [1.0, 2.0, 3.0, 2.0, 1.0];
        let solver = LloydConfig { epsilon: 2e-3, ..LloydConfig::default() };
        let placed = restricted_placement(&region, &weights, &solver).unwrap();
        assert_eq!(placed.positions.len(), 5);
        let area = region.area();
        let total: f64 = weights.iter().sum();
        for (i, pos) in placed.positions.iter().enumerate() {
            assert!(region.contains(*pos), "site {} escaped the region", i);
            let share = placed.regions[i].area() / area;
            assert!(
                (share - weights[i] / total).abs() < 2e-3 + 1e-9,
                "site {} share {} target {}",
                i,
                share,
                weights[i] / total
            );
            for v in placed.regions[i].vertices() {
                assert!(region.contains(*v), "site {} region vertex escaped", i);
            }
        }
    }

    #[test]
    fn restricted_placement_is_deterministic() {
        let region = cap_polygon(UnitVec::from_xyz(0.0, 1.0, 0.0).unwrap(), 0.8, 8).unwrap();
        let weights = [1.0, 1.0, 2.0, 1.0];
        let solver = LloydConfig { epsilon: 2e-3, ..LloydConfig::default() };
        let a = restricted_placement(&region, &weights, &solver).unwrap();
        let b = restricted_placement(&region, &weights, &solver).unwrap();
        for (x, y) in a.positions.iter().zip(&b.positions) {
            assert_eq!(x.as_vec3().to_array(), y.as_vec3().to_array());
        }
    }

    #[test]
    fn face_budget_layout_nests_children_in_parent_faces() {
        let tree = TreeNode::new("r", "r").with_children(vec![
            star("a", 5),
            star("b", 3),
            TreeNode::new("c", "c"),
        ]);
        let layout = layout_tree(&tree, Algorithm::TriSphere, &LayoutConfig::default()).unwrap();
        for child in ["a", "b", "c"] {
            let parent = layout.find(child).unwrap();
            let parent_region = parent.region.as_ref().unwrap();
            for node in layout.nodes() {
                if node.id.starts_with(&format!("{}.", child)) {
                    assert!(
                        parent_region.contains(node.direction().unwrap()),
                        "{} escaped {}",
                        node.id,
                        child
                    );
                }
            }
        }
        // Depth 1 uses the base icosahedron (3 <= 20 faces); depth 2 needs
        // ceil(log4 5) = 2 more subdivision steps.
        let a0 = layout.find("a.0").unwrap();
        assert_eq!(a0.level, 2);
        assert!((a0.position.norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn oversized_fanout_is_rejected_cleanly() {
        let wide = star("r", face_count_at(MAX_LEVEL) as usize + 1);
        assert!(matches!(
            layout_tree(&wide, Algorithm::TriSphere, &LayoutConfig::default()),
            Err(Error::LevelTooLarge(_))
        ));
    }

    #[test]
    fn radius_scale_stretches_every_level() {
        let config = LayoutConfig { radius_scale: 2.5, ..LayoutConfig::default() };
        let layout = layout_tree(&chain(&["r", "a", "b"]), Algorithm::Wscvt, &config).unwrap();
        assert_eq!(layout.level_radii(), &[0.0, 2.5, 5.0]);
        assert!((layout.find("b").unwrap().position.norm() - 5.0).abs() < 1e-12);
    }
}
