//! Weighted spherical Voronoi tessellations, built as the dual of a convex
//! hull over the generator directions.
//!
//! Each generator owns the region of the sphere where its weighted distance
//! (squared chord minus weight) beats every other generator's. With equal
//! weights this is the ordinary spherical Voronoi diagram. Cell vertices are
//! weighted circumcenters of hull triangles; the cell of generator `g` is
//! traced by walking the hull triangles around `g` in counter-clockwise
//! order.
//!
//! A hull triangulation is only the true weighted diagram when every edge is
//! locally regular. [`detect_wrong_edges`] finds violations and
//! [`swap_wrong_edges`] repairs them by edge flips where this does not
//! degrade the count.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::hull::{convex_hull, HullMesh};
use crate::spherical::{
    power, weighted_circumcenter, weighted_circumcenter_raw, SphericalPolygon, SphericalTriangle,
};
use crate::tol::REGULARITY_MARGIN;
use crate::vec3::{UnitVec, Vec3};

/// A weighted site on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    pub position: UnitVec,
    pub weight: f64,
}

/// Counts from one detect-and-repair pass over a triangulation.
#[derive(Debug, Clone, Default)]
pub struct EdgeReport {
    /// Locally irregular edges found before any flips, as site pairs.
    pub wrong_edges: Vec<(usize, usize)>,
    /// Flips actually applied.
    pub swaps_performed: usize,
    /// Irregular edges remaining afterwards.
    pub residual_wrong: usize,
}

/// A weighted spherical Voronoi tessellation: one convex cell per generator.
#[derive(Debug, Clone)]
pub struct Tessellation {
    generators: Vec<Generator>,
    cells: Vec<SphericalPolygon>,
    mesh: HullMesh,
    overlap: bool,
}

impl Tessellation {
    /// Builds the tessellation for the given generators from scratch:
    /// convex hull of the positions, then the weighted dual.
    pub fn build(generators: &[Generator]) -> Result<Tessellation> {
        let positions: Vec<UnitVec> = generators.iter().map(|g| g.position).collect();
        let weights: Vec<f64> = generators.iter().map(|g| g.weight).collect();
        let mesh = convex_hull(&positions)?;
        Tessellation::from_mesh(mesh, &weights)
    }

    /// Builds the weighted dual of an existing hull mesh. `weights[i]`
    /// belongs to site `i` of the mesh.
    pub fn from_mesh(mesh: HullMesh, weights: &[f64]) -> Result<Tessellation> {
        assert_eq!(
            mesh.sites().len(),
            weights.len(),
            "one weight per hull site"
        );
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidWeight { index: i, weight: w });
            }
        }
        // Radial projection of hull triangles is a bijection onto the sphere
        // only when the hull wraps around the center; a one-hemisphere site
        // set has no spherical dual.
        if !mesh.encloses_origin() {
            return Err(Error::HemisphereConfined);
        }

        let corners = triangle_corners(&mesh, weights)?;
        let n = mesh.sites().len();
        let mut cells = Vec::with_capacity(n);
        let mut overlap = false;
        for g in 0..n {
            let ring = walk_cell(&mesh, g);
            let verts: Vec<UnitVec> = ring.iter().map(|&t| corners[t]).collect();
            let cell = SphericalPolygon::new(verts)
                .map_err(|_| Error::DegenerateCell { generator: g })?;
            if !fan_is_convex_around(mesh.sites()[g], cell.vertices()) {
                overlap = true;
            }
            cells.push(cell);
        }
        let generators = mesh
            .sites()
            .iter()
            .zip(weights)
            .map(|(&position, &weight)| Generator { position, weight })
            .collect();
        Ok(Tessellation { generators, cells, mesh, overlap })
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    /// Cells in generator order.
    pub fn cells(&self) -> &[SphericalPolygon] {
        &self.cells
    }

    pub fn mesh(&self) -> &HullMesh {
        &self.mesh
    }

    /// True when some cell folds over itself — a sign the triangulation had
    /// irregular edges and areas should not be trusted this round.
    pub fn has_overlap(&self) -> bool {
        self.overlap
    }

    /// Cell areas as fractions of the whole sphere, in generator order.
    pub fn area_fractions(&self) -> Vec<f64> {
        let full = 4.0 * std::f64::consts::PI;
        self.cells.iter().map(|c| c.area() / full).collect()
    }
}

/// Weighted circumcenter of every hull triangle, normalized to the sphere.
fn triangle_corners(mesh: &HullMesh, weights: &[f64]) -> Result<Vec<UnitVec>> {
    let sites = mesh.sites();
    mesh.triangles()
        .iter()
        .map(|&[a, b, c]| {
            let tri = SphericalTriangle::new(sites[a], sites[b], sites[c]);
            weighted_circumcenter(&tri, [weights[a], weights[b], weights[c]])
            .map_err(|e| match e {
                // Re-annotate with real site ids so callers can reseed.
                Error::CircumcenterAtOrigin { .. } => {
                    Error::CircumcenterAtOrigin { triangle: [a, b, c] }
                }
                Error::DegenerateTriangle => Error::FlatTriangle { triangle: [a, b, c] },
                other => other,
            })
        })
        .collect()
}

/// Hull triangles incident to `g`, in counter-clockwise order around it.
///
/// From triangle `(g, u, v)` the walk continues into the neighbor across
/// the directed edge `(v, g)` — the triangle containing `(g, v)`.
fn walk_cell(mesh: &HullMesh, g: usize) -> Vec<usize> {
    let start = mesh.vertex_triangle(g);
    let mut ring = Vec::new();
    let mut t = start;
    loop {
        ring.push(t);
        let tri = mesh.triangles()[t];
        let s = tri.iter().position(|&v| v == g).expect("walk stays around g");
        // Edge slots: neighbor k sits across edge (tri[k], tri[k+1]); the
        // edge (v, g) starts at slot s+2.
        t = mesh.neighbors(t)[(s + 2) % 3];
        if t == start {
            break;
        }
    }
    ring
}

/// True when every fan triangle (generator, v_i, v_{i+1}) is positively
/// oriented, i.e. the ring winds counter-clockwise around the generator.
/// A negative wedge is the symptom of a folded cell; it also fires when a
/// site's weight is so small relative to its neighbors that the site falls
/// outside its own region, which is why the flag is advisory rather than
/// an error.
fn fan_is_convex_around(g: UnitVec, verts: &[UnitVec]) -> bool {
    let n = verts.len();
    for i in 0..n {
        let a = verts[i].as_vec3();
        let b = verts[(i + 1) % n].as_vec3();
        if g.as_vec3().triple(a, b) <= 0.0 {
            return false;
        }
    }
    true
}

/// Finds hull edges that violate local regularity.
///
/// For edge `(a, b)` shared by triangles `(a, b, c)` and `(b, a, d)`, the
/// edge is wrong when the opposite site `d` achieves a strictly smaller
/// power than the triangle's own sites at the first triangle's (planar)
/// weighted circumcenter. Ties within [`REGULARITY_MARGIN`] are regular,
/// so cocircular quads do not flicker. Pairs are returned sorted.
pub fn detect_wrong_edges(mesh: &HullMesh, weights: &[f64]) -> Vec<(usize, usize)> {
    let sites = mesh.sites();
    let mut wrong = Vec::new();
    for edge in mesh.edges() {
        let (a, b) = edge.verts;
        let (t_ab, t_ba) = edge.tris;
        let c = third_vertex(mesh.triangles()[t_ab], a, b);
        let d = third_vertex(mesh.triangles()[t_ba], b, a);
        if edge_is_wrong(sites, weights, [a, b, c], d) {
            wrong.push((a, b));
        }
    }
    wrong.sort_unstable();
    wrong
}

fn third_vertex(tri: [usize; 3], a: usize, b: usize) -> usize {
    *tri.iter()
        .find(|&&v| v != a && v != b)
        .expect("triangle has a third vertex")
}

/// Regularity test for the quad around one edge: does site `d` beat the
/// sites of triangle `[a, b, c]` at that triangle's planar power center?
fn edge_is_wrong(sites: &[UnitVec], weights: &[f64], tri: [usize; 3], d: usize) -> bool {
    let [a, b, c] = tri;
    let t = SphericalTriangle::new(sites[a], sites[b], sites[c]);
    let x = match weighted_circumcenter_raw(&t, [weights[a], weights[b], weights[c]]) {
        Ok(x) => x,
        // A degenerate triangle has no power center to test against.
        Err(_) => return false,
    };
    let own = power(sites[a].as_vec3(), weights[a], x);
    let rival = power(sites[d].as_vec3(), weights[d], x);
    rival < own - REGULARITY_MARGIN
}

/// Repairs wrong edges by flipping them, in first-in-first-out order with
/// re-examination of the surrounding quad after each flip.
///
/// A flip of edge `(a, b)` with opposite vertices `c, d` replaces triangles
/// `(a, b, c), (b, a, d)` with `(d, b, c), (c, a, d)`. Flips are skipped
/// when the replacement edge already exists or either new triangle would
/// not face outward. Work is bounded by `max_tests` edge examinations
/// (default: three per hull edge). If the flipped triangulation ends up
/// with more wrong edges than the input, the input is returned unchanged —
/// the wrong-edge count never increases.
pub fn swap_wrong_edges(
    mesh: &HullMesh,
    weights: &[f64],
    max_tests: Option<usize>,
) -> Result<(HullMesh, EdgeReport)> {
    let initial = detect_wrong_edges(mesh, weights);
    if initial.is_empty() {
        return Ok((
            mesh.clone(),
            EdgeReport { wrong_edges: initial, swaps_performed: 0, residual_wrong: 0 },
        ));
    }

    let sites = mesh.sites();
    let interior = mesh.interior_point();
    // A mesh that wraps the sphere center must keep doing so across flips,
    // or its radial projection (and hence the dual) falls apart.
    let guard_center = mesh.encloses_origin();
    let budget = max_tests.unwrap_or(3 * mesh.edges().len());

    let mut tris: Vec<[usize; 3]> = mesh.triangles().to_vec();
    // Triangle id holding each directed edge; kept in sync across flips.
    let mut dir: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, tri) in tris.iter().enumerate() {
        for k in 0..3 {
            dir.insert((tri[k], tri[(k + 1) % 3]), t);
        }
    }

    let mut queue: VecDeque<(usize, usize)> = initial.iter().copied().collect();
    let mut queued: HashSet<(usize, usize)> = initial.iter().copied().collect();
    let mut swaps = 0usize;
    let mut tests = 0usize;

    while let Some((a, b)) = queue.pop_front() {
        queued.remove(&(a, b));
        if tests >= budget {
            break;
        }
        tests += 1;

        // The edge may have been flipped away since it was queued.
        let (t_ab, t_ba) = match (dir.get(&(a, b)), dir.get(&(b, a))) {
            (Some(&x), Some(&y)) => (x, y),
            _ => continue,
        };
        let c = third_vertex(tris[t_ab], a, b);
        let d = third_vertex(tris[t_ba], b, a);
        if !edge_is_wrong(sites, weights, rotate_to_front(tris[t_ab], a), d) {
            continue;
        }
        // The replacement diagonal must be new, and both replacement
        // triangles must keep facing outward.
        if dir.contains_key(&(c, d)) || dir.contains_key(&(d, c)) {
            continue;
        }
        let new_ab = [d, b, c];
        let new_ba = [c, a, d];
        if !faces_outward(sites, interior, new_ab) || !faces_outward(sites, interior, new_ba) {
            continue;
        }
        if guard_center && !(center_positive(sites, new_ab) && center_positive(sites, new_ba)) {
            continue;
        }

        for tri in [tris[t_ab], tris[t_ba]] {
            for k in 0..3 {
                dir.remove(&(tri[k], tri[(k + 1) % 3]));
            }
        }
        tris[t_ab] = new_ab;
        tris[t_ba] = new_ba;
        for (t, tri) in [(t_ab, new_ab), (t_ba, new_ba)] {
            for k in 0..3 {
                dir.insert((tri[k], tri[(k + 1) % 3]), t);
            }
        }
        swaps += 1;

        // The quad's rim may have turned irregular; look again.
        for pair in [(a, d), (d, b), (b, c), (c, a)] {
            let key = (pair.0.min(pair.1), pair.0.max(pair.1));
            if queued.insert(key) {
                queue.push_back(key);
            }
        }
    }

    if swaps == 0 {
        let residual = initial.len();
        return Ok((
            mesh.clone(),
            EdgeReport { wrong_edges: initial, swaps_performed: 0, residual_wrong: residual },
        ));
    }

    let flipped = HullMesh::from_triangles(sites.to_vec(), tris)?;
    let residual = detect_wrong_edges(&flipped, weights).len();
    if residual > initial.len() {
        // Never hand back something worse than the input.
        let residual = initial.len();
        return Ok((
            mesh.clone(),
            EdgeReport { wrong_edges: initial, swaps_performed: 0, residual_wrong: residual },
        ));
    }
    Ok((
        flipped,
        EdgeReport { wrong_edges: initial, swaps_performed: swaps, residual_wrong: residual },
    ))
}

fn rotate_to_front(tri: [usize; 3], v: usize) -> [usize; 3] {
    let s = tri.iter().position(|&x| x == v).expect("vertex in triangle");
    [tri[s], tri[(s + 1) % 3], tri[(s + 2) % 3]]
}

fn faces_outward(sites: &[UnitVec], interior: Vec3, tri: [usize; 3]) -> bool {
    let a = sites[tri[0]].as_vec3() - interior;
    let b = sites[tri[1]].as_vec3() - interior;
    let c = sites[tri[2]].as_vec3() - interior;
    a.triple(b, c) > 0.0
}

/// True when the triangle keeps the sphere center on its inner side.
fn center_positive(sites: &[UnitVec], tri: [usize; 3]) -> bool {
    sites[tri[0]]
        .as_vec3()
        .triple(sites[tri[1]].as_vec3(), sites[tri[2]].as_vec3())
        > 0.0
}
