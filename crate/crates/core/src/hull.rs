//! Convex hull of points on the unit sphere.
//!
//! For points on a sphere the hull is simplicial (generic position) and its
//! triangles, read as spherical triangles, radially project to a partition
//! of the sphere — which makes the hull double as the spherical Delaunay
//! triangulation of the sites.
//!
//! The construction is the randomized incremental algorithm with conflict
//! lists: insertion order is shuffled by a fixed-seed generator, each not
//! yet inserted point remembers one hull face it can see, and inserting a
//! point replaces the faces it sees with a cone to the horizon. Expected
//! O(n log n). The face list is canonicalized (smallest vertex first, faces
//! sorted) so identical input always yields the identical mesh regardless
//! of internal processing order.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tol;
use crate::vec3::{UnitVec, Vec3};

/// Fixed shuffle seed: randomized insertion order for complexity, identical
/// across runs for determinism.
const SHUFFLE_SEED: u64 = 0x0051_7EED;

/// Undirected hull edge with its two incident triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    /// Vertex pair, smaller index first.
    pub verts: (usize, usize),
    /// The two triangles sharing this edge.
    pub tris: (usize, usize),
}

/// Triangulated closed surface over a site set: the convex hull, or a hull
/// modified by edge flips.
///
/// Every site is a vertex, every edge has exactly two incident triangles,
/// triangles are consistently wound facing away from the interior, and the
/// triangle count is `2 * sites - 4`.
#[derive(Debug, Clone)]
pub struct HullMesh {
    sites: Vec<UnitVec>,
    triangles: Vec<[usize; 3]>,
    /// `neighbors[t][k]` is the triangle across edge `(tri[k], tri[(k+1)%3])`.
    neighbors: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    edge_index: HashMap<(usize, usize), usize>,
    /// One incident triangle per vertex, for fan walks.
    vertex_tri: Vec<usize>,
    /// Mean of the sites: strictly interior, used for orientation tests.
    interior: Vec3,
}

impl HullMesh {
    /// Builds a mesh from an explicit triangle list, validating that it is
    /// a closed, consistently oriented 2-manifold over all sites.
    pub fn from_triangles(sites: Vec<UnitVec>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = sites.len();
        if n < 4 {
            return Err(Error::TooFewPoints(n));
        }
        if triangles.len() != 2 * n - 4 {
            return Err(Error::DegenerateInput);
        }

        // Canonical form: smallest vertex first in each triangle (cyclic
        // rotation preserves winding), then lexicographic face order.
        for t in triangles.iter_mut() {
            let k = (0..3).min_by_key(|&k| t[k]).unwrap();
            t.rotate_left(k);
        }
        triangles.sort_unstable();

        let mut interior = Vec3::default();
        for s in &sites {
            interior = interior + s.as_vec3();
        }
        interior = interior.scale(1.0 / n as f64);

        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut vertex_tri = vec![usize::MAX; n];
        for (ti, t) in triangles.iter().enumerate() {
            if t[0] == t[1] || t[1] == t[2] || t[2] == t[0] {
                return Err(Error::DegenerateInput);
            }
            for k in 0..3 {
                let v = t[k];
                if v >= n {
                    return Err(Error::DegenerateInput);
                }
                if vertex_tri[v] == usize::MAX {
                    vertex_tri[v] = ti;
                }
                // Each directed edge may appear exactly once.
                if directed.insert((v, t[(k + 1) % 3]), ti).is_some() {
                    return Err(Error::DegenerateInput);
                }
            }
            if !outward(&sites, interior, *t) {
                return Err(Error::DegenerateInput);
            }
        }
        if vertex_tri.contains(&usize::MAX) {
            // Some site is not a vertex of the surface.
            return Err(Error::DegenerateInput);
        }

        let mut neighbors = vec![[usize::MAX; 3]; triangles.len()];
        for (ti, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                let rev = (t[(k + 1) % 3], t[k]);
                match directed.get(&rev) {
                    Some(&other) => neighbors[ti][k] = other,
                    // Reverse edge missing: surface is not closed.
                    None => return Err(Error::DegenerateInput),
                }
            }
        }

        let mut edges = Vec::with_capacity(3 * triangles.len() / 2);
        for (ti, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if a < b {
                    edges.push(Edge { verts: (a, b), tris: (ti, neighbors[ti][k]) });
                }
            }
        }
        edges.sort_unstable_by_key(|e| e.verts);
        let edge_index = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.verts, i))
            .collect();

        Ok(HullMesh { sites, triangles, neighbors, edges, edge_index, vertex_tri, interior })
    }

    pub fn sites(&self) -> &[UnitVec] {
        &self.sites
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Neighbor triangles of `t`; entry `k` lies across edge
    /// `(triangles[t][k], triangles[t][(k+1)%3])`.
    pub fn neighbors(&self, t: usize) -> [usize; 3] {
        self.neighbors[t]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// One triangle incident to vertex `v`.
    pub fn vertex_triangle(&self, v: usize) -> usize {
        self.vertex_tri[v]
    }

    /// A point strictly inside the surface (the site mean).
    pub fn interior_point(&self) -> Vec3 {
        self.interior
    }

    /// The two triangles sharing the undirected edge `(a, b)`.
    pub fn edge_neighbors(&self, a: usize, b: usize) -> Result<(usize, usize)> {
        let key = (a.min(b), a.max(b));
        match self.edge_index.get(&key) {
            Some(&i) => Ok(self.edges[i].tris),
            None => Err(Error::UnknownEdge(a, b)),
        }
    }

    /// True when the triangle faces away from the interior point.
    pub fn is_outward(&self, t: [usize; 3]) -> bool {
        outward(&self.sites, self.interior, t)
    }

    /// True when the sphere center lies strictly inside the hull, i.e. every
    /// triangle `(a, b, c)` has positive triple product `a . (b x c)`.
    ///
    /// Radial projection of the hull onto the sphere is only a bijection in
    /// this case; consumers that build the spherical dual require it.
    pub fn encloses_origin(&self) -> bool {
        self.triangles.iter().all(|&[a, b, c]| {
            let (a, b, c) = (self.sites[a].as_vec3(), self.sites[b].as_vec3(), self.sites[c].as_vec3());
            a.dot(b.cross(c)) > 0.0
        })
    }
}

fn outward(sites: &[UnitVec], interior: Vec3, t: [usize; 3]) -> bool {
    let a = sites[t[0]].as_vec3() - interior;
    let b = sites[t[1]].as_vec3() - interior;
    let c = sites[t[2]].as_vec3() - interior;
    a.triple(b, c) > 0.0
}

/// Signed visibility volume of point `p` over a face: positive when `p` is
/// strictly outside the face plane.
fn visibility(sites: &[UnitVec], face: [usize; 3], p: Vec3) -> f64 {
    let a = sites[face[0]].as_vec3();
    let u = sites[face[1]].as_vec3() - a;
    let v = sites[face[2]].as_vec3() - a;
    u.cross(v).dot(p - a)
}

struct Face {
    v: [usize; 3],
    nbr: [usize; 3],
    outside: Vec<usize>,
    alive: bool,
}

/// Convex hull of `sites`.
///
/// Preconditions: at least four points, pairwise distinct beyond
/// [`tol::DUPLICATE_CHORD`], spanning a volume. Inputs with five or more
/// exactly cocircular points can defeat the on-plane tie-breaking and are
/// reported as [`Error::DegenerateInput`] rather than silently mis-meshed.
pub fn convex_hull(sites: &[UnitVec]) -> Result<HullMesh> {
    let n = sites.len();
    if n < 4 {
        return Err(Error::TooFewPoints(n));
    }
    reject_duplicates(sites)?;

    // Initial simplex: a far pair, the point spanning the widest triangle
    // with it, and the point of largest volume against that triangle.
    let p0 = 0;
    let p1 = (1..n)
        .max_by(|&i, &j| {
            let di = sites[p0].chord_to(sites[i]);
            let dj = sites[p0].chord_to(sites[j]);
            di.partial_cmp(&dj).unwrap()
        })
        .unwrap();
    let u = sites[p1].as_vec3() - sites[p0].as_vec3();
    let p2 = (0..n)
        .filter(|&i| i != p0 && i != p1)
        .max_by(|&i, &j| {
            let ai = u.cross(sites[i].as_vec3() - sites[p0].as_vec3()).norm_sq();
            let aj = u.cross(sites[j].as_vec3() - sites[p0].as_vec3()).norm_sq();
            ai.partial_cmp(&aj).unwrap()
        })
        .ok_or(Error::DegenerateInput)?;
    let base = [p0, p1, p2];
    let p3 = (0..n)
        .filter(|&i| i != p0 && i != p1 && i != p2)
        .max_by(|&i, &j| {
            let vi = visibility(sites, base, sites[i].as_vec3()).abs();
            let vj = visibility(sites, base, sites[j].as_vec3()).abs();
            vi.partial_cmp(&vj).unwrap()
        })
        .ok_or(Error::DegenerateInput)?;
    if visibility(sites, base, sites[p3].as_vec3()).abs() < tol::ON_PLANE {
        return Err(Error::DegenerateInput);
    }

    // Orient the simplex so every face looks away from its centroid.
    let (q1, q2) = if visibility(sites, base, sites[p3].as_vec3()) < 0.0 {
        (p1, p2)
    } else {
        (p2, p1)
    };
    let simplex = [p0, q1, q2, p3];
    let centroid = simplex
        .iter()
        .fold(Vec3::default(), |acc, &i| acc + sites[i].as_vec3())
        .scale(0.25);

    let mut faces: Vec<Face> = Vec::new();
    for t in [
        [p0, q1, q2],
        [p0, q2, p3],
        [q2, q1, p3],
        [q1, p0, p3],
    ] {
        debug_assert!(visibility(sites, t, centroid) < 0.0);
        faces.push(Face { v: t, nbr: [usize::MAX; 3], outside: Vec::new(), alive: true });
    }
    wire_neighbors(&mut faces, &[0, 1, 2, 3]);

    // Conflict lists: each pending point remembers one face it sees.
    let mut conflict: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        if simplex.contains(&i) {
            continue;
        }
        for (fi, f) in faces.iter_mut().enumerate() {
            if visibility(sites, f.v, sites[i].as_vec3()) > tol::ON_PLANE {
                conflict[i] = Some(fi);
                f.outside.push(i);
                break;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).filter(|i| !simplex.contains(i)).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(SHUFFLE_SEED));

    for &p in &order {
        let Some(seed) = conflict[p] else { continue };
        if !faces[seed].alive {
            // Its face was replaced and redistribution dropped it.
            continue;
        }
        insert_point(sites, &mut faces, &mut conflict, p, seed);
    }

    let mut tris: Vec<[usize; 3]> = faces.iter().filter(|f| f.alive).map(|f| f.v).collect();
    tris.shrink_to_fit();
    HullMesh::from_triangles(sites.to_vec(), tris)
}

/// O(n log n)-ish duplicate scan: sort by x, compare within a sliding window.
fn reject_duplicates(sites: &[UnitVec]) -> Result<()> {
    let mut idx: Vec<usize> = (0..sites.len()).collect();
    idx.sort_unstable_by(|&i, &j| sites[i].x.partial_cmp(&sites[j].x).unwrap());
    for a in 0..idx.len() {
        for b in (a + 1)..idx.len() {
            if sites[idx[b]].x - sites[idx[a]].x > tol::DUPLICATE_CHORD {
                break;
            }
            if sites[idx[a]].chord_to(sites[idx[b]]) < tol::DUPLICATE_CHORD {
                let (lo, hi) = (idx[a].min(idx[b]), idx[a].max(idx[b]));
                return Err(Error::DuplicatePoint(lo, hi));
            }
        }
    }
    Ok(())
}

fn wire_neighbors(faces: &mut [Face], ids: &[usize]) {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for &fi in ids {
        let t = faces[fi].v;
        for k in 0..3 {
            directed.insert((t[k], t[(k + 1) % 3]), fi);
        }
    }
    for &fi in ids {
        let t = faces[fi].v;
        for k in 0..3 {
            faces[fi].nbr[k] = directed[&(t[(k + 1) % 3], t[k])];
        }
    }
}

fn insert_point(
    sites: &[UnitVec],
    faces: &mut Vec<Face>,
    conflict: &mut [Option<usize>],
    p: usize,
    seed: usize,
) {
    let pv = sites[p].as_vec3();

    // Flood the visible region.
    let mut visible = vec![seed];
    let mut seen: HashSet<usize> = HashSet::new();
    seen.insert(seed);
    let mut stack = vec![seed];
    while let Some(f) = stack.pop() {
        for k in 0..3 {
            let g = faces[f].nbr[k];
            if seen.contains(&g) {
                continue;
            }
            if faces[g].alive && visibility(sites, faces[g].v, pv) > tol::ON_PLANE {
                seen.insert(g);
                visible.push(g);
                stack.push(g);
            }
        }
    }

    // Horizon: directed edges of visible faces whose far side stays.
    struct HorizonEdge {
        u: usize,
        v: usize,
        kept: usize,
        kept_slot: usize,
    }
    let mut horizon: Vec<HorizonEdge> = Vec::new();
    for &f in &visible {
        for k in 0..3 {
            let g = faces[f].nbr[k];
            if seen.contains(&g) {
                continue;
            }
            let (u, v) = (faces[f].v[k], faces[f].v[(k + 1) % 3]);
            let kept_slot = (0..3)
                .find(|&s| faces[g].v[s] == v && faces[g].v[(s + 1) % 3] == u)
                .expect("kept neighbor must share the reversed edge");
            horizon.push(HorizonEdge { u, v, kept: g, kept_slot });
        }
    }
    debug_assert!(horizon.len() >= 3);

    // Gather points needing a new home before tearing faces down.
    let mut orphans: Vec<usize> = Vec::new();
    for &f in &visible {
        orphans.append(&mut faces[f].outside);
        faces[f].alive = false;
    }

    // Cone of new faces; the directed horizon edges keep winding outward.
    let mut by_start: HashMap<usize, usize> = HashMap::new();
    let mut by_end: HashMap<usize, usize> = HashMap::new();
    let first_new = faces.len();
    for h in &horizon {
        let id = faces.len();
        by_start.insert(h.u, id);
        by_end.insert(h.v, id);
        faces.push(Face {
            v: [h.u, h.v, p],
            nbr: [usize::MAX; 3],
            outside: Vec::new(),
            alive: true,
        });
    }
    for (i, h) in horizon.iter().enumerate() {
        let id = first_new + i;
        faces[id].nbr[0] = h.kept;
        faces[id].nbr[1] = by_start[&h.v];
        faces[id].nbr[2] = by_end[&h.u];
        faces[h.kept].nbr[h.kept_slot] = id;
    }

    for q in orphans {
        if q == p {
            conflict[q] = None;
            continue;
        }
        conflict[q] = None;
        for i in 0..horizon.len() {
            let id = first_new + i;
            if visibility(sites, faces[id].v, sites[q].as_vec3()) > tol::ON_PLANE {
                conflict[q] = Some(id);
                faces[id].outside.push(q);
                break;
            }
        }
    }
}
