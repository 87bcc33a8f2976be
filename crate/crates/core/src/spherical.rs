//! Geometry on the unit sphere: weighted (power) distances, spherical
//! triangles and polygons, their areas and centroids, and weighted
//! circumcenters.
//!
//! Areas use the half-side (L'Huilier) excess formula, which stays accurate
//! for small triangles where the plain angle-sum excess cancels badly.
//! Polygon routines decompose into a triangle fan anchored at vertex 0 and
//! expect counter-clockwise winding (seen from outside the sphere).

use crate::error::{Error, Result};
use crate::tol;
use crate::vec3::{UnitVec, Vec3};

/// Weighted ("power") distance from a site with additive weight to a query
/// point: `|site - x|^2 - weight`.
///
/// Larger weights make a site win territory further away. Adding the same
/// constant to every weight leaves all site-vs-site comparisons unchanged.
pub fn weighted_distance(site: UnitVec, weight: f64, x: UnitVec) -> f64 {
    power(site.as_vec3(), weight, x.as_vec3())
}

/// Same formula for arbitrary (not necessarily unit) query points.
pub(crate) fn power(site: Vec3, weight: f64, x: Vec3) -> f64 {
    (site - x).norm_sq() - weight
}

/// Triangle on the unit sphere with geodesic edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalTriangle {
    pub a: UnitVec,
    pub b: UnitVec,
    pub c: UnitVec,
}

impl SphericalTriangle {
    pub fn new(a: UnitVec, b: UnitVec, c: UnitVec) -> Self {
        SphericalTriangle { a, b, c }
    }

    /// Scalar triple product `a . (b x c)`; positive for counter-clockwise
    /// winding seen from outside.
    pub fn orientation(&self) -> f64 {
        self.a.triple(self.b.as_vec3(), self.c.as_vec3())
    }

    /// Surface area (spherical excess) by the half-side formula.
    ///
    /// Returns 0 only when two vertices are *exactly* equal. Vertices that
    /// are merely within [`tol::COINCIDENT`] of each other, or collinear on
    /// one great circle, are reported as [`Error::DegenerateTriangle`] so
    /// the caller can decide what a near-degenerate sliver means.
    pub fn area(&self) -> Result<f64> {
        if self.a.as_vec3() == self.b.as_vec3()
            || self.b.as_vec3() == self.c.as_vec3()
            || self.c.as_vec3() == self.a.as_vec3()
        {
            return Ok(0.0);
        }
        if self.a.chord_to(self.b) < tol::COINCIDENT
            || self.b.chord_to(self.c) < tol::COINCIDENT
            || self.c.chord_to(self.a) < tol::COINCIDENT
            || self.orientation().abs() < tol::COINCIDENT
        {
            return Err(Error::DegenerateTriangle);
        }
        Ok(excess(self.a, self.b, self.c))
    }

    /// Centroid direction `(a + b + c) / |a + b + c|`.
    ///
    /// Fails with [`Error::DegenerateCentroid`] when the vertex sum has no
    /// direction (e.g. three points spread evenly on a great circle).
    pub fn centroid(&self) -> Result<UnitVec> {
        UnitVec::new(self.a.as_vec3() + self.b.as_vec3() + self.c.as_vec3())
            .map_err(|_| Error::DegenerateCentroid)
    }
}

/// L'Huilier's half-side excess. Assumes a proper triangle; the square-root
/// argument is clamped at zero against roundoff.
fn excess(a: UnitVec, b: UnitVec, c: UnitVec) -> f64 {
    let ab = a.arc_to(b);
    let bc = b.arc_to(c);
    let ca = c.arc_to(a);
    let s = 0.5 * (ab + bc + ca);
    let t = (0.5 * s).tan()
        * (0.5 * (s - ab)).tan()
        * (0.5 * (s - bc)).tan()
        * (0.5 * (s - ca)).tan();
    4.0 * t.max(0.0).sqrt().atan()
}

/// Fan-triangle excess that treats any degenerate triangle as contributing
/// zero area instead of failing.
fn lenient_excess(a: UnitVec, b: UnitVec, c: UnitVec) -> f64 {
    if a.chord_to(b) < tol::COINCIDENT
        || b.chord_to(c) < tol::COINCIDENT
        || c.chord_to(a) < tol::COINCIDENT
        || a.triple(b.as_vec3(), c.as_vec3()).abs() < tol::COINCIDENT
    {
        return 0.0;
    }
    excess(a, b, c)
}

/// Closed loop of unit vectors joined by geodesic edges, wound
/// counter-clockwise seen from outside the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalPolygon {
    verts: Vec<UnitVec>,
}

impl SphericalPolygon {
    /// Builds a polygon from a vertex loop.
    ///
    /// Needs at least three vertices, with consecutive vertices (including
    /// the closing pair) separated by more than [`tol::COINCIDENT`].
    pub fn new(verts: Vec<UnitVec>) -> Result<Self> {
        if verts.len() < 3 {
            return Err(Error::DegeneratePolygon);
        }
        for i in 0..verts.len() {
            let j = (i + 1) % verts.len();
            if verts[i].chord_to(verts[j]) < tol::COINCIDENT {
                return Err(Error::DegeneratePolygon);
            }
        }
        Ok(SphericalPolygon { verts })
    }

    pub fn vertices(&self) -> &[UnitVec] {
        &self.verts
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    /// Surface area: sum of fan-triangle excesses anchored at vertex 0.
    /// Degenerate fan slivers count as zero.
    pub fn area(&self) -> f64 {
        let v0 = self.verts[0];
        let mut total = 0.0;
        for w in self.verts[1..].windows(2) {
            total += lenient_excess(v0, w[0], w[1]);
        }
        total
    }

    /// Centroid direction: fan-triangle centroids weighted by fan-triangle
    /// area, then renormalized.
    pub fn centroid(&self) -> Result<UnitVec> {
        let v0 = self.verts[0];
        let mut acc = Vec3::default();
        for w in self.verts[1..].windows(2) {
            let e = lenient_excess(v0, w[0], w[1]);
            if e > 0.0 {
                let dir = v0.as_vec3() + w[0].as_vec3() + w[1].as_vec3();
                let n = dir.norm();
                if n >= tol::COINCIDENT {
                    acc = acc + dir.scale(e / n);
                }
            }
        }
        UnitVec::new(acc).map_err(|_| Error::DegenerateCentroid)
    }

    /// Containment test for convex polygons: the point must be on the inner
    /// side of every edge's great circle, with [`tol::CONTAINMENT_SLACK`]
    /// slack so boundary points count as inside.
    pub fn contains(&self, p: UnitVec) -> bool {
        for i in 0..self.verts.len() {
            let j = (i + 1) % self.verts.len();
            let n = self.verts[i].cross(self.verts[j].as_vec3());
            if p.dot(n) < -tol::CONTAINMENT_SLACK {
                return false;
            }
        }
        true
    }

    /// Clips against the half-space `x . normal >= 0` bounded by a great
    /// circle, returning `None` when nothing with positive extent survives.
    ///
    /// Convexity and winding are preserved; new vertices appear where edges
    /// cross the clip plane.
    pub fn clip_halfspace(&self, normal: Vec3) -> Option<SphericalPolygon> {
        let mut out: Vec<UnitVec> = Vec::with_capacity(self.verts.len() + 2);
        for i in 0..self.verts.len() {
            let p = self.verts[i];
            let q = self.verts[(i + 1) % self.verts.len()];
            let sp = p.dot(normal);
            let sq = q.dot(normal);
            let p_in = sp >= -tol::ON_PLANE;
            let q_in = sq >= -tol::ON_PLANE;
            if p_in {
                out.push(p);
            }
            // Strict sign change: the geodesic from p to q crosses the plane.
            if (sp > tol::ON_PLANE && sq < -tol::ON_PLANE)
                || (sp < -tol::ON_PLANE && sq > tol::ON_PLANE)
            {
                let t = sp / (sp - sq);
                let mid = p.as_vec3() + (q.as_vec3() - p.as_vec3()).scale(t);
                if let Ok(u) = UnitVec::new(mid) {
                    out.push(u);
                }
            }
            let _ = q_in;
        }
        // Collapse coincident neighbors introduced by on-plane vertices.
        let mut dedup: Vec<UnitVec> = Vec::with_capacity(out.len());
        for v in out {
            if dedup.last().map_or(true, |l| l.chord_to(v) >= tol::COINCIDENT) {
                dedup.push(v);
            }
        }
        while dedup.len() >= 2
            && dedup[0].chord_to(dedup[dedup.len() - 1]) < tol::COINCIDENT
        {
            dedup.pop();
        }
        SphericalPolygon::new(dedup).ok()
    }
}

/// Weighted circumcenter of a triangle, projected onto the sphere.
///
/// See [`weighted_circumcenter_raw`] for the defining planar point; this
/// radially normalizes it. Fails with [`Error::CircumcenterAtOrigin`] when
/// the planar point is within 1e-9 of the sphere center and so has no
/// meaningful projection (the reported triangle holds local vertex slots
/// 0..3 unless the caller re-annotates it with site ids).
pub fn weighted_circumcenter(t: &SphericalTriangle, weights: [f64; 3]) -> Result<UnitVec> {
    let raw = weighted_circumcenter_raw(t, weights)?;
    if raw.norm() < tol::NEAR_ORIGIN {
        return Err(Error::CircumcenterAtOrigin { triangle: [0, 1, 2] });
    }
    UnitVec::new(raw).map_err(|_| Error::CircumcenterAtOrigin { triangle: [0, 1, 2] })
}

/// The point in the triangle's plane with equal weighted distance to all
/// three vertices.
///
/// Writing `x = a + s(b-a) + t(c-a)`, the two equal-distance conditions
/// reduce to a 2x2 linear system in `(s, t)`; with equal weights the result
/// is the classical planar circumcenter. Fails with
/// [`Error::DegenerateTriangle`] when the triangle spans no plane.
pub fn weighted_circumcenter_raw(t: &SphericalTriangle, weights: [f64; 3]) -> Result<Vec3> {
    let a = t.a.as_vec3();
    let [wa, wb, wc] = weights;
    let u = t.b.as_vec3() - a;
    let v = t.c.as_vec3() - a;
    let uu = u.norm_sq();
    let vv = v.norm_sq();
    let uv = u.dot(v);
    let det = uu * vv - uv * uv;
    if det.abs() < tol::LINEAR_SOLVE * uu * vv || uu == 0.0 || vv == 0.0 {
        return Err(Error::DegenerateTriangle);
    }
    // u.x = (wa - wb)/2 and v.x = (wa - wc)/2, with u.a = a.b - 1, v.a = a.c - 1.
    let r1 = 0.5 * (wa - wb) - (a.dot(t.b.as_vec3()) - 1.0);
    let r2 = 0.5 * (wa - wc) - (a.dot(t.c.as_vec3()) - 1.0);
    let s = (r1 * vv - r2 * uv) / det;
    let tt = (r2 * uu - r1 * uv) / det;
    Ok(a + u.scale(s) + v.scale(tt))
}
