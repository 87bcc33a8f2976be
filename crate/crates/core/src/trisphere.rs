//! Icosphere construction and the TriSphere placement baseline: nodes sit
//! at centroids of icosphere faces, and any face beyond the first `n` is
//! wasted surface.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::spherical::SphericalTriangle;
use crate::vec3::{UnitVec, Vec3};

/// Largest supported subdivision level (20 * 4^7 = 327,680 faces).
pub const MAX_LEVEL: u32 = 7;

/// Icosahedron subdivided `level` times, with every vertex pushed back onto
/// the unit sphere.
///
/// Subdivision replaces each face by four (three corner faces plus the
/// middle), appended in face order — so the children of face `f` at the
/// next level are exactly faces `4f .. 4f+4`, and descendants `e` levels
/// down occupy `f * 4^e .. (f+1) * 4^e`. Faces are wound counter-clockwise
/// seen from outside.
#[derive(Debug, Clone)]
pub struct IcoSphere {
    level: u32,
    vertices: Vec<UnitVec>,
    faces: Vec<[usize; 3]>,
}

impl IcoSphere {
    /// Builds the sphere at `level`, failing with [`Error::LevelTooLarge`]
    /// above [`MAX_LEVEL`].
    pub fn build(level: u32) -> Result<IcoSphere> {
        if level > MAX_LEVEL {
            return Err(Error::LevelTooLarge(level));
        }
        let (mut vertices, mut faces) = icosahedron();
        for _ in 0..level {
            subdivide(&mut vertices, &mut faces);
        }
        Ok(IcoSphere { level, vertices, faces })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn vertices(&self) -> &[UnitVec] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face_triangle(&self, f: usize) -> SphericalTriangle {
        let [a, b, c] = self.faces[f];
        SphericalTriangle::new(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    /// Centroid direction of face `f`.
    pub fn face_centroid(&self, f: usize) -> UnitVec {
        // Icosphere faces are far from degenerate at every supported level.
        self.face_triangle(f).centroid().expect("icosphere face centroid")
    }
}

/// Faces at a given level: `20 * 4^level`.
pub fn face_count_at(level: u32) -> u64 {
    20 * 4u64.pow(level)
}

/// How much of the face budget a TriSphere placement leaves unused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WasteStats {
    /// Total faces at the chosen level.
    pub faces: u64,
    /// Faces actually occupied by nodes.
    pub used: u64,
}

impl WasteStats {
    /// Unused share as an exact percentage.
    ///
    /// `100 * (faces - used) / faces` reduces to `5 * (faces - used) / 4^level`
    /// for face counts of the form `20 * 4^level`; the numerator is a small
    /// integer and the denominator a power of two, so the division is exact
    /// in an `f64`.
    pub fn waste_percent(self) -> f64 {
        100.0 * (self.faces - self.used) as f64 / self.faces as f64
    }

    /// Unused share in [0, 1].
    pub fn waste_fraction(self) -> f64 {
        (self.faces - self.used) as f64 / self.faces as f64
    }

    pub fn unused(self) -> u64 {
        self.faces - self.used
    }
}

/// TriSphere placement of `n` nodes.
#[derive(Debug, Clone)]
pub struct TriSpherePlacement {
    /// Subdivision level chosen for `n`.
    pub level: u32,
    /// Node positions: centroids of the first `n` faces.
    pub positions: Vec<UnitVec>,
    /// Budget bookkeeping at that level.
    pub stats: WasteStats,
    /// The sphere the placement lives on.
    pub sphere: IcoSphere,
}

/// Places `n >= 1` nodes at centroids of the first `n` faces of the
/// smallest icosphere with at least `n` faces.
pub fn trisphere_layout(n: usize) -> Result<TriSpherePlacement> {
    assert!(n >= 1, "trisphere placement needs at least one node");
    let level = level_for(n)?;
    let sphere = IcoSphere::build(level)?;
    let positions = (0..n).map(|f| sphere.face_centroid(f)).collect();
    let stats = WasteStats { faces: sphere.face_count() as u64, used: n as u64 };
    Ok(TriSpherePlacement { level, positions, stats, sphere })
}

/// Smallest level whose face budget reaches `n`.
pub fn level_for(n: usize) -> Result<u32> {
    for level in 0..=MAX_LEVEL {
        if face_count_at(level) >= n as u64 {
            return Ok(level);
        }
    }
    Err(Error::LevelTooLarge(MAX_LEVEL + 1))
}

/// The twelve-vertex icosahedron with outward counter-clockwise faces.
fn icosahedron() -> (Vec<UnitVec>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let vertices: Vec<UnitVec> = raw
        .iter()
        .map(|&(x, y, z)| UnitVec::new(Vec3::new(x, y, z)).unwrap())
        .collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (vertices, faces)
}

/// One midpoint subdivision step; new vertices are re-normalized onto the
/// sphere and shared across faces through the edge cache.
fn subdivide(vertices: &mut Vec<UnitVec>, faces: &mut Vec<[usize; 3]>) {
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<UnitVec>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoint.entry(key).or_insert_with(|| {
            let m = vertices[a].as_vec3() + vertices[b].as_vec3();
            vertices.push(UnitVec::new(m).unwrap());
            vertices.len() - 1
        })
    };
    let old = std::mem::take(faces);
    faces.reserve(old.len() * 4);
    for [a, b, c] in old {
        let ab = mid(a, b, vertices);
        let bc = mid(b, c, vertices);
        let ca = mid(c, a, vertices);
        faces.push([a, ab, ca]);
        faces.push([b, bc, ab]);
        faces.push([c, ca, bc]);
        faces.push([ab, bc, ca]);
    }
}
