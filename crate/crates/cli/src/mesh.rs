//! Plain-text triangle-mesh export (OBJ) for tessellations and icospheres.
//!
//! `cell-mesh` fan-triangulates every cell into its own object; `wireframe`
//! emits each cell boundary (or icosphere edge) as a closed polyline. The
//! header comment states the element counts.

use std::collections::BTreeSet;
use std::io::{self, Write};

use sphere_layout::{IcoSphere, Tessellation};

/// What the exported geometry contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    /// Filled cells: one object per cell, fan-triangulated.
    CellMesh,
    /// Cell outlines: one closed polyline per cell.
    Wireframe,
}

/// Writes one object per tessellation cell, named `cell_<index>`.
pub fn export_tessellation<W: Write>(
    tess: &Tessellation,
    format: MeshFormat,
    out: &mut W,
) -> io::Result<()> {
    let cells = tess.cells();
    let vertex_total: usize = cells.iter().map(|c| c.len()).sum();
    writeln!(out, "# spherical tessellation, {} cells", cells.len())?;
    match format {
        MeshFormat::CellMesh => {
            let triangles: usize = cells.iter().map(|c| c.len() - 2).sum();
            writeln!(out, "# vertices: {vertex_total}, triangles: {triangles}")?;
        }
        MeshFormat::Wireframe => {
            writeln!(out, "# vertices: {vertex_total}, polylines: {}", cells.len())?;
        }
    }

    let mut base = 1usize; // OBJ indices are 1-based
    for (i, cell) in cells.iter().enumerate() {
        writeln!(out, "o cell_{i}")?;
        for v in cell.vertices() {
            let p = v.as_vec3();
            writeln!(out, "v {} {} {}", p.x, p.y, p.z)?;
        }
        let k = cell.len();
        match format {
            MeshFormat::CellMesh => {
                for j in 1..k - 1 {
                    writeln!(out, "f {} {} {}", base, base + j, base + j + 1)?;
                }
            }
            MeshFormat::Wireframe => {
                write!(out, "l")?;
                for j in 0..k {
                    write!(out, " {}", base + j)?;
                }
                writeln!(out, " {base}")?;
            }
        }
        base += k;
    }
    Ok(())
}

/// Writes the icosphere as one object with a shared vertex list.
pub fn export_icosphere<W: Write>(
    sphere: &IcoSphere,
    format: MeshFormat,
    out: &mut W,
) -> io::Result<()> {
    let verts = sphere.vertices();
    let faces = sphere.faces();
    writeln!(out, "# icosphere, subdivision level {}", sphere.level())?;
    match format {
        MeshFormat::CellMesh => {
            writeln!(out, "# vertices: {}, triangles: {}", verts.len(), faces.len())?;
        }
        MeshFormat::Wireframe => {
            let edges = unique_edges(faces);
            writeln!(out, "# vertices: {}, lines: {}", verts.len(), edges.len())?;
        }
    }
    writeln!(out, "o icosphere_{}", sphere.level())?;
    for v in verts {
        let p = v.as_vec3();
        writeln!(out, "v {} {} {}", p.x, p.y, p.z)?;
    }
    match format {
        MeshFormat::CellMesh => {
            for f in faces {
                writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
            }
        }
        MeshFormat::Wireframe => {
            for (a, b) in unique_edges(faces) {
                writeln!(out, "l {} {}", a + 1, b + 1)?;
            }
        }
    }
    Ok(())
}

fn unique_edges(faces: &[[usize; 3]]) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for f in faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    edges
}
