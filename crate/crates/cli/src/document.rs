//! Layout output document: a JSON file carrying the run configuration and
//! every placed node, serialized so numbers round-trip losslessly.

use std::io;

use serde::{Deserialize, Serialize};
use sphere_layout::{Layout, TreeNode};

use crate::CliError;

/// Run configuration and summary, written at the top of every layout file
/// so the output is reproducible from the file alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayoutHeader {
    pub algorithm: String,
    pub seed: u64,
    pub epsilon: f64,
    pub delta: f64,
    /// Relaxation rounds spent on the first sphere (0 without a solver run).
    pub iterations: usize,
    /// Worst cell-size error of the first sphere's placement.
    pub final_error: f64,
    /// First sphere's face budget left unused, in percent (0 for the
    /// relaxation algorithm, which covers the whole surface).
    pub waste_percent: f64,
}

/// One placed node. `region` is empty for the root, which sits at the
/// center and owns no surface.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocumentNode {
    pub id: String,
    pub label: String,
    pub level: u32,
    pub position: [f64; 3],
    pub radius: f64,
    pub region: Vec<[f64; 3]>,
}

/// The whole output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayoutDocument {
    pub header: LayoutHeader,
    pub nodes: Vec<DocumentNode>,
}

/// Flattens a placed layout into its output document.
pub fn document_from_layout(layout: &Layout, header: LayoutHeader) -> LayoutDocument {
    let nodes = layout
        .nodes()
        .iter()
        .map(|n| DocumentNode {
            id: n.id.clone(),
            label: n.label.clone(),
            level: n.level,
            position: n.position.to_array(),
            radius: n.radius,
            region: n
                .region
                .as_ref()
                .map(|r| r.vertices().iter().map(|v| v.as_vec3().to_array()).collect())
                .unwrap_or_default(),
        })
        .collect();
    LayoutDocument { header, nodes }
}

/// First sphere's unused face budget for a tree, in percent: the analytic
/// `(faces - children) / faces` of the face-budget algorithm, or 0 for the
/// relaxation algorithm.
pub fn first_sphere_waste(root: &TreeNode, algorithm: sphere_layout::Algorithm) -> f64 {
    match algorithm {
        sphere_layout::Algorithm::Wscvt => 0.0,
        sphere_layout::Algorithm::TriSphere => {
            let k = root.children.len();
            if k == 0 {
                return 0.0;
            }
            match sphere_layout::level_for(k) {
                Ok(level) => {
                    let stats = sphere_layout::WasteStats {
                        faces: sphere_layout::face_count_at(level),
                        used: k as u64,
                    };
                    stats.waste_percent()
                }
                Err(_) => 0.0,
            }
        }
    }
}

/// JSON formatter printing every float with 17 significant digits, enough
/// for a lossless f64 round-trip.
struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W: io::Write + ?Sized>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes the document to JSON text.
pub fn to_json(doc: &LayoutDocument) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    doc.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON output is UTF-8"))
}

/// Parses a document back from JSON text.
pub fn from_json(text: &str) -> Result<LayoutDocument, CliError> {
    Ok(serde_json::from_str(text)?)
}
