//! End-to-end checks of the `sphere-layout` binary: ingestion, layout and
//! mesh export, the comparison report, determinism, and error signaling.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sphere_layout::{SphericalTriangle, UnitVec};
use sphere_layout_cli::document;

const BIN: &str = env!("CARGO_BIN_EXE_sphere-layout");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_sample_tree(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("tree.json");
    let doc = r#"{
        "label": "root",
        "children": [
            {"label": "a", "children": [{"label": "a1"}, {"label": "a2"}]},
            {"label": "b", "weight": 3.0},
            {"label": "c"},
            {"label": "d"},
            {"label": "e"}
        ]
    }"#;
    fs::write(&path, doc).expect("write fixture");
    path
}

#[test]
fn layout_writes_a_consistent_document() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_sample_tree(dir.path());
    let out_path = dir.path().join("layout.json");

    let output = run(&[
        "layout",
        "--algorithm",
        "wscvt",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));

    let doc = document::from_json(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc.header.algorithm, "wscvt");
    assert_eq!(doc.header.epsilon, 5e-4);
    assert_eq!(doc.nodes.len(), 8); // root + 5 children + 2 grandchildren
    for node in &doc.nodes {
        let [x, y, z] = node.position;
        let norm = (x * x + y * y + z * z).sqrt();
        assert!((norm - node.radius).abs() < 1e-9, "node {} off its sphere", node.id);
        if node.level > 0 {
            assert!(!node.region.is_empty(), "node {} lacks a region", node.id);
        }
    }
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_sample_tree(dir.path());
    let args = [
        "layout",
        "--algorithm",
        "wscvt",
        "--input",
        input.to_str().unwrap(),
        "--seed",
        "7",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());
}

#[test]
fn face_budget_layout_reports_analytic_waste() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_sample_tree(dir.path());
    let output = run(&[
        "layout",
        "--algorithm",
        "trisphere",
        "--input",
        input.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let doc = document::from_json(&String::from_utf8(output.stdout).unwrap()).unwrap();
    // 5 children on the 20-face sphere: 75% of the budget is unused.
    assert_eq!(doc.header.waste_percent, 75.0);
    assert_eq!(doc.header.iterations, 0);
}

#[test]
fn exported_cells_cover_the_whole_sphere() {
    let output = run(&["mesh", "--algorithm", "wscvt", "--count", "4"]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();

    // Re-import: shared vertex list in file order, faces as index triples.
    let mut verts: Vec<UnitVec> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let xyz: Vec<f64> =
                    parts.map(|p| p.parse().expect("vertex coordinate")).collect();
                verts.push(UnitVec::from_xyz(xyz[0], xyz[1], xyz[2]).expect("unit vertex"));
            }
            Some("f") => {
                let idx: Vec<usize> =
                    parts.map(|p| p.parse::<usize>().expect("face index") - 1).collect();
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }

    let objects = text.lines().filter(|l| l.starts_with("o ")).count();
    assert_eq!(objects, 4);
    // Four cells fan into (k - 2) triangles each; the fan arithmetic must
    // match the header's declared count.
    let declared = text
        .lines()
        .find(|l| l.contains("triangles:"))
        .and_then(|l| l.rsplit(' ').next())
        .and_then(|n| n.parse::<usize>().ok())
        .expect("triangle count in header");
    assert_eq!(faces.len(), declared);

    let total: f64 = faces
        .iter()
        .map(|&[a, b, c]| {
            SphericalTriangle::new(verts[a], verts[b], verts[c]).area().expect("face area")
        })
        .sum();
    let sphere = 4.0 * std::f64::consts::PI;
    assert!((total - sphere).abs() < 1e-5, "areas sum to {total}, want {sphere}");
}

#[test]
fn icosphere_export_matches_the_icosahedron() {
    let output = run(&["mesh", "--algorithm", "trisphere", "--count", "20"]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 12);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 20);
}

#[test]
fn report_prints_exact_face_budget_waste() {
    let output = run(&["report", "--counts", "20,50,1000,1500", "--skip-wscvt"]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("0%"), "table:\n{text}");
    assert!(text.contains("37.5%"), "table:\n{text}");
    assert!(text.contains("21.875%"), "table:\n{text}");
    assert!(text.contains("70.703125%"), "table:\n{text}");
}

#[test]
fn directory_ingestion_walks_the_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("project");
    fs::create_dir_all(root.join("src/deep")).unwrap();
    fs::create_dir_all(root.join("docs")).unwrap();
    fs::write(root.join("src/main.rs"), "").unwrap();
    fs::write(root.join("src/lib.rs"), "").unwrap();
    fs::write(root.join("src/deep/nested.txt"), "").unwrap();
    fs::write(root.join("docs/guide.md"), "").unwrap();
    fs::write(root.join("readme.txt"), "").unwrap();
    #[cfg(unix)]
    std::os::unix::fs::symlink(&root, root.join("loop")).unwrap();

    let tree = sphere_layout_cli::ingest::ingest_tree(&root, None).expect("walk");
    // project { docs { guide.md }, readme.txt, src { deep { nested.txt },
    // lib.rs, main.rs } } - the symlink is skipped.
    let labels: Vec<&str> = tree.children.iter().map(|c| c.label.as_str()).collect();
    assert_eq!(labels, ["docs", "readme.txt", "src"]);
    assert_eq!(tree.leaf_count(), 5);
    let src = &tree.children[2];
    assert_eq!(src.children.len(), 3);
    assert_eq!(src.children[0].label, "deep");
    assert_eq!(src.id, "project/src");

    // The depth cap turns directories at the cap into leaves.
    let capped = sphere_layout_cli::ingest::ingest_tree(&root, Some(1)).expect("walk");
    assert!(capped.children.iter().all(|c| c.is_leaf()));
}

#[test]
fn bad_input_exits_nonzero_with_a_diagnostic() {
    let output = run(&[
        "layout",
        "--algorithm",
        "wscvt",
        "--input",
        "/nonexistent/tree.json",
    ]);
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}
