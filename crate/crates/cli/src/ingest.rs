//! Hierarchy ingestion: a JSON tree document, or a directory walked into a
//! tree of subdirectories and files.

use std::collections::HashSet;
use std::fs;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;
use sphere_layout::TreeNode;

use crate::CliError;

/// One node of the input document. `id` is optional (autogenerated when
/// absent), `weight` must be positive when present, and unknown fields are
/// tolerated with a warning.
#[derive(Debug, Deserialize)]
struct RawNode {
    id: Option<String>,
    label: String,
    weight: Option<f64>,
    #[serde(default)]
    children: Vec<RawNode>,
    #[serde(flatten)]
    unknown: serde_json::Map<String, serde_json::Value>,
}

/// Reads a tree from `source`: a JSON document when it is a file, a
/// filesystem walk when it is a directory. `max_depth` caps the directory
/// walk only (a directory at the cap becomes a leaf).
pub fn ingest_tree(source: &Path, max_depth: Option<usize>) -> Result<TreeNode, CliError> {
    let meta = fs::metadata(source)?;
    if meta.is_dir() {
        ingest_directory(source, max_depth)
    } else {
        let mut text = String::new();
        fs::File::open(source)?.read_to_string(&mut text)?;
        ingest_json(&text)
    }
}

/// Parses a JSON tree document. Children are ordered lexicographically by
/// label; missing ids are filled in preorder.
pub fn ingest_json(text: &str) -> Result<TreeNode, CliError> {
    let raw: RawNode = serde_json::from_str(text)
        .map_err(|e| CliError::Parse(format!("tree document: {e}")))?;

    let mut taken = HashSet::new();
    collect_ids(&raw, &mut taken)?;
    let mut next_id = 0usize;
    build_node(raw, &taken, &mut next_id)
}

fn collect_ids(raw: &RawNode, taken: &mut HashSet<String>) -> Result<(), CliError> {
    if let Some(id) = &raw.id {
        if !taken.insert(id.clone()) {
            return Err(CliError::Parse(format!("duplicate node id {id:?}")));
        }
    }
    for child in &raw.children {
        collect_ids(child, taken)?;
    }
    Ok(())
}

fn build_node(
    raw: RawNode,
    taken: &HashSet<String>,
    next_id: &mut usize,
) -> Result<TreeNode, CliError> {
    for key in raw.unknown.keys() {
        eprintln!("warning: ignoring unknown field {key:?} on node {:?}", raw.label);
    }
    if let Some(w) = raw.weight {
        if !(w.is_finite() && w > 0.0) {
            return Err(CliError::Parse(format!(
                "node {:?}: weight {w} must be positive and finite",
                raw.label
            )));
        }
    }
    let id = match raw.id {
        Some(id) => id,
        None => loop {
            let candidate = format!("n{next_id}");
            *next_id += 1;
            if !taken.contains(&candidate) {
                break candidate;
            }
        },
    };

    let mut node = TreeNode::new(id, raw.label);
    if let Some(w) = raw.weight {
        node = node.with_weight(w);
    }
    let mut children = raw.children;
    children.sort_by(|a, b| a.label.cmp(&b.label));
    let children = children
        .into_iter()
        .map(|c| build_node(c, taken, next_id))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(node.with_children(children))
}

/// Walks a directory into a tree: subdirectories become internal nodes,
/// files become weight-1 leaves, symlinks are skipped with a warning (which
/// also rules out walk cycles). Node ids are paths relative to the root;
/// children are ordered lexicographically by name.
fn ingest_directory(root: &Path, max_depth: Option<usize>) -> Result<TreeNode, CliError> {
    let label = root
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| root.display().to_string());
    walk(root, &label, label.clone(), max_depth.unwrap_or(usize::MAX))
}

fn walk(
    dir: &Path,
    id: &str,
    label: String,
    depth_left: usize,
) -> Result<TreeNode, CliError> {
    let node = TreeNode::new(id, label);
    if depth_left == 0 {
        return Ok(node);
    }
    let mut entries: Vec<(String, fs::DirEntry)> = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        entries.push((entry.file_name().to_string_lossy().into_owned(), entry));
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));

    let mut children = Vec::new();
    for (name, entry) in entries {
        let child_id = format!("{id}/{name}");
        let file_type = entry.file_type()?;
        if file_type.is_symlink() {
            eprintln!("warning: skipping symlink {}", entry.path().display());
        } else if file_type.is_dir() {
            children.push(walk(&entry.path(), &child_id, name, depth_left - 1)?);
        } else {
            // Files are leaves; the leaf-count rule makes their weight 1.
            children.push(TreeNode::new(child_id, name));
        }
    }
    Ok(node.with_children(children))
}
