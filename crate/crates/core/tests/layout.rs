//! End-to-end layout checks on a three-tier fixture tree: every node lands
//! on the sphere for its depth, inside its parent's region, and the whole
//! layout is reproducible run to run.

use std::collections::HashMap;
use std::f64::consts::PI;

use sphere_layout::{layout_tree, Algorithm, Layout, LayoutConfig, TreeNode};

/// Root with 5 branches, 3 twigs per branch, 2 leaves per twig: 51 nodes.
fn fixture_tree() -> TreeNode {
    let branches = (0..5)
        .map(|b| {
            let twigs = (0..3)
                .map(|t| {
                    let leaves = (0..2)
                        .map(|l| {
                            TreeNode::new(
                                format!("leaf-{b}-{t}-{l}"),
                                format!("Leaf {b}.{t}.{l}"),
                            )
                        })
                        .collect();
                    TreeNode::new(format!("twig-{b}-{t}"), format!("Twig {b}.{t}"))
                        .with_children(leaves)
                })
                .collect();
            TreeNode::new(format!("branch-{b}"), format!("Branch {b}")).with_children(twigs)
        })
        .collect();
    TreeNode::new("root", "Root").with_children(branches)
}

fn collect_parents(node: &TreeNode, map: &mut HashMap<String, String>) {
    for child in &node.children {
        map.insert(child.id.clone(), node.id.clone());
        collect_parents(child, map);
    }
}

/// Shared assertions: node count, exact shell radii, and region nesting.
fn check_nesting(tree: &TreeNode, layout: &Layout, radius_scale: f64) {
    let mut parents = HashMap::new();
    collect_parents(tree, &mut parents);

    assert_eq!(layout.nodes().len(), 51);
    let radii = layout.level_radii();
    assert_eq!(radii.len(), 4);
    for (level, &r) in radii.iter().enumerate() {
        assert_eq!(r, level as f64 * radius_scale);
    }

    for node in layout.nodes() {
        // Depth is recoverable from the fixture ids.
        let expected_level = match node.id.split('-').next().unwrap() {
            "root" => 0,
            "branch" => 1,
            "twig" => 2,
            _ => 3,
        };
        assert_eq!(node.level, expected_level, "level of {}", node.id);
        assert_eq!(node.radius, node.level as f64 * radius_scale);

        if node.level == 0 {
            assert_eq!(node.position.norm(), 0.0);
            assert!(node.region.is_none());
            continue;
        }
        // On the sphere for its depth, in its own region, and (from the
        // second shell out) inside the region its parent owns one shell in.
        assert!((node.position.norm() - node.radius).abs() < 1e-9 * node.radius);
        let dir = node.direction().expect("non-root nodes have a direction");
        let region = node.region.as_ref().expect("non-root nodes own a region");
        assert!(region.contains(dir), "{} outside its own region", node.id);
        if node.level >= 2 {
            let parent = layout.find(&parents[&node.id]).expect("parent placed");
            let parent_region = parent.region.as_ref().unwrap();
            assert!(
                parent_region.contains(dir),
                "{} outside the region of {}",
                node.id,
                parent.id
            );
        }
    }
}

#[test]
fn relaxation_layout_nests_three_levels() {
    let tree = fixture_tree();
    let config = LayoutConfig { radius_scale: 2.5, ..LayoutConfig::default() };
    let layout = layout_tree(&tree, Algorithm::Wscvt, &config).expect("layout");
    println!("placed {} nodes on radii {:?}", layout.nodes().len(), layout.level_radii());
    check_nesting(&tree, &layout, 2.5);
}

#[test]
fn face_budget_layout_nests_three_levels() {
    let tree = fixture_tree();
    let config = LayoutConfig::default();
    let layout = layout_tree(&tree, Algorithm::TriSphere, &config).expect("layout");
    println!("placed {} nodes on radii {:?}", layout.nodes().len(), layout.level_radii());
    check_nesting(&tree, &layout, 1.0);
}

#[test]
fn layouts_are_reproducible() {
    let tree = fixture_tree();
    let config = LayoutConfig::default();
    for algorithm in [Algorithm::Wscvt, Algorithm::TriSphere] {
        let first = layout_tree(&tree, algorithm, &config).expect("first run");
        let second = layout_tree(&tree, algorithm, &config).expect("second run");
        for (a, b) in first.nodes().iter().zip(second.nodes()) {
            assert_eq!(a.id, b.id);
            // Same seeds, same floating-point path: bit-for-bit equal.
            assert_eq!(a.position.x.to_bits(), b.position.x.to_bits());
            assert_eq!(a.position.y.to_bits(), b.position.y.to_bits());
            assert_eq!(a.position.z.to_bits(), b.position.z.to_bits());
        }
    }
}

#[test]
fn first_sphere_regions_track_subtree_weights() {
    // Eight leaves with explicit weights 1..8 directly under the root.
    let children: Vec<TreeNode> = (0..8)
        .map(|i| {
            TreeNode::new(format!("c{i}"), format!("C{i}")).with_weight((i + 1) as f64)
        })
        .collect();
    let tree = TreeNode::new("root", "Root").with_children(children);
    let config = LayoutConfig::default();
    let layout = layout_tree(&tree, Algorithm::Wscvt, &config).expect("layout");

    let total: f64 = (1..=8).map(f64::from).sum();
    for i in 0..8 {
        let node = layout.find(&format!("c{i}")).expect("child placed");
        let share = node.region.as_ref().unwrap().area() / (4.0 * PI);
        let want = (i + 1) as f64 / total;
        println!("c{i}: share {share:.6} target {want:.6}");
        assert!(
            (share - want).abs() <= config.solver.epsilon,
            "region share {share} misses target {want}"
        );
    }
}
