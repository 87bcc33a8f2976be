//! Weighted spherical Voronoi tessellations, centroidal relaxation, and 3D
//! spherical tree layout.
//!
//! The central object is a tessellation of the unit sphere into convex
//! cells, one per weighted generator, where each generator's cell is the
//! set of directions whose squared chord distance minus the generator's
//! weight is smallest. [`run_wscvt`] relaxes such a tessellation until
//! every cell's area fraction matches its prescribed share, which turns a
//! weighted point set into a full-coverage partition of the sphere.
//!
//! On top of that sit two placement strategies for trees drawn on nested
//! spheres ([`layout_tree`]): weight-proportional regions from the solver,
//! and a face-budget baseline that pins nodes to icosphere face centroids
//! ([`trisphere_layout`]) and pays for its rigidity with unused surface.
//!
//! Entry points:
//! - [`Tessellation::build`] / [`convex_hull`] for one-shot geometry,
//! - [`run_wscvt`] for the relaxation,
//! - [`layout_tree`] / [`restricted_placement`] for trees,
//! - [`trisphere_layout`] for the face-budget baseline.

pub mod error;
pub mod hull;
pub mod lloyd;
pub mod spherical;
pub mod tessellation;
pub mod tol;
pub mod tree;
pub mod trisphere;
pub mod vec3;

pub use error::{Error, Result};
pub use hull::{convex_hull, HullMesh};
pub use lloyd::{
    adjust_weight, initial_distribution, run_wscvt, size_error, ConvergenceReport, ErrorMode,
    GeneratorState, LloydConfig, SolveOutcome, SwapPolicy, WeightRule,
};
pub use spherical::{weighted_circumcenter, weighted_distance, SphericalPolygon, SphericalTriangle};
pub use tessellation::{
    detect_wrong_edges, swap_wrong_edges, EdgeReport, Generator, Tessellation,
};
pub use tree::{
    layout_tree, restricted_placement, subtree_weights, Algorithm, Layout, LayoutConfig,
    LayoutNode, LayoutStats, RestrictedPlacement, TreeNode,
};
pub use trisphere::{
    face_count_at, level_for, trisphere_layout, IcoSphere, TriSpherePlacement, WasteStats,
    MAX_LEVEL,
};
pub use vec3::{UnitVec, Vec3};
