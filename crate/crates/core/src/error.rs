//! Crate-wide error type.

use crate::lloyd::SolveOutcome;

/// Everything that can go wrong across the geometry, tessellation, solver
/// and layout layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A vector of (near-)zero length cannot be normalized.
    #[error("cannot normalize a zero-length vector")]
    ZeroLength,

    /// Triangle vertices are coincident or collinear within tolerance.
    #[error("degenerate triangle: vertices coincident or collinear")]
    DegenerateTriangle,

    /// Vertex sum (or area-weighted sum) of a polygon vanishes, so no
    /// centroid direction exists.
    #[error("degenerate centroid: direction sum has zero length")]
    DegenerateCentroid,

    /// Fewer than three usable vertices remain after dropping coincident
    /// neighbors.
    #[error("degenerate polygon: fewer than 3 usable vertices")]
    DegeneratePolygon,

    /// The weighted circumcenter solve landed at the sphere center, so it
    /// has no radial projection.
    #[error("weighted circumcenter of triangle {triangle:?} lies at the origin")]
    CircumcenterAtOrigin {
        /// Site indices of the offending triangle.
        triangle: [usize; 3],
    },

    /// A hull triangle was too flat for the circumcenter solve, usually
    /// because two generators drifted together.
    #[error("hull triangle {triangle:?} is too flat for a circumcenter")]
    FlatTriangle {
        /// Site indices of the offending triangle.
        triangle: [usize; 3],
    },

    /// A generator's cell collapsed: its dual corners coincide within
    /// tolerance, leaving fewer than three usable vertices.
    #[error("cell of generator {generator} is degenerate")]
    DegenerateCell {
        /// Index of the generator whose cell failed.
        generator: usize,
    },

    /// All sites fell into one closed hemisphere, so the hull does not
    /// enclose the sphere center and the spherical dual is undefined.
    #[error("sites collapsed into a single hemisphere")]
    HemisphereConfined,

    /// Convex hull needs at least four points.
    #[error("convex hull needs at least 4 points, got {0}")]
    TooFewPoints(usize),

    /// Input points are all coplanar (or worse), so no 3D hull exists.
    #[error("degenerate hull input: points span no volume")]
    DegenerateInput,

    /// Two input sites coincide within the duplicate tolerance.
    #[error("duplicate input points at indices {0} and {1}")]
    DuplicatePoint(usize, usize),

    /// An edge query named a vertex pair that is not a hull edge.
    #[error("no hull edge between vertices {0} and {1}")]
    UnknownEdge(usize, usize),

    /// A site weight was zero, negative, or not finite.
    #[error("invalid weight {weight} at index {index}: weights must be positive and finite")]
    InvalidWeight {
        /// Position of the bad weight in the input.
        index: usize,
        /// The offending value.
        weight: f64,
    },

    /// The iteration budget ran out before the size error dropped under
    /// epsilon. Carries the best state seen so the caller can still use it.
    #[error("did not converge within {} iterations (best error {:.3e})",
            .0.report.iterations, .0.report.final_error)]
    NotConverged(Box<SolveOutcome>),

    /// Subdivision level exceeds the supported cap.
    #[error("subdivision level {0} exceeds the maximum of {max}", max = crate::trisphere::MAX_LEVEL)]
    LevelTooLarge(u32),

    /// An explicit tree weight was zero, negative, or not finite.
    #[error("node {id:?} has non-positive weight {weight}")]
    NonPositiveExplicitWeight {
        /// Node id as given in the input.
        id: String,
        /// The offending value.
        weight: f64,
    },

    /// A region is too small (or too thin) to host the requested children.
    #[error("region cannot host {children} children: {reason}")]
    RegionTooSmall {
        /// How many children were requested.
        children: usize,
        /// Human-readable cause.
        reason: String,
    },

    /// Two nodes in one tree share an id.
    #[error("duplicate node id {0:?}")]
    DuplicateNodeId(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
