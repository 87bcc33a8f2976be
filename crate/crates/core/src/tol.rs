//! Geometric tolerances, collected in one place so every module agrees on
//! what "coincident" and "degenerate" mean.

/// Two points (or unit vectors) closer than this chord distance are treated
/// as coincident; also the norm tolerance for [`crate::UnitVec`].
pub const COINCIDENT: f64 = 1e-12;

/// Determinant / pivot threshold below which a linear solve is refused as
/// degenerate.
pub const LINEAR_SOLVE: f64 = 1e-9;

/// Chord distance under which two input sites count as duplicates.
pub const DUPLICATE_CHORD: f64 = 1e-10;

/// Strict margin used by the edge-regularity test: an edge is only flagged
/// when the opposing site wins by more than this.
pub const REGULARITY_MARGIN: f64 = 1e-12;

/// A point whose visibility volume is smaller than this counts as lying on
/// the face plane during hull construction.
pub const ON_PLANE: f64 = 1e-12;

/// A raw circumcenter closer to the sphere center than this has no usable
/// radial projection.
pub const NEAR_ORIGIN: f64 = 1e-9;

/// Relative tolerance on "cell areas sum to the full sphere".
pub const PARTITION_REL: f64 = 1e-6;

/// Slack allowed when testing point containment in a spherical polygon.
pub const CONTAINMENT_SLACK: f64 = 1e-9;
