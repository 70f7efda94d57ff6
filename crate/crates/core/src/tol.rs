//! Numerical tolerances and default limits, shared by every module.
//!
//! Group data is exact, so tolerances only enter where the complex structure,
//! metrics or twistor operators (all floating point) are involved.

/// Residual bound for floating structure identities such as `J² = -Id`,
/// commutators with rotation parts, and metric invariance. The catalog
/// matrices are exact or near machine precision, so anything above this is a
/// genuine violation rather than roundoff.
pub const EPS_NUM: f64 = 1e-9;

/// Integrality rounding tolerance for floating Hodge numbers.
pub const EPS_ROUND: f64 = 1e-6;

/// Nondegeneracy threshold: smallest singular value of a 2-form restricted to
/// the complement must exceed this.
pub const EPS_DEG: f64 = 1e-8;

/// A Hodge locus is classified FULL when the maximal residual over the sample
/// grid stays below this.
pub const TAU_FULL: f64 = 1e-8;

/// Grid residual below which a local minimum is kept as a root candidate.
pub const TAU_SEED: f64 = 1e-2;

/// Refined residual required to accept a located twistor point.
pub const TAU_ROOT: f64 = 1e-9;

/// Minimal separation between reported twistor points; closer points are
/// merged during deduplication.
pub const DELTA_SEP: f64 = 1e-3;

/// Default number of sphere sample points for locus scans.
pub const DEFAULT_GRID: usize = 20_000;

/// Default cap on group closure size. Bieberbach finiteness keeps real inputs
/// tiny; the cap turns mis-entered data into a clean error.
pub const DEFAULT_CLOSURE_CAP: usize = 10_000;
