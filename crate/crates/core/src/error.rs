//! Error type shared across the crate.

use alloc::string::String;

/// Errors produced by geometry, domain, weight, quadrature, and verification
/// routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A vector's length does not match the signature it is used with.
    #[error("dimension mismatch in `{name}`: expected {expected}, got {got}")]
    DimensionMismatch {
        name: &'static str,
        expected: usize,
        got: usize,
    },

    /// Angular decomposition requested at a point with `tau_p = 0` or
    /// `r_p = 0`, where the angular frame is undefined.
    #[error("degenerate angular frame: {which} vanishes at the query point")]
    DegenerateFrame { which: &'static str },

    /// A query point is not on the domain boundary.
    #[error("point is not on the spatial boundary (distance {distance:.3e} exceeds tolerance {tol:.1e})")]
    NotOnBoundary { distance: f64, tol: f64 },

    /// Domain construction or use with invalid data.
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// A moving boundary fails the timelike condition `|nu_t1| < |nu_x|`.
    #[error("boundary is not timelike: |slope| = {slope:.6} >= 1 at t1 = {t1:.6}")]
    NotTimelike { slope: f64, t1: f64 },

    /// The temporal half-side must dominate the spatial reach of the region.
    #[error("temporal half-side too small: T = {t_half:.6} must exceed R+ = {r_plus:.6}")]
    TemporalExtent { t_half: f64, r_plus: f64 },

    /// The domain does not intersect the cone exterior of the reference point.
    #[error("domain does not meet exterior region")]
    EmptyExterior,

    /// The weight denominator `1 - eps r_p + eps^2 f_p` is nonpositive.
    #[error("weight denominator nonpositive ({value:.6e})")]
    WeightDenominator { value: f64 },

    /// Weight gradient requested on or inside the null cone.
    #[error("gradient undefined on cone (f_p = {f_p:.6e})")]
    GradientOnCone { f_p: f64 },

    /// Carleman parameters outside the admissible regime where hard use
    /// requires them.
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    /// A quadrature rule ended up with no nodes.
    #[error("quadrature rule is empty: {0}")]
    EmptyRule(String),

    /// Requested grid exceeds the node-count cap.
    #[error("grid of {cells} cells exceeds cap {cap}; lower the resolution or raise [grid] cap")]
    NodeCapExceeded { cells: usize, cap: usize },

    /// An integrand evaluated to a non-finite value.
    #[error("non-finite integrand value at node {index}")]
    NonFiniteIntegrand { index: usize },

    /// Interior observation region contains no quadrature nodes.
    #[error("no observation nodes: W_p^eps selects no interior nodes at this resolution")]
    EmptyObservation,

    /// Test function violates the boundary-vanishing precondition.
    #[error("field does not vanish on the boundary trace: |z| = {worst:.3e} at sample {index}")]
    BoundaryVanishing { worst: f64, index: usize },

    /// First-order coefficient is nonzero inside the cone collar.
    #[error("collar violation: |X| = {magnitude:.3e} at node {index} with f_p = {f_p:.3e} <= mu")]
    CollarViolation {
        magnitude: f64,
        index: usize,
        f_p: f64,
    },

    /// Calibration could not find a positive constant.
    #[error("calibration failed: no positive constant yields nonnegative margins ({0})")]
    CalibrationFailed(String),

    /// Generic unsupported request.
    #[error("unsupported: {0}")]
    Unsupported(String),
}
