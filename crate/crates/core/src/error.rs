//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction, design, and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Grid construction rejected (too few interior nodes).
    #[error("invalid grid: need at least 2 interior nodes, got {0}")]
    InvalidGrid(usize),

    /// Two objects live on different grids or have incompatible shapes.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Operator composition or adjoint with incompatible space tags.
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    /// Observation point or other scalar parameter outside its domain.
    #[error("domain error: {0}")]
    DomainError(String),

    /// A structural assumption on the data is violated.
    #[error("assumption violation: {0}")]
    AssumptionViolation(String),

    /// Structural requirement m >= p for the non-resonance test.
    #[error("structural error: need m >= p, got m = {m}, p = {p}")]
    TooFewInputs { m: usize, p: usize },

    /// A shifted solve inside the Sylvester recursion is near singular.
    #[error("ill-conditioned shifted solve at shift {re}{im:+}i (spectra nearly collide)")]
    IllConditionedShift { re: f64, im: f64 },

    /// The analytic kernel representation degenerates for these parameters.
    #[error("representation error: {0}")]
    Representation(String),

    /// Gain computation degenerates because H = 0.
    #[error("degenerate gain: H = 0, the marginal dynamics are unreachable through the plant")]
    DegenerateGain,

    /// Chosen gain is incompatible with the dissipativity certificate.
    #[error("gain too large: k = {k} outside (0, {k_star}); certificate margin a would be {a}")]
    GainTooLarge { k: f64, k_star: f64, a: f64 },

    /// Output injection cannot render the ODE error dynamics Hurwitz.
    #[error("certificate impossible: (S, HQ) is not detectable")]
    NotDetectable,

    /// Implicit time step matrix is singular.
    #[error("step-size error: implicit step matrix singular at dt = {0}")]
    StepSize(f64),

    /// Inputs inconsistent with an already-built certificate.
    #[error("certificate mismatch: {0}")]
    CertificateMismatch(String),

    /// An iterative numeric kernel failed to converge or a factorization broke down.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
