//! Error taxonomy shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum LevyError {
    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {delta:e}")]
    NonSymmetricMatrix { i: usize, j: usize, delta: f64 },

    #[error("matrix has a negative eigenvalue {eigenvalue:e}")]
    NegativeDefinite { eigenvalue: f64 },

    #[error("Lévy measure fails ∫(1∧|z|²) N(dz) < ∞ (estimate {estimate:e})")]
    NonIntegrableMeasure { estimate: f64 },

    #[error("triplet is compound Poisson (with drift): h is bounded by {h_bound:e}")]
    CompoundPoisson { h_bound: f64 },

    #[error("measure difference is negative on a queried set: value {value:e}, tolerance {tolerance:e}")]
    NegativeMass { value: f64, tolerance: f64 },

    #[error("quadrature failed to reach tolerance: achieved {achieved:e}, requested {requested:e} in {context}")]
    QuadratureFailure {
        context: &'static str,
        achieved: f64,
        requested: f64,
    },

    #[error("annulus first moment did not converge")]
    NonIntegrableAnnulus,

    #[error("direction vector is not unit length (|v| = {norm})")]
    NonUnitDirection { norm: f64 },

    #[error("minorization a1·ν ≤ N violated on {set}: a1·ν = {lhs:e} > N = {rhs:e}")]
    MinorizationViolated {
        set: String,
        lhs: f64,
        rhs: f64,
    },

    #[error("bad zoo parameter: {0}")]
    BadParameter(String),

    #[error("h-inversion bracket failure: u = {u:e} outside achieved range [{min:e}, {max:e}]")]
    BracketFailure { u: f64, min: f64, max: f64 },

    #[error("scaling window invalid: {0}")]
    ScalingWindowInvalid(String),

    #[error("no scaling window found: fitted alpha {alpha}, constant {constant:e}")]
    NoScaling { alpha: f64, constant: f64 },

    #[error("e^{{-tψ}} is not integrable under the cutoff rule at t = {t}")]
    NotIntegrable { t: f64 },

    #[error("aliasing detected: mass error {mass_error:e} exceeds {limit:e}")]
    AliasingDetected { mass_error: f64, limit: f64 },

    #[error("equivalence families returned mixed verdicts: {0}")]
    InconsistentVerdicts(String),

    #[error("class membership violated: {0}")]
    MembershipViolated(String),

    #[error("lower-bound variant precondition failed: {0}")]
    VariantPreconditionFailed(String),

    #[error("small-jump cutoff too coarse: sigma(eps)/eps = {ratio} below threshold {threshold}")]
    CutoffTooCoarse { ratio: f64, threshold: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, LevyError>;
