//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received an out-of-domain argument.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A standing model assumption fails and the caller did not override.
    #[error("model assumption violated: {0}")]
    AssumptionViolated(String),

    /// The complex argument of the characteristic function lies outside the
    /// strip on which the closed form is valid.
    #[error("characteristic-function argument outside validity strip: Im(theta) = {im}, supported ({lo}, {hi}]")]
    StripViolation { im: f64, lo: f64, hi: f64 },

    /// A complex logarithm in the characteristic function would leave the
    /// principal branch.
    #[error("principal-branch violation in characteristic function: {0}")]
    BranchViolation(String),

    /// The requested damping parameter fails a feasibility condition.
    #[error("damping parameter infeasible: {0}")]
    DampingInfeasible(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: error estimate {err:.3e} exceeds tolerance {tol:.3e}")]
    QuadratureNonConvergence { err: f64, tol: f64 },

    /// The inner jump integral of the hedge formula is invalid because the
    /// damped exponent has positive real part somewhere on the path.
    #[error("jump-integral validity lost: Re(eta) = {re_eta:.3e} > 0 at v = {v}")]
    EtaSignViolation { re_eta: f64, v: f64 },

    /// A strike falls outside the log-strike window of an FFT grid.
    #[error("strike {strike} outside FFT log-strike window [{lo:.4}, {hi:.4}]")]
    WindowViolation { strike: f64, lo: f64, hi: f64 },

    /// The FFT grid disagrees with the adaptive-quadrature reference beyond
    /// the validation threshold.
    #[error("FFT grid failed validation against quadrature at strike {strike}: relative error {rel_err:.3e}")]
    FftMismatch { strike: f64, rel_err: f64 },

    /// The operation is not available for the requested model variant.
    #[error("capability error: {0}")]
    Capability(String),
}

pub type Result<T> = std::result::Result<T, Error>;
