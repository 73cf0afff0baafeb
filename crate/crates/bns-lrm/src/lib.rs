//! Locally risk-minimizing hedge ratios for OU-type stochastic volatility
//! models with Gamma-OU variance.
//!
//! The crate computes, for European calls and puts, the locally
//! risk-minimizing position `xi = (sigma_t^2 I1 + I2) / (S_t (sigma_t^2 +
//! C_rho))` and the delta-hedge position `Delta = I1 / S_t`, where `I1` and
//! `I2` are damped Fourier transforms of the conditional law of the terminal
//! log price. Everything the Fourier path produces is cross-validated by an
//! exact Monte Carlo simulator of the same model: the variance driver is
//! compound Poisson, so terminal variance, integrated variance, and log
//! returns are closed forms in the jump skeleton and the simulation carries
//! no discretization error.
//!
//! Modules:
//! - [`model`]: parameter sets, Lévy measures, derived constants, standing
//!   assumptions;
//! - [`charfn`]: the conditional characteristic function, its variance-shift,
//!   and damping feasibility;
//! - [`pricer`]: the Fourier integrals by adaptive quadrature and by FFT
//!   strike grids;
//! - [`strategy`]: hedge-ratio assembly and sweep datasets;
//! - [`simulate`]: the exact Monte Carlo oracle and the cross-validation
//!   battery;
//! - [`quad`]: adaptive Gauss–Kronrod quadrature.

// negated comparisons in the input guards are deliberate: `!(x > 0.0)`
// rejects NaN where `x <= 0.0` would let it through
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charfn;
pub mod error;
pub mod model;
pub mod pricer;
pub mod quad;
pub mod simulate;
pub mod strategy;

pub use charfn::{damping_feasible, eta, phi, phi_shifted, DampingConfig, FeasibilityReport};
pub use error::{Error, Result};
pub use model::{
    alpha_drift, bcal, bound_constants, c_rho, martingale_drift, martingale_drift_levy, preset,
    preset_names, validate_assumptions, AssumptionReport, GammaOuParams, IgOuParams, LevyParams,
    MarketState, ModelConstants, ModelSpecJson,
};
pub use pricer::{
    hedge, i1, i2, price_call, strike_grid_fft, FftGridConfig, HedgeResult, QuadratureConfig,
};
pub use simulate::{
    fourier_mc_battery, mc_hedge_estimates, mc_put_lrm, path_bound_audit, sample_jump_path,
    sample_log_return, sample_paths, simulate_pass, Estimate, JumpPath, McCheckReport, McConfig,
    McHedgeEstimates,
};
pub use strategy::{delta_call, delta_put, lrm_call, lrm_put, sweep, SweepSpec, SweepTable};
