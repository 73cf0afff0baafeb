//! Conditional characteristic function of the log price, its variance-shifted
//! variant, and feasibility analysis for the Fourier damping parameter.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{bcal_unchecked, GammaOuParams, MarketState};

/// Damping exponent for the Fourier inversion, the shift in `zeta = v - i*alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DampingConfig {
    pub alpha_damp: f64,
}

impl Default for DampingConfig {
    fn default() -> Self {
        // the value used for every numerical experiment in this crate
        Self { alpha_damp: 1.75 }
    }
}

impl DampingConfig {
    pub fn new(alpha_damp: f64) -> Self {
        Self { alpha_damp }
    }
}

/// Strict bounds `(lo, hi)` on `Im(theta)` inside which `E|exp(i theta L_T)|`
/// is finite: the exponential-moment strip of the log price. A weight
/// `e^{s L_T}` with `s = -Im(theta)` has finite expectation iff
/// `s*rho + (s^2 - s) * B(tau) / 2 < b`.
pub fn moment_strip(state: &MarketState, levy: &GammaOuParams) -> (f64, f64) {
    let b_tau = bcal_unchecked(state.tau(), levy.lambda);
    if b_tau == 0.0 {
        return (f64::NEG_INFINITY, f64::INFINITY);
    }
    let half_b = 0.5 * b_tau;
    // roots of (B/2) s^2 - (B/2 - rho) s - b = 0
    let p = half_b - levy.rho;
    let disc = (p * p + 4.0 * half_b * levy.b).sqrt();
    let s_plus = (p + disc) / b_tau;
    let s_minus = (p - disc) / b_tau;
    (-s_plus, -s_minus)
}

fn check_strip(theta: Complex64, state: &MarketState, levy: &GammaOuParams) -> Result<()> {
    let (lo, hi) = moment_strip(state, levy);
    let im = theta.im;
    if !(im > lo && im < hi) {
        return Err(Error::StripViolation { im, lo, hi });
    }
    Ok(())
}

/// Characteristic function of `log S_T` given `(S_t, sigma_t^2)` under drift
/// `mu`, evaluated at a complex argument inside the moment strip.
///
/// `phi(theta) = exp{ i theta (log S_t + mu tau)
///                    - (theta^2 + i theta) B(tau) sigma_t^2 / 2
///                    + a/(b - f2) [ b log((b - f1)/(b - i theta rho)) + f2 lambda tau ] }`
/// with `f1 = i theta rho - (theta^2 + i theta) B(tau) / 2` and
/// `f2 = i theta rho - (theta^2 + i theta) / (2 lambda)`.
pub fn phi(
    theta: Complex64,
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
) -> Result<Complex64> {
    let tau = state.tau();
    let i = Complex64::i();
    let log_s = state.spot.ln();
    if tau == 0.0 {
        // point mass at the current log price
        return Ok((i * theta * log_s).exp());
    }
    check_strip(theta, state, levy)?;

    let b_tau = bcal_unchecked(tau, levy.lambda);
    let c = 0.5 * (theta * theta + i * theta);
    let i_theta_rho = i * theta * levy.rho;
    let f1 = i_theta_rho - c * b_tau;
    let f2 = i_theta_rho - c / levy.lambda;

    let num = levy.b - f1;
    let den = levy.b - i_theta_rho;
    if num.re <= 0.0 {
        return Err(Error::BranchViolation(format!(
            "Re(b - f1) = {:.6e} <= 0 at theta = {theta}",
            num.re
        )));
    }
    if den.re <= 0.0 {
        return Err(Error::BranchViolation(format!(
            "Re(b - i theta rho) = {:.6e} <= 0 at theta = {theta}",
            den.re
        )));
    }
    // With numerator and denominator both in the open right half plane the
    // quotient's argument stays strictly inside (-pi, pi); reject only an
    // actual landing on the cut.
    let ratio = num / den;
    if ratio.re <= 0.0 && ratio.im.abs() <= 1e-12 * ratio.norm() {
        return Err(Error::BranchViolation(format!(
            "log argument (b - f1)/(b - i theta rho) = {ratio} on the negative real axis at theta = {theta}"
        )));
    }
    let b_minus_f2 = levy.b - f2;
    if b_minus_f2.norm() < 1e-10 * levy.b {
        return Err(Error::BranchViolation(format!(
            "b - f2 degenerate ({b_minus_f2}) at theta = {theta}"
        )));
    }

    let jump = levy.a / b_minus_f2 * (levy.b * ratio.ln() + f2 * levy.lambda * tau);
    let exponent = i * theta * (log_s + mu * tau) - c * b_tau * state.sigma_sq + jump;
    Ok(exponent.exp())
}

/// Characteristic function of `log S_T` when the time-t squared volatility is
/// raised to `sigma_t^2 + z`:
/// `phi(theta) * exp{-(theta^2 + i theta) B(tau) z / 2}`.
pub fn phi_shifted(
    theta: Complex64,
    z: f64,
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
) -> Result<Complex64> {
    if !(z >= 0.0) {
        return Err(Error::InvalidParameter(format!("z must be >= 0, got {z}")));
    }
    let base = phi(theta, state, levy, mu)?;
    let b_tau = bcal_unchecked(state.tau(), levy.lambda);
    let i = Complex64::i();
    let c = 0.5 * (theta * theta + i * theta);
    Ok(base * (-c * b_tau * z).exp())
}

/// The per-jump damped exponent of the hedge formula's inner integral:
/// `eta(zeta) = i rho zeta - (zeta^2 + i zeta) B(tau) / 2`.
pub fn eta(zeta: Complex64, state: &MarketState, levy: &GammaOuParams) -> Complex64 {
    let b_tau = bcal_unchecked(state.tau(), levy.lambda);
    let i = Complex64::i();
    i * levy.rho * zeta - 0.5 * (zeta * zeta + i * zeta) * b_tau
}

/// One feasibility condition with its margin.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityItem {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Report on a proposed damping exponent.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub alpha_damp: f64,
    /// Interval from the sup/inf moment condition over evaluation times in
    /// `[t, T)`.
    pub moment_interval: (f64, f64),
    /// Sufficient interval `(0, 1 - 2 rho / B(tau))` for the sign condition
    /// `Re(eta) <= 0` behind the jump-integral closed form.
    pub sufficient_interval: (f64, f64),
    pub items: Vec<FeasibilityItem>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }
}

/// Evaluates the damping conditions for `alpha_damp`:
/// 1. the moment interval `sup_s {1/2 - rho/B(T-s) - sqrt(D_s)} < alpha <
///    inf_s {1/2 - rho/B(T-s) + sqrt(D_s)}` with
///    `D_s = (-1/2 + rho/B(T-s))^2 + 2 theta_hat / B(T-s)`, taken over a dense
///    grid of `s` in `[t, T)` plus the analytic `s -> T` limits;
/// 2. `0 < alpha < 1 - 2 rho / B(tau)` so the jump-integral closed form is
///    valid (vacuous at `rho = 0` where the jump term vanishes identically);
/// 3. `alpha > 1`, required by the kernel of the Fourier representations for
///    `E[S_T 1{S_T >= K}]` and `E[(S_T - K)^+]`.
pub fn damping_feasible(
    alpha_damp: f64,
    state: &MarketState,
    levy: &GammaOuParams,
) -> FeasibilityReport {
    let theta_hat = levy.theta_hat();
    let rho = levy.rho;
    let tau = state.tau();

    let lower_at = |b_s: f64| {
        let g = 0.5 - rho / b_s;
        let d = (-0.5 + rho / b_s).powi(2) + 2.0 * theta_hat / b_s;
        g - d.sqrt()
    };
    let upper_at = |b_s: f64| {
        let g = 0.5 - rho / b_s;
        let d = (-0.5 + rho / b_s).powi(2) + 2.0 * theta_hat / b_s;
        g + d.sqrt()
    };

    const GRID: usize = 1000;
    let mut sup_lower = if rho < 0.0 {
        theta_hat / rho // s -> T limit
    } else {
        f64::NEG_INFINITY
    };
    let mut inf_upper = f64::INFINITY; // upper bound diverges as s -> T
    for i in 0..GRID {
        let s = state.t + tau * (i as f64) / (GRID as f64);
        let b_s = bcal_unchecked(state.maturity - s, levy.lambda);
        sup_lower = sup_lower.max(lower_at(b_s));
        inf_upper = inf_upper.min(upper_at(b_s));
    }

    let b_tau = bcal_unchecked(tau, levy.lambda);
    let sufficient_hi = 1.0 - 2.0 * rho / b_tau;

    let item_moment = FeasibilityItem {
        name: "moment-interval".into(),
        pass: alpha_damp > sup_lower && alpha_damp < inf_upper,
        detail: format!("alpha in ({sup_lower:.6}, {inf_upper:.6})"),
    };
    let item_sufficient = if rho < 0.0 {
        FeasibilityItem {
            name: "eta-sign".into(),
            pass: alpha_damp > 0.0 && alpha_damp < sufficient_hi,
            detail: format!("alpha in (0, {sufficient_hi:.6})"),
        }
    } else {
        FeasibilityItem {
            name: "eta-sign".into(),
            pass: true,
            detail: "rho = 0: jump integral vanishes identically".into(),
        }
    };
    let item_kernel = FeasibilityItem {
        name: "kernel".into(),
        pass: alpha_damp > 1.0,
        detail: "alpha > 1".into(),
    };

    FeasibilityReport {
        alpha_damp,
        moment_interval: (sup_lower, inf_upper),
        sufficient_interval: (0.0, sufficient_hi),
        items: vec![item_moment, item_sufficient, item_kernel],
    }
}
