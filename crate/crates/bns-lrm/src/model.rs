//! Model parameters, Lévy measures, derived constants, and validation of the
//! standing assumptions.
//!
//! The squared volatility follows an OU process driven by a subordinator,
//! `d sigma_t^2 = -lambda * sigma_t^2 dt + dJ_t` with `J_t = H_{lambda t}`,
//! and the log price carries a leverage term `rho * J_t`. Two stationary laws
//! are supported: Gamma(a, b) (finite-activity driver, the computational
//! workhorse) and inverse Gaussian (validation only).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::adaptive_gk;

/// Parameters of the Gamma-OU variance process.
///
/// The driving Lévy measure is `nu(dx) = a * b * lambda * exp(-b x) dx` on
/// `(0, inf)`: compound Poisson with jump rate `a * lambda` and Exp(b) marks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaOuParams {
    /// Gamma shape of the stationary variance law.
    pub a: f64,
    /// Gamma rate (inverse jump-size scale).
    pub b: f64,
    /// Mean-reversion rate of the variance.
    pub lambda: f64,
    /// Leverage coefficient, nonpositive.
    pub rho: f64,
    /// Initial squared volatility.
    pub sigma0_sq: f64,
}

impl GammaOuParams {
    pub fn new(a: f64, b: f64, lambda: f64, rho: f64, sigma0_sq: f64) -> Result<Self> {
        let p = Self {
            a,
            b,
            lambda,
            rho,
            sigma0_sq,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "a must be > 0, got {}",
                self.a
            )));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "b must be > 0, got {}",
                self.b
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be > 0, got {}",
                self.lambda
            )));
        }
        if !(self.rho <= 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rho must be <= 0, got {}",
                self.rho
            )));
        }
        if !(self.sigma0_sq > 0.0 && self.sigma0_sq.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma0_sq must be > 0, got {}",
                self.sigma0_sq
            )));
        }
        Ok(())
    }

    /// Density of the Lévy measure `nu` of `J` at `x > 0`.
    pub fn levy_density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.a * self.b * self.lambda * (-self.b * x).exp()
        }
    }

    /// Total mass of `nu`: the jump intensity of the compound Poisson driver.
    pub fn jump_intensity(&self) -> f64 {
        self.a * self.lambda
    }

    /// Closed form of the compensation integral `int (e^{rho x} - 1) nu(dx)`.
    pub fn leverage_compensation(&self) -> f64 {
        self.a * self.lambda * self.rho / (self.b - self.rho)
    }

    /// Largest exponential moment order of `nu`: `int (e^{theta x}-1) nu(dx)`
    /// is finite exactly for `theta < b`.
    pub fn theta_hat(&self) -> f64 {
        self.b
    }
}

/// Parameters of the IG-OU variance process (assumption checks only; there is
/// no pricing support for this variant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IgOuParams {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub rho: f64,
    pub sigma0_sq: f64,
}

impl IgOuParams {
    pub fn new(a: f64, b: f64, lambda: f64, rho: f64, sigma0_sq: f64) -> Result<Self> {
        let p = Self {
            a,
            b,
            lambda,
            rho,
            sigma0_sq,
        };
        // same positivity domain as the Gamma variant
        GammaOuParams {
            a,
            b,
            lambda,
            rho,
            sigma0_sq,
        }
        .validate()?;
        Ok(p)
    }

    /// Density of `nu^H` at `x > 0`; the measure of `J` is `lambda * nu^H`.
    pub fn levy_density_h(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let b2 = self.b * self.b;
        self.a / (2.0 * (2.0 * std::f64::consts::PI).sqrt())
            * x.powf(-1.5)
            * (1.0 + b2 * x)
            * (-0.5 * b2 * x).exp()
    }

    pub fn theta_hat(&self) -> f64 {
        0.5 * self.b * self.b
    }

    /// `int (e^{rho x} - 1)^2 nu(dx)` by quadrature after the substitution
    /// `x = u^2`, which removes the `x^{-3/2}` endpoint singularity.
    pub fn c_rho_numeric(&self) -> f64 {
        let (a, b, lambda, rho) = (self.a, self.b, self.lambda, self.rho);
        let u_max = 10.0 / b; // exp(-b^2 u^2 / 2) < 1e-21 beyond this
        let f = |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let x = u * u;
            let g = (rho * x).exp_m1();
            lambda * a / (2.0 * std::f64::consts::PI).sqrt()
                * g
                * g
                * (1.0 + b * b * x)
                * (-0.5 * b * b * x).exp()
                / (u * u)
        };
        adaptive_gk(&f, 0.0, u_max, 1e-14, 1e-10, 400).value
    }

    /// `int (e^{rho x} - 1) nu(dx)` by the same substitution.
    pub fn leverage_compensation_numeric(&self) -> f64 {
        let (a, b, lambda, rho) = (self.a, self.b, self.lambda, self.rho);
        let u_max = 10.0 / b;
        let f = |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let x = u * u;
            lambda * a / (2.0 * std::f64::consts::PI).sqrt()
                * (rho * x).exp_m1()
                * (1.0 + b * b * x)
                * (-0.5 * b * b * x).exp()
                / (u * u)
        };
        adaptive_gk(&f, 0.0, u_max, 1e-14, 1e-10, 400).value
    }
}

/// Either supported variance specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum LevyParams {
    #[serde(rename = "gamma-ou")]
    GammaOu(GammaOuParams),
    #[serde(rename = "ig-ou")]
    IgOu(IgOuParams),
}

impl LevyParams {
    pub fn rho(&self) -> f64 {
        match self {
            LevyParams::GammaOu(p) => p.rho,
            LevyParams::IgOu(p) => p.rho,
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            LevyParams::GammaOu(p) => p.lambda,
            LevyParams::IgOu(p) => p.lambda,
        }
    }

    pub fn sigma0_sq(&self) -> f64 {
        match self {
            LevyParams::GammaOu(p) => p.sigma0_sq,
            LevyParams::IgOu(p) => p.sigma0_sq,
        }
    }

    pub fn theta_hat(&self) -> f64 {
        match self {
            LevyParams::GammaOu(p) => p.theta_hat(),
            LevyParams::IgOu(p) => p.theta_hat(),
        }
    }

    pub fn c_rho(&self) -> f64 {
        match self {
            LevyParams::GammaOu(p) => c_rho(p),
            LevyParams::IgOu(p) => p.c_rho_numeric(),
        }
    }

    pub fn leverage_compensation(&self) -> f64 {
        match self {
            LevyParams::GammaOu(p) => p.leverage_compensation(),
            LevyParams::IgOu(p) => p.leverage_compensation_numeric(),
        }
    }

    /// The Gamma-OU parameters, or a capability error for operations (pricing,
    /// simulation) that only exist for the finite-activity variant.
    pub fn as_gamma_ou(&self) -> Result<&GammaOuParams> {
        match self {
            LevyParams::GammaOu(p) => Ok(p),
            LevyParams::IgOu(_) => Err(Error::Capability(
                "operation requires the Gamma-OU variant; IG-OU supports assumption checks only"
                    .into(),
            )),
        }
    }
}

/// Named parameter sets estimated from market data in the literature.
pub fn preset(name: &str) -> Option<LevyParams> {
    let p = match name {
        "NV-IG" => LevyParams::IgOu(IgOuParams {
            a: 0.0872,
            b: 11.9800,
            lambda: 2.4958,
            rho: -4.7039,
            sigma0_sq: 0.0041,
        }),
        "Scho-IG" => LevyParams::IgOu(IgOuParams {
            a: 6.2410,
            b: 0.7995,
            lambda: 0.0636,
            rho: -0.1926,
            sigma0_sq: 0.0156,
        }),
        "NV-Gamma" => LevyParams::GammaOu(GammaOuParams {
            a: 1.0071,
            b: 116.0100,
            lambda: 1.6787,
            rho: -4.4617,
            sigma0_sq: 0.0043,
        }),
        "Scho-Gamma" => LevyParams::GammaOu(GammaOuParams {
            a: 1.4338,
            b: 11.6641,
            lambda: 0.5783,
            rho: -1.2606,
            sigma0_sq: 0.0145,
        }),
        _ => return None,
    };
    Some(p)
}

pub fn preset_names() -> [&'static str; 4] {
    ["NV-IG", "Scho-IG", "NV-Gamma", "Scho-Gamma"]
}

/// Evaluation-time market inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    /// Spot price `S_t`.
    pub spot: f64,
    /// Squared volatility `sigma_t^2` at the evaluation time.
    pub sigma_sq: f64,
    /// Evaluation time `t`.
    pub t: f64,
    /// Horizon `T`.
    pub maturity: f64,
    /// Interest rate.
    pub r: f64,
    /// Dividend rate.
    pub q: f64,
}

impl MarketState {
    pub fn new(spot: f64, sigma_sq: f64, t: f64, maturity: f64, r: f64, q: f64) -> Result<Self> {
        if !(spot > 0.0 && spot.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "spot must be > 0, got {spot}"
            )));
        }
        if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma_sq must be > 0, got {sigma_sq}"
            )));
        }
        if !(t >= 0.0 && t < maturity && maturity.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= t < maturity, got t = {t}, maturity = {maturity}"
            )));
        }
        if !(r.is_finite() && q.is_finite()) {
            return Err(Error::InvalidParameter("r and q must be finite".into()));
        }
        Ok(Self {
            spot,
            sigma_sq,
            t,
            maturity,
            r,
            q,
        })
    }

    /// Time to maturity.
    pub fn tau(&self) -> f64 {
        self.maturity - self.t
    }

    pub fn discount(&self) -> f64 {
        (-(self.r - self.q) * self.tau()).exp()
    }

    /// The variance floor `exp(-lambda t) * sigma0^2` implied by the OU decay
    /// from time 0. Supplying a `sigma_sq` below it is inconsistent with the
    /// model started at `sigma0_sq`; callers may override after inspection.
    pub fn sigma_floor(&self, levy: &LevyParams) -> f64 {
        (-levy.lambda() * self.t).exp() * levy.sigma0_sq()
    }

    pub fn check_sigma_floor(&self, levy: &LevyParams) -> Result<()> {
        let floor = self.sigma_floor(levy);
        // small slack for round-tripped inputs
        if self.sigma_sq < floor * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "sigma_sq = {} below the OU decay floor {} at t = {}",
                self.sigma_sq, floor, self.t
            )));
        }
        Ok(())
    }

    /// The market configuration of the numerical experiments: S = 1124.47,
    /// sigma^2 = 0.0145, t = 0, T = 1, r = 0.019, q = 0.012.
    pub fn reference(t: f64) -> Self {
        Self {
            spot: 1124.47,
            sigma_sq: 0.0145,
            t,
            maturity: 1.0,
            r: 0.019,
            q: 0.012,
        }
    }
}

/// `B(tau) = (1 - exp(-lambda * tau)) / lambda`, the integrated OU decay
/// kernel. Increasing and concave in `tau`, bounded by `1/lambda`.
pub fn bcal(tau: f64, lambda: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must be >= 0, got {tau}"
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be > 0, got {lambda}"
        )));
    }
    Ok(bcal_unchecked(tau, lambda))
}

#[inline]
pub(crate) fn bcal_unchecked(tau: f64, lambda: f64) -> f64 {
    -(-lambda * tau).exp_m1() / lambda
}

/// `C_rho = int (e^{rho x} - 1)^2 nu(dx)` in closed form for the Gamma-OU
/// measure: expanding the square and integrating term by term gives
/// `a b lambda (1/(b - 2 rho) - 2/(b - rho) + 1/b)`, which combines over the
/// common denominator to the cancellation-free
/// `2 a b lambda rho^2 / (b (b - rho)(b - 2 rho))`.
pub fn c_rho(levy: &GammaOuParams) -> f64 {
    if levy.rho == 0.0 {
        return 0.0;
    }
    let (a, b, lambda, rho) = (levy.a, levy.b, levy.lambda, levy.rho);
    2.0 * a * b * lambda * rho * rho / (b * (b - rho) * (b - 2.0 * rho))
}

/// The drift making the discounted price `e^{-(r-q)t} S_t` a martingale:
/// `mu = r - q - a lambda rho / (b - rho)`.
pub fn martingale_drift(levy: &GammaOuParams, r: f64, q: f64) -> f64 {
    r - q - levy.leverage_compensation()
}

/// Martingale drift for either variant (numeric compensation for IG-OU).
pub fn martingale_drift_levy(levy: &LevyParams, r: f64, q: f64) -> f64 {
    r - q - levy.leverage_compensation()
}

/// `alpha = mu + int (e^{rho x} - 1) nu(dx)`, the arithmetic return rate of
/// the price SDE. Equals `r - q` exactly under the martingale drift.
pub fn alpha_drift(levy: &GammaOuParams, mu: f64) -> f64 {
    mu + levy.leverage_compensation()
}

/// One checked item of the standing assumptions.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionItem {
    pub name: String,
    pub pass: bool,
    /// Positive margin means the condition holds with room to spare.
    pub margin: f64,
    pub detail: String,
}

/// Pass/fail report for the standing assumptions at horizon `T` and drift `mu`.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub items: Vec<AssumptionItem>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn first_failure(&self) -> Option<&AssumptionItem> {
        self.items.iter().find(|i| !i.pass)
    }
}

/// Checks the standing assumptions:
/// 1. exponential-moment condition on the Lévy measure
///    (Gamma-OU: `b > 2 max(B(T), |rho|)`; IG-OU: `b^2/2 > 2 max(B(T), |rho|)`),
/// 2. `alpha / (exp(-lambda T) sigma0^2 + C_rho) > -1`,
/// 3. `theta_hat > 0`.
pub fn validate_assumptions(levy: &LevyParams, horizon: f64, mu: f64) -> Result<AssumptionReport> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be > 0, got {horizon}"
        )));
    }
    let lambda = levy.lambda();
    let rho = levy.rho();
    let b_t = bcal_unchecked(horizon, lambda);
    let bound = 2.0 * b_t.max(rho.abs());

    let (moment_lhs, moment_name) = match levy {
        LevyParams::GammaOu(p) => (p.b, "b > 2*max(B(T), |rho|)"),
        LevyParams::IgOu(p) => (0.5 * p.b * p.b, "b^2/2 > 2*max(B(T), |rho|)"),
    };
    let item1 = AssumptionItem {
        name: "exponential-moment".into(),
        pass: moment_lhs > bound,
        margin: moment_lhs - bound,
        detail: format!("{moment_name}: {moment_lhs:.6} vs {bound:.6}"),
    };

    let c_rho_v = levy.c_rho();
    let alpha = mu + levy.leverage_compensation();
    let denom = (-lambda * horizon).exp() * levy.sigma0_sq() + c_rho_v;
    let ratio = alpha / denom;
    let item2 = AssumptionItem {
        name: "drift-ratio".into(),
        pass: ratio > -1.0,
        margin: ratio + 1.0,
        detail: format!("alpha/(exp(-lambda T) sigma0^2 + C_rho) = {ratio:.6} > -1"),
    };

    let th = levy.theta_hat();
    let item3 = AssumptionItem {
        name: "theta-hat-positive".into(),
        pass: th > 0.0,
        margin: th,
        detail: format!("theta_hat = {th:.6}"),
    };

    Ok(AssumptionReport {
        items: vec![item1, item2, item3],
    })
}

/// The boundedness constants for the MMM density machinery, used as runtime
/// audit thresholds along simulated paths.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundConstants {
    /// Bound on `|u_s| = |alpha| sigma_s / (sigma_s^2 + C_rho)`.
    pub c_u: f64,
    /// Bound on `|theta_{s,x}| / (1 - e^{rho x})`.
    pub c_theta: f64,
    /// Bound on `1 / (1 - theta_{s,x})`.
    pub c_theta_hat: f64,
}

/// `C_u = max(|alpha| e^{lambda T / 2} / sigma_0, |alpha| / C_rho)` and
/// `C_theta = max(|alpha| / C_rho, 1)`; both degenerate gracefully at
/// `rho = 0` where `C_rho = 0`.
pub fn bound_constants(levy: &GammaOuParams, horizon: f64, alpha: f64) -> Result<BoundConstants> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be > 0, got {horizon}"
        )));
    }
    let sigma0 = levy.sigma0_sq.sqrt();
    let diffusive = alpha.abs() * (0.5 * levy.lambda * horizon).exp() / sigma0;
    let crho = c_rho(levy);
    let (c_u, c_theta) = if crho > 0.0 {
        (
            diffusive.max(alpha.abs() / crho),
            (alpha.abs() / crho).max(1.0),
        )
    } else {
        (diffusive, 1.0)
    };

    let denom = 1.0 + alpha / ((-levy.lambda * horizon).exp() * levy.sigma0_sq + crho);
    if denom <= 0.0 {
        return Err(Error::AssumptionViolated(format!(
            "1 + alpha/(exp(-lambda T) sigma0^2 + C_rho) = {denom:.6} <= 0"
        )));
    }
    let c_theta_hat = (1.0 / denom).max(1.0);

    Ok(BoundConstants {
        c_u,
        c_theta,
        c_theta_hat,
    })
}

/// Derived scalar constants for one (model, market, drift) configuration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModelConstants {
    pub c_rho: f64,
    pub mu: f64,
    pub alpha_drift: f64,
    pub theta_hat: f64,
    pub c_u: f64,
    pub c_theta: f64,
    pub c_theta_hat: f64,
    /// `B(T - t)` at the evaluation time.
    pub bcal_tau: f64,
}

impl ModelConstants {
    pub fn derive(levy: &GammaOuParams, state: &MarketState, mu: f64) -> Result<Self> {
        let alpha = alpha_drift(levy, mu);
        let bounds = bound_constants(levy, state.maturity, alpha)?;
        Ok(Self {
            c_rho: c_rho(levy),
            mu,
            alpha_drift: alpha,
            theta_hat: levy.theta_hat(),
            c_u: bounds.c_u,
            c_theta: bounds.c_theta,
            c_theta_hat: bounds.c_theta_hat,
            bcal_tau: bcal_unchecked(state.tau(), levy.lambda),
        })
    }
}

/// Flat JSON parameter schema: explicit fields, an optional preset name, or a
/// mix. Explicit fields always win; the preset fills whatever is absent.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ModelSpecJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
}

impl ModelSpecJson {
    pub fn from_preset(name: &str) -> Self {
        Self {
            preset: Some(name.to_string()),
            ..Self::default()
        }
    }

    pub fn resolve(&self) -> Result<LevyParams> {
        let base = match &self.preset {
            Some(name) => Some(preset(name).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown preset {name:?}; known: {:?}",
                    preset_names()
                ))
            })?),
            None => None,
        };

        let kind = match (self.model.as_deref(), &base) {
            (Some("gamma-ou"), _) => "gamma-ou",
            (Some("ig-ou"), _) => "ig-ou",
            (Some(other), _) => {
                return Err(Error::InvalidParameter(format!(
                    "model must be \"gamma-ou\" or \"ig-ou\", got {other:?}"
                )))
            }
            (None, Some(LevyParams::GammaOu(_))) => "gamma-ou",
            (None, Some(LevyParams::IgOu(_))) => "ig-ou",
            (None, None) => {
                return Err(Error::InvalidParameter(
                    "model kind missing: set \"model\" or \"preset\"".into(),
                ))
            }
        };

        let pick = |explicit: Option<f64>, from_preset: fn(&LevyParams) -> f64, field: &str| {
            explicit
                .or_else(|| base.as_ref().map(from_preset))
                .ok_or_else(|| Error::InvalidParameter(format!("missing field {field:?}")))
        };
        let a = pick(
            self.a,
            |p| match p {
                LevyParams::GammaOu(g) => g.a,
                LevyParams::IgOu(g) => g.a,
            },
            "a",
        )?;
        let b = pick(
            self.b,
            |p| match p {
                LevyParams::GammaOu(g) => g.b,
                LevyParams::IgOu(g) => g.b,
            },
            "b",
        )?;
        let lambda = pick(self.lambda, LevyParams::lambda, "lambda")?;
        let rho = pick(self.rho, LevyParams::rho, "rho")?;
        let sigma0_sq = pick(self.sigma0_sq, LevyParams::sigma0_sq, "sigma0_sq")?;

        match kind {
            "gamma-ou" => Ok(LevyParams::GammaOu(GammaOuParams::new(
                a, b, lambda, rho, sigma0_sq,
            )?)),
            _ => Ok(LevyParams::IgOu(IgOuParams::new(
                a, b, lambda, rho, sigma0_sq,
            )?)),
        }
    }
}
