//! Fourier evaluation of the hedge integrals.
//!
//! The reference path integrates each damped transform by adaptive
//! Gauss–Kronrod quadrature over the frequency axis. The fast path computes
//! whole log-strike grids with one FFT per integrand and is validated against
//! the reference at spot-check strikes.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::charfn::{damping_feasible, eta, phi, DampingConfig};
use crate::error::{Error, Result};
use crate::model::{c_rho, GammaOuParams, MarketState};
use crate::quad::adaptive_gk;

/// Truncation and tolerance knobs for the frequency-axis quadrature.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadratureConfig {
    /// Hard truncation of the `v` integral; panels stop earlier once the
    /// integrand has decayed.
    pub v_max: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Subdivision budget per panel.
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            v_max: 4096.0,
            abs_tol: 1e-8,
            rel_tol: 1e-9,
            max_subdivisions: 4000,
        }
    }
}

/// Carr–Madan grid: `n` frequencies spaced `dv`, giving log-strike spacing
/// `dk = 2 pi / (n dv)` around `k_center`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FftGridConfig {
    pub n: usize,
    pub dv: f64,
    /// Center of the log-strike window; defaults to `log(spot)`.
    pub k_center: Option<f64>,
}

impl Default for FftGridConfig {
    fn default() -> Self {
        // dv resolves the 1/(i zeta - 1) factor near v = 0 (scale alpha - 1);
        // n * dv sets dk small enough for cubic interpolation at short
        // maturities
        Self {
            n: 65536,
            dv: 0.0625,
            k_center: None,
        }
    }
}

impl FftGridConfig {
    pub fn dk(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.n as f64 * self.dv)
    }

    fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || self.n < 16 {
            return Err(Error::InvalidParameter(format!(
                "FFT grid size must be a power of two >= 16, got {}",
                self.n
            )));
        }
        if !(self.dv > 0.0 && self.dv.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dv must be > 0, got {}",
                self.dv
            )));
        }
        Ok(())
    }
}

/// A Fourier integral value with its accumulated error estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FourierValue {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
}

/// Quadrature diagnostics carried alongside each hedge computation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Diagnostics {
    pub quad_err_i1: f64,
    pub quad_err_i2: f64,
    pub quad_err_price: f64,
    pub alpha_damp: f64,
}

/// Outputs of one hedge computation at a single strike.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HedgeResult {
    pub strike: f64,
    pub i1: f64,
    pub i2: f64,
    pub price: f64,
    /// Locally risk-minimizing position in the risky asset.
    pub xi: f64,
    /// Delta-hedge position `I1 / S_t`.
    pub delta: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Copy)]
enum Transform {
    /// `E[S_T 1{S_T >= K}]`
    AssetIndicator,
    /// `E[(S_T - K)^+]`
    CallPayoff,
    /// jump-shift correction: call-payoff transform times the inner Lévy
    /// integral `Psi(zeta)`
    JumpCorrection,
}

/// `Psi(zeta) = a b lambda [1/(b - eta - rho) - 1/(b - eta) - 1/(b - rho) + 1/b]`,
/// the closed form of `int (e^{eta z} - 1)(e^{rho z} - 1) nu(dz)`.
fn psi_levy(zeta: Complex64, state: &MarketState, levy: &GammaOuParams) -> Complex64 {
    let e = eta(zeta, state, levy);
    let b = levy.b;
    let rho = levy.rho;
    levy.a * b * levy.lambda * (1.0 / (b - e - rho) - 1.0 / (b - e) - 1.0 / (b - rho) + 1.0 / b)
}

fn check_inputs(
    strike: f64,
    state: &MarketState,
    levy: &GammaOuParams,
    damping: &DampingConfig,
) -> Result<()> {
    levy.validate()?;
    if !(strike > 0.0 && strike.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "strike must be > 0, got {strike}"
        )));
    }
    let report = damping_feasible(damping.alpha_damp, state, levy);
    if !report.feasible() {
        let failed: Vec<&str> = report
            .items
            .iter()
            .filter(|i| !i.pass)
            .map(|i| i.name.as_str())
            .collect();
        return Err(Error::DampingInfeasible(format!(
            "alpha = {} fails {:?}; moment interval {:?}, sufficient interval {:?}",
            damping.alpha_damp, failed, report.moment_interval, report.sufficient_interval
        )));
    }
    Ok(())
}

/// Integrates `f` over `[0, v_max]` on fixed dyadic panels, stopping early
/// once consecutive panel contributions fall below tolerance.
fn half_line<F: Fn(f64) -> f64>(f: &F, quad: &QuadratureConfig) -> Result<FourierValue> {
    let mut edges = vec![0.0, 1.0];
    let mut hi = 2.0;
    while hi < quad.v_max {
        edges.push(hi);
        hi *= 2.0;
    }
    edges.push(quad.v_max);

    let mut acc = 0.0f64;
    let mut err = 0.0f64;
    let mut evals = 0usize;
    let mut quiet_panels = 0u32;
    for w in edges.windows(2) {
        let tol_abs = 0.1 * quad.abs_tol.max(quad.rel_tol * acc.abs());
        let r = adaptive_gk(
            f,
            w[0],
            w[1],
            tol_abs,
            0.1 * quad.rel_tol,
            quad.max_subdivisions,
        );
        evals += r.evals;
        if !r.converged {
            return Err(Error::QuadratureNonConvergence {
                err: r.abs_err,
                tol: tol_abs,
            });
        }
        acc += r.value;
        err += r.abs_err;
        let stop_tol = quad.abs_tol.max(quad.rel_tol * acc.abs());
        if w[1] >= 64.0 && r.value.abs() < stop_tol {
            quiet_panels += 1;
            if quiet_panels >= 2 {
                // tail bound for the skipped remainder
                err += stop_tol;
                break;
            }
        } else {
            quiet_panels = 0;
        }
    }
    Ok(FourierValue {
        value: acc,
        abs_err: err,
        evals,
    })
}

fn transform_integral(
    kind: Transform,
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
    strike: f64,
    damping: &DampingConfig,
    quad: &QuadratureConfig,
) -> Result<FourierValue> {
    check_inputs(strike, state, levy, damping)?;
    if matches!(kind, Transform::JumpCorrection) && levy.rho == 0.0 {
        // the inner integrand carries (e^{rho z} - 1): identically zero
        return Ok(FourierValue {
            value: 0.0,
            abs_err: 0.0,
            evals: 0,
        });
    }

    let alpha = damping.alpha_damp;
    let k_log = strike.ln();
    let disc = state.discount();
    let stashed: RefCell<Option<Error>> = RefCell::new(None);

    let f = |v: f64| -> f64 {
        let zeta = Complex64::new(v, -alpha);
        let ph = match phi(zeta, state, levy, mu) {
            Ok(p) => p,
            Err(e) => {
                stashed.borrow_mut().get_or_insert(e);
                return 0.0;
            }
        };
        let i_zeta = Complex64::i() * zeta;
        // K^{-i zeta + 1} = exp((1 - i zeta) log K)
        let k_pow = ((Complex64::new(1.0, 0.0) - i_zeta) * k_log).exp();
        let base = match kind {
            Transform::AssetIndicator => k_pow * ph / (i_zeta - 1.0),
            Transform::CallPayoff => k_pow * ph / ((i_zeta - 1.0) * i_zeta),
            Transform::JumpCorrection => {
                let e = eta(zeta, state, levy);
                if e.re > 1e-12 {
                    stashed
                        .borrow_mut()
                        .get_or_insert(Error::EtaSignViolation { re_eta: e.re, v });
                    return 0.0;
                }
                k_pow * ph / ((i_zeta - 1.0) * i_zeta) * psi_levy(zeta, state, levy)
            }
        };
        base.re
    };

    let raw = half_line(&f, quad);
    // a failure inside the integrand is the root cause; report it ahead of
    // any secondary convergence failure it provoked
    if let Some(e) = stashed.into_inner() {
        return Err(e);
    }
    let raw = raw?;
    let scale = disc / std::f64::consts::PI;
    Ok(FourierValue {
        value: raw.value * scale,
        abs_err: raw.abs_err * scale,
        evals: raw.evals,
    })
}

/// `I1 = e^{-(r-q) tau} E[S_T 1{S_T >= K} | S_t, sigma_t^2]` by damped
/// Fourier inversion.
pub fn i1(
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
    strike: f64,
    damping: &DampingConfig,
    quad: &QuadratureConfig,
) -> Result<FourierValue> {
    transform_integral(
        Transform::AssetIndicator,
        state,
        levy,
        mu,
        strike,
        damping,
        quad,
    )
}

/// The jump-shift correction term of the hedge numerator:
/// `I2 = e^{-(r-q) tau} / pi * int Re[K^{-i zeta + 1} phi(zeta) Psi(zeta) /
/// ((i zeta - 1) i zeta)] dv`. Zero exactly when `rho = 0`.
pub fn i2(
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
    strike: f64,
    damping: &DampingConfig,
    quad: &QuadratureConfig,
) -> Result<FourierValue> {
    transform_integral(
        Transform::JumpCorrection,
        state,
        levy,
        mu,
        strike,
        damping,
        quad,
    )
}

/// Discounted call price `e^{-(r-q) tau} E[(S_T - K)^+ | S_t, sigma_t^2]`.
pub fn price_call(
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
    strike: f64,
    damping: &DampingConfig,
    quad: &QuadratureConfig,
) -> Result<FourierValue> {
    let mut r = transform_integral(
        Transform::CallPayoff,
        state,
        levy,
        mu,
        strike,
        damping,
        quad,
    )?;
    // deep out of the money the true value can round below zero within the
    // quadrature tolerance
    if r.value < 0.0 && r.value >= -10.0 * (r.abs_err + 1e-12) {
        r.value = 0.0;
    }
    Ok(r)
}

fn assemble(
    state: &MarketState,
    levy: &GammaOuParams,
    strike: f64,
    i1_v: f64,
    i2_v: f64,
    price_v: f64,
    diagnostics: Diagnostics,
) -> HedgeResult {
    let crho = c_rho(levy);
    let xi = (state.sigma_sq * i1_v + i2_v) / (state.spot * (state.sigma_sq + crho));
    HedgeResult {
        strike,
        i1: i1_v,
        i2: i2_v,
        price: price_v,
        xi,
        delta: i1_v / state.spot,
        diagnostics,
    }
}

/// Full hedge computation at one strike through the quadrature reference path.
pub fn hedge(
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
    strike: f64,
    damping: &DampingConfig,
    quad: &QuadratureConfig,
) -> Result<HedgeResult> {
    let a = i1(state, levy, mu, strike, damping, quad)?;
    let b = i2(state, levy, mu, strike, damping, quad)?;
    let p = price_call(state, levy, mu, strike, damping, quad)?;
    Ok(assemble(
        state,
        levy,
        strike,
        a.value,
        b.value,
        p.value,
        Diagnostics {
            quad_err_i1: a.abs_err,
            quad_err_i2: b.abs_err,
            quad_err_price: p.abs_err,
            alpha_damp: damping.alpha_damp,
        },
    ))
}

/// Computes `I1`, `I2`, and the price on a full log-strike grid with one FFT
/// per integrand, interpolates to the requested strikes, and validates the
/// grid against the quadrature reference at up to five spot-check strikes.
pub fn strike_grid_fft(
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
    strikes: &[f64],
    damping: &DampingConfig,
    fft_cfg: &FftGridConfig,
) -> Result<Vec<HedgeResult>> {
    if strikes.is_empty() {
        return Ok(Vec::new());
    }
    fft_cfg.validate()?;
    for &k in strikes {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "strike must be > 0, got {k}"
            )));
        }
    }
    check_inputs(strikes[0], state, levy, damping)?;

    let n = fft_cfg.n;
    let dv = fft_cfg.dv;
    let dk = fft_cfg.dk();
    let k_center = fft_cfg.k_center.unwrap_or_else(|| state.spot.ln());
    let k0 = k_center - (n as f64 / 2.0) * dk;
    let alpha = damping.alpha_damp;
    let disc = state.discount();
    let rho_zero = levy.rho == 0.0;

    // damped transforms sampled on the frequency grid, Simpson-weighted and
    // pre-rotated so the DFT lands on the log-strike grid
    let mut asset = vec![Complex64::new(0.0, 0.0); n];
    let mut payoff = vec![Complex64::new(0.0, 0.0); n];
    let mut jump = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        let v = j as f64 * dv;
        let zeta = Complex64::new(v, -alpha);
        let ph = phi(zeta, state, levy, mu)?;
        let i_zeta = Complex64::i() * zeta;
        let simpson = if j == 0 {
            1.0 / 3.0
        } else if j % 2 == 1 {
            4.0 / 3.0
        } else {
            2.0 / 3.0
        };
        let rot = (-Complex64::i() * (v * k0)).exp() * (simpson * dv);
        let a = ph / (i_zeta - 1.0);
        let p = a / i_zeta;
        asset[j] = a * rot;
        payoff[j] = p * rot;
        if !rho_zero {
            let e = eta(zeta, state, levy);
            if e.re > 1e-12 {
                return Err(Error::EtaSignViolation { re_eta: e.re, v });
            }
            jump[j] = p * psi_levy(zeta, state, levy) * rot;
        }
    }

    let fft = FftPlanner::new().plan_fft_forward(n);
    fft.process(&mut asset);
    fft.process(&mut payoff);
    if !rho_zero {
        fft.process(&mut jump);
    }

    let interp = |grid: &[Complex64], k: f64| -> Result<f64> {
        let u = (k - k0) / dk;
        let i = u.floor() as isize;
        let lo = k0 + dk; // need one point on each side for the cubic
        let hi = k0 + (n as f64 - 3.0) * dk;
        if i < 1 || (i as usize) + 2 >= n {
            return Err(Error::WindowViolation {
                strike: k.exp(),
                lo: lo.exp(),
                hi: hi.exp(),
            });
        }
        let t = u - i as f64;
        let i = i as usize;
        let (p0, p1, p2, p3) = (grid[i - 1].re, grid[i].re, grid[i + 1].re, grid[i + 2].re);
        // Catmull-Rom cubic on the uniform log-strike grid
        let val = 0.5
            * (2.0 * p1
                + (-p0 + p2) * t
                + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t
                + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
        Ok(val)
    };

    let value_at = |grid: &[Complex64], strike: f64| -> Result<f64> {
        let k = strike.ln();
        let g = interp(grid, k)?;
        Ok(disc / std::f64::consts::PI * ((1.0 - alpha) * k).exp() * g)
    };

    // spot-check the grid against the reference quadrature
    let quad = QuadratureConfig::default();
    let mut check_strikes: Vec<f64> = Vec::new();
    if strikes.len() <= 5 {
        check_strikes.extend_from_slice(strikes);
    } else {
        let (lo, hi) = strikes
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &s| {
                (l.min(s), h.max(s))
            });
        for i in 0..5 {
            check_strikes.push(lo + (hi - lo) * i as f64 / 4.0);
        }
    }
    let mut max_rel = 0.0f64;
    for &ks in &check_strikes {
        let grid_i1 = value_at(&asset, ks)?;
        let grid_price = value_at(&payoff, ks)?;
        let ref_i1 = i1(state, levy, mu, ks, damping, &quad)?.value;
        let ref_price = price_call(state, levy, mu, ks, damping, &quad)?.value;
        // relative to the dominant scale so that near-zero tails compare
        // against a basis point of spot rather than against themselves
        let scale_i1 = ref_i1.abs().max(1e-4 * state.spot);
        let scale_p = ref_price.abs().max(1e-4 * state.spot);
        let rel_i1 = (grid_i1 - ref_i1).abs() / scale_i1;
        let rel_p = (grid_price - ref_price).abs() / scale_p;
        max_rel = max_rel.max(rel_i1).max(rel_p);
        if !rho_zero {
            let grid_i2 = value_at(&jump, ks)?;
            let ref_i2 = i2(state, levy, mu, ks, damping, &quad)?.value;
            let scale_i2 = ref_i2.abs().max(1e-4 * state.spot);
            let rel_i2 = (grid_i2 - ref_i2).abs() / scale_i2;
            max_rel = max_rel.max(rel_i2);
        }
        if max_rel > 1e-4 {
            return Err(Error::FftMismatch {
                strike: ks,
                rel_err: max_rel,
            });
        }
    }

    let mut out = Vec::with_capacity(strikes.len());
    for &ks in strikes {
        let i1_v = value_at(&asset, ks)?;
        let mut price_v = value_at(&payoff, ks)?;
        if price_v < 0.0 && price_v >= -1e-6 * state.spot {
            price_v = 0.0;
        }
        let i2_v = if rho_zero { 0.0 } else { value_at(&jump, ks)? };
        out.push(assemble(
            state,
            levy,
            ks,
            i1_v,
            i2_v,
            price_v,
            Diagnostics {
                quad_err_i1: max_rel,
                quad_err_i2: max_rel,
                quad_err_price: max_rel,
                alpha_damp: alpha,
            },
        ));
    }
    Ok(out)
}
