//! Exact Monte Carlo simulation of the Gamma-OU model and independent
//! estimators for every Fourier quantity.
//!
//! The driver is compound Poisson, so a path is a finite jump skeleton; the
//! terminal variance, integrated variance, and log return are all closed
//! forms in that skeleton — no time discretization anywhere. Estimators reuse
//! one set of draws across the shifted and unshifted legs (common random
//! numbers) and pair each Gaussian draw with its negation (antithetics).

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::charfn::{phi, DampingConfig};
use crate::error::{Error, Result};
use crate::model::{bcal_unchecked, bound_constants, c_rho, GammaOuParams, MarketState};
use crate::pricer::{hedge, QuadratureConfig};

/// One realization of the subordinator on `(t, T]` with its closed-form
/// derived quantities.
#[derive(Debug, Clone, Serialize)]
pub struct JumpPath {
    pub t: f64,
    pub maturity: f64,
    pub sigma_sq_start: f64,
    /// Jump times, sorted increasing, in `(t, T]`.
    pub jump_times: Vec<f64>,
    pub jump_sizes: Vec<f64>,
    /// `sigma_T^2 = e^{-lambda tau} sigma_t^2 + sum_i e^{-lambda (T - t_i)} x_i`.
    pub sigma_sq_terminal: f64,
    /// `int_t^T sigma_s^2 ds = (total_jump - sigma_T^2 + sigma_t^2) / lambda`.
    pub integrated_variance: f64,
    pub total_jump: f64,
}

impl JumpPath {
    /// Builds a path from explicit jumps, computing the derived fields from
    /// the closed forms.
    pub fn with_jumps(
        lambda: f64,
        t: f64,
        maturity: f64,
        sigma_sq_start: f64,
        mut jumps: Vec<(f64, f64)>,
    ) -> Self {
        jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let tau = maturity - t;
        let mut sigma_sq_terminal = (-lambda * tau).exp() * sigma_sq_start;
        let mut total_jump = 0.0;
        for &(ti, xi) in &jumps {
            sigma_sq_terminal += xi * (-lambda * (maturity - ti)).exp();
            total_jump += xi;
        }
        let integrated_variance = (total_jump - sigma_sq_terminal + sigma_sq_start) / lambda;
        let (jump_times, jump_sizes) = jumps.into_iter().unzip();
        Self {
            t,
            maturity,
            sigma_sq_start,
            jump_times,
            jump_sizes,
            sigma_sq_terminal,
            integrated_variance,
            total_jump,
        }
    }

    /// Squared volatility at `s` in `[t, T]`, left limit (jumps at `s` itself
    /// excluded).
    pub fn sigma_sq_at(&self, s: f64, lambda: f64) -> f64 {
        let mut v = (-lambda * (s - self.t)).exp() * self.sigma_sq_start;
        for (ti, xi) in self.jump_times.iter().zip(&self.jump_sizes) {
            if *ti < s {
                v += xi * (-lambda * (s - ti)).exp();
            }
        }
        v
    }
}

/// One terminal log-return draw conditioned on a jump skeleton.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LogReturnSample {
    /// `L_T - L_t = mu tau - V/2 + sqrt(V) G + rho * total_jump`.
    pub l_terminal: f64,
    pub gaussian_draw: f64,
}

/// Monte Carlo configuration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McConfig {
    /// Number of jump skeletons (each contributes an antithetic pair when
    /// `antithetic` is set).
    pub n_paths: usize,
    pub seed: u64,
    /// Gauss–Laguerre node count for the outer Lévy integral of the
    /// jump-shift term.
    pub n_z_nodes: usize,
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 200_000,
            seed: 42,
            n_z_nodes: 64,
            antithetic: true,
        }
    }
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

/// Estimates for one strike.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McHedgeEstimates {
    pub i1: Estimate,
    pub i2: Estimate,
    pub price: Estimate,
    pub xi: Estimate,
}

/// Per-path RNG stream: one ChaCha stream per (seed, path index), so draws
/// are independent of scheduling and thread count.
fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Draws the jump skeleton on `(t, T]`: Poisson(a lambda tau) many jumps,
/// uniform times, Exp(b) sizes.
pub fn sample_jump_path(
    levy: &GammaOuParams,
    t: f64,
    maturity: f64,
    sigma_sq_t: f64,
    rng: &mut impl Rng,
) -> JumpPath {
    let tau = maturity - t;
    let rate = levy.jump_intensity() * tau;
    let count = if rate > 0.0 {
        Poisson::new(rate).expect("positive rate").sample(rng) as usize
    } else {
        0
    };
    let exp = Exp::new(levy.b).expect("positive b");
    let mut jumps: Vec<(f64, f64)> = (0..count)
        .map(|_| {
            let ti = t + rng.gen::<f64>() * tau;
            let xi = exp.sample(rng);
            (ti, xi)
        })
        .collect();
    jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
    JumpPath::with_jumps(levy.lambda, t, maturity, sigma_sq_t, jumps)
}

/// Draws the Gaussian leg and assembles the terminal log return
/// `L_T - L_t = mu tau - V/2 + sqrt(V) G + rho * (J_T - J_t)`, exact in
/// distribution given the skeleton.
pub fn sample_log_return(
    path: &JumpPath,
    mu: f64,
    rho: f64,
    rng: &mut impl Rng,
) -> LogReturnSample {
    let g: f64 = rng.sample(StandardNormal);
    let tau = path.maturity - path.t;
    let v = path.integrated_variance;
    LogReturnSample {
        l_terminal: mu * tau - 0.5 * v + v.sqrt() * g + rho * path.total_jump,
        gaussian_draw: g,
    }
}

/// Gauss–Laguerre nodes and weights for `int_0^inf f(y) e^{-y} dy`.
pub(crate) fn gauss_laguerre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 2, "need at least two nodes");
    // evaluate (L_n, L_{n-1}, L_{n+1}) at x by the three-term recurrence
    let eval = |x: f64| -> (f64, f64, f64) {
        let mut lm1 = 1.0f64; // L_0
        let mut l = 1.0 - x; // L_1
        for k in 1..n {
            let kp = k as f64;
            let next = ((2.0 * kp + 1.0 - x) * l - kp * lm1) / (kp + 1.0);
            lm1 = l;
            l = next;
        }
        let np = n as f64;
        let lp1 = ((2.0 * np + 1.0 - x) * l - np * lm1) / (np + 1.0);
        (l, lm1, lp1)
    };

    let mut roots: Vec<f64> = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        let mut x = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => roots[0] + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                let step = (1.0 + 2.55 * ai) / (1.9 * ai);
                roots[i - 1] + step * (roots[i - 1] - roots[i - 2])
            }
        };
        for _ in 0..100 {
            let (l, lm1, _) = eval(x);
            let deriv = nf * (l - lm1) / x;
            let dx = l / deriv;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs() {
                break;
            }
        }
        roots.push(x);
    }

    roots
        .into_iter()
        .map(|x| {
            let (_, _, lp1) = eval(x);
            let w = x / ((nf + 1.0) * (nf + 1.0) * lp1 * lp1);
            (x, w)
        })
        .collect()
}

/// Nodes `z_j` and Lévy-measure weights `w_j` such that
/// `sum_j w_j h(z_j) ~ int h(z) nu(dz)` for the Gamma-OU measure.
pub fn levy_z_nodes(levy: &GammaOuParams, n: usize) -> Vec<(f64, f64)> {
    gauss_laguerre(n)
        .into_iter()
        .map(|(y, w)| (y / levy.b, levy.jump_intensity() * w))
        .collect()
}

#[derive(Clone)]
struct MomentAcc {
    sum: f64,
    sum_sq: f64,
}

impl MomentAcc {
    fn new() -> Self {
        Self {
            sum: 0.0,
            sum_sq: 0.0,
        }
    }
    fn add(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }
    fn merge(&mut self, o: &Self) {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }
    fn estimate(&self, n: usize) -> Estimate {
        let nf = n as f64;
        let mean = self.sum / nf;
        let var = (self.sum_sq / nf - mean * mean).max(0.0);
        Estimate {
            value: mean,
            std_err: (var / nf).sqrt(),
        }
    }
}

#[derive(Clone)]
struct PhiAcc {
    sum_re: f64,
    sum_im: f64,
    sum_mod_sq: f64,
}

/// Raw per-strike accumulators for one simulation pass.
#[derive(Clone)]
struct StrikeAcc {
    i1: MomentAcc,
    i2: MomentAcc,
    price: MomentAcc,
    xi: MomentAcc,
    put_lrm: MomentAcc,
    /// paired difference (put_lrm + 1) - xi on the same draws
    corollary_gap: MomentAcc,
}

impl StrikeAcc {
    fn new() -> Self {
        Self {
            i1: MomentAcc::new(),
            i2: MomentAcc::new(),
            price: MomentAcc::new(),
            xi: MomentAcc::new(),
            put_lrm: MomentAcc::new(),
            corollary_gap: MomentAcc::new(),
        }
    }
}

struct PassAcc {
    strikes: Vec<StrikeAcc>,
    martingale: MomentAcc,
    phis: Vec<PhiAcc>,
}

/// Full per-strike statistics of one pass.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StrikeStats {
    pub strike: f64,
    pub i1: Estimate,
    pub i2: Estimate,
    pub price: Estimate,
    pub xi: Estimate,
    pub put_lrm: Estimate,
    /// `(put_lrm + 1) - xi` with its paired standard error.
    pub corollary_gap: Estimate,
}

/// Output of one simulation pass.
#[derive(Debug, Clone, Serialize)]
pub struct McPass {
    pub n_paths: usize,
    pub strikes: Vec<StrikeStats>,
    /// Discounted terminal mean, to compare against the spot.
    pub martingale: Estimate,
    /// Characteristic-function estimates at the requested real arguments.
    pub phi: Vec<(f64, Complex64, f64)>,
}

const CHUNK: usize = 4096;

/// One simulation pass over `mc.n_paths` skeletons computing, for every
/// requested strike, the discounted estimators of the hedge quantities, plus
/// the discounted terminal mean and the empirical characteristic function at
/// `thetas`. Deterministic for a fixed seed regardless of thread count.
pub fn simulate_pass(
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
    strikes: &[f64],
    thetas: &[f64],
    mc: &McConfig,
) -> Result<McPass> {
    levy.validate()?;
    if mc.n_paths == 0 {
        return Err(Error::InvalidParameter("n_paths must be positive".into()));
    }
    if mc.n_z_nodes < 2 {
        return Err(Error::InvalidParameter(
            "need at least two z-quadrature nodes".into(),
        ));
    }

    let tau = state.tau();
    let b_tau = bcal_unchecked(tau, levy.lambda);
    let disc = state.discount();
    let spot = state.spot;
    let crho = c_rho(levy);
    let den = spot * (state.sigma_sq + crho);
    let log_spot = spot.ln();

    let z_nodes = if levy.rho < 0.0 {
        levy_z_nodes(levy, mc.n_z_nodes)
    } else {
        Vec::new()
    };
    // the nodes must reach far enough into the tail of nu
    if let Some(&(z_last, _)) = z_nodes.last() {
        debug_assert!((-levy.b * z_last).exp() < 1e-12);
    }
    // per-node factors: weight * (e^{rho z} - 1), and the level shift rho z
    let node_fac: Vec<(f64, f64, f64)> = z_nodes
        .iter()
        .map(|&(z, w)| (z, w * (levy.rho * z).exp_m1(), levy.rho * z))
        .collect();

    let n = mc.n_paths;
    let n_chunks = n.div_ceil(CHUNK);
    let signs: &[f64] = if mc.antithetic { &[1.0, -1.0] } else { &[1.0] };
    let pair_w = 1.0 / signs.len() as f64;

    let partials: Vec<PassAcc> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = PassAcc {
                strikes: vec![StrikeAcc::new(); strikes.len()],
                martingale: MomentAcc::new(),
                phis: vec![
                    PhiAcc {
                        sum_re: 0.0,
                        sum_im: 0.0,
                        sum_mod_sq: 0.0
                    };
                    thetas.len()
                ],
            };
            let mut shifted = vec![0.0f64; node_fac.len()];
            let mut strike_vals = vec![[0.0f64; 6]; strikes.len()];
            let mut phi_vals = vec![(0.0f64, 0.0f64); thetas.len()];

            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(n);
            for p in lo..hi {
                let mut rng = path_rng(mc.seed, p as u64);
                let path =
                    sample_jump_path(levy, state.t, state.maturity, state.sigma_sq, &mut rng);
                let g: f64 = rng.sample(StandardNormal);
                let v = path.integrated_variance;
                let dj = path.total_jump;
                let drift = mu * tau + levy.rho * dj;

                for vals in strike_vals.iter_mut() {
                    *vals = [0.0; 6];
                }
                for pv in phi_vals.iter_mut() {
                    *pv = (0.0, 0.0);
                }
                let mut mart = 0.0;

                for &sign in signs {
                    let l = drift - 0.5 * v + v.sqrt() * sign * g;
                    let s_t = spot * l.exp();
                    mart += pair_w * disc * s_t;

                    // shifted legs share (skeleton, Gaussian draw) with the
                    // base leg: the payoff difference vanishes as z -> 0
                    for (slot, &(z, _, rho_z)) in shifted.iter_mut().zip(&node_fac) {
                        let vz = v + z * b_tau;
                        let lz = drift - 0.5 * vz + vz.sqrt() * sign * g + rho_z;
                        *slot = spot * lz.exp();
                    }

                    for (ks, vals) in strikes.iter().zip(strike_vals.iter_mut()) {
                        let k = *ks;
                        let call_base = (s_t - k).max(0.0);
                        let put_base = (k - s_t).max(0.0);
                        let mut call_shift_sum = 0.0;
                        let mut put_shift_sum = 0.0;
                        for (s_z, &(_, wf, _)) in shifted.iter().zip(&node_fac) {
                            call_shift_sum += wf * ((s_z - k).max(0.0) - call_base);
                            put_shift_sum += wf * ((k - s_z).max(0.0) - put_base);
                        }
                        let i1_term = disc * if s_t >= k { s_t } else { 0.0 };
                        let i2_term = disc * call_shift_sum;
                        let price_term = disc * call_base;
                        let put_indicator = if s_t < k { -s_t } else { 0.0 };
                        let put_num = disc * (state.sigma_sq * put_indicator + put_shift_sum);
                        vals[0] += pair_w * i1_term;
                        vals[1] += pair_w * i2_term;
                        vals[2] += pair_w * price_term;
                        vals[3] += pair_w * (state.sigma_sq * i1_term + i2_term) / den;
                        vals[4] += pair_w * put_num / den;
                    }

                    for (pv, &th) in phi_vals.iter_mut().zip(thetas) {
                        let arg = th * (log_spot + l);
                        pv.0 += pair_w * arg.cos();
                        pv.1 += pair_w * arg.sin();
                    }
                }

                // paired difference for the put-call corollary on this path
                for vals in strike_vals.iter_mut() {
                    vals[5] = vals[4] + 1.0 - vals[3];
                }

                acc.martingale.add(mart);
                for (sa, vals) in acc.strikes.iter_mut().zip(&strike_vals) {
                    sa.i1.add(vals[0]);
                    sa.i2.add(vals[1]);
                    sa.price.add(vals[2]);
                    sa.xi.add(vals[3]);
                    sa.put_lrm.add(vals[4]);
                    sa.corollary_gap.add(vals[5]);
                }
                for (pa, pv) in acc.phis.iter_mut().zip(&phi_vals) {
                    pa.sum_re += pv.0;
                    pa.sum_im += pv.1;
                    pa.sum_mod_sq += pv.0 * pv.0 + pv.1 * pv.1;
                }
            }
            acc
        })
        .collect();

    // ordered merge keeps the reduction independent of scheduling
    let mut total = PassAcc {
        strikes: vec![StrikeAcc::new(); strikes.len()],
        martingale: MomentAcc::new(),
        phis: vec![
            PhiAcc {
                sum_re: 0.0,
                sum_im: 0.0,
                sum_mod_sq: 0.0
            };
            thetas.len()
        ],
    };
    for part in &partials {
        total.martingale.merge(&part.martingale);
        for (t, p) in total.strikes.iter_mut().zip(&part.strikes) {
            t.i1.merge(&p.i1);
            t.i2.merge(&p.i2);
            t.price.merge(&p.price);
            t.xi.merge(&p.xi);
            t.put_lrm.merge(&p.put_lrm);
            t.corollary_gap.merge(&p.corollary_gap);
        }
        for (t, p) in total.phis.iter_mut().zip(&part.phis) {
            t.sum_re += p.sum_re;
            t.sum_im += p.sum_im;
            t.sum_mod_sq += p.sum_mod_sq;
        }
    }

    let nf = n as f64;
    let phi_out = thetas
        .iter()
        .zip(&total.phis)
        .map(|(&th, pa)| {
            let mean = Complex64::new(pa.sum_re / nf, pa.sum_im / nf);
            let var = (pa.sum_mod_sq / nf - mean.norm_sqr()).max(0.0);
            (th, mean, (var / nf).sqrt())
        })
        .collect();

    Ok(McPass {
        n_paths: n,
        strikes: strikes
            .iter()
            .zip(&total.strikes)
            .map(|(&k, sa)| StrikeStats {
                strike: k,
                i1: sa.i1.estimate(n),
                i2: sa.i2.estimate(n),
                price: sa.price.estimate(n),
                xi: sa.xi.estimate(n),
                put_lrm: sa.put_lrm.estimate(n),
                corollary_gap: sa.corollary_gap.estimate(n),
            })
            .collect(),
        martingale: total.martingale.estimate(n),
        phi: phi_out,
    })
}

/// Monte Carlo estimators of `(I1, I2, price, xi)` at one strike.
pub fn mc_hedge_estimates(
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
    strike: f64,
    mc: &McConfig,
) -> Result<McHedgeEstimates> {
    let pass = simulate_pass(state, levy, mu, &[strike], &[], mc)?;
    let s = &pass.strikes[0];
    Ok(McHedgeEstimates {
        i1: s.i1,
        i2: s.i2,
        price: s.price,
        xi: s.xi,
    })
}

/// Direct Monte Carlo evaluation of the put-side hedge formula, used to check
/// the call formula through `xi_call = 1 + xi_put`.
pub fn mc_put_lrm(
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
    strike: f64,
    mc: &McConfig,
) -> Result<Estimate> {
    let pass = simulate_pass(state, levy, mu, &[strike], &[], mc)?;
    Ok(pass.strikes[0].put_lrm)
}

/// Result of auditing theorem-backed path bounds.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub n_paths: usize,
    /// max over paths and grid times of |u_s| / C_u
    pub max_u_ratio: f64,
    pub u_violations: usize,
    pub theta_violations: usize,
    pub consistency_violations: usize,
    pub pass: bool,
}

/// Checks `|u_s| <= C_u` on a 100-point time grid and
/// `theta_{s,x} < 1 - e^{rho x}` at every jump of every path, plus internal
/// consistency of the closed-form path fields.
pub fn path_bound_audit(
    paths: &[JumpPath],
    levy: &GammaOuParams,
    alpha: f64,
) -> Result<AuditReport> {
    if paths.is_empty() {
        return Err(Error::InvalidParameter("no paths to audit".into()));
    }
    let horizon = paths
        .iter()
        .map(|p| p.maturity)
        .fold(f64::NEG_INFINITY, f64::max);
    let bounds = bound_constants(levy, horizon, alpha)?;
    let crho = c_rho(levy);
    const GRID: usize = 100;

    let mut max_u_ratio = 0.0f64;
    let mut u_violations = 0usize;
    let mut theta_violations = 0usize;
    let mut consistency_violations = 0usize;

    for path in paths {
        // the closed-form fields must be mutually consistent and admissible
        let recomputed = JumpPath::with_jumps(
            levy.lambda,
            path.t,
            path.maturity,
            path.sigma_sq_start,
            path.jump_times
                .iter()
                .copied()
                .zip(path.jump_sizes.iter().copied())
                .collect(),
        );
        let ok = path.sigma_sq_start > 0.0
            && path.sigma_sq_terminal > 0.0
            && path.integrated_variance >= 0.0
            && (recomputed.sigma_sq_terminal - path.sigma_sq_terminal).abs()
                <= 1e-9 * (1.0 + path.sigma_sq_terminal.abs())
            && (recomputed.integrated_variance - path.integrated_variance).abs()
                <= 1e-9 * (1.0 + path.integrated_variance.abs());
        if !ok {
            consistency_violations += 1;
            continue;
        }

        let tau = path.maturity - path.t;
        for i in 0..=GRID {
            let s = path.t + tau * i as f64 / GRID as f64;
            let sig_sq = path.sigma_sq_at(s, levy.lambda);
            let u = alpha * sig_sq.sqrt() / (sig_sq + crho);
            if bounds.c_u > 0.0 {
                max_u_ratio = max_u_ratio.max(u.abs() / bounds.c_u);
            }
            if u.abs() > bounds.c_u * (1.0 + 1e-12) {
                u_violations += 1;
            }
        }
        for (ti, xi) in path.jump_times.iter().zip(&path.jump_sizes) {
            let sig_sq = path.sigma_sq_at(*ti, levy.lambda);
            let theta = alpha * ((levy.rho * xi).exp() - 1.0) / (sig_sq + crho);
            let bound = -(levy.rho * xi).exp_m1();
            // strict inequality except in the degenerate rho = 0 case where
            // both sides vanish
            let violated = if bound > 0.0 {
                theta > bound - 1e-15
            } else {
                theta.abs() > 1e-15
            };
            if violated {
                theta_violations += 1;
            }
        }
    }

    Ok(AuditReport {
        n_paths: paths.len(),
        max_u_ratio,
        u_violations,
        theta_violations,
        consistency_violations,
        pass: u_violations == 0 && theta_violations == 0 && consistency_violations == 0,
    })
}

/// Convenience sampler for audits and tests.
pub fn sample_paths(
    state: &MarketState,
    levy: &GammaOuParams,
    n: usize,
    seed: u64,
) -> Vec<JumpPath> {
    (0..n)
        .map(|p| {
            let mut rng = path_rng(seed, p as u64);
            sample_jump_path(levy, state.t, state.maturity, state.sigma_sq, &mut rng)
        })
        .collect()
}

/// One named z-score comparison of the cross-validation battery.
#[derive(Debug, Clone, Serialize)]
pub struct ZCheck {
    pub name: String,
    pub mc: f64,
    pub reference: f64,
    pub std_err: f64,
    pub z: f64,
    pub pass: bool,
}

/// Fourier-vs-Monte-Carlo cross-validation report.
#[derive(Debug, Clone, Serialize)]
pub struct McCheckReport {
    pub n_paths: usize,
    pub seed: u64,
    pub checks: Vec<ZCheck>,
    /// Set when standard errors are too large for the battery to have
    /// meaningful power.
    pub low_power: bool,
}

impl McCheckReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_abs_z(&self) -> f64 {
        self.checks.iter().map(|c| c.z.abs()).fold(0.0, f64::max)
    }
}

fn zcheck(name: String, mc: f64, reference: f64, std_err: f64) -> ZCheck {
    let z = if std_err > 0.0 {
        (mc - reference) / std_err
    } else if mc == reference {
        0.0
    } else {
        f64::INFINITY
    };
    ZCheck {
        name,
        mc,
        reference,
        std_err,
        z,
        pass: z.abs() <= 3.0,
    }
}

/// Runs the full battery: the martingale identity, the characteristic
/// function at `n_theta` log-spaced arguments, and `I1`, `I2`, price, `xi`,
/// and the put-side corollary at the given strikes, each compared to its
/// Fourier reference within three standard errors.
pub fn fourier_mc_battery(
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
    strikes: &[f64],
    damping: &DampingConfig,
    mc: &McConfig,
) -> Result<McCheckReport> {
    let n_theta = 20;
    let thetas: Vec<f64> = (0..n_theta)
        .map(|i| 0.1 * (500.0f64).powf(i as f64 / (n_theta - 1) as f64))
        .collect();
    let pass = simulate_pass(state, levy, mu, strikes, &thetas, mc)?;

    let mut checks = Vec::new();
    checks.push(zcheck(
        "martingale: disc * E[S_T] vs S_t".into(),
        pass.martingale.value,
        state.spot,
        pass.martingale.std_err,
    ));

    for (th, mc_phi, se) in &pass.phi {
        let reference = phi(Complex64::new(*th, 0.0), state, levy, mu)?;
        // complex distance against the combined component standard error
        let dist = (mc_phi - reference).norm();
        checks.push(zcheck(format!("phi({th:.4})"), dist, 0.0, *se));
    }

    let quad = QuadratureConfig::default();
    for s in &pass.strikes {
        let reference = hedge(state, levy, mu, s.strike, damping, &quad)?;
        checks.push(zcheck(
            format!("i1(K={})", s.strike),
            s.i1.value,
            reference.i1,
            s.i1.std_err,
        ));
        checks.push(zcheck(
            format!("i2(K={})", s.strike),
            s.i2.value,
            reference.i2,
            s.i2.std_err,
        ));
        checks.push(zcheck(
            format!("price(K={})", s.strike),
            s.price.value,
            reference.price,
            s.price.std_err,
        ));
        checks.push(zcheck(
            format!("xi(K={})", s.strike),
            s.xi.value,
            reference.xi,
            s.xi.std_err,
        ));
        checks.push(zcheck(
            format!("put corollary (K={}): mc_put_lrm + 1 vs xi", s.strike),
            s.put_lrm.value + 1.0,
            reference.xi,
            s.put_lrm.std_err,
        ));
    }

    let low_power = pass
        .strikes
        .iter()
        .any(|s| s.xi.std_err > 0.01 || s.price.std_err > 0.01 * state.spot);

    Ok(McCheckReport {
        n_paths: pass.n_paths,
        seed: mc.seed,
        checks,
        low_power,
    })
}
