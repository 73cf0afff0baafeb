//! Hedge ratios for calls and puts, and the sweep datasets behind the
//! strategy-vs-time and strategy-vs-strike figures.

use rayon::prelude::*;
use serde::Serialize;

use crate::charfn::DampingConfig;
use crate::error::{Error, Result};
use crate::model::{GammaOuParams, MarketState};
use crate::pricer::{hedge, strike_grid_fft, FftGridConfig, HedgeResult, QuadratureConfig};

/// Locally risk-minimizing position in the risky asset for a call:
/// `(sigma_t^2 I1 + I2) / (S_t (sigma_t^2 + C_rho))`.
pub fn lrm_call(
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
    strike: f64,
    damping: &DampingConfig,
    quad: &QuadratureConfig,
) -> Result<f64> {
    Ok(hedge(state, levy, mu, strike, damping, quad)?.xi)
}

/// Delta-hedge position for a call: `I1 / S_t`.
pub fn delta_call(
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
    strike: f64,
    damping: &DampingConfig,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let v = crate::pricer::i1(state, levy, mu, strike, damping, quad)?;
    Ok(v.value / state.spot)
}

/// Put-side LRM position, `xi_call - 1`.
pub fn lrm_put(
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
    strike: f64,
    damping: &DampingConfig,
    quad: &QuadratureConfig,
) -> Result<f64> {
    Ok(lrm_call(state, levy, mu, strike, damping, quad)? - 1.0)
}

/// Put delta, `delta_call - 1`.
pub fn delta_put(
    state: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
    strike: f64,
    damping: &DampingConfig,
    quad: &QuadratureConfig,
) -> Result<f64> {
    Ok(delta_call(state, levy, mu, strike, damping, quad)? - 1.0)
}

/// Sweep axis: hold the strike and vary time, or hold time and vary strikes.
#[derive(Debug, Clone, Serialize)]
pub enum SweepSpec {
    Time { strike: f64, times: Vec<f64> },
    Strike { t: f64, strikes: Vec<f64> },
}

impl SweepSpec {
    /// 50 evaluation times `t = 0, 0.02, ..., 0.98` at fixed strike.
    pub fn figure_time_grid(strike: f64) -> Self {
        SweepSpec::Time {
            strike,
            times: (0..50).map(|i| i as f64 * 0.02).collect(),
        }
    }

    /// 73 strikes `K = 200, 225, ..., 2000` at fixed evaluation time.
    pub fn figure_strike_grid(t: f64) -> Self {
        SweepSpec::Strike {
            t,
            strikes: (0..73).map(|i| 200.0 + 25.0 * i as f64).collect(),
        }
    }
}

/// Per-point hedge values; absent on failed rows.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepValues {
    pub xi: f64,
    pub delta: f64,
    pub price: f64,
    pub i1: f64,
    pub i2: f64,
    pub quad_err_i1: f64,
    pub quad_err_i2: f64,
}

/// One row of a sweep table.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    /// `t` for time sweeps, `K` for strike sweeps.
    pub grid_value: f64,
    pub values: Option<SweepValues>,
    pub error: Option<String>,
}

/// A computed sweep with its grid order preserved.
#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub mode: String,
    /// The held coordinate (strike for time sweeps, time for strike sweeps).
    pub fixed: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn n_failed(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// CSV rendering with the fixed column set
    /// `grid_value,xi,delta,price,i1,i2,quad_err_i1,quad_err_i2`.
    /// Failed rows carry NaN in every value column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("grid_value,xi,delta,price,i1,i2,quad_err_i1,quad_err_i2\n");
        for row in &self.rows {
            match &row.values {
                Some(v) => {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        row.grid_value,
                        v.xi,
                        v.delta,
                        v.price,
                        v.i1,
                        v.i2,
                        v.quad_err_i1,
                        v.quad_err_i2
                    ));
                }
                None => {
                    out.push_str(&format!("{},NaN,NaN,NaN,NaN,NaN,NaN,NaN\n", row.grid_value));
                }
            }
        }
        out
    }
}

fn row_from_hedge(grid_value: f64, h: &HedgeResult) -> SweepRow {
    SweepRow {
        grid_value,
        values: Some(SweepValues {
            xi: h.xi,
            delta: h.delta,
            price: h.price,
            i1: h.i1,
            i2: h.i2,
            quad_err_i1: h.diagnostics.quad_err_i1,
            quad_err_i2: h.diagnostics.quad_err_i2,
        }),
        error: None,
    }
}

/// Computes a sweep. Time sweeps go through per-point adaptive quadrature
/// (rows in parallel, output in grid order); strike sweeps go through the FFT
/// grid with a quadrature fallback. Per-row failures are recorded and the
/// sweep continues.
pub fn sweep(
    spec: &SweepSpec,
    base: &MarketState,
    levy: &GammaOuParams,
    mu: f64,
    damping: &DampingConfig,
    quad: &QuadratureConfig,
    fft: &FftGridConfig,
) -> Result<SweepTable> {
    match spec {
        SweepSpec::Time { strike, times } => {
            if times.is_empty() {
                return Err(Error::InvalidParameter("empty time grid".into()));
            }
            if !(*strike > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "strike must be > 0, got {strike}"
                )));
            }
            for &t in times {
                if !(t >= 0.0 && t < base.maturity) {
                    return Err(Error::InvalidParameter(format!(
                        "sweep time {t} outside [0, {})",
                        base.maturity
                    )));
                }
            }
            let rows: Vec<SweepRow> = times
                .par_iter()
                .map(|&t| {
                    let state = MarketState { t, ..*base };
                    match hedge(&state, levy, mu, *strike, damping, quad) {
                        Ok(h) => row_from_hedge(t, &h),
                        Err(e) => SweepRow {
                            grid_value: t,
                            values: None,
                            error: Some(e.to_string()),
                        },
                    }
                })
                .collect();
            Ok(SweepTable {
                mode: "time".into(),
                fixed: *strike,
                rows,
            })
        }
        SweepSpec::Strike { t, strikes } => {
            if strikes.is_empty() {
                return Err(Error::InvalidParameter("empty strike grid".into()));
            }
            if !(*t >= 0.0 && *t < base.maturity) {
                return Err(Error::InvalidParameter(format!(
                    "sweep time {t} outside [0, {})",
                    base.maturity
                )));
            }
            for &k in strikes {
                if !(k > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "strike must be > 0, got {k}"
                    )));
                }
            }
            let state = MarketState { t: *t, ..*base };
            let rows = match strike_grid_fft(&state, levy, mu, strikes, damping, fft) {
                Ok(results) => results
                    .iter()
                    .map(|h| row_from_hedge(h.strike, h))
                    .collect(),
                Err(_) => {
                    // grid-level failure: fall back to per-point quadrature so
                    // individual rows can still succeed
                    strikes
                        .par_iter()
                        .map(|&k| match hedge(&state, levy, mu, k, damping, quad) {
                            Ok(h) => row_from_hedge(k, &h),
                            Err(e) => SweepRow {
                                grid_value: k,
                                values: None,
                                error: Some(e.to_string()),
                            },
                        })
                        .collect()
                }
            };
            Ok(SweepTable {
                mode: "strike".into(),
                fixed: *t,
                rows,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{c_rho, martingale_drift, preset, LevyParams};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn setup() -> (
        MarketState,
        GammaOuParams,
        f64,
        DampingConfig,
        QuadratureConfig,
    ) {
        let levy = match preset("Scho-Gamma").unwrap() {
            LevyParams::GammaOu(p) => p,
            _ => unreachable!(),
        };
        let state = MarketState::reference(0.0);
        let mu = martingale_drift(&levy, state.r, state.q);
        (
            state,
            levy,
            mu,
            DampingConfig::default(),
            QuadratureConfig::default(),
        )
    }

    #[test]
    fn zero_leverage_collapses_to_delta() {
        let (state, mut levy, _, damping, quad) = setup();
        levy.rho = 0.0;
        let mu = martingale_drift(&levy, state.r, state.q);
        let xi = lrm_call(&state, &levy, mu, 1124.47, &damping, &quad).unwrap();
        let d = delta_call(&state, &levy, mu, 1124.47, &damping, &quad).unwrap();
        assert_relative_eq!(xi, d, max_relative = 1e-10);
        assert_eq!(c_rho(&levy), 0.0);
    }

    #[test]
    fn call_put_relation_is_structural() {
        let (state, levy, mu, damping, quad) = setup();
        let xi_c = lrm_call(&state, &levy, mu, 1124.47, &damping, &quad).unwrap();
        let xi_p = lrm_put(&state, &levy, mu, 1124.47, &damping, &quad).unwrap();
        assert_abs_diff_eq!(xi_c - xi_p, 1.0, epsilon = 1e-12);
        assert!(xi_p > -1.0 && xi_p < 0.0);

        // a worthless put needs no hedge at all
        let mut flat = levy;
        flat.rho = 0.0;
        let mu0 = martingale_drift(&flat, state.r, state.q);
        let tiny = lrm_put(&state, &flat, mu0, 1e-8 * state.spot, &damping, &quad).unwrap();
        assert_abs_diff_eq!(tiny, 0.0, epsilon = 1e-4);
    }

    #[test]
    fn atm_transition_steepens_near_maturity() {
        let (state, levy, mu, damping, quad) = setup();
        let slope_at = |t: f64| {
            let spec = SweepSpec::Strike {
                t,
                strikes: vec![1100.0, 1150.0],
            };
            let table = sweep(
                &spec,
                &state,
                &levy,
                mu,
                &damping,
                &quad,
                &FftGridConfig::default(),
            )
            .unwrap();
            let lo = table.rows[0].values.unwrap().xi;
            let hi = table.rows[1].values.unwrap().xi;
            (hi - lo) / 50.0
        };
        let early = slope_at(0.0);
        let late = slope_at(0.9);
        assert!(
            late < early && late < 0.0,
            "ATM gradient should steepen toward maturity: t=0 {early}, t=0.9 {late}"
        );
    }

    #[test]
    fn delta_limits() {
        let (state, levy, mu, damping, quad) = setup();
        let d0 = delta_call(&state, &levy, mu, 1e-8 * state.spot, &damping, &quad).unwrap();
        assert_relative_eq!(d0, 1.0, max_relative = 1e-4);
        let dinf = delta_call(&state, &levy, mu, 1e6 * state.spot, &damping, &quad).unwrap();
        assert_abs_diff_eq!(dinf, 0.0, epsilon = 1e-8);
        let atm = delta_call(&state, &levy, mu, 1124.47, &damping, &quad).unwrap();
        let xi = lrm_call(&state, &levy, mu, 1124.47, &damping, &quad).unwrap();
        assert!(atm > 0.0 && atm < 1.0);
        assert!(xi <= atm);
    }

    #[test]
    fn deep_moneyness_levels() {
        let (state, levy, mu, damping, quad) = setup();
        let itm = lrm_call(&state, &levy, mu, 200.0, &damping, &quad).unwrap();
        assert!((0.95..=1.0).contains(&itm), "xi(200) = {itm}");
        // deep out of the money the ratio decays to zero; the jump correction
        // makes it slightly negative rather than exactly floor it at zero
        let otm = lrm_call(&state, &levy, mu, 2000.0, &damping, &quad).unwrap();
        assert!(otm.abs() <= 0.05, "xi(2000) = {otm}");
        let otm_delta = delta_call(&state, &levy, mu, 2000.0, &damping, &quad).unwrap();
        assert!(otm <= otm_delta);
        assert!((0.0..=0.05).contains(&otm_delta));
    }

    #[test]
    fn time_sweep_rows_and_order() {
        let (state, levy, mu, damping, quad) = setup();
        let spec = SweepSpec::figure_time_grid(1124.47);
        let table = sweep(
            &spec,
            &state,
            &levy,
            mu,
            &damping,
            &quad,
            &FftGridConfig::default(),
        )
        .unwrap();
        assert_eq!(table.rows.len(), 50);
        assert_eq!(table.n_failed(), 0);
        assert_eq!(table.rows[0].grid_value, 0.0);
        assert_relative_eq!(table.rows[49].grid_value, 0.98, max_relative = 1e-12);
        // at the money: both ratios decrease in t
        for w in table.rows.windows(2) {
            let (a, b) = (w[0].values.unwrap(), w[1].values.unwrap());
            assert!(b.xi <= a.xi + 1e-6);
            assert!(b.delta <= a.delta + 1e-6);
            assert!(b.xi <= b.delta + 1e-8);
        }
    }

    #[test]
    fn strike_sweep_spread_is_wider_in_the_money() {
        let (state, levy, mu, damping, quad) = setup();
        let spec = SweepSpec::figure_strike_grid(0.0);
        let table = sweep(
            &spec,
            &state,
            &levy,
            mu,
            &damping,
            &quad,
            &FftGridConfig::default(),
        )
        .unwrap();
        assert_eq!(table.rows.len(), 73);
        assert_eq!(table.n_failed(), 0);
        let mean_gap = |lo: f64, hi: f64| {
            let sel: Vec<f64> = table
                .rows
                .iter()
                .filter(|r| r.grid_value >= lo && r.grid_value <= hi)
                .map(|r| {
                    let v = r.values.unwrap();
                    v.delta - v.xi
                })
                .collect();
            sel.iter().sum::<f64>() / sel.len() as f64
        };
        assert!(mean_gap(600.0, 1100.0) > mean_gap(1150.0, 1800.0));
        for r in &table.rows {
            let v = r.values.unwrap();
            assert!(v.xi <= v.delta + 1e-8);
            assert!(v.delta >= -1e-6 && v.delta <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn sweep_records_row_failures_and_continues() {
        let (state, levy, mu, quad) = {
            let s = setup();
            (s.0, s.1, s.2, s.4)
        };
        // an infeasible damping parameter fails every row but never panics
        let damping = DampingConfig::new(0.5);
        let spec = SweepSpec::Time {
            strike: 1124.47,
            times: vec![0.0, 0.5],
        };
        let table = sweep(
            &spec,
            &state,
            &levy,
            mu,
            &damping,
            &quad,
            &FftGridConfig::default(),
        )
        .unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.n_failed(), 2);
        assert!(table.rows[0]
            .error
            .as_deref()
            .unwrap()
            .contains("infeasible"));
    }

    #[test]
    fn empty_grids_are_rejected() {
        let (state, levy, mu, damping, quad) = setup();
        let spec = SweepSpec::Time {
            strike: 1000.0,
            times: vec![],
        };
        assert!(sweep(
            &spec,
            &state,
            &levy,
            mu,
            &damping,
            &quad,
            &FftGridConfig::default()
        )
        .is_err());
        let spec = SweepSpec::Strike {
            t: 0.0,
            strikes: vec![],
        };
        assert!(sweep(
            &spec,
            &state,
            &levy,
            mu,
            &damping,
            &quad,
            &FftGridConfig::default()
        )
        .is_err());
    }

    #[test]
    fn csv_rendering_round_trips() {
        let (state, levy, mu, damping, quad) = setup();
        let spec = SweepSpec::Strike {
            t: 0.5,
            strikes: vec![900.0, 1124.47, 1300.0],
        };
        let table = sweep(
            &spec,
            &state,
            &levy,
            mu,
            &damping,
            &quad,
            &FftGridConfig::default(),
        )
        .unwrap();
        let csv = table.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "grid_value,xi,delta,price,i1,i2,quad_err_i1,quad_err_i2"
        );
        for (line, row) in lines.zip(&table.rows) {
            let fields: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            assert_eq!(fields.len(), 8);
            let v = row.values.unwrap();
            assert_eq!(fields[0], row.grid_value);
            assert_eq!(fields[1], v.xi);
            assert_eq!(fields[3], v.price);
            assert_eq!(fields[5], v.i2);
        }
    }
}
