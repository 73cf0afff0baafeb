//! Command-line surface for validation, hedging, sweeps, and Monte Carlo
//! cross-checks.
//!
//! Exit codes: 0 success, 1 numerical or assumption failure, 2 configuration
//! error (bad JSON, invalid arguments, unsupported model variant).

// `!(x > 0.0)` rejects NaN where `x <= 0.0` would let it through
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use bns_lrm::charfn::damping_feasible;
use bns_lrm::error::Error;
use bns_lrm::model::{
    martingale_drift_levy, validate_assumptions, GammaOuParams, LevyParams, MarketState,
    ModelConstants, ModelSpecJson,
};
use bns_lrm::pricer::{hedge, FftGridConfig, QuadratureConfig};
use bns_lrm::simulate::{fourier_mc_battery, McConfig};
use bns_lrm::strategy::{sweep, SweepSpec, SweepTable};
use bns_lrm::DampingConfig;

#[derive(Parser)]
#[command(
    name = "bns-lrm",
    about = "Locally risk-minimizing and delta hedge ratios under Gamma-OU stochastic volatility",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args, Clone, Debug)]
struct CommonOpts {
    /// Named parameter preset (NV-IG, Scho-IG, NV-Gamma, Scho-Gamma).
    #[arg(long)]
    preset: Option<String>,
    /// JSON configuration file; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Evaluation time t.
    #[arg(long = "t")]
    t: Option<f64>,
    /// Carr-Madan damping exponent.
    #[arg(long = "alpha-damp")]
    alpha_damp: Option<f64>,
    /// Spot price S_t.
    #[arg(long)]
    spot: Option<f64>,
    /// Squared volatility at the evaluation time.
    #[arg(long = "sigma-sq")]
    sigma_sq: Option<f64>,
    /// Horizon T.
    #[arg(long)]
    maturity: Option<f64>,
    /// Interest rate.
    #[arg(long)]
    r: Option<f64>,
    /// Dividend rate.
    #[arg(long)]
    q: Option<f64>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output path (file for sweeps, directory for --paper-figures).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Proceed even when assumption validation fails.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check the standing model assumptions, damping feasibility, and print
    /// the derived constants.
    Validate(CommonOpts),
    /// Compute xi, delta, price, I1, I2 at one strike through the quadrature
    /// reference path.
    Hedge {
        #[command(flatten)]
        common: CommonOpts,
        /// Strike price.
        #[arg(long = "K")]
        strike: Option<f64>,
    },
    /// Compute a hedge table over a time grid or a strike grid.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// Sweep axis.
        #[arg(long, default_value = "strike")]
        mode: String,
        /// Fixed strike for time sweeps.
        #[arg(long = "K")]
        strike: Option<f64>,
        /// Grid start (time or strike).
        #[arg(long = "grid-start")]
        grid_start: Option<f64>,
        /// Grid end (inclusive).
        #[arg(long = "grid-end")]
        grid_end: Option<f64>,
        /// Grid step.
        #[arg(long = "grid-step")]
        grid_step: Option<f64>,
        /// Emit the six reference figure datasets on their canonical grids.
        #[arg(long = "paper-figures")]
        paper_figures: bool,
    },
    /// Run the Fourier-vs-Monte-Carlo cross-validation battery.
    McCheck {
        #[command(flatten)]
        common: CommonOpts,
        /// Number of Monte Carlo paths.
        #[arg(long)]
        paths: Option<usize>,
        /// Random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated strikes for the battery.
        #[arg(long, value_delimiter = ',')]
        strikes: Option<Vec<f64>>,
    },
}

/// Everything a run needs; round-trips losslessly through JSON.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct RunConfig {
    #[serde(default)]
    model: ModelSpecJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spot: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    maturity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha_damp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    strike: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    force: Option<bool>,
}

struct Resolved {
    levy: LevyParams,
    state: MarketState,
    mu: f64,
    damping: DampingConfig,
    force: bool,
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| CliError::config(format!("cannot parse {}: {e}", path.display())))
}

struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn config(message: String) -> Self {
        Self { message, code: 2 }
    }

    fn numeric(message: String) -> Self {
        Self { message, code: 1 }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidParameter(_) | Error::Capability(_) => 2,
            _ => 1,
        };
        Self {
            message: e.to_string(),
            code,
        }
    }
}

fn resolve(common: &CommonOpts) -> Result<(Resolved, RunConfig), CliError> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &common.preset {
        cfg.model.preset = Some(p.clone());
    }
    if cfg.model.preset.is_none() && cfg.model.model.is_none() {
        cfg.model.preset = Some("Scho-Gamma".to_string());
    }
    macro_rules! overlay {
        ($($field:ident),*) => {
            $(if common.$field.is_some() { cfg.$field = common.$field; })*
        };
    }
    overlay!(spot, sigma_sq, t, maturity, r, q, alpha_damp);
    if common.force {
        cfg.force = Some(true);
    }

    let levy = cfg.model.resolve()?;
    let reference = MarketState::reference(0.0);
    let state = MarketState::new(
        cfg.spot.unwrap_or(reference.spot),
        // without an explicit value, start the variance at its model anchor
        cfg.sigma_sq.unwrap_or_else(|| levy.sigma0_sq()),
        cfg.t.unwrap_or(0.0),
        cfg.maturity.unwrap_or(reference.maturity),
        cfg.r.unwrap_or(reference.r),
        cfg.q.unwrap_or(reference.q),
    )?;
    let mu = martingale_drift_levy(&levy, state.r, state.q);
    let damping = DampingConfig::new(cfg.alpha_damp.unwrap_or(1.75));
    let force = cfg.force.unwrap_or(false);
    Ok((
        Resolved {
            levy,
            state,
            mu,
            damping,
            force,
        },
        cfg,
    ))
}

fn gamma_ou(levy: &LevyParams) -> Result<GammaOuParams, CliError> {
    Ok(*levy.as_gamma_ou()?)
}

/// Refuses to price when the standing assumptions fail, unless forced.
fn gate_assumptions(res: &Resolved) -> Result<(), CliError> {
    let report = validate_assumptions(&res.levy, res.state.maturity, res.mu)?;
    if !report.all_pass() && !res.force {
        let first = report.first_failure().expect("failing report");
        return Err(CliError::numeric(format!(
            "assumption check failed ({}: {}); rerun with --force to override",
            first.name, first.detail
        )));
    }
    Ok(())
}

fn cmd_validate(common: &CommonOpts) -> Result<(), CliError> {
    let (res, _) = resolve(common)?;
    let report = validate_assumptions(&res.levy, res.state.maturity, res.mu)?;
    let sigma_floor_ok = res.state.check_sigma_floor(&res.levy).is_ok();

    let gamma = res.levy.as_gamma_ou().ok().copied();
    let (feas, constants) = match gamma {
        Some(g) => (
            Some(damping_feasible(res.damping.alpha_damp, &res.state, &g)),
            ModelConstants::derive(&g, &res.state, res.mu).ok(),
        ),
        None => (None, None),
    };

    let format = common.format.unwrap_or(Format::Text);
    if format == Format::Json {
        let doc = serde_json::json!({
            "assumptions": report,
            "sigma_floor_ok": sigma_floor_ok,
            "damping": feas,
            "constants": constants,
            "mu": res.mu,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("serializable")
        );
    } else {
        println!("model: {:?}", res.levy);
        println!(
            "market: S = {}, sigma^2 = {}, t = {}, T = {}, r = {}, q = {}",
            res.state.spot,
            res.state.sigma_sq,
            res.state.t,
            res.state.maturity,
            res.state.r,
            res.state.q
        );
        println!("martingale drift mu = {:.10}", res.mu);
        println!("assumption checks:");
        for item in &report.items {
            println!(
                "  [{}] {} (margin {:+.6}) -- {}",
                if item.pass { "pass" } else { "FAIL" },
                item.name,
                item.margin,
                item.detail
            );
        }
        println!(
            "  [{}] sigma_sq above OU decay floor",
            if sigma_floor_ok { "pass" } else { "FAIL" }
        );
        if let Some(f) = &feas {
            println!("damping alpha = {}:", f.alpha_damp);
            for item in &f.items {
                println!(
                    "  [{}] {} -- {}",
                    if item.pass { "pass" } else { "FAIL" },
                    item.name,
                    item.detail
                );
            }
        }
        if let Some(c) = &constants {
            println!("derived constants:");
            println!("  C_rho     = {:.10}", c.c_rho);
            println!("  alpha     = {:.10}", c.alpha_drift);
            println!("  theta_hat = {:.10}", c.theta_hat);
            println!("  B(T - t)  = {:.10}", c.bcal_tau);
            println!("  C_u       = {:.10}", c.c_u);
            println!("  C_theta   = {:.10}", c.c_theta);
        }
    }

    if report.all_pass() && sigma_floor_ok {
        Ok(())
    } else {
        Err(CliError::numeric("validation failed".into()))
    }
}

fn cmd_hedge(common: &CommonOpts, strike: Option<f64>) -> Result<(), CliError> {
    let (res, cfg) = resolve(common)?;
    let strike = strike
        .or(cfg.strike)
        .ok_or_else(|| CliError::config("hedge requires --K <strike>".into()))?;
    let gamma = gamma_ou(&res.levy)?;
    gate_assumptions(&res)?;

    let quad = QuadratureConfig::default();
    let h = hedge(&res.state, &gamma, res.mu, strike, &res.damping, &quad)?;
    match common.format.unwrap_or(Format::Text) {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&h).expect("serializable")
        ),
        _ => {
            println!("K      = {strike}");
            println!("xi     = {:.10}", h.xi);
            println!("delta  = {:.10}", h.delta);
            println!("price  = {:.10}", h.price);
            println!("I1     = {:.10}", h.i1);
            println!("I2     = {:.10}", h.i2);
            println!(
                "quadrature error estimates: I1 {:.3e}, I2 {:.3e}, price {:.3e} (alpha = {})",
                h.diagnostics.quad_err_i1,
                h.diagnostics.quad_err_i2,
                h.diagnostics.quad_err_price,
                h.diagnostics.alpha_damp
            );
        }
    }
    Ok(())
}

fn write_or_print(out: Option<&Path>, name: Option<&str>, content: &str) -> Result<(), CliError> {
    match (out, name) {
        (Some(path), Some(name)) => {
            // out is a directory for multi-file outputs
            std::fs::create_dir_all(path)
                .map_err(|e| CliError::config(format!("cannot create {}: {e}", path.display())))?;
            let file = path.join(name);
            std::fs::write(&file, content)
                .map_err(|e| CliError::config(format!("cannot write {}: {e}", file.display())))?;
            println!("wrote {}", file.display());
        }
        (Some(path), None) => {
            std::fs::write(path, content)
                .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
            println!("wrote {}", path.display());
        }
        (None, _) => print!("{content}"),
    }
    Ok(())
}

fn render_sweep(table: &SweepTable, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(table).expect("serializable") + "\n",
        _ => table.to_csv(),
    }
}

fn sweep_exit(table: &SweepTable) -> Result<(), CliError> {
    let failed = table.n_failed();
    let total = table.rows.len();
    if failed * 100 > total {
        return Err(CliError::numeric(format!(
            "{failed} of {total} sweep rows failed"
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    common: &CommonOpts,
    mode: &str,
    strike: Option<f64>,
    grid_start: Option<f64>,
    grid_end: Option<f64>,
    grid_step: Option<f64>,
    paper_figures: bool,
) -> Result<(), CliError> {
    let (res, cfg) = resolve(common)?;
    let gamma = gamma_ou(&res.levy)?;
    gate_assumptions(&res)?;
    let quad = QuadratureConfig::default();
    let fft = FftGridConfig::default();
    let format = common.format.unwrap_or(Format::Csv);

    if paper_figures {
        let figures: [(&str, SweepSpec); 6] = [
            ("fig1a_time_K900.csv", SweepSpec::figure_time_grid(900.0)),
            (
                "fig1b_time_K1124.47.csv",
                SweepSpec::figure_time_grid(1124.47),
            ),
            ("fig1c_time_K1300.csv", SweepSpec::figure_time_grid(1300.0)),
            ("fig2a_strike_t0.csv", SweepSpec::figure_strike_grid(0.0)),
            ("fig2b_strike_t0.5.csv", SweepSpec::figure_strike_grid(0.5)),
            ("fig2c_strike_t0.9.csv", SweepSpec::figure_strike_grid(0.9)),
        ];
        let out_dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
        let mut worst: Option<CliError> = None;
        for (name, spec) in figures {
            let table = sweep(&spec, &res.state, &gamma, res.mu, &res.damping, &quad, &fft)?;
            write_or_print(Some(&out_dir), Some(name), &table.to_csv())?;
            if let Err(e) = sweep_exit(&table) {
                worst = Some(e);
            }
        }
        return match worst {
            Some(e) => Err(e),
            None => Ok(()),
        };
    }

    let spec = match mode {
        "time" => {
            let k = strike
                .or(cfg.strike)
                .ok_or_else(|| CliError::config("time sweep requires --K <strike>".into()))?;
            let start = grid_start.unwrap_or(0.0);
            let end = grid_end.unwrap_or(0.98);
            let step = grid_step.unwrap_or(0.02);
            SweepSpec::Time {
                strike: k,
                times: build_grid(start, end, step)?,
            }
        }
        "strike" => {
            let start = grid_start.unwrap_or(200.0);
            let end = grid_end.unwrap_or(2000.0);
            let step = grid_step.unwrap_or(25.0);
            SweepSpec::Strike {
                t: res.state.t,
                strikes: build_grid(start, end, step)?,
            }
        }
        other => {
            return Err(CliError::config(format!(
                "unknown sweep mode {other:?}; expected \"time\" or \"strike\""
            )))
        }
    };

    let table = sweep(&spec, &res.state, &gamma, res.mu, &res.damping, &quad, &fft)?;
    write_or_print(common.out.as_deref(), None, &render_sweep(&table, format))?;
    sweep_exit(&table)
}

fn build_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !start.is_finite() || end < start {
        return Err(CliError::config(format!(
            "bad grid: start {start}, end {end}, step {step}"
        )));
    }
    let n = ((end - start) / step + 0.5).floor() as usize + 1;
    Ok((0..n).map(|i| start + step * i as f64).collect())
}

fn cmd_mc_check(
    common: &CommonOpts,
    paths: Option<usize>,
    seed: Option<u64>,
    strikes: Option<Vec<f64>>,
) -> Result<(), CliError> {
    let (res, cfg) = resolve(common)?;
    let gamma = gamma_ou(&res.levy)?;
    gate_assumptions(&res)?;

    let mc = McConfig {
        n_paths: paths.or(cfg.paths).unwrap_or(200_000),
        seed: seed.or(cfg.seed).unwrap_or(42),
        ..McConfig::default()
    };
    let strikes = strikes.unwrap_or_else(|| vec![900.0, 1124.47, 1300.0]);
    let report = fourier_mc_battery(&res.state, &gamma, res.mu, &strikes, &res.damping, &mc)?;

    match common.format.unwrap_or(Format::Text) {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("serializable")
        ),
        _ => {
            println!(
                "Fourier vs Monte Carlo battery: {} paths, seed {}",
                report.n_paths, report.seed
            );
            for c in &report.checks {
                println!(
                    "  [{}] {:<44} mc {:>14.6} ref {:>14.6} se {:>10.3e} z {:+.3}",
                    if c.pass { "pass" } else { "FAIL" },
                    c.name,
                    c.mc,
                    c.reference,
                    c.std_err,
                    c.z
                );
            }
            if report.low_power {
                println!("  note: standard errors are large; increase --paths for a sharper test");
            }
            println!(
                "max |z| = {:.3} over {} checks",
                report.max_abs_z(),
                report.checks.len()
            );
        }
    }

    if report.all_pass() {
        Ok(())
    } else {
        Err(CliError::numeric(format!(
            "cross-validation failed: max |z| = {:.3}",
            report.max_abs_z()
        )))
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("BNS_LRM_THREADS") {
        if let Ok(n) = threads.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }

    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(common) => cmd_validate(common),
        Command::Hedge { common, strike } => cmd_hedge(common, *strike),
        Command::Sweep {
            common,
            mode,
            strike,
            grid_start,
            grid_end,
            grid_step,
            paper_figures,
        } => cmd_sweep(
            common,
            mode,
            *strike,
            *grid_start,
            *grid_end,
            *grid_step,
            *paper_figures,
        ),
        Command::McCheck {
            common,
            paths,
            seed,
            strikes,
        } => cmd_mc_check(common, *paths, *seed, strikes.clone()),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
