//! Command-line front end: JSON config parsing, subcommands, comparative-
//! statics sweeps and CSV emission.
//!
//! Exit codes partition the failure classes: `0` success, `1` I/O or parse
//! errors, `2` assumption violations, `3` solver failures, `4` verification
//! failures (a Monte Carlo z-score or deviation check out of bounds).
//!
//! The config is one flat JSON object with the ten parameter keys and
//! optional `quadrature`, `simulation` and `sweep` sub-objects; unknown keys
//! are errors so typos cannot silently change a run.

use crate::equilibrium::{
    self, deviation_certificate, solve_nash, DeviationBudget, EqError, NashOutcome,
};
use crate::government::{self, GovCeilingValue};
use crate::legislator::{self, LegCeilingValue};
use crate::model::{char_roots, classify_regime, DiscountRate, ModelParams, RawParams};
use crate::quad::QuadratureSettings;
use crate::sim::{self, SimConfig};
use crate::special::CostIntegrals;
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub r: f64,
    pub g: f64,
    pub sigma: f64,
    pub rho: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub m: f64,
    pub c1: f64,
    pub c2: f64,
    #[serde(default)]
    pub quadrature: Option<QuadOverrides>,
    #[serde(default)]
    pub simulation: Option<SimOverrides>,
    #[serde(default)]
    pub sweep: Option<SweepOverrides>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadOverrides {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub t_max: Option<f64>,
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimOverrides {
    pub x0: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub n_paths: Option<usize>,
    pub seed: Option<u64>,
    pub antithetic: Option<bool>,
    pub crn_tag: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOverrides {
    pub vary: Option<String>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub n: Option<usize>,
    pub spacing: Option<String>,
    pub values: Option<Vec<f64>>,
    pub outputs: Option<Vec<String>>,
}

impl ConfigFile {
    pub fn raw_params(&self) -> RawParams {
        RawParams {
            r: self.r,
            g: self.g,
            sigma: self.sigma,
            rho: self.rho,
            lambda: self.lambda,
            alpha: self.alpha,
            kappa: self.kappa,
            m: self.m,
            c1: self.c1,
            c2: self.c2,
        }
    }

    pub fn quad_settings(&self, params: &ModelParams) -> QuadratureSettings {
        let mut s = QuadratureSettings::for_gap(params.lambda_gap());
        if let Some(q) = &self.quadrature {
            if let Some(v) = q.abs_tol {
                s.abs_tol = v;
            }
            if let Some(v) = q.rel_tol {
                s.rel_tol = v;
                s.t_max = 50f64.max(-v.ln() / params.lambda_gap());
            }
            if let Some(v) = q.t_max {
                s.t_max = v;
            }
            if let Some(v) = q.max_subdivisions {
                s.max_subdivisions = v;
            }
        }
        s
    }
}

pub fn load_config(path: &Path) -> Result<ConfigFile, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

/// Full-round-trip scientific formatting; empty for missing values.
fn sci(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:e}"),
        None => String::new(),
    }
}

#[derive(Parser)]
#[command(
    name = "debtgame",
    about = "Debt-ceiling game: best responses, Nash equilibria, Monte Carlo verification",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the config against the standing assumptions and report the
    /// intervention regime
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the characteristic roots for both discount rates
    Roots {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve for the Nash equilibrium and print one CSV row
    Nash {
        #[arg(long)]
        config: PathBuf,
    },
    /// Comparative-statics sweep over one parameter, written as CSV
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        vary: Option<String>,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        /// linear | log | geometric-to-boundary
        #[arg(long)]
        spacing: Option<String>,
    },
    /// Verify the closed-form values against Monte Carlo estimates
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Nash deviation certificate under common random numbers
    Deviation {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
    },
}

/// Entry point used by the binary; parses real process arguments.
pub fn run() -> i32 {
    let cli = Cli::parse();
    dispatch(cli)
}

/// Entry point for tests: parse from an explicit argument list.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => dispatch(cli),
        Err(e) => {
            eprintln!("{e}");
            EXIT_IO
        }
    }
}

fn dispatch(cli: Cli) -> i32 {
    match cli.command {
        Command::Check { config } => cmd_check(&config),
        Command::Roots { config } => cmd_roots(&config),
        Command::Nash { config } => cmd_nash(&config),
        Command::Sweep {
            config,
            out,
            vary,
            lo,
            hi,
            n,
            spacing,
        } => cmd_sweep(&config, out.as_deref(), vary, lo, hi, n, spacing),
        Command::Simulate {
            config,
            seed,
            paths,
            dt,
        } => cmd_simulate(&config, seed, paths, dt),
        Command::Deviation {
            config,
            seed,
            paths,
            dt,
        } => cmd_deviation(&config, seed, paths, dt),
    }
}

fn load_and_validate(path: &Path) -> Result<(ConfigFile, ModelParams), i32> {
    let cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return Err(EXIT_IO);
        }
    };
    match ModelParams::validate(cfg.raw_params()) {
        Ok(p) => Ok((cfg, p)),
        Err(report) => {
            for err in &report.0 {
                eprintln!("{err}");
            }
            Err(EXIT_VALIDATION)
        }
    }
}

pub fn cmd_check(path: &Path) -> i32 {
    let cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_IO;
        }
    };
    match ModelParams::validate(cfg.raw_params()) {
        Ok(p) => {
            println!("parameters: valid");
            let regime = classify_regime(&p);
            println!(
                "regime: {:?} (margin {:e}, boundary lambda {:e})",
                regime.tag,
                regime.margin,
                p.regime_boundary()
            );
            EXIT_OK
        }
        Err(report) => {
            println!("parameters: invalid");
            for err in &report.0 {
                println!("  {err}");
            }
            EXIT_VALIDATION
        }
    }
}

pub fn cmd_roots(path: &Path) -> i32 {
    let (_, p) = match load_and_validate(path) {
        Ok(v) => v,
        Err(code) => return code,
    };
    println!("role,discount,pos,neg,residual_pos,residual_neg");
    for (role, rate) in [
        ("government", DiscountRate::Government),
        ("legislator", DiscountRate::Legislator),
    ] {
        let rp = char_roots(&p, rate);
        let resid =
            |x: f64| 0.5 * p.sigma() * p.sigma() * x * (x - 1.0) + p.net_drift() * x - rp.discount;
        println!(
            "{role},{:e},{:e},{:e},{:e},{:e}",
            rp.discount,
            rp.pos,
            rp.neg,
            resid(rp.pos),
            resid(rp.neg)
        );
    }
    EXIT_OK
}

pub fn cmd_nash(path: &Path) -> i32 {
    let (cfg, p) = match load_and_validate(path) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let settings = cfg.quad_settings(&p);
    println!("tag,a_star,b_star,F_resid,G_resid,a_bar,b0,qtilde");
    let a_bar = government::abar(&p).a_bar;
    match solve_nash(&p, &settings) {
        Ok(NashOutcome::Ceiling(eq)) => {
            println!(
                "Ceiling,{},{},{},{},{},{},{}",
                sci(Some(eq.a_star)),
                sci(Some(eq.b_star)),
                sci(Some(eq.f_resid)),
                sci(Some(eq.g_resid)),
                sci(Some(a_bar)),
                sci(Some(eq.b0)),
                sci(Some(eq.qtilde))
            );
            EXIT_OK
        }
        Ok(NashOutcome::NoCeiling(nc)) => {
            println!("NoCeiling,,,,,{},,", sci(Some(nc.a_bar)));
            EXIT_OK
        }
        Err(e) => {
            eprintln!("equilibrium solver failed: {e}");
            EXIT_SOLVER
        }
    }
}

/// One comparative-statics grid point.
struct SweepRow {
    value: f64,
    a_star: Option<f64>,
    b_star: Option<f64>,
    a_bar: Option<f64>,
    b0: Option<f64>,
    qtilde: Option<f64>,
    f_resid: Option<f64>,
    g_resid: Option<f64>,
    status: String,
}

fn set_param(raw: &mut RawParams, name: &str, value: f64) -> Result<(), String> {
    match name {
        "r" => raw.r = value,
        "g" => raw.g = value,
        "sigma" => raw.sigma = value,
        "rho" => raw.rho = value,
        "lambda" => raw.lambda = value,
        "alpha" => raw.alpha = value,
        "kappa" => raw.kappa = value,
        "m" => raw.m = value,
        "c1" => raw.c1 = value,
        "c2" => raw.c2 = value,
        other => return Err(format!("unknown parameter to vary: {other}")),
    }
    Ok(())
}

/// Builds the sweep grid from the spec: explicit values, or `(lo, hi, n)`
/// with linear, log, or geometric-to-boundary spacing (the latter only for
/// `lambda`, approaching `r - g + alpha/kappa` from below).
fn sweep_grid(vary: &str, spec: &SweepOverrides, base: &ModelParams) -> Result<Vec<f64>, String> {
    if let Some(values) = &spec.values {
        if values.is_empty() {
            return Err("sweep values list is empty".into());
        }
        return Ok(values.clone());
    }
    let (lo, hi, n) = match (spec.lo, spec.hi, spec.n) {
        (Some(lo), Some(hi), Some(n)) if n >= 2 => (lo, hi, n),
        _ => return Err("sweep requires values or lo/hi/n with n >= 2".into()),
    };
    let spacing = spec.spacing.as_deref().unwrap_or("linear");
    match spacing {
        "linear" => Ok((0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()),
        "log" => {
            if !(lo > 0.0 && hi > 0.0) {
                return Err("log spacing requires positive endpoints".into());
            }
            let (llo, lhi) = (lo.ln(), hi.ln());
            Ok((0..n)
                .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
                .collect())
        }
        "geometric-to-boundary" => {
            if vary != "lambda" {
                return Err("geometric-to-boundary spacing applies only to lambda".into());
            }
            let boundary = base.regime_boundary();
            if !(lo < hi && hi < boundary) {
                return Err(format!(
                    "geometric-to-boundary requires lo < hi < boundary ({boundary})"
                ));
            }
            let d0 = boundary - lo;
            let d1 = boundary - hi;
            let ratio = (d1 / d0).powf(1.0 / (n - 1) as f64);
            Ok((0..n)
                .map(|i| boundary - d0 * ratio.powi(i as i32))
                .collect())
        }
        other => Err(format!("unknown spacing: {other}")),
    }
}

fn sweep_row(vary: &str, value: f64, base: &ConfigFile) -> SweepRow {
    let mut raw = base.raw_params();
    if let Err(e) = set_param(&mut raw, vary, value) {
        return SweepRow {
            value,
            a_star: None,
            b_star: None,
            a_bar: None,
            b0: None,
            qtilde: None,
            f_resid: None,
            g_resid: None,
            status: e,
        };
    }
    let params = match ModelParams::validate(raw) {
        Ok(p) => p,
        Err(report) => {
            return SweepRow {
                value,
                a_star: None,
                b_star: None,
                a_bar: None,
                b0: None,
                qtilde: None,
                f_resid: None,
                g_resid: None,
                status: format!("validation: {report}"),
            }
        }
    };
    let settings = base.quad_settings(&params);
    let a_bar = Some(government::abar(&params).a_bar);
    let b0 = legislator::b0(&params).ok();
    let qtilde = legislator::qtilde(&params).ok().map(|q| q.value);
    match solve_nash(&params, &settings) {
        Ok(NashOutcome::Ceiling(eq)) => SweepRow {
            value,
            a_star: Some(eq.a_star),
            b_star: Some(eq.b_star),
            a_bar,
            b0,
            qtilde,
            f_resid: Some(eq.f_resid),
            g_resid: Some(eq.g_resid),
            status: "ok".into(),
        },
        Ok(NashOutcome::NoCeiling(_)) => SweepRow {
            value,
            a_star: None,
            b_star: None,
            a_bar,
            b0,
            qtilde,
            f_resid: None,
            g_resid: None,
            status: "no_ceiling".into(),
        },
        Err(EqError::CapExceeded { .. }) => SweepRow {
            value,
            a_star: None,
            b_star: None,
            a_bar,
            b0,
            qtilde,
            f_resid: None,
            g_resid: None,
            status: "b_star_exceeds_cap".into(),
        },
        Err(e) => SweepRow {
            value,
            a_star: None,
            b_star: None,
            a_bar,
            b0,
            qtilde,
            f_resid: None,
            g_resid: None,
            status: format!("solver: {e}"),
        },
    }
}

const ALL_OUTPUTS: [&str; 6] = ["a_star", "b_star", "a_bar", "b0", "qtilde", "residuals"];

/// Renders the sweep CSV (header, one row per grid value in grid order,
/// trailing newline). `outputs` restricts which value columns are populated;
/// the schema itself is fixed.
fn render_sweep_csv(vary: &str, rows: &[SweepRow], outputs: &[String]) -> String {
    let want = |name: &str| outputs.iter().any(|o| o == name);
    let mut out = String::new();
    out.push_str(&format!(
        "{vary},a_star,b_star,a_bar,b0,qtilde,F_resid,G_resid,status\n"
    ));
    for row in rows {
        let cell = |on: bool, v: Option<f64>| if on { sci(v) } else { String::new() };
        out.push_str(&format!(
            "{:e},{},{},{},{},{},{},{},{}\n",
            row.value,
            cell(want("a_star"), row.a_star),
            cell(want("b_star"), row.b_star),
            cell(want("a_bar"), row.a_bar),
            cell(want("b0"), row.b0),
            cell(want("qtilde"), row.qtilde),
            cell(want("residuals"), row.f_resid),
            cell(want("residuals"), row.g_resid),
            row.status
        ));
    }
    out
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep(
    path: &Path,
    out: Option<&Path>,
    vary: Option<String>,
    lo: Option<f64>,
    hi: Option<f64>,
    n: Option<usize>,
    spacing: Option<String>,
) -> i32 {
    let (cfg, p) = match load_and_validate(path) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let mut spec = cfg.sweep.clone().unwrap_or_default();
    if vary.is_some() {
        spec.vary = vary;
    }
    if lo.is_some() {
        spec.lo = lo;
        spec.values = None;
    }
    if hi.is_some() {
        spec.hi = hi;
        spec.values = None;
    }
    if n.is_some() {
        spec.n = n;
        spec.values = None;
    }
    if spacing.is_some() {
        spec.spacing = spacing;
    }
    let vary = match &spec.vary {
        Some(v) => v.clone(),
        None => {
            eprintln!("sweep requires --vary or a sweep.vary config key");
            return EXIT_IO;
        }
    };
    let grid = match sweep_grid(&vary, &spec, &p) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_IO;
        }
    };
    let outputs: Vec<String> = spec
        .outputs
        .clone()
        .unwrap_or_else(|| ALL_OUTPUTS.iter().map(|s| s.to_string()).collect());
    // rows computed concurrently, emitted in grid order
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&v| sweep_row(&vary, v, &cfg))
        .collect();
    let csv = render_sweep_csv(&vary, &rows, &outputs);
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, csv) {
                eprintln!("cannot write {}: {e}", path.display());
                return EXIT_IO;
            }
            EXIT_OK
        }
        None => {
            print!("{csv}");
            let _ = std::io::stdout().flush();
            EXIT_OK
        }
    }
}

struct SimRow {
    player: &'static str,
    x0: f64,
    analytic: f64,
    mc: sim::SimEstimate,
}

impl SimRow {
    fn z(&self) -> f64 {
        (self.mc.mean - self.analytic) / self.mc.std_error
    }
}

pub fn cmd_simulate(path: &Path, seed: Option<u64>, paths: Option<usize>, dt: Option<f64>) -> i32 {
    let (cfg, p) = match load_and_validate(path) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let settings = cfg.quad_settings(&p);
    let overrides = cfg.simulation.clone().unwrap_or_default();
    let integrals = Arc::new(CostIntegrals::new(p, settings));

    // Resolve thresholds and the analytic evaluators: explicit thresholds
    // verify the policy values, otherwise the equilibrium values.
    enum Analytic {
        Ceiling(GovCeilingValue, LegCeilingValue),
        NoCeiling(
            government::GovNoCeilingSolution,
            legislator::LegNoCeilingValue,
        ),
    }
    let (a, b, x0_default, analytic) = match (overrides.a, overrides.b) {
        (Some(a), Some(b)) => {
            let gov = match GovCeilingValue::from_policy(a, b, &p) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("invalid explicit thresholds: {e}");
                    return EXIT_SOLVER;
                }
            };
            let leg = match LegCeilingValue::from_policy(a, b, &p, integrals.clone()) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("invalid explicit thresholds: {e}");
                    return EXIT_SOLVER;
                }
            };
            (Some(a), Some(b), 0.5 * (a + b), Analytic::Ceiling(gov, leg))
        }
        (None, None) => match solve_nash(&p, &settings) {
            Ok(NashOutcome::Ceiling(eq)) => (
                Some(eq.a_star),
                Some(eq.b_star),
                0.5 * (eq.a_star + eq.b_star),
                Analytic::Ceiling(*eq.gov_value(), eq.leg_value().clone()),
            ),
            Ok(NashOutcome::NoCeiling(nc)) => (
                Some(nc.a_bar),
                None,
                nc.a_bar.max(p.m()),
                Analytic::NoCeiling(*nc.gov_value(), nc.leg_value().clone()),
            ),
            Err(e) => {
                eprintln!("equilibrium solver failed: {e}");
                return EXIT_SOLVER;
            }
        },
        _ => {
            eprintln!("explicit thresholds require both a and b (or neither)");
            return EXIT_SOLVER;
        }
    };

    let mut sim_cfg = SimConfig::new(overrides.x0.unwrap_or(x0_default), a, b, &p);
    if let Some(v) = overrides.dt {
        sim_cfg.dt = v;
    }
    if let Some(v) = overrides.horizon {
        sim_cfg.horizon = v;
    }
    if let Some(v) = overrides.n_paths {
        sim_cfg.n_paths = v;
    }
    if let Some(v) = overrides.seed {
        sim_cfg.seed = v;
    }
    if let Some(v) = overrides.antithetic {
        sim_cfg.antithetic = v;
    }
    if let Some(v) = overrides.crn_tag {
        sim_cfg.crn_tag = v;
    }
    if let Some(v) = seed {
        sim_cfg.seed = v;
    }
    if let Some(v) = paths {
        sim_cfg.n_paths = v;
    }
    if let Some(v) = dt {
        sim_cfg.dt = v;
    }

    let x0 = sim_cfg.x0;
    let (analytic_gov, analytic_leg) = match &analytic {
        Analytic::Ceiling(gov, leg) => (
            gov.value(x0),
            match leg.value(x0) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("quadrature failed: {e}");
                    return EXIT_SOLVER;
                }
            },
        ),
        Analytic::NoCeiling(gov, leg) => (
            gov.value(x0),
            match leg.value(x0) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("quadrature failed: {e}");
                    return EXIT_SOLVER;
                }
            },
        ),
    };

    let (gov_est, leg_est) = match sim::simulate_cost_pair(&sim_cfg, &p) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("simulation failed: {e}");
            return EXIT_SOLVER;
        }
    };
    let rows = [
        SimRow {
            player: "government",
            x0,
            analytic: analytic_gov,
            mc: gov_est,
        },
        SimRow {
            player: "legislator",
            x0,
            analytic: analytic_leg,
            mc: leg_est,
        },
    ];
    println!("player,x0,analytic,mc_mean,mc_se,z,n_paths,dt,horizon,tail_bound");
    let mut worst = 0.0f64;
    for row in &rows {
        let z = row.z();
        worst = worst.max(z.abs());
        println!(
            "{},{:e},{:e},{:e},{:e},{:e},{},{:e},{:e},{:e}",
            row.player,
            row.x0,
            row.analytic,
            row.mc.mean,
            row.mc.std_error,
            z,
            row.mc.n_paths,
            row.mc.dt,
            row.mc.horizon,
            row.mc.tail_bound
        );
    }
    if worst > 4.0 {
        eprintln!("verification failed: |z| = {worst:.2} > 4");
        EXIT_VERIFICATION
    } else {
        EXIT_OK
    }
}

pub fn cmd_deviation(path: &Path, seed: Option<u64>, paths: Option<usize>, dt: Option<f64>) -> i32 {
    let (cfg, p) = match load_and_validate(path) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let settings = cfg.quad_settings(&p);
    let eq = match solve_nash(&p, &settings) {
        Ok(NashOutcome::Ceiling(eq)) => eq,
        Ok(NashOutcome::NoCeiling(_)) => {
            eprintln!("deviation certificate requires a ceiling equilibrium; the laissez-faire regime has no ceiling to perturb");
            return EXIT_SOLVER;
        }
        Err(e) => {
            eprintln!("equilibrium solver failed: {e}");
            return EXIT_SOLVER;
        }
    };
    let mut budget = DeviationBudget::default();
    let overrides = cfg.simulation.clone().unwrap_or_default();
    if let Some(v) = overrides.n_paths {
        budget.n_paths = v;
    }
    if let Some(v) = overrides.dt {
        budget.dt = v;
    }
    if let Some(v) = overrides.seed {
        budget.seed = v;
    }
    if let Some(v) = paths {
        budget.n_paths = v;
    }
    if let Some(v) = dt {
        budget.dt = v;
    }
    if let Some(v) = seed {
        budget.seed = v;
    }
    let report = match deviation_certificate(&p, &eq, &[-0.10, -0.05, 0.05, 0.10], &budget) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("deviation certificate failed: {e}");
            return EXIT_SOLVER;
        }
    };
    println!("player,epsilon,base_threshold,dev_threshold,mean_diff,se_paired,pass");
    for row in &report.rows {
        println!(
            "{},{:e},{:e},{:e},{:e},{:e},{}",
            match row.player {
                equilibrium::Player::Government => "government",
                equilibrium::Player::Legislator => "legislator",
            },
            row.epsilon,
            row.base_threshold,
            row.dev_threshold,
            row.estimate.mean_diff,
            row.estimate.std_error,
            row.pass
        );
    }
    if report.all_pass() {
        EXIT_OK
    } else {
        eprintln!("verification failed: a deviation lowered the deviating player's cost");
        EXIT_VERIFICATION
    }
}
