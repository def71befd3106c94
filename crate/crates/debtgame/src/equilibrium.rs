//! Nash equilibrium of the game: regime dispatch, the fixed point of the
//! best-response maps in the intervention regime, limit diagnostics toward
//! the regime boundary, and a simulation-based deviation certificate.
//!
//! The equilibrium ceiling is the scalar root of `Psi(b) = G(a(b), b)` on
//! `(b0, cap)` — the intersection argument behind the existence proof — so
//! a sign-change scan plus bisection inherits the bracketing guarantees.
//! Best-response iteration `a -> a(b(a))` is kept as an independent
//! cross-check only. A final two-dimensional Newton polish in double-double
//! arithmetic drives both residuals to the `1e-9`-scale contract even for
//! discount rates close to the regime boundary, where the ceiling diverges.

use crate::dd::Dd;
use crate::government::{self, GovCeilingValue, GovError, GovNoCeilingSolution};
use crate::legislator::{self, LegCeilingValue, LegError, LegNoCeilingValue};
use crate::model::{classify_regime, ModelParams, Regime, RegimeTag};
use crate::quad::QuadratureSettings;
use crate::sim::{self, PairedEstimate, SimConfig, SimError};
use crate::special::{CostIntegrals, SpecialError};
use rayon::prelude::*;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EqError {
    #[error("legislator discount rate sits exactly on the regime boundary")]
    BoundaryRegime,
    #[error("equilibrium ceiling exceeds the scan cap {cap:e}")]
    CapExceeded { cap: f64 },
    #[error("multiple best-response crossings found at ceilings {0:?}; threshold-class uniqueness is violated numerically")]
    MultipleRoots(Vec<f64>),
    #[error("bracket failure in {stage}: {detail}")]
    BracketFailure { stage: &'static str, detail: String },
    #[error(transparent)]
    Government(#[from] GovError),
    #[error(transparent)]
    Legislator(#[from] LegError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

/// Scan controls for the equilibrium root of `Psi`.
#[derive(Debug, Clone, Copy)]
pub struct NashOptions {
    /// Ceiling scan cap as a multiple of `m`. Near the regime boundary the
    /// equilibrium ceiling diverges; hitting the cap is reported, never
    /// replaced by a capped number.
    pub cap_multiple: f64,
    pub scan_points: usize,
}

impl Default for NashOptions {
    fn default() -> Self {
        NashOptions {
            cap_multiple: 1e6,
            scan_points: 200,
        }
    }
}

/// Threshold-pair equilibrium with value functions and diagnostics.
pub struct CeilingEquilibrium {
    pub a_star: f64,
    pub b_star: f64,
    /// `|F(a*, b*)|` at the internal extended-precision pair.
    pub f_resid: f64,
    /// `|G(a*, b*)|` at the internal extended-precision pair.
    pub g_resid: f64,
    pub b0: f64,
    pub qtilde: f64,
    pub regime: Regime,
    /// `|a(b*) - a*| / max(a*, m)` from an independent re-solve.
    pub cross_a_rel_gap: f64,
    /// `|b(a*) - b*| / b*` from an independent re-solve.
    pub cross_b_rel_gap: f64,
    gov_value: GovCeilingValue,
    leg_value: LegCeilingValue,
}

impl CeilingEquilibrium {
    /// Government value function along the equilibrium.
    pub fn gov_value(&self) -> &GovCeilingValue {
        &self.gov_value
    }

    /// Legislator value function along the equilibrium.
    pub fn leg_value(&self) -> &LegCeilingValue {
        &self.leg_value
    }
}

/// Laissez-faire equilibrium: the government reflects at the closed-form
/// threshold, the legislator never intervenes.
pub struct NoCeilingEquilibrium {
    pub a_bar: f64,
    pub regime: Regime,
    gov_value: GovNoCeilingSolution,
    leg_value: LegNoCeilingValue,
}

impl NoCeilingEquilibrium {
    pub fn gov_value(&self) -> &GovNoCeilingSolution {
        &self.gov_value
    }

    pub fn leg_value(&self) -> &LegNoCeilingValue {
        &self.leg_value
    }
}

pub enum NashOutcome {
    Ceiling(CeilingEquilibrium),
    NoCeiling(NoCeilingEquilibrium),
}

/// Solves for the Nash equilibrium under default scan options.
pub fn solve_nash(
    params: &ModelParams,
    settings: &QuadratureSettings,
) -> Result<NashOutcome, EqError> {
    solve_nash_with(params, settings, &NashOptions::default())
}

pub fn solve_nash_with(
    params: &ModelParams,
    settings: &QuadratureSettings,
    options: &NashOptions,
) -> Result<NashOutcome, EqError> {
    let regime = classify_regime(params);
    match regime.tag {
        RegimeTag::Boundary => Err(EqError::BoundaryRegime),
        RegimeTag::LegislatorAbstains => {
            let gov = government::abar(params);
            let integrals = Arc::new(CostIntegrals::new(*params, *settings));
            let leg = LegNoCeilingValue::new(gov.a_bar, params, integrals)?;
            Ok(NashOutcome::NoCeiling(NoCeilingEquilibrium {
                a_bar: gov.a_bar,
                regime,
                gov_value: gov,
                leg_value: leg,
            }))
        }
        RegimeTag::LegislatorIntervenes => {
            let eq = solve_ceiling(params, settings, options, regime)?;
            Ok(NashOutcome::Ceiling(eq))
        }
    }
}

fn psi(b: f64, params: &ModelParams) -> Result<f64, EqError> {
    let a = government::a_of_b_fast(b, params)?;
    Ok(legislator::g_value(a, b, params)?)
}

fn solve_ceiling(
    params: &ModelParams,
    settings: &QuadratureSettings,
    options: &NashOptions,
    regime: Regime,
) -> Result<CeilingEquilibrium, EqError> {
    let b0 = legislator::b0(params)?;
    let cap = options.cap_multiple * params.m();
    let lo = b0 * (1.0 + 1e-9);
    if !(lo < cap) {
        return Err(EqError::CapExceeded { cap });
    }
    let n = options.scan_points.max(8);
    let log_lo = lo.ln();
    let log_hi = cap.ln();
    let mut prev_b = lo;
    let mut prev_psi = psi(lo, params)?;
    if !(prev_psi > 0.0) {
        return Err(EqError::BracketFailure {
            stage: "psi_scan",
            detail: format!("Psi({lo:e}) = {prev_psi:e} not positive just above b0"),
        });
    }
    let mut brackets = Vec::new();
    for i in 1..n {
        let b = (log_lo + (log_hi - log_lo) * i as f64 / (n - 1) as f64).exp();
        let v = psi(b, params)?;
        if prev_psi > 0.0 && v <= 0.0 || prev_psi <= 0.0 && v > 0.0 {
            brackets.push((prev_b, b));
        }
        prev_b = b;
        prev_psi = v;
    }
    if brackets.is_empty() {
        return Err(EqError::CapExceeded { cap });
    }
    if brackets.len() > 1 {
        let roots = brackets
            .iter()
            .map(|&(l, h)| {
                crate::solve::bisect(|b| psi(b, params).unwrap_or(f64::NAN), l, h, 1e-12)
            })
            .collect();
        return Err(EqError::MultipleRoots(roots));
    }
    let (bl, bh) = brackets[0];
    let b64 = crate::solve::bisect(|b| psi(b, params).unwrap_or(f64::NAN), bl, bh, 1e-14);
    let a64 = government::a_of_b_fast(b64, params)?;

    // Two-dimensional Newton polish of (a, b) on F = G = 0 in double-double
    // arithmetic, using the closed-form partials.
    let gc = government::dd_gov_consts(params);
    let lc = legislator::dd_leg_consts(params);
    let mut a = Dd::from(a64);
    let mut b = Dd::from(b64);
    for _ in 0..4 {
        let f = government::f_dd(a, b, &gc);
        let g = legislator::g_dd(a, b, &lc);
        let fa = government::f_da_dd(a, b, &gc);
        let fb = government::f_db_dd(a, b, &gc);
        let ga = legislator::g_da_dd(a, b, &lc);
        let gb = legislator::g_db_dd(a, b, &lc);
        let det = fa * gb - fb * ga;
        let da = (f * gb - fb * g) / det;
        let db = (fa * g - f * ga) / det;
        a = a - da;
        b = b - db;
    }
    let f_resid = government::f_dd(a, b, &gc).abs().to_f64();
    let g_resid = legislator::g_dd(a, b, &lc).abs().to_f64();
    let a_star = a.to_f64();
    let b_star = b.to_f64();

    // Consistency triangle: independently re-solve each best response.
    let re_a = government::solve_a_of_b(b_star, params)?;
    let cross_a_rel_gap = (re_a.a_of_b - a_star).abs() / a_star.max(params.m());
    let (re_b, _, _, _) = legislator::b_of_a_threshold(a_star, params)?;
    let cross_b_rel_gap = (re_b - b_star).abs() / b_star;

    let integrals = Arc::new(CostIntegrals::new(*params, *settings));
    let gov_value = GovCeilingValue::from_thresholds(a_star, b_star, params);
    let leg_value = LegCeilingValue::from_thresholds(a_star, b_star, params, integrals)?;
    let qtilde = legislator::qtilde(params)?.value;
    Ok(CeilingEquilibrium {
        a_star,
        b_star,
        f_resid,
        g_resid,
        b0,
        qtilde,
        regime,
        cross_a_rel_gap,
        cross_b_rel_gap,
        gov_value,
        leg_value,
    })
}

/// Independent cross-check of the equilibrium: iterates the composed
/// best-response map `a -> a(b(a))` from `a0` until successive iterates
/// agree to `tol`, returning the fixed point and the iteration count.
pub fn best_response_iteration(
    params: &ModelParams,
    a0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, usize), EqError> {
    let mut a = a0;
    for k in 0..max_iter {
        let (b, _, _, _) = legislator::b_of_a_threshold(a, params)?;
        let next = government::solve_a_of_b(b, params)?.a_of_b;
        if (next - a).abs() <= tol * a.abs().max(1e-12) {
            return Ok((next, k + 1));
        }
        a = next;
    }
    Err(EqError::BracketFailure {
        stage: "best_response_iteration",
        detail: format!("no convergence within {max_iter} iterations"),
    })
}

/// One row of the regime-boundary limit table.
#[derive(Debug, Clone)]
pub struct LambdaRow {
    pub lambda: f64,
    pub status: String,
    pub a_star: Option<f64>,
    pub b_star: Option<f64>,
    /// `|a*(lambda) - a_bar|`.
    pub a_gap: Option<f64>,
    pub qtilde: Option<f64>,
    pub f_resid: Option<f64>,
    pub g_resid: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LimitDiagnostic {
    pub a_bar: f64,
    pub rows: Vec<LambdaRow>,
}

/// Evaluates the equilibrium along a grid of legislator discount rates
/// approaching the regime boundary. Rows are independent computations and
/// failures are carried per row in `status`, never dropped.
pub fn lambda_limit_diagnostic(
    params: &ModelParams,
    lambdas: &[f64],
    settings: &QuadratureSettings,
) -> LimitDiagnostic {
    let a_bar = government::abar(params).a_bar;
    let rows: Vec<LambdaRow> = lambdas
        .par_iter()
        .map(|&lambda| {
            let row_params = match params.with_lambda(lambda) {
                Ok(p) => p,
                Err(e) => {
                    return LambdaRow {
                        lambda,
                        status: format!("validation: {e}"),
                        a_star: None,
                        b_star: None,
                        a_gap: None,
                        qtilde: None,
                        f_resid: None,
                        g_resid: None,
                    }
                }
            };
            let qtilde = legislator::qtilde(&row_params).ok().map(|q| q.value);
            match solve_nash(&row_params, settings) {
                Ok(NashOutcome::Ceiling(eq)) => LambdaRow {
                    lambda,
                    status: "ok".into(),
                    a_star: Some(eq.a_star),
                    b_star: Some(eq.b_star),
                    a_gap: Some((eq.a_star - a_bar).abs()),
                    qtilde,
                    f_resid: Some(eq.f_resid),
                    g_resid: Some(eq.g_resid),
                },
                Ok(NashOutcome::NoCeiling(nc)) => LambdaRow {
                    lambda,
                    status: "no_ceiling".into(),
                    a_star: Some(nc.a_bar),
                    b_star: None,
                    a_gap: Some(0.0),
                    qtilde,
                    f_resid: None,
                    g_resid: None,
                },
                Err(EqError::CapExceeded { .. }) => LambdaRow {
                    lambda,
                    status: "b_star_exceeds_cap".into(),
                    a_star: None,
                    b_star: None,
                    a_gap: None,
                    qtilde,
                    f_resid: None,
                    g_resid: None,
                },
                Err(e) => LambdaRow {
                    lambda,
                    status: format!("solver: {e}"),
                    a_star: None,
                    b_star: None,
                    a_gap: None,
                    qtilde,
                    f_resid: None,
                    g_resid: None,
                },
            }
        })
        .collect();
    LimitDiagnostic { a_bar, rows }
}

impl LimitDiagnostic {
    /// Checks the boundary-limit shape: the equilibrium ceiling strictly
    /// increases along the grid (cap rows count as divergence) and the
    /// threshold gap to the no-ceiling solution does not increase.
    pub fn check(&self) -> Result<(), String> {
        let mut prev_b: Option<f64> = None;
        let mut prev_gap: Option<f64> = None;
        for row in &self.rows {
            if row.status == "b_star_exceeds_cap" {
                continue;
            }
            if row.status != "ok" {
                return Err(format!("row lambda={}: {}", row.lambda, row.status));
            }
            let b = row.b_star.expect("ok rows carry b_star");
            if let Some(pb) = prev_b {
                if b <= pb {
                    return Err(format!(
                        "b* not increasing at lambda={}: {b} <= {pb}",
                        row.lambda
                    ));
                }
            }
            prev_b = Some(b);
            let gap = row.a_gap.expect("ok rows carry a_gap");
            if let Some(pg) = prev_gap {
                if gap > pg * (1.0 + 1e-9) {
                    return Err(format!(
                        "|a* - a_bar| not decreasing at lambda={}: {gap:e} > {pg:e}",
                        row.lambda
                    ));
                }
            }
            prev_gap = Some(gap);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    Government,
    Legislator,
}

/// One paired comparison of the deviation certificate.
#[derive(Debug, Clone, Copy)]
pub struct DeviationRow {
    pub player: Player,
    pub epsilon: f64,
    pub base_threshold: f64,
    pub dev_threshold: f64,
    pub estimate: PairedEstimate,
    /// Deviation did not lower the deviating player's cost by more than two
    /// paired standard errors.
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct DeviationReport {
    pub x0: f64,
    pub rows: Vec<DeviationRow>,
}

impl DeviationReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Monte Carlo budget for the deviation certificate.
#[derive(Debug, Clone, Copy)]
pub struct DeviationBudget {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
}

impl Default for DeviationBudget {
    fn default() -> Self {
        DeviationBudget {
            n_paths: 40_000,
            dt: 1e-3,
            seed: 0x5eed_0002,
        }
    }
}

/// Certifies the Nash property at desk scale: perturbing either equilibrium
/// threshold by each relative `epsilon` must not lower the deviating
/// player's simulated cost by more than two paired standard errors, under
/// common random numbers.
///
/// Each player's comparisons share one base run at the horizon set by that
/// player's own discount rate.
pub fn deviation_certificate(
    params: &ModelParams,
    eq: &CeilingEquilibrium,
    epsilons: &[f64],
    budget: &DeviationBudget,
) -> Result<DeviationReport, EqError> {
    let x0 = 0.5 * (eq.a_star + eq.b_star);
    let mut rows = Vec::new();

    let make = |a: f64, b: f64, horizon_rate: f64, tag: &str| -> SimConfig {
        let mut c = SimConfig::new(x0, Some(a), Some(b), params);
        c.n_paths = budget.n_paths;
        c.dt = budget.dt;
        c.seed = budget.seed;
        c.horizon = SimConfig::default_horizon(horizon_rate);
        c.crn_tag = tag.to_string();
        c
    };

    // Government deviations: its own cost discounts at rho.
    let gov_base_cfg = make(eq.a_star, eq.b_star, params.rho(), "deviation-gov");
    let gov_base = sim::simulate_paths(&gov_base_cfg, params)?;
    for &eps in epsilons {
        let a_dev = eq.a_star * (1.0 + eps);
        if !(a_dev > 0.0 && a_dev < eq.b_star) {
            return Err(EqError::BracketFailure {
                stage: "deviation_certificate",
                detail: format!("deviation {eps} pushes a to {a_dev:e}, outside (0, b*)"),
            });
        }
        let dev_cfg = make(a_dev, eq.b_star, params.rho(), "deviation-gov");
        let cmp = sim::crn_compare_with_base(&gov_base, &dev_cfg, params)?;
        rows.push(DeviationRow {
            player: Player::Government,
            epsilon: eps,
            base_threshold: eq.a_star,
            dev_threshold: a_dev,
            estimate: cmp.gov,
            pass: cmp.gov.mean_diff >= -2.0 * cmp.gov.std_error,
        });
    }

    // Legislator deviations: its cost discounts at lambda.
    let leg_base_cfg = make(eq.a_star, eq.b_star, params.lambda(), "deviation-leg");
    let leg_base = sim::simulate_paths(&leg_base_cfg, params)?;
    for &eps in epsilons {
        let b_dev = eq.b_star * (1.0 + eps);
        if !(b_dev > eq.a_star) {
            return Err(EqError::BracketFailure {
                stage: "deviation_certificate",
                detail: format!("deviation {eps} pushes b to {b_dev:e}, below a*"),
            });
        }
        let dev_cfg = make(eq.a_star, b_dev, params.lambda(), "deviation-leg");
        let cmp = sim::crn_compare_with_base(&leg_base, &dev_cfg, params)?;
        rows.push(DeviationRow {
            player: Player::Legislator,
            epsilon: eps,
            base_threshold: eq.b_star,
            dev_threshold: b_dev,
            estimate: cmp.leg,
            pass: cmp.leg.mean_diff >= -2.0 * cmp.leg.std_error,
        });
    }

    Ok(DeviationReport { x0, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::table_params;
    use approx::assert_relative_eq;

    fn settings(p: &ModelParams) -> QuadratureSettings {
        QuadratureSettings::for_gap(p.lambda_gap())
    }

    #[test]
    fn no_ceiling_regime_returns_abar() {
        let p = table_params(0.3);
        match solve_nash(&p, &settings(&p)).unwrap() {
            NashOutcome::NoCeiling(nc) => {
                assert_relative_eq!(nc.a_bar, 0.25584760989829136, max_relative = 1e-13);
                assert_eq!(nc.regime.tag, RegimeTag::LegislatorAbstains);
                // value handles are live
                assert!(nc.gov_value().value(0.5) > 0.0);
                assert!(nc.leg_value().value(0.5).unwrap() > 0.0);
            }
            _ => panic!("expected the no-ceiling outcome"),
        }
    }

    #[test]
    fn boundary_regime_is_an_error() {
        let p = table_params(0.255);
        assert!(matches!(
            solve_nash(&p, &settings(&p)),
            Err(EqError::BoundaryRegime)
        ));
    }

    #[test]
    fn ceiling_equilibrium_reference() {
        let p = table_params(0.1);
        match solve_nash(&p, &settings(&p)).unwrap() {
            NashOutcome::Ceiling(eq) => {
                assert_relative_eq!(eq.a_star, 0.26821825408552186, max_relative = 1e-12);
                assert_relative_eq!(eq.b_star, 0.7137606651230886, max_relative = 1e-12);
                assert!(eq.f_resid <= 1e-9 * government::f_scale(&p));
                assert!(eq.g_resid <= 1e-9 * p.kappa());
                assert!(eq.a_star < eq.b_star);
                assert!(eq.b_star > eq.b0);
                assert!(eq.cross_a_rel_gap <= 1e-8);
                assert!(eq.cross_b_rel_gap <= 1e-8);
                assert_relative_eq!(eq.qtilde, 0.6420098370903831, max_relative = 1e-10);
            }
            _ => panic!("expected a ceiling equilibrium"),
        }
    }

    #[test]
    fn iteration_converges_to_same_point() {
        let p = table_params(0.1);
        let a_bar = government::abar(&p).a_bar;
        let (a_fix, iters) = best_response_iteration(&p, a_bar, 1e-12, 200).unwrap();
        assert!(iters < 60);
        assert!((a_fix - 0.26821825408552186).abs() < 1e-6);
    }

    #[test]
    fn equilibrium_values_satisfy_smooth_fit() {
        let p = table_params(0.1);
        let eq = match solve_nash(&p, &settings(&p)).unwrap() {
            NashOutcome::Ceiling(eq) => eq,
            _ => unreachable!(),
        };
        let gv = eq.gov_value();
        assert_relative_eq!(gv.derivative(eq.a_star * 0.99), p.c2());
        assert!((gv.derivative(eq.b_star * (1.0 - 1e-9)) - p.c1()).abs() < 1e-6);
        let lv = eq.leg_value();
        let h = 1e-6 * eq.a_star;
        let slope_at_a = (lv.value(eq.a_star + h).unwrap() - lv.value(eq.a_star).unwrap()) / h;
        assert!(slope_at_a.abs() < 1e-5);
        // frozen reference values along the equilibrium
        let xmid = 0.5 * (eq.a_star + eq.b_star);
        assert_relative_eq!(gv.value(xmid), 0.4511261858182862, max_relative = 1e-10);
        assert_relative_eq!(
            lv.value(xmid).unwrap(),
            0.07833797774353549,
            max_relative = 1e-7
        );
    }

    #[test]
    fn lambda_rows_and_shape_check() {
        let p = table_params(0.1);
        let grid = [0.1, 0.13, 0.2, 0.25, 0.2549];
        let diag = lambda_limit_diagnostic(&p, &grid, &settings(&p));
        assert!(diag.check().is_ok(), "{:?}", diag.check());
        assert_eq!(diag.rows.len(), 5);
        for row in &diag.rows {
            assert_eq!(row.status, "ok");
            assert!(row.f_resid.unwrap() <= 1e-9);
            assert!(row.g_resid.unwrap() <= 1e-9);
        }
        // reference: b*(0.2549) from exact arithmetic
        assert_relative_eq!(
            diag.rows[4].b_star.unwrap(),
            3.843256677,
            max_relative = 1e-6
        );
    }

    #[test]
    fn cap_hit_is_reported_not_fabricated() {
        let p = table_params(0.1);
        let opts = NashOptions {
            cap_multiple: 1.0, // cap below b0 forces the report
            scan_points: 50,
        };
        assert!(matches!(
            solve_nash_with(&p, &settings(&p), &opts),
            Err(EqError::CapExceeded { .. })
        ));
    }

    #[test]
    fn deviation_certificate_small_budget() {
        let p = table_params(0.1);
        let eq = match solve_nash(&p, &settings(&p)).unwrap() {
            NashOutcome::Ceiling(eq) => eq,
            _ => unreachable!(),
        };
        let budget = DeviationBudget {
            n_paths: 4000,
            dt: 2e-3,
            seed: 99,
        };
        let report = deviation_certificate(&p, &eq, &[-0.05, 0.05], &budget).unwrap();
        assert_eq!(report.rows.len(), 4);
        assert!(report.all_pass(), "{:?}", report.rows);
    }
}
