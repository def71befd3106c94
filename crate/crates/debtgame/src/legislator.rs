//! Legislator best responses: the no-intervention value, and the map
//! `a -> b(a)` with the ceiling value `U2(.; a)`.
//!
//! The optimal ceiling against an issuance threshold `a` is the unique root
//! beyond `max(a, m)` of the smooth-fit residual `G(a, .)`, which equals
//! `kappa` on the diagonal, rises until `max(a, m)` and then decreases to
//! `-inf` exactly when the intervention regime holds. As with the
//! government's residual, a double-double Newton polish follows the f64
//! bisection so the reported residual meets the `1e-12 kappa` contract even
//! where the mixed power terms cancel to ten figures.

use crate::dd::Dd;
use crate::model::{
    char_roots, char_roots_dd, classify_regime, DiscountRate, ModelParams, RegimeTag, RootPair,
};
use crate::solve;
use crate::special::{CostIntegrals, SpecialError};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LegError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("bracket failure in {stage}: {detail}")]
    BracketFailure { stage: &'static str, detail: String },
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Smooth-fit residual `G(a, b)` whose root in `b` is the legislator's best
/// response to the issuance threshold `a`. Defined for any validated
/// parameters; it crosses zero only in the intervention regime.
///
/// Indicator conventions at ties: the ceiling comparison uses `b >= m`, the
/// diagonal-side comparison uses `a >= m`, and the mixed band term requires
/// strictly `b > m > a`.
pub fn g_value(a: f64, b: f64, params: &ModelParams) -> Result<f64, LegError> {
    if !(a > 0.0 && a < b) {
        return Err(LegError::Domain(format!(
            "G requires 0 < a < b, got a={a}, b={b}"
        )));
    }
    let theta = char_roots(params, DiscountRate::Legislator);
    Ok(g_raw(a, b, &theta, params))
}

fn g_raw(a: f64, b: f64, theta: &RootPair, params: &ModelParams) -> f64 {
    let (t1, t2) = (theta.pos, theta.neg);
    let gap = params.lambda_gap();
    let spread = t1 - t2;
    let m = params.m();
    let alpha = params.alpha();
    let ratio = b / a;
    let first_coef = params.kappa() / spread - if b >= m { alpha / (spread * gap) } else { 0.0 };
    let mut g =
        ((t1 - 1.0) * ratio.powf(1.0 - t2) + (1.0 - t2) * ratio.powf(1.0 - t1)) * first_coef;
    if b > m && m > a {
        let mr = m / a;
        g += alpha / (spread * gap)
            * ((1.0 - t2) * mr.powf(1.0 - t1) + (t1 - 1.0) * mr.powf(1.0 - t2));
    }
    if a >= m {
        g += alpha / gap;
    }
    g
}

/// Closed-form `dG/db`, negative beyond `max(a, m)` in the intervention
/// regime.
pub fn g_db(a: f64, b: f64, params: &ModelParams) -> Result<f64, LegError> {
    if !(a > 0.0 && a < b) {
        return Err(LegError::Domain(format!(
            "dG/db requires 0 < a < b, got a={a}, b={b}"
        )));
    }
    let theta = char_roots(params, DiscountRate::Legislator);
    let (t1, t2) = (theta.pos, theta.neg);
    let gap = params.lambda_gap();
    let ratio = b / a;
    let jump = params.kappa() * gap - if b > params.m() { params.alpha() } else { 0.0 };
    Ok(
        (ratio.powf(1.0 - t2) - ratio.powf(1.0 - t1)) * (t1 - 1.0) * (1.0 - t2)
            / ((t1 - t2) * gap * b)
            * jump,
    )
}

/// Closed-form `dG/da` (interior, away from the indicator boundaries).
pub fn g_da(a: f64, b: f64, params: &ModelParams) -> Result<f64, LegError> {
    if !(a > 0.0 && a < b) {
        return Err(LegError::Domain(format!(
            "dG/da requires 0 < a < b, got a={a}, b={b}"
        )));
    }
    let theta = char_roots(params, DiscountRate::Legislator);
    let (t1, t2) = (theta.pos, theta.neg);
    let gap = params.lambda_gap();
    let spread = t1 - t2;
    let m = params.m();
    let alpha = params.alpha();
    let ratio = b / a;
    let first_coef = params.kappa() / spread - if b >= m { alpha / (spread * gap) } else { 0.0 };
    let mut d =
        (t1 - 1.0) * (1.0 - t2) / a * (ratio.powf(1.0 - t1) - ratio.powf(1.0 - t2)) * first_coef;
    if b > m && m > a {
        let mr = m / a;
        d += alpha * (t1 - 1.0) * (1.0 - t2) / (spread * gap * a)
            * (mr.powf(1.0 - t1) - mr.powf(1.0 - t2));
    }
    Ok(d)
}

pub(crate) struct DdLegConsts {
    pub t1: Dd,
    pub t2: Dd,
    pub gap: Dd,
    pub alpha: Dd,
    pub kappa: Dd,
    pub m: Dd,
}

pub(crate) fn dd_leg_consts(params: &ModelParams) -> DdLegConsts {
    let (t1, t2) = char_roots_dd(params, DiscountRate::Legislator);
    DdLegConsts {
        t1,
        t2,
        gap: Dd::from(params.lambda()) - Dd::from(params.net_drift()),
        alpha: Dd::from(params.alpha()),
        kappa: Dd::from(params.kappa()),
        m: Dd::from(params.m()),
    }
}

pub(crate) fn g_dd(a: Dd, b: Dd, c: &DdLegConsts) -> Dd {
    let one = Dd::ONE;
    let spread = c.t1 - c.t2;
    let l = (b / a).ln();
    let pw1 = ((one - c.t2) * l).exp();
    let pw2 = ((one - c.t1) * l).exp();
    let mut first_coef = c.kappa / spread;
    if b.hi >= c.m.hi {
        first_coef = first_coef - c.alpha / (spread * c.gap);
    }
    let mut g = ((c.t1 - one) * pw1 + (one - c.t2) * pw2) * first_coef;
    if b.hi > c.m.hi && c.m.hi > a.hi {
        let lm = (c.m / a).ln();
        let mw1 = ((one - c.t1) * lm).exp();
        let mw2 = ((one - c.t2) * lm).exp();
        g = g + c.alpha / (spread * c.gap) * ((one - c.t2) * mw1 + (c.t1 - one) * mw2);
    }
    if a.hi >= c.m.hi {
        g = g + c.alpha / c.gap;
    }
    g
}

pub(crate) fn g_db_dd(a: Dd, b: Dd, c: &DdLegConsts) -> Dd {
    let one = Dd::ONE;
    let l = (b / a).ln();
    let pw1 = ((one - c.t2) * l).exp();
    let pw2 = ((one - c.t1) * l).exp();
    let mut jump = c.kappa * c.gap;
    if b.hi > c.m.hi {
        jump = jump - c.alpha;
    }
    (pw1 - pw2) * (c.t1 - one) * (one - c.t2) / ((c.t1 - c.t2) * c.gap * b) * jump
}

pub(crate) fn g_da_dd(a: Dd, b: Dd, c: &DdLegConsts) -> Dd {
    let one = Dd::ONE;
    let spread = c.t1 - c.t2;
    let l = (b / a).ln();
    let pw1 = ((one - c.t2) * l).exp();
    let pw2 = ((one - c.t1) * l).exp();
    let mut first_coef = c.kappa / spread;
    if b.hi >= c.m.hi {
        first_coef = first_coef - c.alpha / (spread * c.gap);
    }
    let mut d = (c.t1 - one) * (one - c.t2) / a * (pw2 - pw1) * first_coef;
    if b.hi > c.m.hi && c.m.hi > a.hi {
        let lm = (c.m / a).ln();
        let mw1 = ((one - c.t1) * lm).exp();
        let mw2 = ((one - c.t2) * lm).exp();
        d = d + c.alpha * (c.t1 - one) * (one - c.t2) / (spread * c.gap * a) * (mw1 - mw2);
    }
    d
}

/// Lower bound `b0 = (alpha / (alpha - kappa (lambda - (r-g))))^{1/(1-neg)} m`
/// for every best-response ceiling; exceeds `m` in the intervention regime.
pub fn b0(params: &ModelParams) -> Result<f64, LegError> {
    let denom = params.alpha() - params.kappa() * params.lambda_gap();
    if !(denom > 0.0) {
        return Err(LegError::Domain(format!(
            "b0 requires alpha > kappa (lambda - (r-g)); margin {denom:e}"
        )));
    }
    let theta = char_roots(params, DiscountRate::Legislator);
    Ok((params.alpha() / denom).powf(1.0 / (1.0 - theta.neg)) * params.m())
}

/// Slope reciprocal of the linear branch of the best-response map: for
/// `a > m` the optimal ceiling is `b(a) = a / qtilde`.
#[derive(Debug, Clone, Copy)]
pub struct QTilde {
    pub value: f64,
    pub residual: f64,
}

fn qtilde_eq(q: f64, t1: f64, t2: f64, coef: f64, alpha: f64) -> f64 {
    (1.0 - t2) * coef * q.powf(t1 - 1.0) + (t1 - 1.0) * coef * q.powf(t2 - 1.0) + alpha * (t1 - t2)
}

/// Solves the scalar equation defining `qtilde in (0, 1)`; its left side is
/// strictly increasing from `-inf` to `(pos-neg) kappa (lambda-(r-g)) > 0`.
pub fn qtilde(params: &ModelParams) -> Result<QTilde, LegError> {
    if classify_regime(params).tag != RegimeTag::LegislatorIntervenes {
        return Err(LegError::Domain(
            "qtilde is defined only in the intervention regime".into(),
        ));
    }
    let theta = char_roots(params, DiscountRate::Legislator);
    let (t1, t2) = (theta.pos, theta.neg);
    let coef = params.kappa() * params.lambda_gap() - params.alpha();
    let alpha = params.alpha();
    let w = |q: f64| qtilde_eq(q, t1, t2, coef, alpha);
    let lo = 1e-300f64.max(f64::MIN_POSITIVE);
    if !(w(1.0) > 0.0) {
        return Err(LegError::BracketFailure {
            stage: "qtilde",
            detail: "equation not positive at q = 1".into(),
        });
    }
    // w(q) -> -inf as q -> 0 since coef < 0 and q^{neg-1} blows up.
    let mut q_lo = lo;
    if w(q_lo) >= 0.0 {
        return Err(LegError::BracketFailure {
            stage: "qtilde",
            detail: "equation not negative near q = 0".into(),
        });
    }
    let q_hi = 1.0;
    // shrink toward the root region before bisection to avoid denormal noise
    while w(0.5 * (q_lo + q_hi)) < 0.0 {
        q_lo = 0.5 * (q_lo + q_hi);
        if q_hi - q_lo < 1e-12 {
            break;
        }
    }
    let value = solve::bisect(w, q_lo, q_hi, 1e-16);
    // Newton polish against the closed-form derivative
    let dw = |q: f64| (t1 - 1.0) * (1.0 - t2) * coef * (q.powf(t1 - 2.0) - q.powf(t2 - 2.0));
    let value = value - w(value) / dw(value);
    Ok(QTilde {
        value,
        residual: w(value).abs(),
    })
}

/// Best response of the legislator to an issuance threshold `a`, with
/// solver diagnostics and the ceiling-value coefficients.
#[derive(Debug, Clone, Copy)]
pub struct LegisBestResponse {
    pub a: f64,
    pub b_of_a: f64,
    /// `|G|` at the internal extended-precision root.
    pub residual: f64,
    /// Sign diagnostic: `dG/db` at the root, negative per uniqueness.
    pub dg_db: f64,
    pub b0: f64,
    pub d3: f64,
    pub d4: f64,
}

/// Threshold-only best response: `(b(a), |G| residual, dG/db, b0)` without
/// the ceiling-value coefficients, so sweeps and fixed-point iteration skip
/// the quadrature.
pub(crate) fn b_of_a_threshold(
    a: f64,
    params: &ModelParams,
) -> Result<(f64, f64, f64, f64), LegError> {
    if !(a > 0.0) {
        return Err(LegError::Domain(format!(
            "threshold must be positive, got {a}"
        )));
    }
    if classify_regime(params).tag != RegimeTag::LegislatorIntervenes {
        return Err(LegError::Domain(
            "best-response ceiling exists only in the intervention regime".into(),
        ));
    }
    let b0v = b0(params)?;
    let theta = char_roots(params, DiscountRate::Legislator);
    let g = |b: f64| g_raw(a, b, &theta, params);
    let lo = (a.max(params.m()) * (1.0 + 1e-9)).max(b0v * (1.0 - 1e-12));
    if !(g(lo) > 0.0) {
        return Err(LegError::BracketFailure {
            stage: "solve_b_of_a",
            detail: format!("G not positive at bracket start {lo:e}"),
        });
    }
    let cap = 1e8 * params.m();
    let hi = solve::grow_bracket(g, lo, cap).ok_or_else(|| LegError::BracketFailure {
        stage: "solve_b_of_a",
        detail: format!("G never crossed zero below the {cap:e} cap"),
    })?;
    let b64 = solve::bisect(g, hi * 0.5, hi, 1e-15);

    let consts = dd_leg_consts(params);
    let a_dd = Dd::from(a);
    let mut b_dd = Dd::from(b64);
    for _ in 0..3 {
        let gv = g_dd(a_dd, b_dd, &consts);
        let dv = g_db_dd(a_dd, b_dd, &consts);
        b_dd = b_dd - gv / dv;
    }
    let residual = g_dd(a_dd, b_dd, &consts).abs().to_f64();
    let b_of_a = b_dd.to_f64();
    let dg_db = g_db(a, b_of_a, params)?;
    Ok((b_of_a, residual, dg_db, b0v))
}

/// Solves `G(a, b(a)) = 0` for the unique best-response ceiling.
///
/// The bracket starts just above `max(a, m, b0 (1 - 1e-12))` where `G > 0`
/// and doubles until `G < 0`; hitting the `1e8 m` cap means the parameters
/// are in the laissez-faire regime, which is reported as a bracket failure.
pub fn solve_b_of_a(
    a: f64,
    params: &ModelParams,
    integrals: &CostIntegrals,
) -> Result<LegisBestResponse, LegError> {
    assert_eq!(
        integrals.params(),
        params,
        "cost integrals were built for different parameters"
    );
    let (b_of_a, residual, dg_db, b0v) = b_of_a_threshold(a, params)?;
    let (d3, d4) = integrals.d3_d4(b_of_a)?;
    Ok(LegisBestResponse {
        a,
        b_of_a,
        residual,
        dg_db,
        b0: b0v,
        d3,
        d4,
    })
}

/// Legislator value function under intervention: constant below `a`,
/// homogeneous plus resolvent part on `(a, b(a))`, linear with slope
/// `kappa` above `b(a)`.
#[derive(Clone)]
pub struct LegCeilingValue {
    pub a: f64,
    pub b: f64,
    d3: f64,
    d4: f64,
    theta: RootPair,
    kappa: f64,
    integrals: Arc<CostIntegrals>,
}

impl LegCeilingValue {
    pub fn new(
        response: &LegisBestResponse,
        params: &ModelParams,
        integrals: Arc<CostIntegrals>,
    ) -> LegCeilingValue {
        LegCeilingValue {
            a: response.a,
            b: response.b_of_a,
            d3: response.d3,
            d4: response.d4,
            theta: char_roots(params, DiscountRate::Legislator),
            kappa: params.kappa(),
            integrals,
        }
    }

    /// Builds the evaluator directly from a `(threshold, ceiling)` pair,
    /// computing the smooth-fit coefficients at the ceiling.
    pub fn from_thresholds(
        a: f64,
        b: f64,
        params: &ModelParams,
        integrals: Arc<CostIntegrals>,
    ) -> Result<LegCeilingValue, LegError> {
        assert_eq!(integrals.params(), params);
        let (d3, d4) = integrals.d3_d4(b)?;
        Ok(LegCeilingValue {
            a,
            b,
            d3,
            d4,
            theta: char_roots(params, DiscountRate::Legislator),
            kappa: params.kappa(),
            integrals,
        })
    }

    /// Expected cost of the (possibly suboptimal) reflection policy at an
    /// arbitrary pair `a < b`: the homogeneous coefficients solve the
    /// Neumann system `V'(a) = 0`, `V'(b) = kappa` instead of smooth fit.
    pub fn from_policy(
        a: f64,
        b: f64,
        params: &ModelParams,
        integrals: Arc<CostIntegrals>,
    ) -> Result<LegCeilingValue, LegError> {
        assert_eq!(integrals.params(), params);
        if !(a > 0.0 && a < b) {
            return Err(LegError::Domain(format!(
                "policy value requires 0 < a < b, got a={a}, b={b}"
            )));
        }
        let theta = char_roots(params, DiscountRate::Legislator);
        let (t1, t2) = (theta.pos, theta.neg);
        let m11 = t1 * a.powf(t1 - 1.0);
        let m12 = t2 * a.powf(t2 - 1.0);
        let m21 = t1 * b.powf(t1 - 1.0);
        let m22 = t2 * b.powf(t2 - 1.0);
        let r1 = -integrals.h_prime(a)?;
        let r2 = params.kappa() - integrals.h_prime(b)?;
        let det = m11 * m22 - m12 * m21;
        let d3 = (r1 * m22 - r2 * m12) / det;
        let d4 = (m11 * r2 - m21 * r1) / det;
        Ok(LegCeilingValue {
            a,
            b,
            d3,
            d4,
            theta,
            kappa: params.kappa(),
            integrals,
        })
    }

    fn middle(&self, x: f64) -> Result<f64, SpecialError> {
        Ok(self.d3 * x.powf(self.theta.pos)
            + self.d4 * x.powf(self.theta.neg)
            + self.integrals.h(x)?)
    }

    pub fn value(&self, x: f64) -> Result<f64, SpecialError> {
        if !(x > 0.0) {
            return Err(SpecialError::Domain(format!(
                "value requires x > 0, got {x}"
            )));
        }
        if x <= self.a {
            self.middle(self.a)
        } else if x < self.b {
            self.middle(x)
        } else {
            Ok(self.middle(self.b)? + self.kappa * (x - self.b))
        }
    }

    pub fn derivative(&self, x: f64) -> Result<f64, SpecialError> {
        if x <= self.a {
            Ok(0.0)
        } else if x < self.b {
            Ok(self.d3 * self.theta.pos * x.powf(self.theta.pos - 1.0)
                + self.d4 * self.theta.neg * x.powf(self.theta.neg - 1.0)
                + self.integrals.h_prime(x)?)
        } else {
            Ok(self.kappa)
        }
    }

    pub fn second_derivative(&self, x: f64) -> Result<f64, SpecialError> {
        if x <= self.a || x >= self.b {
            Ok(0.0)
        } else {
            let (t1, t2) = (self.theta.pos, self.theta.neg);
            Ok(self.d3 * t1 * (t1 - 1.0) * x.powf(t1 - 2.0)
                + self.d4 * t2 * (t2 - 1.0) * x.powf(t2 - 2.0)
                + self.integrals.h_second(x)?)
        }
    }
}

/// Evaluates `U2(x; a)`, resolving `b(a)` and the coefficients internally.
pub fn u2(
    x: f64,
    a: f64,
    params: &ModelParams,
    integrals: Arc<CostIntegrals>,
) -> Result<f64, LegError> {
    let response = solve_b_of_a(a, params, &integrals)?;
    Ok(LegCeilingValue::new(&response, params, integrals).value(x)?)
}

/// Legislator value under laissez-faire: constant below `a`, decreasing
/// homogeneous term plus the resolvent cost above.
#[derive(Clone)]
pub struct LegNoCeilingValue {
    pub a: f64,
    pub dbar2: f64,
    theta_neg: f64,
    integrals: Arc<CostIntegrals>,
}

impl LegNoCeilingValue {
    /// Requires the laissez-faire regime, where no ceiling is optimal.
    pub fn new(
        a: f64,
        params: &ModelParams,
        integrals: Arc<CostIntegrals>,
    ) -> Result<LegNoCeilingValue, LegError> {
        assert_eq!(integrals.params(), params);
        if classify_regime(params).tag != RegimeTag::LegislatorAbstains {
            return Err(LegError::Domain(
                "no-intervention value requires the laissez-faire regime".into(),
            ));
        }
        if !(a > 0.0) {
            return Err(LegError::Domain(format!(
                "threshold must be positive, got {a}"
            )));
        }
        let theta = char_roots(params, DiscountRate::Legislator);
        Ok(LegNoCeilingValue {
            a,
            dbar2: integrals.dbar2(a)?,
            theta_neg: theta.neg,
            integrals,
        })
    }

    fn upper(&self, x: f64) -> Result<f64, SpecialError> {
        Ok(self.dbar2 * x.powf(self.theta_neg) + self.integrals.h(x)?)
    }

    pub fn value(&self, x: f64) -> Result<f64, SpecialError> {
        if !(x > 0.0) {
            return Err(SpecialError::Domain(format!(
                "value requires x > 0, got {x}"
            )));
        }
        if x <= self.a {
            self.upper(self.a)
        } else {
            self.upper(x)
        }
    }

    pub fn derivative(&self, x: f64) -> Result<f64, SpecialError> {
        if x <= self.a {
            Ok(0.0)
        } else {
            Ok(self.dbar2 * self.theta_neg * x.powf(self.theta_neg - 1.0)
                + self.integrals.h_prime(x)?)
        }
    }
}

/// Evaluates `V2(x; a)` in the laissez-faire regime.
pub fn vbar2(
    x: f64,
    a: f64,
    params: &ModelParams,
    integrals: Arc<CostIntegrals>,
) -> Result<f64, LegError> {
    Ok(LegNoCeilingValue::new(a, params, integrals)?.value(x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::table_params;
    use approx::assert_relative_eq;

    fn integrals(lambda: f64) -> Arc<CostIntegrals> {
        Arc::new(CostIntegrals::with_default_settings(table_params(lambda)))
    }

    #[test]
    fn g_at_diagonal_limit_is_kappa() {
        let p = table_params(0.1);
        for &a in &[0.3, 0.6, 0.9] {
            let g = g_value(a, a * (1.0 + 1e-12), &p).unwrap();
            assert_relative_eq!(g, p.kappa(), max_relative = 1e-8);
        }
    }

    #[test]
    fn g_reference_value_and_divergence() {
        let p = table_params(0.1);
        assert_relative_eq!(
            g_value(0.3, 1.0, &p).unwrap(),
            -7.052451789364777,
            max_relative = 1e-12
        );
        assert!(g_value(0.3, 1e6, &p).unwrap() < -1e10);
    }

    #[test]
    fn g_db_sign_structure_and_finite_difference() {
        let p = table_params(0.1);
        let a = 0.3;
        // increasing on (a, m), decreasing beyond m
        assert!(g_db(a, 0.45, &p).unwrap() > 0.0);
        assert!(g_db(a, 0.8, &p).unwrap() < 0.0);
        for &b in &[0.45, 0.8, 1.6] {
            let h = 1e-7 * b;
            let fd = (g_value(a, b + h, &p).unwrap() - g_value(a, b - h, &p).unwrap()) / (2.0 * h);
            assert_relative_eq!(g_db(a, b, &p).unwrap(), fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn g_da_matches_finite_difference() {
        let p = table_params(0.1);
        for &(a, b) in &[(0.3, 0.9), (0.7, 1.4), (0.2, 0.5)] {
            let h = 1e-7 * a;
            let fd = (g_value(a + h, b, &p).unwrap() - g_value(a - h, b, &p).unwrap()) / (2.0 * h);
            assert_relative_eq!(g_da(a, b, &p).unwrap(), fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn b0_closed_form_and_limits() {
        let p = table_params(0.1);
        let b = b0(&p).unwrap();
        assert_relative_eq!(b, 0.707833386586998, max_relative = 1e-13);
        assert!(b > p.m());
        // lambda near r-g: base -> 1, b0 -> m
        let near = table_params(0.005 + 1e-9);
        assert_relative_eq!(b0(&near).unwrap(), near.m(), max_relative = 1e-6);
        // lambda near the regime boundary: b0 explodes
        let high = table_params(0.255 - 1e-12);
        assert!(b0(&high).unwrap() > 1e2 * p.m());
        // outside the regime the expression has no positive base
        assert!(b0(&table_params(0.3)).is_err());
    }

    #[test]
    fn qtilde_reference_and_endpoint() {
        let p = table_params(0.1);
        let q = qtilde(&p).unwrap();
        assert_relative_eq!(q.value, 0.6420098370903831, max_relative = 1e-12);
        assert!(q.residual <= 1e-12);
        assert!(q.value > 0.0 && q.value < 1.0);
        // q = 1 endpoint identity
        let theta = char_roots(&p, DiscountRate::Legislator);
        let coef = p.kappa() * p.lambda_gap() - p.alpha();
        let w1 = qtilde_eq(1.0, theta.pos, theta.neg, coef, p.alpha());
        assert_relative_eq!(
            w1,
            (theta.pos - theta.neg) * p.kappa() * p.lambda_gap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn qtilde_vanishes_at_regime_boundary() {
        let mut prev = f64::INFINITY;
        for &lambda in &[0.2, 0.24, 0.252, 0.2549, 0.255 - 1e-8] {
            let q = qtilde(&table_params(lambda)).unwrap().value;
            assert!(q < prev, "qtilde should decrease toward the boundary");
            prev = q;
        }
        assert!(prev < 0.05);
    }

    #[test]
    fn solve_b_of_a_reference_root() {
        let p = table_params(0.1);
        let ci = integrals(0.1);
        let r = solve_b_of_a(0.3, &p, &ci).unwrap();
        assert_relative_eq!(r.b_of_a, 0.7177077580453372, max_relative = 1e-13);
        assert!(r.residual <= 1e-12 * p.kappa());
        assert!(r.dg_db < 0.0);
        assert!(r.b_of_a >= r.b0 && r.b0 > p.m());
    }

    #[test]
    fn best_response_limits_and_linear_branch() {
        let p = table_params(0.1);
        let ci = integrals(0.1);
        // a -> 0: b(a) -> b0
        let tiny = solve_b_of_a(1e-8 * p.m(), &p, &ci).unwrap();
        assert!((tiny.b_of_a - tiny.b0).abs() <= 1e-3 * tiny.b0);
        // a > m: exact linear branch b(a) = a / qtilde
        let q = qtilde(&p).unwrap().value;
        for &a in &[1.2, 2.4, 6.0] {
            let r = solve_b_of_a(a, &p, &ci).unwrap();
            assert_relative_eq!(r.b_of_a * q, a, max_relative = 1e-8);
        }
    }

    #[test]
    fn b_of_a_strictly_increasing_and_convex_below_m() {
        let p = table_params(0.1);
        let ci = integrals(0.1);
        let b = |a: f64| solve_b_of_a(a, &p, &ci).unwrap().b_of_a;
        let mut prev = 0.0;
        for i in 1..=25 {
            let a = 0.3 * i as f64 / 5.0;
            let v = b(a);
            assert!(v > prev, "b(a) must increase at a={a}");
            prev = v;
        }
        // convexity on (0, m) by midpoint test
        for i in 1..10 {
            for j in (i + 1)..10 {
                let a1 = p.m() * i as f64 / 10.0;
                let a2 = p.m() * j as f64 / 10.0;
                let mid = 0.5 * (a1 + a2);
                assert!(
                    b(mid) <= 0.5 * (b(a1) + b(a2)) + 1e-10,
                    "convexity fails at ({a1}, {a2})"
                );
            }
        }
    }

    #[test]
    fn misclassified_regime_is_caught_by_bracket_growth() {
        // In the laissez-faire regime G never crosses zero.
        let p = table_params(0.3);
        let ci = integrals(0.3);
        let err = solve_b_of_a(0.3, &p, &ci).unwrap_err();
        assert!(matches!(err, LegError::Domain(_)));
        // bypass the regime guard to exercise the bracket cap itself
        let theta = char_roots(&p, DiscountRate::Legislator);
        let g = |b: f64| g_raw(0.3, b, &theta, &p);
        assert!(solve::grow_bracket(g, p.m() * 1.01, 1e8 * p.m()).is_none());
    }

    #[test]
    fn scale_invariance_of_linear_branch() {
        // G(qtilde * b, b) = 0 for every b with qtilde * b > m.
        let p = table_params(0.1);
        let q = qtilde(&p).unwrap().value;
        for &b in &[1.5, 3.0, 10.0] {
            if q * b > p.m() {
                assert!(g_value(q * b, b, &p).unwrap().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn u2_smooth_fit_and_ode_residual() {
        let p = table_params(0.1);
        let ci = Arc::new(CostIntegrals::new(
            p,
            crate::quad::QuadratureSettings::with_tolerances(p.lambda_gap(), 1e-13, 1e-13),
        ));
        let a = 0.3;
        let resp = solve_b_of_a(a, &p, &ci).unwrap();
        let u = LegCeilingValue::new(&resp, &p, ci.clone());
        let b = resp.b_of_a;
        // right derivative at a is zero
        let h = 1e-6 * a;
        let right = (u.value(a + h).unwrap() - u.value(a).unwrap()) / h;
        assert!(right.abs() < 1e-6, "U2'(a+) = {right:e}");
        // left derivative at b(a) is kappa; second derivative vanishes
        let hb = 1e-4 * b;
        let left = (u.value(b).unwrap() - u.value(b - hb).unwrap()) / hb
            + 0.5 * hb * u.second_derivative(b - hb).unwrap();
        assert!((left - p.kappa()).abs() < 1e-5, "U2'(b-) = {left}");
        assert!(u.second_derivative(b * (1.0 - 1e-9)).unwrap().abs() < 1e-6);
        // interior ODE residual by finite differences
        for &x in &[0.35, 0.5, 0.65] {
            let hx = 1e-3 * x;
            let um = u.value(x - hx).unwrap();
            let u0 = u.value(x).unwrap();
            let up = u.value(x + hx).unwrap();
            let du = (up - um) / (2.0 * hx);
            let d2u = (up - 2.0 * u0 + um) / (hx * hx);
            let resid = 0.5 * p.sigma() * p.sigma() * x * x * d2u + p.net_drift() * x * du
                - p.lambda() * u0
                + p.alpha() * (x - p.m()).max(0.0);
            assert!(resid.abs() < 1e-6, "x={x}: resid {resid:e}");
        }
        // variational slope bounds
        for i in 1..=40 {
            let x = 0.025 * i as f64;
            let d = u.derivative(x).unwrap();
            assert!((-1e-9..=p.kappa() + 1e-9).contains(&d), "x={x}: U2'={d}");
        }
    }

    #[test]
    fn u2_derivative_equals_g_identity() {
        // U2'(x; a) = G(x, b(a)) on the middle piece.
        let p = table_params(0.1);
        let ci = integrals(0.1);
        let resp = solve_b_of_a(0.3, &p, &ci).unwrap();
        let u = LegCeilingValue::new(&resp, &p, ci);
        for &x in &[0.35, 0.5, 0.65] {
            let lhs = u.derivative(x).unwrap();
            let rhs = g_value(x, resp.b_of_a, &p).unwrap();
            assert!((lhs - rhs).abs() < 1e-7, "x={x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn vbar2_neumann_and_slope_bound() {
        let p = table_params(0.3);
        let ci = integrals(0.3);
        let a = 0.25584760989829136;
        let v = LegNoCeilingValue::new(a, &p, ci).unwrap();
        let h = 1e-6 * a;
        let right = (v.value(a + h).unwrap() - v.value(a).unwrap()) / h;
        assert!(right.abs() < 1e-6, "V2'(a+) = {right:e}");
        // slope stays in [0, kappa) on (a, 50 m]
        for i in 1..=60 {
            let x = a + (50.0 * p.m() - a) * i as f64 / 60.0;
            let d = v.derivative(x).unwrap();
            assert!(d >= -1e-10 && d < p.kappa(), "x={x}: V2'={d}");
        }
        // requires the laissez-faire regime
        let p2 = table_params(0.1);
        let ci2 = integrals(0.1);
        assert!(LegNoCeilingValue::new(a, &p2, ci2).is_err());
    }

    #[test]
    fn dd_and_f64_g_agree_at_benign_points() {
        let p = table_params(0.1);
        let c = dd_leg_consts(&p);
        for &(a, b) in &[(0.3, 0.9), (0.8, 1.3), (0.1, 0.62)] {
            let dd = g_dd(Dd::from(a), Dd::from(b), &c).to_f64();
            let f = g_value(a, b, &p).unwrap();
            assert_relative_eq!(dd, f, max_relative = 1e-12);
        }
    }
}
