//! Government best responses: the no-ceiling issuance threshold and its
//! value function, and the map `b -> a(b)` with the ceiling value `U1(.; b)`.
//!
//! The optimal threshold against a ceiling `b` is the unique root in
//! `(0, min(b, a_tilde))` of the smooth-fit residual `F(., b)`, which is
//! increasing there. Bisection brackets the root in f64; a double-double
//! Newton polish (closed-form `dF/da`) then drives the residual to the
//! `1e-12`-scale contract, which is far below what a single f64 root can
//! express at large `b` (the residual slope grows like `b^{pos_root - 1}`).

use crate::dd::Dd;
use crate::model::{char_roots, char_roots_dd, DiscountRate, ModelParams, RootPair};
use crate::solve;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GovError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("bracket failure in {stage}: {detail}")]
    BracketFailure { stage: &'static str, detail: String },
    #[error("no interior peak of a(b) found over the search range")]
    PeakNotFound,
}

/// `a_tilde = c2 (rho - (r-g))`, the upper bound for every best response.
pub fn atilde(params: &ModelParams) -> f64 {
    params.c2() * (params.rho() - params.net_drift())
}

/// Smooth-fit residual `F(a, b)` whose root in `a` is the government's best
/// response to the ceiling `b`.
pub fn f_value(a: f64, b: f64, params: &ModelParams) -> Result<f64, GovError> {
    if !(a > 0.0 && a <= b) {
        return Err(GovError::Domain(format!(
            "F requires 0 < a <= b, got a={a}, b={b}"
        )));
    }
    let roots = char_roots(params, DiscountRate::Government);
    Ok(f_raw(a, b, &roots, params))
}

fn f_raw(a: f64, b: f64, roots: &RootPair, params: &ModelParams) -> f64 {
    let (d1, d2) = (roots.pos, roots.neg);
    let p = params.rho_margin();
    let c2 = params.c2();
    let ratio = b / a;
    ((2.0 - d2) * a - c2 * (1.0 - d2) * p) * ratio.powf(d1 - 1.0)
        + ((d1 - 2.0) * a - c2 * (d1 - 1.0) * p) * ratio.powf(d2 - 1.0)
        - (d1 - d2) * (b - params.c1() * p)
}

/// Closed-form `dF/da`; positive below `min(b, a_tilde)`, negative beyond.
pub fn f_da(a: f64, b: f64, params: &ModelParams) -> Result<f64, GovError> {
    if !(a > 0.0 && a <= b) {
        return Err(GovError::Domain(format!(
            "dF/da requires 0 < a <= b, got a={a}, b={b}"
        )));
    }
    let roots = char_roots(params, DiscountRate::Government);
    let (d1, d2) = (roots.pos, roots.neg);
    let p = params.rho_margin();
    let ratio = b / a;
    Ok((ratio.powf(d1 - 1.0) - ratio.powf(d2 - 1.0)) / a
        * (params.c2() * (d1 - 1.0) * (1.0 - d2) * p - (d1 - 2.0) * (2.0 - d2) * a))
}

/// Closed-form `dF/db`.
pub fn f_db(a: f64, b: f64, params: &ModelParams) -> Result<f64, GovError> {
    if !(a > 0.0 && a <= b) {
        return Err(GovError::Domain(format!(
            "dF/db requires 0 < a <= b, got a={a}, b={b}"
        )));
    }
    let roots = char_roots(params, DiscountRate::Government);
    let (d1, d2) = (roots.pos, roots.neg);
    let p = params.rho_margin();
    let c2 = params.c2();
    let ratio = b / a;
    Ok(
        ((d1 - 1.0) * ((2.0 - d2) * a - c2 * (1.0 - d2) * p) * ratio.powf(d1 - 1.0)
            + (d2 - 1.0) * ((d1 - 2.0) * a - c2 * (d1 - 1.0) * p) * ratio.powf(d2 - 1.0)
            - (d1 - d2) * b)
            / b,
    )
}

/// `F(b, b) = (pos-neg)(c1-c2)(rho margin)`, the positive residual scale
/// against which solver tolerances are measured.
pub fn f_scale(params: &ModelParams) -> f64 {
    let roots = char_roots(params, DiscountRate::Government);
    (roots.pos - roots.neg) * (params.c1() - params.c2()) * params.rho_margin()
}

pub(crate) struct DdGovConsts {
    pub d1: Dd,
    pub d2: Dd,
    pub p: Dd,
    pub c1: Dd,
    pub c2: Dd,
}

pub(crate) fn dd_gov_consts(params: &ModelParams) -> DdGovConsts {
    let (d1, d2) = char_roots_dd(params, DiscountRate::Government);
    let sigma = Dd::from(params.sigma());
    let p = Dd::from(params.rho()) - Dd::from(2.0) * Dd::from(params.net_drift()) - sigma * sigma;
    DdGovConsts {
        d1,
        d2,
        p,
        c1: Dd::from(params.c1()),
        c2: Dd::from(params.c2()),
    }
}

pub(crate) fn f_dd(a: Dd, b: Dd, c: &DdGovConsts) -> Dd {
    let one = Dd::ONE;
    let two = Dd::from(2.0);
    let l = (b / a).ln();
    let pw1 = ((c.d1 - one) * l).exp();
    let pw2 = ((c.d2 - one) * l).exp();
    ((two - c.d2) * a - c.c2 * (one - c.d2) * c.p) * pw1
        + ((c.d1 - two) * a - c.c2 * (c.d1 - one) * c.p) * pw2
        - (c.d1 - c.d2) * (b - c.c1 * c.p)
}

pub(crate) fn f_da_dd(a: Dd, b: Dd, c: &DdGovConsts) -> Dd {
    let one = Dd::ONE;
    let two = Dd::from(2.0);
    let l = (b / a).ln();
    let pw1 = ((c.d1 - one) * l).exp();
    let pw2 = ((c.d2 - one) * l).exp();
    (pw1 - pw2) / a * (c.c2 * (c.d1 - one) * (one - c.d2) * c.p - (c.d1 - two) * (two - c.d2) * a)
}

pub(crate) fn f_db_dd(a: Dd, b: Dd, c: &DdGovConsts) -> Dd {
    let one = Dd::ONE;
    let two = Dd::from(2.0);
    let l = (b / a).ln();
    let pw1 = ((c.d1 - one) * l).exp();
    let pw2 = ((c.d2 - one) * l).exp();
    ((c.d1 - one) * ((two - c.d2) * a - c.c2 * (one - c.d2) * c.p) * pw1
        + (c.d2 - one) * ((c.d1 - two) * a - c.c2 * (c.d1 - one) * c.p) * pw2
        - (c.d1 - c.d2) * b)
        / b
}

/// No-ceiling solution: closed-form threshold, coefficient, and the value
/// function it defines.
#[derive(Debug, Clone, Copy)]
pub struct GovNoCeilingSolution {
    pub a_bar: f64,
    pub d1_bar: f64,
    roots: RootPair,
    margin: f64,
    c2: f64,
}

impl GovNoCeilingSolution {
    /// Value at `x`: linear with slope `c2` below the threshold, decreasing
    /// homogeneous term plus the quadratic particular solution above.
    pub fn value(&self, x: f64) -> f64 {
        assert!(x > 0.0, "value requires x > 0");
        if x <= self.a_bar {
            self.upper(self.a_bar) - self.c2 * (self.a_bar - x)
        } else {
            self.upper(x)
        }
    }

    fn upper(&self, x: f64) -> f64 {
        self.d1_bar * x.powf(self.roots.neg) + x * x / (2.0 * self.margin)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x <= self.a_bar {
            self.c2
        } else {
            self.d1_bar * self.roots.neg * x.powf(self.roots.neg - 1.0) + x / self.margin
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        if x <= self.a_bar {
            0.0
        } else {
            let d2 = self.roots.neg;
            self.d1_bar * d2 * (d2 - 1.0) * x.powf(d2 - 2.0) + 1.0 / self.margin
        }
    }
}

/// Closed-form no-ceiling threshold
/// `a_bar = (1-neg) c2 (rho margin) / (2-neg)` with its value function.
pub fn abar(params: &ModelParams) -> GovNoCeilingSolution {
    let roots = char_roots(params, DiscountRate::Government);
    let d2 = roots.neg;
    let margin = params.rho_margin();
    let a_bar = (1.0 - d2) * params.c2() * margin / (2.0 - d2);
    let d1_bar = -1.0 / (margin * d2 * (d2 - 1.0) * a_bar.powf(d2 - 2.0));
    GovNoCeilingSolution {
        a_bar,
        d1_bar,
        roots,
        margin,
        c2: params.c2(),
    }
}

/// Best response of the government to a ceiling `b`, with solver
/// diagnostics. `residual` is `|F|` at the internal extended-precision root
/// (the f64 field `a_of_b` is that root correctly rounded).
#[derive(Debug, Clone, Copy)]
pub struct GovBestResponse {
    pub b: f64,
    pub a_of_b: f64,
    pub residual: f64,
    /// Sign diagnostic: `dF/da` at the root, positive per the uniqueness
    /// argument.
    pub df_da: f64,
    /// Coefficient of `x^pos` in the middle piece of `U1`.
    pub d1: f64,
    /// Coefficient of `x^neg` in the middle piece of `U1`.
    pub d2: f64,
}

pub(crate) fn u1_coefficients(a: f64, params: &ModelParams) -> (f64, f64) {
    let roots = char_roots(params, DiscountRate::Government);
    let (d1, d2) = (roots.pos, roots.neg);
    let p = params.rho_margin();
    let c2 = params.c2();
    let coef1 = ((d2 - 2.0) * a - c2 * (d2 - 1.0) * p) / (d1 * (d1 - d2) * p * a.powf(d1 - 1.0));
    let coef2 = ((d1 - 2.0) * a - c2 * (d1 - 1.0) * p) / (-d2 * (d1 - d2) * p * a.powf(d2 - 1.0));
    (coef1, coef2)
}

/// f64-only best response used by scans, where the extended-precision
/// residual is not needed.
pub(crate) fn a_of_b_fast(b: f64, params: &ModelParams) -> Result<f64, GovError> {
    let roots = char_roots(params, DiscountRate::Government);
    let hi = b.min(atilde(params));
    let lo = 1e-10 * hi;
    let f = |a: f64| f_raw(a, b, &roots, params);
    if !(f(lo) < 0.0) || !(f(hi) > 0.0) {
        return Err(GovError::BracketFailure {
            stage: "a_of_b_fast",
            detail: format!("no sign change on ({lo:e}, {hi:e})"),
        });
    }
    Ok(solve::bisect(f, lo, hi, 1e-14))
}

/// Solves `F(a(b), b) = 0` for the unique best response `a(b)`.
///
/// Bracket: `(1e-10 hi, hi)` with `hi = min(b, a_tilde)`; `F` diverges to
/// `-inf` at `0` and is positive at `hi`, and is increasing in between, so
/// bisection is globally safe. Two double-double Newton corrections follow.
pub fn solve_a_of_b(b: f64, params: &ModelParams) -> Result<GovBestResponse, GovError> {
    if !(b > 0.0) {
        return Err(GovError::Domain(format!(
            "ceiling must be positive, got {b}"
        )));
    }
    let roots = char_roots(params, DiscountRate::Government);
    let hi = b.min(atilde(params));
    let lo = 1e-10 * hi;
    let f = |a: f64| f_raw(a, b, &roots, params);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo < 0.0) || !(fhi > 0.0) {
        return Err(GovError::BracketFailure {
            stage: "solve_a_of_b",
            detail: format!("no sign change on ({lo:e}, {hi:e}): F={flo:e}..{fhi:e}"),
        });
    }
    let a64 = solve::bisect(f, lo, hi, 1e-15);

    // Extended-precision polish; quadratic convergence from an f64-accurate
    // seed puts the residual far below the 1e-12 * |F(b,b)| contract.
    let consts = dd_gov_consts(params);
    let b_dd = Dd::from(b);
    let mut a_dd = Dd::from(a64);
    for _ in 0..3 {
        let fv = f_dd(a_dd, b_dd, &consts);
        let dv = f_da_dd(a_dd, b_dd, &consts);
        a_dd = a_dd - fv / dv;
    }
    let residual = f_dd(a_dd, b_dd, &consts).abs().to_f64();
    let a_of_b = a_dd.to_f64();
    let df_da = f_da(a_of_b, b, params)?;
    let (c1, c2) = u1_coefficients(a_of_b, params);
    Ok(GovBestResponse {
        b,
        a_of_b,
        residual,
        df_da,
        d1: c1,
        d2: c2,
    })
}

/// Government value function under a ceiling `b`: three pieces glued by
/// continuity, with slopes `c2` below `a(b)` and `c1` above `b`.
#[derive(Debug, Clone, Copy)]
pub struct GovCeilingValue {
    pub a: f64,
    pub b: f64,
    coef1: f64,
    coef2: f64,
    roots: RootPair,
    margin: f64,
    c1: f64,
    c2: f64,
}

impl GovCeilingValue {
    pub fn new(response: &GovBestResponse, params: &ModelParams) -> GovCeilingValue {
        GovCeilingValue::from_thresholds(response.a_of_b, response.b, params)
    }

    /// Builds the evaluator directly from a `(threshold, ceiling)` pair with
    /// the smooth-fit coefficients at the threshold.
    pub fn from_thresholds(a: f64, b: f64, params: &ModelParams) -> GovCeilingValue {
        let (coef1, coef2) = u1_coefficients(a, params);
        GovCeilingValue {
            a,
            b,
            coef1,
            coef2,
            roots: char_roots(params, DiscountRate::Government),
            margin: params.rho_margin(),
            c1: params.c1(),
            c2: params.c2(),
        }
    }

    /// Expected cost of the (possibly suboptimal) reflection policy at an
    /// arbitrary pair `a < b`: the homogeneous coefficients solve the
    /// Neumann system `W'(a) = c2`, `W'(b) = c1` instead of smooth fit.
    /// Coincides with [`GovCeilingValue::from_thresholds`] at `a = a(b)`.
    pub fn from_policy(a: f64, b: f64, params: &ModelParams) -> Result<GovCeilingValue, GovError> {
        if !(a > 0.0 && a < b) {
            return Err(GovError::Domain(format!(
                "policy value requires 0 < a < b, got a={a}, b={b}"
            )));
        }
        let roots = char_roots(params, DiscountRate::Government);
        let (d1, d2) = (roots.pos, roots.neg);
        let p = params.rho_margin();
        let m11 = d1 * a.powf(d1 - 1.0);
        let m12 = d2 * a.powf(d2 - 1.0);
        let m21 = d1 * b.powf(d1 - 1.0);
        let m22 = d2 * b.powf(d2 - 1.0);
        let r1 = params.c2() - a / p;
        let r2 = params.c1() - b / p;
        let det = m11 * m22 - m12 * m21;
        let coef1 = (r1 * m22 - r2 * m12) / det;
        let coef2 = (m11 * r2 - m21 * r1) / det;
        Ok(GovCeilingValue {
            a,
            b,
            coef1,
            coef2,
            roots,
            margin: p,
            c1: params.c1(),
            c2: params.c2(),
        })
    }

    fn middle(&self, x: f64) -> f64 {
        self.coef1 * x.powf(self.roots.pos)
            + self.coef2 * x.powf(self.roots.neg)
            + x * x / (2.0 * self.margin)
    }

    pub fn value(&self, x: f64) -> f64 {
        assert!(x > 0.0, "value requires x > 0");
        if x <= self.a {
            self.middle(self.a) - self.c2 * (self.a - x)
        } else if x < self.b {
            self.middle(x)
        } else {
            self.middle(self.b) + self.c1 * (x - self.b)
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x <= self.a {
            self.c2
        } else if x < self.b {
            self.coef1 * self.roots.pos * x.powf(self.roots.pos - 1.0)
                + self.coef2 * self.roots.neg * x.powf(self.roots.neg - 1.0)
                + x / self.margin
        } else {
            self.c1
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            0.0
        } else {
            let (d1, d2) = (self.roots.pos, self.roots.neg);
            self.coef1 * d1 * (d1 - 1.0) * x.powf(d1 - 2.0)
                + self.coef2 * d2 * (d2 - 1.0) * x.powf(d2 - 2.0)
                + 1.0 / self.margin
        }
    }
}

/// Evaluates `U1(x; b)`, resolving `a(b)` internally. For repeated
/// evaluation construct a [`GovCeilingValue`] once instead.
pub fn u1(x: f64, b: f64, params: &ModelParams) -> Result<f64, GovError> {
    let response = solve_a_of_b(b, params)?;
    Ok(GovCeilingValue::new(&response, params).value(x))
}

/// Location of the interior peak of `b -> a(b)`.
#[derive(Debug, Clone, Copy)]
pub struct HatB {
    pub b_hat: f64,
    pub a_hat: f64,
}

/// Locates the peak of the best-response map by a 400-point log-spaced scan
/// of `b in [1e-3 m, 1e4 m]` refined by golden section. Reports
/// [`GovError::PeakNotFound`] when the map is monotone over the range.
pub fn hat_b_diagnostic(params: &ModelParams) -> Result<HatB, GovError> {
    let lo = (1e-3 * params.m()).ln();
    let hi = (1e4 * params.m()).ln();
    let n = 400;
    let a_at = |lb: f64| -> Result<f64, GovError> { Ok(solve_a_of_b(lb.exp(), params)?.a_of_b) };
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..n {
        let lb = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let a = a_at(lb)?;
        if a > best.1 {
            best = (i, a);
        }
    }
    if best.0 == 0 || best.0 == n - 1 {
        return Err(GovError::PeakNotFound);
    }
    let step = (hi - lo) / (n - 1) as f64;
    let left = lo + step * (best.0 - 1) as f64;
    let right = lo + step * (best.0 + 1) as f64;
    let (lb, a_hat) = solve::golden_max(
        |lb| {
            solve_a_of_b(lb.exp(), params)
                .map(|r| r.a_of_b)
                .unwrap_or(f64::NEG_INFINITY)
        },
        left,
        right,
        120,
    );
    Ok(HatB {
        b_hat: lb.exp(),
        a_hat,
    })
}
