//! Standard-normal functions and the semi-infinite time integrals entering
//! the legislator's value functions.
//!
//! Three integrals recur, all over `t in (0, inf)` with exponential decay at
//! the gap `lambda - (r-g)`:
//!
//! * `iphi(x)`: discounted mass of `Phi(d1(x,t))`,
//! * `in2(x)`:  `lambda`-discounted mass of `Phi(d2(x,t))`,
//! * `ipdf(x)`: discounted mass of the density term `phi(d1)/(sigma sqrt t)`.
//!
//! The resolvent cost `h(x) = alpha (x iphi(x) - m in2(x))` is the expected
//! discounted running cost `alpha (X_t - m)^+` of the uncontrolled ratio
//! started at `x`; its derivatives are `h' = alpha iphi` and
//! `h'' = alpha ipdf / x`, which the ODE-residual tests exercise.
//!
//! Near `t = 0` the integrands have a boundary layer (a step limit at
//! `x = m`), handled by integrating the first unit of time in the variable
//! `u = sqrt(t)`, which also removes the `t^{-1/2}` singularity of the
//! density term. Truncation at `t_max` adds an analytic tail bound to the
//! reported error estimate.

use crate::model::{char_roots, DiscountRate, ModelParams, RootPair};
use crate::quad::{integrate, QuadError, QuadratureSettings};
use std::collections::HashMap;
use std::sync::Mutex;
use thiserror::Error;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Standard normal CDF via the complementary error function, accurate to
/// about 1e-16 absolute including the far tails.
#[inline]
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

/// The Black-Scholes-type arguments
/// `d1 = (ln(x/m) + (r-g+sigma^2/2)t)/(sigma sqrt t)` and
/// `d2 = d1 - sigma sqrt t`.
pub fn d1_d2(x: f64, t: f64, params: &ModelParams) -> Result<(f64, f64), SpecialError> {
    if !(t > 0.0) {
        return Err(SpecialError::Domain(format!(
            "d1_d2 requires t > 0, got {t}"
        )));
    }
    if !(x > 0.0) {
        return Err(SpecialError::Domain(format!(
            "d1_d2 requires x > 0, got {x}"
        )));
    }
    let s_sqrt_t = params.sigma() * t.sqrt();
    let d1 = ((x / params.m()).ln()
        + (params.net_drift() + 0.5 * params.sigma() * params.sigma()) * t)
        / s_sqrt_t;
    Ok((d1, d1 - s_sqrt_t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Kind {
    IPhi,
    IN2,
    IPdf,
}

/// Memoizing evaluator for the time integrals and the value-function
/// coefficients built from them.
///
/// Memoization is keyed by the bit pattern of `x`; the evaluator owns its
/// parameter set, so a cache entry can never be observed under different
/// parameters. All results are deterministic, making the cache
/// observationally transparent.
pub struct CostIntegrals {
    params: ModelParams,
    theta: RootPair,
    settings: QuadratureSettings,
    memo: Mutex<HashMap<(Kind, u64), f64>>,
}

impl CostIntegrals {
    pub fn new(params: ModelParams, settings: QuadratureSettings) -> CostIntegrals {
        CostIntegrals {
            params,
            theta: char_roots(&params, DiscountRate::Legislator),
            settings,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_default_settings(params: ModelParams) -> CostIntegrals {
        let settings = QuadratureSettings::for_gap(params.lambda_gap());
        CostIntegrals::new(params, settings)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn settings(&self) -> &QuadratureSettings {
        &self.settings
    }

    fn d1(&self, x: f64, t: f64) -> f64 {
        let p = &self.params;
        let s_sqrt_t = p.sigma() * t.sqrt();
        ((x / p.m()).ln() + (p.net_drift() + 0.5 * p.sigma() * p.sigma()) * t) / s_sqrt_t
    }

    /// Integrates `f` over `(0, t_max]` with the `u = sqrt(t)` change of
    /// variables on the first unit of time, then adds `tail` to the error.
    fn semi_infinite(&self, f: &dyn Fn(f64) -> f64, tail_bound: f64) -> Result<f64, QuadError> {
        let s = &self.settings;
        let near_end = s.t_max.min(1.0);
        let near = integrate(
            &|u: f64| 2.0 * u * f(u * u),
            0.0,
            near_end.sqrt(),
            0.5 * s.abs_tol,
            s.rel_tol,
            s.max_subdivisions,
        )?;
        let (far_value, far_error) = if s.t_max > 1.0 {
            let far = integrate(
                f,
                1.0,
                s.t_max,
                0.5 * s.abs_tol,
                s.rel_tol,
                s.max_subdivisions,
            )?;
            (far.value, far.error)
        } else {
            (0.0, 0.0)
        };
        let value = near.value + far_value;
        let error = near.error + far_error + tail_bound;
        let target = s.abs_tol.max(s.rel_tol * value.abs());
        // The per-panel tolerances already enforce this unless the tail
        // bound dominates, which the t_max rule prevents for in-range gaps.
        if error > 10.0 * target + tail_bound {
            return Err(QuadError::ToleranceNotMet {
                achieved: error,
                requested: target,
                subdivisions: near.subdivisions,
            });
        }
        Ok(value)
    }

    fn integral(&self, kind: Kind, x: f64) -> Result<f64, SpecialError> {
        if !(x > 0.0) {
            return Err(SpecialError::Domain(format!(
                "time integrals require x > 0, got {x}"
            )));
        }
        let key = (kind, x.to_bits());
        if let Some(&v) = self.memo.lock().unwrap().get(&key) {
            return Ok(v);
        }
        let p = self.params;
        let gap = p.lambda_gap();
        let t_max = self.settings.t_max;
        let value = match kind {
            Kind::IPhi => {
                let f = move |t: f64| {
                    if t == 0.0 {
                        return step_limit(x, p.m());
                    }
                    (-gap * t).exp() * std_normal_cdf(self.d1(x, t))
                };
                self.semi_infinite(&f, (-gap * t_max).exp() / gap)?
            }
            Kind::IN2 => {
                let lambda = p.lambda();
                let sigma = p.sigma();
                let f = move |t: f64| {
                    if t == 0.0 {
                        return step_limit(x, p.m());
                    }
                    (-lambda * t).exp() * std_normal_cdf(self.d1(x, t) - sigma * t.sqrt())
                };
                self.semi_infinite(&f, (-lambda * t_max).exp() / lambda)?
            }
            Kind::IPdf => {
                let sigma = p.sigma();
                let f = move |t: f64| {
                    if t == 0.0 {
                        return 0.0;
                    }
                    (-gap * t).exp() * std_normal_pdf(self.d1(x, t)) / (sigma * t.sqrt())
                };
                let tail = (-gap * t_max).exp() / (gap * sigma * SQRT_2PI * t_max.sqrt());
                self.semi_infinite(&f, tail)?
            }
        };
        self.memo.lock().unwrap().insert(key, value);
        Ok(value)
    }

    /// `int_0^inf e^{-(lambda-(r-g))t} Phi(d1(x,t)) dt`.
    pub fn iphi(&self, x: f64) -> Result<f64, SpecialError> {
        self.integral(Kind::IPhi, x)
    }

    /// `int_0^inf e^{-lambda t} Phi(d2(x,t)) dt`.
    pub fn in2(&self, x: f64) -> Result<f64, SpecialError> {
        self.integral(Kind::IN2, x)
    }

    /// `int_0^inf e^{-(lambda-(r-g))t} phi(d1(x,t)) / (sigma sqrt t) dt`.
    pub fn ipdf(&self, x: f64) -> Result<f64, SpecialError> {
        self.integral(Kind::IPdf, x)
    }

    /// Resolvent cost `h(x)`: expected discounted running cost
    /// `alpha (X_t - m)^+` of the uncontrolled ratio started at `x`.
    pub fn h(&self, x: f64) -> Result<f64, SpecialError> {
        let p = &self.params;
        Ok(p.alpha() * (x * self.iphi(x)? - p.m() * self.in2(x)?))
    }

    /// `h'(x) = alpha iphi(x)` (the normal-density terms cancel exactly).
    pub fn h_prime(&self, x: f64) -> Result<f64, SpecialError> {
        Ok(self.params.alpha() * self.iphi(x)?)
    }

    /// `h''(x) = alpha ipdf(x) / x`.
    pub fn h_second(&self, x: f64) -> Result<f64, SpecialError> {
        Ok(self.params.alpha() * self.ipdf(x)? / x)
    }

    /// Coefficient of the decreasing homogeneous solution in the
    /// no-intervention legislator value: `-(alpha/theta2) a^{1-theta2}
    /// iphi(a)`, positive for `a > 0`.
    pub fn dbar2(&self, a: f64) -> Result<f64, SpecialError> {
        let t2 = self.theta.neg;
        Ok(-self.params.alpha() / t2 * a.powf(1.0 - t2) * self.iphi(a)?)
    }

    /// Coefficients `(D3, D4)` of the homogeneous part of the legislator's
    /// ceiling value on `(a, b(a))`, determined by the smooth-fit system
    /// `u'(b) = kappa`, `u''(b) = 0`:
    ///
    /// ```text
    /// D3 theta1 b^{theta1-1} = [(theta2-1)(kappa - h'(b)) + b h''(b)] / (theta2-theta1)
    /// D4 theta2 b^{theta2-1} = [(theta1-1)(kappa - h'(b)) + b h''(b)] / (theta1-theta2)
    /// ```
    pub fn d3_d4(&self, b: f64) -> Result<(f64, f64), SpecialError> {
        let (t1, t2) = (self.theta.pos, self.theta.neg);
        let kappa = self.params.kappa();
        let s = kappa - self.h_prime(b)?;
        let q = self.params.alpha() * self.ipdf(b)?; // = b h''(b)
        let u = ((t2 - 1.0) * s + q) / (t2 - t1);
        let v = ((t1 - 1.0) * s + q) / (t1 - t2);
        let d3 = u / (t1 * b.powf(t1 - 1.0));
        let d4 = v / (t2 * b.powf(t2 - 1.0));
        Ok((d3, d4))
    }
}

fn step_limit(x: f64, m: f64) -> f64 {
    if x > m {
        1.0
    } else if x == m {
        0.5
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::table_params;
    use approx::assert_relative_eq;

    /// Independent series oracle for Phi on moderate arguments:
    /// `Phi(z) = 1/2 + phi(z) * sum_{k>=0} z^{2k+1} / (1*3*...*(2k+1))`.
    fn phi_series(z: f64) -> f64 {
        let mut term = z;
        let mut sum = z;
        let mut k = 0.0;
        while term.abs() > 1e-18 {
            k += 1.0;
            term *= z * z / (2.0 * k + 1.0);
            sum += term;
        }
        0.5 + std_normal_pdf(z) * sum
    }

    #[test]
    fn normal_cdf_matches_series_oracle() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(40.0) - 1.0).abs() < 1e-300);
        for &z in &[-3.0, -1.0, -0.3, 0.125, 1.0, 2.5] {
            assert!((std_normal_cdf(z) - phi_series(z)).abs() <= 1e-15, "z={z}");
        }
        assert_relative_eq!(std_normal_cdf(1.0), 0.8413447460685429, epsilon = 1e-15);
    }

    #[test]
    fn d1_d2_definition() {
        let p = table_params(0.1);
        let (d1, d2) = d1_d2(p.m(), 1.0, &p).unwrap();
        assert_relative_eq!(d1, 0.125, epsilon = 1e-15);
        assert_relative_eq!(d1 - d2, p.sigma(), epsilon = 1e-15);
        assert!(d1_d2(0.5, 0.0, &p).is_err());
        assert!(d1_d2(-0.5, 1.0, &p).is_err());
        // d2 < d1 for all t > 0
        for &t in &[1e-8, 0.5, 10.0, 200.0] {
            let (a, b) = d1_d2(0.8, t, &p).unwrap();
            assert!(b < a);
        }
    }

    #[test]
    fn h_matches_reference_quadrature() {
        let ci = CostIntegrals::with_default_settings(table_params(0.1));
        // 40-digit reference values; agreement to the absolute quadrature
        // tolerance plus tail bound
        assert_relative_eq!(ci.h(0.6).unwrap(), 0.22868739920826822, epsilon = 3e-10);
        assert_relative_eq!(ci.h(0.3).unwrap(), 0.036629609634915794, epsilon = 3e-10);
        assert_relative_eq!(ci.h(1.2).unwrap(), 1.0435802338858617, epsilon = 1e-9);
        assert_relative_eq!(
            ci.iphi(0.6).unwrap(),
            6.713994332684135,
            max_relative = 1e-9
        );
    }

    #[test]
    fn h_vanishes_at_zero_plus() {
        let ci = CostIntegrals::with_default_settings(table_params(0.1));
        assert!(ci.h(1e-12).unwrap() < 1e-10);
    }

    #[test]
    fn h_satisfies_resolvent_ode_by_finite_differences() {
        let p = table_params(0.1);
        let settings = QuadratureSettings::with_tolerances(p.lambda_gap(), 1e-13, 1e-13);
        let ci = CostIntegrals::new(p, settings);
        for &x in &[0.3, 0.55, 0.8, 1.4] {
            let hc = 1e-3 * x;
            let hm = ci.h(x - hc).unwrap();
            let h0 = ci.h(x).unwrap();
            let hp = ci.h(x + hc).unwrap();
            let d1 = (hp - hm) / (2.0 * hc);
            let d2 = (hp - 2.0 * h0 + hm) / (hc * hc);
            let resid = 0.5 * p.sigma() * p.sigma() * x * x * d2 + p.net_drift() * x * d1
                - p.lambda() * h0
                + p.alpha() * (x - p.m()).max(0.0);
            assert!(resid.abs() < 1e-6, "x={x}, resid={resid:e}");
        }
    }

    #[test]
    fn h_prime_bounds_hold_on_grid() {
        let p = table_params(0.1);
        let ci = CostIntegrals::with_default_settings(p);
        let cap = p.alpha() / p.lambda_gap();
        for i in 1..=40 {
            let x = 0.05 * i as f64;
            let hp = ci.h_prime(x).unwrap();
            assert!((0.0..=cap).contains(&hp), "x={x}, h'={hp}");
            // finite-difference agreement with the analytic derivative
            let hc = 1e-4 * x;
            let fd = (ci.h(x + hc).unwrap() - ci.h(x - hc).unwrap()) / (2.0 * hc);
            assert!((fd - hp).abs() < 1e-5, "x={x}: fd={fd}, analytic={hp}");
        }
    }

    #[test]
    fn h_nondecreasing_in_x() {
        let ci = CostIntegrals::with_default_settings(table_params(0.1));
        let mut prev = 0.0;
        for i in 1..=30 {
            let h = ci.h(0.1 * i as f64).unwrap();
            assert!(h >= prev);
            prev = h;
        }
    }

    #[test]
    fn dbar2_limits_and_refinement() {
        let p = table_params(0.3);
        let ci = CostIntegrals::with_default_settings(p);
        // a -> 0+: integral -> 0
        assert!(ci.dbar2(1e-10).unwrap() < 1e-9);
        // 0 < integral < 1/gap at a = m
        let gap = p.lambda_gap();
        let i = ci.iphi(p.m()).unwrap();
        assert!(i > 0.0 && i < 1.0 / gap);
        // refinement oracle: halved tolerances agree to 1e-8
        let tight = CostIntegrals::new(
            p,
            QuadratureSettings::with_tolerances(gap, 0.5e-10, 0.5e-10),
        );
        let a = 0.3;
        assert!((ci.dbar2(a).unwrap() - tight.dbar2(a).unwrap()).abs() <= 1e-8);
        // frozen reference at table params
        assert_relative_eq!(
            ci.dbar2(0.25584760989829136).unwrap(),
            1.099630560649723e-05,
            max_relative = 1e-8
        );
    }

    #[test]
    fn d3_d4_satisfy_smooth_fit() {
        let p = table_params(0.1);
        let ci = CostIntegrals::with_default_settings(p);
        let theta = char_roots(&p, DiscountRate::Legislator);
        let (t1, t2) = (theta.pos, theta.neg);
        for &b in &[0.707833386586998, 0.7177077580453372, 1.2] {
            let (d3, d4) = ci.d3_d4(b).unwrap();
            let up =
                d3 * t1 * b.powf(t1 - 1.0) + d4 * t2 * b.powf(t2 - 1.0) + ci.h_prime(b).unwrap();
            let upp = d3 * t1 * (t1 - 1.0) * b.powf(t1 - 2.0)
                + d4 * t2 * (t2 - 1.0) * b.powf(t2 - 2.0)
                + ci.h_second(b).unwrap();
            assert!((up - p.kappa()).abs() < 1e-8, "b={b}: u'(b)={up}");
            assert!(upp.abs() < 1e-8, "b={b}: u''(b)={upp}");
        }
    }

    #[test]
    fn d3_d4_scale_linearly_in_kappa() {
        // The smooth-fit bracket is affine in kappa with slope (theta_i - 1)
        // factors; doubling kappa shifts each coefficient linearly.
        let p1 = table_params(0.1);
        let mut raw = p1.raw();
        raw.kappa = 1.2;
        let p2 = ModelParams::validate(raw).unwrap();
        let c1 = CostIntegrals::with_default_settings(p1);
        let c2 = CostIntegrals::with_default_settings(p2);
        let b = 0.9;
        let (d3a, d4a) = c1.d3_d4(b).unwrap();
        let (d3b, d4b) = c2.d3_d4(b).unwrap();
        // linear in kappa: D(2k) - D(k) = k * dD/dk, so extrapolation to 3k
        // from the first two points is exact.
        let mut raw3 = p1.raw();
        raw3.kappa = 1.8;
        let p3 = ModelParams::validate(raw3).unwrap();
        let c3 = CostIntegrals::with_default_settings(p3);
        let (d3c, d4c) = c3.d3_d4(b).unwrap();
        assert_relative_eq!(d3c, d3a + 2.0 * (d3b - d3a), max_relative = 1e-9);
        assert_relative_eq!(d4c, d4a + 2.0 * (d4b - d4a), max_relative = 1e-9);
    }

    #[test]
    fn quadrature_is_deterministic() {
        let ci = CostIntegrals::with_default_settings(table_params(0.1));
        let a = ci.h(0.77).unwrap();
        let ci2 = CostIntegrals::with_default_settings(table_params(0.1));
        let b = ci2.h(0.77).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
