//! Model parameters, standing assumptions, characteristic roots and the
//! legislator intervention regime.

use crate::dd::Dd;
use serde::Deserialize;
use thiserror::Error;

/// Unvalidated scalar inputs, as read from a flat JSON config.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    /// Interest rate on government debt (1/time).
    pub r: f64,
    /// GDP growth rate (1/time).
    pub g: f64,
    /// Debt-ratio volatility (1/sqrt(time)).
    pub sigma: f64,
    /// Government discount rate (1/time).
    pub rho: f64,
    /// Legislator discount rate (1/time).
    pub lambda: f64,
    /// Tax-compliance cost slope (cost per unit ratio per time).
    pub alpha: f64,
    /// Legislator marginal intervention cost.
    pub kappa: f64,
    /// Healthy-debt reference level (ratio).
    pub m: f64,
    /// Government marginal cost of forced debt reduction.
    pub c1: f64,
    /// Government marginal benefit of debt issuance.
    pub c2: f64,
}

/// One failed standing assumption, reported as `lhs > rhs` with both sides
/// evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionViolation {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl std::fmt::Display for AssumptionViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} violated: {} <= {}", self.name, self.lhs, self.rhs)
    }
}

/// Validation failure: every offending field/assumption, never just the first.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("{0}")]
    Assumption(AssumptionViolation),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid parameters: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ValidationReport(pub Vec<ValidationError>);

/// Validated model parameters. Construction via [`ModelParams::validate`] is
/// the only way to obtain a value, so downstream code never re-checks the
/// standing assumptions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    r: f64,
    g: f64,
    sigma: f64,
    rho: f64,
    lambda: f64,
    alpha: f64,
    kappa: f64,
    m: f64,
    c1: f64,
    c2: f64,
}

impl ModelParams {
    /// Checks every standing assumption and returns either the validated
    /// parameter set or the full list of violations. Nothing is clamped.
    pub fn validate(raw: RawParams) -> Result<ModelParams, ValidationReport> {
        let mut errs = Vec::new();
        let fields = [
            ("r", raw.r),
            ("g", raw.g),
            ("sigma", raw.sigma),
            ("rho", raw.rho),
            ("lambda", raw.lambda),
            ("alpha", raw.alpha),
            ("kappa", raw.kappa),
            ("m", raw.m),
            ("c1", raw.c1),
            ("c2", raw.c2),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                errs.push(ValidationError::NonFinite(name));
            }
        }
        if !errs.is_empty() {
            return Err(ValidationReport(errs));
        }

        let mut check = |name, lhs: f64, rhs: f64| {
            if !(lhs > rhs) {
                errs.push(ValidationError::Assumption(AssumptionViolation {
                    name,
                    lhs,
                    rhs,
                }));
            }
        };
        check("sigma>0", raw.sigma, 0.0);
        check("m>0", raw.m, 0.0);
        check("alpha>0", raw.alpha, 0.0);
        check("kappa>0", raw.kappa, 0.0);
        check("c2>0", raw.c2, 0.0);
        check("c1>c2", raw.c1, raw.c2);
        check("rho>0", raw.rho, 0.0);
        check(
            "rho>2(r-g)+sigma^2",
            raw.rho,
            2.0 * (raw.r - raw.g) + raw.sigma * raw.sigma,
        );
        check("lambda>0", raw.lambda, 0.0);
        check("lambda>r-g", raw.lambda, raw.r - raw.g);

        if errs.is_empty() {
            Ok(ModelParams {
                r: raw.r,
                g: raw.g,
                sigma: raw.sigma,
                rho: raw.rho,
                lambda: raw.lambda,
                alpha: raw.alpha,
                kappa: raw.kappa,
                m: raw.m,
                c1: raw.c1,
                c2: raw.c2,
            })
        } else {
            Err(ValidationReport(errs))
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn c1(&self) -> f64 {
        self.c1
    }
    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// Net drift `r - g` of the uncontrolled ratio.
    pub fn net_drift(&self) -> f64 {
        self.r - self.g
    }

    /// `rho - 2(r-g) - sigma^2`, the positive margin that makes the
    /// quadratic running cost integrable for the government.
    pub fn rho_margin(&self) -> f64 {
        self.rho - 2.0 * (self.r - self.g) - self.sigma * self.sigma
    }

    /// `lambda - (r-g)`, the legislator's effective discount gap.
    pub fn lambda_gap(&self) -> f64 {
        self.lambda - (self.r - self.g)
    }

    /// The regime boundary `r - g + alpha/kappa` for the legislator
    /// discount rate.
    pub fn regime_boundary(&self) -> f64 {
        self.r - self.g + self.alpha / self.kappa
    }

    pub fn raw(&self) -> RawParams {
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

    /// Returns a copy with the given legislator discount rate, revalidated.
    pub fn with_lambda(&self, lambda: f64) -> Result<ModelParams, ValidationReport> {
        let mut raw = self.raw();
        raw.lambda = lambda;
        ModelParams::validate(raw)
    }
}

/// Which player's discount rate enters the characteristic quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscountRate {
    Government,
    Legislator,
}

/// Roots of `(sigma^2/2) x (x-1) + (r-g) x - discount = 0`.
///
/// The positive/negative labels are fixed by construction, so downstream
/// formulas cannot accidentally swap them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPair {
    pub pos: f64,
    pub neg: f64,
    pub discount: f64,
}

/// Computes both characteristic roots of the discounted quadratic.
///
/// The larger-magnitude root comes from the sign-adjusted quadratic formula,
/// the other from the Vieta product, which avoids cancellation when `sigma`
/// is small. For the government rate the positive root exceeds 2, which the
/// quadratic-cost margin guarantees; this is asserted here because every
/// downstream coefficient divides by terms like `pos - 2`.
pub fn char_roots(params: &ModelParams, rate: DiscountRate) -> RootPair {
    let discount = match rate {
        DiscountRate::Government => params.rho(),
        DiscountRate::Legislator => params.lambda(),
    };
    let a = 0.5 * params.sigma() * params.sigma();
    let b = params.net_drift() - a;
    let disc = (b * b + 4.0 * a * discount).sqrt();
    let q = -0.5 * (b + b.signum() * disc);
    let (r1, r2) = if b == 0.0 {
        (disc / (2.0 * a), -disc / (2.0 * a))
    } else {
        (q / a, -discount / q)
    };
    let (pos, neg) = if r1 > r2 { (r1, r2) } else { (r2, r1) };
    assert!(
        pos > 0.0 && neg < 0.0,
        "root signs violated: pos={pos}, neg={neg}"
    );
    if rate == DiscountRate::Government {
        assert!(
            pos > 2.0,
            "government positive root must exceed 2 (got {pos})"
        );
    }
    RootPair { pos, neg, discount }
}

/// Double-double refinement of [`char_roots`], used by the extended-precision
/// residual polish in the best-response solvers.
pub(crate) fn char_roots_dd(params: &ModelParams, rate: DiscountRate) -> (Dd, Dd) {
    let discount = match rate {
        DiscountRate::Government => params.rho(),
        DiscountRate::Legislator => params.lambda(),
    };
    let a = Dd::from(0.5) * Dd::from(params.sigma()) * Dd::from(params.sigma());
    let b = Dd::from(params.net_drift()) - a;
    let disc = (b * b + Dd::from(4.0) * a * Dd::from(discount)).sqrt();
    let two_a = a.mul_pwr2(2.0);
    let (r1, r2) = if b.hi >= 0.0 {
        let q = -(b + disc);
        // pos via Vieta from the larger-magnitude root
        ((-Dd::from(discount)).mul_pwr2(2.0) / q, q / two_a)
    } else {
        let q = disc - b;
        (q / two_a, (-Dd::from(discount)).mul_pwr2(2.0) / q)
    };
    (r1, r2)
}

/// Legislator intervention regime, decided by the sign of
/// `lambda - (r - g + alpha/kappa)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTag {
    /// `lambda` below the boundary: a finite debt ceiling is optimal.
    LegislatorIntervenes,
    /// `lambda` above the boundary: laissez-faire is optimal.
    LegislatorAbstains,
    /// `lambda` within tolerance of the boundary; neither case applies and
    /// the condition is surfaced rather than resolved.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub tag: RegimeTag,
    /// `lambda - (r - g + alpha/kappa)` (1/time).
    pub margin: f64,
}

/// Classifies the legislator regime. Margins within
/// `1e-14 * max(1, alpha/kappa)` of zero report [`RegimeTag::Boundary`].
///
/// The tolerance only needs to catch inputs meant to sit exactly on the
/// boundary (the margin itself is computed to a few times 1e-17 here);
/// keeping it this tight leaves the near-boundary reach of the ceiling
/// divergence classifiable.
pub fn classify_regime(params: &ModelParams) -> Regime {
    let margin = params.lambda() - params.regime_boundary();
    let tol = 1e-14 * (params.alpha() / params.kappa()).max(1.0);
    let tag = if margin.abs() <= tol {
        RegimeTag::Boundary
    } else if margin > 0.0 {
        RegimeTag::LegislatorAbstains
    } else {
        RegimeTag::LegislatorIntervenes
    };
    Regime { tag, margin }
}

#[cfg(test)]
pub(crate) fn table_params(lambda: f64) -> ModelParams {
    ModelParams::validate(RawParams {
        r: 0.025,
        g: 0.02,
        sigma: 0.2,
        rho: 0.3,
        lambda,
        alpha: 0.15,
        kappa: 0.6,
        m: 0.6,
        c1: 2.0,
        c2: 1.25,
    })
    .expect("table parameters are valid")
}
