//! Deterministic adaptive Gauss–Kronrod quadrature (G7–K15).
//!
//! Used for the semi-infinite time integrals in the legislator's value
//! functions. Intervals are split worst-error-first with a deterministic
//! tie-break, so identical inputs give bit-identical results.

use thiserror::Error;

/// 15-point Kronrod abscissae on [0, 1] (positive half, last entry 0).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
/// Kronrod weights matching [`XGK`].
const WGK: [f64; 8] = [
    0.022_935_322_010_529_2,
    0.063_092_092_629_978_6,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Embedded 7-point Gauss weights (odd Kronrod abscissae).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and truncation controls for the time integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Absolute tolerance (cost units).
    pub abs_tol: f64,
    /// Relative tolerance.
    pub rel_tol: f64,
    /// Truncation horizon for the semi-infinite integrals (time).
    pub t_max: f64,
    /// Maximum number of interval subdivisions.
    pub max_subdivisions: usize,
}

impl QuadratureSettings {
    pub const DEFAULT_ABS_TOL: f64 = 1e-10;
    pub const DEFAULT_REL_TOL: f64 = 1e-10;
    pub const DEFAULT_MAX_SUBDIVISIONS: usize = 2000;

    /// Default settings for a discount gap `gap > 0`: the integrand tails
    /// decay like `exp(-gap * t)`, so `t_max = max(50, -ln(rel_tol)/gap)`
    /// keeps the truncated mass below the relative tolerance.
    pub fn for_gap(gap: f64) -> QuadratureSettings {
        let rel_tol = Self::DEFAULT_REL_TOL;
        QuadratureSettings {
            abs_tol: Self::DEFAULT_ABS_TOL,
            rel_tol,
            t_max: 50f64.max(-rel_tol.ln() / gap),
            max_subdivisions: Self::DEFAULT_MAX_SUBDIVISIONS,
        }
    }

    /// Same horizon rule with explicit tolerances.
    pub fn with_tolerances(gap: f64, abs_tol: f64, rel_tol: f64) -> QuadratureSettings {
        QuadratureSettings {
            abs_tol,
            rel_tol,
            t_max: 50f64.max(-rel_tol.ln() / gap),
            max_subdivisions: Self::DEFAULT_MAX_SUBDIVISIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature tolerance not met: error estimate {achieved:e} > requested {requested:e} after {subdivisions} subdivisions")]
    ToleranceNotMet {
        achieved: f64,
        requested: f64,
        subdivisions: usize,
    },
    #[error("non-finite integrand value at t={0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Error estimate, including any analytic tail bound added by the caller.
    pub error: f64,
    pub subdivisions: usize,
}

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn gk15(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Segment, QuadError> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite(center));
    }
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = kron.abs();
    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        if !f1.is_finite() || !f2.is_finite() {
            return Err(QuadError::NonFinite(center - x));
        }
        fv[j] = f1;
        fv[14 - j] = f2;
        kron += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kron;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let raw_err = ((kron - gauss) * half).abs();
    let res_asc = res_asc * half.abs();
    let res_abs = res_abs * half.abs();
    let mut err = raw_err;
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    let min_err = 50.0 * f64::EPSILON * res_abs;
    if min_err > err {
        err = min_err;
    }
    Ok(Segment {
        lo,
        hi,
        value: kron * half,
        error: err,
    })
}

/// Adaptively integrates `f` over `[lo, hi]` to the requested tolerances.
pub fn integrate(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadResult, QuadError> {
    let mut segments = vec![gk15(f, lo, hi)?];
    let mut subdivisions = 0;
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        let target = abs_tol.max(rel_tol * total.abs());
        if err <= target {
            return Ok(QuadResult {
                value: total,
                error: err,
                subdivisions,
            });
        }
        if subdivisions >= max_subdivisions {
            return Err(QuadError::ToleranceNotMet {
                achieved: err,
                requested: target,
                subdivisions,
            });
        }
        // Deterministic worst-first split: largest error, ties by left end.
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| {
                a.error
                    .partial_cmp(&b.error)
                    .unwrap()
                    .then(b.lo.partial_cmp(&a.lo).unwrap())
            })
            .expect("segment list is never empty");
        let seg = segments.swap_remove(idx);
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            // Interval at floating-point resolution: keep it and accept its
            // error contribution; further splitting cannot help.
            let mut kept = seg;
            kept.error = 0.0;
            segments.push(kept);
            continue;
        }
        segments.push(gk15(f, seg.lo, mid)?);
        segments.push(gk15(f, mid, seg.hi)?);
        subdivisions += 1;
    }
}
