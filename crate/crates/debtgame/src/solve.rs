//! Scalar root bracketing and line-search helpers shared by the
//! best-response and equilibrium solvers.

/// Bisection on `[lo, hi]` assuming `f(lo) < 0 < f(hi)` or the reverse.
///
/// Runs until the bracket width falls below `rel_tol * |mid|` (plus a tiny
/// absolute floor) or 200 iterations, whichever comes first, and returns the
/// midpoint. The caller is responsible for having verified the sign change.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let mut flo = f(lo);
    debug_assert!(flo * f(hi) <= 0.0, "bisect requires a sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= rel_tol * mid.abs().max(1e-300) + f64::MIN_POSITIVE {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Expands `hi` geometrically from `lo` until `f` changes sign or `cap` is
/// exceeded. Returns the bracketing upper endpoint on success.
pub fn grow_bracket(f: impl Fn(f64) -> f64, lo: f64, cap: f64) -> Option<f64> {
    let want_sign = f(lo) > 0.0;
    let mut hi = lo * 2.0;
    while hi <= cap {
        if (f(hi) > 0.0) != want_sign {
            return Some(hi);
        }
        hi *= 2.0;
    }
    None
}

/// Golden-section maximization of `f` on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}
