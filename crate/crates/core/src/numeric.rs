//! Scalar root finding and line search helpers shared by the solvers.

use crate::error::{Error, Result};

/// Outcome of a bracketed bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracketed {
    pub root: f64,
    /// Final bracket; the sign of the function differs at the two ends.
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

/// Bisection on `[lo, hi]` until the bracket is narrower than `abs_tol`.
///
/// Requires `f(lo)` and `f(hi)` to have opposite signs (or one of them to be
/// zero, in which case that endpoint is returned).
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, abs_tol: f64) -> Result<Bracketed>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(Bracketed { root: a, lo: a, hi: a, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Bracketed { root: b, lo: b, hi: b, iterations: 0 });
    }
    if fa.is_nan() || fb.is_nan() || (fa > 0.0) == (fb > 0.0) {
        return Err(Error::NoSignChange { lo: a, hi: b });
    }
    let mut iterations = 0;
    // 200 halvings exhaust any f64 interval.
    while b - a > abs_tol && iterations < 200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        iterations += 1;
        if fm == 0.0 {
            return Ok(Bracketed { root: mid, lo: mid, hi: mid, iterations });
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(Bracketed { root: 0.5 * (a + b), lo: a, hi: b, iterations })
}

/// Result of a one-dimensional maximisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub arg: f64,
    pub value: f64,
    pub evaluations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
///
/// Returns the best point evaluated, which for a unimodal `f` lies within
/// `abs_tol` of the true maximiser.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, abs_tol: f64) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut best = Maximum { arg: a, value: f64::NEG_INFINITY, evaluations: 0 };
    let mut probe = |x: f64, best: &mut Maximum| {
        let v = f(x);
        best.evaluations += 1;
        if v > best.value {
            best.arg = x;
            best.value = v;
        }
        v
    };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = probe(c, &mut best);
    let mut fd = probe(d, &mut best);
    while b - a > abs_tol && best.evaluations < 400 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = probe(c, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = probe(d, &mut best);
        }
    }
    best
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |i| if i + 1 == n && n > 1 { hi } else { lo + step * i as f64 })
}
