//! Scalar root finding for monotone functions.

use crate::error::{Error, Result};

/// Grows a bracket geometrically from `start` until `f` changes sign.
/// `f` is assumed decreasing.
pub fn bracket_decreasing(f: &mut impl FnMut(f64) -> Result<f64>, start: f64, step: f64) -> Result<(f64, f64, f64, f64)> {
    let f0 = f(start)?;
    if f0 == 0.0 {
        return Ok((start, start, f0, f0));
    }
    let dir = if f0 > 0.0 { 1.0 } else { -1.0 };
    let (mut a, mut fa) = (start, f0);
    let mut h = step;
    for _ in 0..200 {
        let b = start + dir * h;
        let fb = f(b)?;
        if fb.signum() != f0.signum() || fb == 0.0 {
            return Ok(if dir > 0.0 { (a, b, fa, fb) } else { (b, a, fb, fa) });
        }
        a = b;
        fa = fb;
        h *= 2.0;
    }
    Err(Error::BracketFailure { lo: start.min(a), hi: start.max(a) })
}

/// Secant steps inside `[lo, hi]` with bisection whenever the secant step
/// leaves the bracket or fails to halve it. Stops when `|f| ≤ ftol`.
pub fn secant_bisect(
    f: &mut impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    mut fhi: f64,
    ftol: f64,
) -> Result<(f64, usize)> {
    if flo.signum() == fhi.signum() && flo != 0.0 && fhi != 0.0 {
        return Err(Error::BracketFailure { lo, hi });
    }
    if flo == 0.0 {
        return Ok((lo, 0));
    }
    if fhi == 0.0 {
        return Ok((hi, 0));
    }
    let mut width = hi - lo;
    for it in 1..=200 {
        let secant = hi - fhi * (hi - lo) / (fhi - flo);
        let mid = 0.5 * (lo + hi);
        let x = if secant > lo && secant < hi && (hi - lo) < 0.75 * width { secant } else { mid };
        width = hi - lo;
        let fx = f(x)?;
        if fx.abs() <= ftol || hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return Ok((x, it));
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
    }
    Err(Error::NoConvergence { iterations: 200, residual: flo.abs().min(fhi.abs()) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_golden_root() {
        let mut f = |p: f64| Ok((-p).exp() + (-2.0 * p).exp() - 1.0);
        let (lo, hi, flo, fhi) = bracket_decreasing(&mut f, 0.0, 0.5).unwrap();
        let (x, _) = secant_bisect(&mut f, lo, hi, flo, fhi, 1e-15).unwrap();
        assert!((x - ((1.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-14);
    }
}
