//! Bracketing bisection for monotone scalar equations.

use crate::error::{Error, Result};

const MAX_ITER: usize = 2_000;

/// Finds a root of `f` on `[lo, hi]` by bisection.
///
/// `f(lo)` and `f(hi)` must have opposite signs (or one of them be zero).
/// Iterates until the bracket can no longer be split in `f64` or its width
/// drops below `xtol`.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.is_nan() || fhi.is_nan() || flo.signum() == fhi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    for _ in 0..MAX_ITER {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi || hi - lo <= xtol {
            break;
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + 0.5 * (hi - lo))
}

/// Expands `hi` geometrically (doubling) until `f(hi)` has the opposite sign
/// of `f(lo)`.
pub fn expand_upper<F>(f: &mut F, lo: f64, mut hi: f64, max_doublings: u32) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let slo = f(lo).signum();
    for _ in 0..max_doublings {
        let v = f(hi);
        if v == 0.0 || v.signum() != slo {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(Error::NoSignChange { lo, hi })
}
