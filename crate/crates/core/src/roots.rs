//! Bracketing root finder.

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 400;

/// Bisection on `[lo, hi]` until the bracket is narrower than `rel_tol · |mid|`.
///
/// `f(lo)` and `f(hi)` must differ in sign (or one of them be zero).
/// Returns the bracket midpoint.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::NotFound(format!(
            "no sign change on [{lo}, {hi}] (f = {f_lo}, {f_hi})"
        )));
    }
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs() || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_of_two() {
        let r = bisect(|x| x * x - 2.0, 1.0, 2.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn reversed_bracket_and_exact_endpoint() {
        let r = bisect(|x| x - 3.0, 5.0, 1.0, 1e-12).unwrap();
        assert!((r - 3.0).abs() < 1e-11);
        assert_eq!(bisect(|x| x - 1.0, 1.0, 2.0, 1e-9).unwrap(), 1.0);
    }

    #[test]
    fn no_bracket() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-9),
            Err(Error::NotFound(_))
        ));
    }
}
