//! Scalar root bracketing.

/// Outcome of a converged bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: u32,
}

/// Bisection on a function that changes sign over `[lo, hi]`.
///
/// Stops once `|f(x)| <= f_tol` or the bracket has collapsed to the
/// floating-point resolution of its midpoint. Returns `None` when the
/// bracket does not straddle a sign change or `max_iter` is exhausted first.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, f_tol: f64, max_iter: u32) -> Option<Root>
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(Root {
            x: lo,
            residual: 0.0,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Some(Root {
            x: hi,
            residual: 0.0,
            iterations: 0,
        });
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return None;
    }

    for iter in 1..=max_iter {
        let mid = lo + 0.5 * (hi - lo);
        let f_mid = f(mid);
        if f_mid.abs() <= f_tol || mid <= lo || mid >= hi {
            return Some(Root {
                x: mid,
                residual: f_mid,
                iterations: iter,
            });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_unbracketed_interval() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_none());
    }

    #[test]
    fn iteration_cap_is_reported_as_failure() {
        assert!(bisect(|x| x - 0.3, 0.0, 1.0, 0.0, 3).is_none());
    }

    #[test]
    fn endpoint_root() {
        let r = bisect(|x| x, 0.0, 1.0, 1e-12, 10).unwrap();
        assert_eq!(r.x, 0.0);
    }
}
