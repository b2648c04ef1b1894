//! Tolerant floating-point comparisons.
//!
//! Every inequality check in the crate goes through these helpers with a
//! single global default `EPS`. The semantics are one-sided slack:
//! `geq(x, y)` means `x >= y - tol`, `gt(x, y)` means `x > y + tol`. Strict
//! comparisons therefore imply their weak counterparts at the same
//! tolerance.

/// Default comparison tolerance.
pub const EPS: f64 = 1e-9;

/// `x >= y` up to `tol`: true iff `x >= y - tol`.
#[inline]
pub fn geq(x: f64, y: f64, tol: f64) -> bool {
    x >= y - tol
}

/// `x > y` with margin `tol`: true iff `x > y + tol`.
#[inline]
pub fn gt(x: f64, y: f64, tol: f64) -> bool {
    x > y + tol
}

/// `x == y` up to `tol`.
#[inline]
pub fn approx_eq(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_implies_weak() {
        assert!(gt(1.0, 0.5, EPS));
        assert!(geq(1.0, 0.5, EPS));
        // at the knife edge, weak holds and strict does not
        assert!(geq(1.0, 1.0, EPS));
        assert!(!gt(1.0, 1.0, EPS));
    }
}
