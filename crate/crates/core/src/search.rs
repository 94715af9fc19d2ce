//! Bracketing root finder and golden-section maximizer on a scalar interval.

/// Bisection on a bracket where `f(inside) > 0` and `f(outside) <= 0`.
/// Returns the boundary point to within `tol`. The bracket may be given in
/// either order.
pub fn bisect_boundary(f: impl Fn(f64) -> f64, mut inside: f64, mut outside: f64, tol: f64) -> f64 {
    debug_assert!(f(inside) > 0.0 && f(outside) <= 0.0);
    while (outside - inside).abs() > tol {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if f(mid) > 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (inside + outside)
}

/// Golden-section search for a maximum of a unimodal `f` on `[lo, hi]`.
/// Returns the final bracket.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        if x1 >= x2 {
            break;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect_boundary(|x| 2.0 - x * x, 0.0, 2.0, 1e-13);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        let r = bisect_boundary(|x| 2.0 - x * x, 1.0, -0.0 + 3.0, 1e-13);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn golden_section_parabola() {
        let (lo, hi) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), -1.0, 2.0, 1e-8);
        assert!(hi - lo <= 1e-8 + 1e-15);
        assert!((0.5 * (lo + hi) - 0.3).abs() < 1e-7);
    }
}
