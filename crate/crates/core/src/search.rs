//! One-dimensional searches used by the rate and power-allocation solvers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub iterations: u32,
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `x_tol`. The returned point is
/// the best evaluated abscissa, so `value` is always an actual evaluation.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, x_tol: f64) -> Maximum {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while b - a > x_tol {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        Maximum { x: c, value: fc, iterations }
    } else {
        Maximum { x: d, value: fd, iterations }
    }
}

/// Bisection for the crossing of an increasing function through zero.
///
/// Requires `f(lo) <= 0 < f(hi)`; returns the midpoint of the final bracket
/// once it is narrower than `x_tol`.
pub fn bisect_increasing<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> f64 {
    while hi - lo > x_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let m = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-9);
        assert!((m.x - 0.3).abs() < 1e-8);
        assert!(m.iterations > 30);
    }

    #[test]
    fn golden_handles_boundary_peak() {
        let m = golden_section_max(|x| x, 0.0, 1.0, 1e-8);
        assert!(m.x > 1.0 - 1e-7);
    }

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect_increasing(|x| x * x - 2.0, 0.0, 2.0, 1e-12);
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-11);
    }
}
