//! Adaptive Gauss–Legendre quadrature with interval bisection.
//!
//! A panel is accepted when the 10-point rule on the whole panel agrees with
//! the sum of the rule applied to both halves. The absolute tolerance is
//! derived once from a coarse estimate of the full integral, so the
//! requested tolerance is relative to the magnitude of the result.

use std::cell::Cell;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_DEPTH: u32 = 40;

const RULE_ORDER: usize = 10;
const COARSE_PANELS: usize = 8;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(RULE_ORDER))
}

fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * rule()
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

impl Quadrature {
    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let width = (b - a) / COARSE_PANELS as f64;
        let panels: Vec<(f64, f64, f64)> = (0..COARSE_PANELS)
            .map(|k| {
                let lo = a + width * k as f64;
                let hi = if k + 1 == COARSE_PANELS { b } else { lo + width };
                (lo, hi, fixed(&f, lo, hi))
            })
            .collect();
        let coarse: f64 = panels.iter().map(|p| p.2).sum();
        let scale = panels.iter().map(|p| p.2.abs()).sum::<f64>();
        let abs_tol = (self.rel_tol * scale).max(f64::MIN_POSITIVE);

        let unresolved = Cell::new(0.0f64);
        let mut total = 0.0;
        for &(lo, hi, whole) in &panels {
            total += self.refine(&f, lo, hi, whole, abs_tol / COARSE_PANELS as f64, 0, &unresolved);
        }
        let denom = total.abs().max(coarse.abs()).max(f64::MIN_POSITIVE);
        if unresolved.get() > self.rel_tol * denom {
            return Err(Error::Quadrature {
                achieved: unresolved.get() / denom,
                max_depth: self.max_depth,
            });
        }
        Ok(total)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        unresolved: &Cell<f64>,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = fixed(f, a, m);
        let right = fixed(f, m, b);
        let err = (left + right - whole).abs();
        // Below this the difference is rounding noise.
        let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
        if err <= tol.max(floor) {
            return left + right;
        }
        if depth + 1 >= self.max_depth || m <= a || m >= b {
            unresolved.set(unresolved.get() + err);
            return left + right;
        }
        self.refine(f, a, m, left, 0.5 * tol, depth + 1, unresolved)
            + self.refine(f, m, b, right, 0.5 * tol, depth + 1, unresolved)
    }

    /// Integrates `f(x, y)` over the rectangle `[x0, x1] × [y0, y1]` as an
    /// iterated integral, each direction adaptive.
    pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
        &self,
        f: F,
        (x0, x1): (f64, f64),
        (y0, y1): (f64, f64),
    ) -> Result<f64> {
        let inner_failure: Cell<Option<Error>> = Cell::new(None);
        let outer = self.integrate(
            |x| match self.integrate(|y| f(x, y), y0, y1) {
                Ok(v) => v,
                Err(e) => {
                    inner_failure.set(Some(e));
                    0.0
                }
            },
            x0,
            x1,
        )?;
        match inner_failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(outer),
        }
    }
}

/// Integrates with the default tolerance and depth.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    Quadrature::default().integrate(f, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_degree_19() {
        let r = gauss_legendre(10);
        let weight_sum: f64 = r.iter().map(|p| p.1).sum();
        assert!((weight_sum - 2.0).abs() < 1e-14);
        // ∫_{-1}^{1} x^18 dx = 2/19
        let v: f64 = r.iter().map(|&(x, w)| w * x.powi(18)).sum();
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
        let odd: f64 = r.iter().map(|&(x, w)| w * x.powi(19)).sum();
        assert!(odd.abs() < 1e-14);
    }

    #[test]
    fn smooth_integrals() {
        let v = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate(|x: f64| 1.0 / (1.0 + 25.0 * x * x), -1.0, 1.0).unwrap();
        let exact = 2.0 * 5.0f64.atan() / 5.0;
        assert!((v - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn zero_width_and_zero_integrand() {
        assert_eq!(integrate(|x| x, 3.0, 3.0).unwrap(), 0.0);
        assert_eq!(integrate(|_| 0.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn tight_depth_limit_reports_failure() {
        let q = Quadrature {
            rel_tol: 1e-14,
            max_depth: 1,
        };
        // sqrt has an unbounded derivative at 0; one level cannot resolve it.
        match q.integrate(|x: f64| x.sqrt(), 0.0, 1.0) {
            Err(Error::Quadrature { achieved, .. }) => assert!(achieved > 1e-14),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn rectangle() {
        let v = Quadrature::default()
            .integrate_2d(|x, y| x * y * y, (0.0, 2.0), (0.0, 3.0))
            .unwrap();
        assert!((v - 18.0).abs() < 1e-10);
    }
}
