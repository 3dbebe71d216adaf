//! Deterministic integration backends.
//!
//! Gauss-Chebyshev rules for the four classical endpoint weights on [-1,1]
//! (the second kind, weight sqrt(1-x^2), is the workhorse; first/third/fourth
//! kinds cover densities with inverse-square-root edges), adaptive
//! node-doubling until two successive estimates agree, and spectrally
//! accurate trapezoidal sums on circles in the complex plane.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default agreement tolerance for node-doubling.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default cap on the rule order; override with the `FM_MAX_QUAD_ORDER` env var.
pub const DEFAULT_MAX_ORDER: usize = 65536;
/// Starting order for adaptive doubling.
const START_ORDER: usize = 32;
/// Default number of contour points; doubled on non-convergence.
pub const DEFAULT_CONTOUR_POINTS: usize = 512;
/// Cap on contour points.
pub const MAX_CONTOUR_POINTS: usize = 1 << 17;

/// Order cap honoring the `FM_MAX_QUAD_ORDER` override.
pub fn max_quad_order() -> usize {
    std::env::var("FM_MAX_QUAD_ORDER")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= START_ORDER)
        .unwrap_or(DEFAULT_MAX_ORDER)
}

/// The four Chebyshev weights on (-1,1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChebKind {
    /// 1/sqrt(1-x^2)
    First,
    /// sqrt(1-x^2)
    Second,
    /// sqrt((1+x)/(1-x)), singular at +1
    Third,
    /// sqrt((1-x)/(1+x)), singular at -1
    Fourth,
}

impl ChebKind {
    /// Weight function value at interior u.
    pub fn weight(self, u: f64) -> f64 {
        match self {
            ChebKind::First => 1.0 / (1.0 - u * u).sqrt(),
            ChebKind::Second => (1.0 - u * u).sqrt(),
            ChebKind::Third => ((1.0 + u) / (1.0 - u)).sqrt(),
            ChebKind::Fourth => ((1.0 - u) / (1.0 + u)).sqrt(),
        }
    }
}

/// A Gauss-Chebyshev rule: nodes strictly increasing in (-1,1), positive weights.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadRule {
    /// Gauss rule of the given kind and order (number of nodes).
    pub fn new(kind: ChebKind, order: usize) -> Self {
        assert!(order >= 1, "rule order must be positive");
        let n = order;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        match kind {
            ChebKind::Second => {
                // x_j = cos(j pi/(n+1)), w_j = pi/(n+1) sin^2(j pi/(n+1));
                // exact for poly degree <= 2n-1 against sqrt(1-x^2).
                for j in (1..=n).rev() {
                    let phi = j as f64 * PI / (n as f64 + 1.0);
                    nodes.push(phi.cos());
                    weights.push(PI / (n as f64 + 1.0) * phi.sin().powi(2));
                }
            }
            ChebKind::First => {
                for j in (1..=n).rev() {
                    let phi = (2.0 * j as f64 - 1.0) * PI / (2.0 * n as f64);
                    nodes.push(phi.cos());
                    weights.push(PI / n as f64);
                }
            }
            ChebKind::Third => {
                // roots of V_n: cos((2j-1) pi/(2n+1)); w_j = 2 pi (1+x_j)/(2n+1)
                for j in (1..=n).rev() {
                    let phi = (2.0 * j as f64 - 1.0) * PI / (2.0 * n as f64 + 1.0);
                    let x = phi.cos();
                    nodes.push(x);
                    weights.push(2.0 * PI * (1.0 + x) / (2.0 * n as f64 + 1.0));
                }
            }
            ChebKind::Fourth => {
                // mirror image of the third-kind rule
                let third = QuadRule::new(ChebKind::Third, n);
                for j in (0..n).rev() {
                    nodes.push(-third.nodes[j]);
                    weights.push(third.weights[j]);
                }
            }
        }
        QuadRule {
            nodes,
            weights,
            order: n,
        }
    }

    /// Apply the rule: sum of w_j * g(x_j).
    pub fn apply<T: QuadScalar>(&self, g: &mut impl FnMut(f64) -> T) -> T {
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.scaled_add(w, &g(x));
        }
        acc
    }
}

/// Scalar-like values the adaptive integrator can accumulate: reals,
/// complex values, and fixed-size arrays of reals (vector integrands).
pub trait QuadScalar: Clone {
    fn zero() -> Self;
    fn scaled_add(&mut self, w: f64, v: &Self);
    /// Max-norm distance used for the doubling convergence test.
    fn dist(&self, other: &Self) -> f64;
    /// Max-norm of the value; the convergence test is
    /// `dist <= tol * (1 + magnitude)` so large integrands are not pushed
    /// below their floating-point noise floor.
    fn magnitude(&self) -> f64;
}

impl QuadScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn scaled_add(&mut self, w: f64, v: &Self) {
        *self += w * v;
    }
    fn dist(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn scaled_add(&mut self, w: f64, v: &Self) {
        *self += w * v;
    }
    fn dist(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl<const N: usize> QuadScalar for [f64; N] {
    fn zero() -> Self {
        [0.0; N]
    }
    fn scaled_add(&mut self, w: f64, v: &Self) {
        for (a, b) in self.iter_mut().zip(v) {
            *a += w * b;
        }
    }
    fn dist(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
    fn magnitude(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Integrate g(x) * weight(kind, x) over [-1,1], doubling the order until two
/// successive estimates agree within tol.
pub fn integrate_weighted<T: QuadScalar>(
    kind: ChebKind,
    mut g: impl FnMut(f64) -> T,
    tol: f64,
) -> Result<T> {
    assert!(tol > 0.0, "tolerance must be positive");
    let cap = max_quad_order();
    let mut order = START_ORDER;
    let mut prev = QuadRule::new(kind, order).apply(&mut g);
    let mut delta = f64::INFINITY;
    while order <= cap {
        order *= 2;
        let cur = QuadRule::new(kind, order).apply(&mut g);
        delta = cur.dist(&prev);
        if delta <= tol * (1.0 + cur.magnitude()) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNonConvergence {
        delta,
        tol,
        order: order / 2,
    })
}

/// Integrate g(x) * sqrt(1-x^2) over [-1,1] to within tol.
pub fn integrate_sqrt_weight(g: impl FnMut(f64) -> f64, tol: f64) -> Result<f64> {
    integrate_weighted(ChebKind::Second, g, tol)
}

/// Complex-valued version of [`integrate_sqrt_weight`].
pub fn integrate_sqrt_weight_complex(
    g: impl FnMut(f64) -> Complex64,
    tol: f64,
) -> Result<Complex64> {
    integrate_weighted(ChebKind::Second, g, tol)
}

/// A circle in the complex plane for normalized contour integrals.
#[derive(Debug, Clone, Copy)]
pub struct ContourSpec {
    pub center: Complex64,
    pub radius: f64,
    /// Starting point count; a power of two, at least 8.
    pub num_points: usize,
}

impl ContourSpec {
    pub fn new(center: Complex64, radius: f64, num_points: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParams("contour radius must be positive".into()));
        }
        if num_points < 8 || !num_points.is_power_of_two() {
            return Err(Error::InvalidParams(
                "contour num_points must be a power of two, at least 8".into(),
            ));
        }
        Ok(ContourSpec {
            center,
            radius,
            num_points,
        })
    }

    pub fn circle(radius: f64, num_points: usize) -> Result<Self> {
        Self::new(Complex64::new(0.0, 0.0), radius, num_points)
    }
}

fn contour_sum(h: &mut impl FnMut(Complex64) -> Complex64, spec: &ContourSpec, n: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let phi = 2.0 * PI * j as f64 / n as f64;
        let offset = Complex64::from_polar(spec.radius, phi);
        acc += h(spec.center + offset) * offset;
    }
    acc / n as f64
}

/// (1/2 pi i) times the contour integral of h over the circle, by equispaced
/// trapezoid sums with point doubling until agreement within tol.
pub fn contour_integral(
    mut h: impl FnMut(Complex64) -> Complex64,
    spec: &ContourSpec,
    tol: f64,
) -> Result<Complex64> {
    let mut n = spec.num_points.max(8);
    let mut prev = contour_sum(&mut h, spec, n);
    let mut delta = f64::INFINITY;
    while n <= MAX_CONTOUR_POINTS {
        n *= 2;
        let cur = contour_sum(&mut h, spec, n);
        delta = cur.dist(&prev);
        if delta <= tol * (1.0 + cur.magnitude()) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::ContourNonConvergence {
        radius: spec.radius,
        delta,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn constant_integrand_gives_half_pi() {
        let q = integrate_sqrt_weight(|_| 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(q, PI / 2.0, epsilon = 1e-13);
    }

    #[test]
    fn odd_integrand_gives_zero() {
        let q = integrate_sqrt_weight(|x| x, 1e-12).unwrap();
        assert_abs_diff_eq!(q, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rational_integrand_matches_closed_form() {
        // 1/(1.25 - x)^2 against sqrt(1-x^2): K(0.5, 0.5, 0, 0) rescaled.
        // Each factor is 1 + a^2 - 2 a x = 2a (y(a) - x) with y(0.5) = 1.25.
        let q = integrate_sqrt_weight(|x| 1.0 / ((1.25 - x) * (1.25 - x)), 1e-12).unwrap();
        let expected = 2.0 * PI / 3.0;
        assert_abs_diff_eq!(q, expected, epsilon = 1e-11);
    }

    #[test]
    fn rule_mass_per_kind() {
        // total weight = integral of the weight itself
        for (kind, mass) in [
            (ChebKind::First, PI),
            (ChebKind::Second, PI / 2.0),
            (ChebKind::Third, PI),
            (ChebKind::Fourth, PI),
        ] {
            let r = QuadRule::new(kind, 64);
            let total: f64 = r.weights.iter().sum();
            assert_abs_diff_eq!(total, mass, epsilon = 1e-13);
        }
    }

    #[test]
    fn nodes_strictly_increasing_in_open_interval() {
        for kind in [ChebKind::First, ChebKind::Second, ChebKind::Third, ChebKind::Fourth] {
            let r = QuadRule::new(kind, 33);
            for w in r.nodes.windows(2) {
                assert!(w[0] < w[1]);
            }
            assert!(r.nodes[0] > -1.0 && *r.nodes.last().unwrap() < 1.0);
            assert!(r.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn pole_on_support_fails_to_converge() {
        // integrand with a genuine pole inside (-1,1)
        let r = integrate_sqrt_weight(|x| 1.0 / (x - 0.33), 1e-10);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }

    #[test]
    fn contour_trivials() {
        let unit = ContourSpec::circle(1.0, 64).unwrap();
        let one = contour_integral(|z| 1.0 / z, &unit, 1e-13).unwrap();
        assert_abs_diff_eq!(one.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(one.im, 0.0, epsilon = 1e-12);

        let zero = contour_integral(|_| Complex64::new(1.0, 0.0), &unit, 1e-13).unwrap();
        assert!(zero.norm() < 1e-13);

        let shifted =
            contour_integral(|z| 1.0 / (z - Complex64::new(0.3, 0.0)), &unit, 1e-13).unwrap();
        assert_abs_diff_eq!(shifted.re, 1.0, epsilon = 1e-11);
    }

    #[test]
    fn contour_rejects_bad_spec() {
        assert!(ContourSpec::circle(0.0, 64).is_err());
        assert!(ContourSpec::circle(1.0, 24).is_err());
        assert!(ContourSpec::circle(1.0, 4).is_err());
    }

    #[test]
    fn vector_integrand_matches_scalar_runs() {
        let v: [f64; 3] = integrate_weighted(ChebKind::Second, |x| [1.0, x, x * x], 1e-12).unwrap();
        assert_abs_diff_eq!(v[0], PI / 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(v[1], 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(v[2], PI / 8.0, epsilon = 1e-13);
    }

    fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Moments of sqrt(1-x^2): 0 for odd k, pi/2 * Catalan(k/2)/2^k for even k.
    fn sqrt_weight_moment(k: usize) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        let m = k / 2;
        let mut catalan = 1.0;
        for i in 0..m {
            catalan = catalan * 2.0 * (2.0 * i as f64 + 1.0) / (i as f64 + 2.0);
        }
        PI / 2.0 * catalan / 2f64.powi(k as i32)
    }

    proptest! {
        // Gauss exactness: degree <= 2*order - 1 polynomials integrate exactly.
        #[test]
        fn gauss_exactness_second_kind(
            order in 2usize..40,
            coeffs in prop::collection::vec(-3.0..3.0f64, 1..8)
        ) {
            prop_assume!(coeffs.len() <= 2 * order);
            let rule = QuadRule::new(ChebKind::Second, order);
            let got = rule.apply(&mut |x| poly_eval(&coeffs, x));
            let want: f64 = coeffs.iter().enumerate()
                .map(|(k, &c)| c * sqrt_weight_moment(k))
                .sum();
            let scale = 1.0 + want.abs();
            prop_assert!((got - want).abs() <= 1e-13 * scale);
        }

        // Contour integral of a polynomial vanishes; z^n/z^{n+1} integrates to 1.
        #[test]
        fn contour_polynomials_vanish(deg in 0usize..6, n in 1usize..6) {
            let spec = ContourSpec::circle(1.3, 64).unwrap();
            let p = contour_integral(|z| z.powu(deg as u32), &spec, 1e-13).unwrap();
            prop_assert!(p.norm() < 1e-12);
            let m = contour_integral(|z| z.powu(n as u32) / z.powu(n as u32 + 1), &spec, 1e-13).unwrap();
            prop_assert!((m - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }

        // Doubling a converged value never moves it by more than the
        // (magnitude-scaled) tolerance.
        #[test]
        fn doubling_stability(a in -0.8..0.8f64) {
            let g = |x: f64| 1.0 / (1.0 + a * a - 2.0 * a * x);
            let tol = 1e-10;
            let q1 = integrate_sqrt_weight(g, tol).unwrap();
            let q2 = integrate_sqrt_weight(g, tol * 0.01).unwrap();
            prop_assert!((q1 - q2).abs() <= tol * (1.0 + q1.abs()));
        }
    }
}
