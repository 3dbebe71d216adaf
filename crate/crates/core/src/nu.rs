//! The two-parameter measure family nu(dy; a1, a2), its moments and
//! H-transform, the convolution identity, and the auxiliary Markov kernels.
//!
//! On [-1,1] the continuous density is `f(y) = (1/k) sqrt(1-y^2) /
//! ((1+a1^2-2a1 y)(1+a2^2-2a2 y))` with `k = pi/(2(1-a1 a2))`. Real
//! parameters outside the unit disk move mass into atoms at `y(a) =
//! (a + 1/a)/2`; parameters at +-1 produce explicit densities with an
//! inverse-square-root edge.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{Atom, MixedMeasure};
use crate::quadrature::{ChebKind, DEFAULT_TOL};

/// Detection tolerance for parameters on the unit circle.
const CIRCLE_TOL: f64 = 1e-9;
/// Tolerance for treating an imaginary part as zero.
const REAL_TOL: f64 = 1e-12;

/// Admissible parameter pair: both real, or complex conjugates, with a real
/// product a1 a2 < 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuParams {
    a1: Complex64,
    a2: Complex64,
}

impl NuParams {
    pub fn new(a1: Complex64, a2: Complex64) -> Result<Self> {
        let real_pair = a1.im.abs() <= REAL_TOL && a2.im.abs() <= REAL_TOL;
        let conj_pair = (a1 - a2.conj()).norm() <= REAL_TOL * (1.0 + a1.norm());
        if !real_pair && !conj_pair {
            return Err(Error::InvalidParams(
                "nu parameters must be both real or complex conjugates".into(),
            ));
        }
        let prod = a1 * a2;
        if prod.im.abs() > 1e-10 * (1.0 + prod.norm()) {
            return Err(Error::InvalidParams("a1 a2 must be real".into()));
        }
        if prod.re >= 1.0 - 1e-12 {
            return Err(Error::InvalidParams(format!(
                "a1 a2 = {} must be < 1",
                prod.re
            )));
        }
        Ok(NuParams { a1, a2 })
    }

    pub fn real(a1: f64, a2: f64) -> Result<Self> {
        Self::new(a1.into(), a2.into())
    }

    /// Conjugate pair (a, conj(a)).
    pub fn conjugate(a: Complex64) -> Result<Self> {
        Self::new(a, a.conj())
    }

    pub fn a1(&self) -> Complex64 {
        self.a1
    }

    pub fn a2(&self) -> Complex64 {
        self.a2
    }

    pub fn is_real_pair(&self) -> bool {
        self.a1.im.abs() <= REAL_TOL && self.a2.im.abs() <= REAL_TOL
    }

    /// a1 a2, which admissibility makes real.
    pub fn product(&self) -> f64 {
        (self.a1 * self.a2).re
    }

    /// a1 + a2, real for both the real and the conjugate case.
    pub fn sum(&self) -> f64 {
        (self.a1 + self.a2).re
    }
}

/// Atom location for a real parameter outside the unit disk.
pub fn atom_location_for(a: f64) -> f64 {
    0.5 * (a + 1.0 / a)
}

/// Atom weight w(a, b) = (a^2 - 1)/(a^2 - a b).
pub fn atom_weight(a: f64, b: f64) -> f64 {
    (a * a - 1.0) / (a * a - a * b)
}

/// Normalizing constant k(a1, a2) = pi / (2 (1 - a1 a2)).
pub fn normalizing_constant(p: &NuParams) -> f64 {
    std::f64::consts::PI / (2.0 * (1.0 - p.product()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Place {
    Inside,
    PlusOne,
    MinusOne,
    Outside,
}

fn place(a: f64) -> Place {
    if (a - 1.0).abs() <= CIRCLE_TOL {
        Place::PlusOne
    } else if (a + 1.0).abs() <= CIRCLE_TOL {
        Place::MinusOne
    } else if a.abs() < 1.0 {
        Place::Inside
    } else {
        Place::Outside
    }
}

/// Build the measure nu(dy; a1, a2).
pub fn nu_build(p: &NuParams) -> Result<MixedMeasure> {
    let k = normalizing_constant(p);
    if !p.is_real_pair() {
        // conjugate pair strictly inside the disk: pure density
        let a = p.a1;
        let smooth = move |y: f64| {
            let f = 1.0 + a * a - 2.0 * a * y;
            1.0 / (k * f.norm_sqr())
        };
        return Ok(MixedMeasure::continuous(-1.0, 1.0, ChebKind::Second, smooth));
    }
    let (r1, r2) = (p.a1.re, p.a2.re);
    let places = (place(r1), place(r2));
    // symmetric in (a1, a2): route the circle parameter (if any) to the front
    let (b, places) = match places {
        (Place::PlusOne, _) | (Place::MinusOne, _) => (r2, places),
        (_, Place::PlusOne) | (_, Place::MinusOne) => (r1, (places.1, places.0)),
        _ => (r2, places),
    };
    match places {
        (Place::PlusOne, Place::MinusOne) | (Place::MinusOne, Place::PlusOne) => {
            // arcsine law 1/(pi sqrt(1-y^2))
            Ok(MixedMeasure::continuous(-1.0, 1.0, ChebKind::First, |_| {
                1.0 / std::f64::consts::PI
            }))
        }
        (Place::PlusOne, other) | (Place::MinusOne, other) => {
            let sign = if matches!(places.0, Place::PlusOne) {
                1.0
            } else {
                -1.0
            };
            // (1 -+ b) / (pi (1 + b^2 - 2 b y)) against the third/fourth-kind weight
            let coeff = (1.0 - sign * b) / std::f64::consts::PI;
            let smooth = move |y: f64| coeff / (1.0 + b * b - 2.0 * b * y);
            let kind = if sign > 0.0 {
                ChebKind::Third
            } else {
                ChebKind::Fourth
            };
            let mut atoms = Vec::new();
            if other == Place::Outside {
                atoms.push(Atom {
                    location: atom_location_for(b),
                    weight: atom_weight(b, sign),
                });
            }
            Ok(MixedMeasure::with_atoms(-1.0, 1.0, kind, smooth, atoms))
        }
        _ => {
            let smooth = move |y: f64| {
                let f1 = 1.0 + r1 * r1 - 2.0 * r1 * y;
                let f2 = 1.0 + r2 * r2 - 2.0 * r2 * y;
                1.0 / (k * f1 * f2)
            };
            let mut atoms = Vec::new();
            if places.0 == Place::Outside {
                atoms.push(Atom {
                    location: atom_location_for(r1),
                    weight: atom_weight(r1, r2),
                });
            }
            if places.1 == Place::Outside {
                atoms.push(Atom {
                    location: atom_location_for(r2),
                    weight: atom_weight(r2, r1),
                });
            }
            Ok(MixedMeasure::with_atoms(
                -1.0,
                1.0,
                ChebKind::Second,
                smooth,
                atoms,
            ))
        }
    }
}

/// Closed-form mean and variance, cross-checked against quadrature+atoms.
pub fn nu_mean_var(p: &NuParams) -> Result<(f64, f64)> {
    let mean = 0.5 * p.sum();
    let var = 0.25 * (1.0 - p.product());
    let m = nu_build(p)?;
    let [_, m1, m2] = m.moments_upto::<3>(DEFAULT_TOL)?;
    let var_num = m2 - m1 * m1;
    if (m1 - mean).abs() > 1e-9 || (var_num - var).abs() > 1e-9 {
        return Err(Error::InvariantViolation(format!(
            "closed-form moments (mean {mean}, var {var}) disagree with quadrature ({m1}, {var_num})"
        )));
    }
    Ok((mean, var))
}

/// H-transform of a measure: integral of (1 + z^2 - 2 z y)^{-1}.
pub fn h_transform(measure: &MixedMeasure, z: Complex64) -> Result<Complex64> {
    measure.h_transform(z, DEFAULT_TOL)
}

/// Closed form of the H-transform of nu(.; a1, a2) for |z| < 1:
/// 1 / ((1 - a1 z)(1 - a2 z)).
pub fn h_closed(p: &NuParams, z: Complex64) -> Complex64 {
    1.0 / ((1.0 - p.a1 * z) * (1.0 - p.a2 * z))
}

/// Parameter pair m (x + sqrt(x^2-1)), m (x - sqrt(x^2-1)): conjugates on a
/// circle of radius |m| for |x| <= 1, a real pair otherwise.
pub fn joukowski_pair(x: f64, m: f64) -> (Complex64, Complex64) {
    if x.abs() <= 1.0 {
        let s = (1.0 - x * x).max(0.0).sqrt();
        let xi = Complex64::new(x, s);
        (m * xi, m * xi.conj())
    } else {
        let s = (x * x - 1.0).sqrt();
        (Complex64::new(m * (x + s), 0.0), Complex64::new(m * (x - s), 0.0))
    }
}

/// Test functions for the convolution identity.
#[derive(Debug, Clone, Copy)]
pub enum TestFn {
    Monomial(u32),
    /// y -> (1 + z^2 - 2 z y)^{-1}
    HKernel(Complex64),
}

impl TestFn {
    fn eval(&self, y: f64) -> Complex64 {
        match *self {
            TestFn::Monomial(k) => Complex64::new(y.powi(k as i32), 0.0),
            TestFn::HKernel(z) => 1.0 / (1.0 + z * z - 2.0 * z * y),
        }
    }
}

/// Default test-function suite: monomials up to degree 8 plus two H-kernels.
pub fn default_test_fns() -> Vec<TestFn> {
    let mut fns: Vec<TestFn> = (0..=8).map(TestFn::Monomial).collect();
    fns.push(TestFn::HKernel(Complex64::new(0.3, 0.0)));
    fns.push(TestFn::HKernel(Complex64::new(0.2, 0.25)));
    fns
}

/// Both sides of the convolution identity
/// nu(U; m a1, m a2) = int nu(U; m(x+sqrt(x^2-1)), m(x-sqrt(x^2-1))) nu(dx; a1, a2)
/// applied to each test function; returns the maximum absolute deviation.
pub fn nu_convolution_check(p: &NuParams, m: f64, fns: &[TestFn]) -> Result<f64> {
    if !(-1.0 < m && m < 1.0) {
        return Err(Error::InvalidParams("convolution scale m must be in (-1,1)".into()));
    }
    let outer = nu_build(p)?;
    let lhs_measure = nu_build(&NuParams::new(m * p.a1, m * p.a2)?)?;
    let mut worst = 0.0f64;
    for f in fns {
        let lhs = lhs_measure.integrate(|y| f.eval(y), DEFAULT_TOL)?;
        let mut inner_err: Option<Error> = None;
        let rhs = outer.integrate(
            |x| {
                let (b1, b2) = joukowski_pair(x, m);
                let inner_val = NuParams::new(b1, b2)
                    .and_then(|q| nu_build(&q))
                    .and_then(|inner| inner.integrate(|y| f.eval(y), DEFAULT_TOL));
                match inner_val {
                    Ok(v) => v,
                    Err(e) => {
                        inner_err = Some(e);
                        Complex64::new(0.0, 0.0)
                    }
                }
            },
            DEFAULT_TOL,
        )?;
        if let Some(e) = inner_err {
            return Err(e);
        }
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Time domain of the auxiliary process: roots C, D (real with CD >= 0 or
/// complex conjugate); times must exceed t_min = C D.
#[derive(Debug, Clone, Copy)]
pub struct AuxTimeDomain {
    c: Complex64,
    d: Complex64,
}

impl AuxTimeDomain {
    pub fn new(c: Complex64, d: Complex64) -> Result<Self> {
        let real_pair = c.im.abs() <= REAL_TOL && d.im.abs() <= REAL_TOL;
        let conj_pair = (c - d.conj()).norm() <= REAL_TOL * (1.0 + c.norm());
        if !real_pair && !conj_pair {
            return Err(Error::InvalidParams(
                "C, D must be both real or complex conjugates".into(),
            ));
        }
        let prod = c * d;
        if prod.im.abs() > 1e-10 * (1.0 + prod.norm()) || prod.re < 0.0 {
            return Err(Error::InvalidParams(
                "C D must be real and nonnegative".into(),
            ));
        }
        Ok(AuxTimeDomain { c, d })
    }

    pub fn from_reals(c: f64, d: f64) -> Result<Self> {
        Self::new(c.into(), d.into())
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    pub fn d(&self) -> Complex64 {
        self.d
    }

    pub fn t_min(&self) -> f64 {
        (self.c * self.d).re
    }
}

/// Marginal of the auxiliary process: nu(dy; C/sqrt(t), D/sqrt(t)) for t > CD.
pub fn mu_marginal(dom: &AuxTimeDomain, t: f64) -> Result<MixedMeasure> {
    if !(t > dom.t_min()) || t <= 0.0 {
        return Err(Error::TimeOrder(format!(
            "marginal time t = {t} must exceed t_min = {}",
            dom.t_min()
        )));
    }
    let rt = t.sqrt();
    nu_build(&NuParams::new(dom.c / rt, dom.d / rt)?)
}

/// Transition kernel of the auxiliary process:
/// nu(dy; sqrt(s/t)(x + sqrt(x^2-1)), sqrt(s/t)(x - sqrt(x^2-1))).
pub fn mu_transition(dom: &AuxTimeDomain, x: f64, s: f64, t: f64) -> Result<MixedMeasure> {
    if !(dom.t_min() <= s && s < t) {
        return Err(Error::TimeOrder(format!(
            "need t_min <= s < t, got t_min = {}, s = {s}, t = {t}",
            dom.t_min()
        )));
    }
    let m = (s / t).sqrt();
    let (b1, b2) = joukowski_pair(x, m);
    nu_build(&NuParams::new(b1, b2)?)
}

/// Recover raw moments m_0..m_k of a compactly supported probability measure
/// on [-1,1] from its H-transform near 0, by contour differentiation at 0 and
/// the triangular relation between Taylor coefficients (mean values of the
/// Chebyshev-U polynomials) and monomial moments.
pub fn moments_from_h(
    h: impl Fn(Complex64) -> Complex64,
    k: usize,
    radius: f64,
) -> Result<Vec<f64>> {
    if k > 12 {
        return Err(Error::IllConditioned(
            "moment recovery beyond order 12 is refused".into(),
        ));
    }
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::InvalidParams("contour radius must be in (0,1)".into()));
    }
    // Taylor coefficients u_n of H at 0 from trapezoid sums on |z| = radius.
    let coeffs = |n_pts: usize| -> Vec<Complex64> {
        let samples: Vec<Complex64> = (0..n_pts)
            .map(|j| {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / n_pts as f64;
                h(Complex64::from_polar(radius, phi))
            })
            .collect();
        (0..=k)
            .map(|n| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &hv) in samples.iter().enumerate() {
                    let phi = 2.0 * std::f64::consts::PI * (j * n % n_pts.max(1)) as f64
                        / n_pts as f64;
                    acc += hv * Complex64::from_polar(radius.powi(-(n as i32)), -phi);
                }
                acc / n_pts as f64
            })
            .collect()
    };
    let mut n_pts = 128usize;
    let mut prev = coeffs(n_pts);
    let u = loop {
        n_pts *= 2;
        let cur = coeffs(n_pts);
        let delta = cur
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if delta <= 1e-12 {
            break cur;
        }
        if n_pts >= 1 << 14 {
            return Err(Error::IllConditioned(format!(
                "H-transform coefficients did not stabilise (delta {delta:.3e}); is H analytic on |z| <= {radius}?"
            )));
        }
        prev = cur;
    };
    for c in &u {
        if c.im.abs() > 1e-9 {
            return Err(Error::InvariantViolation(
                "H-transform Taylor coefficients have a non-real part".into(),
            ));
        }
    }
    // x^n = 2^-n sum_j [C(n,j) - C(n,j-1)] U_{n-2j}(x)
    let binom = |n: usize, j: i64| -> f64 {
        if j < 0 || j as usize > n {
            return 0.0;
        }
        let j = j as usize;
        let mut v = 1.0;
        for i in 0..j {
            v = v * (n - i) as f64 / (i + 1) as f64;
        }
        v
    };
    let mut moments = Vec::with_capacity(k + 1);
    for n in 0..=k {
        let mut m = 0.0;
        for j in 0..=(n / 2) {
            m += (binom(n, j as i64) - binom(n, j as i64 - 1)) * u[n - 2 * j].re;
        }
        moments.push(m / 2f64.powi(n as i32));
    }
    Ok(moments)
}
