//! The elementary Askey-Wilson integrand and its closed-form values.
//!
//! For parameters a1..a4 the integrand is
//! `sqrt(1-x^2) / prod_i (1 + a_i^2 - 2 a_i x)` on [-1,1]. Inside the unit
//! disk the integral has the closed form `K`; one parameter outside the disk
//! is handled by pulling out `a^2` and replacing `a -> 1/a`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Detection tolerance for parameters on the unit circle.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// The four Askey-Wilson parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwParams {
    pub a: [Complex64; 4],
}

impl AwParams {
    pub fn new(a1: Complex64, a2: Complex64, a3: Complex64, a4: Complex64) -> Self {
        AwParams { a: [a1, a2, a3, a4] }
    }

    pub fn from_reals(a1: f64, a2: f64, a3: f64, a4: f64) -> Self {
        Self::new(a1.into(), a2.into(), a3.into(), a4.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    Inside,
    OnCircle,
    Outside,
}

fn classify(a: Complex64) -> Region {
    let r = a.norm();
    if (r - 1.0).abs() <= BOUNDARY_TOL {
        Region::OnCircle
    } else if r < 1.0 {
        Region::Inside
    } else {
        Region::Outside
    }
}

/// Circle parameters are admissible only as real +-1, either a single one or
/// the pair (-1, 1).
fn circle_config_allowed(a: &[Complex64; 4]) -> bool {
    let on: Vec<Complex64> = a
        .iter()
        .copied()
        .filter(|&ai| classify(ai) == Region::OnCircle)
        .collect();
    let is_real_pm1 =
        |z: Complex64| z.im.abs() <= BOUNDARY_TOL && (z.re.abs() - 1.0).abs() <= BOUNDARY_TOL;
    match on.len() {
        0 => true,
        1 => is_real_pm1(on[0]),
        2 => is_real_pm1(on[0]) && is_real_pm1(on[1]) && (on[0].re * on[1].re) < 0.0,
        _ => false,
    }
}

/// The integrand: sqrt(1-x^2) / prod (1 + a_i^2 - 2 a_i x).
pub fn f_tilde(x: f64, p: &AwParams) -> Result<Complex64> {
    let mut den = Complex64::new(1.0, 0.0);
    for &ai in &p.a {
        let factor = 1.0 + ai * ai - 2.0 * ai * x;
        if factor.norm() < 1e-13 {
            return Err(Error::PoleOnSupport(format!(
                "factor 1 + a^2 - 2 a x vanishes at x = {x} for a = {ai}"
            )));
        }
        den *= factor;
    }
    Ok((1.0 - x * x).max(0.0).sqrt() / den)
}

/// Closed form for all parameters in the closed unit disk:
/// (pi/2) (1 - a1 a2 a3 a4) / prod_{i<j} (1 - a_i a_j).
///
/// Parameters on the circle are accepted only in the two exceptional
/// configurations (a single real +-1, or the pair (-1, 1)).
pub fn k_closed(p: &AwParams) -> Result<Complex64> {
    if p.a.iter().any(|&ai| classify(ai) == Region::Outside) {
        return Err(Error::Domain(
            "some |a_i| > 1; use k_large (or the general aw_value dispatcher)".into(),
        ));
    }
    if !circle_config_allowed(&p.a) {
        return Err(Error::Domain(
            "parameters on the unit circle are admissible only as a single +-1 or the pair (-1, 1)"
                .into(),
        ));
    }
    let a = &p.a;
    let num = 0.5 * PI * (1.0 - a[0] * a[1] * a[2] * a[3]);
    let mut den = Complex64::new(1.0, 0.0);
    for i in 0..4 {
        for j in (i + 1)..4 {
            den *= 1.0 - a[i] * a[j];
        }
    }
    if den.norm() < 1e-14 {
        return Err(Error::Domain(
            "a product a_i a_j equals 1: the integral diverges".into(),
        ));
    }
    Ok(num / den)
}

/// Closed form when exactly the first parameter lies outside the closed unit
/// disk: K(1/a1, a2, a3, a4) / a1^2, expanded as
/// pi (a1 - a2 a3 a4) / (2 (a1-a2)(a1-a3)(a1-a4)(1-a2 a3)(1-a2 a4)(1-a3 a4)).
pub fn k_large(p: &AwParams) -> Result<Complex64> {
    let a = &p.a;
    if classify(a[0]) != Region::Outside {
        return Err(Error::Domain("k_large requires |a1| > 1".into()));
    }
    for (j, &aj) in a.iter().enumerate().skip(1) {
        if (a[0] - aj).norm() <= 1e-12 * (1.0 + a[0].norm()) {
            return Err(Error::CoincidentParameters(format!(
                "a1 = a{}: the partial fraction form degenerates; perturb by ~1e-8",
                j + 1
            )));
        }
    }
    for &ai in &a[1..] {
        if classify(ai) != Region::Inside {
            return Err(Error::Domain(
                "k_large requires |a2|, |a3|, |a4| < 1 (slot convention: the outside parameter is a1)"
                    .into(),
            ));
        }
    }
    let num = PI * (a[0] - a[1] * a[2] * a[3]);
    let den = 2.0
        * (a[0] - a[1])
        * (a[0] - a[2])
        * (a[0] - a[3])
        * (1.0 - a[1] * a[2])
        * (1.0 - a[1] * a[3])
        * (1.0 - a[2] * a[3]);
    Ok(num / den)
}

/// Value of the integral for any admissible parameter set: every parameter
/// outside the closed unit disk is replaced by its reciprocal while dividing
/// by its square, then the closed form applies.
pub fn aw_value(p: &AwParams) -> Result<Complex64> {
    let mut scale = Complex64::new(1.0, 0.0);
    let mut b = p.a;
    for ai in b.iter_mut() {
        if classify(*ai) == Region::Outside {
            scale *= *ai * *ai;
            *ai = 1.0 / *ai;
        }
    }
    Ok(k_closed(&AwParams { a: b })? / scale)
}
