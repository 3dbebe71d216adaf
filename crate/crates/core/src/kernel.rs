//! The free-Meixner Markov family: moving atom locations, transition
//! measures in closed form, marginals, and support geometry.
//!
//! The continuous component of P_{s,t}(x, dy) has density
//! `(t-s) sqrt(4(t+tau) - (y-theta)^2) / (2 pi d(y))` on
//! `[theta - 2 sqrt(t+tau), theta + 2 sqrt(t+tau)]`, where `d` is a quadratic
//! in y. A single atom can ride along the moving point `a_*(t)` and dies at a
//! finite extinction time.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measure::{Atom, MixedMeasure};
use crate::quadrature::ChebKind;

/// Relative tolerance for detecting the atom state x = a_*(s).
const ATOM_STATE_TOL: f64 = 1e-9;
/// Relative tolerance for detecting a denominator root at a support edge.
const EDGE_ROOT_TOL: f64 = 1e-9;

/// Process parameters (theta, tau) with tau >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessParams {
    theta: f64,
    tau: f64,
}

impl ProcessParams {
    pub fn new(theta: f64, tau: f64) -> Result<Self> {
        if !theta.is_finite() || !tau.is_finite() {
            return Err(Error::InvalidParams("theta, tau must be finite".into()));
        }
        if tau < 0.0 {
            return Err(Error::InvalidParams(format!("tau = {tau} must be >= 0")));
        }
        Ok(ProcessParams { theta, tau })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Roots C, D of z^2 + theta z + tau = 0, so C D = tau and C + D = -theta.
    pub fn roots(&self) -> (Complex64, Complex64) {
        let disc = self.theta * self.theta - 4.0 * self.tau;
        if disc >= 0.0 {
            let s = disc.sqrt();
            (
                Complex64::new(0.5 * (-self.theta + s), 0.0),
                Complex64::new(0.5 * (-self.theta - s), 0.0),
            )
        } else {
            let s = (-disc).sqrt();
            (
                Complex64::new(-0.5 * self.theta, 0.5 * s),
                Complex64::new(-0.5 * self.theta, -0.5 * s),
            )
        }
    }
}

/// The moving point a_*(t) where the discrete component can sit.
pub fn atom_location(p: &ProcessParams, t: f64) -> Option<f64> {
    let (theta, tau) = (p.theta, p.tau);
    if tau == 0.0 {
        if theta != 0.0 {
            Some(-t / theta)
        } else {
            None
        }
    } else {
        let disc = theta * theta - 4.0 * tau;
        if theta == 0.0 || disc < 0.0 {
            None
        } else if theta > 0.0 {
            Some(-t * (theta - disc.sqrt()) / (2.0 * tau))
        } else {
            Some(-t * (theta + disc.sqrt()) / (2.0 * tau))
        }
    }
}

fn is_atom_state(p: &ProcessParams, s: f64, x: f64) -> bool {
    match atom_location(p, s) {
        Some(a) => (x - a).abs() <= ATOM_STATE_TOL * (1.0 + a.abs()),
        None => None::<f64>.is_some(),
    }
}

/// Discrete component of P_{s,t}(x, dy): present only when x sits at a_*(s)
/// and the atom has not yet died.
pub fn transition_atom(p: &ProcessParams, s: f64, t: f64, x: f64) -> Result<Option<Atom>> {
    check_times(s, t)?;
    if !is_atom_state(p, s, x) {
        return Ok(None);
    }
    let (theta, tau) = (p.theta, p.tau);
    if tau == 0.0 && theta != 0.0 {
        let th2 = theta * theta;
        let parent = 1.0 - s / th2;
        if parent <= 0.0 {
            return Err(Error::NotAtomState(format!(
                "x = a_*(s) but s = {s} >= theta^2 = {th2}: the atom is already extinct"
            )));
        }
        let w = (1.0 - t / th2).max(0.0) / parent;
        if w <= 0.0 {
            return Ok(None);
        }
        return Ok(Some(Atom {
            location: atom_location(p, t).expect("tau = 0, theta != 0 has an atom point"),
            weight: w,
        }));
    }
    let disc = theta * theta - 4.0 * tau;
    if tau > 0.0 && disc > 0.0 {
        // rate kappa = (|theta| - sqrt(disc)) / sqrt(disc), weight
        // (1 - t kappa / (2 tau))^+ / (1 - s kappa / (2 tau))
        let kappa = (theta.abs() - disc.sqrt()) / disc.sqrt();
        let parent = 1.0 - s * kappa / (2.0 * tau);
        if parent <= 0.0 {
            return Err(Error::NotAtomState(format!(
                "x = a_*(s) but the atom is extinct at s = {s} (extinction time {})",
                2.0 * tau / kappa
            )));
        }
        let w = (1.0 - t * kappa / (2.0 * tau)).max(0.0) / parent;
        if w <= 0.0 {
            return Ok(None);
        }
        return Ok(Some(Atom {
            location: atom_location(p, t).expect("disc > 0 has an atom point"),
            weight: w,
        }));
    }
    Ok(None)
}

/// Atom of the marginal P_{0,t}(0, dy), if alive.
pub fn marginal_atom(p: &ProcessParams, t: f64) -> Option<Atom> {
    if t <= 0.0 {
        return None;
    }
    transition_atom(p, 0.0, t, 0.0).ok().flatten()
}

fn check_times(s: f64, t: f64) -> Result<()> {
    if !(0.0 <= s && s < t) {
        return Err(Error::TimeOrder(format!("need 0 <= s < t, got s = {s}, t = {t}")));
    }
    Ok(())
}

/// Interval part of the support of X_t.
pub fn support_interval(p: &ProcessParams, t: f64) -> (f64, f64) {
    let half = 2.0 * (t + p.tau).sqrt();
    (p.theta - half, p.theta + half)
}

/// Whether x lies in supp(X_t) (interval, or the live marginal atom point).
pub fn in_support(p: &ProcessParams, t: f64, x: f64) -> bool {
    let (lo, hi) = support_interval(p, t);
    let tol = 1e-9 * (1.0 + hi - lo);
    if x >= lo - tol && x <= hi + tol {
        return true;
    }
    marginal_atom(p, t)
        .map(|a| (x - a.location).abs() <= ATOM_STATE_TOL * (1.0 + a.location.abs()))
        .unwrap_or(false)
}

/// Radius of the disk centered at theta containing supp(X_t).
pub fn support_radius(p: &ProcessParams, t: f64) -> f64 {
    let (theta, tau) = (p.theta, p.tau);
    let base = 2.0 * (t + tau).sqrt();
    if marginal_atom(p, t).is_none() {
        return base;
    }
    if tau == 0.0 {
        base.max((theta + t / theta).abs())
    } else {
        let disc = theta * theta - 4.0 * tau;
        base.max(((t + 2.0 * tau) * theta.abs() + t * disc.sqrt()) / (2.0 * tau))
    }
}

/// Quadratic-in-y coefficients of the density denominator
/// tau (y-x)^2 + theta (t-s)(y-x) + t x^2 + s y^2 - (s+t) x y + (t-s)^2.
fn denom_coeffs(p: &ProcessParams, s: f64, t: f64, x: f64) -> (f64, f64, f64) {
    let (theta, tau) = (p.theta, p.tau);
    let a = tau + s;
    let b = -2.0 * tau * x + theta * (t - s) - (s + t) * x;
    let c = tau * x * x - theta * (t - s) * x + t * x * x + (t - s) * (t - s);
    (a, b, c)
}

fn denom_value(p: &ProcessParams, s: f64, t: f64, x: f64, y: f64) -> f64 {
    let (a, b, c) = denom_coeffs(p, s, t, x);
    (a * y + b) * y + c
}

/// Pointwise continuous density of P_{s,t}(x, dy); zero outside the support.
pub fn transition_density(p: &ProcessParams, s: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    check_times(s, t)?;
    let (lo, hi) = support_interval(p, t);
    if y < lo || y > hi {
        return Ok(0.0);
    }
    let den = denom_value(p, s, t, x, y);
    if den <= 0.0 {
        return Err(Error::InvalidState(format!(
            "density denominator {den:.3e} <= 0 at y = {y}: x = {x} is not a legitimate state at time {s}"
        )));
    }
    let v = t + p.tau;
    let num = (t - s) * (4.0 * v - (y - p.theta) * (y - p.theta)).max(0.0).sqrt();
    Ok(num / (2.0 * PI * den))
}

/// A frozen transition measure P_{s,t}(x, .).
#[derive(Debug, Clone)]
pub struct TransitionKernel {
    pub params: ProcessParams,
    pub s: f64,
    pub t: f64,
    pub x: f64,
    measure: MixedMeasure,
}

impl TransitionKernel {
    pub fn measure(&self) -> &MixedMeasure {
        &self.measure
    }

    pub fn into_measure(self) -> MixedMeasure {
        self.measure
    }
}

/// Assemble the full transition measure (continuous density plus the
/// optional atom) for a state x in supp(X_s).
pub fn transition_measure(p: &ProcessParams, s: f64, t: f64, x: f64) -> Result<TransitionKernel> {
    transition_measure_with(p, s, t, x, crate::measure::DEFAULT_CDF_SEGMENTS)
}

/// Same as [`transition_measure`] with an explicit CDF grid resolution.
pub fn transition_measure_with(
    p: &ProcessParams,
    s: f64,
    t: f64,
    x: f64,
    cdf_segments: usize,
) -> Result<TransitionKernel> {
    check_times(s, t)?;
    let atom_state = is_atom_state(p, s, x);
    let atom = if atom_state {
        transition_atom(p, s, t, x)?
    } else {
        None
    };
    if !atom_state && s > 0.0 {
        let (lo_s, hi_s) = support_interval(p, s);
        let tol = 1e-9 * (1.0 + hi_s - lo_s);
        if x < lo_s - tol || x > hi_s + tol {
            return Err(Error::InvalidState(format!(
                "x = {x} lies outside supp(X_s) = [{lo_s}, {hi_s}] and is not the atom state"
            )));
        }
    }

    let (lo, hi) = support_interval(p, t);
    let half = 0.5 * (hi - lo);
    let v = t + p.tau;
    let c_num = (t - s) * v.sqrt() / PI;
    let (qa, qb, qc) = denom_coeffs(p, s, t, x);
    let edge_tol = EDGE_ROOT_TOL * (1.0 + hi - lo + lo.abs() + hi.abs());

    // real roots of the denominator, if any
    let roots: Vec<f64> = if qa.abs() > 1e-300 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            vec![(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)]
        } else {
            vec![]
        }
    } else if qb.abs() > 1e-300 {
        vec![-qc / qb]
    } else {
        if qc <= 0.0 {
            return Err(Error::InvalidState(
                "constant density denominator is non-positive".into(),
            ));
        }
        vec![]
    };

    let mut edge_lo = false;
    let mut edge_hi = false;
    for &r in &roots {
        if (r - lo).abs() <= edge_tol {
            edge_lo = true;
        } else if (r - hi).abs() <= edge_tol {
            edge_hi = true;
        } else if r > lo && r < hi {
            return Err(Error::InvalidState(format!(
                "density denominator vanishes at y = {r} inside the support: x = {x} is not a legitimate state at time {s}"
            )));
        }
    }
    if edge_lo && edge_hi {
        return Err(Error::InvalidState(
            "density denominator vanishes at both support edges".into(),
        ));
    }

    let atoms = atom.into_iter().collect();
    let measure = if edge_lo || edge_hi {
        // factor the edge root out of the denominator and fold the vanishing
        // linear factor into a third/fourth-kind Chebyshev weight
        let edge = if edge_lo { lo } else { hi };
        let other = if roots.len() == 2 {
            let r_other = if (roots[0] - edge).abs() <= edge_tol {
                roots[1]
            } else {
                roots[0]
            };
            Some(r_other)
        } else {
            None
        };
        // q(y) = d(y)/(y - edge)
        let q = move |y: f64| match other {
            Some(r) => qa * (y - r),
            None => qb,
        };
        let qmid = q(0.5 * (lo + hi));
        let sgn = if edge_lo { 1.0 } else { -1.0 };
        if sgn * qmid <= 0.0 {
            return Err(Error::InvalidState(
                "density is negative on the support after edge factoring".into(),
            ));
        }
        let smooth = move |y: f64| sgn * c_num / (half * q(y));
        let kind = if edge_lo {
            ChebKind::Fourth
        } else {
            ChebKind::Third
        };
        MixedMeasure::with_atoms(lo, hi, kind, smooth, atoms)
    } else {
        let mid = 0.5 * (lo + hi);
        if denom_value(p, s, t, x, mid) <= 0.0 {
            return Err(Error::InvalidState(format!(
                "density denominator non-positive at the support center: x = {x} is not a legitimate state at time {s}"
            )));
        }
        let pc = *p;
        let smooth = move |y: f64| c_num / denom_value(&pc, s, t, x, y);
        MixedMeasure::with_atoms(lo, hi, ChebKind::Second, smooth, atoms)
    }
    .with_cdf_segments(cdf_segments);

    Ok(TransitionKernel {
        params: *p,
        s,
        t,
        x,
        measure,
    })
}

/// The marginal law P_{0,t}(0, dy) of X_t.
pub fn marginal(p: &ProcessParams, t: f64) -> Result<TransitionKernel> {
    if !(t > 0.0) {
        return Err(Error::TimeOrder(format!("marginal time t = {t} must be positive")));
    }
    transition_measure(p, 0.0, t, 0.0)
}
