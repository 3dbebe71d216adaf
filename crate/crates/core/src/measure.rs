//! Compactly supported mixed measures: a continuous density on an interval
//! plus a finite list of atoms.
//!
//! The continuous part is stored in factored form `density(y) = smooth(y) *
//! W(u(y))` where `u` is the affine map onto [-1,1] and `W` is one of the four
//! Chebyshev weights. Keeping the edge behavior in the weight makes every
//! integral against the measure spectrally accurate, including the
//! inverse-square-root edges of the boundary-parameter densities.

use num_complex::Complex64;
use serde::Serialize;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_weighted, ChebKind, QuadScalar};

/// A point mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// Default resolution of the cached CDF grid.
pub const DEFAULT_CDF_SEGMENTS: usize = 2048;

type SmoothFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Continuous density on `[lo, hi]` (in Chebyshev-factored form) plus atoms.
#[derive(Clone)]
pub struct MixedMeasure {
    lo: f64,
    hi: f64,
    kind: ChebKind,
    smooth: SmoothFn,
    atoms: Vec<Atom>,
    cdf_segments: usize,
    cdf: Arc<OnceLock<CdfGrid>>,
}

impl std::fmt::Debug for MixedMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MixedMeasure")
            .field("support", &(self.lo, self.hi))
            .field("kind", &self.kind)
            .field("atoms", &self.atoms)
            .finish()
    }
}

impl MixedMeasure {
    /// Purely continuous measure.
    pub fn continuous(
        lo: f64,
        hi: f64,
        kind: ChebKind,
        smooth: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::with_atoms(lo, hi, kind, smooth, Vec::new())
    }

    /// Continuous part plus atoms. Atom weights must lie in (0,1] and the
    /// locations must be pairwise distinct.
    pub fn with_atoms(
        lo: f64,
        hi: f64,
        kind: ChebKind,
        smooth: impl Fn(f64) -> f64 + Send + Sync + 'static,
        atoms: Vec<Atom>,
    ) -> Self {
        assert!(lo < hi, "support must be a nondegenerate interval");
        for a in &atoms {
            assert!(
                a.weight > 0.0 && a.weight <= 1.0,
                "atom weight must be in (0,1]"
            );
        }
        for (i, a) in atoms.iter().enumerate() {
            for b in &atoms[i + 1..] {
                assert!(a.location != b.location, "atom locations must be distinct");
            }
        }
        MixedMeasure {
            lo,
            hi,
            kind,
            smooth: Arc::new(smooth),
            atoms,
            cdf_segments: DEFAULT_CDF_SEGMENTS,
            cdf: Arc::new(OnceLock::new()),
        }
    }

    /// Override the CDF grid resolution (used by path samplers where a
    /// kernel is built per step and drawn from once).
    pub fn with_cdf_segments(mut self, segments: usize) -> Self {
        assert!(segments >= 16);
        self.cdf_segments = segments;
        self.cdf = Arc::new(OnceLock::new());
        self
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn kind(&self) -> ChebKind {
        self.kind
    }

    fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Continuous density at y; zero outside the support interval.
    /// Singular-edge kinds diverge at the corresponding endpoint.
    pub fn density(&self, y: f64) -> f64 {
        if y < self.lo || y > self.hi {
            return 0.0;
        }
        let u = (y - self.center()) / self.half_width();
        (self.smooth)(y) * self.kind.weight(u.clamp(-1.0, 1.0))
    }

    /// Integral of f against the measure (continuous part by the matching
    /// Gauss-Chebyshev rule with node doubling, plus atom terms).
    pub fn integrate<T: QuadScalar>(&self, mut f: impl FnMut(f64) -> T, tol: f64) -> Result<T> {
        let c = self.center();
        let h = self.half_width();
        let smooth = Arc::clone(&self.smooth);
        let mut total = integrate_weighted(
            self.kind,
            |u| {
                let y = c + h * u;
                let mut v = T::zero();
                v.scaled_add(smooth(y) * h, &f(y));
                v
            },
            tol,
        )?;
        for a in &self.atoms {
            total.scaled_add(a.weight, &f(a.location));
        }
        Ok(total)
    }

    pub fn mass(&self, tol: f64) -> Result<f64> {
        self.integrate(|_| 1.0, tol)
    }

    pub fn mean(&self, tol: f64) -> Result<f64> {
        self.integrate(|y| y, tol)
    }

    pub fn variance(&self, tol: f64) -> Result<f64> {
        let [m0, m1, m2] = self.moments_upto::<3>(tol)?;
        Ok(m2 / m0 - (m1 / m0) * (m1 / m0))
    }

    pub fn moment(&self, k: u32, tol: f64) -> Result<f64> {
        self.integrate(|y| y.powi(k as i32), tol)
    }

    /// Raw moments of orders 0..N-1 in a single adaptive pass.
    pub fn moments_upto<const N: usize>(&self, tol: f64) -> Result<[f64; N]> {
        self.integrate(
            |y| {
                let mut out = [0.0; N];
                let mut p = 1.0;
                for slot in out.iter_mut() {
                    *slot = p;
                    p *= y;
                }
                out
            },
            tol,
        )
    }

    /// H-transform: integral of (1 + z^2 - 2 z y)^{-1} against the measure.
    /// Rejects z whose kernel pole (z + 1/z)/2 touches the support or an atom.
    pub fn h_transform(&self, z: Complex64, tol: f64) -> Result<Complex64> {
        if z.norm() < 1e-300 {
            return self.mass(tol).map(|m| Complex64::new(m, 0.0));
        }
        let pole = (z + 1.0 / z) / 2.0;
        if pole.im.abs() < 1e-9 && pole.re >= self.lo - 1e-9 && pole.re <= self.hi + 1e-9 {
            return Err(Error::PoleOnSupport(format!(
                "H-transform kernel pole {:.6} lies on the support [{}, {}]",
                pole.re, self.lo, self.hi
            )));
        }
        for a in &self.atoms {
            let d = 1.0 + z * z - 2.0 * z * a.location;
            if d.norm() < 1e-12 {
                return Err(Error::PoleOnSupport(format!(
                    "H-transform kernel pole coincides with the atom at {}",
                    a.location
                )));
            }
        }
        self.integrate(|y| 1.0 / (1.0 + z * z - 2.0 * z * y), tol)
    }

    /// Cached continuous CDF grid, built on first use.
    pub fn cdf(&self) -> &CdfGrid {
        self.cdf
            .get_or_init(|| CdfGrid::build(self, self.cdf_segments))
    }

    /// CDF of the full mixed measure at y (right-continuous).
    pub fn cdf_mixed(&self, y: f64) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| a.location <= y)
            .map(|a| a.weight)
            .sum();
        atoms + self.cdf().value_at(y)
    }

    /// Left limit of the mixed CDF at y.
    pub fn cdf_mixed_left(&self, y: f64) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| a.location < y)
            .map(|a| a.weight)
            .sum();
        atoms + self.cdf().value_at(y)
    }

    /// Serializable snapshot with the density sampled on an n-point grid of
    /// interior midpoints.
    pub fn to_json(&self, n: usize) -> MeasureJson {
        let n = n.max(2);
        let step = (self.hi - self.lo) / n as f64;
        let grid: Vec<f64> = (0..n)
            .map(|i| self.lo + (i as f64 + 0.5) * step)
            .collect();
        let density = grid.iter().map(|&y| self.density(y)).collect();
        MeasureJson {
            support: [self.lo, self.hi],
            grid,
            density,
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomJson {
                    y: a.location,
                    w: a.weight,
                })
                .collect(),
        }
    }
}

/// JSON schema for a mixed measure.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureJson {
    pub support: [f64; 2],
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub atoms: Vec<AtomJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AtomJson {
    pub y: f64,
    pub w: f64,
}

/// Monotone grid of (y, F(y)) values for the continuous component.
///
/// Nodes are Chebyshev-spaced (uniform in the angle variable) so the
/// square-root edges are resolved; segment increments are computed by
/// Gauss-Legendre in the angle variable where the integrand is smooth.
#[derive(Debug, Clone)]
pub struct CdfGrid {
    ys: Vec<f64>,
    cum: Vec<f64>,
}

// 8-point Gauss-Legendre rule on [-1,1].
const GL8_NODES: [f64; 8] = [
    -0.9602898564975363,
    -0.7966664774136267,
    -0.525532409916329,
    -0.1834346424956498,
    0.1834346424956498,
    0.525532409916329,
    0.7966664774136267,
    0.9602898564975363,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.1012285362903763,
    0.2223810344533745,
    0.3137066458778873,
    0.362683783378362,
    0.362683783378362,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

impl CdfGrid {
    fn build(m: &MixedMeasure, segments: usize) -> CdfGrid {
        let n = segments;
        let c = m.center();
        let h = m.half_width();
        let smooth = &m.smooth;
        // y(psi) = c - h cos(psi); G(psi) = density(y) * h * sin(psi)
        let g = |psi: f64| -> f64 {
            let y = c - h * psi.cos();
            let s = smooth(y);
            match m.kind {
                ChebKind::Second => s * h * psi.sin().powi(2),
                ChebKind::First => s * h,
                ChebKind::Third => 2.0 * s * h * (0.5 * psi).sin().powi(2),
                ChebKind::Fourth => 2.0 * s * h * (0.5 * psi).cos().powi(2),
            }
        };
        let mut ys = Vec::with_capacity(n + 1);
        let mut cum = Vec::with_capacity(n + 1);
        let dpsi = std::f64::consts::PI / n as f64;
        ys.push(m.lo);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let a = i as f64 * dpsi;
            let mid = a + 0.5 * dpsi;
            let half = 0.5 * dpsi;
            let mut seg = 0.0;
            for (&t, &w) in GL8_NODES.iter().zip(&GL8_WEIGHTS) {
                seg += w * g(mid + half * t);
            }
            seg *= half;
            acc += seg.max(0.0);
            let psi_end = (i + 1) as f64 * dpsi;
            ys.push((c - h * psi_end.cos()).clamp(m.lo, m.hi));
            cum.push(acc);
        }
        *ys.last_mut().unwrap() = m.hi;
        CdfGrid { ys, cum }
    }

    /// Total continuous mass.
    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// F(y) for the continuous component (0 below lo, total above hi).
    pub fn value_at(&self, y: f64) -> f64 {
        if y <= self.ys[0] {
            return 0.0;
        }
        if y >= *self.ys.last().unwrap() {
            return self.total();
        }
        let idx = self.ys.partition_point(|&v| v <= y) - 1;
        let (y0, y1) = (self.ys[idx], self.ys[idx + 1]);
        let (f0, f1) = (self.cum[idx], self.cum[idx + 1]);
        if y1 > y0 {
            f0 + (f1 - f0) * (y - y0) / (y1 - y0)
        } else {
            f0
        }
    }

    /// Smallest y with F(y) >= target mass (inverse CDF on the grid).
    pub fn invert(&self, target: f64) -> f64 {
        let t = target.clamp(0.0, self.total());
        let idx = match self.cum.partition_point(|&v| v < t) {
            0 => 0,
            k => k - 1,
        };
        let idx = idx.min(self.ys.len() - 2);
        let (f0, f1) = (self.cum[idx], self.cum[idx + 1]);
        let (y0, y1) = (self.ys[idx], self.ys[idx + 1]);
        if f1 > f0 {
            y0 + (y1 - y0) * (t - f0) / (f1 - f0)
        } else {
            0.5 * (y0 + y1)
        }
    }
}
