//! Exact sampling from transition kernels and cadlag path generation.
//!
//! Sampling is inverse-CDF: with probability equal to the atom weight the
//! draw sits on the atom, otherwise the cached continuous CDF is inverted.
//! The RNG is counter-based (ChaCha8); each path derives its own stream from
//! (seed, path index), so results are reproducible bit-for-bit regardless of
//! the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{marginal, transition_measure_with, ProcessParams, TransitionKernel};

/// CDF resolution used for per-step kernels along simulated paths, where a
/// kernel is built once and drawn from once.
pub const PATH_CDF_SEGMENTS: usize = 256;

/// A sampled trajectory on a time grid, starting at X_0 = 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Marks samples drawn from the discrete component.
    pub atom_flags: Vec<bool>,
}

/// One draw from a mixed kernel.
#[derive(Debug, Clone, Copy)]
pub struct Draw {
    pub value: f64,
    pub from_atom: bool,
}

/// Deterministic RNG stream: seed picks the key, the stream index splits it.
#[derive(Debug, Clone)]
pub struct SamplerState {
    rng: ChaCha8Rng,
}

impl SamplerState {
    pub fn new(seed: u64) -> Self {
        Self::stream(seed, 0)
    }

    /// Independent stream `index` of the generator keyed by `seed`.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        SamplerState { rng }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }
}

/// Draw one sample from the kernel: atom with probability equal to its
/// weight, otherwise inverse CDF of the continuous part.
pub fn sample_one(kernel: &TransitionKernel, state: &mut SamplerState) -> Result<Draw> {
    let m = kernel.measure();
    let grid = m.cdf();
    let atom_mass = m.atom_mass();
    let total = grid.total();
    if !total.is_finite() || (total + atom_mass - 1.0).abs() > 1e-9 {
        return Err(Error::InvariantViolation(format!(
            "kernel CDF mass {total} + atom mass {atom_mass} != 1 within 1e-9"
        )));
    }
    let u = state.uniform();
    let mut acc = 0.0;
    for a in m.atoms() {
        acc += a.weight;
        if u < acc {
            return Ok(Draw {
                value: a.location,
                from_atom: true,
            });
        }
    }
    let p = ((u - atom_mass) / (1.0 - atom_mass)).clamp(0.0, 1.0);
    Ok(Draw {
        value: grid.invert(p * total),
        from_atom: false,
    })
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParams("time grid must be nonempty".into()));
    }
    if !(grid[0] > 0.0) {
        return Err(Error::TimeOrder("time grid must start after 0".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::TimeOrder("time grid must be strictly increasing".into()));
    }
    Ok(())
}

fn sample_path_stream(
    p: &ProcessParams,
    grid: &[f64],
    seed: u64,
    index: u64,
    segments: usize,
) -> Result<Path> {
    check_grid(grid)?;
    let mut st = SamplerState::stream(seed, index);
    let n = grid.len() + 1;
    let mut times = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    times.push(0.0);
    values.push(0.0);
    flags.push(false);
    let (mut prev_t, mut prev_x) = (0.0, 0.0);
    for &t in grid {
        let kern = transition_measure_with(p, prev_t, t, prev_x, segments)?;
        let draw = sample_one(&kern, &mut st)?;
        times.push(t);
        values.push(draw.value);
        flags.push(draw.from_atom);
        prev_t = t;
        prev_x = draw.value;
    }
    Ok(Path {
        times,
        values,
        atom_flags: flags,
    })
}

/// Sample a single path on the grid (stream index 0 of the seed).
pub fn sample_path(p: &ProcessParams, grid: &[f64], seed: u64) -> Result<Path> {
    sample_path_stream(p, grid, seed, 0, PATH_CDF_SEGMENTS)
}

/// Sample `num_paths` independent paths; path i uses stream i of the seed,
/// so the result does not depend on the number of worker threads.
pub fn sample_paths(
    p: &ProcessParams,
    grid: &[f64],
    num_paths: usize,
    seed: u64,
) -> Result<Vec<Path>> {
    check_grid(grid)?;
    (0..num_paths)
        .into_par_iter()
        .map(|i| sample_path_stream(p, grid, seed, i as u64, PATH_CDF_SEGMENTS))
        .collect()
}

/// Per-time summary of a path ensemble against the analytic marginal.
#[derive(Debug, Clone, Serialize)]
pub struct TimeStats {
    pub t: f64,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    /// Kolmogorov-Smirnov distance to the analytic marginal CDF.
    pub ks: f64,
    /// Fraction of paths sitting on the discrete component at this time.
    pub atom_freq: f64,
}

/// Asymptotic Kolmogorov-Smirnov critical distance at level alpha.
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Kolmogorov-Smirnov distance of samples against a (possibly mixed) CDF.
/// `cdf` returns (F(x-), F(x)).
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> (f64, f64)) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let (f_left, f_right) = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f_right);
        d = d.max(f_left - i as f64 / n);
    }
    d
}

/// Moment table and KS statistics per grid time (paths must share the grid).
pub fn empirical_stats(p: &ProcessParams, paths: &[Path]) -> Result<Vec<TimeStats>> {
    if paths.len() < 1000 {
        return Err(Error::InvalidParams(
            "empirical_stats needs at least 1000 paths".into(),
        ));
    }
    let times = &paths[0].times;
    if paths.iter().any(|q| q.times != *times) {
        return Err(Error::InvalidParams("paths must share one time grid".into()));
    }
    let n = paths.len();
    let mut out = Vec::new();
    for (j, &t) in times.iter().enumerate().skip(1) {
        let mut vals: Vec<f64> = paths.iter().map(|q| q.values[j]).collect();
        let atom_freq =
            paths.iter().filter(|q| q.atom_flags[j]).count() as f64 / n as f64;
        vals.sort_by(f64::total_cmp);
        let mean = vals.iter().sum::<f64>() / n as f64;
        let m2 = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let m3 = vals.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n as f64;
        let law = marginal(p, t)?;
        let measure = law.measure();
        let ks = ks_distance(&vals, |x| (measure.cdf_mixed_left(x), measure.cdf_mixed(x)));
        out.push(TimeStats {
            t,
            n,
            mean,
            variance: m2,
            skewness: m3 / m2.powf(1.5),
            ks,
            atom_freq,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::DEFAULT_CDF_SEGMENTS;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn identical_seed_reproduces_paths_bitwise() {
        let p = ProcessParams::new(1.0, 0.5).unwrap();
        let grid = [0.2, 0.5, 0.9, 1.4];
        let a = sample_paths(&p, &grid, 64, 7).unwrap();
        let b = sample_paths(&p, &grid, 64, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_paths(&p, &grid, 64, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn path_shape_and_initial_state() {
        let p = ProcessParams::new(0.0, 0.0).unwrap();
        let path = sample_path(&p, &[0.5, 1.0], 3).unwrap();
        assert_eq!(path.times[0], 0.0);
        assert_eq!(path.values[0], 0.0);
        assert!(!path.atom_flags[0]);
        assert_eq!(path.times.len(), 3);
        assert_eq!(path.values.len(), 3);
        assert_eq!(path.atom_flags.len(), 3);
    }

    #[test]
    fn grid_validation() {
        let p = ProcessParams::new(0.0, 0.0).unwrap();
        assert!(sample_path(&p, &[], 1).is_err());
        assert!(sample_path(&p, &[0.0, 1.0], 1).is_err());
        assert!(sample_path(&p, &[1.0, 0.5], 1).is_err());
    }

    #[test]
    fn atom_frequency_matches_weight() {
        // one-step kernel from the atom state: weight 2/3 at t = 2
        let p = ProcessParams::new(2.0, 0.0).unwrap();
        let kern = transition_measure_with(&p, 1.0, 2.0, -0.5, DEFAULT_CDF_SEGMENTS).unwrap();
        let mut st = SamplerState::new(11);
        let n = 40_000;
        let mut hits = 0usize;
        for _ in 0..n {
            if sample_one(&kern, &mut st).unwrap().from_atom {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        let w = 2.0 / 3.0;
        let sigma = (w * (1.0 - w) / n as f64).sqrt();
        assert!(
            (freq - w).abs() < 4.0 * sigma,
            "freq {freq} vs weight {w} (sigma {sigma})"
        );
    }

    #[test]
    fn semicircle_sample_moments() {
        let p = ProcessParams::new(0.0, 0.0).unwrap();
        let kern = marginal(&p, 1.0).unwrap();
        let mut st = SamplerState::new(5);
        let n = 60_000;
        let (mut s1, mut s4) = (0.0, 0.0);
        for _ in 0..n {
            let v = sample_one(&kern, &mut st).unwrap().value;
            s1 += v;
            s4 += v.powi(4);
        }
        let mean = s1 / n as f64;
        let m4 = s4 / n as f64;
        // Var = 1, E X^4 = 2 t^2 = 2
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        assert!((m4 - 2.0).abs() < 4.0 * (10.0f64 / n as f64).sqrt());
    }

    #[test]
    fn ks_distance_on_known_cdf() {
        // uniform grid against the uniform CDF has tiny KS distance
        let n = 1000;
        let sorted: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance(&sorted, |x| (x, x));
        assert_abs_diff_eq!(d, 0.5 / n as f64, epsilon = 1e-12);
    }

    #[test]
    fn ks_critical_value() {
        // alpha = 0.01 constant is 1.6276/sqrt(n)
        let c = ks_critical(0.01, 100_000);
        assert_abs_diff_eq!(c * (100_000f64).sqrt(), 1.6276, epsilon = 1e-3);
    }

    proptest! {
        #[test]
        fn seeds_are_deterministic(seed in 0u64..1_000_000) {
            let p = ProcessParams::new(0.5, 0.1).unwrap();
            let grid = [0.3, 0.8];
            let a = sample_path(&p, &grid, seed).unwrap();
            let b = sample_path(&p, &grid, seed).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
