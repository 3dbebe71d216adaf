//! Cross-module consistency oracles: the free-Meixner kernels against the
//! affine image of the auxiliary family, moment recovery through the
//! H-transform, and statistical checks of the path sampler against the
//! analytic laws.

use num_complex::Complex64;

use free_meixner::kernel::{
    atom_location, marginal, support_interval, transition_measure, ProcessParams,
};
use free_meixner::nu::{h_closed, moments_from_h, mu_marginal, mu_transition, nu_build, AuxTimeDomain, NuParams};
use free_meixner::simulate::{ks_critical, ks_distance, sample_one, sample_paths, SamplerState};

const PROCESS_GRID: [(f64, f64); 6] = [
    (0.0, 0.0),
    (1.0, 0.0),
    (2.0, 0.0),
    (0.0, 1.0),
    (3.0, 1.0),
    (1.0, 2.0),
];

/// Marginals are the affine image X = theta + 2 sqrt(t+tau) Y of the
/// auxiliary marginal at time t + tau: densities match pointwise and atoms
/// map onto a_*(t) with equal weight.
#[test]
fn marginals_match_affine_image_of_aux_family() {
    for (theta, tau) in PROCESS_GRID {
        let p = ProcessParams::new(theta, tau).unwrap();
        let (c, d) = p.roots();
        let dom = AuxTimeDomain::new(c, d).unwrap();
        for t in [0.7, 2.3] {
            let v = t + tau;
            let h = 2.0 * v.sqrt();
            let law = marginal(&p, t).unwrap();
            let aux = mu_marginal(&dom, v).unwrap();
            for u in [-0.9, -0.4, 0.0, 0.3, 0.8] {
                let y = theta + h * u;
                let lhs = law.measure().density(y);
                let rhs = aux.density(u) / h;
                assert!(
                    (lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()),
                    "density mismatch at theta={theta} tau={tau} t={t} u={u}: {lhs} vs {rhs}"
                );
            }
            let mut lhs_atoms: Vec<_> = law.measure().atoms().to_vec();
            let mut rhs_atoms: Vec<_> = aux
                .atoms()
                .iter()
                .map(|a| free_meixner::Atom {
                    location: theta + h * a.location,
                    weight: a.weight,
                })
                .collect();
            lhs_atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
            rhs_atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
            assert_eq!(lhs_atoms.len(), rhs_atoms.len());
            for (a, b) in lhs_atoms.iter().zip(&rhs_atoms) {
                assert!((a.location - b.location).abs() < 1e-9);
                assert!((a.weight - b.weight).abs() < 1e-9);
                if let Some(star) = atom_location(&p, t) {
                    assert!((a.location - star).abs() < 1e-9);
                }
            }
        }
    }
}

/// Transition kernels are the affine image of the auxiliary transitions.
#[test]
fn transitions_match_affine_image_of_aux_family() {
    for (theta, tau) in PROCESS_GRID {
        let p = ProcessParams::new(theta, tau).unwrap();
        let (c, d) = p.roots();
        let dom = AuxTimeDomain::new(c, d).unwrap();
        let (s, t) = (0.8, 1.9);
        let (vs, vt) = (s + tau, t + tau);
        let (hs, ht) = (2.0 * vs.sqrt(), 2.0 * vt.sqrt());
        let (lo, hi) = support_interval(&p, s);
        let mut xs = vec![
            lo + 0.2 * (hi - lo),
            lo + 0.5 * (hi - lo),
            lo + 0.8 * (hi - lo),
        ];
        if let Some(a) = atom_location(&p, s) {
            if free_meixner::kernel::transition_atom(&p, s, t, a)
                .ok()
                .flatten()
                .is_some()
            {
                xs.push(a);
            }
        }
        for x in xs {
            let kern = transition_measure(&p, s, t, x).unwrap();
            let aux = mu_transition(&dom, (x - theta) / hs, vs, vt).unwrap();
            for u in [-0.85, -0.3, 0.1, 0.55, 0.95] {
                let y = theta + ht * u;
                let lhs = kern.measure().density(y);
                let rhs = aux.density(u) / ht;
                assert!(
                    (lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()),
                    "transition density mismatch theta={theta} tau={tau} x={x} u={u}: {lhs} vs {rhs}"
                );
            }
            let mut lhs_atoms: Vec<_> = kern.measure().atoms().to_vec();
            let mut rhs_atoms: Vec<_> = aux
                .atoms()
                .iter()
                .map(|a| free_meixner::Atom {
                    location: theta + ht * a.location,
                    weight: a.weight,
                })
                .collect();
            lhs_atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
            rhs_atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
            assert_eq!(lhs_atoms.len(), rhs_atoms.len(), "atom count at x={x}");
            for (a, b) in lhs_atoms.iter().zip(&rhs_atoms) {
                assert!((a.location - b.location).abs() < 1e-9);
                assert!((a.weight - b.weight).abs() < 1e-9);
            }
        }
    }
}

/// A compactly supported measure is pinned down by its H-transform: moments
/// recovered from H near zero match direct quadrature moments.
#[test]
fn h_transform_determines_moments() {
    let cases = [
        NuParams::real(0.0, 0.0).unwrap(),
        NuParams::real(0.5, 0.2).unwrap(),
        NuParams::real(2.0, 0.0).unwrap(),
        NuParams::real(1.5, -1.3).unwrap(),
        NuParams::conjugate(Complex64::new(0.4, 0.6)).unwrap(),
    ];
    for p in cases {
        let m = nu_build(&p).unwrap();
        let from_h = moments_from_h(|z| m.h_transform(z, 1e-12).unwrap(), 6, 0.3).unwrap();
        let direct: [f64; 7] = m.moments_upto(1e-12).unwrap();
        for (k, (a, b)) in from_h.iter().zip(&direct).enumerate() {
            assert!(
                (a - b).abs() < 1e-9,
                "moment {k} of nu({}, {}): H-route {a} vs direct {b}",
                p.a1(),
                p.a2()
            );
        }
        // and the closed form H agrees with the numeric transform off 0
        let z = Complex64::new(0.22, 0.18);
        let dev = (m.h_transform(z, 1e-12).unwrap() - h_closed(&p, z)).norm();
        assert!(dev < 1e-10);
    }
}

/// Two-step sampling over an intermediate time reproduces the one-step law
/// (statistical Chapman-Kolmogorov).
#[test]
fn two_step_sampling_matches_one_step_law() {
    let p = ProcessParams::new(0.0, 0.0).unwrap();
    let n = 30_000;
    let paths = sample_paths(&p, &[0.5, 1.0], n, 913).unwrap();
    let mut finals: Vec<f64> = paths.iter().map(|q| q.values[2]).collect();
    finals.sort_by(f64::total_cmp);
    let law = marginal(&p, 1.0).unwrap();
    let d = ks_distance(&finals, |x| {
        (law.measure().cdf_mixed_left(x), law.measure().cdf_mixed(x))
    });
    let crit = ks_critical(0.01, n);
    assert!(d < crit, "KS {d} vs critical {crit}");
}

/// Along free-Poisson-type paths the atom chain follows the product of the
/// conditional weights and dies at t = theta^2.
#[test]
fn atom_occupancy_along_paths() {
    let p = ProcessParams::new(2.0, 0.0).unwrap();
    let grid = [1.0, 2.0, 3.0, 4.0, 5.0];
    let n = 20_000;
    let paths = sample_paths(&p, &grid, n, 515).unwrap();
    // at t = 3 the marginal weight is 1 - 3/4
    let occ3 = paths.iter().filter(|q| q.atom_flags[3]).count() as f64 / n as f64;
    let w = 0.25;
    let sigma = (w * (1.0 - w) / n as f64).sqrt();
    assert!(
        (occ3 - w).abs() < 4.0 * sigma,
        "atom occupancy {occ3} vs {w} (sigma {sigma})"
    );
    // extinction: no samples sit on a_*(t) for t >= theta^2 = 4
    for path in &paths {
        for j in 4..=5 {
            assert!(!path.atom_flags[j]);
            let star = atom_location(&p, path.times[j]).unwrap();
            assert!((path.values[j] - star).abs() > 1e-12);
        }
    }
}

/// Sampling frequencies of a fixed mixed kernel match its atom weight.
#[test]
fn single_kernel_atom_frequency() {
    let p = ProcessParams::new(2.0, 0.0).unwrap();
    let kern = transition_measure(&p, 1.0, 2.0, -0.5).unwrap();
    let mut st = SamplerState::new(77);
    let n = 50_000;
    let hits = (0..n)
        .filter(|_| sample_one(&kern, &mut st).unwrap().from_atom)
        .count();
    let freq = hits as f64 / n as f64;
    let w = 2.0 / 3.0;
    let sigma = (w * (1.0 - w) / n as f64).sqrt();
    assert!((freq - w).abs() < 4.0 * sigma);
}
