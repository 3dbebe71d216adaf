//! Free-Meixner Markov transition kernels and their verification toolkit.
//!
//! The library builds the time-non-homogeneous Markov family whose marginals
//! are the free-Meixner laws (parameters theta, tau >= 0): closed-form mixed
//! transition measures with a moving atom, the auxiliary two-parameter
//! measure family nu(dy; a1, a2) with its Askey-Wilson normalization and
//! H-transform, the associated martingale transform, the time-dependent
//! generator evaluated by three independent numerical routes, and an exact
//! inverse-CDF sampler for trajectories.
//!
//! Everything numerical is certified by suites in [`verify`] that compare
//! closed forms against independent quadrature.

pub mod analysis;
pub mod aw;
pub mod error;
pub mod kernel;
pub mod measure;
pub mod nu;
pub mod quadrature;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::{ProcessParams, TransitionKernel};
pub use measure::{Atom, MixedMeasure};
pub use nu::{AuxTimeDomain, NuParams};
pub use simulate::{Path, SamplerState};
