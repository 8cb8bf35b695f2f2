//! Numerical core for Gaussian boson sampling with lossy, partially
//! distinguishable photons.
//!
//! Photons that become distinguishable are carried by *virtual modes*: one
//! extra Gaussian mode per squeezed input that traverses its own copy of the
//! interferometer and is detected together with the indistinguishable light.
//! The crate computes
//!
//! - exact photon-number-resolving (PNR) output probabilities, combining the
//!   indistinguishable-mode Hafnian with closed-form virtual-mode terms
//!   ([`pnr`]);
//! - a polynomial-time sampler for the combined distinguishable output and the
//!   empirical distribution it produces ([`sampler`]);
//! - threshold-detector click probabilities from no-click marginals, with the
//!   Torontonian as the ideal special case ([`threshold`]);
//! - the truncated approximation and its fidelity ([`approx`]);
//! - an independent truncated Fock-space oracle for tiny systems ([`fock`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel drivers
//! and the command-line interface live in the companion `gbs` crate.
//!
//! ```
//! use gbs_core::{haar_random_unitary, ExperimentConfig, GbsModel, OutputPattern};
//!
//! let cfg = ExperimentConfig::new(2, 1, 0.5, 0.9, 0.8).unwrap();
//! let t = haar_random_unitary(2, 7).unwrap();
//! let model = GbsModel::new(cfg, t).unwrap();
//! let p = model.prob_total_exact(&OutputPattern::new(vec![1, 1])).unwrap();
//! assert!(p > 0.0 && p < 1.0);
//! ```

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod approx;
pub mod config;
mod error;
pub mod fit;
pub mod fock;
pub mod interferometer;
pub mod linalg;
pub mod matfunc;
pub mod model;
pub mod pattern;
pub mod pnr;
pub mod sampler;
pub mod special;
pub mod subset;
pub mod threshold;


pub use config::{ExperimentConfig, Transmission};
pub use error::{Error, Result};
pub use interferometer::{haar_random_unitary, Interferometer};
pub use model::{GbsModel, KernelMatrix, ModeCoefficients, QMatrix};
pub use pattern::{ClickPattern, OutputPattern};
pub use pnr::{DistTable, DistinguishableSource};
pub use sampler::{EmpiricalDistribution, Truncation};


/// Complex scalar used throughout.
pub type Complex = num_complex::Complex64;
/// Dense complex matrix used throughout.
pub type CMatrix = nalgebra::DMatrix<Complex>;
