//! Perturbative graph expansion for Gibbs states of the nonlocal NLS on the
//! torus. Kernels and pairing combinatorics are exact at finite mode cutoff;
//! Monte Carlo oracles check the expansion numerically.
//!
//! Everything here is `no_std` (with `alloc`). File formats, the runner and
//! threading live in the companion `nls-gibbs-lab` crate.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod error;
pub mod exec;
pub mod expansion;
pub mod mc;
pub mod num;
pub mod potentials;
pub mod spectral;
pub mod wick;

pub use error::{Error, Result};
pub use spectral::{FourierKernel, KernelKind, Mode, TorusSpec};
