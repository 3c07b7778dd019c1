//! Precision bounds for localizing optical point emitters.
//!
//! The crate computes quantum Fisher information (QFI) matrices and quantum
//! Cramér-Rao bounds for locating classical dipole sources and single-photon
//! emitters from their far-field radiation, and checks them against
//! independent quadrature oracles and Monte Carlo measurement simulation.
//!
//! Modules, bottom up:
//!
//! * [`numcore`]: sphere quadrature, E₁, small symmetric matrices.
//! * [`radiation`]: dipole specs and far-field angular densities.
//! * [`qfi`]: shot-noise limit, squeezing, two-source degradation factor κ,
//!   single-photon QFI.
//! * [`bayes`]: Bayesian bounds with nuisance parameters.
//! * [`simulate`]: homodyne / heterodyne measurement simulation.
//! * [`cli`]: the `qloc` command-line surface.
//!
//! Lengths are in units of the wavelength λ₀ unless a function takes an
//! explicit `lambda0`, in which case results carry the units of `lambda0`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes;
pub mod cli;
pub mod error;
pub mod exec;
pub mod numcore;
pub mod qfi;
pub mod radiation;
pub mod simulate;

pub use error::{Error, Result};
pub use exec::ExecMode;
