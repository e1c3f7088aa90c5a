//! Exact finite-N correlation kernels of two-dimensional Coulomb gases on
//! annuli at inverse temperature β = 2, together with their N → ∞ limit
//! kernels and the tooling needed to check one against the other.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the CLI and all IO
//! live in the `annulus-gas-cli` companion crate.
//!
//! Layout:
//!
//! * [`gas`]: ensemble description (geometry, radial profile, charges),
//!   weight function and Hamiltonian.
//! * [`orthopoly`]: monomial, Type A and Type B polynomial families and
//!   their squared norms.
//! * [`kernel`]: the determinantal kernel, k-point correlations, closed-form
//!   disc kernels and integral self-checks.
//! * [`asymptotics`]: the catalog of limit kernels.
//! * [`scaling`]: scaled coordinates, matched finite-N ensembles and
//!   gauge-invariant comparisons.
//! * [`oracle`]: brute-force quadrature and Monte Carlo ground truth for any
//!   β, plus the inversion duality check.
//! * [`sampler`]: configuration samplers used for histogram validation.
#![no_std]
// Float math comes from num-traits (libm). Whenever std ends up linked (tests,
// the CLI) the same methods also exist inherently and the import looks unused.
#![allow(unused_imports)]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod asymptotics;
mod error;
pub mod gas;
pub mod interp;
pub mod kernel;
pub mod linalg;
pub mod logspace;
mod metropolis;
pub mod oracle;
pub mod orthopoly;
pub mod quadrature;
pub mod sampler;
pub mod scaling;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use asymptotics::{FormulaId, FrameKind, ScalingFrame};
pub use gas::{
    AnnulusGeometry, ChargeConfiguration, Configuration, EnsembleSpec, FamilySelector,
    RadialProfile, TabulatedProfile,
};
pub use kernel::{CorrelationResult, KernelEvaluator};
pub use orthopoly::{NormMethod, NormTable, PolynomialFamily};
pub use scaling::{ErrorReport, ScaledGrid};
