//! Wiener norms of subsets of `Z_p` and the additive-combinatorial machinery
//! around them.
//!
//! The crate is organised bottom-up:
//!
//! * [`zp`]: residues, dense subsets, signed representatives, dilations.
//! * [`spectral`]: the Fourier transform on `Z_p` (normalised by `1/p`) and
//!   the Wiener norm `‖χ_A‖_A = Σ_γ |χ̂_A(γ)|` with a tracked error bound.
//! * [`energy`]: exact representation profiles `N_k` and energies `T_k`,
//!   sumsets and the norm-to-energy inequality checks.
//! * [`dlvp`]: de la Vallée-Poussin kernels and means, continuous `L¹`
//!   quadrature, and the ratio checkers for trigonometric inequalities.
//! * [`structure`]: generalized arithmetic progressions, dilate search and
//!   localisation of a set into a short window.
//! * [`scattered`]: scattered families in 4-adic shells, exact checks of the
//!   `T_k` and `N_k` upper bounds, and the instrumented proof tracer.
//! * [`bounds`]: closed-form lower-bound evaluators and extremal set search.
//! * [`suites`]: randomized invariant suites shared by the CLI `verify`
//!   command.

pub mod bounds;
pub mod dlvp;
pub mod energy;
mod error;
pub mod scattered;
pub mod spectral;
pub mod structure;
pub mod suites;
pub(crate) mod util;
pub mod zp;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use zp::{PrimeContext, Precision, SignedRep, ZpSet};
