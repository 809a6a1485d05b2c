//! Generalized binomial states of a single bosonic mode.
//!
//! The crate assembles the SU(2) eigenvalue problem
//! `[sqrt(1-eta)(mu J+ + nu J-) - sqrt(eta) J0] |v> = delta |v>` on the
//! `(M+1)`-dimensional Holstein-Primakoff space, solves it in closed form
//! ([`gbs::solve`]), and checks the result against a dense QR eigensolver
//! ([`oracle`]) that shares no code with the closed-form path.
//!
//! Modules:
//! - [`fock`]: truncated Fock-space states, operators, `exp`, fidelity.
//! - [`su2`]: SU(2) displacement operators and their algebra.
//! - [`binomial`]: binomial states and their ladder/displacement forms.
//! - [`gbs`]: the closed-form solver.
//! - [`oracle`]: independent eigensolver and comparison reports.
//! - [`analysis`]: reference states, photon statistics, limits, time evolution.
//! - [`verify`]: the full property battery with pinned tolerances.

pub mod analysis;
pub mod binomial;
mod ddouble;
pub mod error;
pub mod fock;
pub mod gbs;
pub mod oracle;
mod special;
pub mod su2;
pub mod verify;

pub use binomial::BinomialParams;
pub use error::{GbsError, Result};
pub use fock::{Operator, StateVector, C64};
pub use gbs::{CoefficientTriple, GbsParams, GbsSolution, RootPolicy, SolutionKind};
pub use oracle::SpectrumReport;
pub use su2::DisplacementParams;
