//! Impurity-doped Dicke model: mean-field phases and critical points,
//! fluctuation spectra, a finite-size exact-diagonalization oracle, and the
//! measurement protocol that sets the impurity population.

// `!(x > y)` guards are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ed;
pub mod error;
pub mod fluctuations;
pub mod meanfield;
pub mod measurement;
pub mod model;
pub mod sparse;
pub mod sweep;

pub use error::{IddmError, Result};
pub use meanfield::{MeanFieldSolution, Phase};
pub use model::{EffectiveFrequencies, ImpurityPopulation, ModelParams};
