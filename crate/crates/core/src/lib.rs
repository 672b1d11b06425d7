//! Numerical toolkit for completely positive maps between matrix algebras.
//!
//! A [`Channel`] is stored by its Kraus operators. From it the crate builds
//! the Choi and representing matrices, the adjoint and complementary maps,
//! ranks and norms, the rank product bound for a map and its complement,
//! Schur-product channels of correlation matrices, the doubly stochastic
//! matrix of a unital channel, and the operator algebras attached to a map.

pub mod algebra;
pub mod channel;
pub mod dstoch;
pub mod error;
pub mod gen;
pub mod io;
pub mod matcore;
pub mod schur;
pub mod uncertainty;

#[cfg(test)]
mod testutil;

pub use algebra::OperatorSubspace;
pub use channel::{Channel, ChannelClass};
pub use dstoch::DoublyStochasticMatrix;
pub use error::{Error, Result};
pub use gen::Seed;
pub use matcore::{ComplexMatrix, Tolerances, C64};
pub use schur::{CorrelationBlockDecomposition, CorrelationMatrix};
pub use uncertainty::UncertaintyReport;
