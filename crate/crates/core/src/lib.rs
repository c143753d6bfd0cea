//! Search for matrix-multiplication algorithms by minimizing pseudo-Boolean
//! objectives over rank-one tensor decompositions.
//!
//! The crate is layered bottom-up:
//!
//! - [`pbpoly`]: sparse multilinear polynomials over binary variables.
//! - [`quadratize`]: higher-order to quadratic reductions, integer encodings,
//!   and qbsolv-format export.
//! - [`tensor`]: matrix-multiplication tensors over the integers and GF(2).
//! - [`objectives`]: the single-step and fixed-rank objectives.
//! - [`solvers`]: exhaustive, annealing, and tabu minimizers.
//! - [`pipeline`]: the stepwise and fixed-rank searches, decomposition
//!   verification, the Strassen fixture, resource estimates, and landscape
//!   sampling.

pub mod error;
pub mod objectives;
pub mod pbpoly;
pub mod pipeline;
pub mod quadratize;
pub mod solvers;
pub mod tensor;

pub use error::{Error, Result};
pub use pbpoly::{PseudoBooleanPolynomial, VarId, VarSet, VariableRegistry};
pub use tensor::{Decomposition, Field, MatMulShape, RankOneTriple, Tensor3};
