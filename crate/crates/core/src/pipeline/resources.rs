use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Field, MatMulShape};

/// Worst-case sizes of the step and fixed-rank objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub step_variables: u64,
    pub holistic_variables: u64,
    /// Bound on monomials of the step objective.
    pub step_interaction_bound: u64,
    /// `n^2 m^2 p^2 (R k^3 + 1)^2`.
    pub holistic_interaction_bound: u64,
    /// Minimum selection adds one ancilla per cubic step monomial over GF(2).
    /// Integer step monomials reach degree 6 and need at most two each.
    pub step_ancilla_bound: u64,
    /// At most two ancillas per monomial, whose degree never exceeds 6.
    pub holistic_ancilla_bound: u64,
}

/// `k` is the number of bits per integer component; GF(2) steps use one.
pub fn estimate_resources(shape: MatMulShape, rank: u64, k: u64, field: Field) -> Result<ResourceEstimate> {
    shape.validate()?;
    if rank < 1 || k < 1 {
        return Err(Error::Parameter("rank and bits per component must be positive".into()));
    }
    let MatMulShape { n, m, p } = shape;
    let (n, m, p) = (n as u64, m as u64, p as u64);
    let triple = n * m + m * p + p * n;
    let entries = n * n * m * m * p * p;
    let k3 = k * k * k;
    let (step_variables, step_interaction_bound, step_ancilla_bound) = match field {
        Field::F2 => (triple, entries, entries),
        Field::Real => {
            let bound = entries * (k3 + 1) * (k3 + 1);
            (k * triple, bound, 2 * bound)
        }
    };
    let holistic_interaction_bound = entries * (rank * k3 + 1) * (rank * k3 + 1);
    Ok(ResourceEstimate {
        step_variables,
        holistic_variables: k * rank * triple,
        step_interaction_bound,
        holistic_interaction_bound,
        step_ancilla_bound,
        holistic_ancilla_bound: 2 * holistic_interaction_bound,
    })
}
