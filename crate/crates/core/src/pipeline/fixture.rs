use serde::{Deserialize, Serialize};

use super::HighEnergyPoint;
use crate::error::Result;
use crate::tensor::{Decomposition, Field, MatMulShape, RankOneTriple, Tensor3};

/// Starting point for the 2x2 search plus the decomposition it leads to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrassenFixture {
    #[serde(flatten)]
    pub point: HighEnergyPoint,
    /// Strassen's products `m1..m7`, in that order.
    pub reference: Decomposition,
    /// Reference indices `(left, right)` of partner factors: reversing every
    /// vector of the left factor gives the right one.
    pub pairing: Vec<(usize, usize)>,
    /// Reference indices whose rank-one tensors were removed from the
    /// standard tensor to build the starting tensor.
    pub removed: Vec<usize>,
}

fn t(x: [i64; 4], y: [i64; 4], z: [i64; 4]) -> RankOneTriple {
    RankOneTriple::new(x.to_vec(), y.to_vec(), z.to_vec())
}

/// Strassen's seven products over `(a, b, c, d) x (e, f, g, h)`.
pub fn strassen_reference() -> Decomposition {
    let shape = MatMulShape::new(2, 2, 2).expect("valid shape");
    let factors = vec![
        t([1, 0, 0, 1], [1, 0, 0, 1], [1, 0, 0, 1]),
        t([0, 0, 1, 1], [1, 0, 0, 0], [0, 1, 0, -1]),
        t([1, 0, 0, 0], [0, 1, 0, -1], [0, 0, 1, 1]),
        t([0, 0, 0, 1], [-1, 0, 1, 0], [1, 1, 0, 0]),
        t([1, 1, 0, 0], [0, 0, 0, 1], [-1, 0, 1, 0]),
        t([-1, 0, 1, 0], [1, 1, 0, 0], [0, 0, 0, 1]),
        t([0, 1, 0, -1], [0, 0, 1, 1], [1, 0, 0, 0]),
    ];
    Decomposition::from_factors(shape, Field::Real, factors).expect("nonzero factors")
}

pub fn strassen_fixture() -> StrassenFixture {
    let reference = strassen_reference();
    let removed = vec![4, 3, 5];
    let mut t_high = Tensor3::standard(reference.shape, Field::Real);
    for &i in &removed {
        t_high = t_high.subtract(&reference.factors[i]).expect("shape matches");
    }
    StrassenFixture {
        point: HighEnergyPoint {
            t_high,
            seed: reference.factors[0].clone(),
        },
        pairing: vec![(4, 1), (3, 2), (5, 6)],
        removed,
        reference,
    }
}

fn reversed(t: &RankOneTriple) -> RankOneTriple {
    let r = |v: &Vec<i64>| v.iter().rev().copied().collect();
    RankOneTriple::new(r(&t.x), r(&t.y), r(&t.z))
}

impl StrassenFixture {
    /// Checks the pairing symmetry, and that the seed is its own partner.
    pub fn check_pairing(&self) -> bool {
        let f = &self.reference.factors;
        let paired = self
            .pairing
            .iter()
            .all(|&(l, r)| l < f.len() && r < f.len() && reversed(&f[l]) == f[r]);
        paired && reversed(&self.point.seed) == self.point.seed
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("fixture serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Self = serde_json::from_str(text)?;
        raw.point.validate()?;
        Ok(raw)
    }
}
