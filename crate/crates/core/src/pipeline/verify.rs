use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::stream_rng;
use crate::tensor::{Decomposition, Field, MatMulShape};

/// Outcome of running a decomposition as a multiplication algorithm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub valid: bool,
    pub rank: usize,
    pub trials: u64,
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub a: Vec<Vec<i64>>,
    pub b: Vec<Vec<i64>>,
    pub expected: Vec<Vec<i64>>,
    pub got: Vec<Vec<i64>>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// GF(2) decompositions are checked on every matrix pair up to this many
/// input bits, and on random pairs beyond it.
pub const EXHAUSTIVE_BITS: usize = 16;

/// Multiplies `a` (n x m) by `b` (m x p) with the bilinear algorithm the
/// decomposition describes: one scalar product per factor, each a linear
/// form of `a` times a linear form of `b`, spread into the output.
pub fn multiply_with(d: &Decomposition, a: &[i64], b: &[i64]) -> Result<Vec<i64>> {
    let MatMulShape { n, m, p } = d.shape;
    if a.len() != n * m || b.len() != m * p {
        return Err(Error::Shape(format!(
            "matrices of {} and {} entries do not fit shape {}",
            a.len(),
            b.len(),
            d.shape
        )));
    }
    let mut c = vec![0i64; p * n];
    for f in &d.factors {
        f.check_shape(d.shape)?;
        let u: i64 = f.x.iter().zip(a).map(|(x, v)| x * v).sum();
        let w: i64 = f.y.iter().zip(b).map(|(y, v)| y * v).sum();
        let prod = u * w;
        if prod != 0 {
            for (ci, z) in c.iter_mut().zip(&f.z) {
                *ci += prod * z;
            }
        }
    }
    // c is indexed k * n + i; return row-major C[i][k].
    let mut out = vec![0i64; n * p];
    for i in 0..n {
        for k in 0..p {
            out[i * p + k] = d.field.reduce(c[k * n + i]);
        }
    }
    Ok(out)
}

fn schoolbook(shape: MatMulShape, field: Field, a: &[i64], b: &[i64]) -> Vec<i64> {
    let MatMulShape { n, m, p } = shape;
    let mut out = vec![0i64; n * p];
    for i in 0..n {
        for k in 0..p {
            let s: i64 = (0..m).map(|j| a[i * m + j] * b[j * p + k]).sum();
            out[i * p + k] = field.reduce(s);
        }
    }
    out
}

fn rows(flat: &[i64], cols: usize) -> Vec<Vec<i64>> {
    flat.chunks(cols).map(<[i64]>::to_vec).collect()
}

/// Runs the decomposition against ground-truth products. Over GF(2) small
/// shapes are checked exhaustively and `trials` is ignored; otherwise
/// `trials` random pairs are drawn, with integer entries in `[-9, 9]`.
pub fn verify_decomposition(d: &Decomposition, trials: u64, seed: u64) -> Result<VerificationReport> {
    d.shape.validate()?;
    let MatMulShape { n, m, p } = d.shape;
    let (na, nb) = (n * m, m * p);
    let check = |a: &[i64], b: &[i64]| -> Result<Option<Counterexample>> {
        let got = multiply_with(d, a, b)?;
        let expected = schoolbook(d.shape, d.field, a, b);
        Ok((got != expected).then(|| Counterexample {
            a: rows(a, m),
            b: rows(b, p),
            expected: rows(&expected, p),
            got: rows(&got, p),
        }))
    };
    let report = |count: u64, counterexample: Option<Counterexample>| VerificationReport {
        valid: counterexample.is_none(),
        rank: d.rank(),
        trials: count,
        counterexample,
    };

    if d.field == Field::F2 && na + nb <= EXHAUSTIVE_BITS {
        let total = 1u64 << (na + nb);
        for v in 0..total {
            let a: Vec<i64> = (0..na).map(|i| (v >> i & 1) as i64).collect();
            let b: Vec<i64> = (0..nb).map(|i| (v >> (na + i) & 1) as i64).collect();
            if let Some(cx) = check(&a, &b)? {
                return Ok(report(v + 1, Some(cx)));
            }
        }
        return Ok(report(total, None));
    }

    let mut rng = stream_rng(seed, 0);
    for trial in 0..trials {
        let mut draw = |len: usize| -> Vec<i64> {
            (0..len)
                .map(|_| match d.field {
                    Field::F2 => rng.random_range(0..=1),
                    Field::Real => rng.random_range(-9..=9),
                })
                .collect()
        };
        let a = draw(na);
        let b = draw(nb);
        if let Some(cx) = check(&a, &b)? {
            return Ok(report(trial + 1, Some(cx)));
        }
    }
    Ok(report(trials, None))
}

/// Replaces each GF(2) factor by the signed reference factor equal to it
/// mod 2. Each reference factor is used at most once.
pub fn lift_to_real(d: &Decomposition, reference: &Decomposition) -> Result<Decomposition> {
    if d.shape != reference.shape {
        return Err(Error::Shape(format!(
            "decomposition shape {} differs from reference shape {}",
            d.shape, reference.shape
        )));
    }
    let mut used = vec![false; reference.rank()];
    let mut lifted = Decomposition::new(d.shape, Field::Real);
    for f in &d.factors {
        let target = f.mod2();
        let idx = reference
            .factors
            .iter()
            .enumerate()
            .position(|(i, r)| !used[i] && r.mod2() == target)
            .ok_or_else(|| {
                Error::Parameter(format!("factor {f:?} has no unused reference match mod 2"))
            })?;
        used[idx] = true;
        lifted.push(reference.factors[idx].clone())?;
    }
    Ok(lifted)
}
