use std::io::Write;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pbpoly::{Evaluator, PseudoBooleanPolynomial};
use crate::solvers::stream_rng;

pub const CSV_HEADER: &str = "chunk_index,assignment_integer_decimal,energy,log1p_energy,is_inserted_optimum";

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeRow {
    /// Chunk number; in neighborhood mode, the signed offset from the center.
    pub chunk_index: i64,
    pub assignment: BigUint,
    pub energy: f64,
    pub inserted: bool,
}

/// Bit `i` of the integer is variable `i`.
pub fn assignment_to_integer(bits: &[bool]) -> BigUint {
    let mut v = BigUint::zero();
    for (i, &b) in bits.iter().enumerate() {
        if b {
            v.set_bit(i as u64, true);
        }
    }
    v
}

pub fn integer_to_assignment(v: &BigUint, num_vars: usize) -> Result<Vec<bool>> {
    if v.bits() > num_vars as u64 {
        return Err(Error::Parameter(format!(
            "integer {v} does not fit in {num_vars} bits"
        )));
    }
    Ok((0..num_vars as u64).map(|i| v.bit(i)).collect())
}

/// Uniform integer in `[0, bound)` by rejection on the bit length.
fn uniform_below(rng: &mut impl RngCore, bound: &BigUint) -> BigUint {
    let bits = bound.bits();
    let words = bits.div_ceil(32) as usize;
    let excess = (words as u64 * 32 - bits) as u32;
    loop {
        let mut digits: Vec<u32> = (0..words).map(|_| rng.next_u32()).collect();
        if let Some(top) = digits.last_mut() {
            *top = top.checked_shr(excess).unwrap_or(0);
        }
        let v = BigUint::from_slice(&digits);
        if &v < bound {
            return v;
        }
    }
}

/// Splits `[0, 2^num_vars)` into `chunks` equal ranges and evaluates
/// `per_chunk` uniform points in each. Known optima are added at their own
/// positions and flagged. Rows come ordered by chunk, then assignment.
pub fn sample_landscape(
    poly: &PseudoBooleanPolynomial,
    chunks: u64,
    per_chunk: usize,
    seed: u64,
    optima: &[Vec<bool>],
) -> Result<Vec<LandscapeRow>> {
    let n = poly.num_vars();
    if chunks < 1 {
        return Err(Error::Parameter("at least one chunk is required".into()));
    }
    let space = BigUint::one() << n;
    if BigUint::from(chunks) > space {
        return Err(Error::Parameter(format!(
            "{chunks} chunks exceed the {n}-bit assignment space"
        )));
    }
    let eval = poly.compile();
    let bound = |c: u64| -> BigUint { (&space * c) / chunks };

    let mut inserted: Vec<(u64, BigUint)> = Vec::with_capacity(optima.len());
    for o in optima {
        if o.len() != n {
            return Err(Error::Shape(format!(
                "optimum has {} bits, objective has {n} variables",
                o.len()
            )));
        }
        let v = assignment_to_integer(o);
        let c = ((&v * chunks) >> n).to_u64().expect("chunk index fits");
        inserted.push((c, v));
    }

    let mut rows: Vec<LandscapeRow> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Vec<LandscapeRow>> {
            let mut rng = stream_rng(seed, c);
            let lo = bound(c);
            let width = bound(c + 1) - &lo;
            (0..per_chunk)
                .map(|_| {
                    let v = &lo + uniform_below(&mut rng, &width);
                    row(&eval, c as i64, v, n, false)
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    for (c, v) in inserted {
        rows.push(row(&eval, c as i64, v, n, true)?);
    }
    rows.sort_by(|a, b| {
        a.chunk_index
            .cmp(&b.chunk_index)
            .then_with(|| a.assignment.cmp(&b.assignment))
            .then_with(|| a.inserted.cmp(&b.inserted))
    });
    Ok(rows)
}

fn row(eval: &Evaluator, chunk_index: i64, v: BigUint, n: usize, inserted: bool) -> Result<LandscapeRow> {
    let bits = integer_to_assignment(&v, n)?;
    Ok(LandscapeRow {
        chunk_index,
        energy: eval.evaluate(&bits)?,
        assignment: v,
        inserted,
    })
}

/// Every assignment within `width` of `center` in integer order, clipped to
/// the assignment space. `center` itself is flagged as inserted.
pub fn sample_neighborhood(
    poly: &PseudoBooleanPolynomial,
    center: &[bool],
    width: u64,
) -> Result<Vec<LandscapeRow>> {
    let n = poly.num_vars();
    if center.len() != n {
        return Err(Error::Shape(format!(
            "center has {} bits, objective has {n} variables",
            center.len()
        )));
    }
    let eval = poly.compile();
    let c = assignment_to_integer(center);
    let top = (BigUint::one() << n) - 1u32;
    let mut rows = Vec::new();
    for off in -(width as i64)..=width as i64 {
        let v = if off < 0 {
            let d = BigUint::from(off.unsigned_abs());
            if d > c {
                continue;
            }
            &c - d
        } else {
            let v = &c + BigUint::from(off as u64);
            if v > top {
                continue;
            }
            v
        };
        rows.push(row(&eval, off, v, n, off == 0)?);
    }
    Ok(rows)
}

pub fn write_csv(rows: &[LandscapeRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.chunk_index,
            r.assignment,
            r.energy,
            r.energy.ln_1p(),
            r.inserted
        )?;
    }
    Ok(())
}

/// Signed distance of `index` from the middle of `[0, 2^num_vars)`, as a
/// percentage of the whole range.
pub fn midpoint_offset_percent(index: &BigUint, num_vars: usize) -> f64 {
    let mid = BigUint::one() << (num_vars - 1);
    let (diff, sign) = if index >= &mid {
        (index - &mid, 1.0)
    } else {
        (&mid - index, -1.0)
    };
    // Keep 60 significant bits before converting to floating point.
    let shift = num_vars.saturating_sub(60);
    let d = (diff >> shift).to_f64().unwrap_or(f64::INFINITY);
    let total = 2f64.powi((num_vars - shift) as i32);
    sign * 100.0 * d / total
}
