use super::{finalize, SolverConfig, SolverResult};
use crate::error::{Error, Result};
use crate::pbpoly::PseudoBooleanPolynomial;

/// Variables handled by one dense table.
const LOW_BITS: usize = 12;

/// Enumerates every assignment. The low variables are tabulated at once for
/// each setting of the high ones: the restricted polynomial's coefficients go
/// into a subset-indexed table and a subset-sum transform turns it into the
/// energy of every low completion. Ties resolve to the lexicographically
/// smallest assignment, variable 0 first.
pub fn solve_exhaustive(
    problem: &PseudoBooleanPolynomial,
    config: &SolverConfig,
) -> Result<SolverResult> {
    let n = problem.num_vars();
    if n > config.exhaustive_limit {
        return Err(Error::Capacity {
            num_vars: n,
            limit: config.exhaustive_limit,
        });
    }
    let k = n.min(LOW_BITS);
    let low_all = (1usize << k) - 1;
    let terms: Vec<(usize, u64, f64)> = problem
        .sorted_terms()
        .into_iter()
        .map(|(vars, c)| {
            let mask = vars.as_slice().iter().fold(0u64, |m, &v| m | 1 << v);
            (mask as usize & low_all, mask >> k, c)
        })
        .collect();
    // Lexicographic order with variable 0 first is numeric order of the
    // bit-reversed assignment.
    let key = |low: usize, high: u64| -> u64 {
        let full = (high << k) | low as u64;
        full.reverse_bits() >> (64 - n.max(1))
    };

    let mut table = vec![0.0f64; 1 << k];
    let mut best: Option<(f64, u64, usize, u64)> = None;
    for high in 0..1u64 << (n - k) {
        table.fill(0.0);
        for &(low, hmask, c) in &terms {
            if hmask & !high == 0 {
                table[low] += c;
            }
        }
        for b in 0..k {
            let bit = 1 << b;
            for s in 0..table.len() {
                if s & bit != 0 {
                    table[s] += table[s ^ bit];
                }
            }
        }
        for (low, &e) in table.iter().enumerate() {
            let better = match best {
                None => true,
                Some((be, bk, _, _)) => {
                    let tol = 1e-9 * (1.0 + be.abs());
                    e < be - tol || (e <= be + tol && key(low, high) < bk)
                }
            };
            if better {
                best = Some((e, key(low, high), low, high));
            }
        }
    }
    let (_, _, low, high) = best.expect("at least one assignment");
    let full = (high << k) | low as u64;
    let assignment = (0..n).map(|i| full >> i & 1 == 1).collect();
    finalize(problem, config, assignment, 1u64 << n, Vec::new())
}
