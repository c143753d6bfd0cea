use rand::Rng;
use rayon::prelude::*;

use super::flip::{FlipIndex, FlipState};
use super::{initial_bits, restart_rng, SolverConfig, SolverResult};
use crate::error::Result;
use crate::pbpoly::PseudoBooleanPolynomial;

/// Greedy tabu search. Each move flips the best non-tabu variable, ties
/// broken at random; a tabu move is still taken when it reaches a new best
/// energy.
pub fn solve_tabu(problem: &PseudoBooleanPolynomial, config: &SolverConfig) -> Result<SolverResult> {
    config.validate()?;
    let index = FlipIndex::new(problem);
    let runs: Vec<(f64, Vec<bool>, u64)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run(&index, config, r))
        .collect();
    super::merge_restarts(problem, config, runs)
}

fn run(index: &FlipIndex, config: &SolverConfig, restart: usize) -> (f64, Vec<bool>, u64) {
    let mut rng = restart_rng(config.seed, restart);
    let n = index.num_vars();
    let bits = initial_bits(config, restart, n, &mut rng);
    let mut state = FlipState::new(index, bits, true);
    let mut best_e = state.energy();
    let mut best = state.bits().to_vec();
    if n == 0 {
        return (best_e, best, 1);
    }
    let tenure = config.tabu_tenure.unwrap_or((n / 4).clamp(1, 20)).min(n - 1);
    let mut tabu_until = vec![0u64; n];
    let moves = (config.sweeps.max(1) * n) as u64;
    let mut evaluated = 1u64;
    for step in 1..=moves {
        let mut pick: Option<(f64, usize)> = None;
        let mut ties = 0u32;
        for (v, &until) in tabu_until.iter().enumerate() {
            let d = state.delta(v);
            if !(until < step || state.energy() + d < best_e) {
                continue;
            }
            match pick {
                Some((pd, _)) if d > pd => {}
                Some((pd, _)) if d == pd => {
                    ties += 1;
                    if rng.random_range(0..ties) == 0 {
                        pick = Some((d, v));
                    }
                }
                _ => {
                    pick = Some((d, v));
                    ties = 1;
                }
            }
        }
        evaluated += n as u64;
        let Some((_, v)) = pick else { continue };
        state.flip(v);
        tabu_until[v] = step + tenure as u64;
        if state.energy() < best_e {
            best_e = state.energy();
            best.copy_from_slice(state.bits());
        }
    }
    (best_e, best, evaluated)
}
