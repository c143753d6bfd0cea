use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rayon::prelude::*;

use super::flip::{FlipIndex, FlipState};
use super::{initial_bits, restart_rng, SolverConfig, SolverResult};
use crate::error::Result;
use crate::pbpoly::{PseudoBooleanPolynomial, VarId};
use crate::quadratize::QuadraticModel;

/// Simulated annealing with single-bit flips and a geometric temperature
/// schedule. Restarts run in parallel and merge by `(energy, assignment)`.
pub fn solve_anneal(
    problem: &PseudoBooleanPolynomial,
    config: &SolverConfig,
) -> Result<SolverResult> {
    config.validate()?;
    let index = FlipIndex::new(problem);
    let (t0, t1) = temperatures(problem, config);
    let runs: Vec<(f64, Vec<bool>, u64)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run(&index, config, r, t0, t1))
        .collect();
    super::merge_restarts(problem, config, runs)
}

/// Explicit temperatures, or a range derived from the coefficient scale:
/// start where a typical term can be paid for, end where the smallest one
/// is almost never accepted.
fn temperatures(problem: &PseudoBooleanPolynomial, config: &SolverConfig) -> (f64, f64) {
    let mags: Vec<f64> = problem
        .iter()
        .filter(|(k, _)| !k.is_empty())
        .map(|(_, c)| c.abs())
        .collect();
    let max = mags.iter().cloned().fold(0.0, f64::max).max(1e-9);
    let min = mags.iter().cloned().fold(f64::INFINITY, f64::min).min(max);
    let t0 = config.initial_temperature.unwrap_or(max);
    let t1 = config
        .final_temperature
        .unwrap_or((min / 10.0).min(t0));
    (t0, t1)
}

fn run(index: &FlipIndex, config: &SolverConfig, restart: usize, t0: f64, t1: f64) -> (f64, Vec<bool>, u64) {
    let mut rng = restart_rng(config.seed, restart);
    let n = index.num_vars();
    let bits = initial_bits(config, restart, n, &mut rng);
    let mut state = FlipState::new(index, bits, true);
    let mut best_e = state.energy();
    let mut best = state.bits().to_vec();
    let mut evaluated = 1u64;
    let sweeps = config.sweeps.max(1);
    let ratio = if sweeps > 1 {
        (t1 / t0).powf(1.0 / (sweeps - 1) as f64)
    } else {
        1.0
    };
    let mut temp = t0;
    for _ in 0..sweeps {
        for v in 0..n {
            let d = state.delta(v);
            evaluated += 1;
            if d <= 0.0 || rng.random::<f64>() < (-d / temp).exp() {
                state.flip(v);
                if state.energy() < best_e {
                    best_e = state.energy();
                    best.copy_from_slice(state.bits());
                }
            }
        }
        temp *= ratio;
    }
    (best_e, best, evaluated)
}

/// Annealing over a quadratized model where each move flips one original
/// variable and then greedily relaxes the ancillas around it. The whole
/// compound move is accepted or undone as one step on the model's energy.
/// Single-bit moves rarely get past the pair penalties that hold ancillas
/// in place, so this is the default for reduced models.
pub fn solve_anneal_reduced(model: &QuadraticModel, config: &SolverConfig) -> Result<SolverResult> {
    config.validate()?;
    let problem = model.polynomial();
    let index = FlipIndex::new(problem);
    let first_ancilla = model.original_vars() as VarId;
    let mut ancilla_neighbors: Vec<Vec<VarId>> = vec![Vec::new(); problem.num_vars()];
    for (vars, _) in problem.sorted_terms() {
        if let [a, b] = *vars.as_slice() {
            if b >= first_ancilla {
                ancilla_neighbors[a as usize].push(b);
            }
            if a >= first_ancilla {
                ancilla_neighbors[b as usize].push(a);
            }
        }
    }
    for list in &mut ancilla_neighbors {
        list.sort_unstable();
        list.dedup();
    }
    let (t0, t1) = temperatures(problem, config);
    let runs: Vec<Result<(f64, Vec<bool>, u64)>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_reduced(model, &index, &ancilla_neighbors, config, r, t0, t1))
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    super::merge_restarts(problem, config, runs)
}

fn run_reduced(
    model: &QuadraticModel,
    index: &FlipIndex,
    neighbors: &[Vec<VarId>],
    config: &SolverConfig,
    restart: usize,
    t0: f64,
    t1: f64,
) -> Result<(f64, Vec<bool>, u64)> {
    let mut rng = restart_rng(config.seed, restart);
    let n = model.original_vars();
    let bits = match (&config.initial, restart) {
        (Some(init), 0) => init.clone(),
        _ => {
            let originals: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
            model.complete(&originals)?
        }
    };
    let mut state = FlipState::new(index, bits, true);
    let mut best_e = state.energy();
    let mut best = state.bits().to_vec();
    let mut evaluated = 1u64;
    let sweeps = config.sweeps.max(1);
    let ratio = if sweeps > 1 {
        (t1 / t0).powf(1.0 / (sweeps - 1) as f64)
    } else {
        1.0
    };
    let mut temp = t0;
    let mut flipped: Vec<usize> = Vec::new();
    let mut queued = vec![false; index.num_vars()];
    let mut heap: BinaryHeap<Reverse<VarId>> = BinaryHeap::new();
    for _ in 0..sweeps {
        for v in 0..n {
            let before = state.energy();
            flipped.clear();
            state.flip(v);
            flipped.push(v);
            for &u in &neighbors[v] {
                if !queued[u as usize] {
                    queued[u as usize] = true;
                    heap.push(Reverse(u));
                }
            }
            while let Some(Reverse(u)) = heap.pop() {
                let u = u as usize;
                queued[u] = false;
                evaluated += 1;
                if state.delta(u) < 0.0 {
                    state.flip(u);
                    flipped.push(u);
                    for &w in &neighbors[u] {
                        if !queued[w as usize] && w as usize > u {
                            queued[w as usize] = true;
                            heap.push(Reverse(w));
                        }
                    }
                }
            }
            let d = state.energy() - before;
            if d <= 0.0 || rng.random::<f64>() < (-d / temp).exp() {
                if state.energy() < best_e {
                    best_e = state.energy();
                    best.copy_from_slice(state.bits());
                }
            } else {
                for &u in flipped.iter().rev() {
                    state.flip(u);
                }
            }
        }
        temp *= ratio;
    }
    Ok((best_e, best, evaluated))
}
