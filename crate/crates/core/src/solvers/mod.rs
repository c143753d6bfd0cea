//! Minimizers for pseudo-Boolean polynomials of any degree.
//!
//! All solvers work on a plain [`PseudoBooleanPolynomial`], so a quadratized
//! model is solved the same way as the original. Results are deterministic in
//! `(problem, config)`: restart `r` draws from its own stream seeded by
//! `(seed, r)` and restarts merge by `(energy, assignment)`.

mod anneal;
mod exhaustive;
mod flip;
mod tabu;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use anneal::{solve_anneal, solve_anneal_reduced};
pub use exhaustive::solve_exhaustive;
pub use tabu::solve_tabu;

use crate::error::{Error, Result};
use crate::pbpoly::PseudoBooleanPolynomial;
use crate::quadratize::QuadraticModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Exhaustive,
    Anneal,
    Tabu,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Exhaustive => "exhaustive",
            SolverKind::Anneal => "anneal",
            SolverKind::Tabu => "tabu",
        })
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Self::Exhaustive),
            "anneal" => Ok(Self::Anneal),
            "tabu" => Ok(Self::Tabu),
            _ => Err(Error::Parameter(format!("unknown solver {s:?}"))),
        }
    }
}

pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 26;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub kind: SolverKind,
    pub seed: u64,
    pub restarts: usize,
    pub sweeps: usize,
    /// Derived from the coefficient range when absent.
    pub initial_temperature: Option<f64>,
    pub final_temperature: Option<f64>,
    /// Defaults to a quarter of the variable count, capped at 20.
    pub tabu_tenure: Option<usize>,
    pub exhaustive_limit: usize,
    /// Starting point of restart 0 for the heuristic solvers.
    pub initial: Option<Vec<bool>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::new(SolverKind::Anneal)
    }
}

impl SolverConfig {
    pub fn new(kind: SolverKind) -> Self {
        Self {
            kind,
            seed: 0,
            restarts: 8,
            sweeps: 1000,
            initial_temperature: None,
            final_temperature: None,
            tabu_tenure: None,
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
            initial: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_sweeps(mut self, sweeps: usize) -> Self {
        self.sweeps = sweeps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::Parameter("restarts must be at least 1".into()));
        }
        for t in [self.initial_temperature, self.final_temperature]
            .into_iter()
            .flatten()
        {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Parameter(format!(
                    "temperatures must be positive, got {t}"
                )));
            }
        }
        if let (Some(a), Some(b)) = (self.initial_temperature, self.final_temperature) {
            if a < b {
                return Err(Error::Parameter(format!(
                    "initial temperature {a} is below final temperature {b}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub assignment: Vec<bool>,
    pub energy: f64,
    pub samples_evaluated: u64,
    pub wall_time: Duration,
    pub restart_energies: Vec<f64>,
    pub solver: SolverKind,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct ResultJson {
    energy: f64,
    assignment: String,
    solver: SolverKind,
    seed: u64,
    samples_evaluated: u64,
    restart_energies: Vec<f64>,
}

impl SolverResult {
    /// Bits as a `0`/`1` string, variable 0 first.
    pub fn assignment_string(&self) -> String {
        self.assignment
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    /// Wall time is left out so that equal runs serialize identically.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ResultJson {
            energy: self.energy,
            assignment: self.assignment_string(),
            solver: self.solver,
            seed: self.seed,
            samples_evaluated: self.samples_evaluated,
            restart_energies: self.restart_energies.clone(),
        })
        .expect("result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ResultJson = serde_json::from_str(text)?;
        Ok(Self {
            assignment: parse_bits(&raw.assignment)?,
            energy: raw.energy,
            samples_evaluated: raw.samples_evaluated,
            wall_time: Duration::ZERO,
            restart_energies: raw.restart_energies,
            solver: raw.solver,
            seed: raw.seed,
        })
    }
}

pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Parse(format!("assignment character {c:?} is not 0 or 1"))),
        })
        .collect()
}

/// Exact value of `problem` at `assignment`.
pub fn energy(problem: &PseudoBooleanPolynomial, assignment: &[bool]) -> Result<f64> {
    problem.evaluate(assignment)
}

pub fn solve(problem: &PseudoBooleanPolynomial, config: &SolverConfig) -> Result<SolverResult> {
    let start = Instant::now();
    if let Some(init) = &config.initial {
        if init.len() != problem.num_vars() {
            return Err(Error::Shape(format!(
                "initial assignment has {} bits, problem has {} variables",
                init.len(),
                problem.num_vars()
            )));
        }
    }
    let mut r = match config.kind {
        SolverKind::Exhaustive => solve_exhaustive(problem, config),
        SolverKind::Anneal => solve_anneal(problem, config),
        SolverKind::Tabu => solve_tabu(problem, config),
    }?;
    r.wall_time = start.elapsed();
    Ok(r)
}

/// Minimizes a quadratized model. Annealing uses ancilla-aware moves; the
/// other solvers see the plain polynomial.
pub fn solve_reduced(model: &QuadraticModel, config: &SolverConfig) -> Result<SolverResult> {
    let start = Instant::now();
    if config.kind != SolverKind::Anneal {
        return solve(model.polynomial(), config);
    }
    if let Some(init) = &config.initial {
        if init.len() != model.num_vars() {
            return Err(Error::Shape(format!(
                "initial assignment has {} bits, model has {} variables",
                init.len(),
                model.num_vars()
            )));
        }
    }
    let mut r = solve_anneal_reduced(model, config)?;
    r.wall_time = start.elapsed();
    Ok(r)
}

/// splitmix64 finalizer.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, stream))
}

pub(crate) fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    stream_rng(seed, restart as u64)
}

pub(crate) fn initial_bits(
    config: &SolverConfig,
    restart: usize,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<bool> {
    match (&config.initial, restart) {
        (Some(init), 0) => init.clone(),
        _ => (0..n).map(|_| rng.random::<bool>()).collect(),
    }
}

fn merge_restarts(
    problem: &PseudoBooleanPolynomial,
    config: &SolverConfig,
    mut runs: Vec<(f64, Vec<bool>, u64)>,
) -> Result<SolverResult> {
    for r in &mut runs {
        r.0 += 0.0;
    }
    let restart_energies: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let evaluated = runs.iter().map(|r| r.2).sum();
    let (_, best, _) = runs
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .expect("at least one restart");
    finalize(problem, config, best, evaluated, restart_energies)
}

fn finalize(
    problem: &PseudoBooleanPolynomial,
    config: &SolverConfig,
    assignment: Vec<bool>,
    samples_evaluated: u64,
    restart_energies: Vec<f64>,
) -> Result<SolverResult> {
    Ok(SolverResult {
        energy: energy(problem, &assignment)?,
        assignment,
        samples_evaluated,
        wall_time: Duration::ZERO,
        restart_energies,
        solver: config.kind,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabu_single_variable() {
        let mut p = PseudoBooleanPolynomial::constant(1, 1.0);
        p.add_term(&[0], -1.0).unwrap();
        let r = solve(&p, &SolverConfig::new(SolverKind::Tabu)).unwrap();
        assert_eq!(r.assignment, vec![true]);
        assert_eq!(r.energy, 0.0);
    }

    #[test]
    fn constant_problem_terminates() {
        let p = PseudoBooleanPolynomial::constant(4, 2.5);
        for kind in [SolverKind::Tabu, SolverKind::Anneal, SolverKind::Exhaustive] {
            let r = solve(&p, &SolverConfig::new(kind).with_sweeps(10)).unwrap();
            assert_eq!(r.energy, 2.5);
        }
    }

    #[test]
    fn bad_temperatures_are_rejected() {
        let mut c = SolverConfig::new(SolverKind::Anneal);
        c.initial_temperature = Some(0.1);
        c.final_temperature = Some(1.0);
        assert!(c.validate().is_err());
        c.initial_temperature = Some(-1.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn result_json_round_trip() {
        let mut p = PseudoBooleanPolynomial::new(3);
        p.add_term(&[0, 2], -1.0).unwrap();
        let r = solve(&p, &SolverConfig::new(SolverKind::Exhaustive).with_seed(9)).unwrap();
        let text = r.to_json();
        assert!(text.starts_with("{\"energy\":-1.0,\"assignment\":\"101\",\"solver\":\"exhaustive\",\"seed\":9"));
        let back = SolverResult::from_json(&text).unwrap();
        assert_eq!(back.assignment, r.assignment);
    }

    #[test]
    fn seed_streams_differ() {
        assert_ne!(mix_seed(0, 0), mix_seed(0, 1));
        assert_ne!(mix_seed(0, 0), mix_seed(1, 0));
    }
}
