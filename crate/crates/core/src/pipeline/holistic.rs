use serde::Serialize;

use super::verify::{verify_decomposition, VerificationReport};
use crate::error::Result;
use crate::objectives::build_holistic;
use crate::quadratize::{reduce, IntegerEncoding, PenaltyWeight, ReductionMethod, ReductionReport};
use crate::solvers::{solve, solve_reduced, SolverConfig, SolverResult};
use crate::tensor::{Decomposition, Field, MatMulShape, RankOneTriple, Tensor3};

#[derive(Debug, Clone)]
pub struct HolisticConfig {
    pub rank: usize,
    /// Ternary pairs when `None`.
    pub encoding: Option<IntegerEncoding>,
    pub reduction: Option<ReductionMethod>,
    pub penalty: PenaltyWeight,
    pub solver: SolverConfig,
    /// Decomposition to start restart 0 from, encoded through the objective.
    pub warm_start: Option<Vec<RankOneTriple>>,
    pub verify_trials: u64,
}

impl HolisticConfig {
    pub fn new(rank: usize, solver: SolverConfig) -> Self {
        Self {
            rank,
            encoding: None,
            reduction: None,
            penalty: PenaltyWeight::Auto,
            solver,
            warm_start: None,
            verify_trials: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HolisticOutcome {
    /// Present only when the objective reached zero.
    pub decomposition: Option<Decomposition>,
    pub verification: Option<VerificationReport>,
    /// Objective value at the best assignment, ancillas dropped.
    pub energy: f64,
    pub num_vars: usize,
    pub reduction: Option<ReductionReport>,
    pub result: SolverResult,
}

#[derive(Serialize)]
struct OutcomeJson<'a> {
    found: bool,
    energy: f64,
    num_vars: usize,
    decomposition: Option<&'a Decomposition>,
    verification: Option<&'a VerificationReport>,
    reduction: Option<&'a ReductionReport>,
    assignment: String,
    solver: String,
    seed: u64,
}

impl HolisticOutcome {
    pub fn found(&self) -> bool {
        self.decomposition.is_some()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&OutcomeJson {
            found: self.found(),
            energy: self.energy,
            num_vars: self.num_vars,
            decomposition: self.decomposition.as_ref(),
            verification: self.verification.as_ref(),
            reduction: self.reduction.as_ref(),
            assignment: self.result.assignment_string(),
            solver: self.result.solver.to_string(),
            seed: self.result.seed,
        })
        .expect("outcome serializes")
    }
}

/// Fixed-rank search: minimize the whole-decomposition objective once. A zero
/// minimum decodes to a decomposition with at most `rank` nonzero factors;
/// factors whose product vanishes are dropped.
pub fn run_holistic(shape: MatMulShape, config: &HolisticConfig) -> Result<HolisticOutcome> {
    let target = Tensor3::standard(shape, Field::Real);
    let obj = build_holistic(&target, config.rank, config.encoding.clone())?;
    let mut solver = config.solver.clone();
    if let Some(ws) = &config.warm_start {
        solver.initial = Some(obj.encode(ws)?);
    }

    let (result, reduction) = match config.reduction {
        None => (solve(&obj.polynomial, &solver)?, None),
        Some(method) => {
            let (q, report) = reduce(&obj.polynomial, method, config.penalty)?;
            if let Some(init) = &solver.initial {
                solver.initial = Some(q.complete(init)?);
            }
            let mut r = solve_reduced(&q, &solver)?;
            r.assignment.truncate(q.original_vars());
            (r, Some(report))
        }
    };
    let energy = obj.polynomial.evaluate(&result.assignment)?;

    let (decomposition, verification) = if energy == 0.0 {
        let factors: Vec<RankOneTriple> = obj
            .decode(&result.assignment)?
            .into_iter()
            .filter(|t| !t.is_zero())
            .collect();
        let d = Decomposition::from_factors(shape, Field::Real, factors)?;
        let report = verify_decomposition(&d, config.verify_trials, config.solver.seed)?;
        (Some(d), Some(report))
    } else {
        (None, None)
    };

    Ok(HolisticOutcome {
        decomposition,
        verification,
        energy,
        num_vars: obj.num_vars(),
        reduction,
        result,
    })
}
