use serde::{Deserialize, Serialize};

use super::{HighEnergyPoint, StallInfo};
use crate::error::{Error, Result};
use crate::objectives::{build_step_f2, build_step_real, StepObjective};
use crate::quadratize::{
    encode_integer_ternary_pair, reduce, IntegerEncoding, PenaltyWeight, ReductionMethod,
};
use crate::solvers::{mix_seed, solve, solve_reduced, SolverConfig, SolverResult};
use crate::tensor::{hamming_distance, Decomposition, Field, MatMulShape, RankOneTriple, Tensor3};

/// How each step objective is built and minimized.
#[derive(Debug, Clone)]
pub struct StepSolver {
    pub solver: SolverConfig,
    /// Solve a quadratized copy instead of the cubic objective.
    pub reduction: Option<ReductionMethod>,
    /// Component encoding for integer steps.
    pub encoding: IntegerEncoding,
}

impl StepSolver {
    pub fn new(solver: SolverConfig) -> Self {
        Self {
            solver,
            reduction: None,
            encoding: encode_integer_ternary_pair(),
        }
    }
}

fn step_objective(target: &Tensor3, source: &Tensor3, field: Field, enc: &IntegerEncoding) -> Result<StepObjective> {
    match field {
        Field::F2 => build_step_f2(target, source),
        Field::Real => build_step_real(target, source, enc.clone()),
    }
}

fn solve_step(
    target: &Tensor3,
    source: &Tensor3,
    field: Field,
    step: &StepSolver,
) -> Result<(RankOneTriple, SolverResult)> {
    let obj = step_objective(target, source, field, &step.encoding)?;
    let result = match step.reduction {
        None => solve(&obj.polynomial, &step.solver)?,
        Some(method) => {
            let (q, _) = reduce(&obj.polynomial, method, PenaltyWeight::Auto)?;
            let mut cfg = step.solver.clone();
            if let Some(init) = &cfg.initial {
                cfg.initial = Some(q.complete(init)?);
            }
            let mut r = solve_reduced(&q, &cfg)?;
            r.assignment.truncate(q.original_vars());
            r.energy = obj.polynomial.evaluate(&r.assignment)?;
            r
        }
    };
    Ok((obj.decode(&result.assignment)?, result))
}

/// One minimization step: the rank-one triple whose removal from `source`
/// brings it closest to `target`.
pub fn move_tensors_closer(
    target: &Tensor3,
    source: &Tensor3,
    field: Field,
    step: &StepSolver,
) -> Result<RankOneTriple> {
    let target = target.to_field(field);
    let source = source.to_field(field);
    Ok(solve_step(&target, &source, field, step)?.0)
}

#[derive(Debug, Clone)]
pub struct DecompositionConfig {
    pub field: Field,
    pub step: StepSolver,
    /// Step budget per loop.
    pub max_iter: usize,
    /// Extra attempts with fresh seeds when a step does not improve.
    pub retries: usize,
}

impl DecompositionConfig {
    pub fn new(field: Field, solver: SolverConfig) -> Self {
        Self {
            field,
            step: StepSolver::new(solver),
            max_iter: 64,
            retries: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1 walks the start tensor to the standard tensor, 2 walks the start
    /// tensor minus the seed triple to zero.
    pub loop_index: usize,
    pub triple: RankOneTriple,
    pub distance_before: u64,
    pub distance_after: u64,
    pub energy: f64,
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub shape: MatMulShape,
    pub field: Field,
    /// Seed triple, then loop-1 factors, then loop-2 factors.
    pub decomposition: Decomposition,
    pub steps: Vec<StepRecord>,
}

impl PipelineRun {
    pub fn distances(&self, loop_index: usize) -> Vec<u64> {
        self.steps
            .iter()
            .filter(|s| s.loop_index == loop_index)
            .map(|s| s.distance_after)
            .collect()
    }
}

struct LoopStall {
    steps: Vec<StepRecord>,
    reason: String,
}

fn walk(
    loop_index: usize,
    start: Tensor3,
    target: &Tensor3,
    config: &DecompositionConfig,
) -> Result<std::result::Result<Vec<StepRecord>, LoopStall>> {
    let mut current = start;
    let mut steps = Vec::new();
    let mut distance = hamming_distance(target, &current)?;
    for iter in 0.. {
        if distance == 0 {
            return Ok(Ok(steps));
        }
        if iter == config.max_iter {
            return Ok(Err(LoopStall {
                steps,
                reason: format!("step budget of {} exhausted at distance {distance}", config.max_iter),
            }));
        }
        let mut accepted = None;
        for attempt in 0..=config.retries {
            let mut step = config.step.clone();
            let stream = (loop_index as u64) << 48 | (iter as u64) << 16 | attempt as u64;
            step.solver.seed = mix_seed(config.step.solver.seed, stream);
            let (triple, result) = solve_step(target, &current, config.field, &step)?;
            if triple.is_zero() {
                continue;
            }
            let next = current.subtract(&triple)?;
            let after = hamming_distance(target, &next)?;
            if after < distance {
                accepted = Some((triple, next, after, result.energy, attempt + 1));
                break;
            }
        }
        let Some((triple, next, after, energy, attempts)) = accepted else {
            return Ok(Err(LoopStall {
                steps,
                reason: format!(
                    "no improving triple after {} attempts at distance {distance}",
                    config.retries + 1
                ),
            }));
        };
        steps.push(StepRecord {
            loop_index,
            triple,
            distance_before: distance,
            distance_after: after,
            energy,
            attempts,
        });
        current = next;
        distance = after;
    }
    unreachable!()
}

/// Stepwise search. Loop 1 removes triples from the start tensor until it
/// equals the standard tensor; loop 2 removes triples from the start tensor
/// minus the seed triple until it vanishes. The two loops are independent
/// and run concurrently. The standard tensor is then the seed triple plus the
/// loop-2 factors minus the loop-1 factors.
pub fn run_decompositional(
    shape: MatMulShape,
    hp: &HighEnergyPoint,
    config: &DecompositionConfig,
) -> Result<PipelineRun> {
    hp.validate()?;
    if hp.t_high.shape() != shape {
        return Err(Error::Shape(format!(
            "start tensor has shape {}, expected {shape}",
            hp.t_high.shape()
        )));
    }
    let field = config.field;
    let t_high = hp.t_high.to_field(field);
    let seed = match field {
        Field::F2 => hp.seed.mod2(),
        Field::Real => hp.seed.clone(),
    };
    if seed.is_zero() {
        return Err(Error::Parameter("the seed triple must be nonzero".into()));
    }
    let standard = Tensor3::standard(shape, field);
    let zero = Tensor3::zeros(shape, field);
    let t_high_prime = t_high.subtract(&seed)?;

    let (first, second) = rayon::join(
        || walk(1, t_high.clone(), &standard, config),
        || walk(2, t_high_prime.clone(), &zero, config),
    );
    let (first, second) = (first?, second?);

    let negate = |t: &RankOneTriple| match field {
        Field::F2 => t.clone(),
        Field::Real => t.negated(),
    };
    let assemble = |a: &[StepRecord], b: &[StepRecord]| -> Result<Decomposition> {
        let mut d = Decomposition::new(shape, field);
        d.push(seed.clone())?;
        for s in a {
            d.push(negate(&s.triple))?;
        }
        for s in b {
            d.push(s.triple.clone())?;
        }
        Ok(d)
    };

    match (first, second) {
        (Ok(a), Ok(b)) => {
            let decomposition = assemble(&a, &b)?;
            debug_assert_eq!(decomposition.sum()?, standard);
            Ok(PipelineRun {
                shape,
                field,
                decomposition,
                steps: a.into_iter().chain(b).collect(),
            })
        }
        (first, second) => {
            let (loop_index, reason) = match (&first, &second) {
                (Err(s), _) => (1, s.reason.clone()),
                (_, Err(s)) => (2, s.reason.clone()),
                _ => unreachable!(),
            };
            let steps_of = |r: std::result::Result<Vec<StepRecord>, LoopStall>| match r {
                Ok(s) => s,
                Err(s) => s.steps,
            };
            let (a, b) = (steps_of(first), steps_of(second));
            let partial = assemble(&a, &b)?;
            Err(Error::Stall(Box::new(StallInfo {
                loop_index,
                steps: a.into_iter().chain(b).collect(),
                reason,
                partial,
            })))
        }
    }
}
