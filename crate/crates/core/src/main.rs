use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use matmul_hubo::objectives::{build_holistic, build_step_f2, build_step_real, LoadedObjective};
use matmul_hubo::pipeline::{
    assignment_to_integer, estimate_resources, lift_to_real, midpoint_offset_percent,
    run_decompositional, run_holistic, sample_landscape, sample_neighborhood, strassen_fixture,
    verify_decomposition, write_csv, DecompositionConfig, HighEnergyPoint, HolisticConfig,
    StrassenFixture,
};
use matmul_hubo::quadratize::{parse_qbsolv, reduce, to_qbsolv, IntegerEncoding, PenaltyWeight, ReductionMethod};
use matmul_hubo::solvers::{solve, SolverConfig, SolverKind};
use matmul_hubo::{Decomposition, Error, Field, MatMulShape, PseudoBooleanPolynomial, Result, Tensor3};

#[derive(Parser)]
#[command(name = "matmul-hubo", version, about = "Search for matrix-multiplication algorithms with binary optimization")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the main output here instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct ShapeArgs {
    #[arg(short = 'n', default_value_t = 2)]
    n: usize,
    #[arg(short = 'm', default_value_t = 2)]
    m: usize,
    #[arg(short = 'p', default_value_t = 2)]
    p: usize,
}

impl ShapeArgs {
    fn shape(self) -> Result<MatMulShape> {
        MatMulShape::new(self.n, self.m, self.p)
    }
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value = "anneal")]
    solver: SolverKind,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    initial_temperature: Option<f64>,
    #[arg(long)]
    final_temperature: Option<f64>,
    #[arg(long)]
    tabu_tenure: Option<usize>,
    /// JSON solver configuration; flags given explicitly override it.
    #[arg(long)]
    solver_config: Option<PathBuf>,
}

impl SolverArgs {
    fn config(&self, seed: u64) -> Result<SolverConfig> {
        let mut c = match &self.solver_config {
            Some(path) => serde_json::from_str(&read_input(path)?)?,
            None => SolverConfig::new(self.solver),
        };
        if self.solver_config.is_none() || self.solver != SolverKind::Anneal {
            c.kind = self.solver;
        }
        c.seed = seed;
        if let Some(r) = self.restarts {
            c.restarts = r;
        }
        if let Some(s) = self.sweeps {
            c.sweeps = s;
        }
        c.initial_temperature = self.initial_temperature.or(c.initial_temperature);
        c.final_temperature = self.final_temperature.or(c.final_temperature);
        c.tabu_tenure = self.tabu_tenure.or(c.tabu_tenure);
        c.validate()?;
        Ok(c)
    }
}

fn parse_penalty(s: &str) -> std::result::Result<PenaltyWeight, String> {
    if s == "auto" {
        return Ok(PenaltyWeight::Auto);
    }
    s.parse::<f64>()
        .map(PenaltyWeight::Fixed)
        .map_err(|_| format!("expected `auto` or a number, got {s:?}"))
}

#[derive(Subcommand)]
enum Command {
    /// Print the standard multiplication tensor.
    StandardTensor {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, default_value = "r")]
        field: Field,
    },
    /// Build the objective for one step between two tensors.
    BuildStep {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        source: PathBuf,
        #[arg(long, default_value = "f2")]
        field: Field,
        /// Component encoding for integer steps: `ternary` or `log:N`.
        #[arg(long, default_value = "ternary")]
        encoding: IntegerEncoding,
    },
    /// Build the fixed-rank objective for the standard tensor.
    BuildHolistic {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(short = 'R', long, default_value_t = 7)]
        rank: usize,
        #[arg(long, default_value = "ternary")]
        encoding: IntegerEncoding,
    },
    /// Quadratize a polynomial and print it in qbsolv format.
    Reduce {
        input: PathBuf,
        #[arg(long, default_value = "min-selection")]
        method: ReductionMethod,
        #[arg(long, default_value = "auto", value_parser = parse_penalty)]
        penalty: PenaltyWeight,
    },
    /// Minimize a polynomial given as JSON or qbsolv text.
    Solve {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Add the decoded triples when the input is an objective.
        #[arg(long)]
        decode: bool,
    },
    /// Run the stepwise search from a start point (fixture or point JSON).
    Decompose {
        #[arg(default_value = "-")]
        input: PathBuf,
        #[arg(long, default_value = "f2")]
        field: Field,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 64)]
        max_iter: usize,
        #[arg(long, default_value_t = 3)]
        retries: usize,
        #[arg(long, default_value = "ternary")]
        encoding: IntegerEncoding,
        /// Solve a quadratized copy of each step.
        #[arg(long)]
        reduce: Option<ReductionMethod>,
        /// Also write the full step trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Minimize the fixed-rank objective once.
    Holistic {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(short = 'R', long, default_value_t = 7)]
        rank: usize,
        #[arg(long, default_value = "ternary")]
        encoding: IntegerEncoding,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        reduce: Option<ReductionMethod>,
        #[arg(long, default_value = "auto", value_parser = parse_penalty)]
        penalty: PenaltyWeight,
        /// `strassen` or a decomposition JSON file to start from.
        #[arg(long)]
        warm_start: Option<String>,
    },
    /// Run a decomposition as a multiplication algorithm against true products.
    Verify {
        #[arg(default_value = "-")]
        input: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Lift a GF(2) decomposition to the integers using this reference
        /// (decomposition or fixture JSON) before checking.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Print variable and interaction counts.
    Estimate {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(short = 'R', long, default_value_t = 7)]
        rank: u64,
        #[arg(short = 'k', default_value_t = 2)]
        k: u64,
        #[arg(long, default_value = "r")]
        field: Field,
        #[arg(long)]
        json: bool,
    },
    /// Sample the fixed-rank objective over the assignment space as CSV.
    Landscape {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(short = 'R', long, default_value_t = 7)]
        rank: usize,
        #[arg(long, default_value_t = 1000)]
        chunks: u64,
        #[arg(long, default_value_t = 1)]
        per_chunk: usize,
        /// Known optima to add; only `strassen` is available.
        #[arg(long)]
        insert_optima: Option<String>,
        /// Evaluate every assignment within this distance of the first optimum
        /// instead of sampling chunks.
        #[arg(long)]
        neighborhood: Option<u64>,
    },
    /// Print a shipped start point.
    Fixture {
        #[arg(default_value = "strassen")]
        name: String,
    },
}

fn read_input(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

struct Output(Option<PathBuf>);

impl Output {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.0 {
            Some(path) => fs::write(path, text)?,
            None => {
                let mut out = io::stdout().lock();
                out.write_all(text.as_bytes())?;
            }
        }
        Ok(())
    }

    fn line(&self, text: &str) -> Result<()> {
        self.emit(&format!("{text}\n"))
    }
}

fn load_polynomial(text: &str) -> Result<(PseudoBooleanPolynomial, Option<LoadedObjective>)> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('c') || trimmed.starts_with('p') {
        return Ok((parse_qbsolv(text)?, None));
    }
    match LoadedObjective::from_json(text) {
        Ok(obj) => Ok((obj.polynomial.clone(), Some(obj))),
        Err(_) => Ok((PseudoBooleanPolynomial::from_json(text)?, None)),
    }
}

fn load_start_point(text: &str) -> Result<HighEnergyPoint> {
    HighEnergyPoint::from_json(text)
}

fn load_reference(text: &str) -> Result<Decomposition> {
    Decomposition::from_json(text).or_else(|_| Ok(StrassenFixture::from_json(text)?.reference))
}

/// 0 done, 1 no valid result.
type Status = u8;

fn run(cli: Cli) -> Result<Status> {
    let out = Output(cli.output.clone());
    let seed = cli.seed;
    match cli.command {
        Command::StandardTensor { shape, field } => {
            out.line(&Tensor3::standard(shape.shape()?, field).to_json())?;
        }
        Command::BuildStep { target, source, field, encoding } => {
            let target = Tensor3::from_json(&read_input(&target)?)?.to_field(field);
            let source = Tensor3::from_json(&read_input(&source)?)?.to_field(field);
            let obj = match field {
                Field::F2 => build_step_f2(&target, &source)?,
                Field::Real => build_step_real(&target, &source, encoding)?,
            };
            out.line(&obj.to_json())?;
        }
        Command::BuildHolistic { shape, rank, encoding } => {
            let ts = Tensor3::standard(shape.shape()?, Field::Real);
            out.line(&build_holistic(&ts, rank, Some(encoding))?.to_json())?;
        }
        Command::Reduce { input, method, penalty } => {
            let (poly, _) = load_polynomial(&read_input(&input)?)?;
            let (q, report) = reduce(&poly, method, penalty)?;
            eprintln!("{}", serde_json::to_string(&report)?);
            let comment = format!(
                "{method} reduction: {} original variables, {} ancillas",
                report.original_vars, report.ancilla_count
            );
            out.emit(&to_qbsolv(q.polynomial(), &comment)?)?;
        }
        Command::Solve { input, solver, decode } => {
            let (poly, obj) = load_polynomial(&read_input(&input)?)?;
            let result = solve(&poly, &solver.config(seed)?)?;
            let mut value: serde_json::Value = serde_json::from_str(&result.to_json())?;
            if decode {
                let obj = obj.ok_or_else(|| {
                    Error::Parameter("--decode needs an objective JSON input".into())
                })?;
                let triples = obj.layout.decode(&result.assignment)?;
                value["decoded"] = serde_json::to_value(triples)?;
            }
            out.line(&value.to_string())?;
        }
        Command::Decompose { input, field, solver, max_iter, retries, encoding, reduce, trace } => {
            let hp = load_start_point(&read_input(&input)?)?;
            let mut config = DecompositionConfig::new(field, solver.config(seed)?);
            config.max_iter = max_iter;
            config.retries = retries;
            config.step.encoding = encoding;
            config.step.reduction = reduce;
            match run_decompositional(hp.t_high.shape(), &hp, &config) {
                Ok(run) => {
                    for s in &run.steps {
                        eprintln!(
                            "loop {} distance {} -> {}",
                            s.loop_index, s.distance_before, s.distance_after
                        );
                    }
                    eprintln!("rank {}", run.decomposition.rank());
                    if let Some(path) = trace {
                        fs::write(path, serde_json::to_string(&run)?)?;
                    }
                    out.line(&run.decomposition.to_json())?;
                }
                Err(Error::Stall(info)) => {
                    eprintln!("error: {}", Error::Stall(info.clone()));
                    if let Some(path) = trace {
                        fs::write(path, serde_json::to_string(&info)?)?;
                    }
                    return Ok(1);
                }
                Err(e) => return Err(e),
            }
        }
        Command::Holistic { shape, rank, encoding, solver, reduce, penalty, warm_start } => {
            let shape = shape.shape()?;
            let mut config = HolisticConfig::new(rank, solver.config(seed)?);
            config.encoding = Some(encoding);
            config.reduction = reduce;
            config.penalty = penalty;
            config.warm_start = match warm_start.as_deref() {
                None => None,
                Some("strassen") => Some(strassen_fixture().reference.factors),
                Some(path) => {
                    let mut f = Decomposition::from_json(&read_input(&PathBuf::from(path))?)?.factors;
                    f.resize(rank, matmul_hubo::RankOneTriple::zero(shape));
                    Some(f)
                }
            };
            let outcome = run_holistic(shape, &config)?;
            eprintln!("energy {} over {} variables", outcome.energy, outcome.num_vars);
            out.line(&outcome.to_json())?;
            if !outcome.found() {
                return Ok(1);
            }
        }
        Command::Verify { input, trials, reference } => {
            let mut d = Decomposition::from_json(&read_input(&input)?)?;
            if let Some(path) = reference {
                d = lift_to_real(&d, &load_reference(&read_input(&path)?)?)?;
            }
            let report = verify_decomposition(&d, trials, seed)?;
            out.line(&report.to_json())?;
            if !report.valid {
                return Ok(1);
            }
        }
        Command::Estimate { shape, rank, k, field, json } => {
            let e = estimate_resources(shape.shape()?, rank, k, field)?;
            if json {
                out.line(&serde_json::to_string(&e)?)?;
            } else {
                out.line(&format!(
                    "variables={} interaction_bound={}",
                    e.holistic_variables, e.holistic_interaction_bound
                ))?;
            }
        }
        Command::Landscape { shape, rank, chunks, per_chunk, insert_optima, neighborhood } => {
            let shape = shape.shape()?;
            let obj = build_holistic(&Tensor3::standard(shape, Field::Real), rank, None)?;
            let optima = match insert_optima.as_deref() {
                None => Vec::new(),
                Some("strassen") => {
                    let f = strassen_fixture().reference;
                    if f.shape != shape || f.rank() != rank {
                        return Err(Error::Parameter(
                            "the Strassen optimum needs shape (2,2,2) and rank 7".into(),
                        ));
                    }
                    vec![obj.encode(&f.factors)?]
                }
                Some(other) => {
                    return Err(Error::Parameter(format!("unknown optima set {other:?}")))
                }
            };
            for o in &optima {
                let idx = assignment_to_integer(o);
                eprintln!(
                    "optimum at {idx}, {:+.6}% from the midpoint",
                    midpoint_offset_percent(&idx, obj.num_vars())
                );
            }
            let rows = match neighborhood {
                Some(w) => {
                    let center = optima.first().ok_or_else(|| {
                        Error::Parameter("--neighborhood needs --insert-optima".into())
                    })?;
                    sample_neighborhood(&obj.polynomial, center, w)?
                }
                None => sample_landscape(&obj.polynomial, chunks, per_chunk, seed, &optima)?,
            };
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            out.emit(&String::from_utf8(buf).expect("csv is utf-8"))?;
        }
        Command::Fixture { name } => {
            if name != "strassen" {
                return Err(Error::Parameter(format!("unknown fixture {name:?}")));
            }
            out.line(&strassen_fixture().to_json())?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("warning: {e}");
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Stall(_) => 1,
                _ => 2,
            })
        }
    }
}
