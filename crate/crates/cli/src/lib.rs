//! Command-line driver: single feasibility solves, one-bit recovery runs,
//! config-driven experiment grids, and penalty-model queries.
//!
//! Exit codes: 0 on success, 2 on configuration or parse errors (with a
//! diagnostic naming the offending key or flag), 1 on runtime failures.

use std::fmt;
use std::fs;
use std::path::PathBuf;

use orka_core::analysis::{pade_penalty_coefficients, penalty_value};
use orka_core::experiments::{mean_nmse, nmse_vector, run_trial_grid};
use orka_core::feasibility::{
    positive_residual, solve, FeasibilityProblem, Method, RowSense, SolverConfig,
};
use orka_core::matrix::Vector;
use orka_core::onebit::{adaptive_threshold_recover, orka_recover};

pub mod config;
pub mod io;

use config::parse_config;
use io::{
    config_hash, format_g17, load_matrix_file, load_vector_file, render_trial_csv,
    write_vector_file,
};

/// Error class determines the exit code: config/parse problems exit 2,
/// runtime failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Parse(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<orka_core::Error> for CliError {
    fn from(e: orka_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

const USAGE: &str = "\
orka: signal recovery from one-bit samples via randomized Kaczmarz solvers

USAGE:
  orka solve --matrix A.mat --rhs b.mat --method M --out x.mat [OPTIONS]
  orka orka --matrix A.mat (--signal x.mat | --measurements y.mat) --m N --out x.mat [OPTIONS]
  orka experiment --config grid.cfg
  orka penalty --mu1 F --mu2 F --t F --m N

SUBCOMMANDS:
  solve        Solve a linear feasibility problem read from matrix files.
  orka         One-bit recovery: quantize, build the polyhedron, solve.
  experiment   Run a seeded trial grid from a key = value config file.
  penalty      Print the Pade penalty coefficients and the penalty at m.

COMMON OPTIONS:
  --method M        rka | skm | prskm | blockskm
  --lambda F        relaxation in (0, 2), default 1
  --gamma N         Motzkin sample size (skm/prskm), default rows/10
  --block-k N       sub-block size (blockskm), default dim/2
  --max-iters N     iteration budget, default 10000
  --tol F           residual tolerance, default 1e-10
  --seed N          solver seed, default 0

SOLVE OPTIONS:
  --sense S         eq | le, applied to every row, default le
  --block-rows N    declare a block structure (required sizing for blockskm)

ORKA OPTIONS:
  --m N             number of threshold sequences
  --threshold-seed N  seed for the Gaussian thresholds, default 1
  --adaptive        refine thresholds adaptively
  --delta F         adaptive movement tolerance, default 1e-8
  --max-outer N     adaptive outer-round cap, default 30

ENVIRONMENT:
  ORKA_THREADS      positive integer capping trial parallelism
                    (default: available cores)
";

/// Entry point. `argv` includes the program name.
pub fn cli_main(argv: Vec<String>) -> i32 {
    match dispatch(&argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn dispatch(argv: &[String]) -> Result<(), CliError> {
    init_thread_pool()?;
    let sub = argv.get(1).map(String::as_str);
    match sub {
        Some("solve") => cmd_solve(&argv[2..]),
        Some("orka") => cmd_orka(&argv[2..]),
        Some("experiment") => cmd_experiment(&argv[2..]),
        Some("penalty") => cmd_penalty(&argv[2..]),
        Some("--help") | Some("-h") | Some("help") => {
            println!("{USAGE}");
            Ok(())
        }
        Some(other) => Err(CliError::Config(format!(
            "unknown subcommand `{other}`\n\n{USAGE}"
        ))),
        None => Err(CliError::Config(format!("missing subcommand\n\n{USAGE}"))),
    }
}

fn init_thread_pool() -> Result<(), CliError> {
    if let Ok(raw) = std::env::var("ORKA_THREADS") {
        let n: usize = raw.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Config(format!(
                "invalid value for `ORKA_THREADS`: '{raw}' (want a positive integer)"
            ))
        })?;
        // A second call in the same process keeps the first pool; that is
        // fine for repeated in-process invocations.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

/// Minimal flag cursor over `--key value` pairs and bare `--switch` flags.
struct Flags<'a> {
    args: &'a [String],
    pos: usize,
}

impl<'a> Flags<'a> {
    fn new(args: &'a [String]) -> Self {
        Self { args, pos: 0 }
    }

    fn next_flag(&mut self) -> Option<&'a str> {
        let flag = self.args.get(self.pos)?;
        self.pos += 1;
        Some(flag.as_str())
    }

    fn value(&mut self, flag: &str) -> Result<&'a str, CliError> {
        let v = self
            .args
            .get(self.pos)
            .ok_or_else(|| CliError::Config(format!("flag `{flag}` expects a value")))?;
        self.pos += 1;
        Ok(v.as_str())
    }

    fn parse_value<T: std::str::FromStr>(&mut self, flag: &str) -> Result<T, CliError> {
        let raw = self.value(flag)?;
        raw.parse()
            .map_err(|_| CliError::Config(format!("invalid value for `{flag}`: '{raw}'")))
    }
}

fn require<T>(opt: Option<T>, flag: &str) -> Result<T, CliError> {
    opt.ok_or_else(|| CliError::Config(format!("missing required flag `{flag}`")))
}

#[derive(Default)]
struct SolverFlags {
    method: Option<Method>,
    lambda: Option<f64>,
    gamma: Option<usize>,
    block_k: Option<usize>,
    max_iters: Option<usize>,
    tol: Option<f64>,
    seed: Option<u64>,
}

impl SolverFlags {
    /// Try to consume one solver-related flag; returns false if not ours.
    fn consume(&mut self, flag: &str, flags: &mut Flags) -> Result<bool, CliError> {
        match flag {
            "--method" => {
                let raw = flags.value(flag)?;
                self.method = Some(Method::parse(raw).ok_or_else(|| {
                    CliError::Config(format!("invalid value for `--method`: '{raw}'"))
                })?);
            }
            "--lambda" => self.lambda = Some(flags.parse_value(flag)?),
            "--gamma" => self.gamma = Some(flags.parse_value(flag)?),
            "--block-k" => self.block_k = Some(flags.parse_value(flag)?),
            "--max-iters" => self.max_iters = Some(flags.parse_value(flag)?),
            "--tol" => self.tol = Some(flags.parse_value(flag)?),
            "--seed" => self.seed = Some(flags.parse_value(flag)?),
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn build(&self, default_method: Option<Method>) -> Result<SolverConfig, CliError> {
        let method = match self.method.or(default_method) {
            Some(m) => m,
            None => return Err(CliError::Config("missing required flag `--method`".into())),
        };
        let mut cfg = SolverConfig::new(method);
        if let Some(l) = self.lambda {
            cfg.lambda = l;
        }
        cfg.gamma = self.gamma;
        cfg.block_k = self.block_k;
        if let Some(n) = self.max_iters {
            cfg.max_iters = n;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        cfg.seed = self.seed.unwrap_or(0);
        Ok(cfg)
    }
}

fn cmd_solve(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::new(args);
    let mut solver = SolverFlags::default();
    let mut matrix: Option<PathBuf> = None;
    let mut rhs: Option<PathBuf> = None;
    let mut out: Option<PathBuf> = None;
    let mut sense = RowSense::LessEq;
    let mut block_rows: Option<usize> = None;

    while let Some(flag) = flags.next_flag() {
        if solver.consume(flag, &mut flags)? {
            continue;
        }
        match flag {
            "--matrix" => matrix = Some(PathBuf::from(flags.value(flag)?)),
            "--rhs" => rhs = Some(PathBuf::from(flags.value(flag)?)),
            "--out" => out = Some(PathBuf::from(flags.value(flag)?)),
            "--block-rows" => block_rows = Some(flags.parse_value(flag)?),
            "--sense" => {
                sense = match flags.value(flag)? {
                    "eq" => RowSense::Equality,
                    "le" => RowSense::LessEq,
                    other => {
                        return Err(CliError::Config(format!(
                            "invalid value for `--sense`: '{other}'"
                        )))
                    }
                };
            }
            other => return Err(CliError::Config(format!("unknown flag `{other}`"))),
        }
    }

    let matrix = require(matrix, "--matrix")?;
    let rhs = require(rhs, "--rhs")?;
    let out = require(out, "--out")?;
    let cfg = solver.build(None)?;

    let a = load_matrix_file(&matrix)?;
    let b = load_vector_file(&rhs)?;
    let dim = a.cols();
    let mut problem = FeasibilityProblem::with_uniform_sense(a, b, sense)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(n) = block_rows {
        problem = problem
            .with_block_rows(n)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }

    let report = solve(&problem, &cfg, &Vector::zeros(dim))?;
    let residual = positive_residual(&problem, &report.x)?.norm2();
    write_vector_file(&out, &report.x)?;
    println!(
        "solve: method={} iterations={} residual={} converged={} wall_s={:.3}",
        cfg.method.name(),
        report.iterations,
        format_g17(residual),
        report.converged,
        report.wall_time_s
    );
    Ok(())
}

fn cmd_orka(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::new(args);
    let mut solver = SolverFlags::default();
    let mut matrix: Option<PathBuf> = None;
    let mut signal: Option<PathBuf> = None;
    let mut measurements: Option<PathBuf> = None;
    let mut out: Option<PathBuf> = None;
    let mut m: Option<usize> = None;
    let mut threshold_seed: u64 = 1;
    let mut adaptive = false;
    let mut delta = 1e-8;
    let mut max_outer = 30usize;

    while let Some(flag) = flags.next_flag() {
        if solver.consume(flag, &mut flags)? {
            continue;
        }
        match flag {
            "--matrix" => matrix = Some(PathBuf::from(flags.value(flag)?)),
            "--signal" => signal = Some(PathBuf::from(flags.value(flag)?)),
            "--measurements" => measurements = Some(PathBuf::from(flags.value(flag)?)),
            "--out" => out = Some(PathBuf::from(flags.value(flag)?)),
            "--m" => m = Some(flags.parse_value(flag)?),
            "--threshold-seed" => threshold_seed = flags.parse_value(flag)?,
            "--adaptive" => adaptive = true,
            "--delta" => delta = flags.parse_value(flag)?,
            "--max-outer" => max_outer = flags.parse_value(flag)?,
            other => return Err(CliError::Config(format!("unknown flag `{other}`"))),
        }
    }

    let matrix = require(matrix, "--matrix")?;
    let out = require(out, "--out")?;
    let m = require(m, "--m")?;
    let cfg = solver.build(Some(Method::BlockSkm))?;

    let a = load_matrix_file(&matrix)?;
    let (y, truth) = match (&signal, &measurements) {
        (Some(path), None) => {
            let x_true = load_vector_file(path)?;
            if x_true.len() != a.cols() {
                return Err(CliError::Config(format!(
                    "`--signal` length {} does not match the {} columns of `--matrix`",
                    x_true.len(),
                    a.cols()
                )));
            }
            (a.mul_vec(&x_true)?, Some(x_true))
        }
        (None, Some(path)) => (load_vector_file(path)?, None),
        _ => {
            return Err(CliError::Config(
                "exactly one of `--signal` or `--measurements` is required".into(),
            ))
        }
    };

    let report = if adaptive {
        adaptive_threshold_recover(&a, &y, m, &cfg, delta, max_outer, threshold_seed)?.0
    } else {
        orka_recover(&a, &y, m, &cfg, threshold_seed)?
    };

    write_vector_file(&out, &report.x)?;
    let nmse = match &truth {
        Some(x_true) => format_g17(nmse_vector(x_true, &report.x)?),
        None => "n/a".to_string(),
    };
    println!(
        "orka: method={} m={} adaptive={} iterations={} converged={} nmse={} wall_s={:.3}",
        cfg.method.name(),
        m,
        adaptive,
        report.iterations,
        report.converged,
        nmse,
        report.wall_time_s
    );
    Ok(())
}

fn cmd_experiment(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::new(args);
    let mut config_path: Option<PathBuf> = None;
    while let Some(flag) = flags.next_flag() {
        match flag {
            "--config" => config_path = Some(PathBuf::from(flags.value(flag)?)),
            other => return Err(CliError::Config(format!("unknown flag `{other}`"))),
        }
    }
    let config_path = require(config_path, "--config")?;
    let text = fs::read_to_string(&config_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let run = parse_config(&text)?;

    let records = run_trial_grid(&run.spec).map_err(|e| CliError::Runtime(e.to_string()))?;

    let manifest = format!(
        "config_hash={:016x} seed={} version={}",
        config_hash(&text),
        run.spec.seed,
        env!("CARGO_PKG_VERSION")
    );
    let csv = render_trial_csv(&records, Some(&manifest));
    fs::write(&run.output, csv)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", run.output.display())))?;

    // Timings and aggregates go to stdout only; the CSV stays reproducible.
    let failed = records.iter().filter(|r| !r.nmse.is_finite()).count();
    println!(
        "experiment: kind={} method={} cells={} failed={} output={}",
        run.spec.kind.name(),
        run.spec.solver.method.name(),
        records.len(),
        failed,
        run.output.display()
    );
    for &m in &run.spec.m_list {
        let mean = mean_nmse(&records, run.spec.solver.method, m);
        let wall: f64 = records
            .iter()
            .filter(|r| r.m == m)
            .map(|r| r.wall_time_s)
            .sum::<f64>()
            / run.spec.trials as f64;
        match mean {
            Some(v) => println!("  m={m} mean_nmse={} mean_wall_s={wall:.3}", format_g17(v)),
            None => println!("  m={m} mean_nmse=n/a mean_wall_s={wall:.3}"),
        }
    }
    Ok(())
}

fn cmd_penalty(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::new(args);
    let mut mu1: Option<f64> = None;
    let mut mu2: Option<f64> = None;
    let mut t: Option<f64> = None;
    let mut m: Option<usize> = None;
    while let Some(flag) = flags.next_flag() {
        match flag {
            "--mu1" => mu1 = Some(flags.parse_value(flag)?),
            "--mu2" => mu2 = Some(flags.parse_value(flag)?),
            "--t" => t = Some(flags.parse_value(flag)?),
            "--m" => m = Some(flags.parse_value(flag)?),
            other => return Err(CliError::Config(format!("unknown flag `{other}`"))),
        }
    }
    let mu1 = require(mu1, "--mu1")?;
    let mu2 = require(mu2, "--mu2")?;
    let t = require(t, "--t")?;
    let m = require(m, "--m")?;

    let model = pade_penalty_coefficients(mu1, mu2, t)?;
    let upsilon = penalty_value(&model, m)?;
    println!("a0 = {}", format_g17(model.a0));
    println!("a1 = {}", format_g17(model.a1));
    println!("b0 = {}", format_g17(model.b0));
    println!("b1 = {}", format_g17(model.b1));
    println!("penalty({m}) = {}", format_g17(upsilon));
    Ok(())
}
