use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cils::assembler::ColumnStep;
use cils::harness::{generate_instance, run_bench, GenSpec};
use cils::instance_file::{load_instance, planted_path, save_instance, save_planted};
use cils::oracle::{oracle_solve, OracleBudget};
use cils::{solve_with, Alphabet, CilsError, SolveOptions, SolveResult, SolveStats};

const EXIT_INPUT: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

/// Relative tolerance when comparing the solver and oracle objectives.
const CHECK_RTOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "cils",
    version,
    about = "Constrained integer least-squares solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file
    Solve {
        path: PathBuf,
        /// Initial search radius, overriding `d0` from the file
        #[arg(long)]
        radius: Option<f64>,
        /// Print search statistics
        #[arg(long)]
        stats: bool,
        /// Emit a JSON document on stdout
        #[arg(long)]
        json: bool,
    },
    /// Compare the solver against exhaustive search
    Check { path: PathBuf },
    /// Generate a seeded random instance and its planted solution
    Gen(GenArgs),
    /// Run every spec in a JSON array and write a CSV summary
    Bench {
        specfile: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct GenArgs {
    /// Rows of X (the target rank N)
    #[arg(long)]
    rows: usize,
    /// Columns of X (L)
    #[arg(long)]
    cols: usize,
    /// Rows of Y and G (M)
    #[arg(long)]
    m: usize,
    /// Rows of A (P)
    #[arg(long, default_value_t = 7)]
    p: usize,
    /// Comma-separated alphabet, e.g. -1,0,1
    #[arg(long, default_value = "-1,0,1", allow_hyphen_values = true)]
    alphabet: String,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Initial radius stored in the file
    #[arg(long)]
    d0: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct SolveReport<'a> {
    x: Vec<Vec<i64>>,
    objective: f64,
    stats: &'a SolveStats,
    trace: &'a [ColumnStep],
}

#[derive(Serialize)]
struct ErrorReport {
    error: String,
    exit: u8,
}

fn exit_code(err: &CilsError) -> u8 {
    match err {
        CilsError::Infeasible { .. } | CilsError::EmptyTree { .. } => EXIT_INFEASIBLE,
        CilsError::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_INPUT,
    }
}

fn fail(err: &CilsError, json: bool) -> ExitCode {
    let code = exit_code(err);
    eprintln!("error: {err}");
    if json {
        let report = ErrorReport {
            error: err.to_string(),
            exit: code,
        };
        println!(
            "{}",
            serde_json::to_string(&report).expect("plain struct serializes")
        );
    }
    ExitCode::from(code)
}

fn print_rows(rows: &[Vec<i64>]) {
    for r in rows {
        let line: Vec<String> = r.iter().map(i64::to_string).collect();
        println!("{}", line.join(" "));
    }
}

fn print_stats(s: &SolveStats) {
    println!("dioph_nodes = {}", s.dioph_nodes);
    println!("f_size = {}", s.f_size);
    println!("sphere_calls = {}", s.sphere_calls);
    println!("radius_expansions = {}", s.radius_expansions);
    println!("backtracks = {}", s.backtracks);
    println!("final_radius = {}", s.final_radius);
    println!("wall_time_s = {:.6}", s.wall_time);
}

fn run_solve(path: &Path, radius: Option<f64>, stats: bool, json: bool) -> Result<(), CilsError> {
    let inst = load_instance(path)?;
    let opts = SolveOptions {
        radius,
        ..SolveOptions::default()
    };
    let SolveResult {
        x,
        objective,
        stats: st,
        trace,
    } = solve_with(&inst, &opts)?;
    let rows = x.to_i64_rows()?;
    if json {
        let report = SolveReport {
            x: rows,
            objective,
            stats: &st,
            trace: &trace,
        };
        println!(
            "{}",
            serde_json::to_string(&report).expect("plain struct serializes")
        );
    } else {
        println!("X =");
        print_rows(&rows);
        println!("objective = {objective}");
        if stats {
            print_stats(&st);
        }
    }
    Ok(())
}

fn objectives_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= CHECK_RTOL * a.abs().max(b.abs()).max(1.0)
}

fn run_check(path: &Path) -> Result<u8, CilsError> {
    let inst = load_instance(path)?;
    let budget = OracleBudget::from_env()?;
    let reference = oracle_solve(&inst, budget)?;
    let got = solve_with(&inst, &SolveOptions::default())?;
    println!("solver objective = {}", got.objective);
    println!("oracle objective = {}", reference.objective);
    println!("same X = {}", got.x == reference.x);
    if objectives_match(got.objective, reference.objective) {
        println!("match");
        Ok(0)
    } else {
        println!("MISMATCH");
        Ok(EXIT_MISMATCH)
    }
}

fn parse_alphabet(s: &str) -> Result<Alphabet, CilsError> {
    let values = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<i64>()
                .map_err(|_| CilsError::InvalidArgument(format!("bad alphabet entry {v:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Alphabet::new(values)
}

fn run_gen(args: &GenArgs) -> Result<(), CilsError> {
    let mut spec = GenSpec::new(
        args.rows,
        args.cols,
        args.m,
        parse_alphabet(&args.alphabet)?,
        args.seed,
    );
    spec.p = args.p;
    spec.k = args.k;
    spec.sigma = args.sigma;
    let (mut inst, planted) = generate_instance(&spec)?;
    inst.d0 = args.d0;
    inst.validate()?;
    save_instance(&inst, &args.out)?;
    let sidecar = planted_path(&args.out);
    save_planted(&planted, &sidecar)?;
    println!("wrote {} and {}", args.out.display(), sidecar.display());
    Ok(())
}

fn run_bench_file(specfile: &Path, out: &Path) -> Result<(), CilsError> {
    let text = std::fs::read_to_string(specfile)?;
    let specs: Vec<GenSpec> = serde_json::from_str(&text).map_err(|e| {
        CilsError::InstanceFile(format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    let records = run_bench(&specs, out)?;
    for r in &records {
        println!(
            "{}: recovered {}/{}, verified {}/{}, avg {:.4}s, avg nodes {}",
            r.spec.size_label(),
            r.recovery_count,
            r.spec.trials,
            r.verified,
            r.spec.trials,
            r.avg_time,
            r.avg_nodes
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve {
            path,
            radius,
            stats,
            json,
        } => match run_solve(&path, radius, stats, json) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(&e, json),
        },
        Command::Check { path } => match run_check(&path) {
            Ok(code) => ExitCode::from(code),
            Err(e) => fail(&e, false),
        },
        Command::Gen(args) => match run_gen(&args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(&e, false),
        },
        Command::Bench { specfile, out } => match run_bench_file(&specfile, &out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(&e, false),
        },
    }
}
