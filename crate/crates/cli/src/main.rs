//! `pbatch`: generate instances, solve them with any encoding, check
//! solutions, run the exact oracle and benchmark grids.
//!
//! Exit codes: 0 success, 1 domain failure (no solution, invalid solution,
//! unreadable input), 2 usage error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pbatch::bench::{self, BenchConfig};
use pbatch::cpcore::{SolveParams, SolveStatus};
use pbatch::domain::{validate_solution, Instance, ObjectiveKind, Solution};
use pbatch::encodings::{build, Variant};
use pbatch::instgen::{self, GenParams, SuiteConfig};
use pbatch::oracle::{solve_exact, OracleLimits};

#[derive(Parser)]
#[command(
    name = "pbatch",
    version,
    about = "Parallel batch scheduling with incompatible families"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one instance, or a whole suite.
    Gen(GenArgs),
    /// Solve an instance with one encoding.
    Solve(SolveArgs),
    /// Check a solution against an instance.
    Validate(ValidateArgs),
    /// Solve a small instance exactly by enumeration.
    Oracle(OracleArgs),
    /// Run encodings over a suite and write CSV reports.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Desk,
    Paper,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, required_unless_present_any = ["suite_config", "preset"])]
    jobs: Option<usize>,
    #[arg(long, required_unless_present_any = ["suite_config", "preset"])]
    families: Option<usize>,
    #[arg(long, required_unless_present_any = ["suite_config", "preset"])]
    machines: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance file; standard output when omitted.
    #[arg(long, conflicts_with_all = ["suite_config", "preset", "out_dir"])]
    out: Option<PathBuf>,
    /// Suite grid as JSON.
    #[arg(long, conflicts_with_all = ["jobs", "families", "machines", "preset"], requires = "out_dir")]
    suite_config: Option<PathBuf>,
    /// Built-in suite grid. The paper grid is 1,000 instances of up to 200 jobs.
    #[arg(long, value_enum, conflicts_with_all = ["jobs", "families", "machines"], requires = "out_dir")]
    preset: Option<Preset>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_parser = parse_variant)]
    encoding: Variant,
    #[arg(long, value_parser = parse_objective)]
    objective: ObjectiveKind,
    /// Seconds.
    #[arg(long, default_value_t = 60.0, value_parser = parse_seconds)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solution: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_parser = parse_objective)]
    objective: ObjectiveKind,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    suite_dir: PathBuf,
    /// Comma-separated, e.g. `au,rs+sb`.
    #[arg(long, value_delimiter = ',', value_parser = parse_variant, default_value = "au,as,as+sb,s,rs,rs+sb")]
    encodings: Vec<Variant>,
    #[arg(long, value_delimiter = ',', value_parser = parse_objective, default_value = "twct,cmax")]
    objectives: Vec<ObjectiveKind>,
    /// Seconds per solve.
    #[arg(long, default_value_t = 60.0, value_parser = parse_seconds)]
    time_limit: f64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_objective(s: &str) -> Result<ObjectiveKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_seconds(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("`{s}` is not a positive number of seconds")),
    }
}

/// A domain-level failure that still printed everything it had to say.
#[derive(Debug)]
struct Failed;

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("failed")
    }
}

impl std::error::Error for Failed {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PBATCH_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Validate(a) => validate(a),
        Command::Oracle(a) => oracle(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !e.is::<Failed>() {
                // library errors already embed their source in the message
                let mut msg = e.to_string();
                for cause in e.chain().skip(1) {
                    let c = cause.to_string();
                    if !msg.contains(&c) {
                        msg = format!("{msg}: {c}");
                    }
                }
                eprintln!("error: {msg}");
            }
            ExitCode::from(1)
        }
    }
}

fn write_or_print(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
            Ok(())
        }
    }
}

fn gen(a: GenArgs) -> Result<()> {
    if let Some(dir) = &a.out_dir {
        let config = match (&a.suite_config, a.preset) {
            (Some(path), _) => instgen::load_suite_config(path)?,
            (None, Some(Preset::Paper)) => {
                log::warn!(
                    "paper-scale suite: 1,000 instances; a full benchmark over it takes days"
                );
                SuiteConfig::paper_scale(a.seed)
            }
            (None, _) => SuiteConfig::desk_scale(a.seed),
        };
        let entries = instgen::generate_suite(&config)?;
        let manifest = instgen::write_suite(&entries, dir)?;
        println!(
            "{} instances, manifest {}",
            entries.len(),
            manifest.display()
        );
        return Ok(());
    }
    let (Some(n_jobs), Some(n_families), Some(n_machines)) = (a.jobs, a.families, a.machines)
    else {
        bail!("--jobs, --families and --machines are required");
    };
    let inst = instgen::generate_instance(GenParams {
        n_jobs,
        n_families,
        n_machines,
        seed: a.seed,
    })?;
    write_or_print(&inst.to_json(), a.out.as_deref())
}

fn solve(a: SolveArgs) -> Result<()> {
    let inst = Instance::load(&a.instance)?;
    let mut enc = build(&inst, a.encoding, a.objective)?;
    let params = SolveParams {
        time_limit: Some(Duration::from_secs_f64(a.time_limit)),
        seed: a.seed,
        restarts: false,
    };
    let out = enc.solve(&params);
    log::info!(
        "{} nodes, {} fails in {:.3}s",
        out.stats.nodes,
        out.stats.fails,
        out.wall_time.as_secs_f64()
    );
    let value = out.best_value.map_or("-".to_string(), |v| v.to_string());
    println!("{} {value}", out.status);
    if out.best_value.is_none() {
        if out.status == SolveStatus::Infeasible {
            eprintln!("instance is infeasible");
        } else {
            eprintln!("no solution found within the time limit");
        }
        return Err(Failed.into());
    }
    let sol = enc.decode(&out)?;
    let report = validate_solution(&inst, &sol);
    if !report.ok() {
        for v in &report.violations {
            eprintln!("internal error, decoded solution violates {v}");
        }
        return Err(Failed.into());
    }
    if let Some(path) = &a.out {
        sol.save(path)?;
    }
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<()> {
    let inst = Instance::load(&a.instance)?;
    let sol = Solution::load(&a.solution)?;
    let report = validate_solution(&inst, &sol);
    if report.ok() {
        println!("valid {} {}", sol.objective_kind, sol.objective_value);
        return Ok(());
    }
    for v in &report.violations {
        println!("{v}");
    }
    eprintln!("{} violation(s)", report.violations.len());
    Err(Failed.into())
}

fn oracle(a: OracleArgs) -> Result<()> {
    let inst = Instance::load(&a.instance)?;
    let (value, sol) = solve_exact(&inst, a.objective, OracleLimits::default())?;
    println!("OPTIMAL {value}");
    if let Some(path) = &a.out {
        sol.save(path)?;
    }
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<()> {
    if a.workers == 0 {
        bail!("--workers must be at least 1");
    }
    let suite = bench::load_suite_dir(&a.suite_dir)?;
    let config = BenchConfig {
        time_limit: Duration::from_secs_f64(a.time_limit),
        workers: a.workers,
        seed: 0,
    };
    let records = bench::run_benchmark(&suite, &a.encodings, &a.objectives, &config);

    // exact optima join the best-known pool where the oracle reaches
    let limits = OracleLimits::default();
    let mut exact = BTreeMap::new();
    for item in &suite {
        for &obj in &a.objectives {
            if let Ok((v, _)) = solve_exact(&item.instance, obj, limits) {
                exact.insert((item.id.clone(), obj), v);
            }
        }
    }
    let summaries = bench::aggregate_with_exact(&records, &exact)?;
    let paths = bench::emit_report(&summaries, &records, &a.out_dir)?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}
