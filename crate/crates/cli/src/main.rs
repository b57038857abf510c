//! `cutters` command line: solve problems from JSON, verify the property
//! battery or a recorded trace, and benchmark policy/schedule combinations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cutters::generate::{random_instance, Geometry};
use cutters::io::{
    self, load_config, load_problem, read_trace_csv, write_summary_json, write_trace_csv_file,
    PolicyDesc, RunConfig, ScheduleDesc,
};
use cutters::solver::{audit_recorded_steps, fejer_audit, run, SolveStatus};
use cutters::verify::{run_all, run_quick};
use cutters::Vector;

#[derive(Parser)]
#[command(
    name = "cutters",
    version,
    about = "Extrapolated block-iterative solver for common fixed points of cutters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem and write a trace CSV plus a JSON summary.
    Solve(SolveArgs),
    /// Run the property battery, or audit a run / a recorded trace.
    Verify(VerifyArgs),
    /// Benchmark relaxation policies against weight schedules on generated
    /// instances. Iteration counts are reported, never asserted.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Problem JSON file.
    #[arg(long)]
    problem: PathBuf,
    /// Run-configuration JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Trace CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// Summary JSON path (defaults to `<out>.summary.json`).
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Starting point entries; defaults to the origin.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_hyphen_values = true)]
    start: Option<Vec<f64>>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Audit a solve of this problem (needs --config).
    #[arg(long, requires = "config")]
    problem: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Audit a recorded trace CSV instead of running anything.
    #[arg(long, conflicts_with = "problem")]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    tau1: f64,
    #[arg(long, default_value_t = 1.0)]
    tau2: f64,
    /// Base seed for the battery.
    #[arg(long, default_value_t = 20260810)]
    seed: u64,
    /// Horizon for the weight-condition reports in problem mode.
    #[arg(long, default_value_t = 1000)]
    horizon: usize,
    /// Skip the two long convergence suites of the battery.
    #[arg(long)]
    quick: bool,
    /// Starting point for problem mode; defaults to the origin.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_hyphen_values = true)]
    start: Option<Vec<f64>>,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance dimension.
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Number of operators.
    #[arg(long, default_value_t = 6)]
    m: usize,
    /// halfspaces | balls | mixed
    #[arg(long, default_value = "halfspaces")]
    geometry: Geometry,
    /// Base seed (mandatory; runs use seed, seed+1, ...).
    #[arg(long)]
    seed: u64,
    /// Number of seeded instances.
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Comma list: fixed:<v>, max, fraction:<g>
    #[arg(long, default_value = "fixed:1,max")]
    policies: String,
    /// Comma list: constant-uniform, cyclic-singleton, example45:<s>,
    /// example46, remark44
    #[arg(long, default_value = "constant-uniform,cyclic-singleton,example46")]
    schedules: String,
    #[arg(long, default_value_t = 100_000)]
    max_iterations: usize,
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// Per-run results CSV.
    #[arg(long)]
    out: PathBuf,
    /// Aggregated Markdown table.
    #[arg(long)]
    markdown: Option<PathBuf>,
    /// Residual-curve CSV (one row per measured residual).
    #[arg(long)]
    curves: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let problem = load_problem(&args.problem)
        .with_context(|| format!("loading problem {}", args.problem.display()))?;
    let config: RunConfig = load_config(&args.config)
        .with_context(|| format!("loading config {}", args.config.display()))?;
    let solver_config = config.build(
        problem.operators.len(),
        problem.spec.reference_points.clone(),
    )?;
    let x0 = match args.start {
        Some(entries) => Vector::new(entries)?,
        None => Vector::zeros(problem.spec.dimension),
    };
    let result = run(&problem.operators, &x0, &solver_config);
    write_trace_csv_file(&args.out, &result.trace)?;
    let summary_path = args
        .summary
        .unwrap_or_else(|| summary_path_for(&args.out));
    write_summary_json(&summary_path, &result)?;
    println!(
        "{}: {} iterations, residual {:.3e} ({} trace rows)",
        status_word(result.status),
        result.iterations,
        result.final_residual,
        result.trace.len()
    );
    if result.status == SolveStatus::Error {
        bail!("solver failed: {}", result.message.unwrap_or_default());
    }
    Ok(ExitCode::SUCCESS)
}

fn summary_path_for(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".summary.json");
    PathBuf::from(s)
}

fn status_word(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxIterations => "max-iterations",
        SolveStatus::Error => "error",
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    if let Some(trace_path) = &args.trace {
        let rows = read_trace_csv(trace_path)?;
        let steps: Vec<_> = rows.iter().map(|r| r.to_recorded_step()).collect();
        let audit = audit_recorded_steps(&steps, None, args.tau1, args.tau2)?;
        println!(
            "audited {} recorded steps ({} adjacent transitions)",
            audit.steps_audited, audit.adjacent_transitions
        );
        return match audit.first_violation {
            None => {
                println!("PASS trace audit");
                Ok(ExitCode::SUCCESS)
            }
            Some(v) => {
                println!(
                    "FAIL trace audit: {:?} at k={} (ref {:?}) by {:.3e}",
                    v.check, v.k, v.ref_index, v.excess
                );
                Ok(ExitCode::FAILURE)
            }
        };
    }

    if let (Some(problem_path), Some(config_path)) = (&args.problem, &args.config) {
        return verify_problem_run(problem_path, config_path, &args);
    }

    let outcomes = if args.quick { run_quick(args.seed) } else { run_all(args.seed) };
    let mut all_ok = true;
    for outcome in &outcomes {
        println!("{}", outcome.line());
        all_ok &= outcome.passed;
    }
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn verify_problem_run(problem_path: &Path, config_path: &Path, args: &VerifyArgs) -> Result<ExitCode> {
    let problem = load_problem(problem_path)?;
    let config: RunConfig = load_config(config_path)?;
    let m = problem.operators.len();
    let solver_config = config.build(m, problem.spec.reference_points.clone())?;
    let x0 = match &args.start {
        Some(entries) => Vector::new(entries.clone())?,
        None => Vector::zeros(problem.spec.dimension),
    };
    let result = run(&problem.operators, &x0, &solver_config);
    println!(
        "run: {} after {} iterations, residual {:.3e}",
        status_word(result.status),
        result.iterations,
        result.final_residual
    );
    let mut ok = result.status == SolveStatus::Converged;

    // weight-condition evidence for the configured schedule
    let schedule = config.schedule.build(m)?;
    let guarantee = schedule.guarantee();
    if let Some((window, floor)) = guarantee.intermittent {
        let horizon = args.horizon.max(window);
        let report = cutters::weights::verify_intermittent(&schedule, horizon, window, floor)?;
        println!(
            "schedule intermittent floor (window {window}, floor {floor:.4}): {}",
            if report.holds() { "holds on horizon" } else { "VIOLATED" }
        );
        ok &= report.holds();
    } else {
        let report = cutters::weights::sum_divergence_report(&schedule, args.horizon)?;
        let min = report.partial_sums.iter().cloned().fold(f64::INFINITY, f64::min);
        println!(
            "schedule has no intermittent guarantee; partial sums on horizon {} have min {min:.3}",
            args.horizon
        );
        // probe a small grid for intermittent-floor violations and show the
        // first concrete witness
        'probe: for window in [1usize, 10, 50] {
            for floor in [1e-3, 1e-2] {
                if args.horizon < window {
                    continue;
                }
                let probe =
                    cutters::weights::verify_intermittent(&schedule, args.horizon, window, floor)?;
                if let cutters::weights::Verdict::ViolatedAt { k, index } = probe.verdict {
                    println!(
                        "intermittent floor {floor} fails for window {window}: \
                         index {index} stays below it on iterations {k}..{}",
                        k + window - 1
                    );
                    break 'probe;
                }
            }
        }
    }

    if problem.spec.reference_points.is_empty() {
        println!("no reference points: Fejer audit skipped");
    } else {
        let audit = fejer_audit(
            &result,
            &problem.spec.reference_points,
            solver_config.tau1,
            solver_config.tau2,
        )?;
        match audit.first_violation {
            None => println!("PASS Fejer audit ({} steps)", audit.steps_audited),
            Some(v) => {
                println!("FAIL Fejer audit: {:?} at k={} by {:.3e}", v.check, v.k, v.excess);
                ok = false;
            }
        }
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

struct BenchRow {
    policy: String,
    schedule: String,
    seed: u64,
    status: SolveStatus,
    iterations: usize,
    final_residual: f64,
}

fn parse_policies(text: &str) -> Result<Vec<(String, PolicyDesc)>> {
    let mut out = Vec::new();
    for token in text.split(',').filter(|t| !t.trim().is_empty()) {
        let token = token.trim();
        let desc = if token == "max" || token == "max-extrapolation" {
            PolicyDesc::MaxExtrapolation
        } else if let Some(v) = token.strip_prefix("fixed:") {
            PolicyDesc::Fixed { value: v.parse().context("fixed:<value>")? }
        } else if let Some(g) = token.strip_prefix("fraction:") {
            PolicyDesc::Fraction { gamma: g.parse().context("fraction:<gamma>")? }
        } else {
            bail!("unknown policy '{token}'");
        };
        out.push((token.to_string(), desc));
    }
    if out.is_empty() {
        bail!("no policies given");
    }
    Ok(out)
}

fn parse_schedules(text: &str, base_seed: u64) -> Result<Vec<(String, ScheduleDesc)>> {
    let mut out = Vec::new();
    for token in text.split(',').filter(|t| !t.trim().is_empty()) {
        let token = token.trim();
        let desc = match token {
            "constant-uniform" => ScheduleDesc::ConstantUniform,
            "cyclic-singleton" => ScheduleDesc::CyclicSingleton,
            "example46" => ScheduleDesc::Example46,
            "remark44" | "remark44-counterexample" => ScheduleDesc::Remark44Counterexample,
            other => {
                if let Some(s) = other.strip_prefix("example45:") {
                    ScheduleDesc::Example45 { s: s.parse().context("example45:<s>")?, seed: base_seed }
                } else {
                    bail!("unknown schedule '{other}'");
                }
            }
        };
        out.push((token.to_string(), desc));
    }
    if out.is_empty() {
        bail!("no schedules given");
    }
    Ok(out)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let policies = parse_policies(&args.policies)?;
    let schedules = parse_schedules(&args.schedules, args.seed)?;
    let mut rows: Vec<BenchRow> = Vec::new();
    let mut curves: Vec<(String, String, u64, usize, f64)> = Vec::new();

    for i in 0..args.runs {
        let seed = args.seed + i as u64;
        let inst = random_instance(args.n, args.m, args.geometry, seed)
            .with_context(|| format!("generating instance for seed {seed}"))?;
        for (sname, sdesc) in &schedules {
            for (pname, pdesc) in &policies {
                let config = RunConfig {
                    tau1: 1.0,
                    tau2: 1.0,
                    lambda_policy: pdesc.clone(),
                    schedule: sdesc.clone(),
                    max_iterations: args.max_iterations,
                    residual_tolerance: args.tolerance,
                    residual_check_stride: None,
                    lambda_cap: None,
                    trace_limit: None,
                }
                .build(inst.operators.len(), inst.reference_points.clone())?;
                let result = run(&inst.operators, &inst.x0, &config);
                if args.curves.is_some() {
                    for rec in &result.trace {
                        if let Some(r) = rec.residual {
                            curves.push((pname.clone(), sname.clone(), seed, rec.k, r));
                        }
                    }
                }
                rows.push(BenchRow {
                    policy: pname.clone(),
                    schedule: sname.clone(),
                    seed,
                    status: result.status,
                    iterations: result.iterations,
                    final_residual: result.final_residual,
                });
            }
        }
    }

    let mut csv = String::from("policy,schedule,seed,n,m,status,iterations,final_residual\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.policy,
            r.schedule,
            r.seed,
            args.n,
            args.m,
            status_word(r.status),
            r.iterations,
            io::format_f64(r.final_residual)
        ));
    }
    fs::write(&args.out, csv)?;

    if let Some(path) = &args.curves {
        let mut text = String::from("policy,schedule,seed,k,residual\n");
        for (p, s, seed, k, r) in &curves {
            text.push_str(&format!("{p},{s},{seed},{k},{}\n", io::format_f64(*r)));
        }
        fs::write(path, text)?;
    }

    let table = aggregate_markdown(&rows, &policies, &schedules);
    println!("{table}");
    if let Some(path) = &args.markdown {
        fs::write(path, &table)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn aggregate_markdown(
    rows: &[BenchRow],
    policies: &[(String, PolicyDesc)],
    schedules: &[(String, ScheduleDesc)],
) -> String {
    let mut out = String::from("| schedule \\ policy |");
    for (p, _) in policies {
        out.push_str(&format!(" {p} |"));
    }
    out.push_str("\n|---|");
    for _ in policies {
        out.push_str("---|");
    }
    out.push('\n');
    for (s, _) in schedules {
        out.push_str(&format!("| {s} |"));
        for (p, _) in policies {
            let cell: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| &r.policy == p && &r.schedule == s)
                .collect();
            let converged: Vec<&&BenchRow> =
                cell.iter().filter(|r| r.status == SolveStatus::Converged).collect();
            if converged.is_empty() {
                out.push_str(" n/a |");
            } else {
                let mean =
                    converged.iter().map(|r| r.iterations as f64).sum::<f64>() / converged.len() as f64;
                out.push_str(&format!(" {:.1} iters ({}/{}) |", mean, converged.len(), cell.len()));
            }
        }
        out.push('\n');
    }
    out
}
