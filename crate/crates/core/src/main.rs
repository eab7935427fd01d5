use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};

use crowdnav::behavior::BehaviorKind;
use crowdnav::metrics::MetricRegistry;
use crowdnav::planner::PlannerRegistry;
use crowdnav::scenario::{builtin_names, load_scenario, resolve_scenario, run_batch, RunBatch};

#[derive(Parser)]
#[command(name = "crowdnav", version, about = "Headless crowd simulation and social navigation benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario for one or more planners and write metric reports.
    Run {
        /// Built-in scenario name or path to a YAML scenario.
        #[arg(long)]
        scenario: String,
        /// Planner name, comma-separated list, or `all`. Defaults to the scenario's planner.
        #[arg(long)]
        planner: Option<String>,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Base seed; repetition i uses seed + i. Defaults to the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "CROWDNAV_OUT_DIR", default_value = "out")]
        out: PathBuf,
        /// `all` or a comma-separated list. Defaults to the scenario's selection.
        #[arg(long)]
        metrics: Option<String>,
        /// Also dump the full per-tick trace of every run.
        #[arg(long)]
        trace: bool,
    },
    /// Check a scenario file and report the first problem found.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Print a scenario as YAML (useful as a template).
    Show {
        #[arg(long)]
        scenario: String,
    },
    ListMetrics,
    ListBehaviors,
    ListPlanners,
    ListScenarios,
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect()
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, planner, reps, seed, out, metrics, trace } => {
            let cfg = resolve_scenario(&scenario)?;
            let registry = PlannerRegistry::default();
            let planners = match planner.as_deref() {
                None => vec![cfg.robot.planner.clone()],
                Some("all") => registry.names().to_vec(),
                Some(list) => split_list(list),
            };
            let batch = RunBatch {
                base_seed: seed.unwrap_or(cfg.sim.seed),
                metrics: metrics.as_deref().map(split_list).unwrap_or_default(),
                scenario: cfg,
                planners,
                repetitions: reps,
                out_dir: out.clone(),
                write_trace: trace,
            };
            let started = Instant::now();
            let outcome = run_batch(&batch).with_context(|| format!("running scenario `{scenario}`"))?;
            let simulated: f64 = outcome.runs.iter().map(|r| r.report.overall.times.last().copied().unwrap_or(0.0)).sum();
            let wall = started.elapsed().as_secs_f64();
            println!(
                "{} runs, {:.1} s simulated in {:.2} s wall time; results in {}",
                outcome.runs.len(),
                simulated,
                wall,
                out.display()
            );
            for f in &outcome.failures {
                eprintln!("run {}/run_{} (seed {}) aborted: {}", f.planner, f.rep, f.seed, f.message);
            }
            Ok(if outcome.succeeded() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Validate { scenario } => {
            let cfg = load_scenario(&scenario)?;
            println!("{}: ok ({} agents, planner {})", scenario.display(), cfg.agents.len(), cfg.robot.planner);
            Ok(ExitCode::SUCCESS)
        }
        Command::Show { scenario } => {
            print!("{}", resolve_scenario(&scenario)?.to_yaml());
            Ok(ExitCode::SUCCESS)
        }
        Command::ListMetrics => {
            for spec in MetricRegistry::default().specs() {
                println!("{}\t{}", spec.name, spec.unit);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ListBehaviors => {
            for kind in BehaviorKind::ALL {
                println!("{kind}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ListPlanners => {
            for name in PlannerRegistry::default().names() {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ListScenarios => {
            for name in builtin_names() {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
