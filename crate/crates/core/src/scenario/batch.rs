//! Repeated runs of one scenario across planners, with a cross-run summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{format_value, write_reports, MetricRegistry, MetricReport};
use crate::planner::PlannerRegistry;
use crate::trace;
use crate::world::SimTrace;

use super::{resolve_metric_names, ScenarioConfig};

#[derive(Debug, Clone)]
pub struct RunBatch {
    pub scenario: ScenarioConfig,
    pub planners: Vec<String>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub out_dir: PathBuf,
    /// Overrides the scenario's metric selection when non-empty.
    pub metrics: Vec<String>,
    /// Also writes `trace.tsv` into every run directory.
    pub write_trace: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub planner: String,
    /// `all` or a behavior name.
    pub scope: String,
    pub metric: String,
    /// Runs in which the metric was present.
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub planner: String,
    pub rep: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub planner: String,
    pub rep: usize,
    pub seed: u64,
    pub report: MetricReport,
    pub aborted: Option<String>,
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub runs: Vec<RunResult>,
    pub summary: Vec<SummaryRow>,
    pub failures: Vec<RunFailure>,
}

impl BatchOutcome {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn mean(&self, planner: &str, scope: &str, metric: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.planner == planner && r.scope == scope && r.metric == metric)
            .map(|r| r.mean)
    }
}

/// Runs one scenario to completion; a simulation abort keeps the partial trace.
pub fn run_single(cfg: &ScenarioConfig, planner: &str, seed: u64, planners: &PlannerRegistry) -> Result<(SimTrace, Option<Error>)> {
    let mut world = cfg.build_world(planner, seed, planners)?;
    let mut abort = None;
    while !world.is_done() {
        if let Err(e) = world.step() {
            abort = Some(e);
            break;
        }
    }
    Ok((world.into_trace(), abort))
}

fn run_dir(batch: &RunBatch, planner: &str, rep: usize) -> PathBuf {
    batch.out_dir.join(planner).join(format!("run_{rep}"))
}

fn execute(batch: &RunBatch, planner: &str, rep: usize, names: &[String], planners: &PlannerRegistry, metrics: &MetricRegistry) -> Result<RunResult> {
    let seed = batch.base_seed + rep as u64;
    let (trace, abort) = run_single(&batch.scenario, planner, seed, planners)?;
    let report = metrics.evaluate(&trace, names)?;
    let dir = run_dir(batch, planner, rep);
    write_reports(&report, &dir)?;
    if batch.write_trace {
        trace::write_tsv(&trace, &dir.join("trace.tsv"))?;
    }
    let aborted = abort.map(|e| e.to_string());
    if let Some(msg) = &aborted {
        let path = dir.join("error.txt");
        fs::write(&path, format!("{msg}\n")).map_err(|e| Error::io(&path, e))?;
    }
    Ok(RunResult { planner: planner.to_string(), rep, seed, report, aborted })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn summarize(planners: &[String], runs: &[RunResult]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for planner in planners {
        let done: Vec<&RunResult> = runs.iter().filter(|r| &r.planner == planner && r.aborted.is_none()).collect();
        let Some(first) = done.first() else { continue };
        let specs = &first.report.specs;
        let mut scopes: Vec<String> = vec!["all".into()];
        let mut kinds = BTreeMap::new();
        for r in &done {
            for k in r.report.groups.keys() {
                kinds.insert(*k, ());
            }
        }
        scopes.extend(kinds.keys().map(|k| k.to_string()));
        for scope in &scopes {
            for spec in specs {
                let values: Vec<f64> = done
                    .iter()
                    .filter_map(|r| {
                        if scope == "all" {
                            r.report.final_value(&spec.name)
                        } else {
                            let kind = scope.parse().ok()?;
                            r.report.group_final(kind, &spec.name)
                        }
                    })
                    .collect();
                if values.is_empty() {
                    continue;
                }
                let (mean, std) = mean_std(&values);
                rows.push(SummaryRow {
                    planner: planner.clone(),
                    scope: scope.clone(),
                    metric: spec.name.clone(),
                    n: values.len(),
                    mean,
                    std,
                });
            }
        }
    }
    rows
}

pub fn summary_text(rows: &[SummaryRow]) -> String {
    let mut out = String::from("planner\tscope\tmetric\tn\tmean\tstd\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", r.planner, r.scope, r.metric, r.n, format_value(r.mean), format_value(r.std));
    }
    out
}

/// Runs every (planner, repetition) pair in parallel with seeds `base_seed + rep`.
pub fn run_batch(batch: &RunBatch) -> Result<BatchOutcome> {
    if batch.repetitions == 0 {
        return Err(Error::invalid("reps", "must be >= 1"));
    }
    let planners = PlannerRegistry::default();
    for p in &batch.planners {
        if !planners.contains(p) {
            return Err(Error::Unknown { what: "planner", name: p.clone(), valid: planners.names().to_vec() });
        }
    }
    let metrics = MetricRegistry::default();
    batch.scenario.validate(&planners, &metrics)?;
    let selection = if batch.metrics.is_empty() { &batch.scenario.metrics } else { &batch.metrics };
    let names = resolve_metric_names(selection, &metrics)?;
    fs::create_dir_all(&batch.out_dir).map_err(|e| Error::io(&batch.out_dir, e))?;

    let jobs: Vec<(&str, usize)> =
        batch.planners.iter().flat_map(|p| (0..batch.repetitions).map(move |i| (p.as_str(), i))).collect();
    let results: Vec<Result<RunResult>> =
        jobs.par_iter().map(|&(p, i)| execute(batch, p, i, &names, &planners, &metrics)).collect();
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;

    let failures = runs
        .iter()
        .filter_map(|r| {
            r.aborted.as_ref().map(|m| RunFailure { planner: r.planner.clone(), rep: r.rep, seed: r.seed, message: m.clone() })
        })
        .collect();
    let summary = summarize(&batch.planners, &runs);
    let path = batch.out_dir.join("summary.tsv");
    fs::write(&path, summary_text(&summary)).map_err(|e| Error::io(&path, e))?;
    Ok(BatchOutcome { runs, summary, failures })
}
