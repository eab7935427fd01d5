//! Trajectory metrics, evaluated overall and per behavior group.

mod builtin;
mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::behavior::BehaviorKind;
use crate::error::{Error, Result};
use crate::world::{AgentSnapshot, CollisionEvent, RobotSnapshot, SimTrace};

pub use builtin::BUILTIN_NAMES;
pub use report::{format_value, write_reports, MetricReport, ScopeReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Final,
    PerTickSeries,
    Both,
}

impl MetricKind {
    pub fn has_final(self) -> bool {
        matches!(self, MetricKind::Final | MetricKind::Both)
    }

    pub fn has_series(self) -> bool {
        matches!(self, MetricKind::PerTickSeries | MetricKind::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub name: String,
    pub kind: MetricKind,
    pub unit: String,
}

/// Proxemic zone limits on surface-to-surface distance, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProxemicsThresholds {
    pub intimate: f64,
    pub personal: f64,
    pub social: f64,
}

impl Default for ProxemicsThresholds {
    fn default() -> Self {
        ProxemicsThresholds { intimate: 0.45, personal: 1.2, social: 3.6 }
    }
}

impl ProxemicsThresholds {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if 0.0 < self.intimate && self.intimate < self.personal && self.personal < self.social {
            Ok(())
        } else {
            Err("proxemics thresholds must satisfy 0 < intimate < personal < social".into())
        }
    }
}

/// Final value plus optional per-tick series; `None` entries are absent values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricValue {
    pub final_value: Option<f64>,
    pub series: Option<Vec<Option<f64>>>,
}

/// The trace restricted to one scope: all agents, or one behavior group.
///
/// Robot states are always complete; agent states and collisions only
/// include the agents in scope.
pub struct ScopedTrace<'a> {
    pub dt: f64,
    pub times: Vec<f64>,
    pub robot: Vec<&'a RobotSnapshot>,
    pub agents: Vec<Vec<&'a AgentSnapshot>>,
    pub collisions: Vec<Vec<&'a CollisionEvent>>,
}

impl<'a> ScopedTrace<'a> {
    pub fn new(trace: &'a SimTrace, behavior: Option<BehaviorKind>) -> Self {
        let keep = |a: &AgentSnapshot| behavior.is_none_or(|b| a.behavior == b);
        let mut agents = Vec::with_capacity(trace.ticks.len());
        let mut collisions = Vec::with_capacity(trace.ticks.len());
        for tick in &trace.ticks {
            let in_scope: Vec<&AgentSnapshot> = tick.agents.iter().filter(|a| keep(a)).collect();
            let ids: BTreeSet<u32> = in_scope.iter().map(|a| a.id).collect();
            collisions.push(tick.collisions.iter().filter(|c| ids.contains(&c.agent_id)).collect());
            agents.push(in_scope);
        }
        ScopedTrace {
            dt: trace.dt,
            times: trace.ticks.iter().map(|t| t.t).collect(),
            robot: trace.ticks.iter().map(|t| &t.robot).collect(),
            agents,
            collisions,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn has_agents(&self) -> bool {
        self.agents.iter().any(|a| !a.is_empty())
    }
}

pub type MetricFn = Arc<dyn Fn(&ScopedTrace<'_>) -> MetricValue + Send + Sync>;

/// Ordered metric registry; registry order is the output column order.
#[derive(Clone)]
pub struct MetricRegistry {
    entries: Vec<(MetricSpec, MetricFn)>,
}

impl Default for MetricRegistry {
    fn default() -> Self {
        MetricRegistry::with_thresholds(ProxemicsThresholds::default())
    }
}

impl MetricRegistry {
    pub fn with_thresholds(th: ProxemicsThresholds) -> Self {
        MetricRegistry { entries: builtin::entries(th) }
    }

    pub fn register(
        &mut self,
        spec: MetricSpec,
        f: impl Fn(&ScopedTrace<'_>) -> MetricValue + Send + Sync + 'static,
    ) -> Result<()> {
        if self.entries.iter().any(|(s, _)| s.name == spec.name) {
            return Err(Error::invalid("metrics", format!("metric `{}` is already registered", spec.name)));
        }
        self.entries.push((spec, Arc::new(f)));
        Ok(())
    }

    pub fn specs(&self) -> impl Iterator<Item = &MetricSpec> {
        self.entries.iter().map(|(s, _)| s)
    }

    pub fn names(&self) -> Vec<String> {
        self.specs().map(|s| s.name.clone()).collect()
    }

    /// Indices of the selected metrics in registry order.
    pub fn resolve<S: AsRef<str>>(&self, selected: &[S]) -> Result<Vec<usize>> {
        if selected.is_empty() {
            return Err(Error::invalid("metrics", "no metric selected"));
        }
        let mut picked = BTreeSet::new();
        for name in selected {
            let name = name.as_ref();
            let idx = self.entries.iter().position(|(s, _)| s.name == name).ok_or_else(|| Error::Unknown {
                what: "metric",
                name: name.to_string(),
                valid: self.names(),
            })?;
            picked.insert(idx);
        }
        Ok(picked.into_iter().collect())
    }

    fn scope_report(&self, idx: &[usize], scope: &ScopedTrace<'_>) -> ScopeReport {
        let mut out = ScopeReport { times: scope.times.clone(), values: Vec::with_capacity(idx.len()) };
        for &i in idx {
            let (spec, f) = &self.entries[i];
            let mut v = f(scope);
            if !spec.kind.has_final() {
                v.final_value = None;
            }
            if !spec.kind.has_series() {
                v.series = None;
            }
            out.values.push(v);
        }
        out
    }

    pub fn evaluate<S: AsRef<str>>(&self, trace: &SimTrace, selected: &[S]) -> Result<MetricReport> {
        let idx = self.resolve(selected)?;
        let overall = self.scope_report(&idx, &ScopedTrace::new(trace, None));
        let mut groups = BTreeMap::new();
        for kind in behaviors_present(trace) {
            groups.insert(kind, self.scope_report(&idx, &ScopedTrace::new(trace, Some(kind))));
        }
        Ok(MetricReport {
            scenario: trace.scenario.clone(),
            planner: trace.planner.clone(),
            seed: trace.seed,
            specs: idx.iter().map(|&i| self.entries[i].0.clone()).collect(),
            overall,
            groups,
        })
    }
}

/// Behavior kinds of the agents in a trace, in canonical order.
pub fn behaviors_present(trace: &SimTrace) -> Vec<BehaviorKind> {
    let seen: BTreeSet<BehaviorKind> = trace.ticks.iter().flat_map(|t| t.agents.iter().map(|a| a.behavior)).collect();
    BehaviorKind::ALL.into_iter().filter(|k| seen.contains(k)).collect()
}

/// Evaluates with the built-in registry.
pub fn evaluate<S: AsRef<str>>(trace: &SimTrace, selected: &[S]) -> Result<MetricReport> {
    MetricRegistry::default().evaluate(trace, selected)
}
