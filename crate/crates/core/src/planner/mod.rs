//! Robot local planners.
//!
//! All built-in planners share one dynamic-window pipeline: sample (v, w)
//! commands reachable within a short look-ahead, roll each out as a
//! constant-command arc, drop arcs that collide, score the rest and keep the
//! cheapest. They differ only in the extra criteria they add to the score.

pub mod costmap;
pub mod dwa;
pub mod sfw;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::Observation;

pub use costmap::{SocialCostmap, SocialLayerParams};
pub use dwa::{DwaConfig, TrajectorySample};
pub use sfw::SfwParams;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub v: f64,
    pub w: f64,
}

pub trait Planner: Send {
    fn name(&self) -> &str;
    fn plan(&mut self, obs: &Observation<'_>) -> VelocityCommand;
}

/// Parameters of every built-in planner; each planner reads the parts it uses.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub dwa: DwaConfig,
    pub social_layer: SocialLayerParams,
    pub sfw: SfwParams,
}

impl PlannerConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        self.dwa.validate()?;
        self.social_layer.validate()?;
        self.sfw.validate()
    }
}

/// Plain dynamic-window planner.
#[derive(Debug, Clone)]
pub struct DwbPlanner {
    pub cfg: PlannerConfig,
}

/// Dynamic window plus a person-centered social costmap criterion.
#[derive(Debug, Clone)]
pub struct SclPlanner {
    pub cfg: PlannerConfig,
}

/// Dynamic window plus SFM-predicted social work.
#[derive(Debug, Clone)]
pub struct SfwPlanner {
    pub cfg: PlannerConfig,
}

impl Planner for DwbPlanner {
    fn name(&self) -> &str {
        "dwb"
    }

    fn plan(&mut self, obs: &Observation<'_>) -> VelocityCommand {
        plan_dwb(obs, &self.cfg)
    }
}

impl Planner for SclPlanner {
    fn name(&self) -> &str {
        "scl"
    }

    fn plan(&mut self, obs: &Observation<'_>) -> VelocityCommand {
        plan_scl(obs, &self.cfg)
    }
}

impl Planner for SfwPlanner {
    fn name(&self) -> &str {
        "sfw"
    }

    fn plan(&mut self, obs: &Observation<'_>) -> VelocityCommand {
        plan_sfw(obs, &self.cfg)
    }
}

pub fn plan_dwb(obs: &Observation<'_>, cfg: &PlannerConfig) -> VelocityCommand {
    dwa::plan_bounded(obs, &cfg.dwa, |_, _| Some(0.0))
}

pub fn plan_scl(obs: &Observation<'_>, cfg: &PlannerConfig) -> VelocityCommand {
    let map = SocialCostmap::build(obs, &cfg.social_layer, &cfg.dwa);
    dwa::plan_bounded(obs, &cfg.dwa, |poses, _| map.traversal_cost(poses).map(|c| cfg.social_layer.weight * c))
}

/// With nobody around there is no social work to predict, and the wall term
/// alone is left to the clearance criterion.
pub fn plan_sfw(obs: &Observation<'_>, cfg: &PlannerConfig) -> VelocityCommand {
    if obs.agents.is_empty() {
        return plan_dwb(obs, cfg);
    }
    let predictor = sfw::SocialWorkPredictor::new(obs, &cfg.sfw, &cfg.dwa);
    let w = cfg.sfw.weight;
    dwa::plan_bounded(obs, &cfg.dwa, |poses, loses| Some(w * predictor.social_work_until(poses, |m| loses(w * m))))
}

pub type PlannerFactory = Arc<dyn Fn(&PlannerConfig) -> Box<dyn Planner> + Send + Sync>;

/// Planners selectable by name; open for user-supplied planners.
#[derive(Clone)]
pub struct PlannerRegistry {
    factories: BTreeMap<String, PlannerFactory>,
    order: Vec<String>,
}

impl Default for PlannerRegistry {
    fn default() -> Self {
        let mut r = PlannerRegistry { factories: BTreeMap::new(), order: Vec::new() };
        r.register("dwb", |cfg| Box::new(DwbPlanner { cfg: *cfg }));
        r.register("scl", |cfg| Box::new(SclPlanner { cfg: *cfg }));
        r.register("sfw", |cfg| Box::new(SfwPlanner { cfg: *cfg }));
        r
    }
}

impl PlannerRegistry {
    pub fn register(&mut self, name: &str, f: impl Fn(&PlannerConfig) -> Box<dyn Planner> + Send + Sync + 'static) {
        if !self.factories.contains_key(name) {
            self.order.push(name.to_string());
        }
        self.factories.insert(name.to_string(), Arc::new(f));
    }

    /// Names in registration order.
    pub fn names(&self) -> &[String] {
        &self.order
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn create(&self, name: &str, cfg: &PlannerConfig) -> Result<Box<dyn Planner>> {
        self.factories.get(name).map(|f| f(cfg)).ok_or_else(|| Error::Unknown {
            what: "planner",
            name: name.to_string(),
            valid: self.order.clone(),
        })
    }
}
