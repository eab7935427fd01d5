//! Scenario files: schema, validation and world construction.

mod batch;
mod builtin;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize};

use crate::behavior::{BehaviorEngine, BehaviorKind, BehaviorNode, BehaviorParams};
use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Bounds, Segment, Vec2};
use crate::metrics::MetricRegistry;
use crate::planner::{PlannerConfig, PlannerRegistry};
use crate::sfm::{ForceBreakdown, Goal, GoalQueue, ObstacleMap, SfmParams};
use crate::world::{AgentState, RobotLimits, RobotState, World, WorldSetup};

pub use batch::{run_batch, run_single, summary_text, BatchOutcome, RunBatch, RunFailure, RunResult, SummaryRow};
pub use builtin::{builtin_names, builtin_scenario, builtin_scenarios};

/// Stream of the scenario RNG reserved for spawn jitter.
const SPAWN_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldConfig {
    pub bounds: Bounds,
    #[serde(default)]
    pub walls: Vec<Segment>,
    /// Adds the four boundary walls to `walls`.
    #[serde(default = "yes")]
    pub enclosed: bool,
}

fn yes() -> bool {
    true
}

/// Position and heading as `[x, y, theta]`.
pub type Pose = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub id: u32,
    #[serde(default = "regular")]
    pub behavior: BehaviorKind,
    pub pose: Pose,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_desired_speed")]
    pub desired_speed: f64,
    #[serde(default = "default_max_speed")]
    pub max_speed: f64,
    #[serde(default)]
    pub goals: Vec<Vec2>,
    #[serde(default = "default_goal_radius")]
    pub goal_radius: f64,
    #[serde(default)]
    pub cyclic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_id: Option<u32>,
    /// Interaction parameters; speeds and radius above take precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sfm: Option<SfmParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior_params: Option<BehaviorParams>,
}

fn regular() -> BehaviorKind {
    BehaviorKind::Regular
}

fn default_radius() -> f64 {
    SfmParams::default().agent_radius
}

fn default_desired_speed() -> f64 {
    SfmParams::default().desired_speed
}

fn default_max_speed() -> f64 {
    SfmParams::default().max_speed
}

fn default_goal_radius() -> f64 {
    0.3
}

impl AgentConfig {
    pub fn sfm_params(&self) -> SfmParams {
        SfmParams {
            desired_speed: self.desired_speed,
            max_speed: self.max_speed,
            agent_radius: self.radius,
            ..self.sfm.unwrap_or_default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfig {
    #[serde(default = "default_planner")]
    pub planner: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planner_params: Option<PlannerConfig>,
    pub pose: Pose,
    pub goal: Vec2,
    #[serde(default = "default_goal_radius")]
    pub goal_radius: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub limits: RobotLimits,
}

fn default_planner() -> String {
    "dwb".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub max_time: f64,
    pub seed: u64,
    /// Agent start positions are shifted by up to this much per axis, per seed.
    pub spawn_jitter: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: 0.05, max_time: 120.0, seed: 0, spawn_jitter: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub world: WorldConfig,
    #[serde(default)]
    pub agents: Vec<AgentConfig>,
    pub robot: RobotConfig,
    #[serde(default)]
    pub sim: SimConfig,
    /// Metric names, or `all`.
    #[serde(default = "all_metrics", deserialize_with = "one_or_many")]
    pub metrics: Vec<String>,
    /// Replacement behavior trees keyed by behavior name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub behavior_trees: BTreeMap<BehaviorKind, BehaviorNode>,
}

fn all_metrics() -> Vec<String> {
    vec!["all".into()]
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(String),
        Many(Vec<String>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(s) => s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect(),
        OneOrMany::Many(v) => v,
    })
}

/// Expands `all` and checks every name against the registry.
pub fn resolve_metric_names(selection: &[String], registry: &MetricRegistry) -> Result<Vec<String>> {
    if selection.iter().any(|s| s == "all") {
        return Ok(registry.names());
    }
    let idx = registry.resolve(selection)?;
    let names = registry.names();
    Ok(idx.into_iter().map(|i| names[i].clone()).collect())
}

fn check(ok: bool, key: impl Into<String>, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(key, message))
    }
}

fn finite_pose(p: &Pose) -> bool {
    p.iter().all(|v| v.is_finite())
}

impl ScenarioConfig {
    pub fn from_yaml(text: &str, origin: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_yaml::from_str(text).map_err(|e| Error::Parse { origin: origin.to_string(), message: e.to_string() })?;
        cfg.validate(&PlannerRegistry::default(), &MetricRegistry::default())?;
        Ok(cfg)
    }

    pub fn to_yaml(&self) -> String {
        serde_yaml::to_string(self).expect("scenario serializes")
    }

    pub fn obstacle_map(&self) -> Result<ObstacleMap> {
        let mut walls = self.world.walls.clone();
        if self.world.enclosed {
            walls.extend(self.world.bounds.walls());
        }
        ObstacleMap::new(walls, self.world.bounds).map_err(|m| Error::invalid("world.walls", m))
    }

    pub fn validate(&self, planners: &PlannerRegistry, metrics: &MetricRegistry) -> Result<()> {
        let b = &self.world.bounds;
        check(b.min.is_finite() && b.max.is_finite() && b.min.x < b.max.x && b.min.y < b.max.y, "world.bounds", "min must be below max on both axes")?;
        self.obstacle_map()?;

        let s = &self.sim;
        check(s.dt > 0.0 && s.dt.is_finite(), "sim.dt", "must be > 0")?;
        check(s.max_time > 0.0 && s.max_time.is_finite(), "sim.max_time", "must be > 0")?;
        check(s.spawn_jitter >= 0.0 && s.spawn_jitter.is_finite(), "sim.spawn_jitter", "must be >= 0")?;

        let r = &self.robot;
        check(planners.contains(&r.planner), "robot.planner", format!("unknown planner `{}`; valid values: {}", r.planner, planners.names().join(", ")))?;
        if let Some(p) = &r.planner_params {
            p.validate().map_err(|m| Error::invalid("robot.planner_params", m))?;
        }
        check(finite_pose(&r.pose) && b.contains(Vec2::new(r.pose[0], r.pose[1])), "robot.pose", "must be finite and inside world.bounds")?;
        check(r.goal.is_finite() && b.contains(r.goal), "robot.goal", "must be inside world.bounds")?;
        check(r.goal_radius > 0.0, "robot.goal_radius", "must be > 0")?;
        check(r.radius > 0.0, "robot.radius", "must be > 0")?;
        r.limits.validate().map_err(|m| Error::invalid("robot.limits", m))?;

        let mut ids = BTreeSet::new();
        let margin = 2.0 * s.spawn_jitter;
        let robot_pos = Vec2::new(r.pose[0], r.pose[1]);
        for (i, a) in self.agents.iter().enumerate() {
            let key = |field: &str| format!("agents[{i}].{field}");
            check(ids.insert(a.id), key("id"), format!("duplicate agent id {}", a.id))?;
            let pos = Vec2::new(a.pose[0], a.pose[1]);
            check(finite_pose(&a.pose) && b.contains(pos), key("pose"), "must be finite and inside world.bounds")?;
            check(a.radius > 0.0, key("radius"), "must be > 0")?;
            check(a.desired_speed >= 0.0 && a.desired_speed <= a.max_speed, key("desired_speed"), "must lie in [0, max_speed]")?;
            check(a.goal_radius > 0.0, key("goal_radius"), "must be > 0")?;
            for (j, g) in a.goals.iter().enumerate() {
                check(g.is_finite() && b.contains(*g), key(&format!("goals[{j}]")), "must be inside world.bounds")?;
            }
            a.sfm_params().validate().map_err(|m| Error::invalid(key("sfm"), m))?;
            if let Some(bp) = &a.behavior_params {
                bp.validate().map_err(|m| Error::invalid(key("behavior_params"), m))?;
            }
            check(pos.distance(robot_pos) >= a.radius + r.radius + margin, key("pose"), "overlaps the robot")?;
            for (j, o) in self.agents.iter().enumerate().take(i) {
                let other = Vec2::new(o.pose[0], o.pose[1]);
                check(pos.distance(other) >= a.radius + o.radius + margin, key("pose"), format!("overlaps agents[{j}]"))?;
            }
        }

        check(!self.metrics.is_empty(), "metrics", "no metric selected")?;
        resolve_metric_names(&self.metrics, metrics).map_err(|e| Error::invalid("metrics", e.to_string()))?;
        BehaviorEngine::with_overrides(&self.behavior_trees).map_err(|e| Error::invalid("behavior_trees", e.to_string()))?;
        Ok(())
    }

    /// Agent start positions for a seed, after spawn jitter.
    pub fn spawn_positions(&self, seed: u64) -> Vec<Vec2> {
        let j = self.sim.spawn_jitter;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(SPAWN_STREAM);
        self.agents
            .iter()
            .map(|a| {
                let base = Vec2::new(a.pose[0], a.pose[1]);
                if j > 0.0 {
                    base + Vec2::new(rng.random_range(-j..=j), rng.random_range(-j..=j))
                } else {
                    base
                }
            })
            .collect()
    }

    /// A ready-to-run world for `planner` with the given seed.
    pub fn build_world(&self, planner: &str, seed: u64, planners: &PlannerRegistry) -> Result<World> {
        let map = self.obstacle_map()?;
        let positions = self.spawn_positions(seed);
        let agents = self
            .agents
            .iter()
            .zip(positions)
            .map(|(a, pos)| AgentState {
                id: a.id,
                pos,
                vel: Vec2::ZERO,
                heading: wrap_angle(a.pose[2]),
                radius: a.radius,
                goals: GoalQueue::new(a.goals.iter().map(|&g| Goal { pos: g, radius: a.goal_radius }).collect(), a.cyclic),
                behavior: a.behavior,
                group_id: a.group_id,
                forces: ForceBreakdown::default(),
                params: a.sfm_params(),
                behavior_params: a.behavior_params.unwrap_or_default(),
            })
            .collect();
        let r = &self.robot;
        let robot = RobotState {
            pos: Vec2::new(r.pose[0], r.pose[1]),
            heading: wrap_angle(r.pose[2]),
            v: 0.0,
            w: 0.0,
            radius: r.radius,
            goal: Goal { pos: r.goal, radius: r.goal_radius },
            limits: r.limits,
        };
        let setup = WorldSetup {
            scenario: self.name.clone(),
            seed,
            dt: self.sim.dt,
            max_time: self.sim.max_time,
            map,
            agents,
            robot,
            engine: BehaviorEngine::with_overrides(&self.behavior_trees)?,
            robot_sfm: SfmParams { agent_radius: r.radius, ..SfmParams::default() },
        };
        let planner = planners.create(planner, &r.planner_params.unwrap_or_default())?;
        World::new(setup, planner)
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScenarioConfig::from_yaml(&text, &path.display().to_string())
}

pub fn save_scenario(cfg: &ScenarioConfig, path: &Path) -> Result<()> {
    fs::write(path, cfg.to_yaml()).map_err(|e| Error::io(path, e))
}

/// A built-in scenario name or a path to a scenario file.
pub fn resolve_scenario(name_or_path: &str) -> Result<ScenarioConfig> {
    match builtin_scenario(name_or_path) {
        Some(cfg) => Ok(cfg),
        None => {
            let path = Path::new(name_or_path);
            if !path.exists() {
                return Err(Error::Unknown {
                    what: "scenario",
                    name: name_or_path.to_string(),
                    valid: builtin_names().iter().map(|s| s.to_string()).collect(),
                });
            }
            load_scenario(path)
        }
    }
}
