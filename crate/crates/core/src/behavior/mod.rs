//! Pedestrian reactions to the robot, driven by behavior trees.
//!
//! Each agent owns a [`Blackboard`] that persists across ticks. Every tick the
//! world refreshes the agent and robot views, the tree for the agent's
//! [`BehaviorKind`] runs once, and the resulting [`AgentDirectives`] tell the
//! world how to assemble that agent's forces. Trees never touch world state.

pub mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Vec2};
use crate::sfm::{pair_force, Body, Goal, GoalQueue, ObstacleMap, SfmParams};

pub use tree::{BehaviorNode, BtStatus, CompiledNode, LeafRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BehaviorKind {
    Regular,
    Impassive,
    Surprised,
    Curious,
    Scared,
    Threatening,
}

impl BehaviorKind {
    pub const ALL: [BehaviorKind; 6] = [
        BehaviorKind::Regular,
        BehaviorKind::Impassive,
        BehaviorKind::Surprised,
        BehaviorKind::Curious,
        BehaviorKind::Scared,
        BehaviorKind::Threatening,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BehaviorKind::Regular => "regular",
            BehaviorKind::Impassive => "impassive",
            BehaviorKind::Surprised => "surprised",
            BehaviorKind::Curious => "curious",
            BehaviorKind::Scared => "scared",
            BehaviorKind::Threatening => "threatening",
        }
    }
}

impl fmt::Display for BehaviorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BehaviorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BehaviorKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::Unknown {
            what: "behavior",
            name: s.to_string(),
            valid: BehaviorKind::ALL.iter().map(|k| k.name().to_string()).collect(),
        })
    }
}

/// How an agent perceives the robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionParams {
    pub range: f64,
    /// Full field-of-view angle centered on the heading.
    pub fov: f64,
    pub line_of_sight: bool,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams { range: 10.0, fov: 2.0 * std::f64::consts::PI * (2.0 / 3.0), line_of_sight: true }
    }
}

/// True when the robot is within range, inside the field of view and not hidden by a wall.
pub fn robot_visible(agent: &Body, robot_pos: Vec2, detection: &DetectionParams, map: &ObstacleMap) -> bool {
    let to_robot = robot_pos - agent.pos;
    let dist = to_robot.norm();
    if dist > detection.range {
        return false;
    }
    if dist > 0.0 && wrap_angle(to_robot.angle() - agent.heading).abs() > detection.fov / 2.0 {
        return false;
    }
    !(detection.line_of_sight && map.blocks(agent.pos, robot_pos))
}

/// Tunables of the six reactions. Durations in seconds, distances in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehaviorParams {
    pub detection: DetectionParams,
    pub curious_duration: f64,
    pub curious_speed_scale: f64,
    pub curious_standoff: f64,
    pub threatening_duration: f64,
    pub threatening_standoff: f64,
    pub threatening_speed_scale: f64,
    pub scared_speed_scale: f64,
    pub scared_force_gain: f64,
    /// Continuous invisibility that ends a curious or threatening episode.
    pub lost_hold_time: f64,
    /// Arrival tolerance for goals that track the robot.
    pub chase_goal_radius: f64,
    /// Episode durations are drawn uniformly from ±jitter around the nominal value.
    pub timer_jitter: f64,
}

impl Default for BehaviorParams {
    fn default() -> Self {
        BehaviorParams {
            detection: DetectionParams::default(),
            curious_duration: 30.0,
            curious_speed_scale: 0.4,
            curious_standoff: 1.5,
            threatening_duration: 40.0,
            threatening_standoff: 0.8,
            threatening_speed_scale: 1.0,
            scared_speed_scale: 0.6,
            scared_force_gain: 2.0,
            lost_hold_time: 2.0,
            chase_goal_radius: 0.25,
            timer_jitter: 0.0,
        }
    }
}

impl BehaviorParams {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let d = &self.detection;
        if !(d.range > 0.0) || !(d.fov > 0.0 && d.fov <= 2.0 * std::f64::consts::PI) {
            return Err("detection range must be > 0 and fov in (0, 2π]".into());
        }
        let durations = [self.curious_duration, self.threatening_duration, self.lost_hold_time];
        if durations.iter().any(|v| !(*v >= 0.0)) {
            return Err("durations must be >= 0".into());
        }
        let scales = [self.curious_speed_scale, self.threatening_speed_scale, self.scared_speed_scale];
        if scales.iter().any(|s| !(*s >= 0.0 && *s <= 1.0)) {
            return Err("speed scales must lie in [0, 1]".into());
        }
        if !(self.curious_standoff >= 0.0 && self.threatening_standoff >= 0.0 && self.scared_force_gain >= 0.0) {
            return Err("standoffs and gains must be >= 0".into());
        }
        if !(self.timer_jitter >= 0.0) || !(self.chase_goal_radius > 0.0) {
            return Err("timer_jitter must be >= 0 and chase_goal_radius > 0".into());
        }
        Ok(())
    }

    fn duration(&self, kind: BehaviorKind) -> f64 {
        match kind {
            BehaviorKind::Curious => self.curious_duration,
            BehaviorKind::Threatening => self.threatening_duration,
            _ => f64::INFINITY,
        }
    }
}

/// Whether the robot enters the agent's social interaction or its obstacle set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeighborPolicy {
    RobotAsPedestrian,
    RobotAsObstacle,
}

/// What a behavior asks of the force assembly for one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentDirectives {
    pub neighbor_policy: NeighborPolicy,
    pub goal_override: Option<Goal>,
    /// Multiplies both desired and maximum speed.
    pub speed_scale: f64,
    pub extra_force: Vec2,
    pub heading_override: Option<f64>,
    /// Set on the tick an episode ends: the queue to reinstate.
    pub restore_goals: Option<GoalQueue>,
    pub episode_active: bool,
}

impl Default for AgentDirectives {
    fn default() -> Self {
        AgentDirectives {
            neighbor_policy: NeighborPolicy::RobotAsPedestrian,
            goal_override: None,
            speed_scale: 1.0,
            extra_force: Vec2::ZERO,
            heading_override: None,
            restore_goals: None,
            episode_active: false,
        }
    }
}

/// Robot data visible to behaviors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RobotView {
    pub pos: Vec2,
    pub vel: Vec2,
    pub heading: f64,
    pub radius: f64,
}

const BLOCKING_MIN_SPEED: f64 = 0.05;

/// Point `standoff` meters ahead of the robot along its motion, or its heading when nearly stopped.
pub fn blocking_goal(robot: &RobotView, standoff: f64) -> Vec2 {
    let dir = if robot.vel.norm() > BLOCKING_MIN_SPEED {
        robot.vel.normalized()
    } else {
        Vec2::from_angle(robot.heading)
    };
    robot.pos + dir * standoff
}

/// Agent data visible to behaviors.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentView {
    pub pos: Vec2,
    pub vel: Vec2,
    pub heading: f64,
    pub radius: f64,
    pub goals: GoalQueue,
    pub sfm: SfmParams,
}

impl AgentView {
    fn body(&self) -> Body {
        Body { pos: self.pos, vel: self.vel, heading: self.heading, radius: self.radius }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpisodePhase {
    Idle,
    Active { started: f64, duration: f64 },
    /// Episode over; a new one needs the robot to leave sight first.
    Cooldown,
}

/// Per-agent memory of the trees.
#[derive(Debug, Clone)]
pub struct BehaviorContext {
    pub agent_id: u32,
    pub now: f64,
    pub robot_visible: bool,
    pub invisible_for: f64,
    pub elapsed_in_state: f64,
    pub phase: EpisodePhase,
    pub saved_goal_queue: Option<GoalQueue>,
    pub timers: BTreeMap<String, f64>,
    pub rng: ChaCha8Rng,
}

impl BehaviorContext {
    pub fn new(agent_id: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(agent_id));
        BehaviorContext {
            agent_id,
            now: 0.0,
            robot_visible: false,
            invisible_for: 0.0,
            elapsed_in_state: 0.0,
            phase: EpisodePhase::Idle,
            saved_goal_queue: None,
            timers: BTreeMap::new(),
            rng,
        }
    }

    /// Refreshes perception-derived state before a tick.
    pub fn observe(&mut self, now: f64, visible: bool, dt: f64) {
        self.now = now;
        self.robot_visible = visible;
        self.invisible_for = if visible { 0.0 } else { self.invisible_for + dt };
        self.elapsed_in_state = match self.phase {
            EpisodePhase::Active { started, .. } => (now - started).max(0.0),
            _ => 0.0,
        };
        for t in self.timers.values_mut() {
            *t += dt;
        }
        if self.phase == EpisodePhase::Cooldown && !visible {
            self.phase = EpisodePhase::Idle;
        }
    }
}

/// Blackboard the leaves read and write.
#[derive(Debug, Clone)]
pub struct Blackboard {
    pub kind: BehaviorKind,
    pub params: BehaviorParams,
    pub ctx: BehaviorContext,
    pub agent: AgentView,
    pub robot: RobotView,
    pub out: AgentDirectives,
}

impl Blackboard {
    fn face_robot(&mut self) {
        let to_robot = self.robot.pos - self.agent.pos;
        if to_robot.norm() > 0.0 {
            self.out.heading_override = Some(to_robot.angle());
        }
    }

    fn away_from_robot(&self) -> Vec2 {
        let away = self.agent.pos - self.robot.pos;
        if away.norm() > 0.0 {
            away.normalized()
        } else {
            -Vec2::from_angle(self.agent.heading)
        }
    }
}

/// Leaves available to tree descriptions.
pub fn builtin_leaves() -> LeafRegistry<Blackboard> {
    let mut r = LeafRegistry::<Blackboard>::new();
    r.condition("always_true", |_| true)
        .condition("always_false", |_| false)
        .condition("robot_visible", |b| b.ctx.robot_visible)
        .condition("robot_lost", |b| b.ctx.invisible_for >= b.params.lost_hold_time)
        .condition("episode_active", |b| matches!(b.ctx.phase, EpisodePhase::Active { .. }))
        .condition("episode_ready", |b| b.ctx.phase == EpisodePhase::Idle)
        .condition("episode_expired", |b| match b.ctx.phase {
            EpisodePhase::Active { duration, .. } => b.ctx.elapsed_in_state >= duration,
            _ => false,
        })
        .condition("goal_reached", |b| b.agent.goals.current().is_some_and(|g| g.reached_by(b.agent.pos)))
        .action("noop_success", |_| BtStatus::Success)
        .action("noop_failure", |_| BtStatus::Failure)
        .action("regular_nav", |b| {
            b.out.neighbor_policy = NeighborPolicy::RobotAsPedestrian;
            BtStatus::Success
        })
        .action("impassive_nav", |b| {
            b.out.neighbor_policy = NeighborPolicy::RobotAsObstacle;
            BtStatus::Success
        })
        .action("start_episode", |b| {
            let nominal = b.params.duration(b.kind);
            let jitter = b.params.timer_jitter;
            let duration = if jitter > 0.0 && nominal.is_finite() {
                (nominal + b.ctx.rng.random_range(-jitter..=jitter)).max(0.0)
            } else {
                nominal
            };
            b.ctx.saved_goal_queue = Some(b.agent.goals.clone());
            b.ctx.phase = EpisodePhase::Active { started: b.ctx.now, duration };
            b.ctx.elapsed_in_state = 0.0;
            BtStatus::Success
        })
        .action("end_episode", |b| {
            b.out.restore_goals = b.ctx.saved_goal_queue.take();
            b.ctx.phase = EpisodePhase::Cooldown;
            b.ctx.elapsed_in_state = 0.0;
            BtStatus::Success
        })
        .action("look_at_robot", |b| {
            b.out.speed_scale = 0.0;
            b.face_robot();
            BtStatus::Running
        })
        .action("approach_robot", |b| {
            let target = b.robot.pos + b.away_from_robot() * b.params.curious_standoff;
            b.out.goal_override = Some(Goal { pos: target, radius: b.params.chase_goal_radius });
            b.out.speed_scale = b.params.curious_speed_scale;
            b.face_robot();
            BtStatus::Running
        })
        .action("block_robot", |b| {
            let target = blocking_goal(&b.robot, b.params.threatening_standoff);
            b.out.goal_override = Some(Goal { pos: target, radius: b.params.chase_goal_radius });
            b.out.speed_scale = b.params.threatening_speed_scale;
            b.face_robot();
            BtStatus::Running
        })
        .action("avoid_robot", |b| {
            let summand = pair_force(&b.agent.body(), b.robot.pos, b.robot.vel, &b.agent.sfm).unwrap_or(Vec2::ZERO);
            b.out.extra_force = b.away_from_robot() * (b.params.scared_force_gain * summand.norm());
            b.out.speed_scale = b.params.scared_speed_scale;
            BtStatus::Running
        });
    r
}

fn timed_episode(engage: &str) -> BehaviorNode {
    use BehaviorNode as N;
    N::fallback(vec![
        N::sequence(vec![
            N::condition("episode_active"),
            N::fallback(vec![
                N::sequence(vec![
                    N::fallback(vec![N::condition("episode_expired"), N::condition("robot_lost")]),
                    N::action("end_episode"),
                    N::action("regular_nav"),
                ]),
                N::action(engage),
            ]),
        ]),
        N::sequence(vec![
            N::condition("episode_ready"),
            N::condition("robot_visible"),
            N::action("start_episode"),
            N::action(engage),
        ]),
        N::action("regular_nav"),
    ])
}

fn while_visible(engage: &str) -> BehaviorNode {
    use BehaviorNode as N;
    N::fallback(vec![
        N::sequence(vec![N::condition("robot_visible"), N::action(engage)]),
        N::action("regular_nav"),
    ])
}

/// Built-in tree description for a behavior.
pub fn builtin_tree(kind: BehaviorKind) -> BehaviorNode {
    match kind {
        BehaviorKind::Regular => BehaviorNode::action("regular_nav"),
        BehaviorKind::Impassive => BehaviorNode::action("impassive_nav"),
        BehaviorKind::Surprised => while_visible("look_at_robot"),
        BehaviorKind::Scared => while_visible("avoid_robot"),
        BehaviorKind::Curious => timed_episode("approach_robot"),
        BehaviorKind::Threatening => timed_episode("block_robot"),
    }
}

/// Compiled trees for all six behaviors.
#[derive(Debug, Clone)]
pub struct BehaviorEngine {
    trees: BTreeMap<BehaviorKind, CompiledNode<Blackboard>>,
}

impl BehaviorEngine {
    pub fn builtin() -> Self {
        Self::with_overrides(&BTreeMap::new()).expect("built-in trees compile")
    }

    /// Built-in trees with some kinds replaced by user descriptions.
    pub fn with_overrides(overrides: &BTreeMap<BehaviorKind, BehaviorNode>) -> Result<Self> {
        let leaves = builtin_leaves();
        let mut trees = BTreeMap::new();
        for kind in BehaviorKind::ALL {
            let node = overrides.get(&kind).cloned().unwrap_or_else(|| builtin_tree(kind));
            trees.insert(kind, leaves.compile(&node)?);
        }
        Ok(BehaviorEngine { trees })
    }

    /// Parses a JSON object mapping behavior names to tree descriptions.
    pub fn from_json_overrides(text: &str) -> Result<Self> {
        let overrides: BTreeMap<BehaviorKind, BehaviorNode> = serde_json::from_str(text)
            .map_err(|e| Error::Parse { origin: "behavior tree file".into(), message: e.to_string() })?;
        Self::with_overrides(&overrides)
    }

    /// Observes the robot, ticks the agent's tree once and returns its directives.
    pub fn apply(&self, bb: &mut Blackboard, now: f64, visible: bool, dt: f64) -> AgentDirectives {
        bb.ctx.observe(now, visible, dt);
        bb.out = AgentDirectives::default();
        self.trees[&bb.kind].tick(bb);
        bb.out.episode_active = matches!(bb.ctx.phase, EpisodePhase::Active { .. });
        bb.out.clone()
    }
}
