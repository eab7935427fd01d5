//! The three reference rooms. Geometry is approximate: room sizes follow the
//! straight-line robot paths (about 15.2 m for passing, 4.9 m for crossing).

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::behavior::BehaviorKind;
use crate::geom::{Bounds, Vec2};
use crate::world::RobotLimits;

use super::{AgentConfig, RobotConfig, ScenarioConfig, SimConfig, WorldConfig};

const NAMES: [&str; 3] = ["passing", "crossing", "combined"];

pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

fn agent(id: u32, behavior: BehaviorKind, pose: [f64; 3], goals: &[[f64; 2]], cyclic: bool) -> AgentConfig {
    AgentConfig {
        id,
        behavior,
        pose,
        radius: 0.35,
        desired_speed: 0.9,
        max_speed: 1.5,
        goals: goals.iter().map(|&g| Vec2::from(g)).collect(),
        goal_radius: 0.3,
        cyclic,
        group_id: None,
        sfm: None,
        behavior_params: None,
    }
}

fn robot(pose: [f64; 3], goal: [f64; 2]) -> RobotConfig {
    RobotConfig {
        planner: "dwb".into(),
        planner_params: None,
        pose,
        goal: Vec2::from(goal),
        goal_radius: 0.3,
        radius: 0.35,
        limits: RobotLimits::default(),
    }
}

fn room(min: [f64; 2], max: [f64; 2]) -> WorldConfig {
    WorldConfig { bounds: Bounds::new(Vec2::from(min), Vec2::from(max)), walls: Vec::new(), enclosed: true }
}

fn scenario(name: &str, world: WorldConfig, agents: Vec<AgentConfig>, robot: RobotConfig) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        world,
        agents,
        robot,
        sim: SimConfig { spawn_jitter: 0.3, ..SimConfig::default() },
        metrics: vec!["all".into()],
        behavior_trees: BTreeMap::new(),
    }
}

/// Two people walking side by side toward the robot in the lane beside its path.
pub fn passing() -> ScenarioConfig {
    let mut a = agent(1, BehaviorKind::Regular, [6.0, 0.85, PI], &[[-8.0, 0.85]], false);
    let mut b = agent(2, BehaviorKind::Regular, [6.0, 1.8, PI], &[[-8.0, 1.8]], false);
    a.group_id = Some(1);
    b.group_id = Some(1);
    let mut cfg = scenario("passing", room([-8.6, -2.5], [8.6, 2.5]), vec![a, b], robot([-7.6, 0.0, 0.0], [7.6, 0.0]));
    // Walking side by side leaves little room for spawn noise.
    cfg.sim.spawn_jitter = 0.1;
    cfg
}

/// Two people crossing the robot path at right angles and two diagonally, once each.
pub fn crossing() -> ScenarioConfig {
    let r = BehaviorKind::Regular;
    let agents = vec![
        agent(1, r, [-0.6, 3.0, -FRAC_PI_2], &[[-0.6, -3.0]], false),
        agent(2, r, [0.9, -3.0, FRAC_PI_2], &[[0.9, 3.0]], false),
        agent(3, r, [2.8, 2.8, -3.0 * PI / 4.0], &[[-2.8, -2.8]], false),
        agent(4, r, [2.8, -2.8, 3.0 * PI / 4.0], &[[-2.8, 2.8]], false),
    ];
    scenario("crossing", room([-3.5, -3.5], [3.5, 3.5]), agents, robot([-2.45, 0.0, 0.0], [2.45, 0.0]))
}

/// One regular, one curious and one threatening person, all starting far from the robot.
pub fn combined() -> ScenarioConfig {
    let agents = vec![
        agent(1, BehaviorKind::Regular, [6.5, 3.3, -FRAC_PI_2], &[[8.0, -3.3]], false),
        agent(2, BehaviorKind::Curious, [4.0, 3.3, -FRAC_PI_2], &[[4.0, -3.3], [4.0, 3.3]], true),
        agent(3, BehaviorKind::Threatening, [1.0, -3.3, FRAC_PI_2], &[[1.0, 3.3], [1.0, -3.3]], true),
    ];
    scenario("combined", room([-10.0, -4.0], [10.0, 4.0]), agents, robot([-9.0, 0.0, 0.0], [9.0, 0.0]))
}

pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    vec![passing(), crossing(), combined()]
}

pub fn builtin_scenario(name: &str) -> Option<ScenarioConfig> {
    match name {
        "passing" => Some(passing()),
        "crossing" => Some(crossing()),
        "combined" => Some(combined()),
        _ => None,
    }
}
