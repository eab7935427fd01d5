//! The simulation loop.
//!
//! A [`World`] owns the agents, the robot and its planner. Each call to
//! [`World::step`] advances time by one fixed `dt` in this order: robot
//! perception per agent, behavior trees, force assembly, agent integration,
//! planner query and robot motion, collision detection, goal-queue
//! bookkeeping, and finally the snapshot appended to the trace.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::behavior::{
    robot_visible, AgentDirectives, AgentView, BehaviorContext, BehaviorEngine, BehaviorKind, BehaviorParams,
    Blackboard, NeighborPolicy, RobotView,
};
use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Vec2};
use crate::planner::{Planner, VelocityCommand};
use crate::sfm::{
    desired_force, group_force, integrate, obstacle_force, pair_force, social_force, Body, ForceBreakdown, Goal,
    GoalQueue, Neighbor, ObstacleMap, SfmParams,
};

#[derive(Debug, Clone)]
pub struct AgentState {
    pub id: u32,
    pub pos: Vec2,
    pub vel: Vec2,
    pub heading: f64,
    pub radius: f64,
    pub goals: GoalQueue,
    pub behavior: BehaviorKind,
    pub group_id: Option<u32>,
    pub forces: ForceBreakdown,
    pub params: SfmParams,
    pub behavior_params: BehaviorParams,
}

impl AgentState {
    pub fn body(&self) -> Body {
        Body { pos: self.pos, vel: self.vel, heading: self.heading, radius: self.radius }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotLimits {
    pub max_v: f64,
    pub max_w: f64,
    pub max_acc_v: f64,
    pub max_acc_w: f64,
}

impl Default for RobotLimits {
    fn default() -> Self {
        RobotLimits { max_v: 0.6, max_w: 1.0, max_acc_v: 0.5, max_acc_w: 1.6 }
    }
}

impl RobotLimits {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let all = [self.max_v, self.max_w, self.max_acc_v, self.max_acc_w];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err("robot limits must be finite and > 0".into())
        }
    }
}

/// Differential-drive robot driven by (v, w) commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub pos: Vec2,
    pub heading: f64,
    pub v: f64,
    pub w: f64,
    pub radius: f64,
    pub goal: Goal,
    pub limits: RobotLimits,
}

impl RobotState {
    pub fn velocity(&self) -> Vec2 {
        Vec2::from_angle(self.heading) * self.v
    }

    pub fn body(&self) -> Body {
        Body { pos: self.pos, vel: self.velocity(), heading: self.heading, radius: self.radius }
    }

    pub fn view(&self) -> RobotView {
        RobotView { pos: self.pos, vel: self.velocity(), heading: self.heading, radius: self.radius }
    }

    /// Clamps a command into the dynamic window around the current (v, w) and the absolute limits.
    pub fn rate_limit(&self, cmd: VelocityCommand, dt: f64) -> VelocityCommand {
        let l = &self.limits;
        let dv = l.max_acc_v * dt;
        let dw = l.max_acc_w * dt;
        VelocityCommand {
            v: cmd.v.clamp(self.v - dv, self.v + dv).clamp(-l.max_v, l.max_v),
            w: cmd.w.clamp(self.w - dw, self.w + dw).clamp(-l.max_w, l.max_w),
        }
    }
}

/// Exact constant-command arc of a unicycle.
pub fn unicycle_step(pos: Vec2, heading: f64, v: f64, w: f64, dt: f64) -> (Vec2, f64) {
    let next_heading = heading + w * dt;
    let pos = if w.abs() < 1e-9 {
        pos + Vec2::from_angle(heading) * (v * dt)
    } else {
        let r = v / w;
        pos + Vec2::new(r * (next_heading.sin() - heading.sin()), r * (heading.cos() - next_heading.cos()))
    };
    (pos, wrap_angle(next_heading))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionKind {
    RobotOnPerson,
    PersonOnRobot,
}

impl CollisionKind {
    pub fn name(self) -> &'static str {
        match self {
            CollisionKind::RobotOnPerson => "robot_on_person",
            CollisionKind::PersonOnRobot => "person_on_robot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub agent_id: u32,
    pub kind: CollisionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub id: u32,
    pub behavior: BehaviorKind,
    pub group_id: Option<u32>,
    pub pos: Vec2,
    pub vel: Vec2,
    pub heading: f64,
    pub radius: f64,
    pub forces: ForceBreakdown,
    /// Social force this agent exerts on the robot.
    pub force_on_robot: Vec2,
    pub episode_active: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotSnapshot {
    pub pos: Vec2,
    pub heading: f64,
    pub v: f64,
    pub w: f64,
    pub vel: Vec2,
    pub radius: f64,
    pub goal: Goal,
    pub obstacle_force: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTick {
    pub t: f64,
    pub agents: Vec<AgentSnapshot>,
    pub robot: RobotSnapshot,
    pub collisions: Vec<CollisionEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub scenario: String,
    pub planner: String,
    pub seed: u64,
    pub dt: f64,
    pub max_time: f64,
    pub completed: bool,
    /// Force summands skipped because two bodies coincided.
    pub degenerate_events: u64,
    pub ticks: Vec<SimTick>,
}

/// Read-only snapshot of an agent as seen by a planner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedAgent {
    pub id: u32,
    pub pos: Vec2,
    pub vel: Vec2,
    pub radius: f64,
}

/// Everything a planner may look at; planners only receive a shared reference.
#[derive(Debug, Clone)]
pub struct Observation<'a> {
    pub robot: RobotState,
    pub map: &'a ObstacleMap,
    pub agents: Vec<ObservedAgent>,
    /// Control period the returned command will be applied for.
    pub dt: f64,
}

/// Initial conditions of a run.
pub struct WorldSetup {
    pub scenario: String,
    pub seed: u64,
    pub dt: f64,
    pub max_time: f64,
    pub map: ObstacleMap,
    pub agents: Vec<AgentState>,
    pub robot: RobotState,
    pub engine: BehaviorEngine,
    /// Interaction parameters used to evaluate forces acting on the robot.
    pub robot_sfm: SfmParams,
}

pub struct World {
    scenario: String,
    seed: u64,
    dt: f64,
    max_time: f64,
    map: ObstacleMap,
    agents: Vec<AgentState>,
    blackboards: Vec<Blackboard>,
    robot: RobotState,
    robot_sfm: SfmParams,
    engine: BehaviorEngine,
    planner: Box<dyn Planner>,
    tick: usize,
    contacts: BTreeSet<u32>,
    degenerate: u64,
    completed: bool,
    ticks: Vec<SimTick>,
}

/// Contact onsets between the robot and each agent; `contacts` tracks ongoing episodes.
pub fn detect_collisions(agents: &[AgentSnapshot], robot: &RobotSnapshot, contacts: &mut BTreeSet<u32>) -> Vec<CollisionEvent> {
    let mut events = Vec::new();
    for a in agents {
        let offset = a.pos - robot.pos;
        let touching = offset.norm() < robot.radius + a.radius;
        if !touching {
            contacts.remove(&a.id);
            continue;
        }
        if !contacts.insert(a.id) {
            continue;
        }
        let dir = offset.normalized();
        let robot_toward = robot.vel.dot(dir);
        let agent_toward = a.vel.dot(-dir);
        let kind = if robot_toward > agent_toward { CollisionKind::RobotOnPerson } else { CollisionKind::PersonOnRobot };
        events.push(CollisionEvent { agent_id: a.id, kind });
    }
    events
}

fn observed_agents(agents: &[AgentState]) -> Vec<ObservedAgent> {
    agents.iter().map(|a| ObservedAgent { id: a.id, pos: a.pos, vel: a.vel, radius: a.radius }).collect()
}

impl World {
    pub fn new(setup: WorldSetup, planner: Box<dyn Planner>) -> Result<Self> {
        if !(setup.dt > 0.0) || !(setup.max_time > 0.0) {
            return Err(Error::invalid("sim", "dt and max_time must be > 0"));
        }
        let blackboards = setup
            .agents
            .iter()
            .map(|a| Blackboard {
                kind: a.behavior,
                params: a.behavior_params,
                ctx: BehaviorContext::new(a.id, setup.seed),
                agent: agent_view(a),
                robot: setup.robot.view(),
                out: AgentDirectives::default(),
            })
            .collect();
        Ok(World {
            scenario: setup.scenario,
            seed: setup.seed,
            dt: setup.dt,
            max_time: setup.max_time,
            map: setup.map,
            agents: setup.agents,
            blackboards,
            robot: setup.robot,
            robot_sfm: setup.robot_sfm,
            engine: setup.engine,
            planner,
            tick: 0,
            contacts: BTreeSet::new(),
            degenerate: 0,
            completed: false,
            ticks: Vec::new(),
        })
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn robot(&self) -> &RobotState {
        &self.robot
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.dt
    }

    pub fn is_done(&self) -> bool {
        self.completed || self.time() >= self.max_time - 1e-9
    }

    pub fn planner_observation(&self) -> Observation<'_> {
        Observation {
            robot: self.robot,
            map: &self.map,
            agents: observed_agents(&self.agents),
            dt: self.dt,
        }
    }

    fn abort(&self, tick: usize, entity: String, message: String) -> Error {
        Error::SimAbort { tick, t: tick as f64 * self.dt, entity, message }
    }

    pub fn step(&mut self) -> Result<&SimTick> {
        let dt = self.dt;
        let now = self.time();
        let next_tick = self.tick + 1;
        let robot_view = self.robot.view();
        let robot_body = self.robot.body();

        let mut directives = Vec::with_capacity(self.agents.len());
        for (agent, bb) in self.agents.iter_mut().zip(self.blackboards.iter_mut()) {
            let visible = robot_visible(&agent.body(), self.robot.pos, &agent.behavior_params.detection, &self.map);
            bb.agent = agent_view(agent);
            bb.robot = robot_view;
            let d = self.engine.apply(bb, now, visible, dt);
            if let Some(saved) = &d.restore_goals {
                agent.goals = saved.clone();
            }
            directives.push(d);
        }

        let bodies: Vec<Body> = self.agents.iter().map(AgentState::body).collect();
        let mut forces = Vec::with_capacity(self.agents.len());
        for (i, agent) in self.agents.iter().enumerate() {
            let d = &directives[i];
            let me = &bodies[i];
            let mut neighbors: Vec<Neighbor> = bodies
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| Neighbor { pos: b.pos, vel: b.vel, is_robot: false })
                .collect();
            let mut discs = Vec::new();
            match d.neighbor_policy {
                NeighborPolicy::RobotAsPedestrian => {
                    neighbors.push(Neighbor { pos: robot_body.pos, vel: robot_body.vel, is_robot: true })
                }
                NeighborPolicy::RobotAsObstacle => discs.push((robot_body.pos, robot_body.radius)),
            }
            let goal = d.goal_override.or_else(|| agent.goals.current());
            let desired_speed = agent.params.desired_speed * d.speed_scale;
            let desired = desired_force(me, goal, desired_speed, &agent.params);
            let social = social_force(me, &neighbors, &agent.params);
            let obstacle = obstacle_force(me, &self.map, &discs, &agent.params);
            let members: Vec<(Vec2, f64)> = match agent.group_id {
                Some(g) => self
                    .agents
                    .iter()
                    .enumerate()
                    .filter(|(j, o)| *j != i && o.group_id == Some(g))
                    .map(|(j, _)| (bodies[j].pos, bodies[j].radius))
                    .collect(),
                None => Vec::new(),
            };
            let walking_dir = match goal {
                Some(g) if g.pos != me.pos => (g.pos - me.pos).normalized(),
                _ => Vec2::from_angle(me.heading),
            };
            let group = group_force(me, walking_dir, &members, &agent.params);
            self.degenerate += u64::from(social.degenerate + obstacle.degenerate);
            forces.push(ForceBreakdown::new(
                desired,
                social.total + d.extra_force,
                obstacle.force,
                group,
                social.robot + d.extra_force,
            ));
        }

        for (i, agent) in self.agents.iter_mut().enumerate() {
            let d = &directives[i];
            let fb = forces[i];
            let max_speed = agent.params.max_speed * d.speed_scale;
            let next = integrate(&bodies[i], fb.total, dt, max_speed)
                .map_err(|e| Error::SimAbort {
                    tick: next_tick,
                    t: next_tick as f64 * dt,
                    entity: format!("agent {}", agent.id),
                    message: e.to_string(),
                })?;
            agent.pos = next.pos;
            agent.vel = next.vel;
            agent.heading = d.heading_override.unwrap_or(next.heading);
            agent.forces = fb;
        }

        let obs = Observation {
            robot: self.robot,
            map: &self.map,
            agents: observed_agents(&self.agents),
            dt,
        };
        let cmd = self.planner.plan(&obs);
        if !(cmd.v.is_finite() && cmd.w.is_finite()) {
            return Err(self.abort(next_tick, format!("planner {}", self.planner.name()), format!("command ({}, {})", cmd.v, cmd.w)));
        }
        let cmd = self.robot.rate_limit(cmd, dt);
        let (pos, heading) = unicycle_step(self.robot.pos, self.robot.heading, cmd.v, cmd.w, dt);
        self.robot.pos = pos;
        self.robot.heading = heading;
        self.robot.v = cmd.v;
        self.robot.w = cmd.w;
        if !pos.is_finite() {
            return Err(self.abort(next_tick, "robot".into(), "non-finite pose".into()));
        }

        let robot_body = self.robot.body();
        let mut agents_snap = Vec::with_capacity(self.agents.len());
        for (agent, d) in self.agents.iter().zip(&directives) {
            let on_robot = match pair_force(&robot_body, agent.pos, agent.vel, &self.robot_sfm) {
                Some(f) => f,
                None => {
                    self.degenerate += 1;
                    Vec2::ZERO
                }
            };
            agents_snap.push(AgentSnapshot {
                id: agent.id,
                behavior: agent.behavior,
                group_id: agent.group_id,
                pos: agent.pos,
                vel: agent.vel,
                heading: agent.heading,
                radius: agent.radius,
                forces: agent.forces,
                force_on_robot: on_robot,
                episode_active: d.episode_active,
            });
        }
        let robot_obstacle = obstacle_force(&robot_body, &self.map, &[], &self.robot_sfm);
        self.degenerate += u64::from(robot_obstacle.degenerate);
        let robot_snap = RobotSnapshot {
            pos: self.robot.pos,
            heading: self.robot.heading,
            v: self.robot.v,
            w: self.robot.w,
            vel: robot_body.vel,
            radius: self.robot.radius,
            goal: self.robot.goal,
            obstacle_force: robot_obstacle.force,
        };
        let collisions = detect_collisions(&agents_snap, &robot_snap, &mut self.contacts);

        for (agent, d) in self.agents.iter_mut().zip(&directives) {
            if d.goal_override.is_none() && agent.goals.current().is_some_and(|g| g.reached_by(agent.pos)) {
                agent.goals.advance();
            }
        }

        self.tick = next_tick;
        if self.robot.goal.reached_by(self.robot.pos) {
            self.completed = true;
        }
        self.ticks.push(SimTick { t: next_tick as f64 * dt, agents: agents_snap, robot: robot_snap, collisions });
        Ok(self.ticks.last().expect("just pushed"))
    }

    /// Steps until the robot reaches its goal or time runs out.
    pub fn run(mut self) -> Result<SimTrace> {
        while !self.is_done() {
            self.step()?;
        }
        Ok(self.into_trace())
    }

    pub fn into_trace(self) -> SimTrace {
        SimTrace {
            scenario: self.scenario,
            planner: self.planner.name().to_string(),
            seed: self.seed,
            dt: self.dt,
            max_time: self.max_time,
            completed: self.completed,
            degenerate_events: self.degenerate,
            ticks: self.ticks,
        }
    }
}

fn agent_view(a: &AgentState) -> AgentView {
    AgentView { pos: a.pos, vel: a.vel, heading: a.heading, radius: a.radius, goals: a.goals.clone(), sfm: a.params }
}
