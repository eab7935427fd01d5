//! Dynamic-window sampling, rollout and scoring shared by all built-in planners.

use serde::{Deserialize, Serialize};

use crate::geom::{wrap_angle, Vec2};
use crate::world::{unicycle_step, Observation};

use super::VelocityCommand;

/// How agents move during a rollout for the collision and clearance checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentPrediction {
    Static,
    ConstantVelocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DwaConfig {
    pub v_samples: usize,
    pub w_samples: usize,
    pub horizon: f64,
    pub rollout_dt: f64,
    pub heading_weight: f64,
    pub clearance_weight: f64,
    pub speed_weight: f64,
    /// Surface distance beyond which clearance costs nothing.
    pub clearance_range: f64,
    pub min_v: f64,
    pub agent_prediction: AgentPrediction,
    /// Candidates are drawn from the velocities reachable within this time;
    /// the returned command is the first control step toward the winner.
    pub window_time: f64,
}

impl Default for DwaConfig {
    fn default() -> Self {
        DwaConfig {
            v_samples: 10,
            w_samples: 20,
            horizon: 3.0,
            rollout_dt: 0.1,
            heading_weight: 0.8,
            clearance_weight: 0.3,
            speed_weight: 0.3,
            clearance_range: 0.5,
            min_v: 0.0,
            agent_prediction: AgentPrediction::ConstantVelocity,
            window_time: 0.5,
        }
    }
}

impl DwaConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.v_samples == 0 || self.w_samples == 0 {
            return Err("dwa sample counts must be >= 1".into());
        }
        if !(self.window_time > 0.0 && self.window_time.is_finite()) {
            return Err("dwa window_time must be > 0".into());
        }
        if !(self.horizon > 0.0 && self.rollout_dt > 0.0 && self.rollout_dt <= self.horizon) {
            return Err("dwa horizon and rollout_dt must satisfy 0 < rollout_dt <= horizon".into());
        }
        let w = [self.heading_weight, self.clearance_weight, self.speed_weight, self.clearance_range, self.min_v];
        if w.iter().any(|x| !(*x >= 0.0)) {
            return Err("dwa weights, clearance_range and min_v must be >= 0".into());
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.rollout_dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub pos: Vec2,
    pub heading: f64,
    /// Time since the start of the rollout.
    pub t: f64,
}

/// A constant-command arc, cut short at the first pose inside the goal tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub cmd: VelocityCommand,
    pub poses: Vec<Pose>,
    pub reaches_goal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub cmd: VelocityCommand,
    pub poses: Vec<Pose>,
    pub heading: f64,
    pub clearance: f64,
    pub speed: f64,
    /// Planner-specific criterion, already weighted.
    pub extra: f64,
    /// Smallest predicted surface distance to anything along the arc.
    pub min_distance: f64,
    pub cost: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

/// (v, w) bounds reachable from the current command within `period`.
pub fn reachable(obs: &Observation<'_>, cfg: &DwaConfig, period: f64) -> ((f64, f64), (f64, f64)) {
    let r = &obs.robot;
    let l = &r.limits;
    let clamp_range = |lo: f64, hi: f64, min: f64, max: f64| {
        let lo = lo.max(min).min(max);
        let hi = hi.min(max).max(lo);
        (lo, hi)
    };
    let v = clamp_range(r.v - l.max_acc_v * period, r.v + l.max_acc_v * period, cfg.min_v.min(l.max_v), l.max_v);
    let w = clamp_range(r.w - l.max_acc_w * period, r.w + l.max_acc_w * period, -l.max_w, l.max_w);
    (v, w)
}

/// Bounds for the command actually returned for the next control period.
pub fn window(obs: &Observation<'_>, cfg: &DwaConfig) -> ((f64, f64), (f64, f64)) {
    reachable(obs, cfg, obs.dt)
}

pub fn sample_window(obs: &Observation<'_>, cfg: &DwaConfig) -> Vec<VelocityCommand> {
    let ((vlo, vhi), (wlo, whi)) = reachable(obs, cfg, cfg.window_time.max(obs.dt));
    let mut out = Vec::with_capacity(cfg.v_samples * cfg.w_samples);
    for v in linspace(vlo, vhi, cfg.v_samples) {
        for w in linspace(wlo, whi, cfg.w_samples) {
            out.push(VelocityCommand { v, w });
        }
    }
    out
}

fn clamp_to_window(obs: &Observation<'_>, cfg: &DwaConfig, cmd: VelocityCommand) -> VelocityCommand {
    let ((vlo, vhi), (wlo, whi)) = window(obs, cfg);
    VelocityCommand { v: cmd.v.clamp(vlo, vhi), w: cmd.w.clamp(wlo, whi) }
}

pub fn rollout(obs: &Observation<'_>, cmd: VelocityCommand, cfg: &DwaConfig) -> Rollout {
    let goal = obs.robot.goal;
    let mut pos = obs.robot.pos;
    let mut heading = obs.robot.heading;
    let mut poses = Vec::with_capacity(cfg.steps());
    let mut reaches_goal = false;
    for k in 1..=cfg.steps() {
        (pos, heading) = unicycle_step(pos, heading, cmd.v, cmd.w, cfg.rollout_dt);
        poses.push(Pose { pos, heading, t: k as f64 * cfg.rollout_dt });
        if goal.reached_by(pos) {
            reaches_goal = true;
            break;
        }
    }
    Rollout { cmd, poses, reaches_goal }
}

/// Smallest surface distance to walls and agents along a rollout; `None` on collision.
pub fn min_distance(obs: &Observation<'_>, r: &Rollout, cfg: &DwaConfig) -> Option<f64> {
    let radius = obs.robot.radius;
    let mut best = f64::INFINITY;
    for p in &r.poses {
        if let Some((_, d)) = obs.map.closest_point(p.pos) {
            best = best.min(d - radius);
        }
        for a in &obs.agents {
            let center = match cfg.agent_prediction {
                AgentPrediction::Static => a.pos,
                AgentPrediction::ConstantVelocity => a.pos + a.vel * p.t,
            };
            best = best.min(p.pos.distance(center) - radius - a.radius);
        }
        if best < 0.0 {
            return None;
        }
    }
    Some(best)
}

fn heading_cost(obs: &Observation<'_>, r: &Rollout) -> f64 {
    if r.reaches_goal {
        return 0.0;
    }
    let end = r.poses.last().map_or((obs.robot.pos, obs.robot.heading), |p| (p.pos, p.heading));
    let to_goal = obs.robot.goal.pos - end.0;
    wrap_angle(to_goal.angle() - end.1).abs() / std::f64::consts::PI
}

struct Candidate {
    cmd: VelocityCommand,
    rollout: Rollout,
    heading: f64,
    clearance: f64,
    speed: f64,
    min_distance: f64,
    base: f64,
}

/// Collision-free arcs with their planner-independent cost.
fn candidates(obs: &Observation<'_>, cfg: &DwaConfig) -> Vec<Candidate> {
    let max_v = obs.robot.limits.max_v;
    let mut out = Vec::new();
    for cmd in sample_window(obs, cfg) {
        let r = rollout(obs, cmd, cfg);
        let Some(dmin) = min_distance(obs, &r, cfg) else { continue };
        let heading = heading_cost(obs, &r);
        let clearance = if cfg.clearance_range > 0.0 { (1.0 - dmin / cfg.clearance_range).max(0.0) } else { 0.0 };
        let speed = (max_v - cmd.v) / max_v;
        let base = cfg.heading_weight * heading + cfg.clearance_weight * clearance + cfg.speed_weight * speed;
        out.push(Candidate { cmd, rollout: r, heading, clearance, speed, min_distance: dmin, base });
    }
    out
}

/// Lower cost first, then the straighter arc, then sampling order.
fn beats(a: (f64, VelocityCommand, usize), b: (f64, VelocityCommand, usize)) -> bool {
    a.0.total_cmp(&b.0).then(a.1.w.abs().total_cmp(&b.1.w.abs())).then(a.2.cmp(&b.2)).is_lt()
}

fn finish(obs: &Observation<'_>, cfg: &DwaConfig, best: Option<VelocityCommand>) -> VelocityCommand {
    let robot = &obs.robot;
    match best {
        Some(cmd) => clamp_to_window(obs, cfg, cmd),
        None => {
            let to_goal = wrap_angle((robot.goal.pos - robot.pos).angle() - robot.heading);
            let dir = if to_goal < 0.0 { -1.0 } else { 1.0 };
            clamp_to_window(obs, cfg, VelocityCommand { v: 0.0, w: dir * robot.limits.max_w / 2.0 })
        }
    }
}

/// Scores every admissible sample and returns the winner with the full sample set.
///
/// `extra` adds a planner-specific (weighted) cost, or rejects the arc with `None`.
pub fn plan(
    obs: &Observation<'_>,
    cfg: &DwaConfig,
    extra: impl Fn(&Rollout) -> Option<f64>,
) -> (VelocityCommand, Vec<TrajectorySample>) {
    if obs.robot.goal.reached_by(obs.robot.pos) {
        return (clamp_to_window(obs, cfg, VelocityCommand::default()), Vec::new());
    }
    let mut samples = Vec::new();
    for c in candidates(obs, cfg) {
        let Some(extra_cost) = extra(&c.rollout) else { continue };
        samples.push(TrajectorySample {
            cmd: c.cmd,
            poses: c.rollout.poses,
            heading: c.heading,
            clearance: c.clearance,
            speed: c.speed,
            extra: extra_cost,
            min_distance: c.min_distance,
            cost: c.base + extra_cost,
        });
    }
    let mut best: Option<(f64, VelocityCommand, usize)> = None;
    for (i, s) in samples.iter().enumerate() {
        let key = (s.cost, s.cmd, i);
        if best.is_none_or(|b| beats(key, b)) {
            best = Some(key);
        }
    }
    (finish(obs, cfg, best.map(|b| b.1)), samples)
}

/// Same command as [`plan`] for a non-negative `extra`, without evaluating it on
/// arcs whose base cost alone already loses.
///
/// `extra` also receives a test that tells whether a lower bound on its value
/// already makes the arc lose; it may then stop early and return that bound.
pub fn plan_bounded(
    obs: &Observation<'_>,
    cfg: &DwaConfig,
    extra: impl Fn(&Rollout, &dyn Fn(f64) -> bool) -> Option<f64>,
) -> VelocityCommand {
    if obs.robot.goal.reached_by(obs.robot.pos) {
        return clamp_to_window(obs, cfg, VelocityCommand::default());
    }
    let cands = candidates(obs, cfg);
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| cands[a].base.total_cmp(&cands[b].base));
    // Candidate order equals sample order in `plan`, so ties resolve identically.
    let mut best: Option<(f64, VelocityCommand, usize)> = None;
    for &i in &order {
        let base = cands[i].base;
        if best.is_some_and(|b| base > b.0) {
            break;
        }
        let loses = |lower: f64| best.is_some_and(|b| base + lower > b.0);
        let Some(e) = extra(&cands[i].rollout, &loses) else { continue };
        let key = (base + e, cands[i].cmd, i);
        if best.is_none_or(|b| beats(key, b)) {
            best = Some(key);
        }
    }
    finish(obs, cfg, best.map(|b| b.1))
}
