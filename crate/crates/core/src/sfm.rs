//! Social Force Model terms and the per-agent integrator.
//!
//! The pairwise interaction follows the Moussaïd formulation used by the
//! lightweight SFM libraries: the interaction direction mixes the relative
//! velocity and the relative position, and the force splits into a
//! deceleration component along that direction and an evasion component
//! along its left normal. Force values are accelerations (m/s²).

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{sign, Bounds, Segment, Vec2};

/// Model parameters. Every field has a default and can be overridden per agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SfmParams {
    pub relaxation_time: f64,
    pub desired_speed: f64,
    pub max_speed: f64,
    pub social_force_factor: f64,
    pub social_lambda: f64,
    pub social_gamma: f64,
    pub social_n: f64,
    pub social_n_prime: f64,
    pub obstacle_force_factor: f64,
    pub obstacle_decay: f64,
    pub group_gaze_factor: f64,
    pub group_cohesion_factor: f64,
    pub group_repulsion_factor: f64,
    /// Half-angle of the comfortable vision cone used by the group gaze term.
    pub group_vision_angle: f64,
    pub agent_radius: f64,
}

impl Default for SfmParams {
    fn default() -> Self {
        SfmParams {
            relaxation_time: 0.5,
            desired_speed: 0.9,
            max_speed: 1.5,
            social_force_factor: 2.1,
            social_lambda: 2.0,
            social_gamma: 0.35,
            social_n: 2.0,
            social_n_prime: 3.0,
            obstacle_force_factor: 10.0,
            obstacle_decay: 0.1,
            group_gaze_factor: 3.0,
            group_cohesion_factor: 2.0,
            group_repulsion_factor: 1.0,
            group_vision_angle: FRAC_PI_2,
            agent_radius: 0.35,
        }
    }
}

impl SfmParams {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let finite = [
            self.relaxation_time,
            self.desired_speed,
            self.max_speed,
            self.social_force_factor,
            self.social_lambda,
            self.social_gamma,
            self.social_n,
            self.social_n_prime,
            self.obstacle_force_factor,
            self.obstacle_decay,
            self.group_gaze_factor,
            self.group_cohesion_factor,
            self.group_repulsion_factor,
            self.group_vision_angle,
            self.agent_radius,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err("all parameters must be finite".into());
        }
        if self.relaxation_time <= 0.0 {
            return Err("relaxation_time must be > 0".into());
        }
        if !(self.desired_speed > 0.0 && self.desired_speed <= self.max_speed) {
            return Err("desired_speed must lie in (0, max_speed]".into());
        }
        let factors = [
            self.social_force_factor,
            self.obstacle_force_factor,
            self.group_gaze_factor,
            self.group_cohesion_factor,
            self.group_repulsion_factor,
        ];
        if factors.iter().any(|f| *f < 0.0) {
            return Err("force factors must be >= 0".into());
        }
        if self.social_gamma <= 0.0 || self.obstacle_decay <= 0.0 {
            return Err("social_gamma and obstacle_decay must be > 0".into());
        }
        if self.agent_radius <= 0.0 {
            return Err("agent_radius must be > 0".into());
        }
        Ok(())
    }
}

/// Per-tick decomposition of the force acting on one agent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ForceBreakdown {
    pub desired: Vec2,
    pub social: Vec2,
    pub obstacle: Vec2,
    pub group: Vec2,
    /// Part of `social` caused by the robot.
    pub robot_social: Vec2,
    pub total: Vec2,
}

impl ForceBreakdown {
    pub fn new(desired: Vec2, social: Vec2, obstacle: Vec2, group: Vec2, robot_social: Vec2) -> Self {
        ForceBreakdown {
            desired,
            social,
            obstacle,
            group,
            robot_social,
            total: desired + social + obstacle + group,
        }
    }
}

/// Static walls of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleMap {
    pub segments: Vec<Segment>,
    pub bounds: Bounds,
}

impl ObstacleMap {
    pub fn new(segments: Vec<Segment>, bounds: Bounds) -> std::result::Result<Self, String> {
        for (i, s) in segments.iter().enumerate() {
            if !(s.length() > 0.0) {
                return Err(format!("segment {i} has zero length"));
            }
            if !bounds.contains(s.a) || !bounds.contains(s.b) {
                return Err(format!("segment {i} lies outside the world bounds"));
            }
        }
        Ok(ObstacleMap { segments, bounds })
    }

    pub fn empty(bounds: Bounds) -> Self {
        ObstacleMap { segments: Vec::new(), bounds }
    }

    /// Closest wall point to `p` and its distance, if any wall exists.
    pub fn closest_point(&self, p: Vec2) -> Option<(Vec2, f64)> {
        self.segments
            .iter()
            .map(|s| {
                let c = s.closest_point(p);
                (c, p.distance(c))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// True when the straight line from `a` to `b` crosses a wall.
    pub fn blocks(&self, a: Vec2, b: Vec2) -> bool {
        let sight = Segment::new(a, b);
        self.segments.iter().any(|s| s.intersects(&sight))
    }
}

/// Kinematic view of a moving disc, enough to evaluate every force law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub pos: Vec2,
    pub vel: Vec2,
    pub heading: f64,
    pub radius: f64,
}

/// A navigation target with its arrival tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub pos: Vec2,
    pub radius: f64,
}

impl Goal {
    pub fn reached_by(&self, p: Vec2) -> bool {
        p.distance(self.pos) <= self.radius
    }
}

/// Ordered goals of an agent; the front is the current goal.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GoalQueue {
    pub goals: Vec<Goal>,
    pub cyclic: bool,
}

impl GoalQueue {
    pub fn new(goals: Vec<Goal>, cyclic: bool) -> Self {
        GoalQueue { goals, cyclic }
    }

    pub fn current(&self) -> Option<Goal> {
        self.goals.first().copied()
    }

    /// Drops the current goal, re-appending it when the queue is cyclic.
    pub fn advance(&mut self) {
        if self.goals.is_empty() {
            return;
        }
        let g = self.goals.remove(0);
        if self.cyclic {
            self.goals.push(g);
        }
    }
}

/// Another body taking part in the social interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub pos: Vec2,
    pub vel: Vec2,
    pub is_robot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SocialForce {
    pub total: Vec2,
    pub robot: Vec2,
    /// Summands skipped because the pair was coincident.
    pub degenerate: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObstacleForce {
    pub force: Vec2,
    pub degenerate: u32,
}

/// Goal attraction: relaxes the velocity toward `desired_speed` along the goal direction,
/// or toward rest when there is no goal or it is already reached.
pub fn desired_force(body: &Body, goal: Option<Goal>, desired_speed: f64, params: &SfmParams) -> Vec2 {
    let target = match goal {
        Some(g) if !g.reached_by(body.pos) => (g.pos - body.pos).normalized() * desired_speed,
        _ => Vec2::ZERO,
    };
    (target - body.vel) / params.relaxation_time
}

const THETA_EPS: f64 = 1e-12;

/// Force exerted on `me` by a single neighbor, or `None` when the pair is degenerate.
pub fn pair_force(me: &Body, other_pos: Vec2, other_vel: Vec2, params: &SfmParams) -> Option<Vec2> {
    let diff = other_pos - me.pos;
    let dist = diff.norm();
    if !(dist > 0.0) {
        return None;
    }
    let diff_dir = diff / dist;
    let interaction = (me.vel - other_vel) * params.social_lambda + diff_dir;
    let interaction_len = interaction.norm();
    if !(interaction_len > 0.0) {
        return None;
    }
    let t = interaction / interaction_len;
    // Collinear pairs give theta = 0 up to rounding; keep the angular term off for them.
    let theta = t.cross(diff_dir).atan2(t.dot(diff_dir));
    let theta = if theta.abs() < THETA_EPS { 0.0 } else { theta };
    let b = params.social_gamma * interaction_len;
    let base = -dist / b;
    let vel_amount = -(base - (params.social_n_prime * b * theta).powi(2)).exp();
    let angle_amount = -sign(theta) * (base - (params.social_n * b * theta).powi(2)).exp();
    Some((t * vel_amount + t.left_normal() * angle_amount) * params.social_force_factor)
}

/// Sum of pairwise interactions; `others` must not contain `me`.
pub fn social_force(me: &Body, others: &[Neighbor], params: &SfmParams) -> SocialForce {
    let mut out = SocialForce::default();
    for n in others {
        match pair_force(me, n.pos, n.vel, params) {
            Some(f) => {
                out.total += f;
                if n.is_robot {
                    out.robot += f;
                }
            }
            None => out.degenerate += 1,
        }
    }
    out
}

/// Exponential repulsion from the single nearest obstacle point.
///
/// `discs` are round obstacles (center, radius), e.g. the robot for agents that
/// treat it as an obstacle; their distance is measured to the disc boundary.
pub fn obstacle_force(body: &Body, map: &ObstacleMap, discs: &[(Vec2, f64)], params: &SfmParams) -> ObstacleForce {
    let mut best: Option<(f64, Vec2)> = None;
    let mut degenerate = 0;
    let mut consider = |d: f64, dir: Vec2| {
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, dir));
        }
    };
    if let Some((cp, d)) = map.closest_point(body.pos) {
        let dir = if d > 0.0 {
            (body.pos - cp) / d
        } else {
            degenerate += 1;
            motion_normal(body)
        };
        consider(d, dir);
    }
    for &(center, r) in discs {
        let away = body.pos - center;
        let n = away.norm();
        let dir = if n > 0.0 {
            away / n
        } else {
            degenerate += 1;
            motion_normal(body)
        };
        consider(n - r, dir);
    }
    let force = match best {
        Some((d, dir)) => dir * (params.obstacle_force_factor * ((body.radius - d) / params.obstacle_decay).exp()),
        None => Vec2::ZERO,
    };
    ObstacleForce { force, degenerate }
}

fn motion_normal(body: &Body) -> Vec2 {
    let dir = if body.vel.norm() > 0.0 {
        body.vel.normalized()
    } else {
        Vec2::from_angle(body.heading)
    };
    dir.left_normal()
}

/// Group walking terms: gaze, cohesion and intra-group repulsion.
///
/// `walking_dir` is the agent's unit desired direction; `members` are the
/// other members of its group as (position, radius).
pub fn group_force(me: &Body, walking_dir: Vec2, members: &[(Vec2, f64)], params: &SfmParams) -> Vec2 {
    if members.is_empty() {
        return Vec2::ZERO;
    }
    let count = (members.len() + 1) as f64;
    let centroid = members.iter().fold(me.pos, |acc, (p, _)| acc + *p) / count;
    let rel = centroid - me.pos;
    let rel_dist = rel.norm();

    let mut gaze = Vec2::ZERO;
    let walk_norm = walking_dir.norm();
    if rel_dist > 0.0 && walk_norm > 0.0 {
        let along = walking_dir.dot(rel);
        let cos = (along / (walk_norm * rel_dist)).clamp(-1.0, 1.0);
        if cos.acos() > params.group_vision_angle {
            gaze = walking_dir * (along / walking_dir.norm_squared());
        }
    }

    let threshold = (count - 1.0) / 2.0;
    let cohesion = if rel_dist > threshold { rel } else { Vec2::ZERO };

    let mut repulsion = Vec2::ZERO;
    for (p, r) in members {
        let away = me.pos - *p;
        if away.norm() < me.radius + r {
            repulsion += away;
        }
    }

    gaze * params.group_gaze_factor + cohesion * params.group_cohesion_factor + repulsion * params.group_repulsion_factor
}

/// Kinematic state after one integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrated {
    pub pos: Vec2,
    pub vel: Vec2,
    pub heading: f64,
}

const HEADING_SPEED_EPS: f64 = 1e-3;

/// Semi-implicit Euler with a speed clamp: velocity first, then position from the new velocity.
pub fn integrate(body: &Body, force: Vec2, dt: f64, max_speed: f64) -> Result<Integrated> {
    if !force.is_finite() {
        return Err(Error::NonFinite(format!("force ({}, {})", force.x, force.y)));
    }
    let vel = (body.vel + force * dt).clamp_norm(max_speed.max(0.0));
    let pos = body.pos + vel * dt;
    let heading = if vel.norm() > HEADING_SPEED_EPS { vel.angle() } else { body.heading };
    Ok(Integrated { pos, vel, heading })
}
