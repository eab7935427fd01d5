//! Social-work prediction: agents are rolled forward with the social force
//! model while the robot follows a candidate arc.

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::sfm::{desired_force, integrate, obstacle_force, pair_force, Body, Goal, ObstacleMap, SfmParams};
use crate::world::Observation;

use super::dwa::{DwaConfig, Rollout};

/// Distance ahead of a predicted agent used as its provisional goal.
const GOAL_LOOKAHEAD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SfwParams {
    pub weight: f64,
}

impl Default for SfwParams {
    fn default() -> Self {
        SfwParams { weight: 12.0 }
    }
}

impl SfwParams {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.weight >= 0.0 && self.weight.is_finite() {
            Ok(())
        } else {
            Err("sfw.weight must be finite and >= 0".into())
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct PredictedAgent {
    body: Body,
    goal: Option<Goal>,
    desired_speed: f64,
}

/// Agents are assumed to keep walking the way they currently walk, at their current speed.
pub struct SocialWorkPredictor<'a> {
    agents: Vec<PredictedAgent>,
    map: &'a ObstacleMap,
    robot_radius: f64,
    rollout_dt: f64,
    sfm: SfmParams,
}

impl<'a> SocialWorkPredictor<'a> {
    pub fn new(obs: &Observation<'a>, _params: &SfwParams, dwa: &DwaConfig) -> Self {
        let agents = obs
            .agents
            .iter()
            .map(|a| {
                let speed = a.vel.norm();
                let goal = (speed > 0.0).then(|| Goal { pos: a.pos + a.vel / speed * GOAL_LOOKAHEAD, radius: 0.1 });
                PredictedAgent {
                    body: Body { pos: a.pos, vel: a.vel, heading: a.vel.angle(), radius: a.radius },
                    goal,
                    desired_speed: speed,
                }
            })
            .collect();
        SocialWorkPredictor { agents, map: obs.map, robot_radius: obs.robot.radius, rollout_dt: dwa.rollout_dt, sfm: SfmParams::default() }
    }

    /// Mean per-step social work along the rollout.
    pub fn social_work(&self, r: &Rollout) -> f64 {
        self.social_work_until(r, |_| false)
    }

    /// Like [`Self::social_work`], but stops as soon as `stop` accepts the
    /// mean so far (a lower bound, as every step adds a non-negative amount)
    /// and returns that partial mean.
    pub fn social_work_until(&self, r: &Rollout, stop: impl Fn(f64) -> bool) -> f64 {
        if r.poses.is_empty() {
            return 0.0;
        }
        let p = &self.sfm;
        let mut agents = self.agents.clone();
        let mut next = agents.clone();
        let mut total = 0.0;
        for pose in &r.poses {
            let robot = Body {
                pos: pose.pos,
                vel: Vec2::from_angle(pose.heading) * r.cmd.v,
                heading: pose.heading,
                radius: self.robot_radius,
            };
            for (i, a) in agents.iter().enumerate() {
                let me = &a.body;
                let mut f = desired_force(me, a.goal, a.desired_speed, p) + obstacle_force(me, self.map, &[], p).force;
                for (j, o) in agents.iter().enumerate() {
                    if i != j {
                        f += pair_force(me, o.body.pos, o.body.vel, p).unwrap_or(Vec2::ZERO);
                    }
                }
                f += pair_force(me, robot.pos, robot.vel, p).unwrap_or(Vec2::ZERO);
                next[i].body = match integrate(me, f, self.rollout_dt, p.max_speed) {
                    Ok(s) => Body { pos: s.pos, vel: s.vel, heading: s.heading, radius: me.radius },
                    Err(_) => *me,
                };
            }
            std::mem::swap(&mut agents, &mut next);
            for a in &agents {
                let on_agent = pair_force(&a.body, robot.pos, robot.vel, p).unwrap_or(Vec2::ZERO);
                let on_robot = pair_force(&robot, a.body.pos, a.body.vel, p).unwrap_or(Vec2::ZERO);
                total += on_agent.norm() + on_robot.norm();
            }
            total += obstacle_force(&robot, self.map, &[], p).force.norm();
            if stop(total / r.poses.len() as f64) {
                break;
            }
        }
        total / r.poses.len() as f64
    }
}
