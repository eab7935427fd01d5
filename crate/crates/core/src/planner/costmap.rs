//! Robot-centered local costmap with person-centered Gaussian social layers.

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::world::Observation;

use super::dwa::{DwaConfig, Rollout};

pub const LETHAL: u8 = 255;
pub const MAX_SOCIAL: u8 = 254;

/// People slower than this get a round Gaussian.
const SKEW_MIN_SPEED: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SocialLayerParams {
    pub amplitude: f64,
    pub sigma: f64,
    /// Stretch of the Gaussian in front of a moving person.
    pub front_skew: f64,
    pub resolution: f64,
    /// Weight of the normalized traversal cost in the planner score.
    pub weight: f64,
}

impl Default for SocialLayerParams {
    fn default() -> Self {
        SocialLayerParams { amplitude: 180.0, sigma: 0.32, front_skew: 2.5, resolution: 0.05, weight: 6.0 }
    }
}

impl SocialLayerParams {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.amplitude >= 0.0 && self.amplitude <= MAX_SOCIAL as f64) {
            return Err("social_layer.amplitude must be in [0, 254]".into());
        }
        if !(self.sigma > 0.0 && self.front_skew >= 1.0 && self.resolution > 0.0 && self.weight >= 0.0) {
            return Err("social_layer needs sigma > 0, front_skew >= 1, resolution > 0, weight >= 0".into());
        }
        Ok(())
    }

    /// Cost of a point at surface offset `rel` from a person moving with `vel`.
    pub fn gaussian(&self, rel: Vec2, vel: Vec2) -> f64 {
        let speed = vel.norm();
        let (along, across) = if speed > SKEW_MIN_SPEED {
            let u = vel / speed;
            (rel.dot(u), rel.cross(u))
        } else {
            (rel.x, rel.y)
        };
        let sa = if speed > SKEW_MIN_SPEED && along > 0.0 { self.sigma * self.front_skew } else { self.sigma };
        let e = along * along / (2.0 * sa * sa) + across * across / (2.0 * self.sigma * self.sigma);
        self.amplitude * (-e).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SocialCostmap {
    pub resolution: f64,
    /// World position of the corner of cell (0, 0).
    pub origin: Vec2,
    pub width: usize,
    pub height: usize,
    pub cells: Vec<u8>,
}

impl SocialCostmap {
    /// Builds a square window around the robot large enough for every rollout.
    ///
    /// Person costs are evaluated at the surface distance between the robot
    /// footprint and the person, so a cell's value is the cost the robot pays
    /// with its center there. Cells whose whole area is closer to a wall than
    /// the robot radius are lethal.
    pub fn build(obs: &Observation<'_>, params: &SocialLayerParams, dwa: &DwaConfig) -> Self {
        let robot = &obs.robot;
        let res = params.resolution;
        let half = robot.limits.max_v * dwa.horizon + res * 2.0;
        let n = ((2.0 * half) / res).ceil() as usize + 1;
        let origin = robot.pos - Vec2::new(half, half);
        let lethal_within = robot.radius - res * std::f64::consts::FRAC_1_SQRT_2;
        let mut cells = vec![0u8; n * n];
        for iy in 0..n {
            for ix in 0..n {
                let c = origin + Vec2::new((ix as f64 + 0.5) * res, (iy as f64 + 0.5) * res);
                let wall = obs.map.closest_point(c).map(|(_, d)| d);
                if wall.is_some_and(|d| d < lethal_within) {
                    cells[iy * n + ix] = LETHAL;
                    continue;
                }
                let mut best = 0.0f64;
                for a in &obs.agents {
                    let off = c - a.pos;
                    let dist = off.norm();
                    let surface = (dist - robot.radius - a.radius).max(0.0);
                    let rel = if dist > 0.0 { off * (surface / dist) } else { Vec2::ZERO };
                    best = best.max(params.gaussian(rel, a.vel));
                }
                cells[iy * n + ix] = best.round().min(MAX_SOCIAL as f64) as u8;
            }
        }
        SocialCostmap { resolution: res, origin, width: n, height: n, cells }
    }

    /// Cell value under `p`; 0 outside the window.
    pub fn cost_at(&self, p: Vec2) -> u8 {
        let rel = (p - self.origin) / self.resolution;
        if !(rel.x >= 0.0 && rel.y >= 0.0) {
            return 0;
        }
        let (ix, iy) = (rel.x.floor() as usize, rel.y.floor() as usize);
        if ix >= self.width || iy >= self.height {
            return 0;
        }
        self.cells[iy * self.width + ix]
    }

    /// Mean normalized cost under the rollout poses, or `None` if any is lethal.
    pub fn traversal_cost(&self, r: &Rollout) -> Option<f64> {
        if r.poses.is_empty() {
            return Some(0.0);
        }
        let mut sum = 0.0;
        for p in &r.poses {
            let c = self.cost_at(p.pos);
            if c == LETHAL {
                return None;
            }
            sum += c as f64 / MAX_SOCIAL as f64;
        }
        Some(sum / r.poses.len() as f64)
    }
}
