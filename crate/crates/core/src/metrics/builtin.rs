use std::collections::BTreeMap;
use std::sync::Arc;

use crate::geom::{convex_hull, distance_to_convex_region, wrap_angle, Vec2};
use crate::world::{AgentSnapshot, CollisionKind, RobotSnapshot};

use super::{MetricFn, MetricKind, MetricSpec, MetricValue, ProxemicsThresholds, ScopedTrace};

pub const BUILTIN_NAMES: [&str; 28] = [
    "time_to_reach_goal",
    "path_length",
    "cumulative_heading_changes",
    "avg_dist_to_closest_person",
    "min_dist_to_people",
    "intimate_space_intrusions",
    "personal_space_intrusions",
    "social+_space_intrusions",
    "group_intimate_space_intrusions",
    "group_personal_space_intrusions",
    "group_social+_space_intrusions",
    "completed",
    "min_dist_to_target",
    "final_dist_to_target",
    "robot_on_person_collisions",
    "person_on_robot_collisions",
    "time_not_moving",
    "avg_robot_linear_speed",
    "avg_robot_angular_speed",
    "avg_robot_acceleration",
    "avg_robot_jerk",
    "avg_pedestrians_velocity",
    "avg_closest_pedestrian_velocity",
    "social_force_on_agents",
    "social_force_on_robot",
    "obstacle_force_on_agents",
    "obstacle_force_on_robot",
    "social_work",
];

const NOT_MOVING_V: f64 = 0.01;
const NOT_MOVING_W: f64 = 0.05;

#[derive(Clone, Copy)]
enum Zone {
    Intimate,
    Personal,
    SocialPlus,
}

impl Zone {
    fn contains(self, d: f64, th: &ProxemicsThresholds) -> bool {
        match self {
            Zone::Intimate => d < th.intimate,
            Zone::Personal => d >= th.intimate && d < th.personal,
            Zone::SocialPlus => d >= th.personal,
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn surface_distance(robot: &RobotSnapshot, a: &AgentSnapshot) -> f64 {
    robot.pos.distance(a.pos) - a.radius - robot.radius
}

/// Closest agent in scope and its surface distance; the first wins ties.
fn closest<'a>(s: &ScopedTrace<'a>, k: usize) -> Option<(f64, &'a AgentSnapshot)> {
    let robot = s.robot[k];
    let mut best: Option<(f64, &AgentSnapshot)> = None;
    for a in &s.agents[k] {
        let d = surface_distance(robot, a);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, a));
        }
    }
    best
}

/// Surface distance from the robot to the nearest group region.
fn group_distance(s: &ScopedTrace<'_>, k: usize) -> Option<f64> {
    let mut groups: BTreeMap<u32, Vec<&AgentSnapshot>> = BTreeMap::new();
    for a in &s.agents[k] {
        if let Some(g) = a.group_id {
            groups.entry(g).or_default().push(a);
        }
    }
    let robot = s.robot[k];
    groups
        .values()
        .map(|members| {
            let pts: Vec<Vec2> = members.iter().map(|a| a.pos).collect();
            let hull = convex_hull(&pts);
            let r = members.iter().map(|a| a.radius).fold(0.0, f64::max);
            distance_to_convex_region(robot.pos, &hull) - r - robot.radius
        })
        .reduce(f64::min)
}

fn last(s: &ScopedTrace<'_>, series: &[Option<f64>]) -> Option<f64> {
    if s.is_empty() {
        None
    } else {
        series.last().copied().flatten()
    }
}

fn both(final_value: Option<f64>, series: Vec<Option<f64>>) -> MetricValue {
    MetricValue { final_value, series: Some(series) }
}

fn cumulative(s: &ScopedTrace<'_>, step: impl Fn(usize) -> f64) -> MetricValue {
    let mut acc = 0.0;
    let series: Vec<Option<f64>> = (0..s.len())
        .map(|k| {
            acc += step(k);
            Some(acc)
        })
        .collect();
    both(last(s, &series), series)
}

fn time_to_reach_goal(s: &ScopedTrace<'_>) -> MetricValue {
    let series: Vec<Option<f64>> = s.times.iter().map(|&t| Some(t)).collect();
    both(last(s, &series), series)
}

fn path_length(s: &ScopedTrace<'_>) -> MetricValue {
    cumulative(s, |k| if k == 0 { 0.0 } else { s.robot[k].pos.distance(s.robot[k - 1].pos) })
}

fn cumulative_heading_changes(s: &ScopedTrace<'_>) -> MetricValue {
    cumulative(s, |k| if k == 0 { 0.0 } else { wrap_angle(s.robot[k].heading - s.robot[k - 1].heading).abs() })
}

fn avg_dist_to_closest_person(s: &ScopedTrace<'_>) -> MetricValue {
    let series: Vec<Option<f64>> = (0..s.len()).map(|k| closest(s, k).map(|(d, _)| d)).collect();
    both(mean(series.iter().flatten().copied()), series)
}

fn min_dist_to_people(s: &ScopedTrace<'_>) -> MetricValue {
    let mut running: Option<f64> = None;
    let series: Vec<Option<f64>> = (0..s.len())
        .map(|k| {
            if let Some((d, _)) = closest(s, k) {
                running = Some(running.map_or(d, |r| r.min(d)));
            }
            running
        })
        .collect();
    both(running, series)
}

/// Percentage of ticks (with someone to measure against) spent in `zone`.
fn intrusions(s: &ScopedTrace<'_>, zone: Zone, th: &ProxemicsThresholds, dist: impl Fn(usize) -> Option<f64>) -> MetricValue {
    let mut measured = 0usize;
    let mut inside = 0usize;
    let series = (0..s.len())
        .map(|k| {
            dist(k).map(|d| {
                measured += 1;
                let hit = zone.contains(d, th);
                inside += usize::from(hit);
                if hit {
                    1.0
                } else {
                    0.0
                }
            })
        })
        .collect();
    let final_value = (measured > 0).then(|| 100.0 * inside as f64 / measured as f64);
    both(final_value, series)
}

fn completed(s: &ScopedTrace<'_>) -> MetricValue {
    let mut reached = false;
    let series: Vec<Option<f64>> = s
        .robot
        .iter()
        .map(|r| {
            reached |= r.goal.reached_by(r.pos);
            Some(if reached { 1.0 } else { 0.0 })
        })
        .collect();
    both(last(s, &series), series)
}

fn min_dist_to_target(s: &ScopedTrace<'_>) -> MetricValue {
    let mut running = f64::INFINITY;
    let series: Vec<Option<f64>> = s
        .robot
        .iter()
        .map(|r| {
            running = running.min(r.pos.distance(r.goal.pos));
            Some(running)
        })
        .collect();
    both(last(s, &series), series)
}

fn final_dist_to_target(s: &ScopedTrace<'_>) -> MetricValue {
    let series: Vec<Option<f64>> = s.robot.iter().map(|r| Some(r.pos.distance(r.goal.pos))).collect();
    both(last(s, &series), series)
}

fn collisions(s: &ScopedTrace<'_>, kind: CollisionKind) -> MetricValue {
    cumulative(s, |k| s.collisions[k].iter().filter(|c| c.kind == kind).count() as f64)
}

fn time_not_moving(s: &ScopedTrace<'_>) -> MetricValue {
    cumulative(s, |k| {
        let r = s.robot[k];
        if r.v.abs() < NOT_MOVING_V && r.w.abs() < NOT_MOVING_W {
            s.dt
        } else {
            0.0
        }
    })
}

fn per_tick_mean(s: &ScopedTrace<'_>, f: impl Fn(usize) -> Option<f64>) -> MetricValue {
    let series: Vec<Option<f64>> = (0..s.len()).map(f).collect();
    both(mean(series.iter().flatten().copied()), series)
}

/// Finite differences of `values`, aligned so entry k uses samples up to k.
fn differences(values: &[Option<f64>], dt: f64) -> Vec<Option<f64>> {
    (0..values.len())
        .map(|k| match (k.checked_sub(1).and_then(|j| values[j]), values[k]) {
            (Some(prev), Some(cur)) => Some((cur - prev) / dt),
            _ => None,
        })
        .collect()
}

fn acceleration_series(s: &ScopedTrace<'_>) -> Vec<Option<f64>> {
    let speeds: Vec<Option<f64>> = s.robot.iter().map(|r| Some(r.v)).collect();
    differences(&speeds, s.dt)
}

fn avg_robot_acceleration(s: &ScopedTrace<'_>) -> MetricValue {
    let series = acceleration_series(s);
    let final_value = if s.len() >= 2 { mean(series.iter().flatten().map(|a| a.abs())) } else { None };
    both(final_value, series)
}

fn avg_robot_jerk(s: &ScopedTrace<'_>) -> MetricValue {
    let series = differences(&acceleration_series(s), s.dt);
    let final_value = if s.len() >= 4 { mean(series.iter().flatten().map(|j| j.abs())) } else { None };
    both(final_value, series)
}

fn force_sum(s: &ScopedTrace<'_>, f: impl Fn(usize) -> f64) -> MetricValue {
    let series: Vec<Option<f64>> = (0..s.len()).map(|k| Some(f(k))).collect();
    both(mean(series.iter().flatten().copied()), series)
}

fn social_force_on_agents(s: &ScopedTrace<'_>) -> MetricValue {
    force_sum(s, |k| s.agents[k].iter().map(|a| a.forces.robot_social.norm()).sum())
}

fn social_force_on_robot(s: &ScopedTrace<'_>) -> MetricValue {
    force_sum(s, |k| s.agents[k].iter().map(|a| a.force_on_robot.norm()).sum())
}

fn obstacle_force_on_agents(s: &ScopedTrace<'_>) -> MetricValue {
    force_sum(s, |k| s.agents[k].iter().map(|a| a.forces.obstacle.norm()).sum())
}

fn obstacle_force_on_robot(s: &ScopedTrace<'_>) -> MetricValue {
    force_sum(s, |k| s.robot[k].obstacle_force.norm())
}

/// Sum of the three force metrics, both per tick and for the final values.
fn social_work(s: &ScopedTrace<'_>) -> MetricValue {
    let parts = [social_force_on_robot(s), obstacle_force_on_robot(s), social_force_on_agents(s)];
    let final_value = parts.iter().try_fold(0.0, |acc, p| p.final_value.map(|v| acc + v));
    let series = (0..s.len())
        .map(|k| {
            parts.iter().try_fold(0.0, |acc, p| p.series.as_ref().and_then(|x| x[k]).map(|v| acc + v))
        })
        .collect();
    both(final_value, series)
}

pub(super) fn entries(th: ProxemicsThresholds) -> Vec<(MetricSpec, MetricFn)> {
    let person = move |zone: Zone| -> MetricFn {
        Arc::new(move |s: &ScopedTrace<'_>| intrusions(s, zone, &th, |k| closest(s, k).map(|(d, _)| d)))
    };
    let group = move |zone: Zone| -> MetricFn {
        Arc::new(move |s: &ScopedTrace<'_>| intrusions(s, zone, &th, |k| group_distance(s, k)))
    };
    let fns: Vec<(&str, MetricFn)> = vec![
        ("s", Arc::new(time_to_reach_goal)),
        ("m", Arc::new(path_length)),
        ("rad", Arc::new(cumulative_heading_changes)),
        ("m", Arc::new(avg_dist_to_closest_person)),
        ("m", Arc::new(min_dist_to_people)),
        ("%", person(Zone::Intimate)),
        ("%", person(Zone::Personal)),
        ("%", person(Zone::SocialPlus)),
        ("%", group(Zone::Intimate)),
        ("%", group(Zone::Personal)),
        ("%", group(Zone::SocialPlus)),
        ("bool", Arc::new(completed)),
        ("m", Arc::new(min_dist_to_target)),
        ("m", Arc::new(final_dist_to_target)),
        ("count", Arc::new(|s: &ScopedTrace<'_>| collisions(s, CollisionKind::RobotOnPerson))),
        ("count", Arc::new(|s: &ScopedTrace<'_>| collisions(s, CollisionKind::PersonOnRobot))),
        ("s", Arc::new(time_not_moving)),
        ("m/s", Arc::new(|s: &ScopedTrace<'_>| per_tick_mean(s, |k| Some(s.robot[k].v)))),
        ("rad/s", Arc::new(|s: &ScopedTrace<'_>| per_tick_mean(s, |k| Some(s.robot[k].w.abs())))),
        ("m/s^2", Arc::new(avg_robot_acceleration)),
        ("m/s^3", Arc::new(avg_robot_jerk)),
        ("m/s", Arc::new(|s: &ScopedTrace<'_>| per_tick_mean(s, |k| mean(s.agents[k].iter().map(|a| a.vel.norm()))))),
        ("m/s", Arc::new(|s: &ScopedTrace<'_>| per_tick_mean(s, |k| closest(s, k).map(|(_, a)| a.vel.norm())))),
        ("m/s^2", Arc::new(social_force_on_agents)),
        ("m/s^2", Arc::new(social_force_on_robot)),
        ("m/s^2", Arc::new(obstacle_force_on_agents)),
        ("m/s^2", Arc::new(obstacle_force_on_robot)),
        ("m/s^2", Arc::new(social_work)),
    ];
    BUILTIN_NAMES
        .iter()
        .zip(fns)
        .map(|(name, (unit, f))| (MetricSpec { name: name.to_string(), kind: MetricKind::Both, unit: unit.to_string() }, f))
        .collect()
}
