//! Long-format TSV dump of a [`SimTrace`]: one row per entity per tick.
//!
//! Floats are written with full round-trip precision so the dump can be
//! re-read losslessly by external tools. Unused cells hold `NA`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::world::SimTrace;

pub const COLUMNS: [&str; 27] = [
    "tick",
    "t",
    "entity",
    "id",
    "behavior",
    "group",
    "x",
    "y",
    "heading",
    "vx",
    "vy",
    "v",
    "w",
    "radius",
    "goal_x",
    "goal_y",
    "goal_radius",
    "social_x",
    "social_y",
    "robot_social_x",
    "robot_social_y",
    "obstacle_x",
    "obstacle_y",
    "on_robot_x",
    "on_robot_y",
    "episode_active",
    "collision",
];

const NA: &str = "NA";

struct Row(Vec<String>);

impl Row {
    fn new(tick: usize, t: f64, entity: &str) -> Self {
        let mut cells = vec![NA.to_string(); COLUMNS.len()];
        cells[0] = tick.to_string();
        cells[1] = t.to_string();
        cells[2] = entity.to_string();
        Row(cells)
    }

    fn set(&mut self, col: &str, value: impl ToString) -> &mut Self {
        let i = COLUMNS.iter().position(|c| *c == col).expect("known column");
        self.0[i] = value.to_string();
        self
    }

    fn set_vec(&mut self, x: &str, y: &str, v: Vec2) -> &mut Self {
        self.set(x, v.x).set(y, v.y)
    }
}

pub fn to_tsv(trace: &SimTrace) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# scenario={} planner={} seed={} dt={} max_time={} completed={}",
        trace.scenario, trace.planner, trace.seed, trace.dt, trace.max_time, trace.completed
    );
    out.push_str(&COLUMNS.join("\t"));
    out.push('\n');
    for (k, tick) in trace.ticks.iter().enumerate() {
        let mut rows = Vec::with_capacity(tick.agents.len() + 1 + tick.collisions.len());
        let r = &tick.robot;
        let mut row = Row::new(k, tick.t, "robot");
        row.set_vec("x", "y", r.pos)
            .set("heading", r.heading)
            .set_vec("vx", "vy", r.vel)
            .set("v", r.v)
            .set("w", r.w)
            .set("radius", r.radius)
            .set_vec("goal_x", "goal_y", r.goal.pos)
            .set("goal_radius", r.goal.radius)
            .set_vec("obstacle_x", "obstacle_y", r.obstacle_force);
        rows.push(row);
        for a in &tick.agents {
            let mut row = Row::new(k, tick.t, "agent");
            row.set("id", a.id)
                .set("behavior", a.behavior)
                .set("group", a.group_id.map_or_else(|| NA.to_string(), |g| g.to_string()))
                .set_vec("x", "y", a.pos)
                .set("heading", a.heading)
                .set_vec("vx", "vy", a.vel)
                .set("radius", a.radius)
                .set_vec("social_x", "social_y", a.forces.social)
                .set_vec("robot_social_x", "robot_social_y", a.forces.robot_social)
                .set_vec("obstacle_x", "obstacle_y", a.forces.obstacle)
                .set_vec("on_robot_x", "on_robot_y", a.force_on_robot)
                .set("episode_active", u8::from(a.episode_active));
            rows.push(row);
        }
        for c in &tick.collisions {
            let mut row = Row::new(k, tick.t, "collision");
            row.set("id", c.agent_id).set("collision", c.kind.name());
            rows.push(row);
        }
        for row in rows {
            out.push_str(&row.0.join("\t"));
            out.push('\n');
        }
    }
    out
}

pub fn write_tsv(trace: &SimTrace, path: &Path) -> Result<()> {
    fs::write(path, to_tsv(trace)).map_err(|e| Error::io(path, e))
}
