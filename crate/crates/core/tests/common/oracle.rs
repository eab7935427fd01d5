//! Hand-built traces and a brute-force metric oracle that works only from
//! the TSV dump of a trace.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_2, PI};

use crowdnav::behavior::BehaviorKind;
use crowdnav::geom::Vec2;
use crowdnav::metrics::{evaluate, MetricReport, BUILTIN_NAMES};
use crowdnav::sfm::{ForceBreakdown, Goal};
use crowdnav::trace::to_tsv;
use crowdnav::world::{AgentSnapshot, CollisionEvent, CollisionKind, RobotSnapshot, SimTick, SimTrace};

pub const TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Trace construction

pub fn robot_at(x: f64, y: f64, heading: f64, v: f64, w: f64, goal: (f64, f64)) -> RobotSnapshot {
    RobotSnapshot {
        pos: Vec2::new(x, y),
        heading,
        v,
        w,
        vel: Vec2::new(v * heading.cos(), v * heading.sin()),
        radius: 0.35,
        goal: Goal { pos: Vec2::new(goal.0, goal.1), radius: 0.3 },
        obstacle_force: Vec2::ZERO,
    }
}

/// Agent with made-up but deterministic forces that vary with the tick.
pub fn person(id: u32, behavior: BehaviorKind, group: Option<u32>, pos: (f64, f64), vel: (f64, f64), k: usize) -> AgentSnapshot {
    let s = (k as f64 * 0.37 + id as f64).sin();
    let c = (k as f64 * 0.21 - id as f64).cos();
    let robot_social = Vec2::new(0.2 * s, -0.1 * c);
    let social = robot_social + Vec2::new(0.05 * c, 0.3 * s * s);
    let obstacle = Vec2::new(0.0, 0.15 * c * c);
    AgentSnapshot {
        id,
        behavior,
        group_id: group,
        pos: Vec2::new(pos.0, pos.1),
        vel: Vec2::new(vel.0, vel.1),
        heading: vel.1.atan2(vel.0),
        radius: 0.35,
        forces: ForceBreakdown::new(Vec2::new(0.4, 0.0), social, obstacle, Vec2::ZERO, robot_social),
        force_on_robot: Vec2::new(-0.3 * c, 0.12 * s),
        episode_active: false,
    }
}

fn trace(name: &str, dt: f64, ticks: Vec<SimTick>) -> SimTrace {
    SimTrace {
        scenario: name.into(),
        planner: "synthetic".into(),
        seed: 0,
        dt,
        max_time: ticks.len() as f64 * dt,
        completed: false,
        degenerate_events: 0,
        ticks,
    }
}

/// Robot parked for 10 s while one person walks by and a pair stands nearby.
pub fn stationary() -> SimTrace {
    let dt = 0.1;
    let ticks = (0..=100)
        .map(|k| {
            let t = k as f64 * dt;
            let mut agents = vec![person(1, BehaviorKind::Regular, None, (-3.0 + 0.5 * t, 1.2), (0.5, 0.0), k)];
            agents.push(person(2, BehaviorKind::Impassive, Some(7), (1.5, -1.0), (0.0, 0.0), k));
            if k >= 10 {
                agents.push(person(3, BehaviorKind::Impassive, Some(7), (2.0, -1.8), (0.0, 0.1), k));
            }
            let mut robot = robot_at(0.0, 0.0, 0.3, 0.0, 0.0, (4.0, 0.0));
            robot.obstacle_force = Vec2::new(0.01 * t, 0.0);
            let collisions =
                if k == 60 { vec![CollisionEvent { agent_id: 1, kind: CollisionKind::PersonOnRobot }] } else { vec![] };
            SimTick { t, agents, robot, collisions }
        })
        .collect();
    trace("stationary", dt, ticks)
}

/// Straight run along y=0 past standing people whose closest surface
/// distances are 0.3, 0.8 and 2.0 m.
pub fn straight_pass() -> SimTrace {
    let dt = 0.05;
    let (rr, ra) = (0.35, 0.35);
    let mut xs = vec![(-6.0, 0.0)];
    while xs.last().unwrap().0 < 6.0 {
        let k = xs.len();
        let v = 0.8 * (k as f64 / 20.0).min(1.0);
        xs.push((xs[k - 1].0 + v * dt, v));
    }
    // People stand exactly abreast of ticks the robot visits.
    let (x1, x2, x3) = (xs[90].0, xs[150].0, xs[200].0);
    let mut ticks = Vec::new();
    for (k, &(x, v)) in xs.iter().enumerate() {
        let agents = vec![
            person(1, BehaviorKind::Regular, None, (x1, 0.3 + rr + ra), (0.0, 0.0), k),
            person(2, BehaviorKind::Curious, Some(3), (x2, -(0.8 + rr + ra)), (0.2, 0.0), k),
            person(3, BehaviorKind::Threatening, Some(3), (x3, 2.0 + rr + ra), (0.0, -0.3), k),
            person(4, BehaviorKind::Threatening, Some(3), (x3 + 0.5, 3.4), (0.1, 0.1), k),
        ];
        let collisions = match k {
            80 => vec![CollisionEvent { agent_id: 1, kind: CollisionKind::RobotOnPerson }],
            150 => vec![
                CollisionEvent { agent_id: 2, kind: CollisionKind::PersonOnRobot },
                CollisionEvent { agent_id: 3, kind: CollisionKind::RobotOnPerson },
            ],
            _ => vec![],
        };
        ticks.push(SimTick { t: k as f64 * dt, agents, robot: robot_at(x, 0.0, 0.0, v, 0.0, (6.0, 0.0)), collisions });
    }
    trace("straight_pass", dt, ticks)
}

/// 2 m square driven counterclockwise with three 90° turns; a triangle group
/// encloses part of the first side.
pub fn square() -> SimTrace {
    let dt = 0.1;
    let v = 0.5;
    let corners = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0), (0.0, 0.0)];
    let headings = [0.0, FRAC_PI_2, PI, -FRAC_PI_2];
    let mut ticks = Vec::new();
    let mut k = 0;
    for side in 0..4 {
        let (ax, ay) = corners[side];
        let (bx, by) = corners[side + 1];
        for step in 0..40 {
            let f = step as f64 / 40.0;
            let w = if step == 0 && side > 0 { FRAC_PI_2 / dt } else { 0.0 };
            let robot = robot_at(ax + f * (bx - ax), ay + f * (by - ay), headings[side], v, w, (0.0, 0.1));
            let agents = vec![
                person(10, BehaviorKind::Scared, Some(1), (1.0, -0.5), (0.0, 0.0), k),
                person(11, BehaviorKind::Scared, Some(1), (3.0, 2.5), (0.0, 0.0), k),
                person(12, BehaviorKind::Scared, Some(1), (-1.0, 2.5), (0.0, 0.0), k),
                person(13, BehaviorKind::Surprised, None, (1.0 + 0.01 * k as f64, 1.0), (0.1, 0.0), k),
            ];
            ticks.push(SimTick { t: k as f64 * dt, agents, robot, collisions: vec![] });
            k += 1;
        }
    }
    ticks.push(SimTick {
        t: k as f64 * dt,
        agents: ticks.last().unwrap().agents.clone(),
        robot: robot_at(0.0, 0.0, -FRAC_PI_2, 0.0, 0.0, (0.0, 0.1)),
        collisions: vec![],
    });
    trace("square", dt, ticks)
}

// ---------------------------------------------------------------------------
// Independent TSV reader

#[derive(Clone, Debug)]
struct R {
    x: f64,
    y: f64,
    heading: f64,
    v: f64,
    w: f64,
    radius: f64,
    gx: f64,
    gy: f64,
    gr: f64,
    ox: f64,
    oy: f64,
}

#[derive(Clone, Debug)]
struct A {
    id: u32,
    behavior: String,
    group: Option<u32>,
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    radius: f64,
    rsx: f64,
    rsy: f64,
    obx: f64,
    oby: f64,
    fx: f64,
    fy: f64,
}

#[derive(Clone, Debug)]
struct Tick {
    t: f64,
    robot: Option<R>,
    agents: Vec<A>,
    collisions: Vec<(u32, String)>,
}

struct Parsed {
    dt: f64,
    ticks: Vec<Tick>,
}

fn parse(text: &str) -> Parsed {
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with('#'));
    let dt: f64 = header.split_whitespace().find_map(|kv| kv.strip_prefix("dt=")).unwrap().parse().unwrap();
    let cols: Vec<&str> = lines.next().unwrap().split('\t').collect();
    let mut ticks: Vec<Tick> = Vec::new();
    for line in lines {
        let cells: Vec<&str> = line.split('\t').collect();
        assert_eq!(cells.len(), cols.len());
        let get = |name: &str| cells[cols.iter().position(|c| *c == name).unwrap()];
        let f = |name: &str| get(name).parse::<f64>().unwrap();
        let k: usize = get("tick").parse().unwrap();
        if ticks.len() == k {
            ticks.push(Tick { t: f("t"), robot: None, agents: vec![], collisions: vec![] });
        }
        let tick = &mut ticks[k];
        match get("entity") {
            "robot" => {
                tick.robot = Some(R {
                    x: f("x"),
                    y: f("y"),
                    heading: f("heading"),
                    v: f("v"),
                    w: f("w"),
                    radius: f("radius"),
                    gx: f("goal_x"),
                    gy: f("goal_y"),
                    gr: f("goal_radius"),
                    ox: f("obstacle_x"),
                    oy: f("obstacle_y"),
                })
            }
            "agent" => tick.agents.push(A {
                id: get("id").parse().unwrap(),
                behavior: get("behavior").to_string(),
                group: match get("group") {
                    "NA" => None,
                    g => Some(g.parse().unwrap()),
                },
                x: f("x"),
                y: f("y"),
                vx: f("vx"),
                vy: f("vy"),
                radius: f("radius"),
                rsx: f("robot_social_x"),
                rsy: f("robot_social_y"),
                obx: f("obstacle_x"),
                oby: f("obstacle_y"),
                fx: f("on_robot_x"),
                fy: f("on_robot_y"),
            }),
            "collision" => tick.collisions.push((get("id").parse().unwrap(), get("collision").to_string())),
            other => panic!("unexpected entity {other}"),
        }
    }
    Parsed { dt, ticks }
}

// ---------------------------------------------------------------------------
// Oracle

type Series = Vec<Option<f64>>;

struct Oracle {
    values: BTreeMap<&'static str, (Option<f64>, Series)>,
}

fn hyp(x: f64, y: f64) -> f64 {
    (x * x + y * y).sqrt()
}

fn seg_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    let u = if l2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / l2).clamp(0.0, 1.0) };
    hyp(p.0 - a.0 - u * dx, p.1 - a.1 - u * dy)
}

fn cross(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

/// Distance to the convex region spanned by `pts`; hull edges are found by
/// checking every ordered pair. Assumes no three collinear points when n ≥ 3.
fn region_dist(p: (f64, f64), pts: &[(f64, f64)]) -> f64 {
    match pts.len() {
        1 => hyp(p.0 - pts[0].0, p.1 - pts[0].1),
        2 => seg_dist(p, pts[0], pts[1]),
        n => {
            let mut edges = vec![];
            for i in 0..n {
                for j in 0..n {
                    if i != j && (0..n).filter(|&m| m != i && m != j).all(|m| cross(pts[i], pts[j], pts[m]) > 0.0) {
                        edges.push((pts[i], pts[j]));
                    }
                }
            }
            if edges.iter().all(|&(a, b)| cross(a, b, p) >= 0.0) {
                0.0
            } else {
                edges.iter().map(|&(a, b)| seg_dist(p, a, b)).fold(f64::INFINITY, f64::min)
            }
        }
    }
}

fn avg(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

fn running_sum(xs: &[f64]) -> Series {
    let mut s = 0.0;
    xs.iter()
        .map(|x| {
            s += x;
            Some(s)
        })
        .collect()
}

fn zone_of(d: f64) -> usize {
    if d < 0.45 {
        0
    } else if d < 1.2 {
        1
    } else {
        2
    }
}

fn zone_metric(dists: &[Option<f64>], zone: usize) -> (Option<f64>, Series) {
    let series: Series = dists.iter().map(|d| d.map(|d| if zone_of(d) == zone { 1.0 } else { 0.0 })).collect();
    let hits: Vec<f64> = series.iter().flatten().copied().collect();
    let pct = if hits.is_empty() { None } else { Some(100.0 * hits.iter().sum::<f64>() / hits.len() as f64) };
    (pct, series)
}

fn oracle(p: &Parsed, scope: Option<&str>) -> Oracle {
    let n = p.ticks.len();
    let dt = p.dt;
    let robots: Vec<R> = p.ticks.iter().map(|t| t.robot.clone().unwrap()).collect();
    let agents: Vec<Vec<A>> = p
        .ticks
        .iter()
        .map(|t| t.agents.iter().filter(|a| scope.is_none_or(|b| a.behavior == b)).cloned().collect())
        .collect();
    let mut out: BTreeMap<&'static str, (Option<f64>, Series)> = BTreeMap::new();
    let last = |s: &Series| s.last().copied().flatten();

    let times: Series = p.ticks.iter().map(|t| Some(t.t)).collect();
    out.insert("time_to_reach_goal", (last(&times), times));

    let steps: Vec<f64> =
        (0..n).map(|k| if k == 0 { 0.0 } else { hyp(robots[k].x - robots[k - 1].x, robots[k].y - robots[k - 1].y) }).collect();
    let s = running_sum(&steps);
    out.insert("path_length", (last(&s), s));

    let turns: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                let d = robots[k].heading - robots[k - 1].heading;
                d.sin().atan2(d.cos()).abs()
            }
        })
        .collect();
    let s = running_sum(&turns);
    out.insert("cumulative_heading_changes", (last(&s), s));

    // Closest person per tick: (surface distance, speed); earliest listed wins ties.
    let closest: Vec<Option<(f64, f64)>> = (0..n)
        .map(|k| {
            let r = &robots[k];
            let mut best: Option<(f64, f64)> = None;
            for a in &agents[k] {
                let d = hyp(r.x - a.x, r.y - a.y) - a.radius - r.radius;
                if best.is_none() || d < best.unwrap().0 {
                    best = Some((d, hyp(a.vx, a.vy)));
                }
            }
            best
        })
        .collect();
    let dists: Series = closest.iter().map(|c| c.map(|c| c.0)).collect();
    let present: Vec<f64> = dists.iter().flatten().copied().collect();
    out.insert("avg_dist_to_closest_person", (avg(&present), dists.clone()));
    let mut m: Option<f64> = None;
    let mins: Series = dists
        .iter()
        .map(|d| {
            if let Some(d) = d {
                m = Some(m.map_or(*d, |x: f64| x.min(*d)));
            }
            m
        })
        .collect();
    out.insert("min_dist_to_people", (m, mins));
    out.insert("intimate_space_intrusions", zone_metric(&dists, 0));
    out.insert("personal_space_intrusions", zone_metric(&dists, 1));
    out.insert("social+_space_intrusions", zone_metric(&dists, 2));

    let gdists: Series = (0..n)
        .map(|k| {
            let r = &robots[k];
            let ids: BTreeSet<u32> = agents[k].iter().filter_map(|a| a.group).collect();
            ids.iter()
                .map(|g| {
                    let members: Vec<&A> = agents[k].iter().filter(|a| a.group == Some(*g)).collect();
                    let pts: Vec<(f64, f64)> = members.iter().map(|a| (a.x, a.y)).collect();
                    let rmax = members.iter().map(|a| a.radius).fold(0.0, f64::max);
                    region_dist((r.x, r.y), &pts) - rmax - r.radius
                })
                .reduce(f64::min)
        })
        .collect();
    out.insert("group_intimate_space_intrusions", zone_metric(&gdists, 0));
    out.insert("group_personal_space_intrusions", zone_metric(&gdists, 1));
    out.insert("group_social+_space_intrusions", zone_metric(&gdists, 2));

    let mut done = false;
    let comp: Series = robots
        .iter()
        .map(|r| {
            done = done || hyp(r.x - r.gx, r.y - r.gy) <= r.gr;
            Some(if done { 1.0 } else { 0.0 })
        })
        .collect();
    out.insert("completed", (last(&comp), comp));
    let to_goal: Vec<f64> = robots.iter().map(|r| hyp(r.x - r.gx, r.y - r.gy)).collect();
    let mut best = f64::INFINITY;
    let mins: Series = to_goal
        .iter()
        .map(|d| {
            best = best.min(*d);
            Some(best)
        })
        .collect();
    out.insert("min_dist_to_target", (last(&mins), mins));
    let fin: Series = to_goal.iter().map(|d| Some(*d)).collect();
    out.insert("final_dist_to_target", (last(&fin), fin));

    for (name, kind) in [("robot_on_person_collisions", "robot_on_person"), ("person_on_robot_collisions", "person_on_robot")] {
        let counts: Vec<f64> = (0..n)
            .map(|k| {
                p.ticks[k].collisions.iter().filter(|(id, c)| c == kind && agents[k].iter().any(|a| a.id == *id)).count() as f64
            })
            .collect();
        let s = running_sum(&counts);
        out.insert(name, (last(&s), s));
    }

    let idle: Vec<f64> = robots.iter().map(|r| if r.v.abs() < 0.01 && r.w.abs() < 0.05 { dt } else { 0.0 }).collect();
    let s = running_sum(&idle);
    out.insert("time_not_moving", (last(&s), s));

    let vs: Vec<f64> = robots.iter().map(|r| r.v).collect();
    out.insert("avg_robot_linear_speed", (avg(&vs), vs.iter().map(|v| Some(*v)).collect()));
    let ws: Vec<f64> = robots.iter().map(|r| r.w.abs()).collect();
    out.insert("avg_robot_angular_speed", (avg(&ws), ws.iter().map(|v| Some(*v)).collect()));

    let acc: Series = (0..n).map(|k| (k >= 1).then(|| (vs[k] - vs[k - 1]) / dt)).collect();
    let acc_abs: Vec<f64> = acc.iter().flatten().map(|a| a.abs()).collect();
    out.insert("avg_robot_acceleration", (if n >= 2 { avg(&acc_abs) } else { None }, acc.clone()));
    let jerk: Series = (0..n).map(|k| (k >= 2).then(|| (acc[k].unwrap() - acc[k - 1].unwrap()) / dt)).collect();
    let jerk_abs: Vec<f64> = jerk.iter().flatten().map(|j| j.abs()).collect();
    out.insert("avg_robot_jerk", (if n >= 4 { avg(&jerk_abs) } else { None }, jerk));

    let ped: Series =
        agents.iter().map(|ags| avg(&ags.iter().map(|a| hyp(a.vx, a.vy)).collect::<Vec<_>>())).collect();
    out.insert("avg_pedestrians_velocity", (avg(&ped.iter().flatten().copied().collect::<Vec<_>>()), ped));
    let cped: Series = closest.iter().map(|c| c.map(|c| c.1)).collect();
    out.insert("avg_closest_pedestrian_velocity", (avg(&cped.iter().flatten().copied().collect::<Vec<_>>()), cped));

    let on_agents: Vec<f64> = agents.iter().map(|ags| ags.iter().map(|a| hyp(a.rsx, a.rsy)).sum()).collect();
    let on_robot: Vec<f64> = agents.iter().map(|ags| ags.iter().map(|a| hyp(a.fx, a.fy)).sum()).collect();
    let obs_agents: Vec<f64> = agents.iter().map(|ags| ags.iter().map(|a| hyp(a.obx, a.oby)).sum()).collect();
    let obs_robot: Vec<f64> = robots.iter().map(|r| hyp(r.ox, r.oy)).collect();
    let work: Vec<f64> = (0..n).map(|k| on_robot[k] + obs_robot[k] + on_agents[k]).collect();
    let work_final = [&on_robot, &obs_robot, &on_agents].iter().map(|x| avg(x).unwrap()).sum::<f64>();
    let wrap = |xs: &Vec<f64>| xs.iter().map(|x| Some(*x)).collect::<Series>();
    out.insert("social_force_on_agents", (avg(&on_agents), wrap(&on_agents)));
    out.insert("social_force_on_robot", (avg(&on_robot), wrap(&on_robot)));
    out.insert("obstacle_force_on_agents", (avg(&obs_agents), wrap(&obs_agents)));
    out.insert("obstacle_force_on_robot", (avg(&obs_robot), wrap(&obs_robot)));
    out.insert("social_work", (Some(work_final), wrap(&work)));
    Oracle { values: out }
}

// ---------------------------------------------------------------------------
// Comparison

pub fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= TOL * (1.0 + y.abs()),
        _ => false,
    }
}

fn compare_scope(label: &str, report: &MetricReport, scope: Option<BehaviorKind>, want: &Oracle, ticks: usize) -> Result<(), String> {
    let got = match scope {
        None => &report.overall,
        Some(k) => report.groups.get(&k).ok_or(format!("{label}: no {k} report"))?,
    };
    if got.times.len() != ticks || want.values.len() != BUILTIN_NAMES.len() {
        return Err(format!("{label}: wrong shape"));
    }
    for name in BUILTIN_NAMES {
        let (fin, series) = &want.values[name];
        let v = got.get(&report.specs, name).ok_or(format!("{label}: {name} missing"))?;
        if !close(v.final_value, *fin) {
            return Err(format!("{label} {scope:?} {name}: final {:?} vs oracle {:?}", v.final_value, fin));
        }
        let s = v.series.as_ref().ok_or(format!("{label} {name}: no series"))?;
        if s.len() != series.len() {
            return Err(format!("{label} {name}: series length {} vs {}", s.len(), series.len()));
        }
        for (k, (a, b)) in s.iter().zip(series).enumerate() {
            if !close(*a, *b) {
                return Err(format!("{label} {scope:?} {name} tick {k}: {a:?} vs oracle {b:?}"));
            }
        }
    }
    Ok(())
}

/// Compares every metric, overall and per behavior group, against the oracle
/// recomputed from the TSV dump of `tr`.
pub fn check_trace(tr: &SimTrace) -> Result<(), String> {
    let parsed = parse(&to_tsv(tr));
    if parsed.ticks.len() != tr.ticks.len() {
        return Err(format!("{}: dump has {} ticks", tr.scenario, parsed.ticks.len()));
    }
    let report = evaluate(tr, &BUILTIN_NAMES).map_err(|e| e.to_string())?;
    compare_scope(&tr.scenario, &report, None, &oracle(&parsed, None), tr.ticks.len())?;
    let kinds: BTreeSet<String> = parsed.ticks.iter().flat_map(|t| t.agents.iter().map(|a| a.behavior.clone())).collect();
    if report.groups.len() != kinds.len() {
        return Err(format!("{}: {} group reports for {} behaviors", tr.scenario, report.groups.len(), kinds.len()));
    }
    for kind in &kinds {
        let bk: BehaviorKind = kind.parse().map_err(|_| format!("bad behavior {kind}"))?;
        compare_scope(&tr.scenario, &report, Some(bk), &oracle(&parsed, Some(kind)), tr.ticks.len())?;
    }
    Ok(())
}

/// The three hand-built traces.
pub fn synthetic_traces() -> [SimTrace; 3] {
    [stationary(), straight_pass(), square()]
}

pub fn plain_trace(speeds: &[f64], dt: f64, agents: impl Fn(usize) -> Vec<AgentSnapshot>) -> SimTrace {
    let ticks = speeds
        .iter()
        .enumerate()
        .map(|(k, &v)| SimTick {
            t: k as f64 * dt,
            agents: agents(k),
            robot: robot_at(0.0, 0.0, 0.0, v, 0.0, (5.0, 0.0)),
            collisions: vec![],
        })
        .collect();
    trace("plain", dt, ticks)
}

pub fn shifted(tr: &SimTrace, d: Vec2) -> SimTrace {
    let mut out = tr.clone();
    for tick in &mut out.ticks {
        tick.robot.pos += d;
        tick.robot.goal.pos += d;
        for a in &mut tick.agents {
            a.pos += d;
        }
    }
    out
}
