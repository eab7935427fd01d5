//! Strategies and checks for the force-model and planner properties.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use crowdnav::geom::{Bounds, Segment, Vec2};
use crowdnav::planner::{plan_dwb, plan_scl, plan_sfw, PlannerConfig};
use crowdnav::sfm::{
    desired_force, group_force, integrate, obstacle_force, pair_force, social_force, Body, Goal, Neighbor, ObstacleMap,
    SfmParams,
};
use crowdnav::world::{Observation, RobotLimits, RobotState};

#[derive(Debug, Clone)]
pub struct Person {
    pub body: Body,
    pub goal: Goal,
    pub group: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub people: Vec<Person>,
    pub walls: Vec<Segment>,
}

pub fn big_bounds() -> Bounds {
    Bounds::new(Vec2::new(-1e4, -1e4), Vec2::new(1e4, 1e4))
}

/// Net force on every person, assembled the same way the world does.
pub fn net_forces(scene: &Scene, p: &SfmParams) -> Vec<Vec2> {
    let map = ObstacleMap::new(scene.walls.clone(), big_bounds()).unwrap();
    scene
        .people
        .iter()
        .enumerate()
        .map(|(i, me)| {
            let others: Vec<Neighbor> = scene
                .people
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, o)| Neighbor { pos: o.body.pos, vel: o.body.vel, is_robot: false })
                .collect();
            let members: Vec<(Vec2, f64)> = scene
                .people
                .iter()
                .enumerate()
                .filter(|(j, o)| *j != i && me.group.is_some() && o.group == me.group)
                .map(|(_, o)| (o.body.pos, o.body.radius))
                .collect();
            let dir = (me.goal.pos - me.body.pos).normalized();
            desired_force(&me.body, Some(me.goal), p.desired_speed, p)
                + social_force(&me.body, &others, p).total
                + obstacle_force(&me.body, &map, &[], p).force
                + group_force(&me.body, dir, &members, p)
        })
        .collect()
}

pub fn map_scene(scene: &Scene, point: impl Fn(Vec2) -> Vec2, vector: impl Fn(Vec2) -> Vec2, angle: impl Fn(f64) -> f64) -> Scene {
    Scene {
        people: scene
            .people
            .iter()
            .map(|q| Person {
                body: Body { pos: point(q.body.pos), vel: vector(q.body.vel), heading: angle(q.body.heading), radius: q.body.radius },
                goal: Goal { pos: point(q.goal.pos), radius: q.goal.radius },
                group: q.group,
            })
            .collect(),
        walls: scene.walls.iter().map(|s| Segment::new(point(s.a), point(s.b))).collect(),
    }
}

pub fn vec2(range: f64) -> impl Strategy<Value = Vec2> {
    (-range..range, -range..range).prop_map(|(x, y)| Vec2::new(x, y))
}

pub fn person() -> impl Strategy<Value = Person> {
    (vec2(5.0), vec2(1.2), vec2(10.0), prop::option::of(0u32..2)).prop_map(|(pos, vel, goal, group)| Person {
        body: Body { pos, vel, heading: vel.angle(), radius: 0.35 },
        goal: Goal { pos: goal, radius: 0.3 },
        group,
    })
}

pub fn wall() -> impl Strategy<Value = Segment> {
    (vec2(8.0), vec2(3.0)).prop_filter("non-degenerate", |(_, d)| d.norm() > 0.2).prop_map(|(a, d)| Segment::new(a, a + d))
}

pub fn scene() -> impl Strategy<Value = Scene> {
    (prop::collection::vec(person(), 1..6), prop::collection::vec(wall(), 0..4)).prop_map(|(people, walls)| Scene { people, walls })
}

pub fn near(a: Vec2, b: Vec2) -> bool {
    (a - b).norm() <= 1e-9 * (1.0 + a.norm().max(b.norm()))
}


pub fn check_mirror(s: &Scene, phi: f64, c: Vec2) -> Result<(), TestCaseError> {
    let u = Vec2::from_angle(phi);
    let reflect = move |v: Vec2| u * (2.0 * v.dot(u)) - v;
    let mirrored = map_scene(s, |p| c + reflect(p - c), reflect, |h| 2.0 * phi - h);
    let p = SfmParams::default();
    for (f, g) in net_forces(s, &p).into_iter().zip(net_forces(&mirrored, &p)) {
        prop_assert!(near(reflect(f), g), "{f:?} mirrored vs {g:?}");
    }
    Ok(())
}

pub fn check_translation(s: &Scene, d: Vec2) -> Result<(), TestCaseError> {
    let moved = map_scene(s, |p| p + d, |v| v, |h| h);
    let p = SfmParams::default();
    for (f, g) in net_forces(s, &p).into_iter().zip(net_forces(&moved, &p)) {
        prop_assert!(near(f, g), "{f:?} vs {g:?}");
    }
    Ok(())
}

pub fn check_speed_clamp(vel: Vec2, f: Vec2, dt: f64, max_speed: f64) -> Result<(), TestCaseError> {
    let body = Body { pos: Vec2::ZERO, vel, heading: 0.0, radius: 0.35 };
    let out = integrate(&body, f, dt, max_speed).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(out.vel.norm() <= max_speed * (1.0 + 1e-12));
    prop_assert!(near(out.pos, out.vel * dt));
    Ok(())
}

/// Goal 10 m away on a clear path, reached in under ten times the free-walking time.
pub fn check_lone_agent(start: Vec2, dir: f64, speed: f64) -> Result<(), TestCaseError> {
    let p = SfmParams { desired_speed: speed, max_speed: 1.5, ..SfmParams::default() };
    let map = ObstacleMap::empty(big_bounds());
    let goal = Goal { pos: start + Vec2::from_angle(dir) * 10.0, radius: 0.3 };
    let mut body = Body { pos: start, vel: Vec2::ZERO, heading: 0.0, radius: 0.35 };
    let (dt, limit) = (0.05, 10.0 * (10.0 / speed));
    let mut t = 0.0;
    while !goal.reached_by(body.pos) && t < limit {
        let f = desired_force(&body, Some(goal), speed, &p) + obstacle_force(&body, &map, &[], &p).force;
        let next = integrate(&body, f, dt, p.max_speed).map_err(|e| TestCaseError::fail(e.to_string()))?;
        body = Body { pos: next.pos, vel: next.vel, heading: next.heading, radius: body.radius };
        t += dt;
    }
    prop_assert!(goal.reached_by(body.pos), "not there after {t} s");
    Ok(())
}

pub fn check_social_fades(dir: f64, origin: Vec2) -> Result<(), TestCaseError> {
    let p = SfmParams::default();
    let me = Body { pos: origin, vel: Vec2::ZERO, heading: 0.0, radius: 0.35 };
    let u = Vec2::from_angle(dir);
    let mut prev = f64::INFINITY;
    for i in 0..=190 {
        let d = 0.5 + 0.05 * i as f64;
        let f = pair_force(&me, origin + u * d, Vec2::ZERO, &p).map(|f| f.norm()).unwrap_or(f64::NAN);
        prop_assert!(f <= prev * (1.0 + 1e-12), "grew at {d}: {f} > {prev}");
        prev = f;
    }
    Ok(())
}

pub fn zero_agent_observation() -> impl Strategy<Value = (RobotState, Vec<Segment>)> {
    let limits = RobotLimits::default();
    (
        vec2(4.0),
        -std::f64::consts::PI..std::f64::consts::PI,
        0.0..limits.max_v,
        -limits.max_w..limits.max_w,
        vec2(4.5),
        prop::collection::vec(wall(), 0..3),
    )
        .prop_map(move |(pos, heading, v, w, goal, walls)| {
            let robot = RobotState { pos, heading, v, w, radius: 0.35, goal: Goal { pos: goal, radius: 0.3 }, limits };
            (robot, walls)
        })
}

pub fn room_with(walls: Vec<Segment>) -> ObstacleMap {
    let b = Bounds::new(Vec2::new(-5.0, -5.0), Vec2::new(5.0, 5.0));
    let mut segs = b.walls().to_vec();
    let inside = |p: Vec2| Vec2::new(p.x.clamp(-5.0, 5.0), p.y.clamp(-5.0, 5.0));
    segs.extend(walls.into_iter().map(|s| Segment::new(inside(s.a), inside(s.b))).filter(|s| s.length() > 0.0));
    ObstacleMap::new(segs, b).unwrap()
}


/// SCL and SFW must return exactly DWB's command when nobody is around.
pub fn check_zero_agent_planners(robot: RobotState, walls: Vec<Segment>) -> Result<(), TestCaseError> {
    let map = room_with(walls);
    let obs = Observation { robot, map: &map, agents: vec![], dt: 0.05 };
    let cfg = PlannerConfig::default();
    let base = plan_dwb(&obs, &cfg);
    for other in [plan_scl(&obs, &cfg), plan_sfw(&obs, &cfg)] {
        prop_assert_eq!(other.v.to_bits(), base.v.to_bits());
        prop_assert_eq!(other.w.to_bits(), base.w.to_bits());
    }
    Ok(())
}
