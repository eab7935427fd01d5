//! Randomized small scenarios and the metric identities every run must keep.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crowdnav::behavior::BehaviorKind;
use crowdnav::geom::Vec2;
use crowdnav::metrics::{MetricRegistry, MetricReport, ScopeReport};
use crowdnav::planner::PlannerRegistry;
use crowdnav::scenario::{builtin_scenario, run_single, AgentConfig, ScenarioConfig};
use crowdnav::world::SimTrace;

const ZONES: [&str; 3] = ["intimate_space_intrusions", "personal_space_intrusions", "social+_space_intrusions"];

/// A small room with 1-4 people of random behaviors at random places.
pub fn random_scenario(seed: u64) -> ScenarioConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = builtin_scenario("crossing").unwrap();
    cfg.name = format!("smoke_{seed}");
    cfg.sim.max_time = 8.0;
    cfg.sim.spawn_jitter = 0.0;
    let robot = Vec2::new(cfg.robot.pose[0], cfg.robot.pose[1]);
    let n = rng.random_range(1..=4);
    let mut placed: Vec<Vec2> = vec![robot];
    cfg.agents.clear();
    while cfg.agents.len() < n {
        let p = Vec2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        if placed.iter().any(|q| q.distance(p) < 1.0) {
            continue;
        }
        placed.push(p);
        let id = cfg.agents.len() as u32 + 1;
        let goal = Vec2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let behavior = BehaviorKind::ALL[rng.random_range(0..BehaviorKind::ALL.len())];
        cfg.agents.push(AgentConfig {
            id,
            behavior,
            pose: [p.x, p.y, rng.random_range(-3.0..3.0)],
            radius: 0.35,
            desired_speed: rng.random_range(0.5..1.2),
            max_speed: 1.5,
            goals: vec![goal, p],
            goal_radius: 0.3,
            cyclic: true,
            group_id: (id <= 2 && n > 2).then_some(1),
            sfm: None,
            behavior_params: None,
        });
    }
    cfg
}

pub fn check_scope(label: &str, report: &MetricReport, scope: &ScopeReport) {
    let value = |name: &str| scope.get(&report.specs, name).unwrap();
    for prefix in ["", "group_"] {
        let names: Vec<String> = ZONES.iter().map(|z| format!("{prefix}{z}")).collect();
        let series: Vec<&Vec<Option<f64>>> = names.iter().map(|n| value(n).series.as_ref().unwrap()).collect();
        let mut measured = 0usize;
        for k in 0..scope.times.len() {
            let hits: Vec<Option<f64>> = series.iter().map(|s| s[k]).collect();
            if hits[0].is_some() {
                measured += 1;
                assert_eq!(hits.iter().map(|h| h.unwrap()).sum::<f64>(), 1.0, "{label} {prefix}zones at tick {k}");
            } else {
                assert!(hits.iter().all(Option::is_none));
            }
        }
        let finals: Vec<Option<f64>> = names.iter().map(|n| value(n).final_value).collect();
        if measured > 0 {
            let total: f64 = finals.iter().map(|f| f.unwrap()).sum();
            assert!((total - 100.0).abs() <= 1e-12, "{label} {prefix}zones sum to {total}");
        } else {
            assert!(finals.iter().all(Option::is_none));
        }
    }
    let parts = ["social_force_on_robot", "obstacle_force_on_robot", "social_force_on_agents"];
    let work = value("social_work");
    let sum: f64 = parts.iter().map(|p| value(p).final_value.unwrap()).sum();
    assert!((work.final_value.unwrap() - sum).abs() <= 1e-12, "{label} social_work");
    for k in 0..scope.times.len() {
        let sum: f64 = parts.iter().map(|p| value(p).series.as_ref().unwrap()[k].unwrap()).sum();
        assert!((work.series.as_ref().unwrap()[k].unwrap() - sum).abs() <= 1e-12, "{label} social_work at tick {k}");
    }
}

pub fn check_trace_invariants(cfg: &ScenarioConfig, trace: &SimTrace) {
    for tick in &trace.ticks {
        for a in &tick.agents {
            let max = cfg.agents.iter().find(|c| c.id == a.id).unwrap().max_speed;
            assert!(a.vel.norm() <= max * (1.0 + 1e-12), "agent {} at {}", a.id, tick.t);
            let f = &a.forces;
            assert!((f.total - (f.desired + f.social + f.obstacle + f.group)).norm() <= 1e-12);
        }
    }
}

/// Runs smoke scenario `seed` and checks every identity; panics on failure.
pub fn smoke_run(seed: u64, planners: &PlannerRegistry, metrics: &MetricRegistry) {
    let cfg = random_scenario(seed);
    cfg.validate(planners, metrics).unwrap();
    let planner = planners.names()[seed as usize % 3].clone();
    let (trace, abort) = run_single(&cfg, &planner, seed, planners).unwrap();
    assert!(abort.is_none(), "{}: {abort:?}", cfg.name);
    check_trace_invariants(&cfg, &trace);
    let report = metrics.evaluate(&trace, &metrics.names()).unwrap();
    check_scope(&cfg.name, &report, &report.overall);
    for (kind, scope) in &report.groups {
        check_scope(&format!("{} {kind}", cfg.name), &report, scope);
    }
}
