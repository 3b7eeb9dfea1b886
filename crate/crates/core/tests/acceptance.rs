//! Acceptance gate: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always print; exits non-zero on any FAIL.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use armplan::bench::{compute_cv, effective_runtime_ratios, run_benchmark, summarize, RunOptions, Scenario, DEFAULTS};
use armplan::collision::{Aabb, Scene};
use armplan::fixtures::{planar_arm_json, random_instance, random_pair_instance};
use armplan::heuristics::{build_workspace_bfs, Connectivity, Heuristic, JointEuclidean, WorkspaceHeuristic};
use armplan::kinematics::Pose;
use armplan::lattice::LatticeGraph;
use armplan::multirobot::{detect_conflicts, xecbs_plan, EcbsConfig};
use armplan::search::{
    ara_star, dijkstra_oracle, mha_star, weighted_astar, wpase, AraSchedule, PlanResult, DEFAULT_ORACLE_CAP,
};
use armplan::Error;
use common::{coupled_optimum, dense_multi_valid, revalidate};
use nalgebra::Vector3;

const LIMIT: Duration = Duration::from_secs(30);

/// Every returned path from every suite, re-checked at resolution / 4.
#[derive(Default)]
struct Revalidation {
    checked: usize,
    failures: Vec<String>,
}

impl Revalidation {
    fn check(&mut self, graph: &LatticeGraph, path: &[Vec<f64>], what: &str) {
        self.checked += 1;
        if !revalidate(graph, path) {
            self.failures.push(what.to_string());
        }
    }
}

fn joint_h(g: &LatticeGraph) -> JointEuclidean {
    JointEuclidean::for_goal(g.goal(), g.spec()).unwrap()
}

fn workspace_h(g: &LatticeGraph) -> WorkspaceHeuristic {
    let target = g.ee_position(g.goal().joint_target().unwrap());
    WorkspaceHeuristic::for_scene(g.scene(), g.robot_name(), target, 0.05).unwrap()
}

/// Seeds whose random instance has a path, in order, until `n` are found.
fn solvable(n: usize) -> Vec<(u64, LatticeGraph, f64)> {
    let mut out = Vec::new();
    let mut seed = 0;
    while out.len() < n {
        let g = random_instance(seed).graph().unwrap();
        if let Ok(c) = dijkstra_oracle(&g, DEFAULT_ORACLE_CAP) {
            out.push((seed, g, c));
        }
        seed += 1;
    }
    out
}

fn same(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9
}

fn oracle_optimality(rv: &mut Revalidation) -> Result<String, String> {
    let clock = Instant::now();
    let instances = solvable(50);
    let mut runs = 0;
    for (seed, g, c) in &instances {
        let h = joint_h(g);
        let ws = workspace_h(g);
        let results: Vec<(&str, PlanResult)> = vec![
            ("wA*", weighted_astar(g, &h, 1.0, LIMIT).map_err(|e| format!("seed {seed} wA*: {e}"))?),
            ("MHA*", mha_star(g, &h, &[&ws], 1.0, 1.0, LIMIT).map_err(|e| format!("seed {seed} MHA*: {e}"))?),
            ("wPA*SE/1", wpase(g, &h, 1.0, 1, LIMIT).map_err(|e| format!("seed {seed} wPA*SE/1: {e}"))?),
            ("wPA*SE/4", wpase(g, &h, 1.0, 4, LIMIT).map_err(|e| format!("seed {seed} wPA*SE/4: {e}"))?),
            (
                "ARA*",
                ara_star(g, &h, AraSchedule::default(), LIMIT)
                    .map_err(|e| format!("seed {seed} ARA*: {e}"))?
                    .best()
                    .clone(),
            ),
        ];
        for (name, r) in results {
            runs += 1;
            if !same(r.cost, *c) {
                return Err(format!("seed {seed} {name}: cost {} vs oracle {c}", r.cost));
            }
            rv.check(g, &r.path, &format!("optimality seed {seed} {name}"));
        }
    }
    let elapsed = clock.elapsed();
    if elapsed > Duration::from_secs(120) {
        return Err(format!("took {elapsed:.1?}, limit 2 min"));
    }
    Ok(format!("{} instances, {runs} runs equal to the oracle, {elapsed:.1?}", instances.len()))
}

fn bound_soundness(rv: &mut Revalidation) -> Result<String, String> {
    let mut checks = 0;
    for (seed, g, c) in solvable(50) {
        let h = joint_h(&g);
        let ws = workspace_h(&g);
        for w in [1.5, 2.0, 5.0] {
            let err = |name: &str, e: Error| format!("seed {seed} {name} w {w}: {e}");
            let mut results = vec![
                (w, "wA*", weighted_astar(&g, &h, w, LIMIT).map_err(|e| err("wA*", e))?),
                (w, "wPA*SE/1", wpase(&g, &h, w, 1, LIMIT).map_err(|e| err("wPA*SE/1", e))?),
                (w, "wPA*SE/4", wpase(&g, &h, w, 4, LIMIT).map_err(|e| err("wPA*SE/4", e))?),
                (w * w, "MHA*", mha_star(&g, &h, &[&ws], w, w, LIMIT).map_err(|e| err("MHA*", e))?),
            ];
            let schedule = AraSchedule {
                w_start: w,
                w_decrement: 0.25,
                w_final: 1.0,
            };
            let ara = ara_star(&g, &h, schedule, LIMIT).map_err(|e| err("ARA*", e))?;
            for s in ara.solutions {
                results.push((s.stats.bound, "ARA*", s));
            }
            for (bound, name, r) in results {
                checks += 1;
                if r.cost > bound * c + 1e-9 {
                    return Err(format!("seed {seed} {name} w {w}: {} > {bound} x {c}", r.cost));
                }
                rv.check(&g, &r.path, &format!("bound seed {seed} {name} w {w}"));
            }
        }
    }
    Ok(format!("{checks} solutions within their bounds, 0 violations"))
}

fn scenario_doc(problems: usize, reps: usize) -> serde_json::Value {
    let arm: serde_json::Value = serde_json::from_str(&planar_arm_json("arm", 2, 1.0, -1.0, 1.0)).unwrap();
    let problems: Vec<serde_json::Value> = (0..problems)
        .map(|i| {
            let x = -0.9 + 0.18 * i as f64;
            serde_json::json!({
                "id": format!("p{i}"),
                "start": {"arm": [x, -0.5]},
                "goal": {"arm": [-x * 0.8, 0.6]},
            })
        })
        .collect();
    serde_json::json!({
        "robots": [{"name": "arm", "spec": arm}],
        "scene": {"objects": [{"name": "ball", "type": "sphere", "radius": 0.15, "pose": {"p": [0.0, 1.6, 0.0]}}]},
        "problems": problems,
        "repetitions": reps,
        "perturbation_deg": 0.0,
        "planners": [
            {"planner_id": "wAstar", "resolution": "0.1"},
            {"planner_id": "ARAstar", "resolution": "0.1"},
            {"planner_id": "MHAstar", "resolution": "0.1"},
            {"planner_id": "wPASE", "resolution": "0.1", "num_workers": "1"},
        ],
    })
}

fn determinism(rv: &mut Revalidation) -> Result<String, String> {
    let mut compared = 0;
    for (seed, g, _) in solvable(10) {
        let h = joint_h(&g);
        let ws = workspace_h(&g);
        let run = |planner: &str| -> PlanResult {
            match planner {
                "wA*" => weighted_astar(&g, &h, 2.0, LIMIT),
                "ARA*" => ara_star(&g, &h, AraSchedule::default(), LIMIT).map(|o| o.best().clone()),
                "MHA*" => mha_star(&g, &h, &[&ws], 1.5, 1.5, LIMIT),
                _ => wpase(&g, &h, 2.0, 1, LIMIT),
            }
            .unwrap()
        };
        for planner in ["wA*", "ARA*", "MHA*", "wPA*SE/1"] {
            let first = run(planner);
            rv.check(&g, &first.path, &format!("determinism seed {seed} {planner}"));
            for rep in 1..10 {
                let again = run(planner);
                if again.path != first.path || again.states != first.states || again.cost != first.cost {
                    return Err(format!("seed {seed} {planner}: repetition {rep} differs"));
                }
                compared += 1;
            }
        }
    }

    let scenario = Scenario::from_json(&scenario_doc(10, 10).to_string(), Path::new(".")).map_err(|e| e.to_string())?;
    let records = run_benchmark(&scenario, RunOptions::default()).map_err(|e| e.to_string())?;
    let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for r in &records {
        if !r.success {
            return Err(format!("{} {} rep {} failed", r.planner, r.problem_id, r.rep));
        }
        groups
            .entry((r.planner.clone(), r.problem_id.clone()))
            .or_default()
            .push(r.ee_cost_m.unwrap());
    }
    for ((planner, problem), costs) in &groups {
        let cv = compute_cv(costs).map_err(|e| e.to_string())?;
        if format!("{cv:.2}") != "0.00" {
            return Err(format!("{planner} {problem}: CV {cv}%"));
        }
    }
    for s in summarize(&records) {
        if s.mean_cv != Some(0.0) {
            return Err(format!("{}: summary CV {:?}", s.planner, s.mean_cv));
        }
    }
    Ok(format!(
        "{compared} repeated runs identical; harness CV 0.00% on {} groups",
        groups.len()
    ))
}

fn ara_anytime(rv: &mut Revalidation) -> Result<String, String> {
    let mut solutions = 0;
    for (seed, g, c) in solvable(20) {
        let out = ara_star(&g, &joint_h(&g), AraSchedule::default(), LIMIT).map_err(|e| e.to_string())?;
        let series = out.series();
        for w in series.windows(2) {
            if w[1].0 >= w[0].0 || w[1].1 > w[0].1 {
                return Err(format!("seed {seed}: series {series:?}"));
            }
        }
        if out.best().stats.bound != 1.0 || !same(out.best().cost, c) {
            return Err(format!("seed {seed}: ended at {:?}", series.last()));
        }
        for s in &out.solutions {
            rv.check(&g, &s.path, &format!("ara seed {seed}"));
        }
        solutions += series.len();
    }

    let (_, g, c) = solvable(1).remove(0);
    let clock = Instant::now();
    let out = ara_star(&g, &joint_h(&g), AraSchedule::default(), Duration::from_secs(5)).map_err(|e| e.to_string())?;
    let elapsed = clock.elapsed();
    if out.timed_out || out.best().stats.bound != 1.0 || !same(out.best().cost, c) || elapsed >= Duration::from_secs(5) {
        return Err(format!("5 s run: timed_out {} after {elapsed:?}", out.timed_out));
    }
    Ok(format!(
        "20 fixtures, {solutions} monotone solutions; 5 s run stopped at bound 1 after {elapsed:.2?}"
    ))
}

fn multi_robot(rv: &mut Revalidation) -> Result<String, String> {
    let clock = Instant::now();
    let mut worst: f64 = 0.0;
    let mut conflicted = 0;
    let config = EcbsConfig {
        w_low: 1.5,
        w_high: 1.5,
        time_limit: Duration::from_secs(20),
        reuse_experience: true,
    };
    for seed in 0..20 {
        let inst = random_pair_instance(seed);
        let graphs: Vec<LatticeGraph> = inst
            .tasks
            .iter()
            .map(|t| LatticeGraph::new(inst.scene.clone(), &t.robot, t.spec.clone(), &t.start, t.goal.clone()).unwrap())
            .collect();
        let optimum =
            coupled_optimum(&inst.scene, &graphs[0], &graphs[1]).ok_or(format!("seed {seed}: coupled oracle failed"))?;
        let plan = xecbs_plan(inst.scene.clone(), &inst.tasks, &config).map_err(|e| format!("seed {seed}: {e}"))?;
        if !dense_multi_valid(&inst.scene, &plan.paths) || !detect_conflicts(&inst.scene, &plan.paths).unwrap().is_empty() {
            return Err(format!("seed {seed}: colliding solution returned"));
        }
        if plan.soc > 2.25 * optimum + 1e-9 {
            return Err(format!("seed {seed}: SOC {} > 2.25 x {optimum}", plan.soc));
        }
        worst = worst.max(plan.soc / optimum);
        if plan.stats.nodes_expanded > 1 {
            conflicted += 1;
        }
        for (g, t) in graphs.iter().zip(&inst.tasks) {
            rv.check(g, &plan.paths[&t.robot].configs, &format!("multi seed {seed} {}", t.robot));
        }
    }
    let elapsed = clock.elapsed();
    if elapsed > Duration::from_secs(300) {
        return Err(format!("took {elapsed:.1?}, limit 5 min"));
    }
    Ok(format!(
        "20 pairs ({conflicted} needed conflict resolution), worst SOC/optimum {worst:.3}, {elapsed:.1?}"
    ))
}

fn protocol_fidelity() -> Result<String, String> {
    let d = DEFAULTS;
    let snapshot = (
        d.perturbation_deg,
        d.repetitions_single,
        d.repetitions_multi,
        d.time_limit_single,
        d.time_limit_multi,
        d.max_workers,
    );
    let expected = (2.0, 10, 5, Duration::from_secs(5), Duration::from_secs(20), 6);
    if snapshot != expected {
        return Err(format!("defaults {snapshot:?}"));
    }
    let cv = compute_cv(&[1.0, 2.0, 3.0]).map_err(|e| e.to_string())?;
    if (cv - 40.8248).abs() > 1e-3 {
        return Err(format!("compute_cv([1,2,3]) = {cv}"));
    }
    let ratios = effective_runtime_ratios(&[Some(0.5), Some(1.0)]).map_err(|e| e.to_string())?;
    if ratios != vec![Some(1.0), Some(2.0)] {
        return Err(format!("ratios {ratios:?}"));
    }
    Ok(format!("defaults {snapshot:?}, CV {cv:.4}%, ratios [1.0, 2.0]"))
}

fn heuristic_properties() -> Result<String, String> {
    let mut edges_checked = 0usize;
    let mut seed = 0;
    while edges_checked < 10_000 {
        let g = random_instance(seed).graph().unwrap();
        let h = joint_h(&g);
        let (order, edges) = common::enumerate(&g);
        for id in order {
            let hs = h.estimate(&g.config(id));
            for &(n, c) in &edges[&id] {
                let hn = h.estimate(&g.config(n));
                if hs > c + hn + 1e-12 {
                    return Err(format!("seed {seed}: h {hs} > {c} + {hn}"));
                }
                edges_checked += 1;
            }
        }
        seed += 1;
    }

    let mut voxels = 0;
    for n in [8usize, 33, 64] {
        let mut scene = Scene::new();
        scene.add_sphere("a", 0.2, Pose::from_position([0.5, 0.5, 0.5])).unwrap();
        scene.add_box("wall", [0.05, 0.8, 1.0], Pose::from_position([0.25, 0.4, 0.5])).unwrap();
        let bounds = Aabb {
            min: Vector3::zeros(),
            max: Vector3::repeat(1.0),
        };
        let voxel = 1.0 / n as f64;
        let grid = build_workspace_bfs(&scene, Vector3::new(0.1, 0.1, 0.1), voxel, bounds, Connectivity::Six)
            .map_err(|e| e.to_string())?;
        for z in 0..grid.dims[2] {
            for y in 0..grid.dims[1] {
                for x in 0..grid.dims[0] {
                    let v = [x, y, z];
                    let d = grid.distance_at(v);
                    if !d.is_finite() {
                        continue;
                    }
                    voxels += 1;
                    for nb in grid.neighbors(v, Connectivity::Six) {
                        let dn = grid.distance_at(nb);
                        if dn.is_finite() && (d - dn).abs() > voxel * (1.0 + 1e-9) {
                            return Err(format!("{n}^3 grid: |{d} - {dn}| > {voxel}"));
                        }
                    }
                }
            }
        }
    }
    Ok(format!(
        "{edges_checked} edges consistent; {voxels} reachable voxels obey the one-hop rule (grids up to 64^3)"
    ))
}

fn run(name: &str, f: impl FnOnce() -> Result<String, String>) -> bool {
    let outcome = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(p) => Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into())),
    };
    match outcome {
        Ok(detail) => {
            println!("PASS  {name}: {detail}");
            true
        }
        Err(why) => {
            println!("FAIL  {name}: {why}");
            false
        }
    }
}

fn main() -> std::process::ExitCode {
    let mut rv = Revalidation::default();
    let results = [
        run("oracle optimality", || oracle_optimality(&mut rv)),
        run("bound soundness", || bound_soundness(&mut rv)),
        run("determinism and consistency", || determinism(&mut rv)),
        run("ARA* anytime property", || ara_anytime(&mut rv)),
        run("multi-robot soundness and bound", || multi_robot(&mut rv)),
        run("collision validity", || {
            if rv.checked == 0 {
                Err("no trajectories were checked".into())
            } else if rv.failures.is_empty() {
                Ok(format!("{} trajectories re-validated at resolution/4, 0 failures", rv.checked))
            } else {
                Err(format!("{} of {} failed: {:?}", rv.failures.len(), rv.checked, rv.failures))
            }
        }),
        run("protocol fidelity", protocol_fidelity),
        run("heuristic properties", heuristic_properties),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        std::process::ExitCode::SUCCESS
    } else {
        std::process::ExitCode::FAILURE
    }
}
