use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use armplan::fixtures::planar_arm_json;
use armplan::planner_api::Trajectory;
use tempfile::TempDir;

fn armplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_armplan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("arm.json"), planar_arm_json("arm", 2, 1.0, -1.0, 1.0)).unwrap();
        // small box near the arm tip at the zero configuration
        let scene = r#"{"objects": [{"name": "box", "type": "box", "size": [0.1, 0.1, 0.3], "pose": {"p": [1.95, 0.0, 0.0]}}]}"#;
        std::fs::write(dir.path().join("scene.json"), scene).unwrap();
        let wall = r#"{"objects": [{"name": "wall", "type": "box", "size": [3.0, 0.1, 0.3], "pose": {"p": [1.8, 0.0, 0.0]}}]}"#;
        std::fs::write(dir.path().join("wall.json"), wall).unwrap();
        Files { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }
}

fn plan_args<'a>(f: &'a Files, scene: &'a str, start: &'a str, goal: &'a str, out: &'a str) -> Vec<String> {
    [
        "plan",
        "--robot",
        &f.s("arm.json"),
        "--scene",
        &f.s(scene),
        "--start",
        start,
        "--goal-joint",
        goal,
        "--resolution",
        "0.1",
        "--time-limit",
        "5",
        "--out",
        &f.s(out),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn run(args: &[String]) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    armplan(&refs)
}

#[test]
fn plan_then_validate() {
    let f = Files::new();
    let out = run(&plan_args(&f, "scene.json", "-0.5,0", "0.5,0", "traj.json"));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let traj = Trajectory::load(f.path("traj.json")).unwrap();
    let arm = &traj.robots["arm"];
    assert_eq!(arm.q.first().unwrap(), &vec![-0.5, 0.0]);
    assert_eq!(arm.q.last().unwrap(), &vec![0.5, 0.0]);
    assert_eq!(traj.planner_id, "wAstar");

    let out = armplan(&[
        "validate",
        "--trajectory",
        &f.s("traj.json"),
        "--robot",
        &f.s("arm.json"),
        "--scene",
        &f.s("scene.json"),
        "--step",
        "0.025",
        "--vmax",
        "1",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn every_single_robot_planner_runs() {
    let f = Files::new();
    for id in ["wAstar", "ARAstar", "MHAstar", "wPASE"] {
        let mut args = plan_args(&f, "scene.json", "-0.5,0", "0.5,0", "traj.json");
        args.extend(["--planner".to_string(), id.to_string()]);
        let out = run(&args);
        assert_eq!(code(&out), 0, "{id}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(Trajectory::load(f.path("traj.json")).unwrap().planner_id, id);
    }
}

#[test]
fn colliding_trajectory_fails_validation() {
    let f = Files::new();
    let out = run(&plan_args(&f, "scene.json", "-0.5,0", "0.5,0", "traj.json"));
    assert_eq!(code(&out), 0);
    let mut traj = Trajectory::load(f.path("traj.json")).unwrap();
    // jump straight through the box
    let arm = traj.robots.get_mut("arm").unwrap();
    arm.q = vec![vec![-0.5, 0.0], vec![0.5, 0.0]];
    arm.t = vec![0.0, 1.0];
    arm.qd = vec![vec![1.0, 0.0]; 2];
    arm.qdd = vec![vec![0.0, 0.0]; 2];
    traj.save(f.path("bad.json")).unwrap();
    let out = armplan(&[
        "validate",
        "--trajectory",
        &f.s("bad.json"),
        "--robot",
        &f.s("arm.json"),
        "--scene",
        &f.s("scene.json"),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("collision"));
}

#[test]
fn planning_failures_exit_3() {
    let f = Files::new();
    let out = run(&plan_args(&f, "wall.json", "-0.5,0", "0.5,0", "traj.json"));
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    // start touching the box
    let out = run(&plan_args(&f, "scene.json", "0,0", "0.5,0", "traj.json"));
    assert_eq!(code(&out), 3);
}

#[test]
fn bad_input_exits_2() {
    let f = Files::new();
    let mut args = plan_args(&f, "scene.json", "-0.5,0", "0.5,0", "traj.json");
    args.extend(["--planner".to_string(), "RRTstar".to_string()]);
    let out = run(&args);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("RRTstar"));

    let mut args = plan_args(&f, "scene.json", "-0.5,0", "0.5,0", "traj.json");
    args.extend(["--w".to_string(), "0.5".to_string()]);
    assert_eq!(code(&run(&args)), 2);
}

fn scenario(dir: &Path) -> PathBuf {
    let text = r#"{
        "robots": [{"name": "arm", "spec": "arm.json"}],
        "scene": "scene.json",
        "repetitions": 3,
        "seed": 7,
        "problems": [
            {"id": "p0", "start": {"arm": [-0.5, 0.0]}, "goal": {"arm": [0.5, 0.0]}},
            {"id": "p1", "start": {"arm": [-0.8, 0.4]}, "goal": {"arm": [0.6, -0.3]}}
        ],
        "planners": [
            {"planner_id": "wAstar", "w": "2", "resolution": "0.1"},
            {"planner_id": "ARAstar", "resolution": "0.1", "label": "ara"}
        ]
    }"#;
    let path = dir.join("scenario.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn bench_is_reproducible() {
    let f = Files::new();
    let sc = scenario(f.dir.path());
    let sc = sc.to_string_lossy();
    for out in ["a.csv", "b.csv"] {
        let o = armplan(&["bench", "--scenario", &sc, "--out", &f.s(out), "--seed", "3", "--mask-time"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read_to_string(f.path("a.csv")).unwrap();
    let b = std::fs::read_to_string(f.path("b.csv")).unwrap();
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(
        lines.next().unwrap(),
        "problem_id,rep,planner,success,ee_cost_m,planner_cost,time_s,bound"
    );
    assert_eq!(lines.count(), 2 * 3 * 2);
    let summary = std::fs::read_to_string(f.path("a.summary.json")).unwrap();
    assert!(summary.contains("\"ara\""));
}

#[test]
fn bench_rejects_bad_scenarios() {
    let f = Files::new();
    let text = r#"{
        "robots": [{"name": "arm", "spec": "arm.json"}],
        "problems": [{"start": {"arm": [0.0, 0.0]}, "goal": {"arm": [0.5, 0.0]}}],
        "planners": [{"planner_id": "wPASE", "num_workers": "8"}]
    }"#;
    std::fs::write(f.path("s.json"), text).unwrap();
    let o = armplan(&["bench", "--scenario", &f.s("s.json"), "--out", &f.s("o.csv")]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("workers"));
}
