//! Small synthetic robots and scenes for tests, examples and benchmarks.

use std::sync::Arc;

use nalgebra::Isometry3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::collision::Scene;
use crate::kinematics::{parse_robot_spec, Pose, RobotModel};
use crate::lattice::{GoalConstraint, LatticeGraph, LatticeSpec};
use crate::Result;

/// Robot-spec document for a planar chain of `dof` Z-axis joints, each link
/// `link` meters long with one capsule of radius 0.05. The end effector is a
/// fixed frame at the tip of the last link.
pub fn planar_arm_json(name: &str, dof: usize, link: f64, lo: f64, hi: f64) -> String {
    let mut joints = Vec::new();
    let mut links = vec![serde_json::json!({"name": "l0"})];
    for i in 0..dof {
        let offset = if i == 0 { 0.0 } else { link };
        joints.push(serde_json::json!({
            "name": format!("j{}", i + 1),
            "parent": format!("l{i}"),
            "child": format!("l{}", i + 1),
            "axis": [0.0, 0.0, 1.0],
            "origin": {"p": [offset, 0.0, 0.0]},
            "limits": [lo, hi],
        }));
        links.push(serde_json::json!({
            "name": format!("l{}", i + 1),
            "capsules": [{"a": [0.0, 0.0, 0.0], "b": [link, 0.0, 0.0], "radius": 0.05}],
        }));
    }
    joints.push(serde_json::json!({
        "name": "tool",
        "type": "fixed",
        "parent": format!("l{dof}"),
        "child": "tip",
        "origin": {"p": [link, 0.0, 0.0]},
    }));
    links.push(serde_json::json!({"name": "tip"}));
    serde_json::to_string_pretty(&serde_json::json!({
        "name": name,
        "joints": joints,
        "links": links,
        "end_effector": "tip",
    }))
    .expect("json value serializes")
}

pub fn planar_arm(dof: usize, link: f64, lo: f64, hi: f64) -> Arc<RobotModel> {
    let text = planar_arm_json("planar", dof, link, lo, hi);
    Arc::new(parse_robot_spec(&text).expect("generated spec is valid"))
}

/// One randomized single-robot planning problem on a planar arm.
#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub scene: Arc<Scene>,
    pub robot: String,
    pub spec: LatticeSpec,
    pub start: Vec<f64>,
    pub goal: Vec<f64>,
}

impl Instance {
    pub fn goal_constraint(&self) -> GoalConstraint {
        GoalConstraint::joint(self.goal.clone())
    }

    pub fn graph(&self) -> Result<LatticeGraph> {
        LatticeGraph::new(
            self.scene.clone(),
            &self.robot,
            self.spec.clone(),
            &self.start,
            self.goal_constraint(),
        )
    }
}

/// Builds a 2 or 3 joint planar arm among a few spheres, with a collision-free
/// lattice start and a collision-free goal that is off-lattice half the time.
/// Every joint has 21 lattice values, so the lattice has at most 9261 points.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dof = rng.random_range(2..=3usize);
    let link = if dof == 2 { 1.0 } else { 0.7 };
    let (lo, hi) = (-1.0, 1.0);
    let resolution = 0.1;
    let model = planar_arm(dof, link, lo, hi);
    let reach = link * dof as f64;

    loop {
        let mut scene = Scene::new();
        scene
            .add_robot("arm", model.clone(), Isometry3::identity())
            .expect("fresh scene");
        let count = rng.random_range(1..=3);
        for k in 0..count {
            let r = rng.random_range(0.4..reach + 0.1);
            let theta: f64 = rng.random_range(-1.2..1.2);
            let radius = rng.random_range(0.08..0.3);
            let pose = Pose::from_position([r * theta.cos(), r * theta.sin(), 0.0]);
            scene
                .add_sphere(&format!("obstacle{k}"), radius, pose)
                .expect("positive radius");
        }
        scene.freeze();
        let scene = Arc::new(scene);

        let steps = ((hi - lo) / resolution).round() as i32;
        let lattice_point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..dof)
                .map(|_| lo + rng.random_range(0..=steps) as f64 * resolution)
                .collect()
        };
        let free = |q: &[f64]| !scene.in_collision("arm", q).expect("valid robot");

        let mut found = None;
        for _ in 0..200 {
            let start = lattice_point(&mut rng);
            let mut goal = lattice_point(&mut rng);
            if rng.random_bool(0.5) {
                for v in goal.iter_mut() {
                    *v = (*v + rng.random_range(-0.035..0.035)).clamp(lo, hi);
                }
            }
            if start != goal && free(&start) && free(&goal) {
                found = Some((start, goal));
                break;
            }
        }
        if let Some((start, goal)) = found {
            return Instance {
                seed,
                scene,
                robot: "arm".into(),
                spec: LatticeSpec::uniform(dof, resolution),
                start,
                goal,
            };
        }
    }
}

/// Two planar arms facing each other across a shared region.
#[derive(Debug, Clone)]
pub struct PairInstance {
    pub seed: u64,
    pub scene: Arc<Scene>,
    pub tasks: Vec<crate::multirobot::RobotTask>,
}

/// Two 2-joint arms (links 0.6 m, limits +-1, resolution 0.2, so 121 lattice
/// points each) with bases 2 m apart, pointing at each other. Starts and
/// goals are lattice points, collision-free on their own and pairwise.
/// Goals are placed on the far side so the arms tend to cross paths.
pub fn random_pair_instance(seed: u64) -> PairInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi, resolution) = (-1.0, 1.0, 0.2);
    let model = planar_arm(2, 0.6, lo, hi);
    let mut scene = Scene::new();
    scene.add_robot("left", model.clone(), Isometry3::identity()).expect("fresh scene");
    let facing = Isometry3::new(
        nalgebra::Vector3::new(2.0, 0.0, 0.0),
        nalgebra::Vector3::new(0.0, 0.0, std::f64::consts::PI),
    );
    scene.add_robot("right", model, facing).expect("fresh scene");
    scene.freeze();
    let scene = Arc::new(scene);

    let steps = ((hi - lo) / resolution).round() as i32;
    let point = |rng: &mut ChaCha8Rng, side: f64| -> Vec<f64> {
        // first joint biased to one side of the centre line
        let c0 = if side < 0.0 {
            rng.random_range(0..=steps / 2 - 1)
        } else {
            rng.random_range(steps / 2 + 1..=steps)
        };
        vec![
            lo + c0 as f64 * resolution,
            lo + rng.random_range(0..=steps) as f64 * resolution,
        ]
    };
    let clear = |a: &[f64], b: &[f64]| -> bool {
        !scene.in_collision("left", a).expect("known robot")
            && !scene.in_collision("right", b).expect("known robot")
            && !scene.robot_pair_in_collision("left", a, "right", b).expect("known robots")
    };
    loop {
        let (sa, sb) = (point(&mut rng, -1.0), point(&mut rng, 1.0));
        let (ga, gb) = (point(&mut rng, 1.0), point(&mut rng, -1.0));
        if clear(&sa, &sb) && clear(&ga, &gb) {
            let task = |robot: &str, start: Vec<f64>, goal: Vec<f64>| crate::multirobot::RobotTask {
                robot: robot.into(),
                start,
                goal: GoalConstraint::joint(goal),
                spec: LatticeSpec::uniform(2, resolution),
            };
            return PairInstance {
                seed,
                scene: scene.clone(),
                tasks: vec![task("left", sa, ga), task("right", sb, gb)],
            };
        }
    }
}

/// Robot-spec document for a 7-joint arm with alternating vertical and
/// horizontal axes, roughly the proportions of a common collaborative arm.
pub fn seven_joint_arm_json() -> String {
    let joint = |i: usize, axis: [f64; 3], p: [f64; 3], limits: [f64; 2]| {
        serde_json::json!({
            "name": format!("j{i}"),
            "parent": format!("l{}", i - 1),
            "child": format!("l{i}"),
            "axis": axis,
            "origin": {"p": p},
            "limits": limits,
        })
    };
    let link = |i: usize, b: [f64; 3], r: f64| {
        if b == [0.0; 3] {
            serde_json::json!({"name": format!("l{i}")})
        } else {
            serde_json::json!({"name": format!("l{i}"), "capsules": [{"a": [0.0, 0.0, 0.0], "b": b, "radius": r}]})
        }
    };
    let (z, y) = ([0.0, 0.0, 1.0], [0.0, -1.0, 0.0]);
    let wide = [-2.8973, 2.8973];
    let mut joints = vec![
        joint(1, z, [0.0, 0.0, 0.2], wide),
        joint(2, y, [0.0, 0.0, 0.12], [-1.7628, 1.7628]),
        joint(3, z, [0.0, 0.0, 0.3], wide),
        joint(4, y, [0.0, 0.0, 0.12], [-3.0718, -0.0698]),
        joint(5, z, [0.0, 0.0, 0.3], wide),
        joint(6, y, [0.0, 0.0, 0.12], [-0.0175, 3.7525]),
        joint(7, z, [0.0, 0.0, 0.1], wide),
    ];
    joints.push(serde_json::json!({
        "name": "flange", "type": "fixed", "parent": "l7", "child": "hand",
        "origin": {"p": [0.0, 0.0, 0.1]},
    }));
    let links = vec![
        link(0, [0.0, 0.0, 0.15], 0.05),
        link(1, [0.0, 0.0, 0.1], 0.04),
        link(2, [0.0, 0.0, 0.28], 0.04),
        link(3, [0.0, 0.0, 0.1], 0.035),
        link(4, [0.0, 0.0, 0.28], 0.035),
        link(5, [0.0, 0.0, 0.1], 0.03),
        link(6, [0.0, 0.0, 0.08], 0.03),
        link(7, [0.0, 0.0, 0.08], 0.03),
        serde_json::json!({"name": "hand"}),
    ];
    serde_json::to_string_pretty(&serde_json::json!({
        "name": "arm7",
        "joints": joints,
        "links": links,
        "end_effector": "hand",
    }))
    .expect("json value serializes")
}
