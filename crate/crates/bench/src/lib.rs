//! Workloads shared by the criterion benches.

use std::sync::Arc;

use armplan::fixtures::{random_instance, seven_joint_arm_json};
use armplan::kinematics::{parse_robot_spec, Pose, RobotModel};
use armplan::lattice::LatticeGraph;
use armplan::planner_api::{Planner, PlannerInterface, PlannerParams};
use armplan::search::{dijkstra_oracle, DEFAULT_ORACLE_CAP};

/// The first `n` solvable randomized planar instances, with their seeds.
pub fn planar_graphs(n: usize) -> Vec<(u64, LatticeGraph)> {
    let mut out = Vec::with_capacity(n);
    let mut seed = 0;
    while out.len() < n {
        let g = random_instance(seed).graph().expect("fixture graph builds");
        if dijkstra_oracle(&g, DEFAULT_ORACLE_CAP).is_ok() {
            out.push((seed, g));
        }
        seed += 1;
    }
    out
}

pub fn seven_joint_arm() -> Arc<RobotModel> {
    Arc::new(parse_robot_spec(&seven_joint_arm_json()).expect("fixture spec is valid"))
}

/// Start of the 7-joint reaching query, radians.
pub fn seven_joint_start() -> Vec<f64> {
    [0.0f64, -45.0, 0.0, -135.0, 0.0, 90.0, 45.0]
        .iter()
        .map(|d| d.to_radians())
        .collect()
}

pub const SEVEN_JOINT_TARGET: [f64; 3] = [0.6, 0.0, 0.5];

/// Planner for the 7-joint arm alone in an empty world.
pub fn seven_joint_planner(pairs: &[(&str, &str)]) -> Planner {
    let mut world = PlannerInterface::new();
    world
        .add_articulation(seven_joint_arm(), "arm7", Pose::identity(), None)
        .expect("fresh world");
    let params = PlannerParams::parse(pairs.iter().copied()).expect("bench parameters are valid");
    world.make_planner(&["arm7"], params).expect("single robot planner")
}
