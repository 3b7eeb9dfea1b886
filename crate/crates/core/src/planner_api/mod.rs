//! Facade over world construction, planner configuration and planning.
//!
//! ```
//! use armplan::fixtures::planar_arm;
//! use armplan::kinematics::Pose;
//! use armplan::lattice::GoalConstraint;
//! use armplan::planner_api::{PlannerInterface, PlannerParams};
//!
//! let mut world = PlannerInterface::new();
//! world.add_articulation(planar_arm(2, 1.0, -1.0, 1.0), "arm", Pose::identity(), None).unwrap();
//! world.add_box("box", [0.2, 0.2, 0.2], Pose::from_position([0.0, 1.8, 0.0])).unwrap();
//! let params = PlannerParams::parse([("planner_id", "ARAstar"), ("time_limit", "5"), ("resolution", "0.1")]).unwrap();
//! let planner = world.make_planner(&["arm"], params).unwrap();
//! let traj = planner.plan(&[-0.5, 0.0], GoalConstraint::joint(vec![0.5, 0.2])).unwrap();
//! assert_eq!(traj.robots["arm"].q[0], vec![-0.5, 0.0]);
//! ```

mod params;
mod trajectory;

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use crate::collision::Scene;
use crate::error::{Error, Result};
use crate::heuristics::{admissible_for, Heuristic, JointEuclidean, WorkspaceHeuristic, ZeroHeuristic};
use crate::kinematics::{Configuration, Pose, RobotModel};
use crate::lattice::{GoalConstraint, LatticeGraph, LatticeSpec};
use crate::multirobot::{xecbs_plan, EcbsConfig, RobotTask};
use crate::search::{ara_star, mha_star, weighted_astar, wpase, AraSchedule, PlanResult};

pub use params::{HeuristicChoice, PlannerId, PlannerParams, DEFAULT_TIME_LIMIT, DEFAULT_VMAX, DEFAULT_WEIGHT};
pub use trajectory::{
    segment_duration, time_parameterize, time_parameterize_multi, validate_trajectory, RobotTrajectory,
    Trajectory, MIN_SEGMENT_DURATION,
};

/// Mutable world plus planner factory.
#[derive(Debug, Clone, Default)]
pub struct PlannerInterface {
    scene: Scene,
}

impl PlannerInterface {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts from an existing (unfrozen) scene.
    pub fn with_scene(scene: Scene) -> Result<Self> {
        if scene.is_frozen() {
            return Err(Error::WorldFrozen);
        }
        Ok(Self { scene })
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    /// Adds a robot rooted at `base_pose`. `end_effector` names the link
    /// whose frame is the end effector; `None` keeps the model's choice.
    pub fn add_articulation(
        &mut self,
        model: impl Into<Arc<RobotModel>>,
        name: &str,
        base_pose: Pose,
        end_effector: Option<&str>,
    ) -> Result<()> {
        let mut model: Arc<RobotModel> = model.into();
        if let Some(link) = end_effector {
            Arc::make_mut(&mut model).set_end_effector(link)?;
        }
        self.scene.add_robot(name, model, base_pose.isometry())
    }

    pub fn remove_articulation(&mut self, name: &str) -> Result<()> {
        self.scene.remove_robot(name).map(drop)
    }

    /// `size` is the full box extent.
    pub fn add_box(&mut self, name: &str, size: [f64; 3], pose: Pose) -> Result<()> {
        self.scene.add_box(name, size, pose)
    }

    pub fn add_sphere(&mut self, name: &str, radius: f64, pose: Pose) -> Result<()> {
        self.scene.add_sphere(name, radius, pose)
    }

    pub fn remove_object(&mut self, name: &str) -> Result<()> {
        self.scene.remove_object(name).map(drop)
    }

    pub fn set_base_pose(&mut self, name: &str, pose: Pose) -> Result<()> {
        self.scene.set_base_pose(name, pose.isometry())
    }

    /// Binds `robots` and `params` to a frozen snapshot of the current world.
    pub fn make_planner(&self, robots: &[&str], params: PlannerParams) -> Result<Planner> {
        params.validate()?;
        if robots.is_empty() {
            return Err(Error::ArityMismatch("no robots given".into()));
        }
        let mut names: Vec<String> = Vec::with_capacity(robots.len());
        for &r in robots {
            self.scene.robot(r)?;
            if names.iter().any(|n| n == r) {
                return Err(Error::DuplicateName(r.to_string()));
            }
            names.push(r.to_string());
        }
        match (params.planner_id.is_multi_robot(), names.len()) {
            (false, n) if n > 1 => {
                return Err(Error::ArityMismatch(format!(
                    "{} plans for one robot, {n} given",
                    params.planner_id
                )))
            }
            (true, 1) => {
                return Err(Error::ArityMismatch(format!(
                    "{} needs at least two robots",
                    params.planner_id
                )))
            }
            _ => {}
        }
        Ok(Planner {
            scene: self.scene.frozen_snapshot(),
            robots: names,
            params,
        })
    }
}

/// A configured planner over a frozen world snapshot.
#[derive(Debug, Clone)]
pub struct Planner {
    scene: Arc<Scene>,
    robots: Vec<String>,
    params: PlannerParams,
}

impl Planner {
    pub fn scene(&self) -> &Arc<Scene> {
        &self.scene
    }

    pub fn robots(&self) -> &[String] {
        &self.robots
    }

    pub fn params(&self) -> &PlannerParams {
        &self.params
    }

    fn spec_for(&self, robot: &str) -> Result<LatticeSpec> {
        let model = &self.scene.robot(robot)?.model;
        let spec = match self.params.resolution {
            Some(r) => LatticeSpec::uniform(model.dof(), r),
            None => LatticeSpec::for_robot(model),
        };
        Ok(spec.with_cost_model(self.params.cost_model))
    }

    /// Lattice graph for the bound single robot.
    pub fn graph(&self, start: &[f64], goal: GoalConstraint) -> Result<LatticeGraph> {
        let robot = self.single()?;
        LatticeGraph::new(self.scene.clone(), robot, self.spec_for(robot)?, start, goal)
    }

    fn single(&self) -> Result<&str> {
        if self.params.planner_id.is_multi_robot() {
            return Err(Error::ArityMismatch(format!(
                "{} plans several robots; use plan_multi",
                self.params.planner_id
            )));
        }
        Ok(&self.robots[0])
    }

    fn workspace_heuristic(&self, graph: &LatticeGraph) -> Result<WorkspaceHeuristic> {
        let target = match graph.goal().target_position() {
            Some(p) => p,
            None => graph.ee_position(graph.goal().joint_target().expect("joint goal")),
        };
        WorkspaceHeuristic::for_scene(&self.scene, graph.robot_name(), target, self.params.voxel_size)
    }

    fn main_heuristic(&self, graph: &LatticeGraph) -> Result<Box<dyn Heuristic>> {
        let joint_goal = graph.goal().joint_target().is_some();
        let choice = self.params.heuristic.unwrap_or(if joint_goal {
            HeuristicChoice::JointEuclidean
        } else {
            HeuristicChoice::WorkspaceBfs
        });
        Ok(match choice {
            HeuristicChoice::JointEuclidean => Box::new(JointEuclidean::for_goal(graph.goal(), graph.spec())?),
            HeuristicChoice::WorkspaceBfs => Box::new(self.workspace_heuristic(graph)?),
            HeuristicChoice::Zero => Box::new(ZeroHeuristic),
        })
    }

    /// Runs the configured single-robot search and returns the raw result.
    pub fn plan_path(&self, start: &[f64], goal: GoalConstraint) -> Result<PlanResult> {
        let graph = self.graph(start, goal)?;
        let p = &self.params;
        match p.planner_id {
            PlannerId::WAstar => weighted_astar(&graph, self.main_heuristic(&graph)?.as_ref(), p.w, p.time_limit),
            PlannerId::Wpase => wpase(&graph, self.main_heuristic(&graph)?.as_ref(), p.w, p.num_workers, p.time_limit),
            PlannerId::AraStar => {
                let schedule = AraSchedule {
                    w_start: p.w,
                    w_decrement: p.w_decrement,
                    w_final: p.w_final,
                };
                let out = ara_star(&graph, self.main_heuristic(&graph)?.as_ref(), schedule, p.time_limit)?;
                Ok(out.best().clone())
            }
            PlannerId::MhaStar => {
                let anchor = admissible_for(&graph);
                let workspace = self.workspace_heuristic(&graph)?;
                mha_star(&graph, anchor.as_ref(), &[&workspace], p.w, p.w2, p.time_limit)
            }
            PlannerId::Xecbs => unreachable!("rejected by single()"),
        }
    }

    /// Plans for the bound robot and times the result.
    pub fn plan(&self, start: &[f64], goal: GoalConstraint) -> Result<Trajectory> {
        let began = Instant::now();
        let robot = self.single()?.to_string();
        let result = self.plan_path(start, goal)?;
        let planning_time = began.elapsed().as_secs_f64();
        let dof = result.path[0].len();
        let timed = time_parameterize(&result.path, &vec![self.params.vmax; dof])?;
        Ok(Trajectory {
            planner_id: self.params.planner_id.to_string(),
            cost: result.cost,
            ee_cost: result.ee_cost,
            bound: result.stats.bound,
            expansions: result.stats.expansions,
            planning_time,
            robots: BTreeMap::from([(robot, timed)]),
        })
    }

    /// Plans for every bound robot jointly. Both maps must cover exactly the
    /// bound robots.
    pub fn plan_multi(
        &self,
        starts: &BTreeMap<String, Configuration>,
        goals: &BTreeMap<String, GoalConstraint>,
    ) -> Result<Trajectory> {
        if !self.params.planner_id.is_multi_robot() {
            return Err(Error::ArityMismatch(format!(
                "{} plans one robot; use plan",
                self.params.planner_id
            )));
        }
        for name in starts.keys().chain(goals.keys()) {
            if !self.robots.contains(name) {
                return Err(Error::UnknownName(name.clone()));
            }
        }
        let began = Instant::now();
        let mut tasks = Vec::with_capacity(self.robots.len());
        for name in &self.robots {
            let start = starts.get(name).ok_or_else(|| Error::MissingAssignment(name.clone()))?;
            let goal = goals.get(name).ok_or_else(|| Error::MissingAssignment(name.clone()))?;
            tasks.push(RobotTask {
                robot: name.clone(),
                start: start.clone(),
                goal: goal.clone(),
                spec: self.spec_for(name)?,
            });
        }
        let p = &self.params;
        let config = EcbsConfig {
            w_low: p.w_low,
            w_high: p.w_high,
            time_limit: p.time_limit,
            reuse_experience: p.reuse_experience,
        };
        let plan = xecbs_plan(self.scene.clone(), &tasks, &config)?;
        let planning_time = began.elapsed().as_secs_f64();
        let paths: BTreeMap<String, Vec<Configuration>> =
            plan.paths.iter().map(|(k, v)| (k.clone(), v.configs.clone())).collect();
        let vmax: BTreeMap<String, Vec<f64>> = paths
            .iter()
            .map(|(k, v)| (k.clone(), vec![p.vmax; v[0].len()]))
            .collect();
        Ok(Trajectory {
            planner_id: p.planner_id.to_string(),
            cost: plan.soc,
            ee_cost: plan.ee_soc,
            bound: p.w_low * p.w_high,
            expansions: plan.stats.nodes_expanded,
            planning_time,
            robots: time_parameterize_multi(&paths, &vmax)?,
        })
    }
}
