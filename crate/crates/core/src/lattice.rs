//! The implicit search graph over a regular joint-space lattice.
//!
//! States are integer joint coordinates; joint `j` of coordinate `c` sits at
//! `lo_j + c * resolution_j`. Edges are unit steps in one joint. Two extra
//! vertices may appear: the exact start configuration when it is off-lattice,
//! and the exact goal configuration of a joint goal (reached by a snap edge).

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{Isometry3, Vector3};
use parking_lot::RwLock;

use crate::collision::Scene;
use crate::error::{Error, Result};
use crate::kinematics::{Configuration, Pose, RobotModel};

pub type StateId = u32;

pub const DEFAULT_RESOLUTION: f64 = 0.05;
const MIN_EE_COST: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostModel {
    #[default]
    JointL2,
    EeDisplacement,
}

impl std::str::FromStr for CostModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint_l2" => Ok(CostModel::JointL2),
            "ee_displacement" => Ok(CostModel::EeDisplacement),
            other => Err(Error::param("cost_model", format!("unknown cost model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    /// Per-joint step, radians.
    pub resolution: Vec<f64>,
    pub cost_model: CostModel,
    /// Max-norm distance below which a joint goal gets a snap edge.
    pub snap_radius: f64,
    /// Interpolation step for edge checks; defaults to a quarter of the finest resolution.
    pub collision_step: Option<f64>,
    /// Per-joint weights of the `joint_l2` cost; uniform when `None`.
    pub joint_weights: Option<Vec<f64>>,
}

impl LatticeSpec {
    pub fn uniform(dof: usize, resolution: f64) -> Self {
        Self {
            resolution: vec![resolution; dof],
            cost_model: CostModel::JointL2,
            snap_radius: resolution,
            collision_step: None,
            joint_weights: None,
        }
    }

    pub fn for_robot(robot: &RobotModel) -> Self {
        Self::uniform(robot.dof(), DEFAULT_RESOLUTION)
    }

    pub fn with_cost_model(mut self, cost_model: CostModel) -> Self {
        self.cost_model = cost_model;
        self
    }

    pub fn validate(&self, robot: &RobotModel) -> Result<()> {
        if self.resolution.len() != robot.dof() {
            return Err(Error::DimensionMismatch {
                expected: robot.dof(),
                got: self.resolution.len(),
            });
        }
        if self.resolution.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::Validation("lattice resolution must be positive".into()));
        }
        if !(self.snap_radius >= 0.0) {
            return Err(Error::Validation("snap radius must be non-negative".into()));
        }
        if let Some(step) = self.collision_step {
            if !(step > 0.0) {
                return Err(Error::Validation("collision step must be positive".into()));
            }
        }
        if let Some(w) = &self.joint_weights {
            if w.len() != robot.dof() || w.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::Validation("joint weights must be positive, one per joint".into()));
            }
        }
        Ok(())
    }

    pub fn edge_step(&self) -> f64 {
        self.collision_step.unwrap_or_else(|| {
            self.resolution.iter().copied().fold(f64::INFINITY, f64::min) / 4.0
        })
    }

    /// Weighted L2 norm of a joint-space delta.
    pub fn joint_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match &self.joint_weights {
            None => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Some(w) => a
                .iter()
                .zip(b)
                .zip(w)
                .map(|((x, y), w)| {
                    let d = w * (x - y);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoalKind {
    Joint,
    Position,
    Pose,
}

/// Goal predicate over configurations.
#[derive(Debug, Clone, PartialEq)]
pub enum GoalConstraint {
    Joint {
        target: Configuration,
        /// Max-norm threshold, radians.
        threshold: f64,
    },
    Position {
        target: Vector3<f64>,
        tolerance: f64,
    },
    Pose {
        target: Pose,
        position_tolerance: f64,
        orientation_tolerance: f64,
    },
}

pub const DEFAULT_POSITION_TOLERANCE: f64 = 0.02;
pub const DEFAULT_ORIENTATION_TOLERANCE: f64 = 0.1;

impl GoalConstraint {
    pub fn joint(target: Configuration) -> Self {
        GoalConstraint::Joint {
            target,
            threshold: 0.0,
        }
    }

    pub fn position(target: [f64; 3]) -> Self {
        GoalConstraint::Position {
            target: Vector3::from(target),
            tolerance: DEFAULT_POSITION_TOLERANCE,
        }
    }

    pub fn pose(target: Pose) -> Self {
        GoalConstraint::Pose {
            target,
            position_tolerance: DEFAULT_POSITION_TOLERANCE,
            orientation_tolerance: DEFAULT_ORIENTATION_TOLERANCE,
        }
    }

    pub fn kind(&self) -> GoalKind {
        match self {
            GoalConstraint::Joint { .. } => GoalKind::Joint,
            GoalConstraint::Position { .. } => GoalKind::Position,
            GoalConstraint::Pose { .. } => GoalKind::Pose,
        }
    }

    pub fn validate(&self, robot: &RobotModel) -> Result<()> {
        let tolerances_ok = match self {
            GoalConstraint::Joint { target, threshold } => {
                robot.check_dimension(target).map_err(|_| {
                    Error::KindMismatch(format!(
                        "joint goal has {} values for a {}-joint robot",
                        target.len(),
                        robot.dof()
                    ))
                })?;
                *threshold >= 0.0
            }
            GoalConstraint::Position { tolerance, .. } => *tolerance >= 0.0,
            GoalConstraint::Pose {
                position_tolerance,
                orientation_tolerance,
                ..
            } => *position_tolerance >= 0.0 && *orientation_tolerance >= 0.0,
        };
        if !tolerances_ok {
            return Err(Error::Validation("goal tolerances must be non-negative".into()));
        }
        Ok(())
    }

    pub fn joint_target(&self) -> Option<&[f64]> {
        match self {
            GoalConstraint::Joint { target, .. } => Some(target),
            _ => None,
        }
    }

    /// Workspace target position, if the goal constrains the end effector.
    pub fn target_position(&self) -> Option<Vector3<f64>> {
        match self {
            GoalConstraint::Joint { .. } => None,
            GoalConstraint::Position { target, .. } => Some(*target),
            GoalConstraint::Pose { target, .. } => Some(target.position),
        }
    }

    /// Evaluates the predicate with the robot rooted at `base`.
    pub fn is_satisfied(&self, robot: &RobotModel, base: &Isometry3<f64>, q: &[f64]) -> Result<bool> {
        robot.check_dimension(q)?;
        Ok(match self {
            GoalConstraint::Joint { target, threshold } => {
                if target.len() != q.len() {
                    return Err(Error::KindMismatch("joint goal dimension differs from robot".into()));
                }
                max_norm(q, target) <= *threshold
            }
            GoalConstraint::Position { target, tolerance } => {
                let p = robot.ee_position(base, q)?;
                (p - target).norm() <= *tolerance
            }
            GoalConstraint::Pose {
                target,
                position_tolerance,
                orientation_tolerance,
            } => {
                let ee = robot.forward_kinematics_from(base, q)?.end_effector;
                (ee.position - target.position).norm() <= *position_tolerance
                    && ee.orientation.angle_to(&target.orientation) <= *orientation_tolerance
            }
        })
    }
}

pub fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum VertexKey {
    Lattice(Box<[i32]>),
    Start,
    Goal,
}

/// Hash-consing table from vertex keys to dense ids; safe to share between threads.
#[derive(Debug, Default)]
struct Interner {
    inner: RwLock<InternerInner>,
}

#[derive(Debug, Default)]
struct InternerInner {
    ids: HashMap<VertexKey, StateId>,
    keys: Vec<VertexKey>,
}

impl Interner {
    fn intern(&self, key: VertexKey) -> StateId {
        if let Some(&id) = self.inner.read().ids.get(&key) {
            return id;
        }
        let mut inner = self.inner.write();
        if let Some(&id) = inner.ids.get(&key) {
            return id;
        }
        let id = inner.keys.len() as StateId;
        inner.keys.push(key.clone());
        inner.ids.insert(key, id);
        id
    }

    fn lookup(&self, key: &VertexKey) -> Option<StateId> {
        self.inner.read().ids.get(key).copied()
    }

    fn key(&self, id: StateId) -> VertexKey {
        self.inner.read().keys[id as usize].clone()
    }

    fn len(&self) -> usize {
        self.inner.read().keys.len()
    }
}

/// Implicit lattice graph for one robot, one start and one goal.
#[derive(Debug)]
pub struct LatticeGraph {
    scene: Arc<Scene>,
    robot: String,
    model: Arc<RobotModel>,
    base: Isometry3<f64>,
    spec: LatticeSpec,
    goal: GoalConstraint,
    start: Configuration,
    start_id: StateId,
    max_coord: Vec<i32>,
    interner: Interner,
}

impl LatticeGraph {
    /// Builds the graph and interns the start vertex. The start is not
    /// collision-checked here; planners report `StartInvalid` themselves.
    pub fn new(
        scene: Arc<Scene>,
        robot: &str,
        spec: LatticeSpec,
        start: &[f64],
        goal: GoalConstraint,
    ) -> Result<Self> {
        let placed = scene.robot(robot)?.clone();
        let model = placed.model;
        spec.validate(&model)?;
        goal.validate(&model)?;
        model.check_dimension(start)?;
        model
            .check_limits(start)
            .map_err(|e| Error::StartInvalid(e.to_string()))?;
        if let Some(target) = goal.joint_target() {
            model
                .check_limits(target)
                .map_err(|e| Error::Validation(format!("joint goal: {e}")))?;
        }
        let max_coord = model
            .joints
            .iter()
            .zip(&spec.resolution)
            .map(|(j, r)| (j.limits.span() / r + 1e-9).floor() as i32)
            .collect();
        let mut graph = Self {
            scene,
            robot: robot.to_string(),
            model,
            base: placed.base,
            spec,
            goal,
            start: start.to_vec(),
            start_id: 0,
            max_coord,
            interner: Interner::default(),
        };
        let coords = graph.discretize(start)?;
        graph.start_id = if graph.continuize(&coords) == start {
            graph.intern(&coords)
        } else {
            graph.interner.intern(VertexKey::Start)
        };
        Ok(graph)
    }

    pub fn scene(&self) -> &Arc<Scene> {
        &self.scene
    }

    pub fn robot_name(&self) -> &str {
        &self.robot
    }

    pub fn model(&self) -> &Arc<RobotModel> {
        &self.model
    }

    pub fn base(&self) -> &Isometry3<f64> {
        &self.base
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn goal(&self) -> &GoalConstraint {
        &self.goal
    }

    pub fn start_id(&self) -> StateId {
        self.start_id
    }

    pub fn start_config(&self) -> &[f64] {
        &self.start
    }

    /// Number of vertices interned so far.
    pub fn interned(&self) -> usize {
        self.interner.len()
    }

    /// Total number of lattice points, ignoring collisions.
    pub fn lattice_size(&self) -> u128 {
        self.max_coord.iter().map(|&m| m as u128 + 1).product()
    }

    /// Rounds half-up to the nearest lattice point, clamped to the top coordinate.
    pub fn discretize(&self, q: &[f64]) -> Result<Vec<i32>> {
        self.model.check_limits(q)?;
        Ok(q.iter()
            .zip(&self.model.joints)
            .zip(&self.spec.resolution)
            .zip(&self.max_coord)
            .map(|(((&v, j), &r), &m)| (((v - j.limits.lo) / r + 0.5).floor() as i32).clamp(0, m))
            .collect())
    }

    pub fn continuize(&self, coords: &[i32]) -> Configuration {
        coords
            .iter()
            .zip(&self.model.joints)
            .zip(&self.spec.resolution)
            .map(|((&c, j), &r)| j.limits.lo + c as f64 * r)
            .collect()
    }

    pub fn intern(&self, coords: &[i32]) -> StateId {
        self.interner.intern(VertexKey::Lattice(coords.into()))
    }

    pub fn lookup(&self, coords: &[i32]) -> Option<StateId> {
        self.interner.lookup(&VertexKey::Lattice(coords.into()))
    }

    /// Lattice coordinates of `id`, or `None` for the start/goal vertices.
    pub fn coords(&self, id: StateId) -> Option<Box<[i32]>> {
        match self.interner.key(id) {
            VertexKey::Lattice(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_snap_goal(&self, id: StateId) -> bool {
        self.interner.key(id) == VertexKey::Goal
    }

    pub fn config(&self, id: StateId) -> Configuration {
        match self.interner.key(id) {
            VertexKey::Lattice(c) => self.continuize(&c),
            VertexKey::Start => self.start.clone(),
            VertexKey::Goal => self
                .goal
                .joint_target()
                .expect("goal vertex exists only for joint goals")
                .to_vec(),
        }
    }

    pub fn is_goal(&self, id: StateId) -> bool {
        match self.interner.key(id) {
            VertexKey::Goal => true,
            VertexKey::Start => self.config_satisfies_goal(&self.start),
            VertexKey::Lattice(c) => self.config_satisfies_goal(&self.continuize(&c)),
        }
    }

    fn config_satisfies_goal(&self, q: &[f64]) -> bool {
        self.goal
            .is_satisfied(&self.model, &self.base, q)
            .unwrap_or(false)
    }

    pub fn in_collision(&self, q: &[f64]) -> Result<bool> {
        self.scene.in_collision(&self.robot, q)
    }

    pub fn edge_valid(&self, a: &[f64], b: &[f64]) -> Result<bool> {
        self.scene.edge_valid(&self.robot, a, b, self.spec.edge_step())
    }

    pub fn edge_cost(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.spec.cost_model {
            CostModel::JointL2 => self.spec.joint_distance(a, b),
            CostModel::EeDisplacement => {
                let pa = self.ee_position(a);
                let pb = self.ee_position(b);
                (pa - pb).norm().max(MIN_EE_COST)
            }
        }
    }

    /// `joint_l2` cost of a unit step in joint `j`, exact in the resolution.
    fn step_cost(&self, j: usize) -> f64 {
        let w = self.spec.joint_weights.as_ref().map_or(1.0, |w| w[j]);
        w * self.spec.resolution[j]
    }

    pub fn ee_position(&self, q: &[f64]) -> Vector3<f64> {
        self.model
            .ee_position(&self.base, q)
            .expect("configuration dimension checked at graph construction")
    }

    /// Successors of a collision-free vertex, in the fixed order: joint index
    /// ascending, negative step before positive, then the snap edge.
    pub fn successors(&self, id: StateId) -> Result<Vec<(StateId, f64)>> {
        let q = self.config(id);
        if self.in_collision(&q)? {
            return Err(Error::StateInCollision);
        }
        let mut out = Vec::new();
        self.expand(id, &mut out);
        Ok(out)
    }

    /// Successor generation without re-checking the source vertex.
    pub fn expand(&self, id: StateId, out: &mut Vec<(StateId, f64)>) {
        out.clear();
        let key = self.interner.key(id);
        match key {
            VertexKey::Goal => {}
            VertexKey::Start => {
                let coords = self
                    .discretize(&self.start)
                    .expect("start validated at construction");
                let target = self.continuize(&coords);
                if self.edge_valid(&self.start, &target).unwrap_or(false) {
                    let cost = self.edge_cost(&self.start, &target);
                    out.push((self.intern(&coords), cost));
                }
                self.push_snap(&self.start, out);
            }
            VertexKey::Lattice(coords) => {
                let q = self.continuize(&coords);
                let mut next = coords.to_vec();
                for j in 0..coords.len() {
                    for delta in [-1, 1] {
                        let c = coords[j] + delta;
                        if c < 0 || c > self.max_coord[j] {
                            continue;
                        }
                        next[j] = c;
                        let q_next = self.continuize(&next);
                        if self.edge_valid(&q, &q_next).unwrap_or(false) {
                            let cost = match self.spec.cost_model {
                                CostModel::JointL2 => self.step_cost(j),
                                CostModel::EeDisplacement => self.edge_cost(&q, &q_next),
                            };
                            out.push((self.intern(&next), cost));
                        }
                        next[j] = coords[j];
                    }
                }
                self.push_snap(&q, out);
            }
        }
    }

    fn push_snap(&self, q: &[f64], out: &mut Vec<(StateId, f64)>) {
        let Some(target) = self.goal.joint_target() else {
            return;
        };
        let gap = max_norm(q, target);
        if gap == 0.0 || gap > self.spec.snap_radius {
            return;
        }
        if self.edge_valid(q, target).unwrap_or(false) {
            let cost = self.edge_cost(q, target);
            out.push((self.interner.intern(VertexKey::Goal), cost));
        }
    }
}
