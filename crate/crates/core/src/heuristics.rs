//! Cost-to-go estimates for the lattice searches.
//!
//! [`JointEuclidean`] is consistent with `joint_l2` edge costs and serves as
//! the anchor heuristic. [`WorkspaceHeuristic`] reads distances from a
//! backward breadth-first search over a voxelized workspace; it ignores the
//! arm's geometry and is treated as inadmissible.

use std::collections::VecDeque;
use std::sync::Arc;

use nalgebra::{Isometry3, Matrix3, Vector3};

use crate::collision::distance::{obb_overlap, point_aabb_distance};
use crate::collision::{Aabb, Scene, Shape};
use crate::error::{Error, Result};
use crate::kinematics::RobotModel;
use crate::lattice::{CostModel, GoalConstraint, LatticeGraph, LatticeSpec};

pub const DEFAULT_VOXEL_SIZE: f64 = 0.05;
const MAX_VOXELS: usize = 1 << 24;

pub trait Heuristic: Send + Sync {
    fn estimate(&self, q: &[f64]) -> f64;
}

impl<H: Heuristic + ?Sized> Heuristic for Arc<H> {
    fn estimate(&self, q: &[f64]) -> f64 {
        (**self).estimate(q)
    }
}

impl<H: Heuristic + ?Sized> Heuristic for Box<H> {
    fn estimate(&self, q: &[f64]) -> f64 {
        (**self).estimate(q)
    }
}

/// Always zero; turns any best-first search into uniform-cost search.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroHeuristic;

impl Heuristic for ZeroHeuristic {
    fn estimate(&self, _q: &[f64]) -> f64 {
        0.0
    }
}

/// Weighted joint-space L2 distance to the set of goal configurations.
///
/// With a zero threshold this is the plain distance to the goal
/// configuration. A positive threshold turns the goal into a max-norm box,
/// and the estimate becomes the distance to that box.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEuclidean {
    target: Vec<f64>,
    threshold: f64,
    weights: Option<Vec<f64>>,
}

impl JointEuclidean {
    pub fn new(target: Vec<f64>) -> Self {
        Self {
            target,
            threshold: 0.0,
            weights: None,
        }
    }

    /// Heuristic for a JOINT goal, using the lattice's joint weights.
    pub fn for_goal(goal: &GoalConstraint, spec: &LatticeSpec) -> Result<Self> {
        match goal {
            GoalConstraint::Joint { target, threshold } => Ok(Self {
                target: target.clone(),
                threshold: *threshold,
                weights: spec.joint_weights.clone(),
            }),
            _ => Err(Error::KindMismatch(
                "joint-space Euclidean heuristic needs a JOINT goal".into(),
            )),
        }
    }
}

/// `h_joint_euclidean(q_goal)` as a heuristic object.
pub fn h_joint_euclidean(goal: &GoalConstraint) -> Result<JointEuclidean> {
    match goal {
        GoalConstraint::Joint { target, threshold } => Ok(JointEuclidean {
            target: target.clone(),
            threshold: *threshold,
            weights: None,
        }),
        _ => Err(Error::KindMismatch(
            "joint-space Euclidean heuristic needs a JOINT goal".into(),
        )),
    }
}

impl Heuristic for JointEuclidean {
    fn estimate(&self, q: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (j, (x, t)) in q.iter().zip(&self.target).enumerate() {
            let gap = ((x - t).abs() - self.threshold).max(0.0);
            let w = self.weights.as_ref().map_or(1.0, |w| w[j]);
            sum += (w * gap) * (w * gap);
        }
        sum.sqrt()
    }
}

/// Admissible heuristic for `graph`: joint-space Euclidean for JOINT goals
/// under `joint_l2` costs, zero otherwise.
pub fn admissible_for(graph: &LatticeGraph) -> Box<dyn Heuristic> {
    match (graph.goal(), graph.spec().cost_model) {
        (GoalConstraint::Joint { .. }, CostModel::JointL2) => Box::new(
            JointEuclidean::for_goal(graph.goal(), graph.spec()).expect("joint goal"),
        ),
        _ => Box::new(ZeroHeuristic),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    #[default]
    Six,
    TwentySix,
}

/// Voxelized workspace with BFS distances from a goal voxel.
#[derive(Debug, Clone)]
pub struct WorkspaceGrid {
    pub origin: Vector3<f64>,
    pub voxel: f64,
    pub dims: [usize; 3],
    pub occupancy: Vec<bool>,
    /// Hop count times voxel size; infinite for occupied or unreachable voxels.
    pub distances: Vec<f64>,
    pub goal: Vector3<f64>,
    pub goal_voxel: [usize; 3],
}

impl WorkspaceGrid {
    pub fn index(&self, v: [usize; 3]) -> usize {
        (v[2] * self.dims[1] + v[1]) * self.dims[0] + v[0]
    }

    pub fn voxel_of(&self, p: &Vector3<f64>) -> Option<[usize; 3]> {
        let mut v = [0usize; 3];
        for i in 0..3 {
            let f = ((p[i] - self.origin[i]) / self.voxel).floor();
            if !(f >= 0.0 && (f as usize) < self.dims[i]) {
                return None;
            }
            v[i] = f as usize;
        }
        Some(v)
    }

    pub fn voxel_center(&self, v: [usize; 3]) -> Vector3<f64> {
        self.origin + Vector3::new(v[0] as f64 + 0.5, v[1] as f64 + 0.5, v[2] as f64 + 0.5) * self.voxel
    }

    pub fn distance_at(&self, v: [usize; 3]) -> f64 {
        self.distances[self.index(v)]
    }

    /// Ten times the longest 6-connected hop path across the grid, in meters.
    pub fn unreachable_penalty(&self) -> f64 {
        10.0 * self.voxel * (self.dims[0] + self.dims[1] + self.dims[2]) as f64
    }

    /// Workspace distance-to-goal for an end-effector position.
    pub fn lookup(&self, p: &Vector3<f64>) -> f64 {
        let Some(v) = self.voxel_of(p) else {
            return self.unreachable_penalty();
        };
        if v == self.goal_voxel {
            return 0.0;
        }
        // Near the goal the voxel hop count can overshoot the true distance
        // by up to two extra hops; the straight line is used instead.
        let direct = (p - self.goal).norm();
        if direct <= self.voxel {
            return direct;
        }
        let d = self.distance_at(v);
        if d.is_finite() {
            d
        } else {
            self.unreachable_penalty()
        }
    }

    pub fn neighbors(&self, v: [usize; 3], connectivity: Connectivity) -> Vec<[usize; 3]> {
        let mut out = Vec::with_capacity(26);
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let manhattan = dx.abs() + dy.abs() + dz.abs();
                    if manhattan == 0 || (connectivity == Connectivity::Six && manhattan != 1) {
                        continue;
                    }
                    let n = [v[0] as i64 + dx, v[1] as i64 + dy, v[2] as i64 + dz];
                    if (0..3).all(|i| n[i] >= 0 && (n[i] as usize) < self.dims[i]) {
                        out.push([n[0] as usize, n[1] as usize, n[2] as usize]);
                    }
                }
            }
        }
        out
    }
}

/// Grid bounds covering the scene's obstacles and the robot's reach sphere.
pub fn default_bounds(scene: &Scene, robot: &str) -> Result<Aabb> {
    let placed = scene.robot(robot)?;
    let reach = placed.model.reach();
    let center = placed.base.translation.vector;
    let arm = Aabb {
        min: center - Vector3::repeat(reach),
        max: center + Vector3::repeat(reach),
    };
    Ok(match scene.obstacle_bounds() {
        Some(obstacles) => obstacles.inflate(reach).union(&arm),
        None => arm,
    })
}

/// Voxelizes the scene's obstacles inside `bounds` and runs a backward BFS
/// from the voxel holding `goal`.
pub fn build_workspace_bfs(
    scene: &Scene,
    goal: Vector3<f64>,
    voxel: f64,
    bounds: Aabb,
    connectivity: Connectivity,
) -> Result<WorkspaceGrid> {
    if !(voxel > 0.0 && voxel.is_finite()) {
        return Err(Error::Validation(format!("voxel size {voxel} must be positive")));
    }
    let extent = bounds.max - bounds.min;
    if extent.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::Validation("grid bounds must have positive extent".into()));
    }
    let dims = [
        (extent.x / voxel).ceil().max(1.0) as usize,
        (extent.y / voxel).ceil().max(1.0) as usize,
        (extent.z / voxel).ceil().max(1.0) as usize,
    ];
    let total = dims[0]
        .checked_mul(dims[1])
        .and_then(|x| x.checked_mul(dims[2]))
        .filter(|&n| n <= MAX_VOXELS)
        .ok_or_else(|| Error::Validation(format!("grid {dims:?} exceeds {MAX_VOXELS} voxels")))?;

    let mut grid = WorkspaceGrid {
        origin: bounds.min,
        voxel,
        dims,
        occupancy: vec![false; total],
        distances: vec![f64::INFINITY; total],
        goal,
        goal_voxel: [0; 3],
    };
    grid.goal_voxel = grid.voxel_of(&goal).ok_or(Error::OutOfBounds)?;
    mark_occupancy(&mut grid, scene);

    let start = grid.goal_voxel;
    if grid.occupancy[grid.index(start)] {
        return Err(Error::GoalInOccupiedVoxel);
    }
    let mut hops = vec![u32::MAX; total];
    let mut queue = VecDeque::new();
    let si = grid.index(start);
    hops[si] = 0;
    queue.push_back(start);
    while let Some(v) = queue.pop_front() {
        let h = hops[grid.index(v)];
        for n in grid.neighbors(v, connectivity) {
            let ni = grid.index(n);
            if grid.occupancy[ni] || hops[ni] != u32::MAX {
                continue;
            }
            hops[ni] = h + 1;
            queue.push_back(n);
        }
    }
    for (d, h) in grid.distances.iter_mut().zip(&hops) {
        if *h != u32::MAX {
            *d = *h as f64 * voxel;
        }
    }
    Ok(grid)
}

fn mark_occupancy(grid: &mut WorkspaceGrid, scene: &Scene) {
    let half = Vector3::repeat(grid.voxel * 0.5);
    let identity = Matrix3::identity();
    for object in scene.objects() {
        let bb = object.aabb();
        let lo = |i: usize| (((bb.min[i] - grid.origin[i]) / grid.voxel).floor().max(0.0)) as usize;
        let hi = |i: usize| {
            let f = ((bb.max[i] - grid.origin[i]) / grid.voxel).floor();
            if f < 0.0 {
                None
            } else {
                Some((f as usize).min(grid.dims[i] - 1))
            }
        };
        let (Some(hx), Some(hy), Some(hz)) = (hi(0), hi(1), hi(2)) else {
            continue;
        };
        let rotation = *object.pose.orientation.to_rotation_matrix().matrix();
        for z in lo(2)..=hz {
            for y in lo(1)..=hy {
                for x in lo(0)..=hx {
                    let v = [x, y, z];
                    let center = grid.voxel_center(v);
                    let hit = match object.shape {
                        Shape::Sphere { radius } => {
                            point_aabb_distance(&(object.pose.position - center), &half) <= radius
                        }
                        Shape::Box { half_extents } => obb_overlap(
                            &center,
                            &half,
                            &identity,
                            &object.pose.position,
                            &half_extents,
                            &rotation,
                        ),
                    };
                    if hit {
                        let i = grid.index(v);
                        grid.occupancy[i] = true;
                    }
                }
            }
        }
    }
}

/// `h_workspace`: BFS distance at the end-effector's voxel, times `scale`.
#[derive(Debug, Clone)]
pub struct WorkspaceHeuristic {
    grid: Arc<WorkspaceGrid>,
    model: Arc<RobotModel>,
    base: Isometry3<f64>,
    scale: f64,
}

impl WorkspaceHeuristic {
    pub fn new(grid: Arc<WorkspaceGrid>, model: Arc<RobotModel>, base: Isometry3<f64>) -> Self {
        Self {
            grid,
            model,
            base,
            scale: 1.0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn grid(&self) -> &WorkspaceGrid {
        &self.grid
    }

    /// Builds the grid for `robot` in `scene` with default bounds.
    pub fn for_scene(scene: &Scene, robot: &str, goal: Vector3<f64>, voxel: f64) -> Result<Self> {
        let mut bounds = default_bounds(scene, robot)?;
        bounds = bounds.union(&Aabb {
            min: goal - Vector3::repeat(voxel),
            max: goal + Vector3::repeat(voxel),
        });
        let grid = build_workspace_bfs(scene, goal, voxel, bounds, Connectivity::Six)?;
        let placed = scene.robot(robot)?;
        Ok(Self::new(Arc::new(grid), placed.model.clone(), placed.base))
    }
}

impl Heuristic for WorkspaceHeuristic {
    fn estimate(&self, q: &[f64]) -> f64 {
        match self.model.ee_position(&self.base, q) {
            Ok(p) => self.scale * self.grid.lookup(&p),
            Err(_) => f64::INFINITY,
        }
    }
}
