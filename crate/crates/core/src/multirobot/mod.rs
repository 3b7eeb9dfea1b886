//! Multi-arm planning by conflict-based search over time-indexed lattice paths.
//!
//! Every robot moves on its own lattice with a shared, uniform timestep. A
//! robot that has finished its path stays parked at its last configuration.
//! Conflicts are checked at every timestep and at interior points of each
//! pair of synchronized moves.

mod ecbs;
mod lowlevel;

use std::collections::BTreeMap;

use crate::collision::Scene;
use crate::error::Result;
use crate::kinematics::Configuration;
use crate::lattice::StateId;

pub use ecbs::{xecbs_plan, EcbsConfig, EcbsStats, MultiPlan, RobotTask};
pub use lowlevel::lowlevel_focal_plan;

/// Cost of staying put for one timestep.
pub const WAIT_COST: f64 = 1e-3;

/// Number of equal pieces a synchronized move pair is split into when
/// checking robot-robot contact between timesteps.
pub const EDGE_SUBDIVISIONS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct TimedPath {
    pub robot: String,
    /// Vertex at each timestep, starting at t = 0.
    pub states: Vec<StateId>,
    pub configs: Vec<Configuration>,
    /// Planner cost, waits included.
    pub cost: f64,
    /// Lower bound on the constrained optimum reported by the low-level search.
    pub lower_bound: f64,
    /// End-effector distance travelled, meters.
    pub ee_cost: f64,
}

impl TimedPath {
    /// Configuration at `t`; parked at the final one past the end.
    pub fn config_at(&self, t: usize) -> &[f64] {
        &self.configs[t.min(self.configs.len() - 1)]
    }

    pub fn state_at(&self, t: usize) -> StateId {
        self.states[t.min(self.states.len() - 1)]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConflictKind {
    /// Contact at timestep `t`.
    Vertex,
    /// Contact while moving from `t` to `t + 1`, at the given fraction of the move.
    Edge { fraction: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conflict {
    pub robots: (String, String),
    pub t: usize,
    pub kind: ConflictKind,
    /// The two configurations found in contact.
    pub configs: (Configuration, Configuration),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `robot` must not touch `other` held at `other_from` at timestep `t`.
    Vertex,
    /// `robot`'s move from `t` to `t + 1` must not touch `other` moving from
    /// `other_from` to `other_to` over the same interval.
    Edge,
    /// `robot` must not touch `other` parked at `other_from` at any time from
    /// `t` on, moving or not.
    AvoidParked,
    /// `robot` must have finished its path by timestep `t`.
    ArriveBy,
    /// `robot` must not finish its path at or before timestep `t`.
    ArriveAfter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub robot: String,
    pub t: usize,
    pub kind: ConstraintKind,
    pub other: String,
    pub other_from: Configuration,
    pub other_to: Configuration,
}

impl Constraint {
    /// True if the move `from -> to` over `t -> t + 1` breaks this
    /// constraint. `from == to` models a wait.
    pub(crate) fn violated_by_move(&self, scene: &Scene, t: usize, from: &[f64], to: &[f64]) -> Result<bool> {
        match self.kind {
            ConstraintKind::Vertex => Ok(self.t == t + 1
                && scene.robot_pair_in_collision(&self.robot, to, &self.other, &self.other_from)?),
            ConstraintKind::Edge => Ok(self.t == t
                && edge_pair_contact(scene, &self.robot, from, to, &self.other, &self.other_from, &self.other_to)?
                    .is_some()),
            ConstraintKind::AvoidParked => {
                if t + 1 < self.t {
                    return Ok(false);
                }
                if scene.robot_pair_in_collision(&self.robot, to, &self.other, &self.other_from)? {
                    return Ok(true);
                }
                let c = &self.other_from;
                Ok(t >= self.t && edge_pair_contact(scene, &self.robot, from, to, &self.other, c, c)?.is_some())
            }
            ConstraintKind::ArriveBy => Ok(t >= self.t),
            ConstraintKind::ArriveAfter => Ok(false),
        }
    }

    /// True if ending the path at `q`, reached at timestep `t`, breaks this constraint.
    pub(crate) fn violated_by_parking(&self, scene: &Scene, t: usize, q: &[f64]) -> Result<bool> {
        match self.kind {
            ConstraintKind::Vertex => Ok(self.t >= t
                && scene.robot_pair_in_collision(&self.robot, q, &self.other, &self.other_from)?),
            ConstraintKind::Edge => Ok(self.t >= t
                && edge_pair_contact(scene, &self.robot, q, q, &self.other, &self.other_from, &self.other_to)?
                    .is_some()),
            ConstraintKind::AvoidParked => scene.robot_pair_in_collision(&self.robot, q, &self.other, &self.other_from),
            ConstraintKind::ArriveBy => Ok(t > self.t),
            ConstraintKind::ArriveAfter => Ok(t <= self.t),
        }
    }
}

fn lerp(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
}

/// First interior subdivision point at which two synchronized moves touch.
pub(crate) fn edge_pair_contact(
    scene: &Scene,
    a: &str,
    a_from: &[f64],
    a_to: &[f64],
    b: &str,
    b_from: &[f64],
    b_to: &[f64],
) -> Result<Option<(f64, Configuration, Configuration)>> {
    if a_from == a_to && b_from == b_to {
        return Ok(None);
    }
    for k in 1..EDGE_SUBDIVISIONS {
        let s = k as f64 / EDGE_SUBDIVISIONS as f64;
        let qa = lerp(a_from, a_to, s);
        let qb = lerp(b_from, b_to, s);
        if scene.robot_pair_in_collision(a, &qa, b, &qb)? {
            return Ok(Some((s, qa, qb)));
        }
    }
    Ok(None)
}

/// All robot-robot conflicts in chronological order. At each timestep the
/// contact checks come first, then the moves leaving that timestep.
pub fn detect_conflicts(scene: &Scene, solution: &BTreeMap<String, TimedPath>) -> Result<Vec<Conflict>> {
    for name in solution.keys() {
        scene.robot(name)?;
    }
    let paths: Vec<&TimedPath> = solution.values().collect();
    let makespan = paths.iter().map(|p| p.len()).max().unwrap_or(0);
    let mut found = Vec::new();
    for t in 0..makespan {
        for i in 0..paths.len() {
            for j in i + 1..paths.len() {
                let (a, b) = (paths[i], paths[j]);
                let (qa, qb) = (a.config_at(t), b.config_at(t));
                if scene.robot_pair_in_collision(&a.robot, qa, &b.robot, qb)? {
                    found.push(Conflict {
                        robots: (a.robot.clone(), b.robot.clone()),
                        t,
                        kind: ConflictKind::Vertex,
                        configs: (qa.to_vec(), qb.to_vec()),
                    });
                }
            }
        }
        if t + 1 >= makespan {
            break;
        }
        for i in 0..paths.len() {
            for j in i + 1..paths.len() {
                let (a, b) = (paths[i], paths[j]);
                let hit = edge_pair_contact(
                    scene,
                    &a.robot,
                    a.config_at(t),
                    a.config_at(t + 1),
                    &b.robot,
                    b.config_at(t),
                    b.config_at(t + 1),
                )?;
                if let Some((fraction, qa, qb)) = hit {
                    found.push(Conflict {
                        robots: (a.robot.clone(), b.robot.clone()),
                        t,
                        kind: ConflictKind::Edge { fraction },
                        configs: (qa, qb),
                    });
                }
            }
        }
    }
    Ok(found)
}
