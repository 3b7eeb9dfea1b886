use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::collision::Scene;
use crate::error::{Error, Result};
use crate::kinematics::Configuration;
use crate::multirobot::EDGE_SUBDIVISIONS;

/// Shortest duration given to a segment, seconds.
pub const MIN_SEGMENT_DURATION: f64 = 1e-4;

/// Timed waypoints of one robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotTrajectory {
    pub t: Vec<f64>,
    pub q: Vec<Configuration>,
    pub qd: Vec<Vec<f64>>,
    pub qdd: Vec<Vec<f64>>,
}

impl RobotTrajectory {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.t.last().copied().unwrap_or(0.0)
    }
}

/// Planner output: one timed path per robot plus run metadata. All robots
/// share one time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub planner_id: String,
    /// Planner cost (sum over robots).
    pub cost: f64,
    /// End-effector distance (sum over robots), meters.
    pub ee_cost: f64,
    pub bound: f64,
    pub expansions: u64,
    /// Wall-clock seconds.
    pub planning_time: f64,
    pub robots: BTreeMap<String, RobotTrajectory>,
}

impl Trajectory {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Syntax(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn check_vmax(vmax: &[f64], dof: usize) -> Result<()> {
    if vmax.len() != dof {
        return Err(Error::DimensionMismatch {
            expected: dof,
            got: vmax.len(),
        });
    }
    if vmax.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidVmax);
    }
    Ok(())
}

/// Duration of one segment: the slowest joint at its velocity limit, at least
/// [`MIN_SEGMENT_DURATION`].
pub fn segment_duration(from: &[f64], to: &[f64], vmax: &[f64]) -> f64 {
    let d = from
        .iter()
        .zip(to)
        .zip(vmax)
        .map(|((a, b), v)| (b - a).abs() / v)
        .fold(0.0, f64::max);
    d.max(MIN_SEGMENT_DURATION)
}

/// Finite differences of `values` over `t`: central inside, one-sided at
/// the ends. A single sample has zero derivative.
fn differentiate(values: &[Vec<f64>], t: &[f64]) -> Vec<Vec<f64>> {
    let n = values.len();
    let dof = values.first().map_or(0, Vec::len);
    if n < 2 {
        return vec![vec![0.0; dof]; n];
    }
    (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let dt = t[b] - t[a];
            values[a].iter().zip(&values[b]).map(|(x, y)| (y - x) / dt).collect()
        })
        .collect()
}

fn timed(q: Vec<Configuration>, t: Vec<f64>) -> RobotTrajectory {
    let qd = differentiate(&q, &t);
    let qdd = differentiate(&qd, &t);
    RobotTrajectory { t, q, qd, qdd }
}

/// Times a path so that no joint exceeds `vmax` on any segment.
pub fn time_parameterize(path: &[Configuration], vmax: &[f64]) -> Result<RobotTrajectory> {
    let first = path.first().ok_or(Error::EmptyInput)?;
    check_vmax(vmax, first.len())?;
    let mut t = Vec::with_capacity(path.len());
    t.push(0.0);
    for w in path.windows(2) {
        let last = *t.last().expect("non-empty");
        t.push(last + segment_duration(&w[0], &w[1], vmax));
    }
    Ok(timed(path.to_vec(), t))
}

/// Times several synchronized paths on one grid. Shorter paths are held at
/// their last configuration; each step lasts as long as the slowest robot
/// needs.
pub fn time_parameterize_multi(
    paths: &BTreeMap<String, Vec<Configuration>>,
    vmax: &BTreeMap<String, Vec<f64>>,
) -> Result<BTreeMap<String, RobotTrajectory>> {
    let steps = paths.values().map(Vec::len).max().ok_or(Error::EmptyInput)?;
    for (name, path) in paths {
        let first = path.first().ok_or(Error::EmptyInput)?;
        let v = vmax.get(name).ok_or_else(|| Error::MissingAssignment(name.clone()))?;
        check_vmax(v, first.len())?;
    }
    let at = |p: &Vec<Configuration>, k: usize| p[k.min(p.len() - 1)].clone();
    let mut t = vec![0.0];
    for k in 1..steps {
        let d = paths
            .iter()
            .map(|(name, p)| segment_duration(&at(p, k - 1), &at(p, k), &vmax[name]))
            .fold(MIN_SEGMENT_DURATION, f64::max);
        t.push(t[k - 1] + d);
    }
    Ok(paths
        .iter()
        .map(|(name, p)| {
            let q = (0..steps).map(|k| at(p, k)).collect();
            (name.clone(), timed(q, t.clone()))
        })
        .collect())
}

/// Checks a trajectory against `scene`: array shapes, time stamps, joint
/// limits, obstacle clearance along each segment at interpolation step
/// `step`, robot-robot clearance at every stamp and at interior points of
/// every segment, and (when given) velocity limits. Returns one message per
/// problem found; empty means valid.
pub fn validate_trajectory(scene: &Scene, traj: &Trajectory, step: f64, vmax: Option<f64>) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    let mut grid: Option<&[f64]> = None;
    for (name, rt) in &traj.robots {
        let model = &scene.robot(name)?.model;
        let n = rt.q.len();
        if n == 0 {
            problems.push(format!("{name}: no waypoints"));
            continue;
        }
        if rt.t.len() != n || rt.qd.len() != n || rt.qdd.len() != n {
            problems.push(format!("{name}: array lengths differ"));
            continue;
        }
        if rt.t[0] != 0.0 {
            problems.push(format!("{name}: first stamp is {} rather than 0", rt.t[0]));
        }
        if rt.t.windows(2).any(|w| !(w[1] > w[0])) {
            problems.push(format!("{name}: stamps not strictly increasing"));
        }
        match grid {
            None => grid = Some(&rt.t),
            Some(g) if g != rt.t.as_slice() => problems.push(format!("{name}: stamps differ from other robots")),
            _ => {}
        }
        for (k, q) in rt.q.iter().enumerate() {
            if let Err(e) = model.check_limits(q) {
                problems.push(format!("{name}: waypoint {k}: {e}"));
            }
        }
        if let Some(v) = vmax {
            let tol = v * (1.0 + 1e-9);
            if rt.qd.iter().flatten().any(|x| x.abs() > tol) {
                problems.push(format!("{name}: velocity above {v}"));
            }
        }
        if scene.in_collision(name, &rt.q[0])? {
            problems.push(format!("{name}: waypoint 0 in collision"));
        }
        for (k, w) in rt.q.windows(2).enumerate() {
            if !scene.edge_valid(name, &w[0], &w[1], step)? {
                problems.push(format!("{name}: segment {k} in collision"));
            }
        }
    }
    if !problems.is_empty() {
        return Ok(problems);
    }

    let names: Vec<&String> = traj.robots.keys().collect();
    let steps = traj.robots.values().map(RobotTrajectory::len).max().unwrap_or(0);
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let (a, b) = (&traj.robots[names[i]], &traj.robots[names[j]]);
            for k in 0..steps {
                let last = k + 1 == steps;
                let pieces = if last { 1 } else { EDGE_SUBDIVISIONS };
                for s in 0..pieces {
                    let f = s as f64 / EDGE_SUBDIVISIONS as f64;
                    let qa = lerp_at(&a.q, k, f);
                    let qb = lerp_at(&b.q, k, f);
                    if scene.robot_pair_in_collision(names[i], &qa, names[j], &qb)? {
                        problems.push(format!("{} and {} touch at step {k} + {f}", names[i], names[j]));
                    }
                }
            }
        }
    }
    Ok(problems)
}

fn lerp_at(q: &[Configuration], k: usize, f: f64) -> Vec<f64> {
    let a = &q[k.min(q.len() - 1)];
    let b = &q[(k + 1).min(q.len() - 1)];
    a.iter().zip(b).map(|(x, y)| x + f * (y - x)).collect()
}
