use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use super::{
    detect_conflicts, lowlevel_focal_plan, Conflict, ConflictKind, Constraint, ConstraintKind,
    TimedPath,
};
use crate::collision::Scene;
use crate::error::{Error, Result};
use crate::heuristics::{admissible_for, Heuristic};
use crate::kinematics::Configuration;
use crate::lattice::{GoalConstraint, LatticeGraph, LatticeSpec};

/// One robot's share of a multi-robot query.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotTask {
    pub robot: String,
    pub start: Configuration,
    pub goal: GoalConstraint,
    pub spec: LatticeSpec,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcbsConfig {
    pub w_low: f64,
    pub w_high: f64,
    pub time_limit: Duration,
    pub reuse_experience: bool,
}

impl Default for EcbsConfig {
    fn default() -> Self {
        Self {
            w_low: 1.5,
            w_high: 1.5,
            time_limit: Duration::from_secs(20),
            reuse_experience: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EcbsStats {
    pub nodes_expanded: u64,
    pub nodes_generated: u64,
    pub low_level_calls: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiPlan {
    pub paths: BTreeMap<String, TimedPath>,
    /// Sum of planner costs.
    pub soc: f64,
    /// Sum of end-effector distances, meters.
    pub ee_soc: f64,
    /// Smallest lower bound among unexpanded constraint-tree nodes at termination.
    pub lower_bound: f64,
    pub stats: EcbsStats,
}

impl MultiPlan {
    /// Number of timesteps until the last robot arrives.
    pub fn makespan(&self) -> usize {
        self.paths.values().map(|p| p.len()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
struct CtNode {
    constraints: Vec<Constraint>,
    paths: BTreeMap<String, TimedPath>,
    soc: f64,
    lb: f64,
    conflicts: usize,
    first: Option<Conflict>,
}

struct Planner<'a> {
    scene: &'a Scene,
    graphs: BTreeMap<String, LatticeGraph>,
    heuristics: BTreeMap<String, Box<dyn Heuristic>>,
    order: Vec<String>,
    config: &'a EcbsConfig,
    started: Instant,
    stats: EcbsStats,
}

impl Planner<'_> {
    fn remaining(&self) -> Result<Duration> {
        let left = self.config.time_limit.saturating_sub(self.started.elapsed());
        if left.is_zero() {
            return Err(Error::Timeout);
        }
        Ok(left)
    }

    fn replan(
        &mut self,
        robot: &str,
        constraints: &[Constraint],
        paths: &BTreeMap<String, TimedPath>,
        previous: Option<&TimedPath>,
    ) -> Result<TimedPath> {
        let left = self.remaining()?;
        self.stats.low_level_calls += 1;
        let others: Vec<&TimedPath> = paths.values().filter(|p| p.robot != robot).collect();
        lowlevel_focal_plan(
            &self.graphs[robot],
            self.heuristics[robot].as_ref(),
            constraints,
            &others,
            previous,
            self.config.w_low,
            left,
        )
    }

    fn finish_node(&mut self, constraints: Vec<Constraint>, paths: BTreeMap<String, TimedPath>) -> Result<CtNode> {
        let all = detect_conflicts(self.scene, &paths)?;
        self.stats.nodes_generated += 1;
        Ok(CtNode {
            constraints,
            soc: paths.values().map(|p| p.cost).sum(),
            lb: paths.values().map(|p| p.lower_bound).sum(),
            conflicts: all.len(),
            first: all.into_iter().next(),
            paths,
        })
    }

    /// Child of `parent` with `added` constraints, replanning `robot` (or
    /// every robot without experience reuse).
    fn child(&mut self, parent: &CtNode, added: Vec<Constraint>, robot: &str) -> Result<Option<CtNode>> {
        let mut constraints = parent.constraints.clone();
        constraints.extend(added);

        let mut paths = parent.paths.clone();
        let targets: Vec<String> = if self.config.reuse_experience {
            vec![robot.to_string()]
        } else {
            self.order.clone()
        };
        for name in targets {
            let previous = if self.config.reuse_experience {
                parent.paths.get(&name).cloned()
            } else {
                None
            };
            match self.replan(&name, &constraints, &paths, previous.as_ref()) {
                Ok(p) => {
                    paths.insert(name, p);
                }
                Err(Error::NoPathExists) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        self.finish_node(constraints, paths).map(Some)
    }

    /// The two children of a conflict between moving robots: each one forbids
    /// one robot from touching the other's configuration(s) at the conflict.
    fn split_snapshot(&mut self, node: &CtNode, conflict: &Conflict) -> Result<Vec<CtNode>> {
        let t = conflict.t;
        let (a, b) = &conflict.robots;
        let mut out = Vec::new();
        for (robot, other) in [(a, b), (b, a)] {
            let other_path = &node.paths[other];
            let (kind, other_to) = match conflict.kind {
                ConflictKind::Vertex => (ConstraintKind::Vertex, other_path.config_at(t).to_vec()),
                ConflictKind::Edge { .. } => (ConstraintKind::Edge, other_path.config_at(t + 1).to_vec()),
            };
            let c = Constraint {
                robot: robot.clone(),
                t,
                kind,
                other: other.clone(),
                other_from: other_path.config_at(t).to_vec(),
                other_to,
            };
            out.extend(self.child(node, vec![c], robot)?);
        }
        Ok(out)
    }

    /// Conflict with `parked` sitting at its final configuration: either it
    /// arrives after `t`, or it arrives by `t` and `mover` keeps clear of
    /// its final configuration from `t` on. The two cases cover every
    /// arrival time, so no wait-by-wait chain of children is needed.
    fn split_parked(&mut self, node: &CtNode, conflict: &Conflict, parked: &str, mover: &str) -> Result<Vec<CtNode>> {
        let t = conflict.t;
        let last = node.paths[parked].configs.last().expect("non-empty path").clone();
        let make = |robot: &str, kind, other: &str, q: &Configuration| Constraint {
            robot: robot.to_string(),
            t,
            kind,
            other: other.to_string(),
            other_from: q.clone(),
            other_to: q.clone(),
        };
        let mut out = Vec::new();
        let later = make(parked, ConstraintKind::ArriveAfter, mover, &Vec::new());
        out.extend(self.child(node, vec![later], parked)?);
        let by = make(parked, ConstraintKind::ArriveBy, mover, &Vec::new());
        let avoid = make(mover, ConstraintKind::AvoidParked, parked, &last);
        out.extend(self.child(node, vec![by, avoid], mover)?);
        Ok(out)
    }
}

/// Conflict-based search with focal lists at both levels.
///
/// The high level keeps constraint-tree nodes ordered by lower bound and
/// expands, among those with sum of costs at most `w_high` times the best
/// lower bound, the one with the fewest conflicts (then fewest constraints,
/// then lower cost, then creation order). A conflict between moving robots
/// `i` and `j` at timestep `t` yields two children: one forbids `i` from
/// touching `j`'s configuration at `t`, the other the reverse. If `j` has
/// already reached its final configuration, the split is on `j`'s arrival
/// time instead. With `reuse_experience` the replanned robot's previous
/// path breaks ties in its low-level search and all other
/// paths are copied; without it every robot is replanned.
pub fn xecbs_plan(scene: Arc<Scene>, tasks: &[RobotTask], config: &EcbsConfig) -> Result<MultiPlan> {
    for (name, w) in [("w_low", config.w_low), ("w_high", config.w_high)] {
        if !(w >= 1.0 && w.is_finite()) {
            return Err(Error::param(name, format!("weight {w} must be finite and >= 1")));
        }
    }
    if config.time_limit.is_zero() {
        return Err(Error::Timeout);
    }
    let started = Instant::now();

    let mut graphs = BTreeMap::new();
    let mut heuristics = BTreeMap::new();
    for task in tasks {
        if graphs.contains_key(&task.robot) {
            return Err(Error::DuplicateName(task.robot.clone()));
        }
        let graph = LatticeGraph::new(scene.clone(), &task.robot, task.spec.clone(), &task.start, task.goal.clone())?;
        heuristics.insert(task.robot.clone(), admissible_for(&graph));
        graphs.insert(task.robot.clone(), graph);
    }
    for (i, a) in tasks.iter().enumerate() {
        if scene.in_collision(&a.robot, &a.start)? {
            return Err(Error::StartsInCollision);
        }
        for b in &tasks[i + 1..] {
            if scene.robot_pair_in_collision(&a.robot, &a.start, &b.robot, &b.start)? {
                return Err(Error::StartsInCollision);
            }
        }
    }

    let mut planner = Planner {
        scene: &scene,
        order: graphs.keys().cloned().collect(),
        graphs,
        heuristics,
        config,
        started,
        stats: EcbsStats::default(),
    };

    let mut root_paths = BTreeMap::new();
    for name in planner.order.clone() {
        let p = planner.replan(&name, &[], &root_paths, None)?;
        root_paths.insert(name, p);
    }
    let root = planner.finish_node(Vec::new(), root_paths)?;
    let mut nodes: Vec<Option<CtNode>> = vec![Some(root)];
    let mut open: Vec<usize> = vec![0];

    loop {
        if open.is_empty() {
            return Err(Error::NoPathExists);
        }
        planner.remaining()?;
        let lb_min = open
            .iter()
            .map(|&i| nodes[i].as_ref().expect("open node").lb)
            .fold(f64::INFINITY, f64::min);
        let threshold = config.w_high * lb_min;
        let pick = open
            .iter()
            .copied()
            .filter(|&i| nodes[i].as_ref().expect("open node").soc <= threshold)
            .min_by(|&a, &b| {
                let (na, nb) = (nodes[a].as_ref().unwrap(), nodes[b].as_ref().unwrap());
                na.conflicts
                    .cmp(&nb.conflicts)
                    .then(na.constraints.len().cmp(&nb.constraints.len()))
                    .then(na.soc.total_cmp(&nb.soc))
                    .then(a.cmp(&b))
            })
            // The best-bound node always satisfies soc <= w_high * lb unless
            // low-level paths exceed their own bounds; fall back to it.
            .unwrap_or_else(|| {
                *open
                    .iter()
                    .min_by(|&&a, &&b| {
                        let (na, nb) = (nodes[a].as_ref().unwrap(), nodes[b].as_ref().unwrap());
                        na.lb.total_cmp(&nb.lb).then(a.cmp(&b))
                    })
                    .expect("open is not empty")
            });
        open.retain(|&i| i != pick);
        let node = nodes[pick].take().expect("open node");
        planner.stats.nodes_expanded += 1;

        let Some(conflict) = node.first.clone() else {
            let mut stats = planner.stats;
            stats.elapsed = started.elapsed();
            return Ok(MultiPlan {
                soc: node.soc,
                ee_soc: node.paths.values().map(|p| p.ee_cost).sum(),
                lower_bound: lb_min,
                paths: node.paths,
                stats,
            });
        };
        let (a, b) = &conflict.robots;
        let (la, lb) = (node.paths[a].len(), node.paths[b].len());
        let t = conflict.t;
        let children = if t + 1 >= la || t + 1 >= lb {
            // the robot that arrived first is the parked one
            let (parked, mover) = if t + 1 >= lb && lb <= la { (b, a) } else { (a, b) };
            let (parked, mover) = (parked.clone(), mover.clone());
            planner.split_parked(&node, &conflict, &parked, &mover)?
        } else {
            planner.split_snapshot(&node, &conflict)?
        };
        for child in children {
            nodes.push(Some(child));
            open.push(nodes.len() - 1);
        }
    }
}
