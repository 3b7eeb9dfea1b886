use std::cmp::Ordering;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::heuristics::Heuristic;
use crate::kinematics::{ee_path_length_from, Configuration};
use crate::lattice::{LatticeGraph, StateId};

/// How often (in expansions) the wall clock is consulted.
pub const TIME_CHECK_INTERVAL: u64 = 256;

/// Open-list priority: lower `f`, then higher `g`, then lower state id.
#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub f: f64,
    pub g: f64,
    pub id: StateId,
}

impl Key {
    pub fn new(g: f64, h: f64, w: f64, id: StateId) -> Self {
        Self { f: g + w * h, g, id }
    }
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.f
            .total_cmp(&other.f)
            .then_with(|| other.g.total_cmp(&self.g))
            .then_with(|| self.id.cmp(&other.id))
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Deadline {
    start: Instant,
    limit: Duration,
}

impl Deadline {
    pub fn new(limit: Duration) -> Self {
        Self {
            start: Instant::now(),
            limit,
        }
    }

    pub fn expired(&self) -> bool {
        self.start.elapsed() >= self.limit
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    pub fn remaining(&self) -> Duration {
        self.limit.saturating_sub(self.start.elapsed())
    }
}

/// Per-state bookkeeping, grown on demand as the graph interns vertices.
#[derive(Debug, Default)]
pub(crate) struct NodeTable {
    pub g: Vec<f64>,
    pub parent: Vec<Option<StateId>>,
    pub closed: Vec<bool>,
    h: Vec<Vec<f64>>,
}

impl NodeTable {
    pub fn with_heuristics(count: usize) -> Self {
        Self {
            h: vec![Vec::new(); count.max(1)],
            ..Self::default()
        }
    }

    pub fn ensure(&mut self, id: StateId) {
        let need = id as usize + 1;
        if self.g.len() < need {
            self.g.resize(need, f64::INFINITY);
            self.parent.resize(need, None);
            self.closed.resize(need, false);
        }
    }

    pub fn g(&self, id: StateId) -> f64 {
        self.g.get(id as usize).copied().unwrap_or(f64::INFINITY)
    }

    pub fn is_closed(&self, id: StateId) -> bool {
        self.closed.get(id as usize).copied().unwrap_or(false)
    }

    /// Heuristic `which` at `id`, computed once and cached.
    pub fn h(&mut self, which: usize, id: StateId, graph: &LatticeGraph, heuristic: &dyn Heuristic) -> f64 {
        let cache = &mut self.h[which];
        let i = id as usize;
        if cache.len() <= i {
            cache.resize(i + 1, f64::NAN);
        }
        if cache[i].is_nan() {
            cache[i] = heuristic.estimate(&graph.config(id));
        }
        cache[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SearchStats {
    pub expansions: u64,
    pub generated: u64,
    pub elapsed: Duration,
    /// Suboptimality bound in effect for the returned solution.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    /// Start first; consecutive entries are lattice, start or snap edges.
    pub path: Vec<Configuration>,
    pub states: Vec<StateId>,
    /// Cost under the lattice's cost model.
    pub cost: f64,
    /// End-effector distance travelled, meters.
    pub ee_cost: f64,
    pub stats: SearchStats,
}

pub(crate) fn check_start(graph: &LatticeGraph) -> Result<()> {
    if graph.in_collision(graph.start_config())? {
        return Err(Error::StartInvalid("start configuration is in collision".into()));
    }
    Ok(())
}

pub(crate) fn check_weight(name: &str, w: f64) -> Result<()> {
    if !(w >= 1.0 && w.is_finite()) {
        return Err(Error::param(name, format!("weight {w} must be finite and >= 1")));
    }
    Ok(())
}

/// Walks parent pointers back from `goal` and assembles the result.
pub(crate) fn reconstruct(
    graph: &LatticeGraph,
    parent: &[Option<StateId>],
    g: &[f64],
    goal: StateId,
    stats: SearchStats,
) -> PlanResult {
    let mut states = vec![goal];
    let mut cur = goal;
    while let Some(p) = parent.get(cur as usize).copied().flatten() {
        states.push(p);
        cur = p;
        debug_assert!(states.len() <= parent.len() + 1, "parent chain has a cycle");
    }
    states.reverse();
    let path: Vec<Configuration> = states.iter().map(|&s| graph.config(s)).collect();
    let ee_cost = ee_path_length_from(graph.model(), graph.base(), &path).unwrap_or(f64::NAN);
    PlanResult {
        path,
        states,
        cost: g[goal as usize],
        ee_cost,
        stats,
    }
}
