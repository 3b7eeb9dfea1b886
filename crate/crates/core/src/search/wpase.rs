use std::collections::{BTreeSet, HashMap};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use super::common::{check_start, check_weight, reconstruct, Deadline, Key, NodeTable, SearchStats};
use super::PlanResult;
use crate::error::{Error, Result};
use crate::heuristics::Heuristic;
use crate::lattice::{CostModel, LatticeGraph, StateId};

/// How many open entries a worker inspects when looking for an independent state.
const SCAN_LIMIT: usize = 64;

struct Shared {
    table: NodeTable,
    configs: Vec<Option<Box<[f64]>>>,
    open: BTreeSet<Key>,
    open_key: HashMap<StateId, Key>,
    /// States currently being expanded, keyed as they were when selected.
    busy: BTreeSet<Key>,
    stats: SearchStats,
    outcome: Option<Result<StateId>>,
}

impl Shared {
    fn ensure(&mut self, id: StateId) {
        self.table.ensure(id);
        let need = id as usize + 1;
        if self.configs.len() < need {
            self.configs.resize(need, None);
        }
    }

    fn config(&mut self, graph: &LatticeGraph, id: StateId) -> &[f64] {
        self.ensure(id);
        self.configs[id as usize].get_or_insert_with(|| graph.config(id).into_boxed_slice())
    }

    fn insert_open(&mut self, key: Key) {
        if let Some(old) = self.open_key.insert(key.id, key) {
            self.open.remove(&old);
        }
        self.open.insert(key);
    }

    fn remove_open(&mut self, key: &Key) {
        self.open.remove(key);
        self.open_key.remove(&key.id);
    }
}

struct Context<'a> {
    graph: &'a LatticeGraph,
    heuristic: &'a dyn Heuristic,
    w: f64,
    deadline: Deadline,
    state: Mutex<Shared>,
    wake: Condvar,
}

impl Context<'_> {
    /// Lower bound on the cost between two configurations.
    fn pair_bound(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.graph.spec().cost_model {
            CostModel::JointL2 => self.graph.spec().joint_distance(a, b),
            CostModel::EeDisplacement => 0.0,
        }
    }

    /// A state is safe to expand when no state ahead of it in OPEN, and no
    /// state being expanded, could still lower its `g`.
    fn independent(&self, st: &mut Shared, cand: &Key, ahead: &[Key]) -> bool {
        let cand_q: Box<[f64]> = st.config(self.graph, cand.id).into();
        let busy: Vec<Key> = st.busy.iter().copied().filter(|b| b.f < cand.f).collect();
        for other in ahead.iter().chain(&busy) {
            let gq = st.table.g(other.id);
            let oq = st.config(self.graph, other.id);
            if cand.g > gq + self.pair_bound(oq, &cand_q) {
                return false;
            }
        }
        true
    }

    fn select(&self, st: &mut Shared) -> Option<Key> {
        let candidates: Vec<Key> = st.open.iter().take(SCAN_LIMIT).copied().collect();
        for (i, cand) in candidates.iter().enumerate() {
            if self.independent(st, cand, &candidates[..i]) {
                return Some(*cand);
            }
        }
        None
    }

    fn finish(&self, st: &mut Shared, outcome: Result<StateId>) {
        if st.outcome.is_none() {
            st.outcome = Some(outcome);
        }
        self.wake.notify_all();
    }

    fn worker(&self) {
        let mut succ = Vec::new();
        let mut st = self.state.lock().expect("search state lock poisoned");
        loop {
            if st.outcome.is_some() {
                return;
            }
            if self.deadline.expired() {
                self.finish(&mut st, Err(Error::Timeout));
                return;
            }
            if st.open.is_empty() && st.busy.is_empty() {
                self.finish(&mut st, Err(Error::NoPathExists));
                return;
            }
            let Some(key) = self.select(&mut st) else {
                let wait = self.deadline.remaining().min(Duration::from_millis(50));
                st = self
                    .wake
                    .wait_timeout(st, wait)
                    .expect("search state lock poisoned")
                    .0;
                continue;
            };
            st.remove_open(&key);
            if self.graph.is_goal(key.id) {
                self.finish(&mut st, Ok(key.id));
                return;
            }
            st.busy.insert(key);
            st.table.closed[key.id as usize] = true;
            st.stats.expansions += 1;
            drop(st);

            // Edge validation, the expensive part, runs without the lock.
            self.graph.expand(key.id, &mut succ);

            st = self.state.lock().expect("search state lock poisoned");
            st.busy.remove(&key);
            let g = st.table.g(key.id);
            for &(next, cost) in &succ {
                st.stats.generated += 1;
                st.ensure(next);
                let ng = g + cost;
                if ng < st.table.g(next) {
                    st.table.g[next as usize] = ng;
                    st.table.parent[next as usize] = Some(key.id);
                    st.table.closed[next as usize] = false;
                    let h = st.table.h(0, next, self.graph, self.heuristic);
                    st.insert_open(Key::new(ng, h, self.w, next));
                }
            }
            self.wake.notify_all();
        }
    }
}

/// Weighted parallel A* for slow expansions.
///
/// Workers share one OPEN list and one `g` table behind a mutex. A worker
/// may expand a state only when every state ahead of it in OPEN or currently
/// being expanded is provably unable to improve its `g`, judged with the
/// joint-space distance as a pairwise lower bound. Successor generation runs
/// outside the lock. With one worker the expansion order is that of
/// [`weighted_astar`](super::weighted_astar).
pub fn wpase(
    graph: &LatticeGraph,
    heuristic: &dyn Heuristic,
    w: f64,
    num_workers: usize,
    time_limit: Duration,
) -> Result<PlanResult> {
    if num_workers == 0 {
        return Err(Error::InvalidWorkerCount);
    }
    check_weight("w", w)?;
    let deadline = Deadline::new(time_limit);
    if time_limit.is_zero() {
        return Err(Error::Timeout);
    }
    check_start(graph)?;

    let mut shared = Shared {
        table: NodeTable::with_heuristics(1),
        configs: Vec::new(),
        open: BTreeSet::new(),
        open_key: HashMap::new(),
        busy: BTreeSet::new(),
        stats: SearchStats {
            bound: w,
            ..SearchStats::default()
        },
        outcome: None,
    };
    let start = graph.start_id();
    shared.ensure(start);
    shared.table.g[start as usize] = 0.0;
    let h0 = shared.table.h(0, start, graph, heuristic);
    shared.insert_open(Key::new(0.0, h0, w, start));

    let ctx = Context {
        graph,
        heuristic,
        w,
        deadline,
        state: Mutex::new(shared),
        wake: Condvar::new(),
    };
    if num_workers == 1 {
        ctx.worker();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..num_workers {
                scope.spawn(|| ctx.worker());
            }
        });
    }

    let mut st = ctx.state.into_inner().expect("search state lock poisoned");
    let goal = st.outcome.take().expect("workers always record an outcome")?;
    st.stats.elapsed = deadline.elapsed();
    Ok(reconstruct(graph, &st.table.parent, &st.table.g, goal, st.stats))
}
