use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Duration;

use super::common::{check_start, check_weight, reconstruct, Deadline, Key, NodeTable, SearchStats, TIME_CHECK_INTERVAL};
use super::PlanResult;
use crate::error::{Error, Result};
use crate::heuristics::Heuristic;
use crate::lattice::{LatticeGraph, StateId};

struct Queue {
    heap: BinaryHeap<Reverse<Key>>,
    member: Vec<bool>,
}

impl Queue {
    fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            member: Vec::new(),
        }
    }

    fn grow(&mut self, n: usize) {
        if self.member.len() < n {
            self.member.resize(n, false);
        }
    }

    fn push(&mut self, key: Key) {
        self.member[key.id as usize] = true;
        self.heap.push(Reverse(key));
    }

    fn remove(&mut self, id: StateId) {
        if let Some(m) = self.member.get_mut(id as usize) {
            *m = false;
        }
    }

    /// Smallest live entry; stale ones are discarded on the way.
    fn top(&mut self, table: &NodeTable) -> Option<Key> {
        while let Some(&Reverse(key)) = self.heap.peek() {
            if self.member[key.id as usize] && key.g == table.g(key.id) {
                return Some(key);
            }
            self.heap.pop();
        }
        None
    }
}

/// Shared multi-heuristic A*.
///
/// Queue 0 is the anchor, ordered by `g + w1 * h_anchor`. Each inadmissible
/// heuristic gets its own queue and is served round-robin while its best key
/// stays within `w2` of the anchor's; otherwise the anchor expands. States
/// expanded by the anchor are never re-added to any queue, states expanded by
/// an inadmissible queue only to the anchor. The returned cost is within
/// `w1 * w2` of optimal when the anchor heuristic is consistent.
pub fn mha_star(
    graph: &LatticeGraph,
    anchor: &dyn Heuristic,
    inadmissible: &[&dyn Heuristic],
    w1: f64,
    w2: f64,
    time_limit: Duration,
) -> Result<PlanResult> {
    check_weight("w1", w1)?;
    check_weight("w2", w2)?;
    let deadline = Deadline::new(time_limit);
    if time_limit.is_zero() {
        return Err(Error::Timeout);
    }
    check_start(graph)?;

    let mut heuristics: Vec<&dyn Heuristic> = Vec::with_capacity(inadmissible.len() + 1);
    heuristics.push(anchor);
    heuristics.extend_from_slice(inadmissible);
    let n = heuristics.len();

    let mut table = NodeTable::with_heuristics(n);
    let mut queues: Vec<Queue> = (0..n).map(|_| Queue::new()).collect();
    let mut closed_anchor: Vec<bool> = Vec::new();
    let mut closed_inad: Vec<bool> = Vec::new();
    let mut best_goal: Option<StateId> = None;
    let mut stats = SearchStats {
        bound: w1 * w2,
        ..SearchStats::default()
    };
    let mut succ = Vec::new();

    let grow = |id: StateId, table: &mut NodeTable, queues: &mut [Queue], ca: &mut Vec<bool>, ci: &mut Vec<bool>| {
        table.ensure(id);
        let need = id as usize + 1;
        for q in queues.iter_mut() {
            q.grow(need);
        }
        if ca.len() < need {
            ca.resize(need, false);
            ci.resize(need, false);
        }
    };

    let start = graph.start_id();
    grow(start, &mut table, &mut queues, &mut closed_anchor, &mut closed_inad);
    table.g[start as usize] = 0.0;
    if graph.is_goal(start) {
        best_goal = Some(start);
    }
    for i in 0..n {
        let h = table.h(i, start, graph, heuristics[i]);
        queues[i].push(Key::new(0.0, h, w1, start));
    }

    let mut turn = 0usize;
    loop {
        let Some(anchor_top) = queues[0].top(&table) else {
            return Err(Error::NoPathExists);
        };
        if stats.expansions.is_multiple_of(TIME_CHECK_INTERVAL) && deadline.expired() {
            return Err(Error::Timeout);
        }

        // Choose the queue to serve this round.
        let mut chosen = 0usize;
        let mut chosen_key = anchor_top;
        if n > 1 {
            let i = 1 + turn % (n - 1);
            turn += 1;
            if let Some(top) = queues[i].top(&table) {
                if top.f <= w2 * anchor_top.f {
                    chosen = i;
                    chosen_key = top;
                }
            }
        }

        if chosen == 0 {
            if graph.is_goal(anchor_top.id) {
                stats.elapsed = deadline.elapsed();
                return Ok(reconstruct(graph, &table.parent, &table.g, anchor_top.id, stats));
            }
        } else if let Some(goal) = best_goal {
            if table.g(goal) <= chosen_key.f {
                stats.elapsed = deadline.elapsed();
                return Ok(reconstruct(graph, &table.parent, &table.g, goal, stats));
            }
        }

        let s = chosen_key.id;
        for q in queues.iter_mut() {
            q.remove(s);
        }
        if chosen == 0 {
            closed_anchor[s as usize] = true;
        } else {
            closed_inad[s as usize] = true;
        }
        stats.expansions += 1;

        let gs = table.g(s);
        graph.expand(s, &mut succ);
        for &(next, cost) in &succ {
            stats.generated += 1;
            grow(next, &mut table, &mut queues, &mut closed_anchor, &mut closed_inad);
            let ng = gs + cost;
            if ng >= table.g(next) {
                continue;
            }
            table.g[next as usize] = ng;
            table.parent[next as usize] = Some(s);
            if graph.is_goal(next) && best_goal.is_none_or(|b| ng < table.g(b)) {
                best_goal = Some(next);
            }
            if closed_anchor[next as usize] {
                continue;
            }
            let h0 = table.h(0, next, graph, heuristics[0]);
            let key0 = Key::new(ng, h0, w1, next);
            queues[0].push(key0);
            if closed_inad[next as usize] {
                continue;
            }
            for i in 1..n {
                let hi = table.h(i, next, graph, heuristics[i]);
                let key = Key::new(ng, hi, w1, next);
                if key.f <= w2 * key0.f {
                    queues[i].push(key);
                } else {
                    queues[i].remove(next);
                }
            }
        }
    }
}
