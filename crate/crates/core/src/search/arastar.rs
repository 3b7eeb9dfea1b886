use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Duration;

use super::common::{check_start, check_weight, reconstruct, Deadline, Key, NodeTable, SearchStats, TIME_CHECK_INTERVAL};
use super::PlanResult;
use crate::error::{Error, Result};
use crate::heuristics::Heuristic;
use crate::lattice::{LatticeGraph, StateId};

/// Inflation schedule for ARA*.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AraSchedule {
    pub w_start: f64,
    pub w_decrement: f64,
    pub w_final: f64,
}

impl Default for AraSchedule {
    fn default() -> Self {
        Self {
            w_start: 10.0,
            w_decrement: 1.0,
            w_final: 1.0,
        }
    }
}

impl AraSchedule {
    pub fn validate(&self) -> Result<()> {
        check_weight("w_final", self.w_final)?;
        check_weight("w_start", self.w_start)?;
        if self.w_start < self.w_final {
            return Err(Error::param("w_start", "must be >= w_final"));
        }
        if !(self.w_decrement > 0.0) {
            return Err(Error::param("w_decrement", "must be positive"));
        }
        Ok(())
    }
}

/// Outcome of an ARA* run: every published solution, best last.
#[derive(Debug, Clone, PartialEq)]
pub struct AraOutcome {
    pub solutions: Vec<PlanResult>,
    /// True when the search stopped because the time limit ran out.
    pub timed_out: bool,
}

impl AraOutcome {
    pub fn best(&self) -> &PlanResult {
        self.solutions.last().expect("outcome holds at least one solution")
    }

    /// `(bound, cost)` for each published solution.
    pub fn series(&self) -> Vec<(f64, f64)> {
        self.solutions.iter().map(|s| (s.stats.bound, s.cost)).collect()
    }
}

struct Ara<'a> {
    graph: &'a LatticeGraph,
    heuristic: &'a dyn Heuristic,
    table: NodeTable,
    open: BinaryHeap<Reverse<Key>>,
    in_open: Vec<bool>,
    in_incons: Vec<bool>,
    incons: Vec<StateId>,
    best_goal: Option<StateId>,
    stats: SearchStats,
    succ: Vec<(StateId, f64)>,
}

impl<'a> Ara<'a> {
    fn grow(&mut self, id: StateId) {
        self.table.ensure(id);
        let need = id as usize + 1;
        if self.in_open.len() < need {
            self.in_open.resize(need, false);
            self.in_incons.resize(need, false);
        }
    }

    fn h(&mut self, id: StateId) -> f64 {
        self.table.h(0, id, self.graph, self.heuristic)
    }

    fn push_open(&mut self, id: StateId, w: f64) {
        let h = self.h(id);
        let g = self.table.g(id);
        self.in_open[id as usize] = true;
        self.open.push(Reverse(Key::new(g, h, w, id)));
    }

    fn note_goal(&mut self, id: StateId) {
        if !self.graph.is_goal(id) {
            return;
        }
        let better = match self.best_goal {
            None => true,
            Some(b) => self.table.g(id) < self.table.g(b),
        };
        if better {
            self.best_goal = Some(id);
        }
    }

    fn peek_valid(&mut self) -> Option<Key> {
        while let Some(&Reverse(key)) = self.open.peek() {
            if self.in_open[key.id as usize] && key.g == self.table.g(key.id) {
                return Some(key);
            }
            self.open.pop();
        }
        None
    }

    /// Expands until the incumbent goal's priority is no worse than the best open entry.
    fn improve_path(&mut self, w: f64, deadline: &Deadline) -> Result<()> {
        loop {
            let Some(top) = self.peek_valid() else {
                return Ok(());
            };
            if let Some(goal) = self.best_goal {
                let g = self.table.g(goal);
                let f_goal = g + w * self.h(goal);
                if f_goal <= top.f {
                    return Ok(());
                }
            }
            if self.stats.expansions.is_multiple_of(TIME_CHECK_INTERVAL) && deadline.expired() {
                return Err(Error::Timeout);
            }
            self.open.pop();
            let id = top.id;
            self.in_open[id as usize] = false;
            self.table.closed[id as usize] = true;
            self.stats.expansions += 1;

            let mut succ = std::mem::take(&mut self.succ);
            self.graph.expand(id, &mut succ);
            for &(next, cost) in &succ {
                self.stats.generated += 1;
                self.grow(next);
                let ng = top.g + cost;
                if ng < self.table.g(next) {
                    self.table.g[next as usize] = ng;
                    self.table.parent[next as usize] = Some(id);
                    self.note_goal(next);
                    if !self.table.is_closed(next) {
                        self.push_open(next, w);
                    } else if !self.in_incons[next as usize] {
                        self.in_incons[next as usize] = true;
                        self.incons.push(next);
                    }
                }
            }
            self.succ = succ;
        }
    }

    /// Smallest `g + h` over OPEN and INCONS.
    fn min_unweighted_f(&mut self) -> f64 {
        let mut ids: Vec<StateId> = self
            .open
            .iter()
            .map(|Reverse(k)| k.id)
            .filter(|&id| self.in_open[id as usize])
            .collect();
        ids.extend(self.incons.iter().copied());
        let mut best = f64::INFINITY;
        for id in ids {
            let f = self.table.g(id) + self.h(id);
            best = best.min(f);
        }
        best
    }

    /// Moves INCONS into OPEN, re-keys OPEN for `w` and clears CLOSED.
    fn reset_for(&mut self, w: f64) {
        let mut members: Vec<StateId> = self
            .open
            .drain()
            .map(|Reverse(k)| k.id)
            .filter(|&id| self.in_open[id as usize])
            .collect();
        members.sort_unstable();
        members.dedup();
        for id in std::mem::take(&mut self.incons) {
            self.in_incons[id as usize] = false;
            if !self.in_open[id as usize] {
                members.push(id);
            }
        }
        for id in members {
            self.push_open(id, w);
        }
        self.table.closed.iter_mut().for_each(|c| *c = false);
    }
}

/// Anytime Repairing A*.
///
/// Runs weighted A* with a decreasing inflation, reusing search effort
/// between iterations through the INCONS list. Each published solution has a
/// strictly smaller bound than the previous one. Stops once the bound reaches
/// `w_final` or the time limit expires.
pub fn ara_star(
    graph: &LatticeGraph,
    heuristic: &dyn Heuristic,
    schedule: AraSchedule,
    time_limit: Duration,
) -> Result<AraOutcome> {
    schedule.validate()?;
    let deadline = Deadline::new(time_limit);
    if time_limit.is_zero() {
        return Err(Error::Timeout);
    }
    check_start(graph)?;

    let mut ara = Ara {
        graph,
        heuristic,
        table: NodeTable::with_heuristics(1),
        open: BinaryHeap::new(),
        in_open: Vec::new(),
        in_incons: Vec::new(),
        incons: Vec::new(),
        best_goal: None,
        stats: SearchStats::default(),
        succ: Vec::new(),
    };
    let start = graph.start_id();
    ara.grow(start);
    ara.table.g[start as usize] = 0.0;
    ara.note_goal(start);

    let mut w = schedule.w_start;
    ara.push_open(start, w);
    let mut solutions: Vec<PlanResult> = Vec::new();
    let mut last_bound = f64::INFINITY;

    loop {
        if let Err(e) = ara.improve_path(w, &deadline) {
            return finish(solutions, e);
        }
        let Some(goal) = ara.best_goal else {
            return finish(solutions, Error::NoPathExists);
        };
        let g_goal = ara.table.g(goal);
        let lower = ara.min_unweighted_f();
        let bound = if lower.is_finite() && lower > 0.0 {
            w.min(g_goal / lower).max(1.0)
        } else if lower.is_finite() {
            w
        } else {
            // OPEN and INCONS are empty: every reachable state is settled.
            1.0
        };
        if bound < last_bound {
            last_bound = bound;
            let stats = SearchStats {
                bound,
                elapsed: deadline.elapsed(),
                ..ara.stats
            };
            solutions.push(reconstruct(graph, &ara.table.parent, &ara.table.g, goal, stats));
        }
        if bound <= schedule.w_final {
            return Ok(AraOutcome {
                solutions,
                timed_out: false,
            });
        }
        if deadline.expired() {
            return finish(solutions, Error::Timeout);
        }
        w = (w - schedule.w_decrement).max(schedule.w_final);
        ara.reset_for(w);
    }
}

fn finish(solutions: Vec<PlanResult>, err: Error) -> Result<AraOutcome> {
    if solutions.is_empty() {
        return Err(err);
    }
    Ok(AraOutcome {
        solutions,
        timed_out: err == Error::Timeout,
    })
}
