use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Duration;

use super::common::{check_start, check_weight, reconstruct, Deadline, Key, NodeTable, SearchStats, TIME_CHECK_INTERVAL};
use super::PlanResult;
use crate::error::{Error, Result};
use crate::heuristics::Heuristic;
use crate::lattice::LatticeGraph;

/// Weighted A* with priority `g + w * h`.
///
/// Closed states whose `g` improves are reopened, which keeps the returned
/// cost within `w` of optimal.
pub fn weighted_astar(
    graph: &LatticeGraph,
    heuristic: &dyn Heuristic,
    w: f64,
    time_limit: Duration,
) -> Result<PlanResult> {
    check_weight("w", w)?;
    let deadline = Deadline::new(time_limit);
    if time_limit.is_zero() {
        return Err(Error::Timeout);
    }
    check_start(graph)?;

    let mut table = NodeTable::with_heuristics(1);
    let mut open = BinaryHeap::new();
    let mut succ = Vec::new();
    let mut stats = SearchStats {
        bound: w,
        ..SearchStats::default()
    };

    let start = graph.start_id();
    table.ensure(start);
    table.g[start as usize] = 0.0;
    let h0 = table.h(0, start, graph, heuristic);
    open.push(Reverse(Key::new(0.0, h0, w, start)));

    while let Some(Reverse(key)) = open.pop() {
        let id = key.id;
        if table.is_closed(id) || key.g != table.g(id) {
            continue;
        }
        if graph.is_goal(id) {
            stats.elapsed = deadline.elapsed();
            return Ok(reconstruct(graph, &table.parent, &table.g, id, stats));
        }
        if stats.expansions.is_multiple_of(TIME_CHECK_INTERVAL) && deadline.expired() {
            return Err(Error::Timeout);
        }
        table.closed[id as usize] = true;
        stats.expansions += 1;

        graph.expand(id, &mut succ);
        let g = key.g;
        for &(next, cost) in &succ {
            stats.generated += 1;
            table.ensure(next);
            let ng = g + cost;
            if ng < table.g(next) {
                table.g[next as usize] = ng;
                table.parent[next as usize] = Some(id);
                table.closed[next as usize] = false;
                let h = table.h(0, next, graph, heuristic);
                open.push(Reverse(Key::new(ng, h, w, next)));
            }
        }
    }
    Err(Error::NoPathExists)
}
