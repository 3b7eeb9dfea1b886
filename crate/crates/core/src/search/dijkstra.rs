use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::common::{check_start, reconstruct, Key, NodeTable, SearchStats};
use super::PlanResult;
use crate::error::{Error, Result};
use crate::lattice::LatticeGraph;

/// Lattice size above which the exhaustive oracle refuses to run.
pub const DEFAULT_ORACLE_CAP: u128 = 1_000_000;

/// Exhaustive uniform-cost search. Returns an optimal path on lattices with
/// at most `cap` points.
pub fn dijkstra(graph: &LatticeGraph, cap: u128) -> Result<PlanResult> {
    let size = graph.lattice_size();
    if size > cap {
        return Err(Error::LatticeTooLarge { size, cap });
    }
    check_start(graph)?;

    let mut table = NodeTable::with_heuristics(1);
    let mut open = BinaryHeap::new();
    let mut succ = Vec::new();
    let mut stats = SearchStats {
        bound: 1.0,
        ..SearchStats::default()
    };
    let start = graph.start_id();
    table.ensure(start);
    table.g[start as usize] = 0.0;
    open.push(Reverse(Key::new(0.0, 0.0, 1.0, start)));

    while let Some(Reverse(key)) = open.pop() {
        let id = key.id;
        if table.is_closed(id) || key.g != table.g(id) {
            continue;
        }
        if graph.is_goal(id) {
            return Ok(reconstruct(graph, &table.parent, &table.g, id, stats));
        }
        table.closed[id as usize] = true;
        stats.expansions += 1;
        graph.expand(id, &mut succ);
        for &(next, cost) in &succ {
            stats.generated += 1;
            table.ensure(next);
            let ng = key.g + cost;
            if ng < table.g(next) {
                table.g[next as usize] = ng;
                table.parent[next as usize] = Some(id);
                open.push(Reverse(Key::new(ng, 0.0, 1.0, next)));
            }
        }
    }
    Err(Error::NoPathExists)
}

/// Optimal lattice cost from start to goal.
pub fn dijkstra_oracle(graph: &LatticeGraph, cap: u128) -> Result<f64> {
    dijkstra(graph, cap).map(|r| r.cost)
}
