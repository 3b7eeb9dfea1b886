#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use armplan::collision::Scene;
use armplan::fixtures::planar_arm;
use armplan::kinematics::Pose;
use armplan::lattice::{GoalConstraint, LatticeGraph, LatticeSpec, StateId};
use nalgebra::Isometry3;

pub type Edges = HashMap<StateId, Vec<(StateId, f64)>>;

/// Every vertex reachable from the start, with its outgoing edges.
pub fn enumerate(graph: &LatticeGraph) -> (Vec<StateId>, Edges) {
    let mut order = vec![graph.start_id()];
    let mut edges = HashMap::new();
    let mut queue = VecDeque::from([graph.start_id()]);
    let mut seen = std::collections::HashSet::from([graph.start_id()]);
    let mut out = Vec::new();
    while let Some(id) = queue.pop_front() {
        graph.expand(id, &mut out);
        for &(n, _) in &out {
            if seen.insert(n) {
                order.push(n);
                queue.push_back(n);
            }
        }
        edges.insert(id, out.clone());
    }
    (order, edges)
}

/// All-pairs shortest paths on the enumerated graph; returns the start-to-goal optimum.
pub fn floyd_warshall_cost(graph: &LatticeGraph) -> Option<f64> {
    let (order, edges) = enumerate(graph);
    let n = order.len();
    let index: HashMap<StateId, usize> = order.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for (&s, out) in &edges {
        for &(t, c) in out {
            let (i, j) = (index[&s], index[&t]);
            d[i * n + j] = d[i * n + j].min(c);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik.is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    let s = index[&graph.start_id()];
    order
        .iter()
        .enumerate()
        .filter(|(_, &id)| graph.is_goal(id))
        .map(|(j, _)| d[s * n + j])
        .fold(None, |best: Option<f64>, c| if c.is_finite() { Some(best.map_or(c, |b| b.min(c))) } else { best })
}

/// Re-checks every edge of `path` at a quarter of the finest lattice resolution.
pub fn revalidate(graph: &LatticeGraph, path: &[Vec<f64>]) -> bool {
    let step = graph.spec().resolution.iter().copied().fold(f64::INFINITY, f64::min) / 4.0;
    let scene = graph.scene();
    if path.iter().any(|q| scene.in_collision(graph.robot_name(), q).unwrap()) {
        return false;
    }
    path.windows(2)
        .all(|w| scene.edge_valid(graph.robot_name(), &w[0], &w[1], step).unwrap())
}

/// 2-link planar arm, 21 x 21 lattice (limits +-1, resolution 0.1), one small
/// box near the tip that blocks the straight route from start to goal.
pub fn boxed_planar(start: &[f64], goal: &[f64]) -> LatticeGraph {
    let mut scene = Scene::new();
    scene
        .add_robot("arm", planar_arm(2, 1.0, -1.0, 1.0), Isometry3::identity())
        .unwrap();
    scene
        .add_box("box", [0.1, 0.1, 0.3], Pose::from_position([1.95, 0.0, 0.0]))
        .unwrap();
    scene.freeze();
    LatticeGraph::new(
        Arc::new(scene),
        "arm",
        LatticeSpec::uniform(2, 0.1),
        start,
        GoalConstraint::joint(goal.to_vec()),
    )
    .unwrap()
}

pub const BOX_START: [f64; 2] = [-0.5, 0.0];
pub const BOX_GOAL: [f64; 2] = [0.5, 0.0];

use armplan::multirobot::{TimedPath, WAIT_COST};
use std::collections::BTreeMap;

fn lerp(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
}

/// True if the two robots touch anywhere on a synchronized move, sampled at
/// eleven evenly spaced points including both ends.
pub fn pair_move_collides(scene: &Scene, a: (&str, &[f64], &[f64]), b: (&str, &[f64], &[f64])) -> bool {
    (0..=10).any(|k| {
        let s = k as f64 / 10.0;
        scene
            .robot_pair_in_collision(a.0, &lerp(a.1, a.2, s), b.0, &lerp(b.1, b.2, s))
            .unwrap()
    })
}

/// Optimal sum of costs for two robots over the composite lattice, letting a
/// robot wait for free while it sits on a goal vertex. Waiting elsewhere costs
/// the usual wait cost. This never exceeds the cost of any valid decoupled plan.
pub fn coupled_optimum(scene: &Scene, a: &LatticeGraph, b: &LatticeGraph) -> Option<f64> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    #[derive(PartialEq)]
    struct Entry(f64, StateId, StateId);
    impl Eq for Entry {}
    impl PartialOrd for Entry {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Entry {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&o.0).then(self.1.cmp(&o.1)).then(self.2.cmp(&o.2))
        }
    }

    let (na, nb) = (a.robot_name(), b.robot_name());
    let mut configs: HashMap<(u8, StateId), Vec<f64>> = HashMap::new();
    let mut cfg = |which: u8, s: StateId| -> Vec<f64> {
        configs
            .entry((which, s))
            .or_insert_with(|| if which == 0 { a.config(s) } else { b.config(s) })
            .clone()
    };
    let moves = |g: &LatticeGraph, s: StateId| -> Vec<(StateId, f64)> {
        let mut out = Vec::new();
        g.expand(s, &mut out);
        let wait = if g.is_goal(s) { 0.0 } else { WAIT_COST };
        out.push((s, wait));
        out
    };

    let start = (a.start_id(), b.start_id());
    let mut dist: HashMap<(StateId, StateId), f64> = HashMap::from([(start, 0.0)]);
    let mut heap = BinaryHeap::from([Reverse(Entry(0.0, start.0, start.1))]);
    while let Some(Reverse(Entry(d, sa, sb))) = heap.pop() {
        if dist.get(&(sa, sb)).is_some_and(|&best| d > best) {
            continue;
        }
        if a.is_goal(sa) && b.is_goal(sb) {
            return Some(d);
        }
        let (qa, qb) = (cfg(0, sa), cfg(1, sb));
        let ma = moves(a, sa);
        let mb = moves(b, sb);
        for &(ta, ca) in &ma {
            for &(tb, cb) in &mb {
                if ta == sa && tb == sb {
                    continue;
                }
                let nd = d + ca + cb;
                if dist.get(&(ta, tb)).is_some_and(|&best| best <= nd) {
                    continue;
                }
                let (ra, rb) = (cfg(0, ta), cfg(1, tb));
                if pair_move_collides(scene, (na, &qa, &ra), (nb, &qb, &rb)) {
                    continue;
                }
                dist.insert((ta, tb), nd);
                heap.push(Reverse(Entry(nd, ta, tb)));
            }
        }
    }
    None
}

/// Dense re-check of a multi-robot solution: at every timestep and at ten
/// interpolation points of every move, the full assignment must be collision-free.
pub fn dense_multi_valid(scene: &Scene, paths: &BTreeMap<String, TimedPath>) -> bool {
    let makespan = paths.values().map(|p| p.len()).max().unwrap_or(0);
    for t in 0..makespan {
        let ks: &[usize] = if t + 1 < makespan { &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9] } else { &[0] };
        for &k in ks {
            let s = k as f64 / 10.0;
            let assignment: BTreeMap<String, Vec<f64>> = paths
                .iter()
                .map(|(n, p)| (n.clone(), lerp(p.config_at(t), p.config_at(t + 1), s)))
                .collect();
            if scene.robots_in_collision(&assignment).unwrap() {
                return false;
            }
        }
    }
    true
}
