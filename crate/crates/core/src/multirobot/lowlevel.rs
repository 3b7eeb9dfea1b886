use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::ops::Bound;
use std::time::Duration;

use super::{edge_pair_contact, Constraint, ConstraintKind, TimedPath, WAIT_COST};
use crate::error::{Error, Result};
use crate::heuristics::Heuristic;
use crate::kinematics::{ee_path_length_from, Configuration};
use crate::lattice::{LatticeGraph, StateId};
use crate::search::{Key, TIME_CHECK_INTERVAL};

#[derive(Debug, Clone, Copy)]
struct FocalKey {
    conflicts: u32,
    deviation: u32,
    f: f64,
    g: f64,
    id: u32,
}

impl PartialEq for FocalKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FocalKey {}

impl PartialOrd for FocalKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FocalKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.conflicts
            .cmp(&other.conflicts)
            .then(self.deviation.cmp(&other.deviation))
            .then(self.f.total_cmp(&other.f))
            .then(other.g.total_cmp(&self.g))
            .then(self.id.cmp(&other.id))
    }
}

#[derive(Debug, Clone)]
struct Node {
    state: StateId,
    t: usize,
    g: f64,
    h: f64,
    conflicts: u32,
    deviation: u32,
    parent: Option<u32>,
    open: bool,
}

impl Node {
    fn key(&self, id: u32) -> Key {
        Key::new(self.g, self.h, 1.0, id)
    }

    fn focal_key(&self, id: u32) -> FocalKey {
        FocalKey {
            conflicts: self.conflicts,
            deviation: self.deviation,
            f: self.g + self.h,
            g: self.g,
            id,
        }
    }
}

struct Focal<'a> {
    graph: &'a LatticeGraph,
    heuristic: &'a dyn Heuristic,
    constraints: Vec<&'a Constraint>,
    others: &'a [&'a TimedPath],
    previous: Option<&'a TimedPath>,
    w: f64,
    horizon: usize,
    nodes: Vec<Node>,
    index: HashMap<(StateId, usize), u32>,
    configs: HashMap<StateId, Configuration>,
    open: BTreeSet<Key>,
    focal: BTreeSet<FocalKey>,
    bound: f64,
}

impl Focal<'_> {
    fn config(&mut self, s: StateId) -> Configuration {
        let graph = self.graph;
        self.configs.entry(s).or_insert_with(|| graph.config(s)).clone()
    }

    fn push(&mut self, id: u32) {
        let node = &mut self.nodes[id as usize];
        node.open = true;
        let key = node.key(id);
        let fkey = node.focal_key(id);
        self.open.insert(key);
        if key.f <= self.bound {
            self.focal.insert(fkey);
        }
    }

    fn remove(&mut self, id: u32) {
        let node = &mut self.nodes[id as usize];
        if !node.open {
            return;
        }
        node.open = false;
        let key = node.key(id);
        let fkey = node.focal_key(id);
        self.open.remove(&key);
        self.focal.remove(&fkey);
    }

    /// Keeps FOCAL equal to the OPEN entries with `f <= w * f_min`.
    fn sync_focal(&mut self) {
        let new_bound = self.open.first().map_or(f64::INFINITY, |k| self.w * k.f);
        let lower = |b: f64| Key { f: b, g: f64::NEG_INFINITY, id: u32::MAX };
        if new_bound > self.bound {
            let range = (Bound::Excluded(lower(self.bound)), Bound::Unbounded);
            let add: Vec<u32> = self
                .open
                .range(range)
                .take_while(|k| k.f <= new_bound)
                .map(|k| k.id)
                .collect();
            for id in add {
                let fkey = self.nodes[id as usize].focal_key(id);
                self.focal.insert(fkey);
            }
        } else if new_bound < self.bound {
            let range = (Bound::Excluded(lower(new_bound)), Bound::Unbounded);
            let drop: Vec<u32> = self
                .open
                .range(range)
                .take_while(|k| k.f <= self.bound)
                .map(|k| k.id)
                .collect();
            for id in drop {
                let fkey = self.nodes[id as usize].focal_key(id);
                self.focal.remove(&fkey);
            }
        }
        self.bound = new_bound;
    }

    fn deviation_at(&self, t: usize, s: StateId) -> u32 {
        match self.previous {
            Some(p) if p.state_at(t) != s => 1,
            _ => 0,
        }
    }

    /// Conflicts with the other robots' current paths caused by this move.
    fn count_conflicts(&self, t: usize, from: &[f64], to: &[f64]) -> Result<u32> {
        let scene = self.graph.scene();
        let me = self.graph.robot_name();
        let mut n = 0;
        for other in self.others {
            let (of, ot) = (other.config_at(t), other.config_at(t + 1));
            if scene.robot_pair_in_collision(me, to, &other.robot, ot)?
                || edge_pair_contact(scene, me, from, to, &other.robot, of, ot)?.is_some()
            {
                n += 1;
            }
        }
        Ok(n)
    }

    fn move_allowed(&self, t: usize, from: &[f64], to: &[f64]) -> Result<bool> {
        let scene = self.graph.scene();
        for c in &self.constraints {
            if c.violated_by_move(scene, t, from, to)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn can_finish(&self, t: usize, s: StateId, q: &[f64]) -> Result<bool> {
        if !self.graph.is_goal(s) {
            return Ok(false);
        }
        let scene = self.graph.scene();
        for c in &self.constraints {
            if c.violated_by_parking(scene, t, q)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn relax(&mut self, state: StateId, t: usize, g: f64, parent: u32, conflicts: u32, deviation: u32) {
        let t = t.min(self.horizon);
        match self.index.get(&(state, t)).copied() {
            Some(id) => {
                let node = &self.nodes[id as usize];
                let better = g < node.g || (g == node.g && node.open && conflicts < node.conflicts);
                if !better {
                    return;
                }
                self.remove(id);
                let node = &mut self.nodes[id as usize];
                node.g = g;
                node.parent = Some(parent);
                node.conflicts = conflicts;
                node.deviation = deviation;
                self.push(id);
            }
            None => {
                let q = self.config(state);
                let h = self.heuristic.estimate(&q);
                let id = self.nodes.len() as u32;
                self.nodes.push(Node {
                    state,
                    t,
                    g,
                    h,
                    conflicts,
                    deviation,
                    parent: Some(parent),
                    open: false,
                });
                self.index.insert((state, t), id);
                self.push(id);
            }
        }
    }
}

/// Focal search over `(vertex, timestep)` for one robot.
///
/// Actions are the lattice moves plus waiting in place at cost
/// [`WAIT_COST`](super::WAIT_COST). Moves that break one of `constraints`
/// addressed to this robot are pruned. Among open states with
/// `f <= w_low * f_min` the search prefers fewer conflicts with `others`,
/// then (when `previous` is given) fewer departures from `previous`. The
/// returned path costs at most `w_low` times its reported lower bound.
///
/// Time is tracked exactly up to one step past the last constraint or the
/// end of the longest other path, beyond which nothing changes.
pub fn lowlevel_focal_plan(
    graph: &LatticeGraph,
    heuristic: &dyn Heuristic,
    constraints: &[Constraint],
    others: &[&TimedPath],
    previous: Option<&TimedPath>,
    w_low: f64,
    time_limit: Duration,
) -> Result<TimedPath> {
    if !(w_low >= 1.0 && w_low.is_finite()) {
        return Err(Error::param("w_low", format!("weight {w_low} must be finite and >= 1")));
    }
    let started = std::time::Instant::now();
    if time_limit.is_zero() {
        return Err(Error::Timeout);
    }
    let robot = graph.robot_name();
    let constraints: Vec<&Constraint> = constraints.iter().filter(|c| c.robot == robot).collect();
    let horizon = constraints
        .iter()
        .map(|c| c.t + 1)
        .chain(others.iter().map(|p| p.len()))
        .max()
        .unwrap_or(0);

    let mut search = Focal {
        graph,
        heuristic,
        constraints,
        others,
        previous,
        w: w_low,
        horizon,
        nodes: Vec::new(),
        index: HashMap::new(),
        configs: HashMap::new(),
        open: BTreeSet::new(),
        focal: BTreeSet::new(),
        bound: f64::NEG_INFINITY,
    };

    let start = graph.start_id();
    let q0 = search.config(start);
    if graph.in_collision(&q0)? {
        return Err(Error::StartInvalid("start configuration is in collision".into()));
    }
    // The robot holds its start at t = 0; a constraint there cannot be dodged.
    let scene = graph.scene();
    for c in &search.constraints {
        let held = matches!(c.kind, ConstraintKind::Vertex | ConstraintKind::AvoidParked);
        if c.t == 0 && held && scene.robot_pair_in_collision(robot, &q0, &c.other, &c.other_from)? {
            return Err(Error::NoPathExists);
        }
    }
    let h0 = heuristic.estimate(&q0);
    search.nodes.push(Node {
        state: start,
        t: 0,
        g: 0.0,
        h: h0,
        conflicts: 0,
        deviation: search.deviation_at(0, start),
        parent: None,
        open: false,
    });
    search.index.insert((start, 0), 0);
    search.push(0);
    search.sync_focal();

    let mut expansions: u64 = 0;
    let mut succ = Vec::new();
    while let Some(&top) = search.focal.first() {
        if expansions.is_multiple_of(TIME_CHECK_INTERVAL) && started.elapsed() >= time_limit {
            return Err(Error::Timeout);
        }
        let lower_bound = search.open.first().map_or(top.f, |k| k.f);
        let id = top.id;
        search.remove(id);
        let node = search.nodes[id as usize].clone();
        let q = search.config(node.state);
        if search.can_finish(node.t, node.state, &q)? {
            return Ok(assemble(&mut search, id, lower_bound));
        }
        expansions += 1;

        let next_t = node.t + 1;
        if node.t < search.horizon && search.move_allowed(node.t, &q, &q)? {
            let conflicts = node.conflicts + search.count_conflicts(node.t, &q, &q)?;
            let deviation = node.deviation + search.deviation_at(next_t, node.state);
            search.relax(node.state, next_t, node.g + WAIT_COST, id, conflicts, deviation);
        }
        graph.expand(node.state, &mut succ);
        for &(s, cost) in &succ {
            let qs = search.config(s);
            if !search.move_allowed(node.t, &q, &qs)? {
                continue;
            }
            let conflicts = node.conflicts + search.count_conflicts(node.t, &q, &qs)?;
            let deviation = node.deviation + search.deviation_at(next_t, s);
            search.relax(s, next_t, node.g + cost, id, conflicts, deviation);
        }
        search.sync_focal();
    }
    Err(Error::NoPathExists)
}

fn assemble(search: &mut Focal<'_>, goal: u32, lower_bound: f64) -> TimedPath {
    let mut chain = vec![goal];
    let mut cur = goal;
    while let Some(p) = search.nodes[cur as usize].parent {
        chain.push(p);
        cur = p;
    }
    chain.reverse();
    let states: Vec<StateId> = chain.iter().map(|&i| search.nodes[i as usize].state).collect();
    let configs: Vec<Configuration> = states.iter().map(|&s| search.config(s)).collect();
    let graph = search.graph;
    let ee_cost = ee_path_length_from(graph.model(), graph.base(), &configs).unwrap_or(f64::NAN);
    TimedPath {
        robot: graph.robot_name().to_string(),
        states,
        configs,
        cost: search.nodes[goal as usize].g,
        lower_bound,
        ee_cost,
    }
}
