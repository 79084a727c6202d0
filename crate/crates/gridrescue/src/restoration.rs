//! Microgrid-formation restoration.
//!
//! `scf_restore` finds the exact optimum pickup plan by complete
//! branch-and-bound over the controllable switches, under single-commodity
//! radiality (every energized island is a tree with exactly one DG),
//! DG capacity, lockouts, and the no-energize safety rule. `sts_restore`
//! is the reckless spanning-tree baseline and `noop_restore` does nothing.
//! `evaluate` replays any plan against ground truth.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::inference::{effective_branch_state, effective_bus_state, InferenceResult};
use crate::netmodel::Network;
use crate::truthsim::{BusState, Flow, SwitchState, TelemetrySnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchCmd {
    Close,
    Open,
}

/// A restoration decision set. Branches absent from `switch_cmd` take no
/// action; lockout branches are never commanded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestorationPlan {
    pub switch_cmd: BTreeMap<String, SwitchCmd>,
    /// Buses whose load the plan expects to serve.
    pub pickup: BTreeSet<String>,
    /// Predicted island assignment: bus -> DG bus.
    pub predicted_microgrid: BTreeMap<String, String>,
    /// Predicted served totals over the planner's believed loads.
    pub predicted_served: Flow,
    /// Set when no DG can serve anything under the constraints.
    pub infeasible: bool,
}

impl RestorationPlan {
    pub fn command(&self, branch: &str) -> Option<SwitchCmd> {
        self.switch_cmd.get(branch).copied()
    }

    fn empty() -> Self {
        RestorationPlan {
            switch_cmd: BTreeMap::new(),
            pickup: BTreeSet::new(),
            predicted_microgrid: BTreeMap::new(),
            predicted_served: Flow::default(),
            infeasible: false,
        }
    }
}

/// Outcome of replaying a plan against ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServedReport {
    pub served_p: i64,
    pub served_q: i64,
    pub tripped_dgs: Vec<String>,
    pub violations: Vec<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RestoreError {
    #[error("search budget exceeded after {0} nodes")]
    SearchBudgetExceeded(u64),
}

#[derive(Debug, Clone, Copy)]
pub struct RestoreOptions {
    /// Branch-and-bound node budget.
    pub node_cap: u64,
}

impl Default for RestoreOptions {
    fn default() -> Self {
        RestoreOptions { node_cap: 10_000_000 }
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// The planner's view of the system after inference.
struct PlannerWorld<'a> {
    net: &'a Network,
    /// Branches the plan may operate.
    free: Vec<usize>,
    /// Conducting edges among non-free branches.
    fixed_closed: Vec<usize>,
    /// Current positions of free branches (known by construction).
    current_closed: Vec<bool>,
    /// Running DGs (present in output telemetry), as bus indices.
    dgs: Vec<usize>,
    /// Invisible served load per DG, from output telemetry minus believed loads.
    extra: BTreeMap<usize, Flow>,
    /// Buses that must stay connected to a DG (believed served now).
    keep_served: Vec<usize>,
    no_energize: Vec<bool>,
    uniform_weights: bool,
    weights: Vec<i64>,
}

impl<'a> PlannerWorld<'a> {
    fn build(net: &'a Network, inf: &InferenceResult, snap: &TelemetrySnapshot) -> Self {
        let nb = net.branch_count();
        let known: Vec<SwitchState> = (0..nb)
            .map(|k| effective_branch_state(snap, inf, &net.branch(k).id))
            .collect();
        let fault_known: Vec<bool> = (0..nb)
            .map(|k| snap.faulted_known.contains(&net.branch(k).id))
            .collect();

        let dgs: Vec<usize> = net
            .dg_buses()
            .iter()
            .copied()
            .filter(|&d| snap.dg_output.contains_key(&net.bus(d).id))
            .collect();

        // Believed current components over all known-closed edges.
        let mut ds = DisjointSet::new(net.bus_count());
        for k in 0..nb {
            if known[k] == SwitchState::Closed {
                let (a, b) = net.branch_ends(k);
                ds.union(a, b);
            }
        }
        let mut believed: BTreeMap<usize, Flow> = BTreeMap::new();
        let mut dg_of_root: BTreeMap<usize, usize> = BTreeMap::new();
        for &d in &dgs {
            dg_of_root.insert(ds.find(d), d);
        }
        let mut keep_served = Vec::new();
        for i in 0..net.bus_count() {
            let root = ds.find(i);
            if let Some(&d) = dg_of_root.get(&root) {
                let e = believed.entry(d).or_default();
                e.p += net.bus(i).load_p;
                e.q += net.bus(i).load_q;
                keep_served.push(i);
            }
        }

        // Energized islands are grown, never rearranged: their conducting
        // branches hold. Invisible served load hangs off island buses
        // through unknown-state branches, so only with the island intact
        // does the per-DG output correction stay attached to the right
        // capacity check.
        let mut free = Vec::new();
        let mut fixed_closed = Vec::new();
        for k in 0..nb {
            let br = net.branch(k);
            let live_backbone = known[k] == SwitchState::Closed
                && dg_of_root.contains_key(&ds.find(net.branch_ends(k).0));
            let controllable = br.switchable
                && net.bus(net.ctrl_bus(k)).ftu_online
                && !fault_known[k]
                && !inf.lockout_branches.contains(&br.id)
                && !live_backbone;
            if controllable {
                free.push(k);
            } else if known[k] == SwitchState::Closed && !fault_known[k] {
                fixed_closed.push(k);
            }
        }
        free.sort_by(|&a, &b| net.branch(a).id.cmp(&net.branch(b).id));
        let current_closed = free
            .iter()
            .map(|&k| known[k] == SwitchState::Closed)
            .collect();
        let mut extra = BTreeMap::new();
        for &d in &dgs {
            let out = snap.dg_output[&net.bus(d).id];
            let bel = believed.get(&d).copied().unwrap_or_default();
            extra.insert(
                d,
                Flow {
                    p: (out.p - bel.p).max(0),
                    q: (out.q - bel.q).max(0),
                },
            );
        }

        let no_energize: Vec<bool> = (0..net.bus_count())
            .map(|i| inf.no_energize_buses.contains(&net.bus(i).id))
            .collect();
        let weights: Vec<i64> = (0..net.bus_count()).map(|i| net.bus(i).weight).collect();

        let mut world = PlannerWorld {
            net,
            free,
            fixed_closed,
            current_closed,
            dgs,
            extra,
            keep_served,
            no_energize,
            uniform_weights: weights.iter().all(|&w| w == 1),
            weights,
        };
        world.order_free_by_dg_distance();
        world
    }

    /// Decide branches near the DGs first: opening a feeder then bounds
    /// away its whole downstream subtree before the subtree's own
    /// variables are ever enumerated.
    fn order_free_by_dg_distance(&mut self) {
        let net = self.net;
        let n = net.bus_count();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &k in self.fixed_closed.iter().chain(&self.free) {
            let (a, b) = net.branch_ends(k);
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut dist = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        for &d in &self.dgs {
            dist[d] = 0;
            queue.push_back(d);
        }
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut order: Vec<usize> = (0..self.free.len()).collect();
        order.sort_by(|&x, &y| {
            let key = |i: usize| {
                let (a, b) = net.branch_ends(self.free[i]);
                (dist[a].min(dist[b]), net.branch(self.free[i]).id.clone())
            };
            key(x).cmp(&key(y))
        });
        self.free = order.iter().map(|&i| self.free[i]).collect();
        self.current_closed = order.iter().map(|&i| self.current_closed[i]).collect();
    }

    /// Deterministic capacity-aware greedy: grow islands by closing one
    /// frontier switch at a time wherever the attached section fits. The
    /// result is feasible and seeds the search incumbent.
    fn greedy_assignment(&self) -> Vec<bool> {
        let net = self.net;
        let n = net.bus_count();
        let mut assign = self.current_closed.clone();
        loop {
            let mut ds = DisjointSet::new(n);
            for &k in &self.edges(&assign) {
                let (a, b) = net.branch_ends(k);
                ds.union(a, b);
            }
            let mut island_dg: BTreeMap<usize, usize> = BTreeMap::new();
            for &d in &self.dgs {
                island_dg.insert(ds.find(d), d);
            }
            let mut comp_load: BTreeMap<usize, Flow> = BTreeMap::new();
            let mut comp_barred: BTreeMap<usize, bool> = BTreeMap::new();
            for i in 0..n {
                let root = ds.find(i);
                let e = comp_load.entry(root).or_default();
                e.p += net.bus(i).load_p;
                e.q += net.bus(i).load_q;
                *comp_barred.entry(root).or_default() |= self.no_energize[i];
            }
            let mut changed = false;
            for (i, &k) in self.free.iter().enumerate() {
                if assign[i] {
                    continue;
                }
                let (a, b) = net.branch_ends(k);
                let (ra, rb) = (ds.find(a), ds.find(b));
                if ra == rb {
                    continue; // would close a loop
                }
                let (island_root, other_root) = match (island_dg.get(&ra), island_dg.get(&rb)) {
                    (Some(_), None) => (ra, rb),
                    (None, Some(_)) => (rb, ra),
                    _ => continue, // dead-dead or island-island
                };
                if comp_barred.get(&other_root).copied().unwrap_or(false) {
                    continue;
                }
                let d = island_dg[&island_root];
                let cap = net.bus(d).dg.as_ref().expect("dg bus");
                let extra = self.extra[&d];
                let cur = comp_load.get(&island_root).copied().unwrap_or_default();
                let add = comp_load.get(&other_root).copied().unwrap_or_default();
                if cur.p + add.p + extra.p <= cap.cap_p && cur.q + add.q + extra.q <= cap.cap_q {
                    assign[i] = true;
                    changed = true;
                    break; // recompute components before the next closure
                }
            }
            if !changed {
                return assign;
            }
        }
    }

    /// Closed edge set for one assignment of the free branches.
    fn edges(&self, assign: &[bool]) -> Vec<usize> {
        let mut e = self.fixed_closed.clone();
        for (i, &k) in self.free.iter().enumerate() {
            if assign[i] {
                e.push(k);
            }
        }
        e
    }

    /// Full feasibility + objective for a complete assignment.
    /// Returns (weighted served, commands) or None when infeasible.
    fn evaluate_leaf(&self, assign: &[bool]) -> Option<(i64, usize)> {
        let net = self.net;
        let n = net.bus_count();
        let edges = self.edges(assign);
        let mut ds = DisjointSet::new(n);
        let mut edge_count: BTreeMap<usize, usize> = BTreeMap::new();
        for &k in &edges {
            let (a, b) = net.branch_ends(k);
            ds.union(a, b);
        }
        for &k in &edges {
            let root = ds.find(net.branch_ends(k).0);
            *edge_count.entry(root).or_default() += 1;
        }
        let mut dg_of_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &d in &self.dgs {
            dg_of_root.entry(ds.find(d)).or_default().push(d);
        }
        let mut comp_load: BTreeMap<usize, Flow> = BTreeMap::new();
        let mut comp_size: BTreeMap<usize, usize> = BTreeMap::new();
        let mut comp_weighted: BTreeMap<usize, i64> = BTreeMap::new();
        for i in 0..n {
            let root = ds.find(i);
            if !dg_of_root.contains_key(&root) {
                continue;
            }
            if self.no_energize[i] {
                return None;
            }
            let e = comp_load.entry(root).or_default();
            e.p += net.bus(i).load_p;
            e.q += net.bus(i).load_q;
            *comp_size.entry(root).or_default() += 1;
            *comp_weighted.entry(root).or_default() += self.weights[i] * net.bus(i).load_p;
        }
        let mut served_weighted = 0;
        for (root, dgs) in &dg_of_root {
            if dgs.len() > 1 {
                return None;
            }
            let d = dgs[0];
            // radiality: island must be a tree
            if edge_count.get(root).copied().unwrap_or(0) + 1 != comp_size[root] {
                return None;
            }
            let cap = net.bus(d).dg.as_ref().expect("dg bus");
            let extra = self.extra[&d];
            let load = comp_load[root];
            if load.p + extra.p > cap.cap_p || load.q + extra.q > cap.cap_q {
                return None;
            }
            served_weighted += comp_weighted[root];
        }
        for &i in &self.keep_served {
            if !dg_of_root.contains_key(&ds.find(i)) {
                return None;
            }
        }
        let commands = assign
            .iter()
            .zip(&self.current_closed)
            .filter(|(a, c)| a != c)
            .count();
        Some((served_weighted, commands))
    }

    /// Monotone infeasibility over a partial assignment: anything already
    /// violated here stays violated in every completion.
    fn partial_infeasible(&self, assign: &[Option<bool>]) -> bool {
        let net = self.net;
        let n = net.bus_count();
        let mut ds = DisjointSet::new(n);
        let mut cycle_roots = BTreeSet::new();
        let add = |ds: &mut DisjointSet, k: usize, cycles: &mut BTreeSet<usize>| {
            let (a, b) = net.branch_ends(k);
            if !ds.union(a, b) {
                cycles.insert(ds.find(a));
            }
        };
        for &k in &self.fixed_closed {
            add(&mut ds, k, &mut cycle_roots);
        }
        for (i, &k) in self.free.iter().enumerate() {
            if assign[i] == Some(true) {
                add(&mut ds, k, &mut cycle_roots);
            }
        }
        let mut dg_of_root: BTreeMap<usize, usize> = BTreeMap::new();
        for &d in &self.dgs {
            let root = ds.find(d);
            if dg_of_root.insert(root, d).is_some() {
                return true; // two DGs already merged
            }
        }
        let cycle_roots: BTreeSet<usize> = cycle_roots.iter().map(|&r| ds.find(r)).collect();
        let mut comp_load: BTreeMap<usize, Flow> = BTreeMap::new();
        for i in 0..n {
            let root = ds.find(i);
            let Some(&d) = dg_of_root.get(&root) else {
                continue;
            };
            if self.no_energize[i] {
                return true; // connected a barred bus to a DG
            }
            if cycle_roots.contains(&root) {
                return true; // energized island already has a loop
            }
            let e = comp_load.entry(root).or_default();
            e.p += net.bus(i).load_p;
            e.q += net.bus(i).load_q;
            let cap = net.bus(d).dg.as_ref().expect("dg bus");
            let extra = self.extra[&d];
            if e.p + extra.p > cap.cap_p || e.q + extra.q > cap.cap_q {
                return true;
            }
        }
        false
    }

    /// Admissible bound on weighted served load over any completion, or
    /// None when the partial assignment already strands a kept bus.
    ///
    /// Power can only reach a bus along paths that avoid both no-energize
    /// buses and rival DGs, so each DG is flooded over fixed, decided-
    /// closed, and undecided edges with those vertices blocked. DGs with
    /// overlapping floods pool their remaining capacity; with uniform
    /// weights each pool's bound is capped by it.
    fn bound(&self, assign: &[Option<bool>]) -> Option<i64> {
        let net = self.net;
        let n = net.bus_count();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        let push = |adj: &mut Vec<Vec<usize>>, k: usize| {
            let (a, b) = net.branch_ends(k);
            adj[a].push(b);
            adj[b].push(a);
        };
        for &k in &self.fixed_closed {
            push(&mut adj, k);
        }
        for (i, &k) in self.free.iter().enumerate() {
            if assign[i] != Some(false) {
                push(&mut adj, k);
            }
        }
        let is_dg: Vec<bool> = {
            let mut v = vec![false; n];
            for &d in &self.dgs {
                v[d] = true;
            }
            v
        };
        // claim[i]: first flooding DG to reach i; overlaps pool the DGs.
        let mut claim: Vec<Option<usize>> = vec![None; n];
        let mut pool = DisjointSet::new(n);
        for &d in &self.dgs {
            let mut stack = vec![d];
            claim[d] = Some(d);
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if self.no_energize[v] || (is_dg[v] && v != d) {
                        if is_dg[v] && v != d {
                            // adjacent rival: both can serve the frontier
                            pool.union(d, v);
                        }
                        continue;
                    }
                    match claim[v] {
                        Some(c) => {
                            if pool.find(c) != pool.find(d) {
                                pool.union(c, d);
                            }
                        }
                        None => {
                            claim[v] = Some(d);
                            stack.push(v);
                        }
                    }
                }
            }
        }
        // Stranded kept bus: no completion can reconnect it.
        for &i in &self.keep_served {
            claim[i]?;
        }
        let mut pool_cap: BTreeMap<usize, i64> = BTreeMap::new();
        for &d in &self.dgs {
            let cap = net.bus(d).dg.as_ref().expect("dg bus");
            *pool_cap.entry(pool.find(d)).or_default() += (cap.cap_p - self.extra[&d].p).max(0);
        }
        let mut pool_load: BTreeMap<usize, i64> = BTreeMap::new();
        for i in 0..n {
            if let Some(c) = claim[i] {
                *pool_load.entry(pool.find(c)).or_default() += self.weights[i] * net.bus(i).load_p;
            }
        }
        let total = if self.uniform_weights {
            pool_load
                .iter()
                .map(|(root, load)| (*load).min(pool_cap.get(root).copied().unwrap_or(0)))
                .sum()
        } else {
            pool_load.values().sum()
        };
        Some(total)
    }
}

/// Exact optimum restoration plan by complete branch-and-bound.
///
/// Maximizes weighted picked-up active load; among optima, the plan with
/// the fewest switch commands found first in canonical order wins, which
/// makes the result deterministic. Restoration grows the energized
/// islands and may rearrange dead sections, but never opens a conducting
/// branch of a live island: served load is kept, and invisible load fed
/// through unknown-state branches stays attached to the DG whose output
/// telemetry accounts for it.
pub fn scf_restore(
    net: &Network,
    inf: &InferenceResult,
    snap: &TelemetrySnapshot,
) -> Result<RestorationPlan, RestoreError> {
    scf_restore_with_options(net, inf, snap, RestoreOptions::default())
}

pub fn scf_restore_with_options(
    net: &Network,
    inf: &InferenceResult,
    snap: &TelemetrySnapshot,
    opts: RestoreOptions,
) -> Result<RestorationPlan, RestoreError> {
    let world = PlannerWorld::build(net, inf, snap);
    let nfree = world.free.len();
    if world.dgs.is_empty() {
        let mut plan = RestorationPlan::empty();
        plan.infeasible = true;
        return Ok(plan);
    }

    // One lexicographic integer score: weighted served load dominates,
    // fewer switch commands breaks ties.
    let big = nfree as i64 + 1;

    struct Search<'w, 'a> {
        world: &'w PlannerWorld<'a>,
        nodes: u64,
        cap: u64,
        big: i64,
        nfree: usize,
        best: Option<(i64, Vec<bool>)>,
    }

    impl Search<'_, '_> {
        fn dfs(&mut self, assign: &mut Vec<Option<bool>>, depth: usize) -> Result<(), RestoreError> {
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(RestoreError::SearchBudgetExceeded(self.nodes));
            }
            if self.world.partial_infeasible(assign) {
                return Ok(());
            }
            let Some(reachable) = self.world.bound(assign) else {
                return Ok(()); // a kept bus can no longer be reconnected
            };
            if let Some((best_score, _)) = &self.best {
                let committed = assign
                    .iter()
                    .zip(&self.world.current_closed)
                    .filter(|(a, c)| a.is_some_and(|v| v != **c))
                    .count();
                let bound = reachable * self.big + (self.nfree - committed) as i64;
                if bound <= *best_score {
                    return Ok(());
                }
            }
            if depth == assign.len() {
                let complete: Vec<bool> = assign.iter().map(|a| a.unwrap()).collect();
                if let Some((served, commands)) = self.world.evaluate_leaf(&complete) {
                    let score = served * self.big + (self.nfree - commands) as i64;
                    if self.best.as_ref().is_none_or(|(s, _)| score > *s) {
                        self.best = Some((score, complete));
                    }
                }
                return Ok(());
            }
            // Keep the current position first: the all-NoAction leaf is
            // reached first and acts as the initial incumbent.
            let current = self.world.current_closed[depth];
            for value in [current, !current] {
                assign[depth] = Some(value);
                self.dfs(assign, depth + 1)?;
            }
            assign[depth] = None;
            Ok(())
        }
    }

    let mut search = Search {
        world: &world,
        nodes: 0,
        cap: opts.node_cap,
        big,
        nfree,
        best: None,
    };
    // Seed the incumbent with a greedy feasible plan so bounding bites
    // from the first descent.
    let greedy = world.greedy_assignment();
    if let Some((served, commands)) = world.evaluate_leaf(&greedy) {
        let score = served * big + (nfree - commands) as i64;
        search.best = Some((score, greedy));
    }
    let mut assign = vec![None; nfree];
    search.dfs(&mut assign, 0)?;

    let Some((_, assignment)) = search.best else {
        // No assignment satisfies the constraints (e.g. the system is
        // already overloaded beyond its ratings). Command nothing.
        let mut plan = RestorationPlan::empty();
        plan.infeasible = true;
        return Ok(plan);
    };

    // Materialize the plan.
    let mut plan = RestorationPlan::empty();
    for (i, &k) in world.free.iter().enumerate() {
        if assignment[i] != world.current_closed[i] {
            let cmd = if assignment[i] {
                SwitchCmd::Close
            } else {
                SwitchCmd::Open
            };
            plan.switch_cmd.insert(net.branch(k).id.clone(), cmd);
        }
    }
    let mut ds = DisjointSet::new(net.bus_count());
    for &k in &world.edges(&assignment) {
        let (a, b) = net.branch_ends(k);
        ds.union(a, b);
    }
    let mut dg_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    for &d in &world.dgs {
        dg_of_root.insert(ds.find(d), d);
    }
    for i in 0..net.bus_count() {
        let root = ds.find(i);
        if let Some(&d) = dg_of_root.get(&root) {
            let bus = net.bus(i);
            plan.predicted_microgrid
                .insert(bus.id.clone(), net.bus(d).id.clone());
            if bus.load_p > 0 || bus.load_q > 0 {
                plan.pickup.insert(bus.id.clone());
            }
            plan.predicted_served.p += bus.load_p;
            plan.predicted_served.q += bus.load_q;
        }
    }
    plan.infeasible = world.dgs.is_empty();
    Ok(plan)
}

/// Spanning-tree-search baseline: no topology speculation. Treats every
/// unknown branch as closable, grows breadth-first trees from each DG over
/// branches not known to be faulted, and picks up every reached load with
/// no capacity check.
pub fn sts_restore(net: &Network, snap: &TelemetrySnapshot) -> RestorationPlan {
    let n = net.bus_count();
    let mut claimed: Vec<Option<usize>> = vec![None; n]; // claiming DG
    let mut tree_edge: Vec<Option<usize>> = vec![None; n];
    let mut dgs: Vec<usize> = net
        .dg_buses()
        .iter()
        .copied()
        .filter(|&d| snap.dg_output.contains_key(&net.bus(d).id))
        .collect();
    dgs.sort_by(|&a, &b| net.bus(a).id.cmp(&net.bus(b).id));
    let mut queue = std::collections::VecDeque::new();
    for &d in &dgs {
        claimed[d] = Some(d);
        queue.push_back(d);
    }
    while let Some(u) = queue.pop_front() {
        for &k in net.incident(u) {
            if snap.faulted_known.contains(&net.branch(k).id) {
                continue;
            }
            let (a, b) = net.branch_ends(k);
            let v = if a == u { b } else { a };
            if claimed[v].is_none() {
                claimed[v] = claimed[u];
                tree_edge[v] = Some(k);
                queue.push_back(v);
            }
        }
    }

    let mut plan = RestorationPlan::empty();
    let mut in_tree = vec![false; net.branch_count()];
    for v in 0..n {
        if let Some(k) = tree_edge[v] {
            in_tree[k] = true;
        }
    }
    for k in 0..net.branch_count() {
        let br = net.branch(k);
        let (a, b) = net.branch_ends(k);
        let reached = claimed[a].is_some() && claimed[b].is_some();
        if !reached || snap.faulted_known.contains(&br.id) {
            continue;
        }
        if in_tree[k] {
            if snap.branch(&br.id) != SwitchState::Closed {
                plan.switch_cmd.insert(br.id.clone(), SwitchCmd::Close);
            }
        } else if snap.branch(&br.id) != SwitchState::Open {
            plan.switch_cmd.insert(br.id.clone(), SwitchCmd::Open);
        }
    }
    for v in 0..n {
        if let Some(d) = claimed[v] {
            let bus = net.bus(v);
            plan.predicted_microgrid
                .insert(bus.id.clone(), net.bus(d).id.clone());
            if bus.load_p > 0 || bus.load_q > 0 {
                plan.pickup.insert(bus.id.clone());
            }
            plan.predicted_served.p += bus.load_p;
            plan.predicted_served.q += bus.load_q;
        }
    }
    plan
}

/// Do-nothing baseline: every switch holds, pickup is what the operation
/// center believes is served right now.
pub fn noop_restore(
    net: &Network,
    snap: &TelemetrySnapshot,
    inf: Option<&InferenceResult>,
) -> RestorationPlan {
    let mut plan = RestorationPlan::empty();
    // Believed conducting edges, with inference overlay when available.
    let state_of = |id: &str| match inf {
        Some(inf) => effective_branch_state(snap, inf, id),
        None => snap.branch(id),
    };
    let bus_state_of = |id: &str| match inf {
        Some(inf) => effective_bus_state(snap, inf, id),
        None => snap.bus(id),
    };
    let mut ds = DisjointSet::new(net.bus_count());
    for k in 0..net.branch_count() {
        if state_of(&net.branch(k).id) == SwitchState::Closed {
            let (a, b) = net.branch_ends(k);
            ds.union(a, b);
        }
    }
    let mut dg_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    for &d in net.dg_buses() {
        if snap.dg_output.contains_key(&net.bus(d).id) {
            dg_of_root.insert(ds.find(d), d);
        }
    }
    for i in 0..net.bus_count() {
        let bus = net.bus(i);
        if bus_state_of(&bus.id) != BusState::Electrified {
            continue;
        }
        if let Some(&d) = dg_of_root.get(&ds.find(i)) {
            plan.predicted_microgrid
                .insert(bus.id.clone(), net.bus(d).id.clone());
            if bus.load_p > 0 || bus.load_q > 0 {
                plan.pickup.insert(bus.id.clone());
            }
            plan.predicted_served.p += bus.load_p;
            plan.predicted_served.q += bus.load_q;
        }
    }
    plan
}

/// Replay a plan against ground truth: apply what is physically
/// actuatable, re-energize, trip overloads to a fixpoint, and report the
/// actually served totals together with every violation. Never fails;
/// all failures are report entries.
pub fn evaluate(
    net: &Network,
    ground: &crate::truthsim::ActualStates,
    plan: &RestorationPlan,
) -> ServedReport {
    let mut violations = Vec::new();
    let mut st = ground.clone();

    let energized_set = |st: &crate::truthsim::ActualStates| -> Vec<bool> {
        let mut ds = DisjointSet::new(net.bus_count());
        for k in 0..net.branch_count() {
            if st.conducting(net, k) {
                let (a, b) = net.branch_ends(k);
                ds.union(a, b);
            }
        }
        let mut dg_roots = BTreeSet::new();
        for &d in net.dg_buses() {
            if !st.offline_dgs.contains(&net.bus(d).id) {
                dg_roots.insert(ds.find(d));
            }
        }
        (0..net.bus_count())
            .map(|i| dg_roots.contains(&ds.find(i)))
            .collect()
    };
    let pre_energized = energized_set(ground);

    for (id, cmd) in &plan.switch_cmd {
        let Some(k) = net.branch_idx(id) else {
            violations.push(format!("command on unknown branch id {id}"));
            continue;
        };
        let br = net.branch(k);
        let actuatable = br.switchable && net.bus(net.ctrl_bus(k)).ftu_online;
        if !actuatable {
            violations.push(format!("uncontrollable branch commanded: {id}"));
            continue;
        }
        st.closed.insert(id.clone(), *cmd == SwitchCmd::Close);
    }

    // Lenient energization: islands with loops or several DGs are
    // de-energized (protection clears them) and reported.
    let mut tripped = Vec::new();
    let (served_p, served_q) = loop {
        let mut ds = DisjointSet::new(net.bus_count());
        let mut cycle_roots = BTreeSet::new();
        for k in 0..net.branch_count() {
            if st.conducting(net, k) {
                let (a, b) = net.branch_ends(k);
                if !ds.union(a, b) {
                    cycle_roots.insert(ds.find(a));
                }
            }
        }
        let cycle_roots: BTreeSet<usize> = cycle_roots.iter().map(|&r| ds.find(r)).collect();
        let mut dgs_of_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &d in net.dg_buses() {
            if !st.offline_dgs.contains(&net.bus(d).id) {
                dgs_of_root.entry(ds.find(d)).or_default().push(d);
            }
        }
        let mut valid_root_dg: BTreeMap<usize, usize> = BTreeMap::new();
        for (root, dgs) in &dgs_of_root {
            if dgs.len() > 1 {
                let names: Vec<_> = dgs.iter().map(|&d| net.bus(d).id.clone()).collect();
                let v = format!("multiple DGs in one island: {}", names.join(", "));
                if !violations.contains(&v) {
                    violations.push(v);
                }
                continue;
            }
            if cycle_roots.contains(root) {
                let v = format!(
                    "cycle formed in island of DG {}",
                    net.bus(dgs[0]).id.clone()
                );
                if !violations.contains(&v) {
                    violations.push(v);
                }
                continue;
            }
            valid_root_dg.insert(*root, dgs[0]);
        }
        let mut dg_served: BTreeMap<usize, Flow> = BTreeMap::new();
        for i in 0..net.bus_count() {
            let bus = net.bus(i);
            if st.shed.contains(&bus.id) {
                continue;
            }
            if let Some(&d) = valid_root_dg.get(&ds.find(i)) {
                let e = dg_served.entry(d).or_default();
                e.p += bus.load_p;
                e.q += bus.load_q;
            }
        }
        let mut newly_tripped = Vec::new();
        for (&d, served) in &dg_served {
            let cap = net.bus(d).dg.as_ref().expect("dg bus");
            if served.p > cap.cap_p {
                newly_tripped.push(net.bus(d).id.clone());
            }
        }
        newly_tripped.sort();
        if newly_tripped.is_empty() {
            let p = dg_served.values().map(|f| f.p).sum();
            let q = dg_served.values().map(|f| f.q).sum();
            break (p, q);
        }
        for dg in newly_tripped {
            st.offline_dgs.insert(dg.clone());
            tripped.push(dg);
        }
    };

    let post_energized = energized_set(&st);
    for i in 0..net.bus_count() {
        let bus = net.bus(i);
        if !bus.ftu_online && !pre_energized[i] && post_energized[i] {
            violations.push(format!("no-energize bus energized: {}", bus.id));
        }
    }

    ServedReport {
        served_p,
        served_q,
        tripped_dgs: tripped,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::infer_states;
    use crate::netmodel::{load_scenario, Scenario};
    use crate::truthsim::{snapshot, ActualStates};

    /// dg(cap configurable) - s1 - a(300) - s2 - b(400), fully observable,
    /// a and b initially dead (s1, s2 open).
    fn chain_scenario(cap: i64) -> Scenario {
        load_scenario(&format!(
            r#"
description = "chain pickup"
probe_magnitude_default = 10

[[buses]]
id = "g"
load_p = 0
load_q = 0
dg = {{ cap_p = {cap}, cap_q = 1000 }}

[[buses]]
id = "a"
load_p = 300
load_q = 100

[[buses]]
id = "b"
load_p = 400
load_q = 150

[[branches]]
id = "s1"
from = "g"
to = "a"
ctrl_bus = "g"
initial_closed = false

[[branches]]
id = "s2"
from = "a"
to = "b"
ctrl_bus = "a"
initial_closed = false
"#
        ))
        .unwrap()
    }

    fn infer_all(s: &Scenario, st: &ActualStates) -> (crate::truthsim::TelemetrySnapshot, InferenceResult) {
        let snap = snapshot(&s.network, st).unwrap();
        let inf = infer_states(&s.network, &snap, None, s.probe_magnitude_default).unwrap();
        (snap, inf)
    }

    #[test]
    fn chain_cap_500_serves_only_first_load() {
        let s = chain_scenario(500);
        let st = ActualStates::initial(&s);
        let (snap, inf) = infer_all(&s, &st);
        let plan = scf_restore(&s.network, &inf, &snap).unwrap();
        // b's 400 is only reachable through a's 300; 700 > 500, so only a.
        assert_eq!(plan.predicted_served.p, 300);
        assert_eq!(plan.command("s1"), Some(SwitchCmd::Close));
        assert_eq!(plan.command("s2"), None);
        let report = evaluate(&s.network, &st, &plan);
        assert_eq!(report.served_p, 300);
        assert!(report.violations.is_empty());
        assert!(report.tripped_dgs.is_empty());
    }

    #[test]
    fn chain_cap_750_serves_both() {
        let s = chain_scenario(750);
        let st = ActualStates::initial(&s);
        let (snap, inf) = infer_all(&s, &st);
        let plan = scf_restore(&s.network, &inf, &snap).unwrap();
        assert_eq!(plan.predicted_served.p, 700);
        assert_eq!(plan.command("s1"), Some(SwitchCmd::Close));
        assert_eq!(plan.command("s2"), Some(SwitchCmd::Close));
        let report = evaluate(&s.network, &st, &plan);
        assert_eq!(report.served_p, 700);
    }

    #[test]
    fn noop_keeps_current_service() {
        let mut s = chain_scenario(750);
        // start with s1 closed: a is served
        let def = {
            let mut def = s.network.into_def();
            def.branches[0].initial_closed = true;
            def
        };
        s.network = crate::netmodel::Network::new(def).unwrap();
        let st = ActualStates::initial(&s);
        let (snap, inf) = infer_all(&s, &st);
        let plan = noop_restore(&s.network, &snap, Some(&inf));
        assert!(plan.switch_cmd.is_empty());
        assert_eq!(plan.predicted_served.p, 300);
        assert!(plan.pickup.contains("a"));
        let report = evaluate(&s.network, &st, &plan);
        assert_eq!(report.served_p, 300);
    }

    #[test]
    fn scf_never_drops_served_load() {
        // a served now; b worth more but only reachable through the same
        // capacity. The plan must keep a even though b alone scores higher.
        let s = load_scenario(
            r#"
description = "keep served"
probe_magnitude_default = 10

[[buses]]
id = "g"
load_p = 0
load_q = 0
dg = { cap_p = 450, cap_q = 450 }

[[buses]]
id = "a"
load_p = 300
load_q = 100

[[buses]]
id = "b"
load_p = 400
load_q = 150

[[branches]]
id = "s1"
from = "g"
to = "a"
ctrl_bus = "g"
initial_closed = true

[[branches]]
id = "s2"
from = "g"
to = "b"
ctrl_bus = "g"
initial_closed = false
"#,
        )
        .unwrap();
        let st = ActualStates::initial(&s);
        let (snap, inf) = infer_all(&s, &st);
        let plan = scf_restore(&s.network, &inf, &snap).unwrap();
        assert_eq!(plan.predicted_served.p, 300);
        assert!(plan.switch_cmd.is_empty());
    }

    #[test]
    fn weights_steer_the_pickup_choice() {
        // Capacity admits one of two dead loads. Raw kW favors a (80 vs
        // 60), but b carries a critical-load weight and wins.
        let s = load_scenario(
            r#"
description = "critical load priority"
probe_magnitude_default = 10

[[buses]]
id = "g"
load_p = 0
load_q = 0
dg = { cap_p = 100, cap_q = 100 }

[[buses]]
id = "a"
load_p = 80
load_q = 30

[[buses]]
id = "b"
load_p = 60
load_q = 20
weight = 10

[[branches]]
id = "s-a"
from = "g"
to = "a"
ctrl_bus = "g"
initial_closed = false

[[branches]]
id = "s-b"
from = "g"
to = "b"
ctrl_bus = "g"
initial_closed = false
"#,
        )
        .unwrap();
        let st = ActualStates::initial(&s);
        let (snap, inf) = infer_all(&s, &st);
        let plan = scf_restore(&s.network, &inf, &snap).unwrap();
        assert_eq!(plan.command("s-b"), Some(SwitchCmd::Close));
        assert_eq!(plan.command("s-a"), None);
        assert_eq!(plan.predicted_served.p, 60);
        let report = evaluate(&s.network, &st, &plan);
        assert_eq!(report.served_p, 60);
    }

    #[test]
    fn sts_picks_up_everything_reachable() {
        let s = chain_scenario(500);
        let st = ActualStates::initial(&s);
        let snap = snapshot(&s.network, &st).unwrap();
        let plan = sts_restore(&s.network, &snap);
        assert_eq!(plan.predicted_served.p, 700);
        assert_eq!(plan.command("s1"), Some(SwitchCmd::Close));
        assert_eq!(plan.command("s2"), Some(SwitchCmd::Close));
        // evaluation trips the DG: 700 > 500
        let report = evaluate(&s.network, &st, &plan);
        assert_eq!(report.tripped_dgs, vec!["g".to_string()]);
        assert_eq!(report.served_p, 0);
    }

    #[test]
    fn sts_no_dgs_is_empty() {
        let s = chain_scenario(500);
        let mut st = ActualStates::initial(&s);
        st.offline_dgs.insert("g".into());
        let snap = snapshot(&s.network, &st).unwrap();
        let plan = sts_restore(&s.network, &snap);
        assert!(plan.switch_cmd.is_empty());
        assert!(plan.pickup.is_empty());
        assert_eq!(plan.predicted_served.p, 0);
    }

    #[test]
    fn evaluate_reports_uncontrollable_commands() {
        let s = load_scenario(
            r#"
description = "dark switch"
probe_magnitude_default = 10

[[buses]]
id = "g"
load_p = 0
load_q = 0
dg = { cap_p = 100, cap_q = 100 }

[[buses]]
id = "a"
load_p = 10
load_q = 5
ftu_online = false

[[branches]]
id = "s1"
from = "g"
to = "a"
ctrl_bus = "a"
initial_closed = false
"#,
        )
        .unwrap();
        let st = ActualStates::initial(&s);
        let mut plan = RestorationPlan::empty();
        plan.switch_cmd.insert("s1".into(), SwitchCmd::Close);
        let report = evaluate(&s.network, &st, &plan);
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("uncontrollable branch commanded: s1")));
        assert_eq!(report.served_p, 0);
    }

    #[test]
    fn evaluate_reports_cycles_and_no_energize() {
        let s = load_scenario(
            r#"
description = "loop and dark bus"
probe_magnitude_default = 10

[[buses]]
id = "g"
load_p = 0
load_q = 0
dg = { cap_p = 100, cap_q = 100 }

[[buses]]
id = "a"
load_p = 10
load_q = 5

[[buses]]
id = "b"
load_p = 10
load_q = 5
ftu_online = false

[[branches]]
id = "g-a"
from = "g"
to = "a"
ctrl_bus = "g"
initial_closed = true

[[branches]]
id = "a-b"
from = "a"
to = "b"
ctrl_bus = "a"
initial_closed = false

[[branches]]
id = "b-g"
from = "b"
to = "g"
ctrl_bus = "g"
initial_closed = false
"#,
        )
        .unwrap();
        let st = ActualStates::initial(&s);
        let mut plan = RestorationPlan::empty();
        plan.switch_cmd.insert("a-b".into(), SwitchCmd::Close);
        plan.switch_cmd.insert("b-g".into(), SwitchCmd::Close);
        let report = evaluate(&s.network, &st, &plan);
        assert!(report.violations.iter().any(|v| v.contains("cycle formed")));
        // the island de-energizes, so b never counts as energized
        assert_eq!(report.served_p, 0);

        // closing only a-b energizes dark b: no-energize violation
        let mut plan2 = RestorationPlan::empty();
        plan2.switch_cmd.insert("a-b".into(), SwitchCmd::Close);
        let report2 = evaluate(&s.network, &st, &plan2);
        assert!(report2
            .violations
            .iter()
            .any(|v| v.contains("no-energize bus energized: b")));
    }

    #[test]
    fn search_budget_is_enforced() {
        let s = chain_scenario(750);
        let st = ActualStates::initial(&s);
        let (snap, inf) = infer_all(&s, &st);
        match scf_restore_with_options(&s.network, &inf, &snap, RestoreOptions { node_cap: 2 }) {
            Err(RestoreError::SearchBudgetExceeded(_)) => {}
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn all_locked_dead_system_yields_empty_plan() {
        // single DG offline: nothing to serve, nothing to command
        let s = chain_scenario(500);
        let mut st = ActualStates::initial(&s);
        st.offline_dgs.insert("g".into());
        let snap = snapshot(&s.network, &st).unwrap();
        let inf = infer_states(&s.network, &snap, None, 10).unwrap();
        let plan = scf_restore(&s.network, &inf, &snap).unwrap();
        assert!(plan.switch_cmd.is_empty());
        assert_eq!(plan.predicted_served.p, 0);
        assert!(plan.infeasible);
    }
}
