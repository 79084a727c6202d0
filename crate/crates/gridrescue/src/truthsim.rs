//! Ground-truth simulator: energization, lossless radial flows, telemetry
//! masking, disturbance probes, and DG overload trips.
//!
//! The flow model is lossless single-phase-equivalent: a branch carries
//! exactly the served load of the subtree behind it. That keeps every
//! balance integer-exact, which the inference rules and the consistency
//! oracle rely on.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::netmodel::{Network, Scenario};

/// Physical switch positions plus load/DG availability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActualStates {
    /// Physical switch position per branch id. Faulted branches never
    /// conduct regardless of this value.
    pub closed: BTreeMap<String, bool>,
    /// Buses whose local load switch is open (load disconnected).
    pub shed: BTreeSet<String>,
    /// DGs that have exited operation (e.g. after an overload trip).
    pub offline_dgs: BTreeSet<String>,
}

impl ActualStates {
    /// The scenario's as-found state: switches at `initial_closed`,
    /// nothing shed, every DG running.
    pub fn initial(scenario: &Scenario) -> Self {
        let closed = scenario
            .network
            .branches()
            .iter()
            .map(|b| (b.id.clone(), b.initial_closed))
            .collect();
        ActualStates {
            closed,
            shed: BTreeSet::new(),
            offline_dgs: BTreeSet::new(),
        }
    }

    /// Whether a branch actually conducts.
    pub fn conducting(&self, net: &Network, branch: usize) -> bool {
        let b = net.branch(branch);
        !b.faulted && self.closed.get(&b.id).copied().unwrap_or(false)
    }
}

/// Connected components of the conducting graph and their energization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Electrification {
    /// Component index per bus id.
    pub component: BTreeMap<String, usize>,
    pub energized: BTreeMap<usize, bool>,
    /// The unique running DG of each energized component; None when dead.
    pub root_dg: BTreeMap<usize, Option<String>>,
}

impl Electrification {
    pub fn is_energized(&self, bus: &str) -> bool {
        self.component
            .get(bus)
            .map(|c| self.energized[c])
            .unwrap_or(false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Flow {
    pub p: i64,
    pub q: i64,
}

/// Exact branch-end and DG power flows for one physical state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSolution {
    /// Signed flow per (branch id, end bus id): injection into that bus is
    /// positive. Dead branches carry no entry (zero).
    pub branch_flow: BTreeMap<(String, String), Flow>,
    /// Output per running DG bus id.
    pub dg_output: BTreeMap<String, Flow>,
}

impl FlowSolution {
    pub fn end_flow(&self, branch: &str, bus: &str) -> Flow {
        self.branch_flow
            .get(&(branch.to_string(), bus.to_string()))
            .copied()
            .unwrap_or_default()
    }

    pub fn total_served(&self) -> Flow {
        let mut t = Flow::default();
        for f in self.dg_output.values() {
            t.p += f.p;
            t.q += f.q;
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BusState {
    Electrified,
    Unpowered,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SwitchState {
    Closed,
    Open,
    Unknown,
}

/// The operation center's partial view of the system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TelemetrySnapshot {
    /// Ternary bus state; Unknown exactly when the bus FTU is offline.
    pub bus_state: BTreeMap<String, BusState>,
    /// Ternary switch state; Unknown exactly when the controlling FTU is offline.
    pub branch_state: BTreeMap<String, SwitchState>,
    /// Branch-end flows for ends whose bus FTU is online (zeros included).
    pub flows: BTreeMap<(String, String), Flow>,
    /// Output of every running DG. Generation telemetry rides its own
    /// channel and survives FTU outages.
    pub dg_output: BTreeMap<String, Flow>,
    /// Faults the operation center knows about: protection trip reports
    /// reach it whenever any endpoint or the controlling FTU is online.
    pub faulted_known: BTreeSet<String>,
}

impl TelemetrySnapshot {
    pub fn branch(&self, id: &str) -> SwitchState {
        self.branch_state.get(id).copied().unwrap_or(SwitchState::Unknown)
    }

    pub fn bus(&self, id: &str) -> BusState {
        self.bus_state.get(id).copied().unwrap_or(BusState::Unknown)
    }

    pub fn unknown_branches(&self) -> impl Iterator<Item = &String> {
        self.branch_state
            .iter()
            .filter(|(_, s)| **s == SwitchState::Unknown)
            .map(|(id, _)| id)
    }
}

/// Result of one disturbance probe: DG outputs before and after a brief
/// load change at one bus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeResult {
    pub bus: String,
    /// Served-load change, kW: cut-off negative, pickup positive.
    pub delta_p: i64,
    pub dg_before: BTreeMap<String, i64>,
    pub dg_after: BTreeMap<String, i64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("energized component {component} contains a cycle (branch {branch})")]
    CyclicEnergizedComponent { component: usize, branch: String },
    #[error("energized component {component} contains multiple DGs: {dgs:?}")]
    MultiDgComponent { component: usize, dgs: Vec<String> },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProbeError {
    #[error("probe not allowed at bus {0}")]
    ProbeNotAllowed(String),
    #[error("bus {0} is not electrified")]
    BusNotElectrified(String),
    #[error("probe refused: {0}")]
    Refused(String),
}

fn components(net: &Network, st: &ActualStates) -> (Vec<usize>, usize) {
    let n = net.bus_count();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = next;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &k in net.incident(u) {
                if !st.conducting(net, k) {
                    continue;
                }
                let (a, b) = net.branch_ends(k);
                let v = if a == u { b } else { a };
                if comp[v] == usize::MAX {
                    comp[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    (comp, next)
}

fn running_dg(net: &Network, st: &ActualStates, bus: usize) -> bool {
    net.bus(bus).dg.is_some() && !st.offline_dgs.contains(&net.bus(bus).id)
}

/// Compute conducting components and their energization.
///
/// Ground truth is required to be radial with a single DG per energized
/// component; violations are errors, not states.
pub fn energize(net: &Network, st: &ActualStates) -> Result<Electrification, SimError> {
    let (comp, count) = components(net, st);
    let mut dgs_per_comp: Vec<Vec<usize>> = vec![Vec::new(); count];
    for &d in net.dg_buses() {
        if running_dg(net, st, d) {
            dgs_per_comp[comp[d]].push(d);
        }
    }
    // Cycle check per energized component: edges >= buses means a cycle.
    let mut bus_cnt = vec![0usize; count];
    let mut edge_cnt = vec![0usize; count];
    let mut witness = vec![None; count];
    for i in 0..net.bus_count() {
        bus_cnt[comp[i]] += 1;
    }
    for k in 0..net.branch_count() {
        if st.conducting(net, k) {
            let c = comp[net.branch_ends(k).0];
            edge_cnt[c] += 1;
            witness[c] = Some(k);
        }
    }
    for c in 0..count {
        if dgs_per_comp[c].is_empty() {
            continue;
        }
        if dgs_per_comp[c].len() > 1 {
            return Err(SimError::MultiDgComponent {
                component: c,
                dgs: dgs_per_comp[c]
                    .iter()
                    .map(|&d| net.bus(d).id.clone())
                    .collect(),
            });
        }
        if edge_cnt[c] >= bus_cnt[c] {
            return Err(SimError::CyclicEnergizedComponent {
                component: c,
                branch: net.branch(witness[c].expect("cyclic component has an edge")).id.clone(),
            });
        }
    }
    let component = (0..net.bus_count())
        .map(|i| (net.bus(i).id.clone(), comp[i]))
        .collect();
    let energized = (0..count).map(|c| (c, !dgs_per_comp[c].is_empty())).collect();
    let root_dg = (0..count)
        .map(|c| {
            (
                c,
                dgs_per_comp[c].first().map(|&d| net.bus(d).id.clone()),
            )
        })
        .collect();
    Ok(Electrification {
        component,
        energized,
        root_dg,
    })
}

fn served_p_q(net: &Network, st: &ActualStates, bus: usize, probe: Option<(usize, i64)>) -> Flow {
    let b = net.bus(bus);
    let mut f = if st.shed.contains(&b.id) {
        Flow::default()
    } else {
        Flow {
            p: b.load_p,
            q: b.load_q,
        }
    };
    if let Some((pb, delta)) = probe {
        if pb == bus {
            f.p += delta;
        }
    }
    f
}

fn solve_flows_inner(
    net: &Network,
    st: &ActualStates,
    el: &Electrification,
    probe: Option<(usize, i64)>,
) -> FlowSolution {
    let mut branch_flow = BTreeMap::new();
    let mut dg_output = BTreeMap::new();
    for (&comp, root) in el.root_dg.iter() {
        let Some(root_id) = root else { continue };
        if !el.energized[&comp] {
            continue;
        }
        let root_idx = net.bus_idx(root_id).expect("root exists");
        // Post-order accumulation over the component tree rooted at the DG.
        let mut parent_edge: BTreeMap<usize, usize> = BTreeMap::new();
        let mut order = Vec::new();
        let mut stack = vec![root_idx];
        let mut seen = BTreeSet::new();
        seen.insert(root_idx);
        while let Some(u) = stack.pop() {
            order.push(u);
            for &k in net.incident(u) {
                if !st.conducting(net, k) {
                    continue;
                }
                let (a, b) = net.branch_ends(k);
                let v = if a == u { b } else { a };
                if seen.insert(v) {
                    parent_edge.insert(v, k);
                    stack.push(v);
                }
            }
        }
        let mut subtree: BTreeMap<usize, Flow> = BTreeMap::new();
        for &u in order.iter().rev() {
            let mut acc = served_p_q(net, st, u, probe);
            for &k in net.incident(u) {
                if !st.conducting(net, k) {
                    continue;
                }
                let (a, b) = net.branch_ends(k);
                let v = if a == u { b } else { a };
                if parent_edge.get(&v) == Some(&k) {
                    let s = subtree[&v];
                    acc.p += s.p;
                    acc.q += s.q;
                }
            }
            subtree.insert(u, acc);
            if let Some(&k) = parent_edge.get(&u) {
                let br = net.branch(k);
                let (a, b) = net.branch_ends(k);
                let up = if a == u { b } else { a };
                branch_flow.insert((br.id.clone(), net.bus(u).id.clone()), acc);
                branch_flow.insert(
                    (br.id.clone(), net.bus(up).id.clone()),
                    Flow { p: -acc.p, q: -acc.q },
                );
            }
        }
        dg_output.insert(root_id.clone(), subtree[&root_idx]);
    }
    FlowSolution {
        branch_flow,
        dg_output,
    }
}

/// Exact lossless flows for a radial electrification: every branch carries
/// the served load of the subtree behind it, and each DG outputs its
/// component's served total.
pub fn solve_flows(net: &Network, st: &ActualStates, el: &Electrification) -> FlowSolution {
    solve_flows_inner(net, st, el, None)
}

/// Mask ground truth down to what the operation center can see.
///
/// Pure projection: bus states are visible through the bus's own FTU,
/// branch states through the controlling FTU, branch-end flows through
/// the FTU at that end. DG output telemetry is always available.
pub fn observe(
    net: &Network,
    st: &ActualStates,
    el: &Electrification,
    flows: &FlowSolution,
) -> TelemetrySnapshot {
    let mut bus_state = BTreeMap::new();
    for b in net.buses() {
        let s = if !b.ftu_online {
            BusState::Unknown
        } else if el.is_energized(&b.id) {
            BusState::Electrified
        } else {
            BusState::Unpowered
        };
        bus_state.insert(b.id.clone(), s);
    }
    let mut branch_state = BTreeMap::new();
    let mut flow_view = BTreeMap::new();
    let mut faulted_known = BTreeSet::new();
    for k in 0..net.branch_count() {
        let br = net.branch(k);
        let state = if !net.branch_observable(k) {
            SwitchState::Unknown
        } else if st.conducting(net, k) {
            SwitchState::Closed
        } else {
            SwitchState::Open
        };
        branch_state.insert(br.id.clone(), state);
        let (a, b) = net.branch_ends(k);
        for end in [a, b] {
            if net.bus(end).ftu_online {
                let id = net.bus(end).id.clone();
                flow_view.insert((br.id.clone(), id.clone()), flows.end_flow(&br.id, &id));
            }
        }
        let any_ftu = net.bus(a).ftu_online || net.bus(b).ftu_online || net.branch_observable(k);
        if br.faulted && any_ftu {
            faulted_known.insert(br.id.clone());
        }
    }
    TelemetrySnapshot {
        bus_state,
        branch_state,
        flows: flow_view,
        dg_output: flows.dg_output.clone(),
        faulted_known,
    }
}

/// Energize + solve + observe in one step.
pub fn snapshot(net: &Network, st: &ActualStates) -> Result<TelemetrySnapshot, SimError> {
    let el = energize(net, st)?;
    let flows = solve_flows(net, st, &el);
    Ok(observe(net, st, &el, &flows))
}

/// Briefly change the served load at one bus and report DG outputs before
/// and after. Ground truth is restored afterwards; the probe only returns
/// measurements.
pub fn apply_probe(
    net: &Network,
    st: &ActualStates,
    bus: &str,
    delta_p: i64,
) -> Result<ProbeResult, ProbeError> {
    let Some(idx) = net.bus_idx(bus) else {
        return Err(ProbeError::Refused(format!("unknown bus {bus}")));
    };
    let b = net.bus(idx);
    if !b.ftu_online || !b.probe_allowed {
        return Err(ProbeError::ProbeNotAllowed(bus.to_string()));
    }
    let el = energize(net, st).map_err(|e| ProbeError::Refused(e.to_string()))?;
    if !el.is_energized(bus) {
        return Err(ProbeError::BusNotElectrified(bus.to_string()));
    }
    let served_now = if st.shed.contains(bus) { 0 } else { b.load_p };
    if delta_p < 0 && -delta_p > served_now {
        return Err(ProbeError::ProbeNotAllowed(format!(
            "cut-off of {} kW exceeds served load {} kW at {bus}",
            -delta_p, served_now
        )));
    }
    if delta_p > 0 && served_now + delta_p > b.load_p {
        return Err(ProbeError::ProbeNotAllowed(format!(
            "pickup of {} kW exceeds interruptible load at {bus}",
            delta_p
        )));
    }
    let before = solve_flows(net, st, &el);
    let after = solve_flows_inner(net, st, &el, Some((idx, delta_p)));
    let dg_before = before.dg_output.iter().map(|(k, f)| (k.clone(), f.p)).collect();
    let dg_after = after.dg_output.iter().map(|(k, f)| (k.clone(), f.p)).collect();
    Ok(ProbeResult {
        bus: bus.to_string(),
        delta_p,
        dg_before,
        dg_after,
    })
}

/// Trip every DG whose served active load exceeds its capacity, iterating
/// to a fixpoint. Tripped components de-energize entirely.
///
/// The boundary is feasible: a DG serving exactly its rating stays up.
pub fn trip_overloads(
    net: &Network,
    st: &ActualStates,
) -> Result<(ActualStates, Vec<String>), SimError> {
    let mut cur = st.clone();
    let mut log = Vec::new();
    loop {
        let el = energize(net, &cur)?;
        let flows = solve_flows(net, &cur, &el);
        let mut tripped = Vec::new();
        for (dg, out) in &flows.dg_output {
            let cap = net
                .bus(net.bus_idx(dg).expect("dg exists"))
                .dg
                .as_ref()
                .expect("dg spec")
                .cap_p;
            if out.p > cap {
                tripped.push(dg.clone());
            }
        }
        if tripped.is_empty() {
            return Ok((cur, log));
        }
        for dg in tripped {
            cur.offline_dgs.insert(dg.clone());
            log.push(dg);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{load_scenario, Scenario};

    /// chain: g(dg) - a - b, loads 0/100/200
    fn chain() -> Scenario {
        load_scenario(
            r#"
description = "chain"
probe_magnitude_default = 500

[[buses]]
id = "g"
load_p = 0
load_q = 0
dg = { cap_p = 500, cap_q = 250 }

[[buses]]
id = "a"
load_p = 100
load_q = 50

[[buses]]
id = "b"
load_p = 200
load_q = 100

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
initial_closed = true
"#,
        )
        .unwrap()
    }

    fn square() -> Scenario {
        load_scenario(
            r#"
description = "square loop"
probe_magnitude_default = 10

[[buses]]
id = "g"
load_p = 0
load_q = 0
dg = { cap_p = 100, cap_q = 50 }

[[buses]]
id = "a"
load_p = 10
load_q = 5

[[buses]]
id = "b"
load_p = 10
load_q = 5

[[buses]]
id = "c"
load_p = 10
load_q = 5

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
initial_closed = true

[[branches]]
id = "b-c"
from = "b"
to = "c"
ctrl_bus = "b"
initial_closed = true

[[branches]]
id = "c-g"
from = "c"
to = "g"
ctrl_bus = "c"
initial_closed = true
"#,
        )
        .unwrap()
    }

    #[test]
    fn chain_energizes_as_one_component() {
        let s = chain();
        let st = ActualStates::initial(&s);
        let el = energize(&s.network, &st).unwrap();
        assert!(el.is_energized("b"));
        assert_eq!(el.component["g"], el.component["b"]);
        assert_eq!(el.root_dg[&el.component["g"]], Some("g".to_string()));
    }

    #[test]
    fn open_middle_branch_splits_energization() {
        let s = chain();
        let mut st = ActualStates::initial(&s);
        st.closed.insert("a-b".into(), false);
        let el = energize(&s.network, &st).unwrap();
        assert!(el.is_energized("a"));
        assert!(!el.is_energized("b"));
    }

    #[test]
    fn energized_cycle_is_an_error() {
        let s = square();
        let st = ActualStates::initial(&s);
        match energize(&s.network, &st) {
            Err(SimError::CyclicEnergizedComponent { .. }) => {}
            other => panic!("expected cycle error, got {other:?}"),
        }
    }

    #[test]
    fn dead_cycle_is_fine() {
        let s = square();
        let mut st = ActualStates::initial(&s);
        // Cut the loop off the DG; the remaining a-b-c triangle is dead.
        st.closed.insert("g-a".into(), false);
        st.closed.insert("c-g".into(), false);
        assert!(energize(&s.network, &st).is_ok());
    }

    #[test]
    fn chain_flows_aggregate_downstream_loads() {
        let s = chain();
        let st = ActualStates::initial(&s);
        let el = energize(&s.network, &st).unwrap();
        let flows = solve_flows(&s.network, &st, &el);
        assert_eq!(flows.end_flow("g-a", "a"), Flow { p: 300, q: 150 });
        assert_eq!(flows.end_flow("a-b", "b"), Flow { p: 200, q: 100 });
        assert_eq!(flows.end_flow("g-a", "g"), Flow { p: -300, q: -150 });
        assert_eq!(flows.dg_output["g"], Flow { p: 300, q: 150 });
    }

    #[test]
    fn shed_load_carries_no_flow() {
        let s = chain();
        let mut st = ActualStates::initial(&s);
        st.shed.insert("b".into());
        let el = energize(&s.network, &st).unwrap();
        let flows = solve_flows(&s.network, &st, &el);
        assert_eq!(flows.end_flow("a-b", "b"), Flow { p: 0, q: 0 });
        assert_eq!(flows.dg_output["g"], Flow { p: 100, q: 50 });
    }

    #[test]
    fn conservation_at_every_bus() {
        let s = chain();
        let st = ActualStates::initial(&s);
        let el = energize(&s.network, &st).unwrap();
        let flows = solve_flows(&s.network, &st, &el);
        for i in 0..s.network.bus_count() {
            let b = s.network.bus(i);
            let mut inflow = Flow::default();
            for &k in s.network.incident(i) {
                let f = flows.end_flow(&s.network.branch(k).id, &b.id);
                inflow.p += f.p;
                inflow.q += f.q;
            }
            let dg = flows.dg_output.get(&b.id).copied().unwrap_or_default();
            let served = if st.shed.contains(&b.id) {
                Flow::default()
            } else if el.is_energized(&b.id) {
                Flow { p: b.load_p, q: b.load_q }
            } else {
                Flow::default()
            };
            assert_eq!(inflow.p + dg.p, served.p, "p balance at {}", b.id);
            assert_eq!(inflow.q + dg.q, served.q, "q balance at {}", b.id);
        }
    }

    #[test]
    fn observe_masks_by_ftu() {
        let mut s = chain();
        // knock out a's FTU; a-b is controlled at a, so it goes dark
        let def = {
            let mut def = s.network.into_def();
            def.buses[1].ftu_online = false;
            def
        };
        s.network = Network::new(def).unwrap();
        let st = ActualStates::initial(&s);
        let snap = snapshot(&s.network, &st).unwrap();
        assert_eq!(snap.bus("a"), BusState::Unknown);
        assert_eq!(snap.bus("b"), BusState::Electrified);
        assert_eq!(snap.branch("a-b"), SwitchState::Unknown);
        assert_eq!(snap.branch("g-a"), SwitchState::Closed);
        // flows at the dark end vanish, flows at live ends remain
        assert!(!snap.flows.contains_key(&("a-b".to_string(), "a".to_string())));
        assert!(snap.flows.contains_key(&("a-b".to_string(), "b".to_string())));
        assert!(snap.flows.contains_key(&("g-a".to_string(), "g".to_string())));
    }

    #[test]
    fn all_ftus_offline_hides_everything() {
        let mut s = chain();
        let def = {
            let mut def = s.network.into_def();
            for b in &mut def.buses {
                b.ftu_online = false;
            }
            def
        };
        s.network = Network::new(def).unwrap();
        let st = ActualStates::initial(&s);
        let snap = snapshot(&s.network, &st).unwrap();
        assert!(snap.bus_state.values().all(|s| *s == BusState::Unknown));
        assert!(snap.branch_state.values().all(|s| *s == SwitchState::Unknown));
        assert!(snap.flows.is_empty());
    }

    #[test]
    fn full_observability_has_no_unknowns() {
        let s = chain();
        let st = ActualStates::initial(&s);
        let snap = snapshot(&s.network, &st).unwrap();
        assert!(snap.bus_state.values().all(|s| *s != BusState::Unknown));
        assert!(snap.branch_state.values().all(|s| *s != SwitchState::Unknown));
    }

    #[test]
    fn probe_moves_only_the_supplier() {
        let s = chain();
        let st = ActualStates::initial(&s);
        let r = apply_probe(&s.network, &st, "b", -140).unwrap();
        assert_eq!(r.dg_before["g"] - r.dg_after["g"], 140);
        let total: i64 = r
            .dg_before
            .iter()
            .map(|(k, v)| v - r.dg_after[k])
            .sum();
        assert_eq!(total, -r.delta_p);
    }

    #[test]
    fn probe_rejections() {
        let s = chain();
        let mut st = ActualStates::initial(&s);
        st.closed.insert("a-b".into(), false);
        match apply_probe(&s.network, &st, "b", -10) {
            Err(ProbeError::BusNotElectrified(_)) => {}
            other => panic!("expected BusNotElectrified, got {other:?}"),
        }

        let mut s2 = chain();
        let def = {
            let mut def = s2.network.into_def();
            def.buses[2].probe_allowed = false;
            def
        };
        s2.network = Network::new(def).unwrap();
        let st2 = ActualStates::initial(&s2);
        match apply_probe(&s2.network, &st2, "b", -10) {
            Err(ProbeError::ProbeNotAllowed(_)) => {}
            other => panic!("expected ProbeNotAllowed, got {other:?}"),
        }
        // cut-off beyond served load
        match apply_probe(&s2.network, &st2, "a", -150) {
            Err(ProbeError::ProbeNotAllowed(_)) => {}
            other => panic!("expected magnitude rejection, got {other:?}"),
        }
    }

    #[test]
    fn overload_trips_strictly_above_capacity() {
        let s = chain(); // cap 500, load 300 -> fine
        let st = ActualStates::initial(&s);
        let (after, log) = trip_overloads(&s.network, &st).unwrap();
        assert!(log.is_empty());
        assert!(after.offline_dgs.is_empty());

        // raise b's load so served = 600 > 500
        let mut s2 = chain();
        let def = {
            let mut def = s2.network.into_def();
            def.buses[2].load_p = 500;
            def
        };
        s2.network = Network::new(def).unwrap();
        let st2 = ActualStates::initial(&s2);
        let (after2, log2) = trip_overloads(&s2.network, &st2).unwrap();
        assert_eq!(log2, vec!["g".to_string()]);
        let el = energize(&s2.network, &after2).unwrap();
        assert!(!el.is_energized("a"));
    }

    #[test]
    fn boundary_load_does_not_trip() {
        // cap 500 serving exactly 500
        let mut s = chain();
        let def = {
            let mut def = s.network.into_def();
            def.buses[2].load_p = 400; // 100 + 400 = 500
            def
        };
        s.network = Network::new(def).unwrap();
        let st = ActualStates::initial(&s);
        let (_, log) = trip_overloads(&s.network, &st).unwrap();
        assert!(log.is_empty());
    }

    #[test]
    fn trip_overloads_is_idempotent() {
        let mut s = chain();
        let def = {
            let mut def = s.network.into_def();
            def.buses[2].load_p = 500;
            def
        };
        s.network = Network::new(def).unwrap();
        let st = ActualStates::initial(&s);
        let (once, log1) = trip_overloads(&s.network, &st).unwrap();
        let (twice, log2) = trip_overloads(&s.network, &once).unwrap();
        assert_eq!(once, twice);
        assert!(!log1.is_empty());
        assert!(log2.is_empty());
    }
}
