//! State inference for unobservable branches and buses.
//!
//! Three rules recover unknown states from what the operation center can
//! still see, applied to a fixpoint:
//!
//! 1. flow rule — nonzero flow at an observable branch end means the branch
//!    conducts; all-zero observable ends mean it is open;
//! 2. unique-path rule — an observed electrified bus with no supply path
//!    over known-closed branches and exactly one candidate path when every
//!    unknown branch is assumed closed must be fed over that path;
//! 3. disturbance probes — briefly cut load at an observed electrified bus
//!    and attribute it to the DG whose output moved by exactly that amount.
//!
//! Whatever stays unknown afterwards is locked out of restoration control,
//! as are all branches around electrified buses whose supply path cannot
//! be verified.

use std::collections::{BTreeMap, BTreeSet};

use crate::netmodel::Network;
use crate::pathindex::{build_path_index, Assumption, PathExplosion, PathIndex};
use crate::truthsim::{
    apply_probe, ActualStates, BusState, ProbeError, ProbeResult, SwitchState, TelemetrySnapshot,
};

/// Everything the inference pass concluded, beyond the input snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceResult {
    /// Newly inferred switch states; only branches unknown in the snapshot.
    pub resolved_branch: BTreeMap<String, SwitchState>,
    /// Newly inferred bus states; only buses unknown in the snapshot.
    pub resolved_bus: BTreeMap<String, BusState>,
    /// Probe-derived supplier when the path itself stayed ambiguous.
    pub membership: BTreeMap<String, String>,
    /// Branches restoration must not operate.
    pub lockout_branches: BTreeSet<String>,
    /// Unobservable buses without confirmed supply; never to be connected.
    pub no_energize_buses: BTreeSet<String>,
    pub probe_log: Vec<ProbeLogEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeLogEntry {
    Executed(ProbeResult),
    Skipped { bus: String, reason: String },
}

/// Synchronous probe channel: the live system or the simulator answers one
/// disturbance request at a time.
pub trait ProbeExecutor {
    fn request(&mut self, bus: &str, delta_p: i64) -> Result<ProbeResult, ProbeError>;
}

/// Probe executor backed by the ground-truth simulator.
pub struct TruthsimExecutor<'a> {
    net: &'a Network,
    state: &'a ActualStates,
}

impl<'a> TruthsimExecutor<'a> {
    pub fn new(net: &'a Network, state: &'a ActualStates) -> Self {
        TruthsimExecutor { net, state }
    }
}

impl ProbeExecutor for TruthsimExecutor<'_> {
    fn request(&mut self, bus: &str, delta_p: i64) -> Result<ProbeResult, ProbeError> {
        apply_probe(self.net, self.state, bus, delta_p)
    }
}

/// Flow rule: resolve unknown branches from branch-end telemetry.
///
/// Nonzero power at any observable end closes the branch; zero power at
/// every observable end (of at least one) opens it. Sound as long as every
/// conducting branch feeds some served load, which the simulator's
/// scenarios guarantee.
pub fn rule_flow(net: &Network, snap: &TelemetrySnapshot) -> BTreeMap<String, SwitchState> {
    let mut updates = BTreeMap::new();
    for k in 0..net.branch_count() {
        let br = net.branch(k);
        if snap.branch(&br.id) != SwitchState::Unknown {
            continue;
        }
        let (a, b) = net.branch_ends(k);
        let mut observable_ends = 0;
        let mut nonzero = false;
        for end in [a, b] {
            let key = (br.id.clone(), net.bus(end).id.clone());
            if let Some(f) = snap.flows.get(&key) {
                observable_ends += 1;
                if f.p.abs() + f.q.abs() != 0 {
                    nonzero = true;
                }
            }
        }
        if observable_ends == 0 {
            continue;
        }
        let state = if nonzero {
            SwitchState::Closed
        } else {
            SwitchState::Open
        };
        updates.insert(br.id.clone(), state);
    }
    updates
}

/// Unique-path rule: an observed electrified bus unreachable over known
/// states but with exactly one candidate path under the all-closed
/// assumption is fed over that path, so its unknown branches are closed.
pub fn rule_unique_path(
    net: &Network,
    snap: &TelemetrySnapshot,
    known: &BTreeMap<String, SwitchState>,
    idx_open: &PathIndex,
    idx_closed: &PathIndex,
) -> BTreeMap<String, SwitchState> {
    let mut updates = BTreeMap::new();
    for i in 0..net.bus_count() {
        let bus = net.bus(i);
        if snap.bus(&bus.id) != BusState::Electrified {
            continue;
        }
        if idx_open.count(i) != 0 || idx_closed.count(i) != 1 {
            continue;
        }
        let dg = *idx_closed
            .reachable_dgs(i)
            .first()
            .expect("count 1 implies a reachable dg");
        let path = &idx_closed.paths(i, dg)[0];
        for &k in path {
            let id = &net.branch(k).id;
            if known.get(id).copied().unwrap_or(SwitchState::Unknown) == SwitchState::Unknown {
                updates.insert(id.clone(), SwitchState::Closed);
            }
        }
    }
    updates
}

/// Branch resolutions, membership attributions, and log entries from one
/// probe pass.
pub type ProbePassResult = (
    BTreeMap<String, SwitchState>,
    BTreeMap<String, String>,
    Vec<ProbeLogEntry>,
);

/// Disturbance-probe rule over the current indices.
///
/// Candidates are observed electrified buses with no known-state supply
/// path and several candidate paths. The probe cuts off up to the
/// scenario's magnitude cap; integer arithmetic makes the attribution an
/// exact equality. A unique candidate path to the answering DG resolves
/// its branches; several paths record membership only.
#[allow(clippy::too_many_arguments)]
pub fn plan_and_apply_probes(
    net: &Network,
    snap: &TelemetrySnapshot,
    known: &BTreeMap<String, SwitchState>,
    idx_open: &PathIndex,
    idx_closed: &PathIndex,
    exec: &mut dyn ProbeExecutor,
    probe_magnitude_default: i64,
    handled: &mut BTreeSet<String>,
) -> ProbePassResult {
    let mut updates = BTreeMap::new();
    let mut membership = BTreeMap::new();
    let mut log = Vec::new();
    // one probe at a time, buses in canonical id order
    let mut order: Vec<usize> = (0..net.bus_count()).collect();
    order.sort_by(|&a, &b| net.bus(a).id.cmp(&net.bus(b).id));
    for i in order {
        let bus = net.bus(i);
        if snap.bus(&bus.id) != BusState::Electrified {
            continue;
        }
        if idx_open.count(i) != 0 || idx_closed.count(i) < 2 {
            continue;
        }
        if handled.contains(&bus.id) {
            continue;
        }
        handled.insert(bus.id.clone());
        if !bus.probe_allowed {
            log.push(ProbeLogEntry::Skipped {
                bus: bus.id.clone(),
                reason: "disturbance not allowed".into(),
            });
            continue;
        }
        let magnitude = bus.load_p.min(probe_magnitude_default);
        if magnitude <= 0 {
            log.push(ProbeLogEntry::Skipped {
                bus: bus.id.clone(),
                reason: "no interruptible load".into(),
            });
            continue;
        }
        let result = match exec.request(&bus.id, -magnitude) {
            Ok(r) => r,
            Err(e) => {
                log.push(ProbeLogEntry::Skipped {
                    bus: bus.id.clone(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        // Cut-off of magnitude m: the supplying DG's output drops by m.
        let cut = -result.delta_p;
        let mut suppliers = Vec::new();
        if result.delta_p != 0 {
            for (dg, before) in &result.dg_before {
                let after = result.dg_after.get(dg).copied().unwrap_or(0);
                if before - after - cut == 0 {
                    suppliers.push(dg.clone());
                }
            }
        }
        if suppliers.len() == 1 {
            let dg_id = &suppliers[0];
            if let Some(dg_idx) = net.bus_idx(dg_id) {
                let paths = idx_closed.paths(i, dg_idx);
                if paths.len() == 1 {
                    for &k in &paths[0] {
                        let id = &net.branch(k).id;
                        if known.get(id).copied().unwrap_or(SwitchState::Unknown)
                            == SwitchState::Unknown
                        {
                            updates.insert(id.clone(), SwitchState::Closed);
                        }
                    }
                } else {
                    membership.insert(bus.id.clone(), dg_id.clone());
                }
            }
        }
        log.push(ProbeLogEntry::Executed(result));
    }
    (updates, membership, log)
}

/// Remaining-unknown handling: branches with no state stay uncontrolled,
/// and every branch around an electrified bus whose supply path cannot be
/// verified (no path over post-inference known states) is barred too.
/// Unobservable buses without confirmed supply are barred from pickup.
pub fn compute_lockout(
    net: &Network,
    snap: &TelemetrySnapshot,
    known: &BTreeMap<String, SwitchState>,
    resolved_bus: &BTreeMap<String, BusState>,
    idx_post: &PathIndex,
) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut lockout = BTreeSet::new();
    for (id, st) in known {
        if *st == SwitchState::Unknown {
            lockout.insert(id.clone());
        }
    }
    let final_bus = |id: &str| -> BusState {
        match snap.bus(id) {
            BusState::Unknown => resolved_bus.get(id).copied().unwrap_or(BusState::Unknown),
            s => s,
        }
    };
    for i in 0..net.bus_count() {
        let bus = net.bus(i);
        if final_bus(&bus.id) == BusState::Electrified && idx_post.count(i) == 0 {
            for &k in net.incident(i) {
                lockout.insert(net.branch(k).id.clone());
            }
        }
    }
    let mut no_energize = BTreeSet::new();
    for bus in net.buses() {
        if !bus.ftu_online && final_bus(&bus.id) != BusState::Electrified {
            no_energize.insert(bus.id.clone());
        }
    }
    (lockout, no_energize)
}

/// Run the full inference procedure: flow rule once, then alternate the
/// unique-path rule and probes until nothing changes, then resolve bus
/// states and compute lockouts.
///
/// Resolution only ever adds knowledge, so iterating past the single pass
/// is a sound superset. Probes run in canonical bus-id order, one in
/// flight, each bus at most once.
pub fn infer_states(
    net: &Network,
    snap: &TelemetrySnapshot,
    exec: Option<&mut dyn ProbeExecutor>,
    probe_magnitude_default: i64,
) -> Result<InferenceResult, PathExplosion> {
    infer_states_bounded(net, snap, exec, probe_magnitude_default, None)
}

/// As `infer_states`, stopping after at most `max_passes` rule passes.
pub fn infer_states_bounded(
    net: &Network,
    snap: &TelemetrySnapshot,
    mut exec: Option<&mut dyn ProbeExecutor>,
    probe_magnitude_default: i64,
    max_passes: Option<usize>,
) -> Result<InferenceResult, PathExplosion> {
    let mut known = snap.branch_state.clone();
    let mut resolved_branch = BTreeMap::new();
    let record = |known: &mut BTreeMap<String, SwitchState>,
                      resolved: &mut BTreeMap<String, SwitchState>,
                      id: String,
                      st: SwitchState| {
        let prev = known.insert(id.clone(), st);
        if prev == Some(SwitchState::Unknown) {
            resolved.insert(id, st);
        }
    };

    for (id, st) in rule_flow(net, snap) {
        record(&mut known, &mut resolved_branch, id, st);
    }

    let mut membership = BTreeMap::new();
    let mut probe_log = Vec::new();
    let mut handled_probes = BTreeSet::new();
    let mut passes = 0;
    let mut idx_closed = loop {
        let idx_open = build_path_index(net, &known, Assumption::UnknownOpen)?;
        let idx_closed = build_path_index(net, &known, Assumption::UnknownClosed)?;
        let mut changed = false;
        for (id, st) in rule_unique_path(net, snap, &known, &idx_open, &idx_closed) {
            record(&mut known, &mut resolved_branch, id, st);
            changed = true;
        }
        if let Some(exec) = exec.as_deref_mut() {
            let (updates, members, log) = plan_and_apply_probes(
                net,
                snap,
                &known,
                &idx_open,
                &idx_closed,
                exec,
                probe_magnitude_default,
                &mut handled_probes,
            );
            for (id, st) in updates {
                record(&mut known, &mut resolved_branch, id, st);
                changed = true;
            }
            membership.extend(members);
            probe_log.extend(log);
        }
        passes += 1;
        if !changed || max_passes.is_some_and(|m| passes >= m) {
            break idx_closed;
        }
    };
    if !resolved_branch.is_empty() {
        // The last pass may have resolved branches after the index was
        // built; bus resolution needs a fresh one.
        idx_closed = build_path_index(net, &known, Assumption::UnknownClosed)?;
    }

    // Bus resolution. Electrified propagates over known-closed branches
    // from observed electrified buses and running DGs; a bus unreachable
    // from every DG even with all unknowns closed is certainly unpowered.
    let mut resolved_bus: BTreeMap<String, BusState> = BTreeMap::new();
    {
        let mut electrified = vec![false; net.bus_count()];
        let mut queue = Vec::new();
        for i in 0..net.bus_count() {
            let id = &net.bus(i).id;
            if snap.bus(id) == BusState::Electrified || snap.dg_output.contains_key(id) {
                electrified[i] = true;
                queue.push(i);
            }
        }
        while let Some(u) = queue.pop() {
            for &k in net.incident(u) {
                if known.get(&net.branch(k).id).copied() != Some(SwitchState::Closed) {
                    continue;
                }
                let (a, b) = net.branch_ends(k);
                let v = if a == u { b } else { a };
                if !electrified[v] {
                    electrified[v] = true;
                    queue.push(v);
                }
            }
        }
        for i in 0..net.bus_count() {
            let bus = net.bus(i);
            if snap.bus(&bus.id) != BusState::Unknown {
                continue;
            }
            if electrified[i] {
                resolved_bus.insert(bus.id.clone(), BusState::Electrified);
            } else if idx_closed.count(i) == 0 {
                resolved_bus.insert(bus.id.clone(), BusState::Unpowered);
            }
        }
    }

    let idx_post = build_path_index(net, &known, Assumption::UnknownOpen)?;
    let (lockout_branches, no_energize_buses) =
        compute_lockout(net, snap, &known, &resolved_bus, &idx_post);

    Ok(InferenceResult {
        resolved_branch,
        resolved_bus,
        membership,
        lockout_branches,
        no_energize_buses,
        probe_log,
    })
}

/// Post-inference view of a branch: snapshot state overlaid with resolutions.
pub fn effective_branch_state(
    snap: &TelemetrySnapshot,
    inf: &InferenceResult,
    id: &str,
) -> SwitchState {
    match snap.branch(id) {
        SwitchState::Unknown => inf
            .resolved_branch
            .get(id)
            .copied()
            .unwrap_or(SwitchState::Unknown),
        s => s,
    }
}

/// Post-inference view of a bus state.
pub fn effective_bus_state(snap: &TelemetrySnapshot, inf: &InferenceResult, id: &str) -> BusState {
    match snap.bus(id) {
        BusState::Unknown => inf.resolved_bus.get(id).copied().unwrap_or(BusState::Unknown),
        s => s,
    }
}
