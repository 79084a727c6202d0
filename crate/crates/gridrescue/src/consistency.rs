//! Brute-force verification harness: enumerate every assignment of the
//! unknown branch states that reproduces the observed telemetry exactly,
//! and extract the states all consistent assignments agree on.
//!
//! Integer flows make consistency a field-for-field equality test, so the
//! forced set is exact. Inference must never resolve a state outside it.
//!
//! The admissible worlds are those a feeder can actually be in after
//! automated isolation: energized islands are radial with one DG, faulted
//! branches do not conduct, and a closed switch always carries power
//! (de-energized sections are isolated, served loads are positive). The
//! flow rule's zero-reading-means-open inference is sound exactly over
//! this class, which the scenario generator also enforces.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::inference::InferenceResult;
use crate::netmodel::Network;
use crate::truthsim::{energize, observe, solve_flows, ActualStates, SwitchState, TelemetrySnapshot};

pub const MAX_UNKNOWNS: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{unknowns} unknown branches exceed the enumeration cap of {cap}")]
pub struct TooManyUnknowns {
    pub unknowns: usize,
    pub cap: usize,
}

/// All telemetry-consistent unknown-branch assignments and the states they
/// force.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistentSet {
    /// Each entry maps every unknown branch id to a closed? value.
    pub assignments: Vec<BTreeMap<String, bool>>,
    /// Branches whose value is identical across all assignments.
    pub forced: BTreeMap<String, SwitchState>,
}

/// Exhaustively test every assignment of the snapshot's unknown branches.
///
/// An assignment is kept when simulating it (with the given shed set) and
/// masking through the same FTU pattern reproduces the snapshot exactly.
/// Assignments that produce physically inadmissible states (energized
/// cycles, multi-DG islands) are discarded.
pub fn enumerate_consistent(
    net: &Network,
    snap: &TelemetrySnapshot,
    shed: &BTreeSet<String>,
) -> Result<ConsistentSet, TooManyUnknowns> {
    // Assignments range over conducting states. A faulted branch cannot
    // conduct, so its only admissible value is open; it is pinned rather
    // than enumerated.
    let (pinned_open, unknown_ids): (Vec<String>, Vec<String>) = snap
        .unknown_branches()
        .cloned()
        .partition(|id| net.branch(net.branch_idx(id).expect("known branch")).faulted);
    if unknown_ids.len() > MAX_UNKNOWNS {
        return Err(TooManyUnknowns {
            unknowns: unknown_ids.len(),
            cap: MAX_UNKNOWNS,
        });
    }

    // Known states pin the rest of the switch map.
    let mut base = ActualStates {
        closed: BTreeMap::new(),
        shed: shed.clone(),
        offline_dgs: BTreeSet::new(),
    };
    for br in net.branches() {
        let closed = match snap.branch(&br.id) {
            SwitchState::Closed => true,
            SwitchState::Open | SwitchState::Unknown => false,
        };
        base.closed.insert(br.id.clone(), closed);
    }
    // DGs absent from the output telemetry are not running.
    for &d in net.dg_buses() {
        let id = &net.bus(d).id;
        if !snap.dg_output.contains_key(id) {
            base.offline_dgs.insert(id.clone());
        }
    }

    let mut assignments = Vec::new();
    for mask in 0u64..(1u64 << unknown_ids.len()) {
        let mut st = base.clone();
        for (bit, id) in unknown_ids.iter().enumerate() {
            st.closed.insert(id.clone(), mask & (1 << bit) != 0);
        }
        let Ok(el) = energize(net, &st) else {
            continue; // physically inadmissible
        };
        let flows = solve_flows(net, &st, &el);
        // Isolation discipline: a closed switch that carries no power does
        // not occur; such worlds are outside the admissible class.
        let dead_closed = unknown_ids.iter().enumerate().any(|(bit, id)| {
            if mask & (1 << bit) == 0 {
                return false;
            }
            let k = net.branch_idx(id).expect("known branch");
            let (a, _) = net.branch_ends(k);
            let f = flows.end_flow(id, &net.bus(a).id);
            f.p.abs() + f.q.abs() == 0
        });
        if dead_closed {
            continue;
        }
        let candidate = observe(net, &st, &el, &flows);
        if candidate == *snap {
            let mut assignment: BTreeMap<String, bool> = unknown_ids
                .iter()
                .enumerate()
                .map(|(bit, id)| (id.clone(), mask & (1 << bit) != 0))
                .collect();
            for id in &pinned_open {
                assignment.insert(id.clone(), false);
            }
            assignments.push(assignment);
        }
    }

    let mut forced = BTreeMap::new();
    for id in unknown_ids.iter().chain(&pinned_open) {
        let mut values = assignments.iter().map(|a| a[id]);
        if let Some(first) = values.next() {
            if values.all(|v| v == first) {
                forced.insert(
                    id.clone(),
                    if first {
                        SwitchState::Closed
                    } else {
                        SwitchState::Open
                    },
                );
            }
        }
    }
    Ok(ConsistentSet {
        assignments,
        forced,
    })
}

/// |resolved ∩ forced| / |forced|; 1 when nothing is forced.
pub fn completeness_ratio(inf: &InferenceResult, cs: &ConsistentSet) -> f64 {
    if cs.forced.is_empty() {
        return 1.0;
    }
    let hit = cs
        .forced
        .iter()
        .filter(|(id, st)| inf.resolved_branch.get(*id) == Some(st))
        .count();
    hit as f64 / cs.forced.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::infer_states;
    use crate::netmodel::load_scenario;
    use crate::truthsim::snapshot;

    #[test]
    fn zero_unknowns_single_empty_assignment() {
        let s = load_scenario(
            r#"
description = "observable"
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

[[branches]]
id = "g-a"
from = "g"
to = "a"
ctrl_bus = "g"
initial_closed = true
"#,
        )
        .unwrap();
        let st = ActualStates::initial(&s);
        let snap = snapshot(&s.network, &st).unwrap();
        let cs = enumerate_consistent(&s.network, &snap, &st.shed).unwrap();
        assert_eq!(cs.assignments, vec![BTreeMap::new()]);
        assert!(cs.forced.is_empty());
        let inf = infer_states(&s.network, &snap, None, 10).unwrap();
        assert_eq!(completeness_ratio(&inf, &cs), 1.0);
    }

    #[test]
    fn nonzero_flow_forces_the_branch_closed() {
        // FTU at middle bus k offline; j and l report flows. Flow at l
        // forces k-l closed in every consistent assignment.
        let s = load_scenario(
            r#"
description = "middle bus dark"
probe_magnitude_default = 10

[[buses]]
id = "j"
load_p = 0
load_q = 0
dg = { cap_p = 100, cap_q = 50 }

[[buses]]
id = "k"
load_p = 10
load_q = 5
ftu_online = false

[[buses]]
id = "l"
load_p = 20
load_q = 10

[[branches]]
id = "j-k"
from = "j"
to = "k"
ctrl_bus = "k"
initial_closed = true

[[branches]]
id = "k-l"
from = "k"
to = "l"
ctrl_bus = "k"
initial_closed = true
"#,
        )
        .unwrap();
        let st = ActualStates::initial(&s);
        let snap = snapshot(&s.network, &st).unwrap();
        let cs = enumerate_consistent(&s.network, &snap, &st.shed).unwrap();
        assert!(!cs.assignments.is_empty());
        assert_eq!(cs.forced.get("k-l"), Some(&SwitchState::Closed));
        assert_eq!(cs.forced.get("j-k"), Some(&SwitchState::Closed));
    }

    #[test]
    fn ground_truth_always_among_assignments() {
        let s = load_scenario(
            r#"
description = "dark middle, open far branch"
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
ftu_online = false

[[buses]]
id = "b"
load_p = 10
load_q = 5
ftu_online = false

[[branches]]
id = "g-a"
from = "g"
to = "a"
ctrl_bus = "a"
initial_closed = true

[[branches]]
id = "a-b"
from = "a"
to = "b"
ctrl_bus = "b"
initial_closed = false
"#,
        )
        .unwrap();
        let st = ActualStates::initial(&s);
        let snap = snapshot(&s.network, &st).unwrap();
        let cs = enumerate_consistent(&s.network, &snap, &st.shed).unwrap();
        let truth: BTreeMap<String, bool> = snap
            .unknown_branches()
            .map(|id| (id.clone(), st.closed[id]))
            .collect();
        assert!(cs.assignments.contains(&truth));
        // forced never contradicts ground truth
        for (id, forced_state) in &cs.forced {
            let actual = if st.closed[id] && !s.network.branches().iter().any(|b| &b.id == id && b.faulted) {
                SwitchState::Closed
            } else {
                SwitchState::Open
            };
            assert_eq!(forced_state, &actual);
        }
    }

    #[test]
    fn cap_is_enforced() {
        // 21 dark parallel feeders exceed the enumeration cap.
        let mut doc = String::from(
            r#"
description = "too many"
probe_magnitude_default = 10

[[buses]]
id = "g"
load_p = 0
load_q = 0
dg = { cap_p = 10000, cap_q = 5000 }
ftu_online = false
"#,
        );
        for i in 0..21 {
            doc.push_str(&format!(
                r#"
[[buses]]
id = "b{i}"
load_p = 1
load_q = 1
ftu_online = false

[[branches]]
id = "g-b{i}"
from = "g"
to = "b{i}"
ctrl_bus = "g"
initial_closed = false
"#
            ));
        }
        let s = load_scenario(&doc).unwrap();
        let st = ActualStates::initial(&s);
        let snap = snapshot(&s.network, &st).unwrap();
        match enumerate_consistent(&s.network, &snap, &st.shed) {
            Err(TooManyUnknowns { unknowns: 21, .. }) => {}
            other => panic!("expected cap error, got {other:?}"),
        }
    }
}
