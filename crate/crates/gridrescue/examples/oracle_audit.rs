//! Audit inference against the brute-force consistency oracle: enumerate
//! every admissible world that reproduces the observed telemetry and check
//! that inference only ever claims states all such worlds agree on.
//!
//! Run: cargo run --example oracle_audit

use gridrescue::builtin_ieee37;
use gridrescue::consistency::{completeness_ratio, enumerate_consistent};
use gridrescue::inference::infer_states;
use gridrescue::truthsim::{snapshot, ActualStates};

fn main() {
    let scenario = builtin_ieee37();
    let net = &scenario.network;
    let ground = ActualStates::initial(&scenario);
    let snap = snapshot(net, &ground).unwrap();

    let unknowns = snap.unknown_branches().count();
    println!("enumerating 2^{unknowns} candidate worlds (faulted branches pinned open)...");
    let cs = enumerate_consistent(net, &snap, &ground.shed).expect("within enumeration cap");
    println!("telemetry-consistent worlds: {}", cs.assignments.len());
    println!("states forced across all of them: {}", cs.forced.len());
    for (id, st) in &cs.forced {
        println!("  {id}: {st:?}");
    }
    println!();

    // Probes inject non-telemetry information, so the audited run goes
    // without them.
    let inf = infer_states(net, &snap, None, scenario.probe_magnitude_default).unwrap();
    let sound = inf
        .resolved_branch
        .iter()
        .all(|(id, st)| cs.forced.get(id) == Some(st));
    println!(
        "inference (no probes) resolved {} branches; containment in forced set: {}",
        inf.resolved_branch.len(),
        if sound { "SOUND" } else { "UNSOUND" }
    );
    println!(
        "completeness ratio: {:.4}",
        completeness_ratio(&inf, &cs)
    );
    assert!(sound);
}
