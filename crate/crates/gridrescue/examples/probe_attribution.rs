//! Disturbance probes attribute a bus to its supplying DG by the exact
//! generation delta. When several candidate paths to that DG remain, the
//! probe records membership without guessing branch states.
//!
//! Run: cargo run --example probe_attribution

use gridrescue::inference::{infer_states, TruthsimExecutor};
use gridrescue::netmodel::load_scenario;
use gridrescue::truthsim::{apply_probe, snapshot, ActualStates};

// A dark diamond: bus i is observably electrified, but its feed beyond w
// could run over u or over v, and both worlds produce identical telemetry.
const DIAMOND: &str = r#"
description = "dark diamond above an observed bus"
probe_magnitude_default = 50

[[buses]]
id = "g"
load_p = 0
load_q = 0
dg = { cap_p = 200, cap_q = 100 }
ftu_online = false

[[buses]]
id = "u"
load_p = 5
load_q = 2
ftu_online = false

[[buses]]
id = "v"
load_p = 5
load_q = 2
ftu_online = false

[[buses]]
id = "w"
load_p = 7
load_q = 3
ftu_online = false

[[buses]]
id = "i"
load_p = 20
load_q = 10

[[branches]]
id = "g-u"
from = "g"
to = "u"
ctrl_bus = "g"
initial_closed = true

[[branches]]
id = "g-v"
from = "g"
to = "v"
ctrl_bus = "g"
initial_closed = true

[[branches]]
id = "u-w"
from = "u"
to = "w"
ctrl_bus = "u"
initial_closed = true

[[branches]]
id = "v-w"
from = "v"
to = "w"
ctrl_bus = "v"
initial_closed = false

[[branches]]
id = "w-i"
from = "w"
to = "i"
ctrl_bus = "w"
initial_closed = true
"#;

fn main() {
    let scenario = load_scenario(DIAMOND).expect("diamond scenario parses");
    let net = &scenario.network;
    let ground = ActualStates::initial(&scenario);
    let snap = snapshot(net, &ground).unwrap();

    println!("bus i is observed electrified; its supply path beyond w is dark.");
    println!();

    // A raw probe shows the exact balance the attribution relies on.
    let r = apply_probe(net, &ground, "i", -20).unwrap();
    println!("probe: cut {} kW at bus i", -r.delta_p);
    for (dg, before) in &r.dg_before {
        println!("  DG {dg}: {} kW -> {} kW", before, r.dg_after[dg]);
    }
    let total: i64 = r.dg_before.iter().map(|(dg, b)| b - r.dg_after[dg]).sum();
    assert_eq!(total, -r.delta_p, "generation deltas add up to the cut exactly");
    println!("  deltas sum to the cut exactly: {} kW", total);
    println!();

    let mut exec = TruthsimExecutor::new(net, &ground);
    let inf = infer_states(net, &snap, Some(&mut exec), scenario.probe_magnitude_default).unwrap();

    println!("inference outcome:");
    println!("  resolved branches: {:?}", inf.resolved_branch);
    println!("  membership:        {:?}", inf.membership);
    assert_eq!(inf.membership.get("i").map(String::as_str), Some("g"));
    assert!(!inf.resolved_branch.contains_key("u-w"));
    assert!(!inf.resolved_branch.contains_key("v-w"));
    println!();
    println!("the probe pinned bus i to DG g, but with two candidate paths to g");
    println!("neither u-w nor v-w was resolved: membership only, no guessing.");
}
