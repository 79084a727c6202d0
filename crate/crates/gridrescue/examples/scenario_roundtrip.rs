//! Scenario documents: build one programmatically, serialize it, load it
//! back, and see what validation says about a broken edit.
//!
//! Run: cargo run --example scenario_roundtrip

use gridrescue::netmodel::{
    load_scenario, serialize_scenario, validate, Branch, Bus, DgSpec, Network, NetworkDef,
    Scenario, ScenarioError,
};

fn main() {
    let def = NetworkDef {
        buses: vec![
            Bus {
                id: "station".into(),
                load_p: 0,
                load_q: 0,
                weight: 1,
                dg: Some(DgSpec { cap_p: 400, cap_q: 200 }),
                ftu_online: true,
                probe_allowed: false,
            },
            Bus {
                id: "mill".into(),
                load_p: 250,
                load_q: 120,
                weight: 3,
                dg: None,
                ftu_online: true,
                probe_allowed: true,
            },
            Bus {
                id: "depot".into(),
                load_p: 90,
                load_q: 40,
                weight: 1,
                dg: None,
                ftu_online: false,
                probe_allowed: true,
            },
        ],
        branches: vec![
            Branch {
                id: "station-mill".into(),
                from: "station".into(),
                to: "mill".into(),
                switchable: true,
                faulted: false,
                ctrl_bus: "station".into(),
                initial_closed: true,
            },
            Branch {
                id: "mill-depot".into(),
                from: "mill".into(),
                to: "depot".into(),
                switchable: true,
                faulted: false,
                ctrl_bus: "mill".into(),
                initial_closed: false,
            },
        ],
    };
    let scenario = Scenario {
        network: Network::new(def).expect("hand-built network is valid"),
        description: "two-feeder yard".into(),
        probe_magnitude_default: 100,
    };

    let text = serialize_scenario(&scenario);
    println!("serialized document:\n{text}");

    let reloaded = load_scenario(&text).expect("own output loads");
    assert_eq!(reloaded, scenario);
    println!("round trip preserved the scenario exactly");
    println!();

    // Break it: point a branch at a bus that does not exist.
    let broken = text.replace("to = \"depot\"", "to = \"dep0t\"");
    match load_scenario(&broken) {
        Err(ScenarioError::Validation(report)) => {
            println!("broken edit rejected:\n{report}");
        }
        other => panic!("expected a validation error, got {other:?}"),
    }

    // validate() reports violations as data for tooling.
    let mut def = reloaded.network.into_def();
    def.buses[1].load_p = -5;
    let report = validate(&def);
    println!("direct validation of a negative load:\n{report}");
    assert!(!report.is_empty());
}
