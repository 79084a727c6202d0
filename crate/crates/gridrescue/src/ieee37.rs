//! Bundled default scenario: the IEEE 37-node test feeder in a post-storm
//! state with three DG microgrids, four line faults, and ten FTU outages.
//!
//! Spot loads are the published per-node totals (three phases aggregated;
//! see data/NOTES.md for the conversion and the 2457 kW + j1201 kvar sum).
//! Fault, switch, and FTU placement are this project's reconstruction of a
//! storm scenario; the resulting telemetry exercises every inference rule.

use crate::netmodel::{Branch, Bus, DgSpec, Network, NetworkDef, Scenario};

/// (id, load_p, load_q, dg caps, ftu_online)
type BusRow = (&'static str, i64, i64, Option<(i64, i64)>, bool);

const BUSES: &[BusRow] = &[
    ("701", 630, 315, Some((1500, 750)), true),
    ("702", 0, 0, None, true),
    ("703", 0, 0, None, true),
    ("704", 0, 0, None, false),
    ("705", 0, 0, None, false),
    ("706", 0, 0, None, false),
    ("707", 0, 0, None, true),
    ("708", 0, 0, None, true),
    ("709", 0, 0, None, false),
    ("710", 0, 0, None, true),
    ("711", 0, 0, None, true),
    ("712", 85, 40, None, true),
    ("713", 85, 40, None, false),
    ("714", 38, 18, None, true),
    ("718", 85, 40, None, true),
    ("720", 85, 40, None, false),
    ("722", 161, 80, None, true),
    ("724", 42, 21, None, true),
    ("725", 42, 21, None, true),
    ("727", 42, 21, None, false),
    ("728", 126, 63, None, true),
    ("729", 42, 21, None, true),
    ("730", 85, 40, None, true),
    ("731", 85, 40, None, true),
    ("732", 42, 21, None, true),
    ("733", 85, 40, None, false),
    ("734", 42, 21, Some((520, 260)), true),
    ("735", 85, 40, None, true),
    ("736", 42, 21, None, true),
    ("737", 140, 70, None, true),
    ("738", 126, 62, None, true),
    ("740", 85, 40, None, true),
    ("741", 42, 21, None, true),
    ("742", 93, 44, Some((150, 75)), true),
    ("744", 42, 21, None, false),
    ("775", 0, 0, None, false),
    ("799", 0, 0, None, true),
];

/// (id, from, to, ctrl, switchable, faulted, initial_closed)
const BRANCHES: &[(&str, &str, &str, &str, bool, bool, bool)] = &[
    ("799-701", "799", "701", "701", true, false, false),
    ("701-702", "701", "702", "701", true, false, true),
    ("702-713", "702", "713", "713", true, false, true),
    ("705-702", "705", "702", "705", true, true, false),
    ("702-703", "702", "703", "702", true, false, false),
    ("713-704", "713", "704", "704", true, false, true),
    ("704-714", "704", "714", "704", true, true, false),
    ("704-720", "704", "720", "720", true, false, true),
    ("714-718", "714", "718", "714", true, false, false),
    ("720-706", "720", "706", "706", true, false, true),
    ("720-707", "720", "707", "707", true, false, true),
    ("706-725", "706", "725", "725", true, false, true),
    ("707-724", "707", "724", "707", true, false, true),
    ("707-722", "707", "722", "707", true, false, false),
    ("705-742", "705", "742", "742", true, false, true),
    ("705-712", "705", "712", "712", true, false, false),
    ("703-727", "703", "727", "703", true, false, false),
    ("703-730", "703", "730", "703", true, false, false),
    ("727-744", "727", "744", "727", true, false, false),
    ("744-728", "744", "728", "728", true, false, false),
    ("744-729", "744", "729", "729", true, false, false),
    ("730-709", "730", "709", "709", true, true, false),
    ("709-731", "709", "731", "709", true, false, true),
    ("708-709", "708", "709", "709", true, false, true),
    ("775-709", "775", "709", "775", false, true, false),
    ("708-733", "708", "733", "733", true, false, true),
    ("708-732", "708", "732", "708", true, false, true),
    ("733-734", "733", "734", "734", true, false, true),
    ("734-737", "734", "737", "734", true, false, false),
    ("734-710", "734", "710", "710", true, false, false),
    ("737-738", "737", "738", "737", true, false, false),
    ("738-711", "738", "711", "738", true, false, false),
    ("711-741", "711", "741", "711", true, false, false),
    ("711-740", "711", "740", "711", true, false, false),
    ("710-735", "710", "735", "710", true, false, false),
    ("710-736", "710", "736", "710", true, false, false),
    // Normally-open tie between the 720 section and the 733 section.
    ("706-733", "706", "733", "706", true, false, false),
];

/// Build the bundled 37-node default scenario.
pub fn builtin_ieee37() -> Scenario {
    let buses = BUSES
        .iter()
        .map(|&(id, load_p, load_q, dg, ftu_online)| Bus {
            id: id.to_string(),
            load_p,
            load_q,
            weight: 1,
            dg: dg.map(|(cap_p, cap_q)| DgSpec { cap_p, cap_q }),
            ftu_online,
            probe_allowed: true,
        })
        .collect();
    let branches = BRANCHES
        .iter()
        .map(
            |&(id, from, to, ctrl, switchable, faulted, initial_closed)| Branch {
                id: id.to_string(),
                from: from.to_string(),
                to: to.to_string(),
                switchable,
                faulted,
                ctrl_bus: ctrl.to_string(),
                initial_closed,
            },
        )
        .collect();
    let network = Network::new(NetworkDef { buses, branches }).expect("bundled scenario is valid");
    Scenario {
        network,
        description: "IEEE 37-node feeder, post-storm: 4 line faults, 10 FTU outages, three DG islands"
            .to_string(),
        probe_magnitude_default: 140,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::validate;

    #[test]
    fn has_37_buses_3_dgs_4_faults() {
        let s = builtin_ieee37();
        assert_eq!(s.network.bus_count(), 37);
        assert_eq!(s.network.dg_buses().len(), 3);
        let faults = s.network.branches().iter().filter(|b| b.faulted).count();
        assert_eq!(faults, 4);
    }

    #[test]
    fn total_spot_load_matches_published_feeder() {
        // Sum of the published IEEE 37-node spot-load table, all phases.
        let s = builtin_ieee37();
        let p: i64 = s.network.buses().iter().map(|b| b.load_p).sum();
        let q: i64 = s.network.buses().iter().map(|b| b.load_q).sum();
        assert_eq!((p, q), (2457, 1201));
    }

    #[test]
    fn passes_validation() {
        let def = builtin_ieee37().network.into_def();
        let report = validate(&def);
        assert!(report.is_empty(), "{report}");
    }

    #[test]
    fn incidence_lists_both_endpoints() {
        let s = builtin_ieee37();
        let net = &s.network;
        for k in 0..net.branch_count() {
            let (a, b) = net.branch_ends(k);
            assert!(net.incident(a).contains(&k));
            assert!(net.incident(b).contains(&k));
            let elsewhere = (0..net.bus_count())
                .filter(|&i| i != a && i != b)
                .any(|i| net.incident(i).contains(&k));
            assert!(!elsewhere);
        }
    }
}
