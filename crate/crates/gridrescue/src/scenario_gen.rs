//! Random scenario generator: radial feeders with tie switches, DG
//! islands, faults on isolated sections, and FTU outages. Reproducible
//! from a seed; every bus carries at least 1 kW so that conducting
//! branches always show flow.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::netmodel::{Branch, Bus, DgSpec, Network, NetworkDef, Scenario};

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub buses: usize,
    pub dgs: usize,
    pub seed: u64,
    /// Per-bus FTU outage probability, percent.
    pub outage_pct: u8,
    /// Tie switches to add; defaults to buses / 8.
    pub ties: Option<usize>,
    /// Faulted branches; defaults to 1..=4 drawn from the seed.
    pub faults: Option<usize>,
}

impl GenConfig {
    pub fn new(buses: usize, dgs: usize, seed: u64) -> Self {
        GenConfig {
            buses,
            dgs,
            seed,
            outage_pct: 20,
            ties: None,
            faults: None,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GenError {
    #[error("bus count must be within 10..=60, got {0}")]
    BadBusCount(usize),
    #[error("dg count must be within 1..=4, got {0}")]
    BadDgCount(usize),
}

/// Generate a validated scenario. Identical configs yield identical
/// scenarios, byte for byte after serialization.
pub fn generate(cfg: &GenConfig) -> Result<Scenario, GenError> {
    if !(10..=60).contains(&cfg.buses) {
        return Err(GenError::BadBusCount(cfg.buses));
    }
    if !(1..=4).contains(&cfg.dgs) {
        return Err(GenError::BadDgCount(cfg.dgs));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.buses;
    let ids: Vec<String> = (0..n).map(|i| format!("b{i:02}")).collect();

    // Random tree, then a handful of normally-open ties.
    let mut parent = vec![usize::MAX; n];
    for (i, p) in parent.iter_mut().enumerate().skip(1) {
        *p = rng.gen_range(0..i);
    }
    let mut pairs: Vec<(usize, usize, bool)> = (1..n).map(|i| (parent[i], i, false)).collect();
    let tie_count = cfg.ties.unwrap_or(n / 8);
    let mut attempts = 0;
    while pairs.iter().filter(|p| p.2).count() < tie_count && attempts < 200 {
        attempts += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        let (a, b) = (a.min(b), a.max(b));
        if pairs.iter().any(|&(x, y, _)| (x.min(y), x.max(y)) == (a, b)) {
            continue;
        }
        pairs.push((a, b, true));
    }

    // DG placement: spread starting points over the bus range.
    let mut dg_buses = Vec::new();
    while dg_buses.len() < cfg.dgs {
        let c = rng.gen_range(0..n);
        if !dg_buses.contains(&c) {
            dg_buses.push(c);
        }
    }

    // Loads first: island capacities depend on them.
    let loads: Vec<(i64, i64)> = (0..n)
        .map(|_| {
            let p = rng.gen_range(1..=120i64);
            let q = rng.gen_range(0..=(p / 2).max(1));
            (p, q)
        })
        .collect();

    // Grow DG islands over tree edges only; ties stay open. Each frontier
    // extension is accepted with fixed probability, so dead zones remain.
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n]; // (pair idx, other bus)
    for (idx, &(a, b, tie)) in pairs.iter().enumerate() {
        if !tie {
            adj[a].push((idx, b));
            adj[b].push((idx, a));
        }
    }
    let mut claim: Vec<Option<usize>> = vec![None; n];
    let mut frontier = Vec::new();
    for &d in &dg_buses {
        claim[d] = Some(d);
        frontier.push(d);
    }
    while let Some(u) = {
        // FIFO over a Vec keeps draw order deterministic.
        if frontier.is_empty() {
            None
        } else {
            Some(frontier.remove(0))
        }
    } {
        for &(_, v) in &adj[u] {
            if claim[v].is_none() && rng.gen_range(0..100) < 70 {
                claim[v] = claim[u];
                frontier.push(v);
            }
        }
    }

    // Tree edge closed iff it joins two buses of the same island.
    let closed: Vec<bool> = pairs
        .iter()
        .map(|&(a, b, tie)| !tie && claim[a].is_some() && claim[a] == claim[b])
        .collect();

    // Faults strike open branches only: ties, boundaries, dead sections.
    let open_idx: Vec<usize> = (0..pairs.len()).filter(|&i| !closed[i]).collect();
    let fault_count = cfg
        .faults
        .unwrap_or_else(|| rng.gen_range(1..=4))
        .min(open_idx.len());
    let mut faulted = vec![false; pairs.len()];
    let mut chosen = 0;
    let mut guard = 0;
    while chosen < fault_count && guard < 500 {
        guard += 1;
        let k = open_idx[rng.gen_range(0..open_idx.len())];
        if !faulted[k] {
            faulted[k] = true;
            chosen += 1;
        }
    }

    // FTU outages; DG buses keep their FTUs most of the time.
    let ftu_online: Vec<bool> = (0..n)
        .map(|i| {
            let pct = if dg_buses.contains(&i) {
                (cfg.outage_pct / 4) as u32
            } else {
                cfg.outage_pct as u32
            };
            rng.gen_range(0..100u32) >= pct
        })
        .collect();

    // Island loads set the DG ratings: margin keeps the start trip-free,
    // sometimes exactly at the boundary.
    let mut island_load = vec![(0i64, 0i64); n];
    for i in 0..n {
        if let Some(d) = claim[i] {
            island_load[d].0 += loads[i].0;
            island_load[d].1 += loads[i].1;
        }
    }

    let buses: Vec<Bus> = (0..n)
        .map(|i| Bus {
            id: ids[i].clone(),
            load_p: loads[i].0,
            load_q: loads[i].1,
            weight: 1,
            dg: if dg_buses.contains(&i) {
                Some(DgSpec {
                    cap_p: island_load[i].0 + rng.gen_range(0..=150),
                    cap_q: island_load[i].1 + rng.gen_range(0..=80),
                })
            } else {
                None
            },
            ftu_online: ftu_online[i],
            probe_allowed: rng.gen_range(0..100) < 85,
        })
        .collect();

    let branches: Vec<Branch> = pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b, tie))| {
            let ctrl = if rng.gen_range(0..2) == 0 { a } else { b };
            Branch {
                id: if tie {
                    format!("tie-{}-{}", ids[a], ids[b])
                } else {
                    format!("{}-{}", ids[a], ids[b])
                },
                from: ids[a].clone(),
                to: ids[b].clone(),
                switchable: rng.gen_range(0..100) < 95,
                faulted: faulted[k],
                ctrl_bus: ids[ctrl].clone(),
                initial_closed: closed[k],
            }
        })
        .collect();

    let network = Network::new(NetworkDef { buses, branches }).expect("generator output is valid");
    Ok(Scenario {
        network,
        description: format!(
            "generated feeder: seed={} buses={} dgs={}",
            cfg.seed, cfg.buses, cfg.dgs
        ),
        probe_magnitude_default: rng.gen_range(50..=200),
    })
}
