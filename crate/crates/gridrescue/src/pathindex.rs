//! Supply-path index: bus-to-bus reachability (Floyd–Warshall transitive
//! closure) and exhaustive simple-path enumeration from every bus to every
//! DG, under an assumption about unknown-state branches.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::netmodel::Network;
use crate::truthsim::SwitchState;

/// How to treat branches whose switch state is unknown when building the
/// effective edge set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    UnknownOpen,
    UnknownClosed,
}

pub const DEFAULT_PATH_CAP: usize = 1024;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("more than {cap} supply paths from bus {bus} to DG {dg}")]
pub struct PathExplosion {
    pub bus: String,
    pub dg: String,
    pub cap: usize,
}

/// Reachability and enumerated supply paths over one effective edge set.
///
/// A DG bus reaches itself through the empty path, so `count` at a DG bus
/// is always at least one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathIndex {
    /// reach[i][j]: j reachable from i over effective edges (reflexive).
    reach: Vec<Vec<bool>>,
    /// (bus, dg) -> simple paths as branch-index sequences, in lexicographic
    /// branch-id order.
    paths: BTreeMap<(usize, usize), Vec<Vec<usize>>>,
    /// Total simple paths from each bus to all DGs.
    count: Vec<usize>,
    dgs: Vec<usize>,
}

impl PathIndex {
    pub fn reachable(&self, from: usize, to: usize) -> bool {
        self.reach[from][to]
    }

    /// Number of simple paths from this bus to any DG.
    pub fn count(&self, bus: usize) -> usize {
        self.count[bus]
    }

    /// Simple paths from a bus to one DG, canonical order.
    pub fn paths(&self, bus: usize, dg: usize) -> &[Vec<usize>] {
        self.paths
            .get(&(bus, dg))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// DGs with at least one path from this bus.
    pub fn reachable_dgs(&self, bus: usize) -> Vec<usize> {
        self.dgs
            .iter()
            .copied()
            .filter(|&d| !self.paths(bus, d).is_empty())
            .collect()
    }
}

/// Effective edges under the assumption: known-closed branches always,
/// unknown-state branches only when assumed closed. Known-open (which
/// includes every observable fault) never.
fn effective_edges(
    net: &Network,
    known: &BTreeMap<String, SwitchState>,
    assume: Assumption,
) -> Vec<usize> {
    (0..net.branch_count())
        .filter(|&k| {
            match known
                .get(&net.branch(k).id)
                .copied()
                .unwrap_or(SwitchState::Unknown)
            {
                SwitchState::Closed => true,
                SwitchState::Open => false,
                SwitchState::Unknown => assume == Assumption::UnknownClosed,
            }
        })
        .collect()
}

/// Build the path index for one assumption over the current known states.
///
/// `known` must give a state for every branch (Unknown where the operation
/// center has no view). Reachability is computed by Floyd–Warshall closure;
/// paths are enumerated depth-first with visited-set backtracking and
/// emitted in canonical order. Any (bus, DG) pair with more than `cap`
/// simple paths aborts with `PathExplosion` rather than truncating.
pub fn build_path_index_with_cap(
    net: &Network,
    known: &BTreeMap<String, SwitchState>,
    assume: Assumption,
    cap: usize,
) -> Result<PathIndex, PathExplosion> {
    let n = net.bus_count();
    let edges = effective_edges(net, known, assume);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        reach[i][i] = true;
    }
    for &k in &edges {
        let (a, b) = net.branch_ends(k);
        adj[a].push(k);
        adj[b].push(k);
        reach[a][b] = true;
        reach[b][a] = true;
    }
    for m in 0..n {
        for i in 0..n {
            if !reach[i][m] {
                continue;
            }
            for j in 0..n {
                if reach[m][j] {
                    reach[i][j] = true;
                }
            }
        }
    }

    // Enumerate simple paths DG -> everywhere; record the reverse at each
    // visited bus. The DFS prefix is itself a simple path.
    let dgs: Vec<usize> = net.dg_buses().to_vec();
    let mut paths: BTreeMap<(usize, usize), Vec<Vec<usize>>> = BTreeMap::new();
    for &dg in &dgs {
        let mut visited = vec![false; n];
        let mut prefix: Vec<usize> = Vec::new();
        let mut out: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
        dfs_collect(net, &adj, dg, &mut visited, &mut prefix, &mut out, cap)
            .map_err(|bus| PathExplosion {
                bus: net.bus(bus).id.clone(),
                dg: net.bus(dg).id.clone(),
                cap,
            })?;
        for (bus, mut list) in out {
            // canonical order: lexicographic by branch-id sequence
            list.sort_by(|x, y| {
                let xi = x.iter().map(|&k| net.branch(k).id.as_str());
                let yi = y.iter().map(|&k| net.branch(k).id.as_str());
                xi.cmp(yi)
            });
            paths.insert((bus, dg), list);
        }
    }
    let mut count = vec![0usize; n];
    for ((bus, _), list) in &paths {
        count[*bus] += list.len();
    }
    Ok(PathIndex {
        reach,
        paths,
        count,
        dgs,
    })
}

fn dfs_collect(
    net: &Network,
    adj: &[Vec<usize>],
    u: usize,
    visited: &mut [bool],
    prefix: &mut Vec<usize>,
    out: &mut BTreeMap<usize, Vec<Vec<usize>>>,
    cap: usize,
) -> Result<(), usize> {
    visited[u] = true;
    {
        // Path at u is the reversed prefix (bus -> DG direction).
        let entry = out.entry(u).or_default();
        let mut p = prefix.clone();
        p.reverse();
        entry.push(p);
        if entry.len() > cap {
            return Err(u);
        }
    }
    for &k in &adj[u] {
        let (a, b) = net.branch_ends(k);
        let v = if a == u { b } else { a };
        if !visited[v] {
            prefix.push(k);
            dfs_collect(net, adj, v, visited, prefix, out, cap)?;
            prefix.pop();
        }
    }
    visited[u] = false;
    Ok(())
}

pub fn build_path_index(
    net: &Network,
    known: &BTreeMap<String, SwitchState>,
    assume: Assumption,
) -> Result<PathIndex, PathExplosion> {
    build_path_index_with_cap(net, known, assume, DEFAULT_PATH_CAP)
}
