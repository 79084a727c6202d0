//! Run reports: a byte-stable structured text form for golden files and
//! machine diffing, and an aligned human table mirroring the three-case
//! comparison. Wall-clock timings appear in the table only, so the
//! structured form is identical across runs.

use std::fmt::Write as _;
use std::time::Duration;

use crate::inference::{InferenceResult, ProbeLogEntry};
use crate::netmodel::{serialize_scenario, Scenario};
use crate::restoration::{RestorationPlan, ServedReport};
use crate::truthsim::{SwitchState, TelemetrySnapshot};

/// 64-bit FNV-1a over the canonical scenario serialization.
pub fn scenario_digest(s: &Scenario) -> String {
    let bytes = serialize_scenario(s);
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes.as_bytes() {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

#[derive(Debug, Clone)]
pub struct CaseReport {
    pub commands: usize,
    pub predicted_p: i64,
    pub predicted_q: i64,
    pub served_p: i64,
    pub served_q: i64,
    pub tripped: Vec<String>,
    pub violations: Vec<String>,
    pub infeasible: bool,
}

impl CaseReport {
    pub fn new(plan: &RestorationPlan, outcome: &ServedReport) -> Self {
        CaseReport {
            commands: plan.switch_cmd.len(),
            predicted_p: plan.predicted_served.p,
            predicted_q: plan.predicted_served.q,
            served_p: outcome.served_p,
            served_q: outcome.served_q,
            tripped: outcome.tripped_dgs.clone(),
            violations: outcome.violations.clone(),
            infeasible: plan.infeasible,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub description: String,
    pub digest: String,
    pub buses: usize,
    pub branches: usize,
    pub dgs: usize,
    pub faults_known: usize,
    pub unknown_branches: usize,
    pub probes_used: bool,
    pub resolved_closed: Vec<String>,
    pub resolved_open: Vec<String>,
    pub resolved_electrified: Vec<String>,
    pub resolved_unpowered: Vec<String>,
    pub membership: Vec<(String, String)>,
    pub lockout: Vec<String>,
    pub no_energize: Vec<String>,
    pub probes_executed: usize,
    pub probes_skipped: usize,
    pub noop: CaseReport,
    pub scf: CaseReport,
    pub sts: CaseReport,
    /// Shown in the table only; excluded from the structured form.
    pub elapsed: Duration,
}

impl RunReport {
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        scenario: &Scenario,
        snap: &TelemetrySnapshot,
        inf: &InferenceResult,
        probes_used: bool,
        noop: CaseReport,
        scf: CaseReport,
        sts: CaseReport,
        elapsed: Duration,
    ) -> Self {
        let mut resolved_closed = Vec::new();
        let mut resolved_open = Vec::new();
        for (id, st) in &inf.resolved_branch {
            match st {
                SwitchState::Closed => resolved_closed.push(id.clone()),
                SwitchState::Open => resolved_open.push(id.clone()),
                SwitchState::Unknown => {}
            }
        }
        let mut resolved_electrified = Vec::new();
        let mut resolved_unpowered = Vec::new();
        for (id, st) in &inf.resolved_bus {
            match st {
                crate::truthsim::BusState::Electrified => resolved_electrified.push(id.clone()),
                crate::truthsim::BusState::Unpowered => resolved_unpowered.push(id.clone()),
                crate::truthsim::BusState::Unknown => {}
            }
        }
        let probes_executed = inf
            .probe_log
            .iter()
            .filter(|e| matches!(e, ProbeLogEntry::Executed(_)))
            .count();
        let probes_skipped = inf.probe_log.len() - probes_executed;
        RunReport {
            description: scenario.description.clone(),
            digest: scenario_digest(scenario),
            buses: scenario.network.bus_count(),
            branches: scenario.network.branch_count(),
            dgs: scenario.network.dg_buses().len(),
            faults_known: snap.faulted_known.len(),
            unknown_branches: snap.unknown_branches().count(),
            probes_used,
            resolved_closed,
            resolved_open,
            resolved_electrified,
            resolved_unpowered,
            membership: inf
                .membership
                .iter()
                .map(|(b, d)| (b.clone(), d.clone()))
                .collect(),
            lockout: inf.lockout_branches.iter().cloned().collect(),
            no_energize: inf.no_energize_buses.iter().cloned().collect(),
            probes_executed,
            probes_skipped,
            noop,
            scf,
            sts,
            elapsed,
        }
    }

    /// Byte-stable structured text: fixed key order, no timings.
    pub fn to_structured(&self) -> String {
        let mut out = String::new();
        let join = |v: &[String]| v.join(" ");
        writeln!(out, "format = gridrescue-report-v1").unwrap();
        writeln!(out, "description = {}", self.description).unwrap();
        writeln!(out, "digest = {}", self.digest).unwrap();
        writeln!(out, "buses = {}", self.buses).unwrap();
        writeln!(out, "branches = {}", self.branches).unwrap();
        writeln!(out, "dgs = {}", self.dgs).unwrap();
        writeln!(out, "faults_known = {}", self.faults_known).unwrap();
        writeln!(out, "unknown_branches = {}", self.unknown_branches).unwrap();
        writeln!(out, "probes_used = {}", self.probes_used).unwrap();
        writeln!(out, "[inference]").unwrap();
        writeln!(out, "resolved_closed = {}", join(&self.resolved_closed)).unwrap();
        writeln!(out, "resolved_open = {}", join(&self.resolved_open)).unwrap();
        writeln!(
            out,
            "resolved_electrified = {}",
            join(&self.resolved_electrified)
        )
        .unwrap();
        writeln!(out, "resolved_unpowered = {}", join(&self.resolved_unpowered)).unwrap();
        let membership = self
            .membership
            .iter()
            .map(|(b, d)| format!("{b}:{d}"))
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(out, "membership = {membership}").unwrap();
        writeln!(out, "lockout = {}", join(&self.lockout)).unwrap();
        writeln!(out, "no_energize = {}", join(&self.no_energize)).unwrap();
        writeln!(out, "probes_executed = {}", self.probes_executed).unwrap();
        writeln!(out, "probes_skipped = {}", self.probes_skipped).unwrap();
        for (name, case) in [("noop", &self.noop), ("scf", &self.scf), ("sts", &self.sts)] {
            writeln!(out, "[case.{name}]").unwrap();
            writeln!(out, "commands = {}", case.commands).unwrap();
            writeln!(out, "predicted_p = {}", case.predicted_p).unwrap();
            writeln!(out, "predicted_q = {}", case.predicted_q).unwrap();
            writeln!(out, "served_p = {}", case.served_p).unwrap();
            writeln!(out, "served_q = {}", case.served_q).unwrap();
            writeln!(out, "tripped = {}", join(&case.tripped)).unwrap();
            writeln!(out, "violations = {}", case.violations.len()).unwrap();
            for v in &case.violations {
                writeln!(out, "violation = {v}").unwrap();
            }
            writeln!(out, "infeasible = {}", case.infeasible).unwrap();
        }
        out
    }

    /// Three-case comparison table for humans.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.description).unwrap();
        writeln!(
            out,
            "buses {}  branches {}  dgs {}  unknown branches {}  known faults {}",
            self.buses, self.branches, self.dgs, self.unknown_branches, self.faults_known
        )
        .unwrap();
        writeln!(out).unwrap();
        writeln!(
            out,
            "inference: {} closed, {} open, {} probes ({} skipped), {} locked out, {} no-energize",
            self.resolved_closed.len(),
            self.resolved_open.len(),
            self.probes_executed,
            self.probes_skipped,
            self.lockout.len(),
            self.no_energize.len()
        )
        .unwrap();
        if !self.resolved_closed.is_empty() {
            writeln!(out, "  closed: {}", self.resolved_closed.join(", ")).unwrap();
        }
        if !self.resolved_open.is_empty() {
            writeln!(out, "  open:   {}", self.resolved_open.join(", ")).unwrap();
        }
        writeln!(out).unwrap();
        writeln!(
            out,
            "{:<48}{:>18}",
            "Processing case", "picked-up load"
        )
        .unwrap();
        let fmt_case = |label: &str, c: &CaseReport| {
            let mut line = format!("{:<48}{:>10} + j{}", label, c.served_p, c.served_q);
            if !c.tripped.is_empty() {
                line.push_str(&format!("  (tripped: {})", c.tripped.join(", ")));
            }
            if !c.violations.is_empty() {
                line.push_str(&format!("  [{} violations]", c.violations.len()));
            }
            if c.infeasible {
                line.push_str("  [infeasible]");
            }
            line
        };
        writeln!(out, "{}", fmt_case("1. Do not pick up loads.", &self.noop)).unwrap();
        writeln!(
            out,
            "{}",
            fmt_case("2. Pick up loads by inference + exact search.", &self.scf)
        )
        .unwrap();
        writeln!(
            out,
            "{}",
            fmt_case("3. Pick up loads directly (spanning trees).", &self.sts)
        )
        .unwrap();
        writeln!(out).unwrap();
        writeln!(out, "elapsed: {} ms", self.elapsed.as_millis()).unwrap();
        out
    }
}
