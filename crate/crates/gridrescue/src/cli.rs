//! Command-line front end: `run` (three-case comparison), `gen` (random
//! scenario files), `oracle` (brute-force soundness audit).
//!
//! Exit codes: 0 success, 1 infeasible restoration / exceeded search or
//! enumeration budgets, 2 malformed scenario or bad flags.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::consistency::{completeness_ratio, enumerate_consistent};
use crate::inference::{infer_states, InferenceResult, TruthsimExecutor};
use crate::netmodel::{load_scenario, serialize_scenario, Scenario, ScenarioError};
use crate::report::{CaseReport, RunReport};
use crate::restoration::{evaluate, noop_restore, scf_restore, sts_restore};
use crate::scenario_gen::{generate, GenConfig};
use crate::truthsim::{snapshot, ActualStates};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BUDGET: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;

#[derive(Parser)]
#[command(
    name = "gridrescue",
    about = "Feeder state inference under partial telemetry and DG microgrid restoration",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Structured,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate, infer, restore, and compare the three processing cases.
    Run {
        /// Scenario files to process.
        scenarios: Vec<PathBuf>,
        /// Skip disturbance probes during inference.
        #[arg(long)]
        no_probes: bool,
        /// Stdout format.
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Also write the structured report(s) to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Process scenarios in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Emit a random radial feeder scenario, reproducible from the seed.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        buses: usize,
        #[arg(long)]
        dgs: usize,
        /// Per-bus FTU outage probability, percent.
        #[arg(long, default_value_t = 20)]
        outage_pct: u8,
        #[arg(long)]
        ties: Option<usize>,
        #[arg(long)]
        faults: Option<usize>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate telemetry-consistent states and audit inference soundness.
    Oracle {
        scenario: PathBuf,
    },
}

fn load_file(path: &Path) -> Result<Scenario, i32> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(EXIT_SCHEMA);
        }
    };
    match load_scenario(&text) {
        Ok(s) => Ok(s),
        Err(e @ ScenarioError::Schema(_)) => {
            eprintln!("error: {}: {e}", path.display());
            Err(EXIT_SCHEMA)
        }
        Err(e @ ScenarioError::Validation(_)) => {
            eprintln!("error: {}: {e}", path.display());
            Err(EXIT_SCHEMA)
        }
    }
}

/// Full pipeline on one scenario. Returns the report and the exit code it
/// implies.
pub fn run_scenario(scenario: &Scenario, probes: bool) -> Result<(RunReport, i32), String> {
    let started = Instant::now();
    let ground = ActualStates::initial(scenario);
    let net = &scenario.network;
    let snap = snapshot(net, &ground).map_err(|e| format!("ground state is inadmissible: {e}"))?;

    let mut exec = TruthsimExecutor::new(net, &ground);
    let inf: InferenceResult = if probes {
        infer_states(net, &snap, Some(&mut exec), scenario.probe_magnitude_default)
    } else {
        infer_states(net, &snap, None, scenario.probe_magnitude_default)
    }
    .map_err(|e| e.to_string())?;

    let noop_plan = noop_restore(net, &snap, Some(&inf));
    let scf_plan = scf_restore(net, &inf, &snap).map_err(|e| e.to_string())?;
    let sts_plan = sts_restore(net, &snap);

    let noop = CaseReport::new(&noop_plan, &evaluate(net, &ground, &noop_plan));
    let scf = CaseReport::new(&scf_plan, &evaluate(net, &ground, &scf_plan));
    let sts = CaseReport::new(&sts_plan, &evaluate(net, &ground, &sts_plan));
    let code = if scf.infeasible { EXIT_BUDGET } else { EXIT_OK };

    let report = RunReport::assemble(
        scenario,
        &snap,
        &inf,
        probes,
        noop,
        scf,
        sts,
        started.elapsed(),
    );
    Ok((report, code))
}

fn cmd_run(
    scenarios: &[PathBuf],
    no_probes: bool,
    format: Format,
    out: Option<&Path>,
    jobs: usize,
) -> i32 {
    if scenarios.is_empty() {
        eprintln!("error: no scenario files given");
        return EXIT_SCHEMA;
    }
    let mut loaded = Vec::new();
    for path in scenarios {
        match load_file(path) {
            Ok(s) => loaded.push(s),
            Err(code) => return code,
        }
    }

    type RunOutcome = Result<(RunReport, i32), String>;
    let probes = !no_probes;
    let results: Vec<RunOutcome> = if jobs <= 1 || loaded.len() <= 1 {
        loaded.iter().map(|s| run_scenario(s, probes)).collect()
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<std::sync::Mutex<Option<RunOutcome>>> =
            loaded.iter().map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(loaded.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if i >= loaded.len() {
                        break;
                    }
                    let r = run_scenario(&loaded[i], probes);
                    *slots[i].lock().unwrap() = Some(r);
                });
            }
        });
        slots
            .into_iter()
            .map(|m| m.into_inner().unwrap().expect("worker finished"))
            .collect()
    };

    let mut code = EXIT_OK;
    let mut structured_all = String::new();
    for (path, result) in scenarios.iter().zip(results) {
        match result {
            Ok((report, c)) => {
                code = code.max(c);
                match format {
                    Format::Table => print!("{}", report.to_table()),
                    Format::Structured => print!("{}", report.to_structured()),
                }
                structured_all.push_str(&report.to_structured());
            }
            Err(msg) => {
                eprintln!("error: {}: {msg}", path.display());
                code = code.max(EXIT_BUDGET);
            }
        }
    }
    if let Some(out) = out {
        if let Err(e) = fs::write(out, structured_all) {
            eprintln!("error: cannot write {}: {e}", out.display());
            return EXIT_SCHEMA.max(code);
        }
    }
    code
}

fn cmd_gen(cfg: &GenConfig, out: Option<&Path>) -> i32 {
    match generate(cfg) {
        Ok(s) => {
            let text = serialize_scenario(&s);
            match out {
                Some(path) => {
                    if let Err(e) = fs::write(path, text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return EXIT_SCHEMA;
                    }
                }
                None => {
                    let mut stdout = std::io::stdout().lock();
                    let _ = stdout.write_all(text.as_bytes());
                }
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_SCHEMA
        }
    }
}

fn cmd_oracle(path: &Path) -> i32 {
    let scenario = match load_file(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let net = &scenario.network;
    let ground = ActualStates::initial(&scenario);
    let snap = match snapshot(net, &ground) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: ground state is inadmissible: {e}");
            return EXIT_SCHEMA;
        }
    };
    let cs = match enumerate_consistent(net, &snap, &ground.shed) {
        Ok(cs) => cs,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_BUDGET;
        }
    };
    // Probes inject information the telemetry-only oracle cannot see, so
    // the audited inference runs without them.
    let inf = match infer_states(net, &snap, None, scenario.probe_magnitude_default) {
        Ok(inf) => inf,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_BUDGET;
        }
    };
    let sound = inf
        .resolved_branch
        .iter()
        .all(|(id, st)| cs.forced.get(id) == Some(st));
    let ratio = completeness_ratio(&inf, &cs);
    println!("scenario = {}", scenario.description);
    println!("unknown_branches = {}", snap.unknown_branches().count());
    println!("consistent_assignments = {}", cs.assignments.len());
    println!("forced = {}", cs.forced.len());
    println!("resolved = {}", inf.resolved_branch.len());
    println!("verdict = {}", if sound { "SOUND" } else { "UNSOUND" });
    println!("completeness_ratio = {ratio:.4}");
    if sound {
        EXIT_OK
    } else {
        EXIT_BUDGET
    }
}

/// Parse argv and execute. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_SCHEMA } else { EXIT_OK };
        }
    };
    match cli.cmd {
        Cmd::Run {
            scenarios,
            no_probes,
            format,
            out,
            jobs,
        } => cmd_run(&scenarios, no_probes, format, out.as_deref(), jobs.max(1)),
        Cmd::Gen {
            seed,
            buses,
            dgs,
            outage_pct,
            ties,
            faults,
            out,
        } => {
            let cfg = GenConfig {
                buses,
                dgs,
                seed,
                outage_pct,
                ties,
                faults,
            };
            cmd_gen(&cfg, out.as_deref())
        }
        Cmd::Oracle { scenario } => cmd_oracle(&scenario),
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}
