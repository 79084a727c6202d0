//! Distribution-feeder resilience toolkit: infer the states of
//! unobservable branches and buses from partial FTU telemetry, then form
//! DG-powered microgrids to restore load before communications recover.
//!
//! The crate is organized around the flow of a restoration study:
//!
//! - [`netmodel`] — feeder graph, scenario documents, the bundled 37-node
//!   dataset ([`ieee37`]);
//! - [`truthsim`] — ground-truth energization, exact lossless flows,
//!   telemetry masking, disturbance probes, DG overload trips;
//! - [`pathindex`] — reachability closure and simple-path enumeration
//!   under assumptions about unknown branches;
//! - [`inference`] — the three-rule state inference with lockout handling;
//! - [`consistency`] — brute-force enumeration of telemetry-consistent
//!   states, the soundness oracle for inference;
//! - [`restoration`] — exact branch-and-bound microgrid formation plus the
//!   spanning-tree and do-nothing baselines, and plan evaluation;
//! - [`scenario_gen`] — seeded random feeders for property suites;
//! - [`report`] — byte-stable reports; [`cli`] — the command-line front end.
//!
//! Each major capability has a runnable walkthrough under `examples/`:
//!
//! ```bash
//! cargo run --example three_case_comparison
//! cargo run --example inference_walkthrough
//! cargo run --example probe_attribution
//! cargo run --example oracle_audit
//! cargo run --example scenario_fleet
//! cargo run --example scenario_roundtrip
//! ```

// Graph and matrix code here walks several parallel index-aligned arrays;
// plain index loops read better than zipped iterators for that.
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod consistency;
pub mod ieee37;
pub mod inference;
pub mod netmodel;
pub mod pathindex;
pub mod report;
pub mod restoration;
pub mod scenario_gen;
pub mod truthsim;

pub use ieee37::builtin_ieee37;
pub use inference::{infer_states, InferenceResult, ProbeExecutor, TruthsimExecutor};
pub use netmodel::{load_scenario, serialize_scenario, validate, Network, Scenario};
pub use restoration::{evaluate, noop_restore, scf_restore, sts_restore, RestorationPlan};
pub use truthsim::{snapshot, ActualStates, TelemetrySnapshot};
