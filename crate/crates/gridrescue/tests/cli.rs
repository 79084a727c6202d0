//! End-to-end checks of the command-line interface: subcommands, flags,
//! exit codes, and the byte stability of scenario and report output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gridrescue"))
}

fn bundled_scenario() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/ieee37.scenario")
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gridrescue-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn run_produces_table_with_three_cases() {
    let out = run_ok(bin().arg("run").arg(bundled_scenario()));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("1. Do not pick up loads."));
    assert!(text.contains("2. Pick up loads by inference + exact search."));
    assert!(text.contains("3. Pick up loads directly (spanning trees)."));
    assert!(text.contains("1231 + j603"));
}

#[test]
fn structured_runs_are_byte_identical() {
    let first = run_ok(bin()
        .arg("run")
        .arg(bundled_scenario())
        .args(["--format", "structured"]));
    let second = run_ok(bin()
        .arg("run")
        .arg(bundled_scenario())
        .args(["--format", "structured"]));
    assert!(!first.stdout.is_empty());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn no_probes_resolves_no_more_than_probed_run() {
    let count = |bytes: &[u8]| {
        let text = String::from_utf8_lossy(bytes);
        let closed = text
            .lines()
            .find(|l| l.starts_with("resolved_closed = "))
            .map(|l| l.trim_start_matches("resolved_closed = ").split_whitespace().count())
            .unwrap();
        let open = text
            .lines()
            .find(|l| l.starts_with("resolved_open = "))
            .map(|l| l.trim_start_matches("resolved_open = ").split_whitespace().count())
            .unwrap();
        closed + open
    };
    let with = run_ok(bin()
        .arg("run")
        .arg(bundled_scenario())
        .args(["--format", "structured"]));
    let without = run_ok(bin()
        .arg("run")
        .arg(bundled_scenario())
        .args(["--format", "structured", "--no-probes"]));
    assert!(count(&without.stdout) <= count(&with.stdout));
    assert_eq!(count(&with.stdout), 10);
    assert_eq!(count(&without.stdout), 7);
}

#[test]
fn run_writes_structured_out_file() {
    let dir = tmp_dir("out");
    let out_path = dir.join("report.txt");
    run_ok(bin()
        .arg("run")
        .arg(bundled_scenario())
        .arg("--out")
        .arg(&out_path));
    let written = std::fs::read_to_string(&out_path).unwrap();
    assert!(written.starts_with("format = gridrescue-report-v1"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn malformed_scenario_exits_2_with_diagnostics() {
    let dir = tmp_dir("malformed");
    let path = dir.join("bad.scenario");
    std::fs::write(&path, "description = \"x\"\nprobe_magnitude_default = 5\nbuses = 3\n").unwrap();
    let out = bin().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("schema"), "stderr: {err}");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn invalid_network_exits_2() {
    let dir = tmp_dir("invalid");
    let path = dir.join("dangling.scenario");
    std::fs::write(
        &path,
        r#"
description = "dangling endpoint"
probe_magnitude_default = 5

[[buses]]
id = "g"
load_p = 0
load_q = 0
dg = { cap_p = 10, cap_q = 5 }

[[branches]]
id = "g-x"
from = "g"
to = "b99"
ctrl_bus = "g"
initial_closed = true
"#,
    )
    .unwrap();
    let out = bin().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn gen_is_reproducible_and_valid() {
    let a = run_ok(bin().args(["gen", "--seed", "42", "--buses", "20", "--dgs", "2"]));
    let b = run_ok(bin().args(["gen", "--seed", "42", "--buses", "20", "--dgs", "2"]));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let scenario = gridrescue::load_scenario(&text).expect("generated scenario is valid");
    assert_eq!(scenario.network.bus_count(), 20);
    assert_eq!(scenario.network.dg_buses().len(), 2);
}

#[test]
fn gen_rejects_out_of_range_flags() {
    let out = bin()
        .args(["gen", "--seed", "1", "--buses", "9", "--dgs", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["gen", "--seed", "1", "--buses", "20", "--dgs", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_output_runs_end_to_end() {
    let dir = tmp_dir("genrun");
    let path = dir.join("fleet.scenario");
    run_ok(bin().args(["gen", "--seed", "7", "--buses", "24", "--dgs", "2", "--out"]).arg(&path));
    run_ok(bin().arg("run").arg(&path));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn oracle_verdict_on_bundled_scenario_is_sound() {
    let out = run_ok(bin().arg("oracle").arg(bundled_scenario()));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("verdict = SOUND"), "{text}");
    assert!(text.contains("completeness_ratio = 0.5385"), "{text}");
}

#[test]
fn oracle_rejects_too_many_unknowns() {
    let dir = tmp_dir("oracle-cap");
    let path = dir.join("dark.scenario");
    // 25 dark parallel feeders: far beyond the enumeration cap.
    let mut doc = String::from(
        "description = \"too dark\"\nprobe_magnitude_default = 5\n\n[[buses]]\nid = \"g\"\nload_p = 0\nload_q = 0\nftu_online = false\ndg = { cap_p = 10000, cap_q = 5000 }\n",
    );
    for i in 0..25 {
        doc.push_str(&format!(
            "\n[[buses]]\nid = \"b{i}\"\nload_p = 1\nload_q = 1\nftu_online = false\n\n[[branches]]\nid = \"g-b{i}\"\nfrom = \"g\"\nto = \"b{i}\"\nctrl_bus = \"g\"\ninitial_closed = false\n"
        ));
    }
    std::fs::write(&path, doc).unwrap();
    let out = bin().arg("oracle").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn batch_run_with_jobs_preserves_input_order() {
    let dir = tmp_dir("batch");
    let a = dir.join("a.scenario");
    let b = dir.join("b.scenario");
    run_ok(bin().args(["gen", "--seed", "1", "--buses", "15", "--dgs", "1", "--out"]).arg(&a));
    run_ok(bin().args(["gen", "--seed", "2", "--buses", "16", "--dgs", "2", "--out"]).arg(&b));
    let sequential = run_ok(bin()
        .arg("run")
        .arg(&a)
        .arg(&b)
        .args(["--format", "structured"]));
    let parallel = run_ok(bin()
        .arg("run")
        .arg(&a)
        .arg(&b)
        .args(["--format", "structured", "--jobs", "2"]));
    assert_eq!(sequential.stdout, parallel.stdout);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn infeasible_restoration_exits_1() {
    // Start state already beyond the DG rating: holding service is
    // impossible within the constraints, so the planner flags infeasible.
    let dir = tmp_dir("infeasible");
    let path = dir.join("overloaded.scenario");
    std::fs::write(
        &path,
        r#"
description = "overloaded from the start"
probe_magnitude_default = 5

[[buses]]
id = "g"
load_p = 0
load_q = 0
dg = { cap_p = 100, cap_q = 100 }

[[buses]]
id = "a"
load_p = 150
load_q = 50

[[branches]]
id = "g-a"
from = "g"
to = "a"
ctrl_bus = "g"
initial_closed = true
"#,
    )
    .unwrap();
    let out = bin().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("[infeasible]"), "{text}");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn bundled_file_matches_builtin() {
    let text = std::fs::read_to_string(bundled_scenario()).unwrap();
    let from_file = gridrescue::load_scenario(&text).unwrap();
    let builtin = gridrescue::builtin_ieee37();
    assert_eq!(from_file, builtin);
    // the shipped bytes are exactly the canonical serialization
    assert_eq!(text, gridrescue::serialize_scenario(&builtin));
}
