//! End-to-end checks of the `psworld` binary: the exit-code contract,
//! stream discipline (reports on stdout, diagnostics on stderr), and the
//! session semantics of the repl.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_psworld"))
}

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

fn run(args: &[&str]) -> Output {
    let mut cmd = bin();
    for a in args {
        if let Some(name) = a.strip_prefix('@') {
            cmd.arg(corpus(name));
        } else {
            cmd.arg(a);
        }
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

#[test]
fn check_exit_codes() {
    assert_eq!(code(&run(&["check", "@traffic.psw"])), 0);

    let broken = run(&["check", "@broken-boundary.psw"]);
    assert_eq!(code(&broken), 1);
    assert!(stderr(&broken).contains("boundary-not-partition"));
    assert!(stderr(&broken).contains("satellite_uplink"));

    assert_eq!(code(&run(&["check", "@missing.psw"])), 2);
}

#[test]
fn strict_promotes_warnings() {
    let plain = run(&["check", "@traffic_pollution.psw"]);
    assert_eq!(code(&plain), 0);
    assert!(stderr(&plain).contains("outcome-without-grounding"));

    assert_eq!(code(&run(&["check", "@traffic_pollution.psw", "--strict"])), 1);
}

#[test]
fn check_json_report_parses() {
    let out = run(&["check", "@traffic_pollution.psw", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json report");
    let diags = v["diagnostics"].as_array().expect("diagnostics array");
    assert_eq!(diags.len(), 2);
    assert!(diags.iter().any(|d| d["rule"] == "outcome-without-grounding"));
}

#[test]
fn audit_verdict_drives_exit() {
    assert_eq!(code(&run(&["audit", "@traffic.psw"])), 0);

    let short = run(&["audit", "@traffic_pollution.psw"]);
    assert_eq!(code(&short), 1);
    assert!(stdout(&short).contains("grounded-in-system=NO"));
    assert!(stdout(&short).contains("verdict: insufficient"));
}

#[test]
fn audit_rejects_unknown_names() {
    let out = run(&["audit", "@traffic.psw", "--contexts", "ghost"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown-context"));

    assert_eq!(code(&run(&["audit", "@traffic.psw", "--desired", "ghost"])), 2);
}

#[test]
fn audit_with_extra_desired_outcome() {
    // oc_2_1 is grounded and declared, so widening the desired set keeps
    // the audit sufficient.
    assert_eq!(code(&run(&["audit", "@traffic.psw", "--desired", "oc_2_1"])), 0);
}

#[test]
fn audit_restricted_to_one_context() {
    let out = run(&["audit", "@traffic.psw", "--contexts", "OpsC_1"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("OpsC_1"));
    assert!(!stdout(&out).contains("OpsC_2"));
}

#[test]
fn outcome_matrix_json() {
    let out = run(&["outcomes", "@traffic.psw", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json matrix");
    assert_eq!(v["contexts"], serde_json::json!(["OpsC_1", "OpsC_2"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let night = rows.iter().find(|r| r["outcome"] == "oc_3_1").unwrap();
    assert_eq!(night["truths"], serde_json::json!([false, true]));
}

#[test]
fn eval_exit_codes_and_explain() {
    let out = run(&["eval", "@traffic.psw", "oc_1_1", "OpsC_1", "--explain"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("TRUE"));
    assert!(text.contains("i_tick carries timer_trigger"));

    assert_eq!(code(&run(&["eval", "@traffic.psw", "ghost", "OpsC_1"])), 2);
    assert_eq!(code(&run(&["eval", "@traffic.psw", "oc_1_1", "ghost"])), 2);

    // A false verdict is still a successful evaluation.
    assert_eq!(code(&run(&["eval", "@traffic.psw", "oc_3_1", "OpsC_1"])), 0);
}

#[test]
fn minimal_sets_cap_and_heuristic() {
    let capped = bin()
        .args(["minimal-sets"])
        .arg(corpus("traffic.psw"))
        .arg("oc_1_1")
        .env("PSWORLD_MAX_SUBSETS", "1")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&capped.stderr).contains("search-too-large"));

    let heuristic = bin()
        .args(["minimal-sets"])
        .arg(corpus("traffic.psw"))
        .arg("oc_1_1")
        .arg("--heuristic")
        .env("PSWORLD_MAX_SUBSETS", "1")
        .output()
        .unwrap();
    assert_eq!(heuristic.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&heuristic.stdout).contains("NOT certified complete"));

    let bad = bin()
        .args(["minimal-sets"])
        .arg(corpus("traffic.psw"))
        .arg("oc_1_1")
        .env("PSWORLD_MAX_SUBSETS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn minimal_sets_finds_alternatives() {
    let out = run(&["minimal-sets", "@redundant.psw", "detected"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("2 minimal sets"));
    assert!(text.contains("{ ir_a }"));
    assert!(text.contains("{ ir_b }"));
}

#[test]
fn reduce_refuses_essential_interactions() {
    let out = run(&["reduce", "@traffic.psw", "--remove", "i_sig_veh"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("not-removable"));
}

#[test]
fn reduce_writes_a_loadable_model() {
    let dir = tempfile::tempdir().unwrap();
    let reduced = dir.path().join("reduced.psw");
    let out = bin()
        .arg("reduce")
        .arg(corpus("traffic_maintenance.psw"))
        .arg("--output")
        .arg(&reduced)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&reduced).unwrap();
    // The provenance header names the removed ids; the declarations must
    // be gone.
    assert!(text.starts_with("# reduced: removed"));
    assert!(!text.contains("interaction i_maint"));
    let check = bin().arg("check").arg(&reduced).output().unwrap();
    assert_eq!(check.status.code(), Some(0));
}

#[test]
fn rescope_roundtrip_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let moved = dir.path().join("moved.psw");
    let out = bin()
        .arg("rescope")
        .arg(corpus("traffic.psw"))
        .args(["--internal", "clock,traffic_light,vehicles"])
        .arg("--output")
        .arg(&moved)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("moved in: vehicles"));

    let verify = bin()
        .arg("verify-rescope")
        .arg(corpus("traffic.psw"))
        .arg(&moved)
        .output()
        .unwrap();
    assert_eq!(verify.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&verify.stdout).contains("truth invariant: yes"));
}

#[test]
fn verify_rescope_rejects_different_worlds() {
    let out = run(&["verify-rescope", "@traffic.psw", "@redundant.psw"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("not-a-rescope"));
}

#[test]
fn simulate_prints_transitions() {
    let out = run(&["simulate", "@traffic.psw", "--contexts", "OpsC_1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("traffic_light.signal_control: Red --timer_trigger via i_tick--> Green"));
    assert!(text.contains("final vehicles.drive = Stop"));

    assert_eq!(code(&run(&["simulate", "@traffic.psw", "--contexts", "ghost"])), 2);
}

#[test]
fn impact_previews_audit_deltas() {
    let ungrounded = run(&[
        "impact",
        "@traffic.psw",
        "pollution_reduced",
        "--desc",
        "idling emissions fall",
        "--goals",
        "g_12",
    ]);
    assert_eq!(code(&ungrounded), 1);
    let text = stdout(&ungrounded);
    assert!(text.contains("grounded-in-system now FAILS"));
    assert!(text.contains("verdict: insufficient"));

    let grounded = run(&[
        "impact",
        "@traffic.psw",
        "oc_extra",
        "--grounding",
        "i_sig_veh",
        "--goals",
        "g_12",
    ]);
    assert_eq!(code(&grounded), 0);

    // Probing an outcome id that already exists is a usage-level refusal.
    assert_eq!(code(&run(&["impact", "@traffic.psw", "oc_1_1"])), 1);
}

#[test]
fn repl_survives_bad_commands() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("session.txt");
    std::fs::write(
        &script,
        "frobnicate the model\nactivate ghost\neval oc_1_1 OpsC_1\nquit\n",
    )
    .unwrap();
    let out = bin()
        .arg("repl")
        .arg(corpus("traffic.psw"))
        .arg("--script")
        .arg(&script)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown command"));
    assert!(err.contains("unknown-context"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("oc_1_1 in OpsC_1: TRUE"));
}

#[test]
fn repl_undo_restores_the_loaded_model_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("session.txt");
    let saved = dir.path().join("after_undo.psw");
    std::fs::write(
        &script,
        format!(
            "outcome probe \"a scratch outcome\" grounding {{ i_tick }}\nundo\nsave {}\nquit\n",
            saved.display()
        ),
    )
    .unwrap();
    let out = bin()
        .arg("repl")
        .arg(corpus("traffic.psw"))
        .arg("--script")
        .arg(&script)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let roundtrip = std::fs::read_to_string(&saved).unwrap();
    let original = std::fs::read_to_string(corpus("traffic.psw")).unwrap();
    assert_eq!(roundtrip, original, "undo must reproduce the loaded model byte for byte");
}

#[test]
fn repl_save_then_load_preserves_the_session_model() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("build.txt");
    let saved = dir.path().join("built.psw");
    std::fs::write(
        &script,
        format!(
            "entity box kind internal {{ function hold domain {{ item }} codomain {{ item }} }}\n\
             entity sky kind env {{ emits item on give }}\n\
             interact give : sky -> box flow item\n\
             boundary internal {{ box }}\n\
             context c1 {{ emit sky flow item on give }}\n\
             outcome kept \"the box holds something\" grounding {{ give }}\n\
             save {}\nquit\n",
            saved.display()
        ),
    )
    .unwrap();
    let out = bin().arg("repl").arg("--script").arg(&script).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let check = bin().arg("check").arg(&saved).output().unwrap();
    assert_eq!(check.status.code(), Some(0), "saved session model must validate");

    let eval = bin().arg("eval").arg(&saved).args(["kept", "c1"]).output().unwrap();
    assert_eq!(eval.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&eval.stdout).contains("TRUE"));
}

#[test]
fn repl_script_replay_is_deterministic() {
    let run_once = || {
        bin()
            .arg("repl")
            .arg("--script")
            .arg(corpus("session.repl"))
            .current_dir(env!("CARGO_MANIFEST_DIR"))
            .output()
            .unwrap()
    };
    let a = run_once();
    let b = run_once();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
}
