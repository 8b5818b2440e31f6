use std::path::Path;
use std::process::Command;

use esqkd_cli::{
    read_transcript, run_with, write_transcript, Context, EXIT_ABORT, EXIT_OK, EXIT_USAGE,
};
use esqkd_core::adversary::{attack_to_json, random_attack};
use esqkd_core::protocol::{AttackChoice, SessionPhase};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn run(args: &[&str]) -> (i32, String, String) {
    run_ctx(args, &Context::default())
}

fn run_ctx(args: &[&str], ctx: &Context) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("esqkd").chain(args.iter().copied());
    let code = run_with(argv, ctx, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(run(&["session", "--no-such-flag"]).0, EXIT_USAGE);
    assert_eq!(run(&["session", "--pairs", "many"]).0, EXIT_USAGE);
    assert_eq!(run(&["session", "--detect-fraction", "1.5"]).0, EXIT_USAGE);
    assert_eq!(run(&["session", "--attack", "ancilla:"]).0, EXIT_USAGE);
    assert_eq!(run(&["bound-scan", "--steps", "1"]).0, EXIT_USAGE);
    assert_eq!(run(&["es-demo", "--trials", "0"]).0, EXIT_USAGE);
    assert_eq!(run(&[]).0, EXIT_USAGE);
}

#[test]
fn help_and_version_exit_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("bound-scan"));
    let (code, out, _) = run(&["--version"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# shared settings\npairs = 10\nseed=3\ninitial=random  # mixed\n",
    )
    .unwrap();
    let out = dir.path().join("t.json");
    let (code, _, err) = run(&[
        "session",
        "--config",
        path_str(&cfg),
        "--pairs",
        "12",
        "--output",
        path_str(&out),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let t = read_transcript(&out).unwrap();
    assert_eq!(t.config.pairs, 12);
    assert_eq!(t.seed, 3);
    assert_eq!(t.config.seed, 3);
    assert_eq!(t.initial_states.len(), 12);
}

#[test]
fn bad_config_files_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "pairs=10\ncolour=blue\n").unwrap();
    let (code, _, err) = run(&["session", "--config", path_str(&cfg)]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("colour"), "{err}");
    std::fs::write(&cfg, "pairs\n").unwrap();
    assert_eq!(run(&["session", "--config", path_str(&cfg)]).0, EXIT_USAGE);
    let (code, _, err) = run(&[
        "session",
        "--config",
        path_str(&dir.path().join("missing.cfg")),
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("missing.cfg"), "{err}");
}

#[test]
fn malformed_attack_file_names_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("att.json");
    let att = attack_to_json(&random_attack(&mut ChaCha8Rng::seed_from_u64(1)));
    let mut v: serde_json::Value = serde_json::from_str(&att).unwrap();
    v["a"][0] = serde_json::json!(0.9);
    std::fs::write(&file, v.to_string()).unwrap();
    let choice = format!("ancilla:{}", file.display());
    for cmd in ["session", "attack-analyze"] {
        let (code, _, err) = run(&[cmd, "--attack", &choice]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("a_k^2"), "{err}");
    }
    std::fs::write(&file, "{not json").unwrap();
    assert_eq!(run(&["attack-analyze", "--attack", &choice]).0, EXIT_USAGE);
}

#[test]
fn ancilla_attack_file_drives_session_and_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("att.json");
    std::fs::write(
        &file,
        attack_to_json(&random_attack(&mut ChaCha8Rng::seed_from_u64(2))),
    )
    .unwrap();
    let choice = format!("ancilla:{}", file.display());
    let out = dir.path().join("t.json");
    let (code, _, _) = run(&[
        "session",
        "--attack",
        &choice,
        "--abort-threshold",
        "1",
        "--output",
        path_str(&out),
    ]);
    assert_eq!(code, EXIT_OK);
    let t = read_transcript(&out).unwrap();
    assert_eq!(
        t.config.attack,
        AttackChoice::Ancilla(file.display().to_string())
    );
    assert!(t.detection_error_rate.unwrap() > 0.0);
    let (code, out, _) = run(&["attack-analyze", "--attack", &choice]);
    assert_eq!(code, EXIT_OK);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(report["forbidden_mass"].as_f64().unwrap() > 0.0);
    assert!(report["margin"].as_f64().unwrap() >= 0.0);
}

#[test]
fn out_dir_supplies_default_paths() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = Context {
        out_dir: Some(dir.path().join("runs")),
    };
    assert_eq!(run_ctx(&["session", "--pairs", "8"], &ctx).0, EXIT_OK);
    assert_eq!(run_ctx(&["bound-scan", "--steps", "3"], &ctx).0, EXIT_OK);
    assert!(dir.path().join("runs/session.json").is_file());
    let csv = std::fs::read_to_string(dir.path().join("runs/bound-scan.csv")).unwrap();
    assert!(csv.starts_with("attack_id,t,d,chi_eve,bound,margin\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn transcript_write_read_write_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.json");
    assert_eq!(
        run(&[
            "session",
            "--seed",
            "11",
            "--initial",
            "random",
            "--output",
            path_str(&first)
        ])
        .0,
        EXIT_OK
    );
    let t = read_transcript(&first).unwrap();
    let second = dir.path().join("b.json");
    write_transcript(&t, &second).unwrap();
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );
    assert_eq!(t.tool, "esqkd");
    assert_eq!(t.version, env!("CARGO_PKG_VERSION"));
    assert_eq!(t.seed, 11);
    let text = std::fs::read_to_string(&first).unwrap();
    assert!(text.contains("\"config\""));
}

#[test]
fn write_failure_reports_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let (code, _, err) = run(&["session", "--output", path_str(&blocker.join("t.json"))]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("file/t.json"), "{err}");
}

#[test]
fn abort_is_recorded_and_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let (code, _, err) = run(&[
        "session",
        "--pairs",
        "100",
        "--attack",
        "intercept-resend",
        "--seed",
        "1",
        "--output",
        path_str(&out),
    ]);
    assert_eq!(code, EXIT_ABORT);
    assert!(err.contains("aborted"));
    let t = read_transcript(&out).unwrap();
    assert!(t.aborted);
    assert_eq!(t.abort.as_ref().unwrap().phase, SessionPhase::Detection);
    let rate = t.detection_error_rate.unwrap();
    assert!((rate - 0.75).abs() < 0.2, "{rate}");
}

#[test]
fn efficiency_prints_four_fifths() {
    let (code, out, _) = run(&["efficiency", "--pairs", "4", "--cbits", "1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "0.8\n");
    // the grouped scheme itself announces one bit for four particles
    assert_eq!(run(&["efficiency"]).1, "0.8\n");
}

#[test]
fn es_demo_histogram_is_diagonal() {
    let (code, out, _) = run(&["es-demo", "--trials", "20000", "--seed", "7"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["agreement"], 1.0);
    for x in 0..4 {
        for y in 0..4 {
            let f = v["frequencies"][x][y].as_f64().unwrap();
            if x == y {
                assert!((f - 0.25).abs() < 0.015);
            } else {
                assert_eq!(f, 0.0);
            }
        }
    }
    let (code, out, _) = run(&["es-demo", "--trials", "2000", "--initial", "random"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["agreement"], 1.0);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_esqkd");
    let status = |args: &[&str]| {
        Command::new(bin)
            .args(args)
            .env_remove("ESQKD_OUT_DIR")
            .output()
            .unwrap()
    };
    let o = status(&["efficiency", "--pairs", "4", "--cbits", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout), "0.8\n");
    assert_eq!(status(&["session", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        status(&["session", "--attack", "intercept-resend", "--seed", "1"])
            .status
            .code(),
        Some(2)
    );
}
