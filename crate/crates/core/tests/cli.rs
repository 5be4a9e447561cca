use std::fs;

use radio_wakeup::cli::{cli_main, EXIT_CONFIG, EXIT_OK, EXIT_USAGE};
use radio_wakeup::harness::{parse_csv, summarize, ExperimentReport};
use radio_wakeup::schedules::load_array_from_path;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli_main(
        std::iter::once("wakeup").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn bounds_prints_lower_bound() {
    let (code, out, _) = run(&["bounds", "--n", "1048576", "--k", "16", "--b", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(
        out.contains("lower bound (deterministic oblivious): 47\n"),
        "{out}"
    );
    assert!(out.contains("modified shape: n/a"));
}

#[test]
fn bounds_flags_vacuous_lower_bound() {
    let (code, out, _) = run(&["bounds", "--n", "16", "--k", "16", "--b", "4"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("bound vacuous"), "{out}");
}

#[test]
fn verify_selective_singletons() {
    let (code, out, _) = run(&[
        "verify",
        "selective",
        "--family",
        "singletons",
        "--n",
        "4",
        "--k",
        "2",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "selective");
    let (_, out, _) = run(&[
        "verify",
        "selective",
        "--sets",
        "1,2;3,4",
        "--n",
        "4",
        "--k",
        "2",
    ]);
    assert_eq!(out.trim(), "not selective; witness {1,2}");
}

#[test]
fn missing_config_is_a_config_error() {
    let (code, _, err) = run(&["bench", "--config", "missing.json"]);
    assert_eq!(code, EXIT_CONFIG);
    let v: serde_json::Value = serde_json::from_str(err.lines().next().unwrap()).unwrap();
    assert_eq!(v["error"], "config");
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"protocol": {"kind": "nope"}}"#).unwrap();
    let (code, _, _) = run(&["bench", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let (code, _, err) = run(&["frobnicate"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.starts_with("{\"error\":\"usage\""));
}

#[test]
fn gen_array_then_verify_and_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.bin");
    let p = path.to_str().unwrap();
    for extra in [&[][..], &["--explicit"][..]] {
        let mut args = vec![
            "gen-array",
            "--n",
            "8",
            "--b",
            "2",
            "--seed",
            "5",
            "--out",
            p,
        ];
        args.extend_from_slice(extra);
        let (code, out, err) = run(&args);
        assert_eq!(code, EXIT_OK, "{err}");
        assert!(out.contains("n=8 b=2"));
        let array = load_array_from_path(&path).unwrap();
        assert_eq!(array.is_lazy(), extra.is_empty());
        assert_eq!(array.length(), array.schedule().span());
    }
    let (code, out, _) = run(&["verify", "waking", "--array", p, "--n", "8", "--k", "3"]);
    assert_eq!(code, EXIT_OK);
    assert!(
        out.starts_with("waking") || out.starts_with("not waking"),
        "{out}"
    );

    let (code, out, _) = run(&[
        "simulate",
        "--protocol",
        "general",
        "--array",
        p,
        "--n",
        "8",
        "--b",
        "2",
        "--active",
        "3",
        "--trace",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("t=0 tx=["), "{out}");
    assert!(out.contains("woke up at") || out.contains("no wake-up"));
}

#[test]
fn simulate_screening_single_station_wakes_at_once() {
    let (code, out, _) = run(&["simulate", "--n", "8", "--b", "2", "--k", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("woke up at t=0"), "{out}");
}

#[test]
fn verify_blocking_outputs() {
    let (_, out, _) = run(&[
        "verify",
        "blocking",
        "--schedule",
        "all-transmit",
        "--n",
        "6",
        "--k",
        "2",
    ]);
    assert_eq!(out.trim(), "blocking set {1,2}");
    let (_, out, _) = run(&[
        "verify",
        "blocking",
        "--schedule",
        "round-robin",
        "--n",
        "6",
        "--k",
        "2",
    ]);
    assert_eq!(out.trim(), "no blocking set of size 2");
}

#[test]
fn bench_writes_agreeing_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spec.json");
    let csv = dir.path().join("out/trials.csv");
    let json = dir.path().join("out/summary.json");
    fs::write(
        &cfg,
        r#"{"protocol": {"kind": "screening", "k": 8, "epsilon": 0.1},
            "net": {"n": 32, "b": 3, "jam_prob": 0.2},
            "pattern": {"kind": "staggered", "window": 5, "k": 8},
            "trials": 150, "base_seed": 4,
            "overlays": [{"kind": "screening-round", "k": 8, "epsilon": 0.1},
                         {"kind": "fixed", "rounds": 3}]}"#,
    )
    .unwrap();
    let (code, out, err) = run(&[
        "bench",
        "--config",
        cfg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("trials: 150"));

    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("trial,seed,wakeup_time,truncated,rounds\n"));
    let records = parse_csv(&text).unwrap();
    assert_eq!(records.len(), 150);
    let report: ExperimentReport =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let recomputed = summarize(&records, &report.spec.net, &report.spec.overlays).unwrap();
    assert_eq!(recomputed, report.summary);
}

#[test]
fn bench_sweep_writes_one_csv_per_probability() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spec.json");
    fs::write(
        &cfg,
        r#"{"protocol": {"kind": "array-general", "array_seed": 1},
            "net": {"n": 16, "b": 2},
            "pattern": {"kind": "simultaneous", "k": 3},
            "trials": 50, "base_seed": 2}"#,
    )
    .unwrap();
    let csv = dir.path().join("t.csv");
    let json = dir.path().join("s.json");
    let (code, out, err) = run(&[
        "bench",
        "--config",
        cfg.to_str().unwrap(),
        "--sweep",
        "0,0.5,0.75",
        "--csv",
        csv.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(out.lines().count(), 3);
    for i in 0..3 {
        assert!(dir.path().join(format!("t-p{i}.csv")).exists());
    }
    let rows: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
    assert_eq!(rows[0]["p95_ratio"], 1.0);

    let (code, _, _) = run(&["bench", "--config", cfg.to_str().unwrap(), "--sweep", "1.5"]);
    assert_eq!(code, EXIT_USAGE);
}
