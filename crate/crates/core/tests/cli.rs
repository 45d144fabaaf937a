use std::path::Path;
use std::process::{Command, Output};

use sdc::demo::{generate_demo, DemoConfig, DemoRegistryOptions};
use sdc::pipeline::{GenSummary, PipelineConfig};
use sdc::store::SdcStore;

fn sdc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = sdc(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    sdc(dir, args).status.code().expect("exit code")
}

/// Writes a small demo setup with `config.json` into `dir`.
fn setup(dir: &Path, columns: usize) {
    let demo = generate_demo(&DemoConfig {
        columns,
        ..DemoConfig::default()
    })
    .unwrap();
    let files = demo
        .write_files(dir, columns / 5, 1, &DemoRegistryOptions::default())
        .unwrap();
    let cfg = PipelineConfig {
        corpus: "train.jsonl".into(),
        registry: files.manifest,
        out_dir: "out".into(),
        ..PipelineConfig::default()
    };
    std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
}

fn read(p: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

fn run_all(dir: &Path, workers: &str) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    let c = ["--config", "config.json", "--workers", workers, "--seed", "5"];
    ok(dir, &[&c[..], &["gen"]].concat());
    ok(dir, &[&c[..], &["select"]].concat());
    ok(
        dir,
        &[
            &c[..],
            &[
                "inject",
                "--corpus",
                "test.jsonl",
                "--truth",
                "test_truth.jsonl",
                "--rate",
                "0.1",
            ],
            &["--out", "dirty.jsonl", "--truth-out", "dirty_truth.jsonl"],
        ]
        .concat(),
    );
    ok(
        dir,
        &[
            &c[..],
            &[
                "infer",
                "--rules",
                "out/store.json",
                "--corpus",
                "dirty.jsonl",
                "--out",
                "report.jsonl",
            ],
        ]
        .concat(),
    );
    (
        read(dir.join("out/r_all.jsonl")),
        read(dir.join("out/store.json")),
        read(dir.join("report.jsonl")),
    )
}

#[test]
fn pipeline_is_deterministic_across_worker_counts_and_locations() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    setup(a.path(), 500);
    setup(b.path(), 500);
    let one = run_all(a.path(), "1");
    let four = run_all(b.path(), "4");
    assert!(!one.0.is_empty() && !one.2.is_empty());
    assert_eq!(one, four);
    let again = run_all(a.path(), "3");
    assert_eq!(one, again);
}

#[test]
fn gen_writes_monotone_gate_counts_and_select_writes_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    setup(d, 400);
    ok(d, &["--config", "config.json", "gen"]);
    let s: GenSummary = serde_json::from_slice(&read(d.join("out/gen_stats.json"))).unwrap();
    let g = s.gates;
    assert!(g.candidates >= g.coverage && g.coverage >= g.effect_size);
    assert!(g.effect_size >= g.significance && g.significance >= g.confidence);
    assert_eq!(g.confidence as usize, s.accepted);
    assert!(s.accepted > 0);
    assert_eq!(s.min_coverage, 25);

    ok(
        d,
        &[
            "--config",
            "config.json",
            "select",
            "--strategy",
            "coarse",
            "--b-size",
            "3",
            "--enforce-budgets",
        ],
    );
    let store = SdcStore::load(&d.join("out/store.json")).unwrap();
    assert!(store.sdcs.len() <= 3);
    assert_eq!(store.provenance.selected, store.sdcs.len());
    // Selection flags change the config hash.
    assert_eq!(store.config_hash.len(), 16);
    assert_ne!(store.config_hash, s.config_hash);
    assert!(store.provenance.lp_objective + 1e-9 >= store.provenance.covered as f64);
    assert!(d.join("out/synth.jsonl").exists() && d.join("out/synth_truth.jsonl").exists());

    ok(d, &["--config", "config.json", "select", "--b-size", "0"]);
    let store = SdcStore::load(&d.join("out/store.json")).unwrap();
    assert!(store.sdcs.is_empty());
    assert_eq!(store.provenance.fpr_sum, 0.0);
}

#[test]
fn random_strings_yield_almost_no_constraints() {
    use rand::{Rng, SeedableRng};
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let mut lines = String::new();
    for i in 0..300 {
        let values: Vec<String> = (0..rng.gen_range(10..30))
            .map(|_| {
                let len = rng.gen_range(1..12);
                (0..len).map(|_| rng.gen_range(b'!'..=b'~') as char).collect()
            })
            .collect();
        lines.push_str(&serde_json::json!({"id": format!("r{i}"), "values": values}).to_string());
        lines.push('\n');
    }
    std::fs::write(d.join("corpus.jsonl"), lines).unwrap();
    std::fs::write(
        d.join("config.json"),
        r#"{"corpus": "corpus.jsonl", "registry": {"generators": [{"kind": "builtin_validators"}, {"kind": "random_hash", "count": 20, "seed": 3}]}}"#,
    )
    .unwrap();
    ok(d, &["--config", "config.json", "gen"]);
    let s: GenSummary = serde_json::from_slice(&read(d.join("out/gen_stats.json"))).unwrap();
    assert_eq!(s.functions, 28);
    assert!(s.accepted <= 2, "{} accepted", s.accepted);
}

#[test]
fn bench_reports_metrics_and_baselines() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    setup(d, 600);
    run_all(d, "2");
    let out = ok(
        d,
        &[
            "--config",
            "config.json",
            "--seed",
            "5",
            "bench",
            "--rules",
            "out/store.json",
            "--corpus",
            "dirty.jsonl",
            "--truth",
            "dirty_truth.jsonl",
            "--baselines",
            "out/registry.json",
            "--out",
            "bench.json",
            "--points-csv",
            "pr.csv",
        ],
    );
    assert!(out.contains("PR-AUC"));
    let v: serde_json::Value = serde_json::from_slice(&read(d.join("bench.json"))).unwrap();
    let auc = v["pr_auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc));
    assert!(!v["baselines"].as_array().unwrap().is_empty());
    let csv = String::from_utf8(read(d.join("pr.csv"))).unwrap();
    assert_eq!(csv.lines().count(), v["points"].as_array().unwrap().len() + 1);
    let meta: serde_json::Value = serde_json::from_slice(&read(d.join("report.jsonl.meta.json"))).unwrap();
    assert_eq!(meta["config_hash"], v["config_hash"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(d, &[]), 1);
    assert_eq!(code(d, &["frobnicate"]), 1);
    assert_eq!(code(d, &["--help"]), 0);
    assert_eq!(code(d, &["select", "--strategy", "sideways"]), 1);
    assert_eq!(
        code(
            d,
            &[
                "infer",
                "--rules",
                "missing.json",
                "--corpus",
                "x.jsonl",
                "--out",
                "r.jsonl"
            ]
        ),
        2
    );

    std::fs::write(d.join("bad.json"), r#"{"selection": {"delta": 0.0}}"#).unwrap();
    assert_eq!(code(d, &["--config", "bad.json", "gen"]), 1);
    std::fs::write(d.join("v9.json"), r#"{"version": 9}"#).unwrap();
    assert_eq!(code(d, &["--config", "v9.json", "gen"]), 1);

    std::fs::write(d.join("broken.jsonl"), "{\"id\": \"a\", \"values\": [1, 2\n").unwrap();
    std::fs::write(d.join("c.json"), r#"{"corpus": "broken.jsonl"}"#).unwrap();
    assert_eq!(code(d, &["--config", "c.json", "gen"]), 2);
}
