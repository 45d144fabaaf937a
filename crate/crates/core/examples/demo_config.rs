//! Writes a generated corpus split, its function resources and a pipeline
//! config into a directory, ready for the `sdc` binary.
//!
//!     cargo run --example demo_config -- /tmp/sdc-demo
//!     sdc --config /tmp/sdc-demo/config.json gen
//!     sdc --config /tmp/sdc-demo/config.json select
//!     sdc --config /tmp/sdc-demo/config.json inject --corpus /tmp/sdc-demo/test.jsonl \
//!         --truth /tmp/sdc-demo/test_truth.jsonl --rate 0.1 --out /tmp/sdc-demo/dirty.jsonl \
//!         --truth-out /tmp/sdc-demo/dirty_truth.jsonl
//!     sdc --config /tmp/sdc-demo/config.json bench --rules /tmp/sdc-demo/out/store.json \
//!         --corpus /tmp/sdc-demo/dirty.jsonl --truth /tmp/sdc-demo/dirty_truth.jsonl \
//!         --baselines /tmp/sdc-demo/out/registry.json --out /tmp/sdc-demo/bench.json

use std::path::PathBuf;

use sdc::demo::{generate_demo, DemoConfig, DemoRegistryOptions};
use sdc::pipeline::PipelineConfig;

fn main() -> sdc::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "sdc-demo".into()));
    let columns: usize = std::env::args().nth(2).map_or(2000, |s| s.parse().expect("columns"));
    let demo = generate_demo(&DemoConfig {
        columns,
        ..DemoConfig::default()
    })?;
    let files = demo.write_files(&dir, columns / 5, 1, &DemoRegistryOptions::default())?;

    let cfg = PipelineConfig {
        corpus: "train.jsonl".into(),
        registry: files.manifest,
        out_dir: "out".into(),
        seed: 0,
        ..PipelineConfig::default()
    };
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg)? + "\n").expect("write config");
    println!(
        "wrote {} (train {}, test {})",
        path.display(),
        files.train.display(),
        files.test.display()
    );
    Ok(())
}
