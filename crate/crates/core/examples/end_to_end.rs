//! Train on a generated typed corpus, then detect errors on held-out columns
//! and compare with the z-score baselines.
//!
//!     cargo run --release --example end_to_end -- [columns] [heldout]

use std::time::Instant;

use sdc::assess::AssessConfig;
use sdc::candidates::GridSpec;
use sdc::corpus::{sample_columns, CorpusOptions, PreparedCorpus};
use sdc::demo::{generate_demo, DemoConfig, DemoRegistryOptions};
use sdc::eval::{baseline_sweep, inject_errors, GroundTruth, Metrics};
use sdc::infer::detect_corpus;
use sdc::pipeline::{generate, select_rules};
use sdc::select::SelectionConfig;

fn main() -> sdc::Result<()> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let columns: usize = args.next().map_or(2000, |s| s.parse().expect("columns"));
    let heldout: usize = args.next().map_or(400, |s| s.parse().expect("heldout"));

    let demo = generate_demo(&DemoConfig {
        columns,
        ..DemoConfig::default()
    })?;
    let (train, test) = sample_columns(&demo.corpus, heldout, 1)?;
    let registry = demo.registry(&train, &DemoRegistryOptions::default())?;
    println!("{} training columns, {} functions", train.len(), registry.len());

    let opts = CorpusOptions::default();
    let prepared = PreparedCorpus::new(&train, &opts);
    let t = Instant::now();
    let outcome = generate(
        &prepared,
        &registry,
        &GridSpec::default(),
        &AssessConfig::default(),
        true,
    )?;
    println!("assessment: {:?} in {:.1?}", outcome.gates, t.elapsed());

    let t = Instant::now();
    let cfg = SelectionConfig::default();
    let selected = select_rules(&prepared, &registry, &outcome.accepted, None, 0, &cfg)?;
    println!(
        "selected {} of {} rules, covering {} synthetic columns (lp {:.1}) in {:.1?}",
        selected.sdcs.len(),
        selected.stats.len(),
        selected.selection.objective,
        selected.selection.lp.objective,
        t.elapsed()
    );

    let mut truth = GroundTruth::default();
    for c in test.iter() {
        if let Some(e) = demo.truth.errors.get(&c.id) {
            truth.errors.insert(c.id.clone(), e.clone());
        }
    }
    let (dirty, truth) = inject_errors(&test, &truth, 0.1, 3)?;
    let held = PreparedCorpus::new(&dirty, &opts);
    let ruleset = sdc::infer::compile_ruleset(&selected.sdcs, &registry)?;
    let report = detect_corpus(&ruleset, &held, 0.0);
    let metrics = Metrics::compute(&report, &truth);
    println!(
        "{} errors in {} columns, {} detections: PR-AUC {:.3}, F1@P0.8 {:.3}",
        truth.total_errors(),
        dirty.len(),
        report.len(),
        metrics.pr_auc,
        metrics.f1_at_p08
    );
    for p in metrics.points.iter().take(5) {
        println!(
            "  conf >= {:.4}: precision {:.3}, recall {:.3}",
            p.threshold, p.precision, p.recall
        );
    }
    for d in report.iter().take(3) {
        println!("  {}", d.explanation);
    }

    let baselines = baseline_sweep(&registry, &held, &truth)?;
    for b in baselines.iter().take(5) {
        println!(
            "baseline {}: PR-AUC {:.3}, F1@P0.8 {:.3}",
            b.name, b.pr_auc, b.f1_at_p08
        );
    }
    Ok(())
}
