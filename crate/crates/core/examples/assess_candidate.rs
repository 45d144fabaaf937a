//! Statistical assessment of a single constraint from its contingency
//! table, then the full gate pipeline over a generated corpus.

use sdc::assess::{
    assess_all, chi_squared_p, cohens_h, min_coverage, wilson_lower_confidence, AssessConfig, ContingencyTable,
};
use sdc::candidates::{enumerate_candidates, GridSpec};
use sdc::corpus::{CorpusOptions, PreparedCorpus};
use sdc::demo::{generate_demo, DemoConfig, DemoRegistryOptions};

fn main() -> sdc::Result<()> {
    // 1000 covered columns, 10 of them triggered; 200000 uncovered columns
    // triggered at an 80% background rate.
    let t = ContingencyTable::new(10, 990, 160_000, 40_000);
    let cfg = AssessConfig::default();
    let h = cohens_h(&t)?;
    let chi = chi_squared_p(&t);
    println!("rho {:.4?} vs background {:.4?}", t.rho(), t.rho_bar());
    println!("cohen's h {:.3} (separates: {})", h.h, h.separates);
    println!("chi-squared {:.1}, p {:.3e}", chi.statistic, chi.p);
    println!("wilson confidence {:.4}", wilson_lower_confidence(&t, cfg.z)?);
    println!(
        "minimum coverage for c >= {}: {}",
        cfg.c_thres,
        min_coverage(cfg.z, cfg.c_thres)
    );

    let demo = generate_demo(&DemoConfig {
        columns: 600,
        ..DemoConfig::default()
    })?;
    let registry = demo.registry(&demo.corpus, &DemoRegistryOptions::default())?;
    let corpus = PreparedCorpus::new(&demo.corpus, &CorpusOptions::default());
    let grid = GridSpec::default();
    let out = assess_all(
        enumerate_candidates(registry.functions(), &grid),
        &corpus,
        &registry,
        &cfg,
        true,
    )?;
    println!("\ngate survivors over {} functions: {:?}", registry.len(), out.gates);
    let mut best = out.accepted.clone();
    best.sort_by(|a, b| {
        b.sdc
            .confidence
            .total_cmp(&a.sdc.confidence)
            .then_with(|| a.sdc.id.cmp(&b.sdc.id))
    });
    for a in best.iter().take(5) {
        println!(
            "  {:<32} d_in {:<5} d_out {:<5} m {:<4} conf {:.4}  h {:.2}",
            a.sdc.fn_id, a.sdc.d_in, a.sdc.d_out, a.sdc.m, a.sdc.confidence, a.h
        );
    }
    Ok(())
}
