//! Distant supervision and ruleset selection: the coarse and fine
//! strategies on the same assessed candidates, with and without budget
//! enforcement after rounding.

use sdc::assess::AssessConfig;
use sdc::candidates::GridSpec;
use sdc::corpus::{CorpusOptions, PreparedCorpus};
use sdc::demo::{generate_demo, DemoConfig, DemoRegistryOptions};
use sdc::pipeline::{generate, select_rules};
use sdc::select::{SelectionConfig, Strategy};

fn main() -> sdc::Result<()> {
    let demo = generate_demo(&DemoConfig {
        columns: 800,
        ..DemoConfig::default()
    })?;
    let registry = demo.registry(&demo.corpus, &DemoRegistryOptions::default())?;
    let corpus = PreparedCorpus::new(&demo.corpus, &CorpusOptions::default());
    let r_all = generate(&corpus, &registry, &GridSpec::default(), &AssessConfig::default(), true)?.accepted;
    println!("{} assessed candidates", r_all.len());

    for (strategy, b_size, enforce) in [
        (Strategy::Coarse, 500, false),
        (Strategy::Fine, 500, false),
        (Strategy::Fine, 10, false),
        (Strategy::Fine, 10, true),
    ] {
        let cfg = SelectionConfig {
            strategy,
            b_size,
            enforce_budgets: enforce,
            ..SelectionConfig::default()
        };
        let s = select_rules(&corpus, &registry, &r_all, None, 0, &cfg)?;
        println!(
            "{strategy:?} b_size {b_size:>3} enforce {enforce:<5}: {} sets to cover, lp {:.1}, rounded {} rules covering {} (fpr sum {:.4})",
            s.selection.problem.cover_sets.len(),
            s.selection.lp.objective,
            s.sdcs.len(),
            s.selection.objective,
            s.selection.fpr_sum,
        );
    }
    Ok(())
}
