//! Learn a ruleset, then check a few hand-written columns and print the
//! explanation attached to each flagged value.

use sdc::assess::AssessConfig;
use sdc::candidates::GridSpec;
use sdc::corpus::{normalize_value, CorpusOptions, PreparedCorpus};
use sdc::demo::{generate_demo, DemoConfig, DemoRegistryOptions};
use sdc::infer::{compile_ruleset, detect_errors};
use sdc::pipeline::{generate, select_rules};
use sdc::select::SelectionConfig;

fn main() -> sdc::Result<()> {
    let demo = generate_demo(&DemoConfig::default())?;
    let registry = demo.registry(&demo.corpus, &DemoRegistryOptions::default())?;
    let corpus = PreparedCorpus::new(&demo.corpus, &CorpusOptions::default());
    let r_all = generate(&corpus, &registry, &GridSpec::default(), &AssessConfig::default(), true)?.accepted;
    let selected = select_rules(&corpus, &registry, &r_all, None, 0, &SelectionConfig::default())?;
    let ruleset = compile_ruleset(&selected.sdcs, &registry)?;
    println!(
        "{} rules, {} precondition groups\n",
        ruleset.len(),
        ruleset.precondition_groups.len()
    );

    let columns: [(&str, &[&str]); 3] = [
        (
            "colors",
            &[
                "red", "blue", "green", "teal", "navy", "olive", "pink", "Seattle", "white", "black", "gray",
            ],
        ),
        (
            "signup",
            &[
                "2019-03-04T10:11:12Z",
                "2020-12-01T00:00:00Z",
                "2021-07-19T08:45:00Z",
                "2022-02-28T23:59:59Z",
                "2018-11-11T11:11:11Z",
                "not a timestamp",
                "2023-05-06T07:08:09Z",
                "2017-01-01T12:00:00Z",
            ],
        ),
        (
            "pets",
            &["dog", "cat", "horse", "rabbit", "goat", "sheep", "pig", "cow"],
        ),
    ];
    for (id, raw) in columns {
        let values: Vec<_> = raw.iter().map(|v| normalize_value(v)).collect();
        let found = detect_errors(&ruleset, id, &values);
        println!("{id}: {} flagged", found.len());
        for d in found {
            println!("  [{:.3}] {}", d.confidence, d.explanation);
        }
    }
    Ok(())
}
