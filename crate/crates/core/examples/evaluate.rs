//! Error injection, PR curves and the z-score baselines.

use sdc::corpus::{normalize_value, Column, Corpus};
use sdc::domain::Validator;
use sdc::eval::{inject_errors, pr_curve, zscore_baseline, GroundTruth, Metrics};
use sdc::infer::Detection;

fn det(column: &str, index: usize, confidence: f64) -> Detection {
    Detection {
        column_id: column.into(),
        value_index: index,
        value: String::new(),
        confidence,
        sdc_id: "r".into(),
        explanation: String::new(),
    }
}

fn main() -> sdc::Result<()> {
    let mut truth = GroundTruth::default();
    truth.mark("a", 3);
    truth.mark("b", 0);
    truth.mark("c", 7);
    let report = [det("a", 3, 0.99), det("b", 2, 0.95), det("b", 0, 0.9), det("d", 1, 0.5)];
    for p in pr_curve(&report, &truth) {
        println!(
            "conf >= {:.2}: precision {:.3}, recall {:.3}",
            p.threshold, p.precision, p.recall
        );
    }
    let m = Metrics::compute(&report, &truth);
    println!("PR-AUC {:.4}, F1 at precision 0.8 {:.4}\n", m.pr_auc, m.f1_at_p08);

    let corpus = Corpus::new(vec![
        Column::new(
            "emails",
            ["a@x.com", "b@y.org", "c@z.net", "d@w.io"].map(String::from).to_vec(),
        ),
        Column::new(
            "urls",
            ["https://a.com", "http://b.org/x", "https://c.net/y"]
                .map(String::from)
                .to_vec(),
        ),
    ])?;
    let (dirty, t) = inject_errors(&corpus, &GroundTruth::default(), 1.0, 5)?;
    for c in dirty.iter() {
        println!("{}: {:?} errors at {:?}", c.id, c.values, t.errors.get(&c.id));
    }

    let email = Validator::Email.into_fn();
    let c = dirty.get("emails").expect("column");
    let values: Vec<_> = c.values.iter().map(|v| normalize_value(v)).collect();
    for d in zscore_baseline(&email, &c.id, &values, 1.0) {
        println!("z-score flags {:?} with z {:.2}", d.value, d.confidence);
    }
    Ok(())
}
