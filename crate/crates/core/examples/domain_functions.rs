//! The five families of domain-evaluation functions, each mapping a value to
//! a distance from a semantic type.

use std::sync::Arc;

use sdc::corpus::normalize_value;
use sdc::domain::{
    generalize, make_embedding_fn, make_random_hash_fn, make_score_table_fn, EmbeddingSpace, PatternFnParams, Validator,
};

fn main() -> sdc::Result<()> {
    let mut space = EmbeddingSpace::new("toy", 2);
    space.insert("paris", vec![0.0, 0.0]);
    space.insert("london", vec![0.5, 0.2]);
    space.insert("banana", vec![6.0, 4.0]);
    let space = Arc::new(space);

    let fns = vec![
        make_score_table_fn("city", [("paris".into(), 0.95), ("london".into(), 0.9)], 0.0)?,
        make_embedding_fn(&space, "paris")?,
        PatternFnParams::new(generalize("2024-01-31"))?.into_fn(),
        Validator::Email.into_fn(),
        make_random_hash_fn(42),
    ];

    let values = ["London", "banana", "1999-12-01", "ann@example.com", "zzz"];
    print!("{:<28}", "");
    for v in values {
        print!("{v:>17}");
    }
    println!();
    for f in &fns {
        print!("{:<28}", f.id());
        for v in values {
            print!("{:>17.3}", f.eval_distance(&normalize_value(v)));
        }
        println!("   ({})", f.family());
    }
    Ok(())
}
