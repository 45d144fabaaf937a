use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{DomainEvalFn, FnKind};
use crate::corpus::{normalize_value, NormalizedValue};
use crate::error::{Error, Result};

/// Precomputed per-value type scores standing in for a column-type
/// classifier. Distance is `1 - score`.
#[derive(Debug, Clone)]
pub struct ScoreTableParams {
    pub type_name: String,
    pub scores: HashMap<String, f64>,
    pub default_score: f64,
    pub source: Option<PathBuf>,
}

impl ScoreTableParams {
    pub(super) fn distance(&self, v: &NormalizedValue) -> f64 {
        1.0 - self.scores.get(&v.trimmed_lower).copied().unwrap_or(self.default_score)
    }
}

fn check_score(value: &str, score: f64) -> Result<()> {
    if (0.0..=1.0).contains(&score) {
        Ok(())
    } else {
        Err(Error::ScoreOutOfRange {
            value: value.to_string(),
            score,
        })
    }
}

pub fn make_score_table_fn(
    type_name: &str,
    scores: impl IntoIterator<Item = (String, f64)>,
    default_score: f64,
) -> Result<DomainEvalFn> {
    check_score("<default>", default_score)?;
    let mut table = HashMap::new();
    for (value, score) in scores {
        check_score(&value, score)?;
        table.insert(normalize_value(&value).trimmed_lower, score);
    }
    Ok(DomainEvalFn::new(
        format!("cta:{type_name}"),
        FnKind::ScoreTable(ScoreTableParams {
            type_name: type_name.to_string(),
            scores: table,
            default_score,
            source: None,
        }),
    ))
}

#[derive(Deserialize)]
struct ScoreLine {
    value: String,
    score: f64,
}

/// Loads JSONL lines `{"value": str, "score": float}` keyed by normalized value.
pub fn load_score_table(path: impl AsRef<Path>, type_name: &str, default_score: f64) -> Result<DomainEvalFn> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut entries = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: ScoreLine = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        entries.push((entry.value, entry.score));
    }
    let mut f = make_score_table_fn(type_name, entries, default_score)?;
    if let FnKind::ScoreTable(p) = &mut f.kind {
        p.source = Some(path.to_path_buf());
    }
    Ok(f)
}
