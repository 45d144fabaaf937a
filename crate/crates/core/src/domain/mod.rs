//! Domain-evaluation functions: standardized distances from a value to a
//! semantic type.
//!
//! Every family maps a value to a non-negative distance where smaller means
//! "more likely inside the domain". Score tables, patterns, validators and
//! random hashes produce distances in `[0, 1]`; embeddings produce metric
//! distances, with out-of-vocabulary values at `+inf`.

mod embedding;
mod hash;
mod pattern;
mod registry;
mod score_table;
mod validators;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::NormalizedValue;

pub use embedding::{
    embed_value, load_embedding_space, make_embedding_fn, sample_centroids, EmbeddingFnParams, EmbeddingSpace, Metric,
};
pub use hash::make_random_hash_fn;
pub use pattern::{generalize, infer_pattern_counts, infer_patterns, PatternFnParams};
pub use registry::{FnGenerator, FnSpec, Registry, RegistryManifest, ResolvedRegistry, SpaceSpec};
pub use score_table::{load_score_table, make_score_table_fn, ScoreTableParams};
pub use validators::{builtin_validators, Validator, ValidatorFnParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ScoreTable,
    Embedding,
    Pattern,
    Validator,
    RandomHash,
}

impl Family {
    /// Pattern and validator functions only ever return 0 or 1.
    pub fn is_binary(self) -> bool {
        matches!(self, Family::Pattern | Family::Validator)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::ScoreTable => "score_table",
            Family::Embedding => "embedding",
            Family::Pattern => "pattern",
            Family::Validator => "validator",
            Family::RandomHash => "random_hash",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub enum FnKind {
    ScoreTable(ScoreTableParams),
    Embedding(EmbeddingFnParams),
    Pattern(PatternFnParams),
    Validator(ValidatorFnParams),
    RandomHash { seed: u64 },
}

/// A named distance function `f_t(v) >= 0`.
#[derive(Debug, Clone)]
pub struct DomainEvalFn {
    id: String,
    kind: FnKind,
}

impl DomainEvalFn {
    pub fn new(id: impl Into<String>, kind: FnKind) -> Self {
        DomainEvalFn { id: id.into(), kind }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> &FnKind {
        &self.kind
    }

    pub fn family(&self) -> Family {
        match self.kind {
            FnKind::ScoreTable(_) => Family::ScoreTable,
            FnKind::Embedding(_) => Family::Embedding,
            FnKind::Pattern(_) => Family::Pattern,
            FnKind::Validator(_) => Family::Validator,
            FnKind::RandomHash { .. } => Family::RandomHash,
        }
    }

    pub fn eval_distance(&self, v: &NormalizedValue) -> f64 {
        match &self.kind {
            FnKind::ScoreTable(p) => p.distance(v),
            FnKind::Embedding(p) => p.distance(v),
            FnKind::Pattern(p) => binary(p.matches(&v.raw)),
            FnKind::Validator(p) => binary(p.validator.accepts(&v.raw)),
            FnKind::RandomHash { seed } => hash::unit_hash(*seed, &v.trimmed_lower),
        }
    }

    /// Short human-readable rendering used in detection explanations.
    pub fn describe(&self) -> String {
        match &self.kind {
            FnKind::ScoreTable(p) => format!("type '{}'", p.type_name),
            FnKind::Embedding(p) => format!("'{}' in {}", p.centroid, p.space.id()),
            FnKind::Pattern(p) => format!("pattern '{}'", p.pattern),
            FnKind::Validator(p) => format!("validator {}", p.validator.name()),
            FnKind::RandomHash { seed } => format!("random hash {seed}"),
        }
    }

    /// The serializable description this function can be rebuilt from.
    pub fn spec(&self) -> FnSpec {
        match &self.kind {
            FnKind::ScoreTable(p) => FnSpec::ScoreTable {
                type_name: p.type_name.clone(),
                path: p.source.clone(),
                scores: if p.source.is_some() {
                    Default::default()
                } else {
                    p.scores.iter().map(|(k, v)| (k.clone(), *v)).collect()
                },
                default_score: p.default_score,
            },
            FnKind::Embedding(p) => FnSpec::Embedding {
                space_id: p.space.id().to_string(),
                centroid: p.centroid.clone(),
            },
            FnKind::Pattern(p) => FnSpec::Pattern {
                pattern: p.pattern.clone(),
            },
            FnKind::Validator(p) => FnSpec::Validator {
                name: p.validator.name().to_string(),
            },
            FnKind::RandomHash { seed } => FnSpec::RandomHash { seed: *seed },
        }
    }
}

fn binary(accepted: bool) -> f64 {
    if accepted {
        0.0
    } else {
        1.0
    }
}

pub type SharedFn = Arc<DomainEvalFn>;
