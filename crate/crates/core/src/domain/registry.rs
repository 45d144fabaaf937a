//! Function registry plus its JSON manifest.
//!
//! A manifest lists embedding spaces, explicit functions, and generators
//! (centroid sampling, pattern inference, validators, random hashes) that
//! expand against a training corpus. Resolving yields a flat list of
//! concrete [`FnSpec`]s which can be stored and rebuilt later without the
//! corpus.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    builtin_validators, infer_patterns, load_embedding_space, load_score_table, make_embedding_fn, make_random_hash_fn,
    make_score_table_fn, sample_centroids, DomainEvalFn, EmbeddingSpace, Metric, PatternFnParams, SharedFn, Validator,
};
use crate::corpus::{normalize_value, Corpus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FnSpec {
    ScoreTable {
        type_name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        scores: BTreeMap<String, f64>,
        #[serde(default)]
        default_score: f64,
    },
    Embedding {
        space_id: String,
        centroid: String,
    },
    Pattern {
        pattern: String,
    },
    Validator {
        name: String,
    },
    RandomHash {
        seed: u64,
    },
}

impl FnSpec {
    pub fn id(&self) -> String {
        match self {
            FnSpec::ScoreTable { type_name, .. } => format!("cta:{type_name}"),
            FnSpec::Embedding { space_id, centroid } => {
                format!("emb:{space_id}:{}", normalize_value(centroid).trimmed_lower)
            }
            FnSpec::Pattern { pattern } => format!("pat:{pattern}"),
            FnSpec::Validator { name } => format!("fun:{name}"),
            FnSpec::RandomHash { seed } => format!("hash:{seed}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub id: String,
    pub path: PathBuf,
    #[serde(default)]
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FnGenerator {
    SampleCentroids { space: String, k: usize, seed: u64 },
    InferPatterns { top_k: usize },
    BuiltinValidators,
    RandomHash { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegistryManifest {
    pub spaces: Vec<SpaceSpec>,
    pub functions: Vec<FnSpec>,
    pub generators: Vec<FnGenerator>,
}

/// A manifest with all generators expanded.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResolvedRegistry {
    pub spaces: Vec<SpaceSpec>,
    pub functions: Vec<FnSpec>,
}

fn rebase(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RegistryManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Loads spaces and expands generators against `corpus`. Relative paths
    /// are taken from `base`.
    pub fn build(&self, corpus: &Corpus, base: &Path) -> Result<Registry> {
        let mut registry = Registry::default();
        for s in &self.spaces {
            let space = load_embedding_space(rebase(base, &s.path))?
                .with_id(&s.id)
                .with_metric(s.metric);
            registry.add_space(Arc::new(space), Some(s.clone()));
        }
        for spec in &self.functions {
            let f = registry.instantiate(spec, base)?;
            registry.add(f);
        }
        for g in &self.generators {
            let fns = match g {
                FnGenerator::SampleCentroids { space, k, seed } => {
                    let space = registry.space(space)?.clone();
                    sample_centroids(corpus, &space, *k, *seed)?
                }
                FnGenerator::InferPatterns { top_k } => infer_patterns(corpus, *top_k),
                FnGenerator::BuiltinValidators => builtin_validators(),
                FnGenerator::RandomHash { count, seed } => (0..*count as u64)
                    .map(|i| make_random_hash_fn(seed.wrapping_add(i)))
                    .collect(),
            };
            for f in fns {
                registry.add(f);
            }
        }
        Ok(registry)
    }
}

/// The set of domain-evaluation functions (and the embedding spaces they
/// reference) available to training and inference.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    spaces: BTreeMap<String, (Arc<EmbeddingSpace>, Option<SpaceSpec>)>,
    fns: Vec<SharedFn>,
    index: HashMap<String, usize>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_space(&mut self, space: Arc<EmbeddingSpace>, spec: Option<SpaceSpec>) {
        self.spaces.insert(space.id().to_string(), (space, spec));
    }

    pub fn space(&self, id: &str) -> Result<&Arc<EmbeddingSpace>> {
        self.spaces
            .get(id)
            .map(|(s, _)| s)
            .ok_or_else(|| Error::UnknownSpace(id.to_string()))
    }

    /// Adds a function; a second function with an existing id is ignored.
    pub fn add(&mut self, f: DomainEvalFn) -> bool {
        if self.index.contains_key(f.id()) {
            log::debug!("duplicate domain function {} ignored", f.id());
            return false;
        }
        self.index.insert(f.id().to_string(), self.fns.len());
        self.fns.push(Arc::new(f));
        true
    }

    pub fn extend(&mut self, fns: impl IntoIterator<Item = DomainEvalFn>) {
        for f in fns {
            self.add(f);
        }
    }

    pub fn get(&self, id: &str) -> Option<&SharedFn> {
        self.index.get(id).map(|&i| &self.fns[i])
    }

    pub fn require(&self, id: &str) -> Result<&SharedFn> {
        self.get(id).ok_or_else(|| Error::UnknownFunction(id.to_string()))
    }

    pub fn functions(&self) -> &[SharedFn] {
        &self.fns
    }

    pub fn len(&self) -> usize {
        self.fns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fns.is_empty()
    }

    pub fn instantiate(&self, spec: &FnSpec, base: &Path) -> Result<DomainEvalFn> {
        match spec {
            FnSpec::ScoreTable {
                type_name,
                path: Some(path),
                default_score,
                ..
            } => load_score_table(rebase(base, path), type_name, *default_score),
            FnSpec::ScoreTable {
                type_name,
                path: None,
                scores,
                default_score,
            } => make_score_table_fn(type_name, scores.iter().map(|(k, v)| (k.clone(), *v)), *default_score),
            FnSpec::Embedding { space_id, centroid } => make_embedding_fn(self.space(space_id)?, centroid),
            FnSpec::Pattern { pattern } => Ok(PatternFnParams::new(pattern.clone())?.into_fn()),
            FnSpec::Validator { name } => Ok(name.parse::<Validator>()?.into_fn()),
            FnSpec::RandomHash { seed } => Ok(make_random_hash_fn(*seed)),
        }
    }

    /// Rebuilds a registry from resolved specs. Spaces without a file path
    /// must be supplied in `preloaded`.
    pub fn from_resolved(resolved: &ResolvedRegistry, base: &Path, preloaded: &[Arc<EmbeddingSpace>]) -> Result<Self> {
        let mut registry = Registry::default();
        for space in preloaded {
            registry.add_space(Arc::clone(space), None);
        }
        for s in &resolved.spaces {
            if registry.spaces.contains_key(&s.id) {
                continue;
            }
            let space = load_embedding_space(rebase(base, &s.path))?
                .with_id(&s.id)
                .with_metric(s.metric);
            registry.add_space(Arc::new(space), Some(s.clone()));
        }
        for spec in &resolved.functions {
            let f = registry.instantiate(spec, base)?;
            registry.add(f);
        }
        Ok(registry)
    }

    /// Specs for the functions with the given ids, plus the spaces they use.
    pub fn resolved_subset<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<ResolvedRegistry> {
        let wanted: BTreeSet<&str> = ids.into_iter().collect();
        let mut functions = Vec::new();
        let mut space_ids = BTreeSet::new();
        for f in &self.fns {
            if wanted.contains(f.id()) {
                let spec = f.spec();
                if let FnSpec::Embedding { space_id, .. } = &spec {
                    space_ids.insert(space_id.clone());
                }
                functions.push(spec);
            }
        }
        for id in &wanted {
            self.require(id)?;
        }
        let spaces = space_ids
            .iter()
            .filter_map(|id| self.spaces.get(id).and_then(|(_, spec)| spec.clone()))
            .collect();
        Ok(ResolvedRegistry { spaces, functions })
    }

    pub fn resolved(&self) -> ResolvedRegistry {
        let ids: Vec<String> = self.fns.iter().map(|f| f.id().to_string()).collect();
        self.resolved_subset(ids.iter().map(String::as_str))
            .expect("all ids present")
    }
}
