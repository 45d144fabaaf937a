use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DomainEvalFn, FnKind};
use crate::corpus::{normalize_value, Corpus, NormalizedValue};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
    /// `1 - cos(a, b)`
    Cosine,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Metric::Cosine => {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                if na == 0.0 || nb == 0.0 {
                    1.0
                } else {
                    (1.0 - dot / (na * nb)).max(0.0)
                }
            }
        }
    }
}

/// Token vectors of a fixed dimension.
#[derive(Debug, Clone)]
pub struct EmbeddingSpace {
    id: String,
    dimension: usize,
    metric: Metric,
    vectors: HashMap<String, Vec<f32>>,
    duplicates: Vec<String>,
}

impl EmbeddingSpace {
    pub fn new(id: impl Into<String>, dimension: usize) -> Self {
        EmbeddingSpace {
            id: id.into(),
            dimension,
            metric: Metric::Euclidean,
            vectors: HashMap::new(),
            duplicates: Vec::new(),
        }
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Inserts (or replaces) a token vector. Panics on a dimension mismatch.
    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f32>) {
        assert_eq!(vector.len(), self.dimension, "embedding dimension mismatch");
        self.vectors.insert(token.into(), vector);
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    /// Tokens that appeared more than once in the source file.
    /// Tokens in sorted order.
    pub fn tokens(&self) -> Vec<&str> {
        let mut t: Vec<&str> = self.vectors.keys().map(String::as_str).collect();
        t.sort_unstable();
        t
    }

    pub fn duplicates(&self) -> &[String] {
        &self.duplicates
    }
}

/// Reads a GloVe-style text file: `token v1 v2 ... vd` per line. The space id
/// is the file stem.
pub fn load_embedding_space(path: impl AsRef<Path>) -> Result<EmbeddingSpace> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "embedding".into());
    let mut space: Option<EmbeddingSpace> = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut parts = line.split_whitespace();
        let Some(token) = parts.next() else { continue };
        let vector = parts
            .map(str::parse::<f32>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| malformed(path, i + 1, e.to_string()))?;
        if vector.is_empty() {
            return Err(malformed(path, i + 1, "token without vector".into()));
        }
        let space = space.get_or_insert_with(|| EmbeddingSpace::new(id.clone(), vector.len()));
        if vector.len() != space.dimension {
            return Err(Error::Dimension {
                path: path.to_path_buf(),
                line: i + 1,
                expected: space.dimension,
                found: vector.len(),
            });
        }
        if space.vectors.insert(token.to_string(), vector).is_some() {
            log::warn!(
                "{}:{}: duplicate token {token:?}, keeping the later vector",
                path.display(),
                i + 1
            );
            space.duplicates.push(token.to_string());
        }
    }
    space.ok_or_else(|| Error::EmptyEmbeddingFile(path.to_path_buf()))
}

fn malformed(path: &Path, line: usize, message: String) -> Error {
    Error::Malformed {
        path: PathBuf::from(path),
        line,
        message,
    }
}

/// Embeds a value: a single token maps to its vector, several tokens to the
/// mean of those in vocabulary. `None` when no token is known.
pub fn embed_value(space: &EmbeddingSpace, v: &NormalizedValue) -> Option<Vec<f64>> {
    let mut sum = vec![0.0f64; space.dimension];
    let mut found = 0usize;
    for token in v.trimmed_lower.split_whitespace() {
        if let Some(vec) = space.vectors.get(token) {
            for (s, x) in sum.iter_mut().zip(vec) {
                *s += f64::from(*x);
            }
            found += 1;
        }
    }
    if found == 0 {
        return None;
    }
    let n = found as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    Some(sum)
}

#[derive(Debug, Clone)]
pub struct EmbeddingFnParams {
    pub space: Arc<EmbeddingSpace>,
    pub centroid: String,
    pub centroid_vector: Vec<f64>,
}

impl EmbeddingFnParams {
    pub(super) fn distance(&self, v: &NormalizedValue) -> f64 {
        match embed_value(&self.space, v) {
            Some(e) => self.space.metric.distance(&self.centroid_vector, &e),
            None => f64::INFINITY,
        }
    }
}

pub fn make_embedding_fn(space: &Arc<EmbeddingSpace>, centroid: &str) -> Result<DomainEvalFn> {
    let normalized = normalize_value(centroid);
    let centroid_vector = embed_value(space, &normalized).ok_or_else(|| Error::OovCentroid(centroid.to_string()))?;
    let id = format!("emb:{}:{}", space.id, normalized.trimmed_lower);
    Ok(DomainEvalFn::new(
        id,
        FnKind::Embedding(EmbeddingFnParams {
            space: Arc::clone(space),
            centroid: normalized.trimmed_lower,
            centroid_vector,
        }),
    ))
}

/// Draws `k` distinct embeddable values from the corpus as centroids.
pub fn sample_centroids(
    corpus: &Corpus,
    space: &Arc<EmbeddingSpace>,
    k: usize,
    seed: u64,
) -> Result<Vec<DomainEvalFn>> {
    let pool: BTreeSet<String> = corpus
        .iter()
        .flat_map(|c| c.values.iter())
        .map(|v| normalize_value(v))
        .filter(|v| !v.trimmed_lower.is_empty() && embed_value(space, v).is_some())
        .map(|v| v.trimmed_lower)
        .collect();
    if pool.len() < k {
        return Err(Error::PoolTooSmall {
            requested: k,
            available: pool.len(),
        });
    }
    let mut pool: Vec<String> = pool.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    pool.truncate(k);
    pool.iter().map(|c| make_embedding_fn(space, c)).collect()
}
