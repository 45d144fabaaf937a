//! Benchmark harness: error injection, precision/recall curves, PR-AUC,
//! F1 at a precision floor, and the z-score baseline.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_value, Column, Corpus, NormalizedValue, PreparedCorpus};
use crate::domain::{DomainEvalFn, Family, Registry};
use crate::error::{Error, Result};
use crate::infer::Detection;

const DONOR_RETRIES: usize = 32;

/// Erroneous value positions per column. Columns not listed are clean.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub errors: BTreeMap<String, BTreeSet<usize>>,
}

#[derive(Serialize, Deserialize)]
struct TruthLine {
    id: String,
    errors: Vec<usize>,
}

impl GroundTruth {
    pub fn mark(&mut self, column: &str, index: usize) {
        self.errors.entry(column.to_string()).or_default().insert(index);
    }

    pub fn is_error(&self, column: &str, index: usize) -> bool {
        self.errors.get(column).is_some_and(|s| s.contains(&index))
    }

    pub fn total_errors(&self) -> usize {
        self.errors.values().map(BTreeSet::len).sum()
    }

    pub fn dirty_columns(&self) -> usize {
        self.errors.values().filter(|s| !s.is_empty()).count()
    }

    /// Checks every marked index against the corpus.
    pub fn validate(&self, corpus: &Corpus) -> Result<()> {
        for (id, idx) in &self.errors {
            let col = corpus
                .get(id)
                .ok_or_else(|| Error::Config(format!("ground truth names unknown column {id}")))?;
            if let Some(&i) = idx.iter().find(|&&i| i >= col.len()) {
                return Err(Error::Config(format!("ground truth index {i} out of range for {id}")));
            }
        }
        Ok(())
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for (id, errors) in &self.errors {
            let line = TruthLine {
                id: id.clone(),
                errors: errors.iter().copied().collect(),
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load_jsonl(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut truth = GroundTruth::default();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: TruthLine = serde_json::from_str(&line).map_err(|e| Error::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            truth.errors.entry(parsed.id).or_default().extend(parsed.errors);
        }
        Ok(truth)
    }
}

/// Transplants one foreign value into `floor(rate * |corpus|)` uniformly
/// chosen columns. Existing labels are kept and shifted past the insertion.
/// Donor values already present in the target column are re-drawn a bounded
/// number of times.
pub fn inject_errors(corpus: &Corpus, truth: &GroundTruth, rate: f64, seed: u64) -> Result<(Corpus, GroundTruth)> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Config(format!("injection rate {rate} outside [0, 1]")));
    }
    let n = corpus.len();
    let k = ((rate * n as f64) + 1e-9).floor() as usize;
    if k == 0 {
        return Ok((corpus.clone(), truth.clone()));
    }
    if n < 2 {
        return Err(Error::CorpusTooSmall { needed: 2, found: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets = index::sample(&mut rng, n, k).into_vec();
    targets.sort_unstable();

    let mut columns: Vec<Column> = corpus.columns().to_vec();
    let mut out_truth = truth.clone();
    for t in targets {
        let present: HashSet<String> = columns[t]
            .values
            .iter()
            .map(|v| normalize_value(v).trimmed_lower)
            .collect();
        let mut value = String::new();
        for attempt in 0..DONOR_RETRIES {
            let mut donor = rng.gen_range(0..n - 1);
            if donor >= t {
                donor += 1;
            }
            value = corpus.columns()[donor]
                .values
                .choose(&mut rng)
                .expect("columns are non-empty")
                .clone();
            if !present.contains(&normalize_value(&value).trimmed_lower) {
                break;
            }
            if attempt + 1 == DONOR_RETRIES {
                log::warn!("column {}: injected value {value:?} already occurs", columns[t].id);
            }
        }
        let pos = rng.gen_range(0..=columns[t].values.len());
        columns[t].values.insert(pos, value);
        let id = columns[t].id.clone();
        let shifted: BTreeSet<usize> = out_truth
            .errors
            .remove(&id)
            .unwrap_or_default()
            .into_iter()
            .map(|i| if i >= pos { i + 1 } else { i })
            .chain([pos])
            .collect();
        out_truth.errors.insert(id, shifted);
    }
    Ok((Corpus::new(columns)?, out_truth))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// One point per distinct confidence, highest first. Each `(column, index)`
/// counts once, at its highest confidence.
pub fn pr_curve(report: &[Detection], truth: &GroundTruth) -> Vec<PrPoint> {
    let mut best: HashMap<(&str, usize), f64> = HashMap::new();
    for d in report {
        let e = best
            .entry((d.column_id.as_str(), d.value_index))
            .or_insert(d.confidence);
        *e = e.max(d.confidence);
    }
    let mut scored: Vec<(f64, bool)> = best
        .into_iter()
        .map(|((c, i), conf)| (conf, truth.is_error(c, i)))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    let total = truth.total_errors();
    let mut points = Vec::new();
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut i = 0;
    while i < scored.len() {
        let threshold = scored[i].0;
        while i < scored.len() && scored[i].0 == threshold {
            tp += scored[i].1 as usize;
            seen += 1;
            i += 1;
        }
        points.push(PrPoint {
            threshold,
            precision: tp as f64 / seen as f64,
            recall: if total == 0 { 0.0 } else { tp as f64 / total as f64 },
        });
    }
    points
}

/// Trapezoidal area under the curve, starting from recall 0 at the
/// precision of the first point.
pub fn pr_auc(points: &[PrPoint]) -> f64 {
    let Some(first) = points.first() else {
        return 0.0;
    };
    let (mut r0, mut p0) = (0.0, first.precision);
    let mut area = 0.0;
    for p in points {
        area += (p.recall - r0) * (p.precision + p0) / 2.0;
        r0 = p.recall;
        p0 = p.precision;
    }
    area.clamp(0.0, 1.0)
}

/// F1 at the highest-recall point whose precision is at least `p0`; 0 when
/// no point qualifies.
pub fn f1_at_precision(points: &[PrPoint], p0: f64) -> f64 {
    points
        .iter()
        .filter(|p| p.precision >= p0)
        .max_by(|a, b| a.recall.total_cmp(&b.recall).then(a.precision.total_cmp(&b.precision)))
        .map_or(0.0, |p| {
            if p.precision + p.recall == 0.0 {
                0.0
            } else {
                2.0 * p.precision * p.recall / (p.precision + p.recall)
            }
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub pr_auc: f64,
    pub f1_at_p08: f64,
    pub points: Vec<PrPoint>,
}

impl Metrics {
    pub fn compute(report: &[Detection], truth: &GroundTruth) -> Self {
        let points = pr_curve(report, truth);
        Metrics {
            pr_auc: pr_auc(&points),
            f1_at_p08: f1_at_precision(&points, 0.8),
            points,
        }
    }
}

pub fn write_points_csv(points: &[PrPoint], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Config(e.to_string()))?;
    for p in points {
        w.serialize(p).map_err(|e| Error::Config(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn distances_capped(f: &DomainEvalFn, values: &[NormalizedValue]) -> Option<Vec<f64>> {
    let raw: Vec<f64> = values.iter().map(|v| f.eval_distance(v)).collect();
    let cap = raw.iter().copied().filter(|d| d.is_finite()).fold(f64::NAN, f64::max);
    if cap.is_nan() {
        return None;
    }
    Some(raw.into_iter().map(|d| if d.is_finite() { d } else { cap }).collect())
}

/// Flags values whose distance z-score exceeds `z_thresh`, with the z-score
/// as confidence. Distances that are not finite are capped at the column's
/// largest finite distance; a column with no finite distance or zero
/// variance yields nothing.
pub fn zscore_baseline(f: &DomainEvalFn, column_id: &str, values: &[NormalizedValue], z_thresh: f64) -> Vec<Detection> {
    if values.len() < 2 {
        return Vec::new();
    }
    let Some(d) = distances_capped(f, values) else {
        return Vec::new();
    };
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd == 0.0 {
        return Vec::new();
    }
    let mut out: Vec<Detection> = d
        .iter()
        .enumerate()
        .filter_map(|(i, &x)| {
            let z = (x - mean) / sd;
            (z > z_thresh).then(|| Detection {
                column_id: column_id.to_string(),
                value_index: i,
                value: values[i].raw.clone(),
                confidence: z,
                sdc_id: f.id().to_string(),
                explanation: format!("z-score {z:.3} of distance to {}", f.describe()),
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(a.value_index.cmp(&b.value_index))
    });
    out
}

/// Which function a baseline run applies to each column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Baseline {
    /// One function everywhere.
    Single(String),
    /// Per column, the family member with the smallest mean (capped)
    /// distance, i.e. the type the column most plausibly has.
    Family(Family),
}

impl Baseline {
    pub fn name(&self) -> String {
        match self {
            Baseline::Single(id) => id.clone(),
            Baseline::Family(f) => format!("family:{f}"),
        }
    }
}

fn best_member<'a>(members: &[&'a DomainEvalFn], values: &[NormalizedValue]) -> Option<&'a DomainEvalFn> {
    let mut best: Option<(f64, &DomainEvalFn)> = None;
    for f in members {
        let Some(d) = distances_capped(f, values) else { continue };
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        if best.is_none_or(|(m, _)| mean < m) {
            best = Some((mean, f));
        }
    }
    best.map(|(_, f)| f)
}

/// Runs a baseline over a corpus with threshold `z_thresh`.
pub fn run_baseline(
    baseline: &Baseline,
    registry: &Registry,
    corpus: &PreparedCorpus,
    z_thresh: f64,
) -> Result<Vec<Detection>> {
    let members: Vec<&DomainEvalFn> = match baseline {
        Baseline::Single(id) => vec![registry.require(id)?.as_ref()],
        Baseline::Family(fam) => registry
            .functions()
            .iter()
            .filter(|f| f.family() == *fam)
            .map(|f| f.as_ref())
            .collect(),
    };
    let per_column: Vec<Vec<Detection>> = corpus
        .ids
        .par_iter()
        .zip(corpus.columns.par_iter())
        .map(|(id, values)| match best_member(&members, values) {
            Some(f) => zscore_baseline(f, id, values, z_thresh),
            None => Vec::new(),
        })
        .collect();
    Ok(per_column.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineScore {
    pub name: String,
    pub pr_auc: f64,
    pub f1_at_p08: f64,
}

/// Scores every single-function baseline and every per-family baseline,
/// best PR-AUC first.
pub fn baseline_sweep(registry: &Registry, corpus: &PreparedCorpus, truth: &GroundTruth) -> Result<Vec<BaselineScore>> {
    let mut runs: Vec<Baseline> = registry
        .functions()
        .iter()
        .map(|f| Baseline::Single(f.id().to_string()))
        .collect();
    let families: BTreeSet<Family> = registry.functions().iter().map(|f| f.family()).collect();
    runs.extend(families.into_iter().map(Baseline::Family));
    let mut scores = Vec::with_capacity(runs.len());
    for b in &runs {
        let report = run_baseline(b, registry, corpus, 0.0)?;
        let m = Metrics::compute(&report, truth);
        scores.push(BaselineScore {
            name: b.name(),
            pr_auc: m.pr_auc,
            f1_at_p08: m.f1_at_p08,
        });
    }
    scores.sort_by(|a, b| b.pr_auc.total_cmp(&a.pr_auc).then(a.name.cmp(&b.name)));
    Ok(scores)
}
