//! Distant supervision: synthetic columns with one transplanted value, the
//! detection sets they induce, and per-candidate FPR estimates.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assess::{AssessedSdc, ContingencyTable};
use crate::candidates::Sdc;
use crate::corpus::{Column, NormalizedValue, PreparedCorpus};
use crate::domain::{DomainEvalFn, Family, Registry};
use crate::error::{Error, Result};
use crate::profile::ColumnProfile;

const DONOR_RETRIES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthColumn {
    pub id: String,
    pub base_column_id: String,
    pub injected_value: String,
    pub injected_index: usize,
    pub values: Vec<NormalizedValue>,
}

impl SynthColumn {
    pub fn injected(&self) -> &NormalizedValue {
        &self.values[self.injected_index]
    }

    /// The base column's values, without the transplant.
    pub fn base_values(&self) -> Vec<NormalizedValue> {
        let mut v = self.values.clone();
        v.remove(self.injected_index);
        v
    }

    pub fn to_column(&self) -> Column {
        Column::new(self.id.clone(), self.values.iter().map(|v| v.raw.clone()).collect())
    }

    pub fn record(&self) -> SynthRecord {
        SynthRecord {
            id: self.id.clone(),
            base_column_id: self.base_column_id.clone(),
            injected_index: self.injected_index,
            injected_value: self.injected_value.clone(),
        }
    }
}

/// Ground-truth sidecar line for one synthetic column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthRecord {
    pub id: String,
    pub base_column_id: String,
    pub injected_index: usize,
    pub injected_value: String,
}

/// Draws `n` synthetic columns. Each picks a base column, a different donor
/// column, a donor value not already present in the base, and an insertion
/// position, all uniformly. A draw whose donor value keeps colliding with
/// the base is skipped, so fewer than `n` columns may come back.
pub fn build_synthetic_corpus(corpus: &PreparedCorpus, n: usize, seed: u64) -> Result<Vec<SynthColumn>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if corpus.len() < 2 {
        return Err(Error::CorpusTooSmall {
            needed: 2,
            found: corpus.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let base = rng.gen_range(0..corpus.len());
        let base_values = &corpus.columns[base];
        let present: HashSet<&str> = base_values.iter().map(|v| v.trimmed_lower.as_str()).collect();
        let mut donor_value = None;
        for _ in 0..DONOR_RETRIES {
            let mut donor = rng.gen_range(0..corpus.len() - 1);
            if donor >= base {
                donor += 1;
            }
            let candidate = corpus.columns[donor].choose(&mut rng).expect("columns are non-empty");
            if !present.contains(candidate.trimmed_lower.as_str()) {
                donor_value = Some(candidate.clone());
                break;
            }
        }
        let position = rng.gen_range(0..=base_values.len());
        let Some(value) = donor_value else {
            log::debug!("synthetic column {k}: no foreign donor value for {}", corpus.ids[base]);
            continue;
        };
        let mut values = base_values.clone();
        values.insert(position, value.clone());
        out.push(SynthColumn {
            id: format!("syn:{k}"),
            base_column_id: corpus.ids[base].clone(),
            injected_value: value.raw,
            injected_index: position,
            values,
        });
    }
    Ok(out)
}

pub fn write_synthetic_corpus(synth: &[SynthColumn], corpus_path: &Path, sidecar_path: &Path) -> Result<()> {
    let columns = synth.iter().map(SynthColumn::to_column).collect();
    crate::corpus::Corpus::new(columns)?.write_jsonl(corpus_path)?;
    let file = File::create(sidecar_path).map_err(|e| Error::io(sidecar_path, e))?;
    let mut w = BufWriter::new(file);
    for s in synth {
        serde_json::to_writer(&mut w, &s.record())?;
        w.write_all(b"\n").map_err(|e| Error::io(sidecar_path, e))?;
    }
    w.flush().map_err(|e| Error::io(sidecar_path, e))
}

/// Whether `sdc` applies to the synthetic column and flags the transplanted
/// value itself.
pub fn detects(f: &DomainEvalFn, sdc: &Sdc, column: &SynthColumn) -> bool {
    let inside = column.values.iter().filter(|v| sdc.inside(f.eval_distance(v))).count();
    sdc.applies(inside, column.values.len()) && sdc.outside(f.family(), f.eval_distance(column.injected()))
}

/// Ids of the synthetic columns whose transplant `sdc` detects.
pub fn detection_set(f: &DomainEvalFn, sdc: &Sdc, synth: &[SynthColumn]) -> Vec<String> {
    synth
        .iter()
        .filter(|c| detects(f, sdc, c))
        .map(|c| c.id.clone())
        .collect()
}

pub fn estimate_fpr(table: &ContingencyTable, corpus_size: u64) -> Result<f64> {
    if corpus_size == 0 {
        return Err(Error::ZeroDenominator("corpus size"));
    }
    Ok(table.covered_triggered as f64 / corpus_size as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateStats {
    pub sdc: Sdc,
    /// Sorted positions into the synthetic corpus.
    pub detected: Vec<u32>,
    pub fpr: f64,
}

impl CandidateStats {
    pub fn confidence(&self) -> f64 {
        self.sdc.confidence
    }
}

struct SynthProfile {
    column: ColumnProfile,
    injected: f64,
}

fn detects_profiled(sdc: &Sdc, family: Family, p: &SynthProfile) -> bool {
    p.column.covered(sdc) && sdc.outside(family, p.injected)
}

/// Detection sets and FPR estimates for every assessed candidate, in input
/// order. `corpus_size` is the training corpus size.
pub fn candidate_stats(
    assessed: &[AssessedSdc],
    synth: &[SynthColumn],
    registry: &Registry,
    corpus_size: u64,
) -> Result<Vec<CandidateStats>> {
    let mut by_fn: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, a) in assessed.iter().enumerate() {
        by_fn.entry(a.sdc.fn_id.as_str()).or_default().push(i);
    }
    let groups = by_fn
        .into_iter()
        .map(|(id, members)| Ok((registry.require(id)?.clone(), members)))
        .collect::<Result<Vec<_>>>()?;

    let computed: Vec<Vec<(usize, Vec<u32>)>> = groups
        .par_iter()
        .map(|(f, members)| {
            let profiles: Vec<SynthProfile> = synth
                .iter()
                .map(|c| SynthProfile {
                    column: ColumnProfile::new(f, &c.values),
                    injected: f.eval_distance(c.injected()),
                })
                .collect();
            let family = f.family();
            members
                .iter()
                .map(|&i| {
                    let sdc = &assessed[i].sdc;
                    let detected = profiles
                        .iter()
                        .enumerate()
                        .filter(|(_, p)| detects_profiled(sdc, family, p))
                        .map(|(j, _)| j as u32)
                        .collect();
                    (i, detected)
                })
                .collect()
        })
        .collect();

    let mut detected: Vec<Vec<u32>> = vec![Vec::new(); assessed.len()];
    for (i, d) in computed.into_iter().flatten() {
        detected[i] = d;
    }
    assessed
        .iter()
        .zip(detected)
        .map(|(a, detected)| {
            Ok(CandidateStats {
                sdc: a.sdc.clone(),
                detected,
                fpr: estimate_fpr(&a.table, corpus_size)?,
            })
        })
        .collect()
}
