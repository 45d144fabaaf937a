//! Applying a selected ruleset to unseen columns.
//!
//! Constraints sharing a precondition `(fn, d_in, m)` are grouped so each
//! precondition is checked once per column. Every flagged `(index, value)`
//! is reported once, carrying the highest confidence among the constraints
//! that flag it.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::Sdc;
use crate::corpus::{NormalizedValue, PreparedCorpus};
use crate::domain::{DomainEvalFn, Registry, SharedFn};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub column_id: String,
    pub value_index: usize,
    pub value: String,
    pub confidence: f64,
    pub sdc_id: String,
    pub explanation: String,
}

#[derive(Debug, Clone)]
pub struct PreconditionGroup {
    pub fn_index: usize,
    pub d_in: f64,
    pub m: f64,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct CompiledRuleset {
    pub sdcs: Vec<Sdc>,
    pub precondition_groups: Vec<PreconditionGroup>,
    fns: Vec<SharedFn>,
    sdc_fn: Vec<usize>,
}

impl CompiledRuleset {
    pub fn len(&self) -> usize {
        self.sdcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sdcs.is_empty()
    }
}

pub fn compile_ruleset(sdcs: &[Sdc], registry: &Registry) -> Result<CompiledRuleset> {
    let mut fns: Vec<SharedFn> = Vec::new();
    let mut fn_index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut groups: BTreeMap<(usize, u64, u64), Vec<usize>> = BTreeMap::new();
    let mut sdc_fn = Vec::with_capacity(sdcs.len());
    for (i, s) in sdcs.iter().enumerate() {
        let f = match fn_index.get(s.fn_id.as_str()) {
            Some(&f) => f,
            None => {
                fns.push(registry.require(&s.fn_id)?.clone());
                fn_index.insert(&s.fn_id, fns.len() - 1);
                fns.len() - 1
            }
        };
        sdc_fn.push(f);
        groups.entry((f, s.d_in.to_bits(), s.m.to_bits())).or_default().push(i);
    }
    let precondition_groups = groups
        .into_iter()
        .map(|((fn_index, d_in, m), members)| PreconditionGroup {
            fn_index,
            d_in: f64::from_bits(d_in),
            m: f64::from_bits(m),
            members,
        })
        .collect();
    Ok(CompiledRuleset {
        sdcs: sdcs.to_vec(),
        precondition_groups,
        fns,
        sdc_fn,
    })
}

fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

pub fn explain(f: &DomainEvalFn, sdc: &Sdc, value: &str, distance: f64) -> String {
    let op = if f.family().is_binary() { ">=" } else { ">" };
    format!(
        "{}% of column values are within {} of {}; '{}' is at distance {} {} {}",
        fmt_num(sdc.m * 100.0),
        fmt_num(sdc.d_in),
        f.describe(),
        value,
        fmt_num(distance),
        op,
        fmt_num(sdc.d_out),
    )
}

struct Flag {
    confidence: f64,
    sdc: usize,
    distance: f64,
}

fn better(conf: f64, sdc_id: &str, than: &Flag, sdcs: &[Sdc]) -> bool {
    conf > than.confidence || (conf == than.confidence && *sdc_id < *sdcs[than.sdc].id)
}

fn record(flags: &mut BTreeMap<usize, Flag>, index: usize, sdc: usize, distance: f64, sdcs: &[Sdc]) {
    let conf = sdcs[sdc].confidence;
    match flags.get(&index) {
        Some(prev) if !better(conf, &sdcs[sdc].id, prev, sdcs) => {}
        _ => {
            flags.insert(
                index,
                Flag {
                    confidence: conf,
                    sdc,
                    distance,
                },
            );
        }
    }
}

fn finish(
    flags: BTreeMap<usize, Flag>,
    column_id: &str,
    values: &[NormalizedValue],
    sdcs: &[Sdc],
    fn_of: impl Fn(usize) -> SharedFn,
) -> Vec<Detection> {
    let mut out: Vec<Detection> = flags
        .into_iter()
        .map(|(index, flag)| {
            let sdc = &sdcs[flag.sdc];
            let raw = &values[index].raw;
            Detection {
                column_id: column_id.to_string(),
                value_index: index,
                value: raw.clone(),
                confidence: flag.confidence,
                sdc_id: sdc.id.clone(),
                explanation: explain(&fn_of(flag.sdc), sdc, raw, flag.distance),
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(a.value_index.cmp(&b.value_index))
    });
    out
}

/// Detections for one column plus the number of precondition checks made.
pub fn detect_errors_counted(
    ruleset: &CompiledRuleset,
    column_id: &str,
    values: &[NormalizedValue],
) -> (Vec<Detection>, usize) {
    let mut distances: Vec<Option<Vec<f64>>> = vec![None; ruleset.fns.len()];
    let mut flags = BTreeMap::new();
    let mut checks = 0;
    for g in &ruleset.precondition_groups {
        let f = &ruleset.fns[g.fn_index];
        let d = distances[g.fn_index].get_or_insert_with(|| values.iter().map(|v| f.eval_distance(v)).collect());
        checks += 1;
        let inside = d.iter().filter(|&&x| x <= g.d_in).count();
        if values.is_empty() || (inside as f64 / values.len() as f64) < g.m {
            continue;
        }
        let family = f.family();
        for &k in &g.members {
            let sdc = &ruleset.sdcs[k];
            for (i, &x) in d.iter().enumerate() {
                if sdc.outside(family, x) {
                    record(&mut flags, i, k, x, &ruleset.sdcs);
                }
            }
        }
    }
    let fn_of = |k: usize| ruleset.fns[ruleset.sdc_fn[k]].clone();
    (finish(flags, column_id, values, &ruleset.sdcs, fn_of), checks)
}

pub fn detect_errors(ruleset: &CompiledRuleset, column_id: &str, values: &[NormalizedValue]) -> Vec<Detection> {
    detect_errors_counted(ruleset, column_id, values).0
}

/// Reference evaluation: every constraint checked on its own.
pub fn detect_errors_naive(
    sdcs: &[Sdc],
    registry: &Registry,
    column_id: &str,
    values: &[NormalizedValue],
) -> Result<(Vec<Detection>, usize)> {
    let mut flags = BTreeMap::new();
    let mut checks = 0;
    for (k, sdc) in sdcs.iter().enumerate() {
        let f = registry.require(&sdc.fn_id)?;
        checks += 1;
        if !crate::assess::eval_precondition(f, sdc, values) {
            continue;
        }
        for i in crate::assess::eval_postcondition(f, sdc, values) {
            record(&mut flags, i, k, f.eval_distance(&values[i]), sdcs);
        }
    }
    let fn_of = |k: usize| registry.require(&sdcs[k].fn_id).expect("checked above").clone();
    Ok((finish(flags, column_id, values, sdcs, fn_of), checks))
}

/// Detections over a corpus in column order, dropping those below
/// `min_confidence`. Columns are processed in parallel on the current rayon
/// pool.
pub fn detect_corpus(ruleset: &CompiledRuleset, corpus: &PreparedCorpus, min_confidence: f64) -> Vec<Detection> {
    let per_column: Vec<Vec<Detection>> = corpus
        .ids
        .par_iter()
        .zip(corpus.columns.par_iter())
        .map(|(id, values)| {
            let mut d = detect_errors(ruleset, id, values);
            d.retain(|d| d.confidence >= min_confidence);
            d
        })
        .collect();
    per_column.into_iter().flatten().collect()
}

pub fn write_report(report: &[Detection], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for d in report {
        serde_json::to_writer(&mut w, d)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_report(path: &Path) -> Result<Vec<Detection>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
