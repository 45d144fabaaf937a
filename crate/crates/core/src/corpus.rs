//! Table columns, corpora, and value normalization.
//!
//! A corpus is a bag of independent columns. Table structure is discarded on
//! ingest: a CSV file with five columns contributes five [`Column`]s.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values longer than this many characters are truncated before evaluation.
pub const MAX_VALUE_CHARS: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<String>,
    pub values: Vec<String>,
}

impl Column {
    pub fn new(id: impl Into<String>, values: Vec<String>) -> Self {
        Column {
            id: id.into(),
            header: None,
            values,
        }
    }

    pub fn with_header(mut self, header: impl Into<String>) -> Self {
        self.header = Some(header.into());
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fraction of values that parse as numbers.
    pub fn numeric_fraction(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let numeric = self.values.iter().filter(|v| looks_numeric(v)).count();
        numeric as f64 / self.values.len() as f64
    }
}

fn looks_numeric(v: &str) -> bool {
    let t = v.trim();
    if t.is_empty() {
        return false;
    }
    let cleaned: String = t.chars().filter(|c| *c != ',').collect();
    cleaned.parse::<f64>().is_ok()
}

/// A value with its whitespace-trimmed, lowercased form. Lookups into
/// embedding spaces and score tables use `trimmed_lower`; patterns and
/// validators look at `raw`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NormalizedValue {
    pub raw: String,
    pub trimmed_lower: String,
}

pub fn normalize_value(raw: &str) -> NormalizedValue {
    NormalizedValue {
        raw: raw.to_string(),
        trimmed_lower: raw.trim().to_lowercase(),
    }
}

fn truncate_chars(s: &str, max: usize) -> &str {
    match s.char_indices().nth(max) {
        Some((idx, _)) => &s[..idx],
        None => s,
    }
}

/// Normalized view of a column as used for evaluation: long values are
/// truncated, and duplicates optionally removed.
pub fn prepare_values(column: &Column, opts: &CorpusOptions) -> Vec<NormalizedValue> {
    let mut seen = HashSet::new();
    column
        .values
        .iter()
        .filter(|v| !opts.dedupe || seen.insert(v.as_str()))
        .map(|v| normalize_value(truncate_chars(v, opts.max_value_chars)))
        .collect()
}

/// Knobs governing which columns and values take part in training and
/// inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusOptions {
    pub dedupe: bool,
    pub skip_numeric: bool,
    pub numeric_threshold: f64,
    pub max_value_chars: usize,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            dedupe: false,
            skip_numeric: true,
            numeric_threshold: 0.9,
            max_value_chars: MAX_VALUE_CHARS,
        }
    }
}

impl CorpusOptions {
    pub fn keeps(&self, column: &Column) -> bool {
        !self.skip_numeric || column.numeric_fraction() < self.numeric_threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    Jsonl,
    CsvDir,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    columns: Vec<Column>,
}

impl Corpus {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let mut ids = HashSet::with_capacity(columns.len());
        for c in &columns {
            if c.values.is_empty() {
                return Err(Error::EmptyColumn(c.id.clone()));
            }
            if !ids.insert(c.id.as_str()) {
                return Err(Error::DuplicateId(c.id.clone()));
            }
        }
        Ok(Corpus { columns })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn into_columns(self) -> Vec<Column> {
        self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.id == id)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Column> {
        self.columns.iter()
    }

    /// Drops columns rejected by `opts` (numeric-dominant columns by default).
    pub fn filtered(&self, opts: &CorpusOptions) -> Corpus {
        Corpus {
            columns: self.columns.iter().filter(|c| opts.keeps(c)).cloned().collect(),
        }
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for c in &self.columns {
            serde_json::to_writer(&mut w, c)?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Column;
    type IntoIter = std::slice::Iter<'a, Column>;

    fn into_iter(self) -> Self::IntoIter {
        self.columns.iter()
    }
}

/// Corpus columns in evaluation form: filtered by [`CorpusOptions`] and
/// normalized once.
#[derive(Debug, Clone, Default)]
pub struct PreparedCorpus {
    pub ids: Vec<String>,
    pub columns: Vec<Vec<NormalizedValue>>,
}

impl PreparedCorpus {
    pub fn new(corpus: &Corpus, opts: &CorpusOptions) -> Self {
        let mut out = PreparedCorpus::default();
        for c in corpus.iter().filter(|c| opts.keeps(c)) {
            out.ids.push(c.id.clone());
            out.columns.push(prepare_values(c, opts));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    match format {
        CorpusFormat::Jsonl => load_jsonl(path.as_ref()),
        CorpusFormat::CsvDir => load_csv_dir(path.as_ref(), true),
    }
}

pub fn load_jsonl(path: &Path) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut columns = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let column: Column = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        columns.push(column);
    }
    Corpus::new(columns)
}

/// Reads every `*.csv` file in `dir` (sorted by file name). Each file column
/// becomes a [`Column`] with id `<file name>:<column index>`. Blank cells are
/// dropped; columns left without values are skipped.
pub fn load_csv_dir(dir: &Path, has_header: bool) -> Result<Corpus> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let p = entry.path();
        if p.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("csv")) {
            files.push(p);
        }
    }
    files.sort();

    let mut columns = Vec::new();
    for file in files {
        let name = file
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .flexible(true)
            .from_path(&file)
            .map_err(|e| csv_error(&file, e))?;
        let headers: Vec<String> = if has_header {
            reader
                .headers()
                .map_err(|e| csv_error(&file, e))?
                .iter()
                .map(str::to_string)
                .collect()
        } else {
            Vec::new()
        };
        let mut cells: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(&file, e))?;
            for (j, cell) in record.iter().enumerate() {
                if j >= cells.len() {
                    cells.resize(j + 1, Vec::new());
                }
                if !cell.trim().is_empty() {
                    cells[j].push(cell.to_string());
                }
            }
        }
        for (j, values) in cells.into_iter().enumerate() {
            if values.is_empty() {
                log::warn!("{name}: column {j} has no values, skipped");
                continue;
            }
            let mut column = Column::new(format!("{name}:{j}"), values);
            column.header = headers.get(j).cloned();
            columns.push(column);
        }
    }
    Corpus::new(columns)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Malformed {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

/// Splits off `n` columns drawn uniformly without replacement as a held-out
/// set. Both halves keep the corpus's original column order.
pub fn sample_columns(corpus: &Corpus, n: usize, seed: u64) -> Result<(Corpus, Corpus)> {
    if n > corpus.len() {
        return Err(Error::SampleTooLarge {
            requested: n,
            available: corpus.len(),
        });
    }
    let mut idx: Vec<usize> = (0..corpus.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let mut held = vec![false; corpus.len()];
    for &i in &idx[..n] {
        held[i] = true;
    }
    let (mut train, mut heldout) = (Vec::new(), Vec::new());
    for (c, h) in corpus.columns.iter().zip(held) {
        if h {
            heldout.push(c.clone());
        } else {
            train.push(c.clone());
        }
    }
    Ok((Corpus { columns: train }, Corpus { columns: heldout }))
}
