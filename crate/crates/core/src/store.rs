//! On-disk artifacts: the assessed candidate list and the selected ruleset.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assess::AssessedSdc;
use crate::candidates::Sdc;
use crate::domain::{EmbeddingSpace, Registry, ResolvedRegistry};
use crate::error::{Error, Result};
use crate::infer::{compile_ruleset, CompiledRuleset};
use crate::select::SelectionConfig;

pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub candidates: usize,
    pub synthetic_columns: usize,
    pub lp_objective: f64,
    pub selected: usize,
    /// Synthetic columns covered by the selected set.
    pub covered: usize,
    pub fpr_sum: f64,
}

/// A selected ruleset with everything needed to run it elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdcStore {
    pub version: u32,
    pub config_hash: String,
    pub selection: SelectionConfig,
    pub provenance: Provenance,
    pub registry: ResolvedRegistry,
    pub sdcs: Vec<Sdc>,
}

impl SdcStore {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let store: SdcStore = serde_json::from_str(&text)?;
        if store.version != STORE_VERSION {
            return Err(Error::Config(format!(
                "store version {} is not supported (expected {STORE_VERSION})",
                store.version
            )));
        }
        Ok(store)
    }

    /// Rebuilds the functions the ruleset refers to. Relative paths resolve
    /// against `base`; spaces without a path must be passed in `preloaded`.
    pub fn registry(&self, base: &Path, preloaded: &[Arc<EmbeddingSpace>]) -> Result<Registry> {
        Registry::from_resolved(&self.registry, base, preloaded)
    }

    pub fn compile(&self, registry: &Registry) -> Result<CompiledRuleset> {
        compile_ruleset(&self.sdcs, registry)
    }
}

pub fn write_jsonl<T: Serialize>(items: &[T], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_r_all(r_all: &[AssessedSdc], path: &Path) -> Result<()> {
    write_jsonl(r_all, path)
}

pub fn load_r_all(path: &Path) -> Result<Vec<AssessedSdc>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
