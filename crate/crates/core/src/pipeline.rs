//! The three training and application stages, in memory and as file-based
//! commands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assess::{assess_all, min_coverage, AssessConfig, AssessOutcome, AssessedSdc, GateCounts};
use crate::candidates::{enumerate_candidates, GridSpec, Sdc};
use crate::corpus::{load_corpus, Corpus, CorpusFormat, CorpusOptions, PreparedCorpus};
use crate::domain::{FnSpec, Registry, RegistryManifest, ResolvedRegistry};
use crate::error::{Error, Result};
use crate::eval::{baseline_sweep, inject_errors, write_points_csv, BaselineScore, GroundTruth, Metrics};
use crate::infer::{detect_corpus, write_report, Detection};
use crate::select::{select, Selection, SelectionConfig};
use crate::store::{load_r_all, write_jsonl, write_r_all, Provenance, SdcStore, STORE_VERSION};
use crate::synth::{build_synthetic_corpus, candidate_stats, write_synthetic_corpus, CandidateStats, SynthColumn};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub version: u32,
    pub corpus: PathBuf,
    pub corpus_format: CorpusFormat,
    pub corpus_options: CorpusOptions,
    pub registry: RegistryManifest,
    pub grid: GridSpec,
    pub assess: AssessConfig,
    pub prune: bool,
    /// Synthetic columns to draw; defaults to the corpus size.
    pub synth_columns: Option<usize>,
    pub selection: SelectionConfig,
    pub min_confidence: f64,
    pub out_dir: PathBuf,
    pub workers: Option<usize>,
    pub seed: u64,
    /// Directory relative paths were resolved against.
    #[serde(skip)]
    pub base: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            version: CONFIG_VERSION,
            corpus: PathBuf::from("corpus.jsonl"),
            corpus_format: CorpusFormat::Jsonl,
            corpus_options: CorpusOptions::default(),
            registry: RegistryManifest::default(),
            grid: GridSpec::default(),
            assess: AssessConfig::default(),
            prune: true,
            synth_columns: None,
            selection: SelectionConfig::default(),
            min_confidence: 0.0,
            out_dir: PathBuf::from("out"),
            workers: None,
            seed: 0,
            base: None,
        }
    }
}

fn rebase(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn unbase(base: &Path, p: &mut PathBuf) {
    if let Ok(rel) = p.strip_prefix(base) {
        *p = rel.to_path_buf();
    }
}

impl PipelineConfig {
    /// Loads a config; relative paths inside it become relative to the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "config version {} is not supported",
                cfg.version
            )));
        }
        let dir = path.parent().unwrap_or(Path::new("."));
        let base = std::fs::canonicalize(if dir.as_os_str().is_empty() {
            Path::new(".")
        } else {
            dir
        })
        .map_err(|e| Error::io(dir, e))?;
        Ok(cfg.rebased(&base))
    }

    pub fn rebased(mut self, base: &Path) -> Self {
        self.base = Some(base.to_path_buf());
        self.corpus = rebase(base, &self.corpus);
        self.out_dir = rebase(base, &self.out_dir);
        for s in &mut self.registry.spaces {
            s.path = rebase(base, &s.path);
        }
        for f in &mut self.registry.functions {
            if let FnSpec::ScoreTable { path: Some(p), .. } = f {
                *p = rebase(base, p);
            }
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.assess.validate()?;
        self.selection.validate()?;
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be positive".into()));
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the serialized config, with
    /// paths relative to the config directory and the worker count left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.workers = None;
        if let Some(base) = &self.base {
            unbase(base, &mut c.corpus);
            unbase(base, &mut c.out_dir);
            for s in &mut c.registry.spaces {
                unbase(base, &mut s.path);
            }
            for f in &mut c.registry.functions {
                if let FnSpec::ScoreTable { path: Some(p), .. } = f {
                    unbase(base, p);
                }
            }
        }
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(&Sha256::digest(&bytes)[..8])
    }

    /// Runs `f` on a rayon pool sized by `workers`.
    pub fn run<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.workers {
            b = b.num_threads(n);
        }
        let pool = b.build().map_err(|e| Error::Config(e.to_string()))?;
        Ok(pool.install(f))
    }
}

/// Candidate generation and assessment.
pub fn generate(
    corpus: &PreparedCorpus,
    registry: &Registry,
    grid: &GridSpec,
    assess: &AssessConfig,
    prune: bool,
) -> Result<AssessOutcome> {
    assess_all(
        enumerate_candidates(registry.functions(), grid),
        corpus,
        registry,
        assess,
        prune,
    )
}

#[derive(Debug, Clone)]
pub struct Selected {
    pub synth: Vec<SynthColumn>,
    pub stats: Vec<CandidateStats>,
    pub selection: Selection,
    /// The chosen constraints, sorted by id.
    pub sdcs: Vec<Sdc>,
}

impl Selected {
    pub fn provenance(&self) -> Provenance {
        Provenance {
            candidates: self.stats.len(),
            synthetic_columns: self.synth.len(),
            lp_objective: self.selection.lp.objective,
            selected: self.sdcs.len(),
            covered: self.selection.objective,
            fpr_sum: self.selection.fpr_sum,
        }
    }
}

/// Distant supervision plus selection over an assessed candidate list.
pub fn select_rules(
    corpus: &PreparedCorpus,
    registry: &Registry,
    r_all: &[AssessedSdc],
    synth_columns: Option<usize>,
    synth_seed: u64,
    cfg: &SelectionConfig,
) -> Result<Selected> {
    let synth = build_synthetic_corpus(corpus, synth_columns.unwrap_or(corpus.len()), synth_seed)?;
    let stats = candidate_stats(r_all, &synth, registry, corpus.len() as u64)?;
    let synth_ids: Vec<String> = synth.iter().map(|s| s.id.clone()).collect();
    let selection = select(&stats, &synth_ids, cfg)?;
    let mut sdcs: Vec<Sdc> = selection.selected.iter().map(|&i| stats[i].sdc.clone()).collect();
    sdcs.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(Selected {
        synth,
        stats,
        selection,
        sdcs,
    })
}

pub fn make_store(
    selected: &Selected,
    registry: &Registry,
    cfg: &SelectionConfig,
    config_hash: &str,
) -> Result<SdcStore> {
    let resolved: ResolvedRegistry = registry.resolved_subset(selected.sdcs.iter().map(|s| s.fn_id.as_str()))?;
    Ok(SdcStore {
        version: STORE_VERSION,
        config_hash: config_hash.to_string(),
        selection: *cfg,
        provenance: selected.provenance(),
        registry: resolved,
        sdcs: selected.sdcs.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSummary {
    pub config_hash: String,
    pub columns: usize,
    pub functions: usize,
    pub min_coverage: u64,
    pub gates: GateCounts,
    pub accepted: usize,
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub const R_ALL_FILE: &str = "r_all.jsonl";
pub const REGISTRY_FILE: &str = "registry.json";
pub const GEN_STATS_FILE: &str = "gen_stats.json";
pub const STORE_FILE: &str = "store.json";

fn load_training(cfg: &PipelineConfig) -> Result<(Corpus, PreparedCorpus)> {
    let corpus = load_corpus(&cfg.corpus, cfg.corpus_format)?;
    let prepared = PreparedCorpus::new(&corpus, &cfg.corpus_options);
    Ok((corpus, prepared))
}

/// Writes `r_all.jsonl`, `registry.json` and `gen_stats.json` to the output
/// directory.
pub fn cmd_gen(cfg: &PipelineConfig) -> Result<GenSummary> {
    cfg.validate()?;
    ensure_dir(&cfg.out_dir)?;
    let (corpus, prepared) = load_training(cfg)?;
    let registry = cfg.registry.build(&corpus, Path::new("/"))?;
    let outcome = cfg.run(|| generate(&prepared, &registry, &cfg.grid, &cfg.assess, cfg.prune))??;
    write_r_all(&outcome.accepted, &cfg.out_dir.join(R_ALL_FILE))?;
    write_json(&registry.resolved(), &cfg.out_dir.join(REGISTRY_FILE))?;
    let summary = GenSummary {
        config_hash: cfg.hash(),
        columns: prepared.len(),
        functions: registry.len(),
        min_coverage: min_coverage(cfg.assess.z, cfg.assess.c_thres),
        gates: outcome.gates,
        accepted: outcome.accepted.len(),
    };
    write_json(&summary, &cfg.out_dir.join(GEN_STATS_FILE))?;
    Ok(summary)
}

/// Reads the output of [`cmd_gen`] and writes `store.json`, plus the
/// synthetic corpus and its sidecar.
pub fn cmd_select(cfg: &PipelineConfig) -> Result<SdcStore> {
    cfg.validate()?;
    let (_, prepared) = load_training(cfg)?;
    let resolved: ResolvedRegistry = read_json(&cfg.out_dir.join(REGISTRY_FILE))?;
    let registry = Registry::from_resolved(&resolved, Path::new("/"), &[])?;
    let r_all = load_r_all(&cfg.out_dir.join(R_ALL_FILE))?;
    let selected = cfg.run(|| {
        select_rules(
            &prepared,
            &registry,
            &r_all,
            cfg.synth_columns,
            cfg.seed,
            &cfg.selection,
        )
    })??;
    write_synthetic_corpus(
        &selected.synth,
        &cfg.out_dir.join("synth.jsonl"),
        &cfg.out_dir.join("synth_truth.jsonl"),
    )?;
    let store = make_store(&selected, &registry, &cfg.selection, &cfg.hash())?;
    store.save(&cfg.out_dir.join(STORE_FILE))?;
    Ok(store)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ReportMeta {
    config_hash: String,
    store_config_hash: String,
    columns: usize,
    detections: usize,
    min_confidence: f64,
}

fn store_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn run_inference(
    store: &SdcStore,
    store_base: &Path,
    corpus: &PreparedCorpus,
    min_confidence: f64,
) -> Result<Vec<Detection>> {
    let registry = store.registry(store_base, &[])?;
    let ruleset = store.compile(&registry)?;
    Ok(detect_corpus(&ruleset, corpus, min_confidence))
}

/// Writes the report JSONL and a `.meta.json` companion.
pub fn cmd_infer(
    cfg: &PipelineConfig,
    store_path: &Path,
    corpus_path: &Path,
    format: CorpusFormat,
    min_confidence: f64,
    out: &Path,
) -> Result<Vec<Detection>> {
    let store = SdcStore::load(store_path)?;
    let corpus = load_corpus(corpus_path, format)?;
    let prepared = PreparedCorpus::new(&corpus, &cfg.corpus_options);
    let report = cfg.run(|| run_inference(&store, &store_dir(store_path), &prepared, min_confidence))??;
    write_report(&report, out)?;
    let meta = ReportMeta {
        config_hash: cfg.hash(),
        store_config_hash: store.config_hash.clone(),
        columns: prepared.len(),
        detections: report.len(),
        min_confidence,
    };
    write_json(&meta, &meta_path(out))?;
    Ok(report)
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

pub fn cmd_inject(
    corpus_path: &Path,
    format: CorpusFormat,
    truth_in: Option<&Path>,
    rate: f64,
    seed: u64,
    corpus_out: &Path,
    truth_out: &Path,
) -> Result<GroundTruth> {
    let corpus = load_corpus(corpus_path, format)?;
    let truth = match truth_in {
        Some(p) => GroundTruth::load_jsonl(p)?,
        None => GroundTruth::default(),
    };
    truth.validate(&corpus)?;
    let (dirty, truth) = inject_errors(&corpus, &truth, rate, seed)?;
    dirty.write_jsonl(corpus_out)?;
    truth.write_jsonl(truth_out)?;
    Ok(truth)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config_hash: String,
    pub store_config_hash: String,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub baselines: Vec<BaselineScore>,
}

pub struct BenchArgs<'a> {
    pub store: &'a Path,
    pub corpus: &'a Path,
    pub format: CorpusFormat,
    pub truth: &'a Path,
    /// Functions for the z-score baselines; none skips them.
    pub baseline_registry: Option<&'a Path>,
    pub out: &'a Path,
    pub points_csv: Option<&'a Path>,
}

pub fn cmd_bench(cfg: &PipelineConfig, args: &BenchArgs) -> Result<BenchReport> {
    let store = SdcStore::load(args.store)?;
    let corpus = load_corpus(args.corpus, args.format)?;
    let truth = GroundTruth::load_jsonl(args.truth)?;
    truth.validate(&corpus)?;
    let prepared = PreparedCorpus::new(&corpus, &cfg.corpus_options);
    let (metrics, baselines) = cfg.run(|| -> Result<_> {
        let report = run_inference(&store, &store_dir(args.store), &prepared, 0.0)?;
        let metrics = Metrics::compute(&report, &truth);
        let baselines = match args.baseline_registry {
            Some(p) => {
                let resolved: ResolvedRegistry = read_json(p)?;
                let registry = Registry::from_resolved(&resolved, &store_dir(p), &[])?;
                baseline_sweep(&registry, &prepared, &truth)?
            }
            None => Vec::new(),
        };
        Ok((metrics, baselines))
    })??;
    let report = BenchReport {
        config_hash: cfg.hash(),
        store_config_hash: store.config_hash.clone(),
        metrics,
        baselines,
    };
    write_json(&report, args.out)?;
    if let Some(p) = args.points_csv {
        write_points_csv(&report.metrics.points, p)?;
    }
    Ok(report)
}

/// Writes any serializable list as JSONL.
pub fn write_lines<T: Serialize>(items: &[T], path: &Path) -> Result<()> {
    write_jsonl(items, path)
}
