use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use sdc::candidates::GridSpec;
use sdc::corpus::CorpusFormat;
use sdc::pipeline::{cmd_bench, cmd_gen, cmd_infer, cmd_inject, cmd_select, BenchArgs, PipelineConfig};
use sdc::select::Strategy;
use sdc::Error;

#[derive(Parser)]
#[command(
    name = "sdc",
    version,
    about = "Learn semantic-domain constraints and flag erroneous cell values"
)]
struct Cli {
    /// Pipeline config (JSON). Relative paths inside it resolve against its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every randomized step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate and assess candidate constraints.
    Gen {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Select a ruleset from the assessed candidates.
    Select {
        #[arg(long)]
        strategy: Option<Strategy>,
        #[arg(long)]
        b_size: Option<usize>,
        #[arg(long)]
        b_fpr: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        enforce_budgets: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Detect errors in a corpus with a selected ruleset.
    Infer {
        #[arg(long)]
        rules: PathBuf,
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        min_confidence: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Insert values from other columns and record them as errors.
    Inject {
        #[command(flatten)]
        input: Input,
        /// Existing ground truth to carry over.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truth_out: PathBuf,
    },
    /// Score a ruleset against ground truth.
    Bench {
        #[arg(long)]
        rules: PathBuf,
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        truth: PathBuf,
        /// Resolved registry for the z-score baselines.
        #[arg(long)]
        baselines: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        points_csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    corpus: PathBuf,
    /// jsonl or csv-dir
    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    format: CorpusFormat,
}

fn parse_format(s: &str) -> Result<CorpusFormat, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown corpus format {s:?}"))
}

fn load_config(cli: &Cli) -> sdc::Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => {
            let cwd = std::env::current_dir().map_err(|e| Error::Config(e.to_string()))?;
            PipelineConfig::default().rebased(&cwd)
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
        cfg.selection.seed = s;
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    Ok(cfg)
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

fn run(cli: Cli) -> sdc::Result<()> {
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Gen { corpus, grid, out_dir } => {
            if let Some(c) = corpus {
                cfg.corpus = absolute(&c);
            }
            if let Some(g) = grid {
                let text = std::fs::read_to_string(&g).map_err(|e| Error::Config(format!("{}: {e}", g.display())))?;
                cfg.grid = serde_json::from_str::<GridSpec>(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", g.display())))?;
            }
            if let Some(o) = out_dir {
                cfg.out_dir = absolute(&o);
            }
            let s = cmd_gen(&cfg)?;
            info!("gate survivors: {:?}", s.gates);
            println!("{} candidates accepted of {}", s.accepted, s.gates.candidates);
        }
        Command::Select {
            strategy,
            b_size,
            b_fpr,
            delta,
            enforce_budgets,
            out_dir,
        } => {
            let sel = &mut cfg.selection;
            if let Some(s) = strategy {
                sel.strategy = s;
            }
            if let Some(b) = b_size {
                sel.b_size = b;
            }
            if let Some(b) = b_fpr {
                sel.b_fpr = b;
            }
            if let Some(d) = delta {
                sel.delta = d;
            }
            sel.enforce_budgets |= enforce_budgets;
            if let Some(o) = out_dir {
                cfg.out_dir = absolute(&o);
            }
            let store = cmd_select(&cfg)?;
            let p = &store.provenance;
            println!(
                "selected {} rules covering {} of {} synthetic columns (fpr sum {:.4})",
                p.selected, p.covered, p.synthetic_columns, p.fpr_sum
            );
        }
        Command::Infer {
            rules,
            input,
            min_confidence,
            out,
        } => {
            let min = min_confidence.unwrap_or(cfg.min_confidence);
            let report = cmd_infer(&cfg, &rules, &input.corpus, input.format, min, &out)?;
            println!("{} detections", report.len());
        }
        Command::Inject {
            input,
            truth,
            rate,
            out,
            truth_out,
        } => {
            let t = cmd_inject(
                &input.corpus,
                input.format,
                truth.as_deref(),
                rate,
                cfg.seed,
                &out,
                &truth_out,
            )?;
            println!("{} errors in {} columns", t.total_errors(), t.dirty_columns());
        }
        Command::Bench {
            rules,
            input,
            truth,
            baselines,
            out,
            points_csv,
        } => {
            let args = BenchArgs {
                store: &rules,
                corpus: &input.corpus,
                format: input.format,
                truth: &truth,
                baseline_registry: baselines.as_deref(),
                out: &out,
                points_csv: points_csv.as_deref(),
            };
            let r = cmd_bench(&cfg, &args)?;
            println!("PR-AUC {:.4}, F1@P0.8 {:.4}", r.metrics.pr_auc, r.metrics.f1_at_p08);
            if let Some(b) = r.baselines.first() {
                println!("best baseline {}: PR-AUC {:.4}", b.name, b.pr_auc);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(1),
                e if e.is_data_error() => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
