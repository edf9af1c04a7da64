//! Command-line front end.
//!
//! Exit status: 0 when every item succeeded, 2 when some items failed (a
//! failure manifest is written next to the output), 1 on configuration or
//! I/O errors.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use logicality_core::{
    composite_score, corpus_stats, group_compare, select_top_kappa, CompositeConfig, MatchStrategy, MetricConfig,
    ScoredItem, SegmenterConfig,
};
use serde_json::json;

use crate::dataset::{parse_dataset, parse_responses, read_ratings, read_scores, DatasetRecord};
use crate::encoders::{EmbedderSpec, HttpConfig, DEFAULT_BATCH_SIZE, DEFAULT_MODEL};
use crate::error::{Error, Result};
use crate::fsio::{read_to_string, write_atomic, write_string_atomic};
use crate::pipeline::{default_taus, prepare_instances, score_batch, sweep, Failure, ScoreOptions};
use crate::report;

#[derive(Debug, Parser)]
#[command(name = "logicality", version, about = "Score the logicality of reasoning traces against weighted ground-truth nexuses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every item's response and write one JSONL line per item.
    Score {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        composite: CompositeArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select the top-kappa fraction of scored items by composite score.
    Sample {
        /// A score file from `score`; otherwise the dataset is scored first.
        #[arg(long)]
        scores: Option<PathBuf>,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        composite: CompositeArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean fidelity over the corpus at several thresholds.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated ascending thresholds.
        #[arg(long, value_delimiter = ',', default_values_t = default_taus())]
        taus: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pearson and Spearman correlation of metrics against external ratings.
    Correlate {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Means and medians of the metrics for correct versus incorrect answers.
    Compare {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-subfield, per-difficulty and per-type summary of a score file.
    Report {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmbedderKind {
    Hash,
    File,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Matcher {
    Greedy,
    Dp,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// JSONL of {"id", "response"}; wins over inline responses.
    #[arg(long)]
    pub responses: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EmbedderKind::Hash)]
    pub embedder: EmbedderKind,
    /// Vector store for `--embedder file`.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Base URL of an /embed service for `--embedder http`.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long, default_value = DEFAULT_MODEL)]
    pub model: String,
    #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
    pub batch_size: usize,
    #[arg(long, default_value_t = logicality_core::DEFAULT_TAU)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = Matcher::Greedy)]
    pub matcher: Matcher,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Seed for the hash embedder.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub lowercase: bool,
    #[arg(long, default_value_t = logicality_core::segment::DEFAULT_MIN_STEP_CHARS)]
    pub min_step_chars: usize,
    /// One abbreviation per line; replaces the built-in list.
    #[arg(long)]
    pub abbrev_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompositeArgs {
    #[arg(long, default_value_t = 0.25)]
    pub delta_f: f64,
    #[arg(long, default_value_t = 0.50)]
    pub delta_o: f64,
    #[arg(long, default_value_t = 0.25)]
    pub delta_p: f64,
    #[arg(long, default_value_t = 0.5)]
    pub kappa: f64,
}

impl CompositeArgs {
    fn config(&self) -> Result<CompositeConfig> {
        let cfg = CompositeConfig {
            delta_f: self.delta_f,
            delta_o: self.delta_o,
            delta_p: self.delta_p,
            kappa: self.kappa,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

type Responses = HashMap<String, String>;

impl InputArgs {
    fn dataset(&self) -> Result<&Path> {
        self.dataset
            .as_deref()
            .ok_or_else(|| Error::Config("--dataset is required".into()))
    }

    pub fn embedder_spec(&self) -> Result<EmbedderSpec> {
        Ok(match self.embedder {
            EmbedderKind::Hash => EmbedderSpec::HashTest { seed: self.seed },
            EmbedderKind::File => EmbedderSpec::FileStore {
                path: self
                    .embeddings
                    .clone()
                    .ok_or_else(|| Error::Config("--embedder file needs --embeddings".into()))?,
            },
            EmbedderKind::Http => {
                let endpoint = self
                    .endpoint
                    .clone()
                    .ok_or_else(|| Error::Config("--embedder http needs --endpoint".into()))?;
                let mut cfg = HttpConfig::new(endpoint, self.model.clone()).with_env_token();
                cfg.batch_size = self.batch_size;
                EmbedderSpec::HttpEncoder(cfg)
            }
        })
    }

    fn options(&self, composite: CompositeConfig) -> Result<ScoreOptions> {
        if self.jobs == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        let mut segmenter = SegmenterConfig {
            min_step_chars: self.min_step_chars,
            ..SegmenterConfig::default()
        };
        if let Some(path) = &self.abbrev_file {
            segmenter.abbreviations = read_to_string(path)?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect();
        }
        let opts = ScoreOptions {
            metric: MetricConfig {
                tau: self.tau,
                strategy: match self.matcher {
                    Matcher::Greedy => MatchStrategy::Greedy,
                    Matcher::Dp => MatchStrategy::DynamicProgramming,
                },
                ..MetricConfig::default()
            },
            segmenter,
            composite,
            jobs: self.jobs,
            lowercase: self.lowercase,
        };
        opts.validate()?;
        Ok(opts)
    }

    fn load(&self) -> Result<(Vec<DatasetRecord>, Option<Responses>)> {
        let records = parse_dataset(self.dataset()?)?;
        let responses = self.responses.as_deref().map(parse_responses).transpose()?;
        Ok((records, responses))
    }
}

/// What a command did, for the summary line and the exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub command: &'static str,
    pub items: usize,
    pub failures: usize,
    pub output: Option<PathBuf>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.failures == 0 {
            0
        } else {
            2
        }
    }
}

fn manifest_path(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `<out>.failures.json`, or removes a stale one when clean.
fn write_failures(out: &Path, failures: &[Failure]) -> Result<()> {
    let path = manifest_path(out, ".failures.json");
    if failures.is_empty() {
        if path.exists() {
            std::fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
        }
        return Ok(());
    }
    let doc = json!({ "failures": failures });
    write_string_atomic(&path, &format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    write_string_atomic(path, &format!("{}\n", serde_json::to_string_pretty(value).expect("json")))
}

fn score_input(input: &InputArgs, composite: CompositeConfig) -> Result<(Vec<ScoredItem>, Vec<Failure>)> {
    let opts = input.options(composite)?;
    let (records, responses) = input.load()?;
    let encoder = input.embedder_spec()?.build()?;
    let outcome = score_batch(&records, responses.as_ref(), &encoder, &opts)?;
    Ok((outcome.results, outcome.failures))
}

pub fn run(cli: Cli) -> Result<RunSummary> {
    match cli.command {
        Command::Score { input, composite, out } => {
            let (results, failures) = score_input(&input, composite.config()?)?;
            crate::dataset::write_scores(&out, &results)?;
            write_failures(&out, &failures)?;
            Ok(RunSummary {
                command: "score",
                items: results.len() + failures.len(),
                failures: failures.len(),
                output: Some(out),
            })
        }
        Command::Sample {
            scores,
            input,
            composite,
            out,
        } => {
            let cfg = composite.config()?;
            let (mut results, failures) = match &scores {
                Some(path) => (read_scores(path)?, Vec::new()),
                None => score_input(&input, cfg)?,
            };
            let stats = corpus_stats(results.iter().filter(|r| !r.is_empty_trace()).map(|r| &r.scores))?;
            for r in &mut results {
                r.composite = Some(composite_score(&r.scores, &stats, &cfg));
            }
            let keyed: Vec<(&str, f64)> = results
                .iter()
                .map(|r| (r.item_id.as_str(), r.composite.expect("set above")))
                .collect();
            let selected = select_top_kappa(&keyed, cfg.kappa);
            let by_id: HashMap<&str, f64> = keyed.iter().copied().collect();
            write_atomic(&out, |w| {
                for id in &selected {
                    writeln!(w, "{{\"id\":{},\"s\":{:.6}}}", serde_json::to_string(id)?, by_id[id.as_str()])?;
                }
                Ok(())
            })?;
            let moments = |m: &logicality_core::sampling::Moments| json!({"mean": m.mean, "std": m.std});
            let manifest = json!({
                "command": "sample",
                "source": scores.as_ref().or(input.dataset.as_ref()).map(|p| p.display().to_string()),
                "delta_f": cfg.delta_f,
                "delta_o": cfg.delta_o,
                "delta_p": cfg.delta_p,
                "kappa": cfg.kappa,
                "total": results.len(),
                "selected": selected.len(),
                "corpus_stats": {
                    "count": stats.count,
                    "precision": moments(&stats.precision),
                    "recall": moments(&stats.recall),
                    "causal": moments(&stats.causal),
                    "progress": moments(&stats.progress),
                },
            });
            write_json(&manifest_path(&out, ".manifest.json"), &manifest)?;
            write_failures(&out, &failures)?;
            Ok(RunSummary {
                command: "sample",
                items: results.len() + failures.len(),
                failures: failures.len(),
                output: Some(out),
            })
        }
        Command::Sweep { input, taus, out } => {
            let opts = input.options(CompositeConfig::default())?;
            let (records, responses) = input.load()?;
            let encoder = input.embedder_spec()?.build()?;
            let (instances, failures) = prepare_instances(&records, responses.as_ref(), &encoder, &opts)?;
            let rows = sweep(&instances, &taus, &opts)?;
            print!("{}", report::sweep_text(&rows));
            if let Some(out) = &out {
                write_json(out, &report::sweep_json(&rows))?;
                write_failures(out, &failures)?;
            }
            Ok(RunSummary {
                command: "sweep",
                items: records.len(),
                failures: failures.len(),
                output: out,
            })
        }
        Command::Correlate { scores, ratings, out } => {
            let results = read_scores(&scores)?;
            let c = report::correlate(&results, &read_ratings(&ratings)?)?;
            print!("{}", report::correlation_text(&c));
            if let Some(out) = &out {
                write_json(out, &report::correlation_json(&c))?;
            }
            Ok(RunSummary {
                command: "correlate",
                items: c.n,
                failures: 0,
                output: out,
            })
        }
        Command::Compare { scores, out } => {
            let results = read_scores(&scores)?;
            let (correct, incorrect) = group_compare(&results)?;
            print!("{}", report::compare_text(&correct, &incorrect));
            if let Some(out) = &out {
                write_json(out, &report::compare_json(&correct, &incorrect))?;
            }
            Ok(RunSummary {
                command: "compare",
                items: correct.count + incorrect.count,
                failures: 0,
                output: out,
            })
        }
        Command::Report { scores, dataset, out } => {
            let results = read_scores(&scores)?;
            let items: Vec<_> = parse_dataset(&dataset)?.into_iter().map(|r| r.item).collect();
            let agg = logicality_core::aggregate(&results, &items)?;
            print!("{}", report::aggregate_text(&agg));
            if let Some(out) = &out {
                write_json(out, &report::aggregate_json(&agg))?;
            }
            Ok(RunSummary {
                command: "report",
                items: results.len(),
                failures: 0,
                output: out,
            })
        }
    }
}

/// Parses arguments, runs, prints the summary line and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    match run(cli) {
        Ok(s) => {
            eprintln!(
                "{}: {} items, {} failures, {:.2}s{}",
                s.command,
                s.items,
                s.failures,
                start.elapsed().as_secs_f64(),
                s.output.as_ref().map(|p| format!(" -> {}", p.display())).unwrap_or_default()
            );
            s.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
