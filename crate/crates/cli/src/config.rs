use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use topofc::embed::MnPolicy;
use topofc::featsynth::FeatureSpec;
use topofc::learn::{CvConfig, MlpLearner, Protocol};
use topofc::pgh::ThresholdGrid;
use topofc::pipeline::PipelineConfig;

use crate::UsageError;

#[derive(Debug, Parser)]
#[command(
    name = "topofc",
    version,
    about = "Topological embeddings of graph datasets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-graph birth and death values.
    Extract {
        #[command(flatten)]
        common: CommonArgs,
        /// Also dump one graph's correlation matrix as CSV `i,j,r`.
        #[arg(long, value_name = "PATH")]
        emit_fc: Option<PathBuf>,
        /// Graph whose matrix `--emit-fc` writes.
        #[arg(long, value_name = "INDEX")]
        fc_graph: Option<usize>,
    },
    /// Fixed-length quantile embeddings.
    Embed {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Betti curve of one graph as CSV `epsilon,beta0,beta1`.
    Betti {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_name = "INDEX")]
        graph: Option<usize>,
        /// `uniform:K` or `weights`.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Pairwise Wasserstein distances as CSV `i,j,w_p`.
    Distance {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        p: Option<f64>,
        /// `births` or `deaths`.
        #[arg(long)]
        diagram: Option<String>,
    },
    /// Class barycenter as CSV `z,value_mean,value_std`.
    Barycenter {
        #[command(flatten)]
        common: CommonArgs,
        /// Graph label as written in the dataset.
        #[arg(long, allow_negative_numbers = true)]
        class: Option<i64>,
        #[arg(long)]
        diagram: Option<String>,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Fit the classifier on the whole dataset.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        learner: LearnerArgs,
    },
    /// Evaluate the classifier with k-fold CV or random splits.
    Crossval {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        learner: LearnerArgs,
    },
    /// Report self-loops, duplicates, asymmetric and isolated nodes.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Dataset directory holding `NAME_A.txt` and friends.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Dataset name; defaults to the directory name.
    #[arg(long)]
    pub name: Option<String>,
    /// intrinsic, labels, ldp, intrinsic+ldp or labels+ldp.
    #[arg(long)]
    pub features: Option<String>,
    /// max, min, avg or fixed:M,N.
    #[arg(long)]
    pub mn: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to TOPOFC_WORKERS, then the CPU count.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file, `-` for standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LearnerArgs {
    /// kfold:K or splits:N.
    #[arg(long)]
    pub protocol: Option<String>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Feed raw embeddings to the classifier.
    #[arg(long)]
    pub no_standardize: bool,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub dataset: Option<PathBuf>,
    pub name: Option<String>,
    pub features: Option<String>,
    pub mn: Option<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub protocol: Option<String>,
    pub hidden: Option<usize>,
    pub lr: Option<f64>,
    pub weight_decay: Option<f64>,
    pub epochs: Option<usize>,
    pub dropout: Option<f64>,
    pub batch_size: Option<usize>,
    pub standardize: Option<bool>,
    pub emit_fc: Option<PathBuf>,
    pub fc_graph: Option<usize>,
    pub graph: Option<usize>,
    pub grid: Option<String>,
    pub p: Option<f64>,
    pub diagram: Option<String>,
    pub class: Option<i64>,
    pub resolution: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| UsageError(format!("bad config {}: {e}", path.display())).into())
    }
}

/// Fully resolved settings. Serialized into every output; the worker count
/// and output path are left out so that reruns compare byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub dataset: PathBuf,
    pub name: String,
    pub features: String,
    pub mn: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learner: Option<LearnerConfig>,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub extra: serde_json::Map<String, serde_json::Value>,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct LearnerConfig {
    pub protocol: String,
    pub hidden: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub dropout: f64,
    pub batch_size: usize,
    pub standardize: bool,
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse<T: std::str::FromStr>(flag: &str, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| usage(format!("--{flag}: {e}")))
}

impl RunConfig {
    pub fn resolve(command: &'static str, common: &CommonArgs, file: &FileConfig) -> Result<Self> {
        let dataset = common
            .dataset
            .clone()
            .or_else(|| file.dataset.clone())
            .ok_or_else(|| usage("--dataset is required"))?;
        let name = match common.name.clone().or_else(|| file.name.clone()) {
            Some(n) => n,
            None => dataset
                .canonicalize()
                .unwrap_or_else(|_| dataset.clone())
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .ok_or_else(|| usage("cannot infer the dataset name; pass --name"))?,
        };
        let features = common
            .features
            .clone()
            .or_else(|| file.features.clone())
            .unwrap_or_else(|| FeatureSpec::LabelsLdp.to_string());
        parse::<FeatureSpec>("features", &features)?;
        let mn = common
            .mn
            .clone()
            .or_else(|| file.mn.clone())
            .unwrap_or_else(|| MnPolicy::Avg.to_string());
        parse::<MnPolicy>("mn", &mn)?;
        let workers = match common.workers {
            Some(w) => w,
            None => match std::env::var("TOPOFC_WORKERS") {
                Ok(v) => parse("workers (TOPOFC_WORKERS)", v.trim())?,
                Err(_) => file
                    .workers
                    .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            },
        };
        if workers == 0 {
            return Err(usage("worker count must be >= 1"));
        }
        let out = common
            .out
            .clone()
            .or_else(|| file.out.clone())
            .unwrap_or_else(|| PathBuf::from(format!("{name}-{command}.{}", default_ext(command))));
        Ok(RunConfig {
            command,
            dataset,
            name,
            features,
            mn,
            seed: common.seed.or(file.seed).unwrap_or(0),
            learner: None,
            extra: serde_json::Map::new(),
            workers,
            out,
        })
    }

    pub fn with_learner(mut self, args: &LearnerArgs, file: &FileConfig) -> Result<Self> {
        let defaults = MlpLearner::default();
        let protocol = args
            .protocol
            .clone()
            .or_else(|| file.protocol.clone())
            .unwrap_or_else(|| Protocol::KFold(5).to_string());
        parse::<Protocol>("protocol", &protocol)?;
        let learner = LearnerConfig {
            protocol,
            hidden: args.hidden.or(file.hidden).unwrap_or(defaults.hidden_dim),
            lr: args.lr.or(file.lr).unwrap_or(defaults.lr),
            weight_decay: args
                .weight_decay
                .or(file.weight_decay)
                .unwrap_or(defaults.weight_decay),
            epochs: args.epochs.or(file.epochs).unwrap_or(defaults.epochs),
            dropout: args.dropout.or(file.dropout).unwrap_or(defaults.dropout),
            batch_size: args
                .batch_size
                .or(file.batch_size)
                .unwrap_or(defaults.batch_size),
            standardize: !args.no_standardize && file.standardize.unwrap_or(true),
        };
        self.pipeline_from(&learner)?
            .learner
            .config(1, 2, 0)
            .validate()?;
        self.learner = Some(learner);
        Ok(self)
    }

    pub fn set(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.extra.insert(key.to_string(), value.into());
    }

    pub fn feature_spec(&self) -> FeatureSpec {
        self.features.parse().expect("validated at resolve time")
    }

    pub fn mn_policy(&self) -> MnPolicy {
        self.mn.parse().expect("validated at resolve time")
    }

    fn pipeline_from(&self, l: &LearnerConfig) -> Result<PipelineConfig> {
        Ok(PipelineConfig {
            features: self.feature_spec(),
            mn: self.mn_policy(),
            learner: MlpLearner {
                hidden_dim: l.hidden,
                dropout: l.dropout,
                lr: l.lr,
                weight_decay: l.weight_decay,
                epochs: l.epochs,
                batch_size: l.batch_size,
            },
            cv: CvConfig {
                protocol: parse("protocol", &l.protocol)?,
                standardize: l.standardize,
                seed: self.seed,
            },
        })
    }

    pub fn pipeline(&self) -> Result<PipelineConfig> {
        let l = self.learner.as_ref().context("no learner settings")?;
        self.pipeline_from(l)
    }
}

pub fn parse_grid(s: &str) -> Result<ThresholdGrid> {
    parse("grid", s)
}

fn default_ext(command: &str) -> &'static str {
    match command {
        "betti" | "distance" | "barycenter" => "csv",
        _ => "jsonl",
    }
}
