//! Flat `key = value` run configuration.
//!
//! Grammar: one `key = value` pair per line; blank lines and lines starting
//! with `#` are ignored; whitespace around key and value is trimmed; lists
//! are comma separated; booleans are `true`/`false`; an empty value means
//! "unset" for the optional keys. Later assignments win. Unknown keys are
//! errors.

use std::path::PathBuf;

use indexmap::IndexMap;
use topoconc::atc::{default_alpha, Similarity, Variance};
use topoconc::concentration::{NormMode, TcParams};
use topoconc::graph::{SplitRatios, SplitStrategy, SplitType};
use topoconc::reweight::SoftmaxDomain;

use crate::error::{CliError, CliResult};

pub const OUTPUT_ROOT_ENV: &str = "TOPOCONC_OUTPUT_ROOT";
pub const FALLBACK_OUTPUT: &str = "topoconc-out";

pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

macro_rules! keys {
    ($(($name:literal, $default:literal, $help:literal)),* $(,)?) => {
        pub const KEYS: &[Key] = &[$(Key { name: $name, default: $default, help: $help }),*];
    };
}

keys![
    (
        "input",
        "",
        "edge list (`src dst [timestamp]`); required by every command except bias-oracle"
    ),
    (
        "output",
        "",
        "output directory; empty uses $TOPOCONC_OUTPUT_ROOT, else ./topoconc-out"
    ),
    (
        "workers",
        "0",
        "worker threads; 0 uses the available parallelism"
    ),
    ("split.train", "0.7", "train edge fraction"),
    ("split.val", "0.1", "validation edge fraction"),
    ("split.test", "0.2", "test edge fraction"),
    ("split.strategy", "random", "random | temporal"),
    ("split.seed", "0", "seed of the random split"),
    ("tc.k", "1", "hops of the computation tree"),
    ("tc.beta", "0.5", "hop decay in (0, 1]"),
    (
        "tc.norm",
        "product",
        "pair normalizer: product | source | min"
    ),
    ("atc.dim", "64", "random projection dimension"),
    ("atc.hops", "2", "diffusion hops"),
    (
        "atc.beta",
        "0.5",
        "hop decay used when atc.alpha is empty (alpha_k = beta^(k-1))"
    ),
    ("atc.alpha", "", "explicit comma-separated hop weights"),
    ("atc.phi", "cosine", "similarity: cosine | dot"),
    ("atc.seed", "0", "projection seed"),
    (
        "atc.variance",
        "per-dimension",
        "projection variance: per-dimension (1/d) | unit"
    ),
    ("eval.ks", "5,10,20,50", "cutoffs"),
    (
        "eval.exclude_train",
        "true",
        "drop training neighbors from the candidate list"
    ),
    (
        "eval.truth",
        "Te",
        "split whose edges are the ground truth: Val | Te"
    ),
    (
        "eval.negatives",
        "100",
        "uniform negative pairs for link-centric Hits@K; 0 skips it"
    ),
    ("eval.negative_seed", "0", "seed of the negative sample"),
    ("bias.universe", "100", "candidate universe size N"),
    ("bias.cutoff", "10", "cutoff K"),
    ("bias.truth", "1,5,20", "ground-truth sizes E"),
    ("bias.trials", "100000", "Monte-Carlo trials per truth size"),
    ("bias.seed", "0", "Monte-Carlo seed"),
    (
        "analysis.metric",
        "hits",
        "metric correlated against topology: recall | precision | f1 | ndcg | mrr | hits"
    ),
    (
        "analysis.against",
        "tc_tr,tc_te,atc_tr,degree_tr,density",
        "node-table columns correlated with the metric"
    ),
    ("analysis.bin_by", "tc_tr", "column used for binning"),
    (
        "analysis.bins",
        "0,0.2,0.4,0.6,0.8,1",
        "bin edges, strictly increasing"
    ),
    (
        "tds.gap",
        "",
        "metric column (e.g. hits@10) whose validation-minus-test gap is correlated with the shift"
    ),
    ("reweight.iterations", "10", "iterations T"),
    ("reweight.interval", "1", "update interval"),
    ("reweight.warmup", "0", "warm-up iterations without updates"),
    ("reweight.gamma", "0.1", "update weight gamma >= 0"),
    (
        "reweight.domain",
        "auto",
        "softmax domain: auto | full | neighbors"
    ),
    (
        "reweight.renormalize",
        "false",
        "row-renormalize after every update"
    ),
    (
        "reweight.predictor",
        "dot",
        "pair scorer: dot | common-neighbors"
    ),
];

/// Command-line flag for a key: `tc.k` -> `tc-k`.
pub fn flag_name(key: &str) -> String {
    key.replace(['.', '_'], "-")
}

/// Unresolved key/value pairs in table order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    values: IndexMap<&'static str, String>,
}

impl Default for RawConfig {
    fn default() -> Self {
        Self {
            values: KEYS
                .iter()
                .map(|k| (k.name, k.default.to_string()))
                .collect(),
        }
    }
}

impl RawConfig {
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.trim().to_string();
                Ok(())
            }
            None => Err(CliError::Config(format!("unknown key {key:?}"))),
        }
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn merge_text(&mut self, text: &str) -> CliResult<()> {
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key = value", idx + 1))
            })?;
            self.set(key.trim(), value)
                .map_err(|e| CliError::Config(format!("line {}: {e}", idx + 1)))?;
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(v);
            s.push('\n');
        }
        s
    }

    pub fn resolve(&self) -> CliResult<RunConfig> {
        RunConfig::from_raw(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictorKind {
    Dot,
    CommonNeighbors,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtcSpec {
    pub dim: usize,
    pub hops: usize,
    pub beta: f64,
    pub alpha: Vec<f64>,
    pub phi: Similarity,
    pub seed: u64,
    pub variance: Variance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSpec {
    pub ks: Vec<usize>,
    pub exclude_train: bool,
    pub truth: SplitType,
    pub negatives: usize,
    pub negative_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasSpec {
    pub universe: usize,
    pub cutoff: usize,
    pub truth: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSpec {
    pub metric: String,
    pub against: Vec<String>,
    pub bin_by: String,
    pub bins: Vec<f64>,
    pub gap: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReweightSpec {
    pub iterations: usize,
    pub interval: usize,
    pub warmup: usize,
    pub gamma: f64,
    pub domain: Option<SoftmaxDomain>,
    pub renormalize: bool,
    pub predictor: PredictorKind,
}

/// Typed view of a [`RawConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    pub workers: usize,
    pub ratios: SplitRatios,
    pub strategy: SplitStrategy,
    pub tc: TcParams,
    pub atc: AtcSpec,
    pub eval: EvalSpec,
    pub bias: BiasSpec,
    pub analysis: AnalysisSpec,
    pub reweight: ReweightSpec,
}

fn parse<T: std::str::FromStr>(raw: &RawConfig, key: &str) -> CliResult<T> {
    let v = raw.get(key);
    v.parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_list<T: std::str::FromStr>(raw: &RawConfig, key: &str) -> CliResult<Vec<T>> {
    let v = raw.get(key);
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{key}: cannot parse {p:?} in {v:?}")))
        })
        .collect()
}

fn parse_enum<T: std::str::FromStr<Err = topoconc::Error>>(
    raw: &RawConfig,
    key: &str,
) -> CliResult<T> {
    raw.get(key)
        .parse()
        .map_err(|e: topoconc::Error| CliError::Config(format!("{key}: {e}")))
}

fn optional(raw: &RawConfig, key: &str) -> Option<String> {
    Some(raw.get(key).to_string()).filter(|s| !s.is_empty())
}

impl RunConfig {
    fn from_raw(raw: &RawConfig) -> CliResult<Self> {
        let output = match optional(raw, "output") {
            Some(o) => PathBuf::from(o),
            None => std::env::var_os(OUTPUT_ROOT_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(FALLBACK_OUTPUT)),
        };
        let strategy = match raw.get("split.strategy") {
            "random" => SplitStrategy::Random {
                seed: parse(raw, "split.seed")?,
            },
            "temporal" => SplitStrategy::Temporal,
            other => {
                return Err(CliError::Config(format!(
                    "split.strategy: unknown {other:?}"
                )))
            }
        };
        let hops: usize = parse(raw, "atc.hops")?;
        let atc_beta: f64 = parse(raw, "atc.beta")?;
        let mut alpha: Vec<f64> = parse_list(raw, "atc.alpha")?;
        if alpha.is_empty() {
            alpha = default_alpha(hops, atc_beta);
        } else if alpha.len() != hops {
            return Err(CliError::Config(format!(
                "atc.alpha has {} weights for atc.hops = {hops}",
                alpha.len()
            )));
        }
        let truth: SplitType = parse_enum(raw, "eval.truth")?;
        if truth == SplitType::Train {
            return Err(CliError::Config("eval.truth must be Val or Te".into()));
        }
        let domain = match raw.get("reweight.domain") {
            "auto" => None,
            _ => Some(parse_enum(raw, "reweight.domain")?),
        };
        let predictor = match raw.get("reweight.predictor") {
            "dot" => PredictorKind::Dot,
            "common-neighbors" => PredictorKind::CommonNeighbors,
            other => {
                return Err(CliError::Config(format!(
                    "reweight.predictor: unknown {other:?}"
                )))
            }
        };
        let metric = raw.get("analysis.metric").to_string();
        if !topoconc::eval::METRIC_NAMES.contains(&metric.as_str()) {
            return Err(CliError::Config(format!(
                "analysis.metric: unknown {metric:?}"
            )));
        }
        Ok(Self {
            input: optional(raw, "input").map(PathBuf::from),
            output,
            workers: parse(raw, "workers")?,
            ratios: SplitRatios {
                train: parse(raw, "split.train")?,
                val: parse(raw, "split.val")?,
                test: parse(raw, "split.test")?,
            },
            strategy,
            tc: TcParams {
                k: parse(raw, "tc.k")?,
                beta: parse(raw, "tc.beta")?,
                norm: parse_enum::<NormMode>(raw, "tc.norm")?,
            },
            atc: AtcSpec {
                dim: parse(raw, "atc.dim")?,
                hops,
                beta: atc_beta,
                alpha,
                phi: parse_enum(raw, "atc.phi")?,
                seed: parse(raw, "atc.seed")?,
                variance: parse_enum(raw, "atc.variance")?,
            },
            eval: EvalSpec {
                ks: parse_list(raw, "eval.ks")?,
                exclude_train: parse(raw, "eval.exclude_train")?,
                truth,
                negatives: parse(raw, "eval.negatives")?,
                negative_seed: parse(raw, "eval.negative_seed")?,
            },
            bias: BiasSpec {
                universe: parse(raw, "bias.universe")?,
                cutoff: parse(raw, "bias.cutoff")?,
                truth: parse_list(raw, "bias.truth")?,
                trials: parse(raw, "bias.trials")?,
                seed: parse(raw, "bias.seed")?,
            },
            analysis: AnalysisSpec {
                metric,
                against: parse_list(raw, "analysis.against")?,
                bin_by: raw.get("analysis.bin_by").to_string(),
                bins: parse_list(raw, "analysis.bins")?,
                gap: optional(raw, "tds.gap"),
            },
            reweight: ReweightSpec {
                iterations: parse(raw, "reweight.iterations")?,
                interval: parse(raw, "reweight.interval")?,
                warmup: parse(raw, "reweight.warmup")?,
                gamma: parse(raw, "reweight.gamma")?,
                domain,
                renormalize: parse(raw, "reweight.renormalize")?,
                predictor,
            },
        })
    }
}
