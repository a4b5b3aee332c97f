//! Run configuration: flat `key = value` text, every tunable across the
//! pipeline, validated at parse time with defaults materialized so the
//! echoed config reproduces the run on its own.

use std::fmt;
use std::path::PathBuf;

use graphwatch_core::fmt::{fmt_f64, parse_f64};
use graphwatch_core::fusion::ConsistencyMode;
use graphwatch_core::pipeline::{
    streams, AnomalyMode, DatasetSplit, DetectionConfig, SynthConfig, ThresholdRule,
};
use graphwatch_core::rng::derive_seed;
use graphwatch_core::rrcf::ScoreAggregate;
use graphwatch_core::spectral::SpectralAlgorithm;

/// Configuration failures: parse errors carry the line, validation errors
/// name the offending key and its legal range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Parse { line: usize, message: String },
    Validation { key: String, legal: String },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse { line, message } => {
                write!(f, "config parse error at line {line}: {message}")
            }
            CliError::Validation { key, legal } => {
                write!(f, "invalid value for '{key}': expected {legal}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdKind {
    Quantile,
    Fixed,
}

/// Every tunable of every stage, plus paths. Defaults are the documented
/// stage defaults (0.6/0.2/0.2 split, 3 runs, 40 trees of capacity 256,
/// shingle 4, 95th-percentile threshold, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub sigma: Option<f64>,
    pub k: usize,
    pub spectral_algorithm: SpectralAlgorithm,
    pub fusion_mode: ConsistencyMode,
    pub pca_variance: f64,
    pub gnn_hidden: usize,
    pub gnn_kappa: f64,
    pub gnn_tol: f64,
    pub gnn_max_iter: usize,
    pub dgi_epochs: usize,
    pub dgi_lr: f64,
    pub trees: usize,
    pub capacity: usize,
    pub shingle: usize,
    pub aggregate: ScoreAggregate,
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub threshold_rule: ThresholdKind,
    pub threshold_value: f64,
    pub runs: usize,
    pub t_steps: usize,
    pub nodes: usize,
    pub blocks: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub anomaly_mode: AnomalyMode,
    pub pout_scale: f64,
    pub anomalies: Vec<usize>,
    pub view_dims: Vec<usize>,
    pub rho: f64,
    pub block_separation: f64,
    pub feature_noise: f64,
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    /// Optional precomputed embeddings CSV for `detect`.
    pub embeddings: Option<PathBuf>,
    /// Optional scores CSV for `roc` (defaults to `<out_dir>/scores.csv`).
    pub scores: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            sigma: None,
            k: 2,
            spectral_algorithm: SpectralAlgorithm::Basic,
            fusion_mode: ConsistencyMode::VsFull,
            pca_variance: 0.95,
            gnn_hidden: 16,
            gnn_kappa: 0.9,
            gnn_tol: 1e-6,
            gnn_max_iter: 200,
            dgi_epochs: 200,
            dgi_lr: 0.05,
            trees: 40,
            capacity: 256,
            shingle: 4,
            aggregate: ScoreAggregate::Mean,
            train_frac: 0.6,
            val_frac: 0.2,
            test_frac: 0.2,
            threshold_rule: ThresholdKind::Quantile,
            threshold_value: 0.95,
            runs: 3,
            t_steps: 100,
            nodes: 30,
            blocks: 2,
            p_in: 0.3,
            p_out: 0.02,
            anomaly_mode: AnomalyMode::PoutScale,
            pout_scale: 10.0,
            anomalies: (40..=44).chain(70..=74).collect(),
            view_dims: vec![4, 4],
            rho: 0.1,
            block_separation: 6.0,
            feature_noise: 1.0,
            data_dir: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            embeddings: None,
            scores: None,
        }
    }
}

fn invalid(key: &str, legal: &str) -> CliError {
    CliError::Validation {
        key: key.into(),
        legal: legal.into(),
    }
}

fn parse_positive_f64(key: &str, value: &str, legal: &str) -> Result<f64, CliError> {
    match parse_f64(value) {
        Some(v) if v > 0.0 => Ok(v),
        _ => Err(invalid(key, legal)),
    }
}

fn parse_unit_interval(key: &str, value: &str) -> Result<f64, CliError> {
    match parse_f64(value) {
        Some(v) if (0.0..=1.0).contains(&v) => Ok(v),
        _ => Err(invalid(key, "[0, 1]")),
    }
}

fn parse_open_unit(key: &str, value: &str) -> Result<f64, CliError> {
    match parse_f64(value) {
        Some(v) if v > 0.0 && v < 1.0 => Ok(v),
        _ => Err(invalid(key, "(0, 1)")),
    }
}

fn parse_usize_min(key: &str, value: &str, min: usize, legal: &str) -> Result<usize, CliError> {
    match value.trim().parse::<usize>() {
        Ok(v) if v >= min => Ok(v),
        _ => Err(invalid(key, legal)),
    }
}

/// Parse "40-44,70-74,80" into a sorted timestep list.
fn parse_ranges(key: &str, value: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    let trimmed = value.trim();
    if trimmed.is_empty() || trimmed == "none" {
        return Ok(out);
    }
    for part in trimmed.split(',') {
        let part = part.trim();
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (part, part),
        };
        let lo: usize = lo
            .parse()
            .map_err(|_| invalid(key, "comma-separated timesteps or ranges like 40-44"))?;
        let hi: usize = hi
            .parse()
            .map_err(|_| invalid(key, "comma-separated timesteps or ranges like 40-44"))?;
        if hi < lo {
            return Err(invalid(key, "ranges with lo <= hi"));
        }
        out.extend(lo..=hi);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn format_ranges(steps: &[usize]) -> String {
    if steps.is_empty() {
        return "none".into();
    }
    let mut parts: Vec<String> = Vec::new();
    let mut start = steps[0];
    let mut prev = steps[0];
    for &s in &steps[1..] {
        if s == prev + 1 {
            prev = s;
            continue;
        }
        parts.push(if start == prev {
            format!("{start}")
        } else {
            format!("{start}-{prev}")
        });
        start = s;
        prev = s;
    }
    parts.push(if start == prev {
        format!("{start}")
    } else {
        format!("{start}-{prev}")
    });
    parts.join(",")
}

impl RunConfig {
    /// Apply one `key = value` assignment with per-key validation.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key {
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| invalid(key, "unsigned 64-bit integer"))?
            }
            "sigma" => {
                self.sigma = if value == "median" {
                    None
                } else {
                    Some(parse_positive_f64(key, value, "(0, \u{221e})")?)
                }
            }
            "k" => self.k = parse_usize_min(key, value, 2, ">= 2")?,
            "spectral_algorithm" => {
                self.spectral_algorithm = match value {
                    "basic" => SpectralAlgorithm::Basic,
                    "njw" => SpectralAlgorithm::Njw,
                    "ms" => SpectralAlgorithm::Ms,
                    "slh" => SpectralAlgorithm::Slh,
                    _ => return Err(invalid(key, "one of basic|njw|ms|slh")),
                }
            }
            "fusion_mode" => {
                self.fusion_mode = match value {
                    "vs_full" => ConsistencyMode::VsFull,
                    "pairwise" => ConsistencyMode::Pairwise,
                    _ => return Err(invalid(key, "one of vs_full|pairwise")),
                }
            }
            "pca_variance" => {
                self.pca_variance = match parse_f64(value) {
                    Some(v) if v > 0.0 && v <= 1.0 => v,
                    _ => return Err(invalid(key, "(0, 1]")),
                }
            }
            "gnn_hidden" => self.gnn_hidden = parse_usize_min(key, value, 1, ">= 1")?,
            "gnn_kappa" => self.gnn_kappa = parse_open_unit(key, value)?,
            "gnn_tol" => self.gnn_tol = parse_positive_f64(key, value, "(0, \u{221e})")?,
            "gnn_max_iter" => self.gnn_max_iter = parse_usize_min(key, value, 1, ">= 1")?,
            "dgi_epochs" => {
                self.dgi_epochs = value
                    .parse()
                    .map_err(|_| invalid(key, "non-negative integer"))?
            }
            "dgi_lr" => self.dgi_lr = parse_positive_f64(key, value, "(0, \u{221e})")?,
            "trees" => self.trees = parse_usize_min(key, value, 1, ">= 1")?,
            "capacity" => self.capacity = parse_usize_min(key, value, 1, ">= 1")?,
            "shingle" => self.shingle = parse_usize_min(key, value, 1, ">= 1")?,
            "aggregate" => {
                self.aggregate = match value {
                    "mean" => ScoreAggregate::Mean,
                    "median" => ScoreAggregate::Median,
                    _ => return Err(invalid(key, "one of mean|median")),
                }
            }
            "train_frac" => self.train_frac = parse_open_unit(key, value)?,
            "val_frac" => self.val_frac = parse_open_unit(key, value)?,
            "test_frac" => self.test_frac = parse_open_unit(key, value)?,
            "threshold_rule" => {
                self.threshold_rule = match value {
                    "quantile" => ThresholdKind::Quantile,
                    "fixed" => ThresholdKind::Fixed,
                    _ => return Err(invalid(key, "one of quantile|fixed")),
                }
            }
            "threshold_value" => {
                self.threshold_value =
                    parse_f64(value).ok_or_else(|| invalid(key, "finite real"))?
            }
            "runs" => self.runs = parse_usize_min(key, value, 1, ">= 1")?,
            "t_steps" => self.t_steps = parse_usize_min(key, value, 1, ">= 1")?,
            "nodes" => self.nodes = parse_usize_min(key, value, 4, ">= 4")?,
            "blocks" => self.blocks = parse_usize_min(key, value, 2, ">= 2")?,
            "p_in" => self.p_in = parse_unit_interval(key, value)?,
            "p_out" => self.p_out = parse_unit_interval(key, value)?,
            "anomaly_mode" => {
                self.anomaly_mode = match value {
                    "pout_scale" => AnomalyMode::PoutScale,
                    "block_merge" => AnomalyMode::BlockMerge,
                    _ => return Err(invalid(key, "one of pout_scale|block_merge")),
                }
            }
            "pout_scale" => self.pout_scale = parse_positive_f64(key, value, "(0, \u{221e})")?,
            "anomalies" => self.anomalies = parse_ranges(key, value)?,
            "view_dims" => {
                let dims: Result<Vec<usize>, _> = value
                    .split(',')
                    .map(|tok| tok.trim().parse::<usize>())
                    .collect();
                match dims {
                    Ok(dims) if dims.len() >= 2 && dims.iter().all(|&d| d >= 1) => {
                        self.view_dims = dims
                    }
                    _ => return Err(invalid(key, ">= 2 comma-separated positive dimensions")),
                }
            }
            "rho" => {
                self.rho = match parse_f64(value) {
                    Some(v) if (0.0..=0.5).contains(&v) => v,
                    _ => return Err(invalid(key, "[0, 0.5]")),
                }
            }
            "block_separation" => {
                self.block_separation =
                    parse_f64(value).ok_or_else(|| invalid(key, "finite real"))?
            }
            "feature_noise" => {
                self.feature_noise = match parse_f64(value) {
                    Some(v) if v >= 0.0 => v,
                    _ => return Err(invalid(key, "non-negative real")),
                }
            }
            "data_dir" => self.data_dir = PathBuf::from(value),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "embeddings" => {
                self.embeddings = if value == "none" || value.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            "scores" => {
                self.scores = if value == "none" || value.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            other => {
                return Err(invalid(other, "a known configuration key"));
            }
        }
        Ok(())
    }

    /// Cross-field checks after all assignments.
    pub fn validate(&self) -> Result<(), CliError> {
        if ((self.train_frac + self.val_frac + self.test_frac) - 1.0).abs() > 1e-9 {
            return Err(invalid(
                "train_frac/val_frac/test_frac",
                "fractions summing to 1",
            ));
        }
        if self.nodes < 2 * self.blocks {
            return Err(invalid("nodes", "at least 2 * blocks"));
        }
        if self.nodes < self.k {
            return Err(invalid("k", "at most the node count"));
        }
        if let Some(&bad) = self.anomalies.iter().find(|&&t| t >= self.t_steps) {
            return Err(invalid(
                "anomalies",
                &format!("timesteps below t_steps (got {bad})"),
            ));
        }
        match self.threshold_rule {
            ThresholdKind::Quantile => {
                if !(self.threshold_value > 0.0 && self.threshold_value < 1.0) {
                    return Err(invalid("threshold_value", "(0, 1) for the quantile rule"));
                }
            }
            ThresholdKind::Fixed => {
                if !self.threshold_value.is_finite() {
                    return Err(invalid("threshold_value", "finite for the fixed rule"));
                }
            }
        }
        if self.t_steps < self.shingle {
            return Err(invalid("shingle", "at most t_steps"));
        }
        Ok(())
    }

    /// The fully-resolved config as flat text: every key materialized, plus
    /// the derived per-stage seeds as comments. The echo parses back into an
    /// identical config.
    pub fn echo(&self) -> String {
        let sigma = match self.sigma {
            None => "median".to_string(),
            Some(s) => fmt_f64(s),
        };
        let optional_path = |p: &Option<PathBuf>| match p {
            None => "none".to_string(),
            Some(path) => path.display().to_string(),
        };
        let mut out = String::from("# graphwatch resolved configuration\n");
        out.push_str(&format!(
            "# derived stage seeds: cluster={} dgi={} forest={} run_root={}\n",
            derive_seed(self.seed, streams::CLUSTER),
            derive_seed(self.seed, streams::DGI),
            derive_seed(self.seed, streams::FOREST),
            derive_seed(self.seed, streams::RUN),
        ));
        let entries: Vec<(&str, String)> = vec![
            (
                "aggregate",
                match self.aggregate {
                    ScoreAggregate::Mean => "mean".into(),
                    ScoreAggregate::Median => "median".into(),
                },
            ),
            ("anomalies", format_ranges(&self.anomalies)),
            (
                "anomaly_mode",
                match self.anomaly_mode {
                    AnomalyMode::PoutScale => "pout_scale".into(),
                    AnomalyMode::BlockMerge => "block_merge".into(),
                },
            ),
            ("block_separation", fmt_f64(self.block_separation)),
            ("blocks", self.blocks.to_string()),
            ("capacity", self.capacity.to_string()),
            ("data_dir", self.data_dir.display().to_string()),
            ("dgi_epochs", self.dgi_epochs.to_string()),
            ("dgi_lr", fmt_f64(self.dgi_lr)),
            ("embeddings", optional_path(&self.embeddings)),
            ("feature_noise", fmt_f64(self.feature_noise)),
            (
                "fusion_mode",
                match self.fusion_mode {
                    ConsistencyMode::VsFull => "vs_full".into(),
                    ConsistencyMode::Pairwise => "pairwise".into(),
                },
            ),
            ("gnn_hidden", self.gnn_hidden.to_string()),
            ("gnn_kappa", fmt_f64(self.gnn_kappa)),
            ("gnn_max_iter", self.gnn_max_iter.to_string()),
            ("gnn_tol", fmt_f64(self.gnn_tol)),
            ("k", self.k.to_string()),
            ("nodes", self.nodes.to_string()),
            ("out_dir", self.out_dir.display().to_string()),
            ("p_in", fmt_f64(self.p_in)),
            ("p_out", fmt_f64(self.p_out)),
            ("pca_variance", fmt_f64(self.pca_variance)),
            ("pout_scale", fmt_f64(self.pout_scale)),
            ("rho", fmt_f64(self.rho)),
            ("runs", self.runs.to_string()),
            ("scores", optional_path(&self.scores)),
            ("seed", self.seed.to_string()),
            ("shingle", self.shingle.to_string()),
            ("sigma", sigma),
            (
                "spectral_algorithm",
                match self.spectral_algorithm {
                    SpectralAlgorithm::Basic => "basic".into(),
                    SpectralAlgorithm::Njw => "njw".into(),
                    SpectralAlgorithm::Ms => "ms".into(),
                    SpectralAlgorithm::Slh => "slh".into(),
                },
            ),
            ("t_steps", self.t_steps.to_string()),
            ("test_frac", fmt_f64(self.test_frac)),
            (
                "threshold_rule",
                match self.threshold_rule {
                    ThresholdKind::Quantile => "quantile".into(),
                    ThresholdKind::Fixed => "fixed".into(),
                },
            ),
            ("threshold_value", fmt_f64(self.threshold_value)),
            ("train_frac", fmt_f64(self.train_frac)),
            ("trees", self.trees.to_string()),
            ("val_frac", fmt_f64(self.val_frac)),
            (
                "view_dims",
                self.view_dims
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
        ];
        for (key, value) in entries {
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }

    pub fn detection_config(&self) -> DetectionConfig {
        DetectionConfig {
            pca_variance: self.pca_variance,
            sigma: self.sigma,
            k: self.k,
            spectral_algorithm: self.spectral_algorithm,
            fusion_mode: self.fusion_mode,
            dgi_hidden: self.gnn_hidden,
            dgi_epochs: self.dgi_epochs,
            dgi_lr: self.dgi_lr,
            forest_trees: self.trees,
            forest_capacity: self.capacity,
            shingle_size: self.shingle,
            aggregate: self.aggregate,
            split: DatasetSplit {
                train: self.train_frac,
                val: self.val_frac,
                test: self.test_frac,
            },
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            t_steps: self.t_steps,
            nodes: self.nodes,
            blocks: self.blocks,
            p_in: self.p_in,
            p_out: self.p_out,
            anomaly_timesteps: self.anomalies.clone(),
            anomaly_mode: self.anomaly_mode,
            pout_scale: self.pout_scale,
            view_dims: self.view_dims.clone(),
            rho: self.rho,
            block_separation: self.block_separation,
            feature_noise: self.feature_noise,
        }
    }

    pub fn threshold_rule(&self) -> ThresholdRule {
        match self.threshold_rule {
            ThresholdKind::Quantile => ThresholdRule::Quantile(self.threshold_value),
            ThresholdKind::Fixed => ThresholdRule::Fixed(self.threshold_value),
        }
    }
}

/// Apply flat `key = value` text onto a base config. Lines may be empty or
/// `#` comments; anything else must be an assignment.
pub fn apply_config_text(base: &mut RunConfig, text: &str) -> Result<(), CliError> {
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Parse {
                line: idx + 1,
                message: format!("expected 'key = value', got '{line}'"),
            });
        };
        base.set(key.trim(), value.trim())?;
    }
    Ok(())
}

/// Resolve the full configuration: defaults, then the config file (explicit
/// path or the GRAPHWATCH_CONFIG environment variable), then inline
/// `key=value` overrides.
pub fn parse_config(path: Option<&str>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    let resolved = path
        .map(str::to_owned)
        .or_else(|| std::env::var("GRAPHWATCH_CONFIG").ok());
    if let Some(path) = resolved {
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Parse {
            line: 0,
            message: format!("cannot read config '{path}': {e}"),
        })?;
        apply_config_text(&mut config, &text)?;
    }
    for token in overrides {
        let Some((key, value)) = token.split_once('=') else {
            return Err(CliError::Parse {
                line: 0,
                message: format!("override '{token}' is not of the form key=value"),
            });
        };
        config.set(key.trim(), value.trim())?;
    }
    config.validate()?;
    Ok(config)
}
