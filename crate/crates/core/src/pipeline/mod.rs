//! End-to-end orchestration: synthetic data generation, the detection run
//! (fusion stream + temporal stream), evaluation, and artifact I/O.
//!
//! A detection run executes two score paths over the same data:
//!
//! * fusion: PCA per view → full feature space → per-view and full-space
//!   spectral clustering → cross-view consistency scores (one per sample);
//! * temporal: contrastive snapshot embedding trained on the train split →
//!   per-snapshot vectors → shingling → random cut forest scores (one per
//!   timestep).
//!
//! Failures are tagged with the stage they occurred in.

pub mod io;
mod metrics;
mod report;

pub use metrics::{
    accuracy, adjusted_rand_index, auc, average_roc, evaluate, macro_f1, resolve_threshold,
    roc_points, threshold_labels, ClassSet, ThresholdRule,
};
pub use report::{EvalReport, ExperimentReport, RunMetrics};

use crate::error::{Error, Result};
use crate::fusion::{
    build_full_space, consistency_score, membership, ConsistencyMode, ConsistencyScore,
    MembershipMatrix, MembershipSource, ViewFeatureSpace,
};
use crate::gnn::{dgi_embed, dgi_train, DgiModel, Edge, GraphSnapshot, SnapshotEmbedding};
use crate::numerics::{pca_fit, pca_transform, DenseMatrix};
use crate::rng::{derive_seed, Rng};
use crate::rrcf::{shingle, RcForest, ScoreAggregate, ScoreSeries};
use crate::spectral::{
    kmeans, similarity_matrix, spectral_embed, ClusterAssignment, SpectralAlgorithm,
};

/// Stage tags for seed derivation; every stochastic stage consumes its own
/// stream derived from the run seed.
pub mod streams {
    pub const CLUSTER: u64 = 1;
    pub const DGI: u64 = 2;
    pub const FOREST: u64 = 3;
    pub const GRAPH: u64 = 4;
    pub const FEATURES: u64 = 5;
    pub const FLIPS: u64 = 6;
    pub const RUN: u64 = 7;
}

/// Train/validation/test fractions. Only the train fraction drives the
/// pipeline (it selects the snapshots the embedder trains on); the split is
/// validated in full for configuration hygiene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetSplit {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for DatasetSplit {
    fn default() -> Self {
        DatasetSplit {
            train: 0.6,
            val: 0.2,
            test: 0.2,
        }
    }
}

impl DatasetSplit {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("train", self.train),
            ("val", self.val),
            ("test", self.test),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter {
                    name: format!("{name}_frac"),
                    legal: "(0, 1)".into(),
                });
            }
        }
        if ((self.train + self.val + self.test) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "split fractions sum to {}, expected 1",
                self.train + self.val + self.test
            )));
        }
        Ok(())
    }
}

/// Boolean anomaly flags per timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub timestamps: Vec<i64>,
    pub labels: Vec<bool>,
}

/// How anomalous timesteps perturb the generator's block model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnomalyMode {
    /// Multiply the cross-block edge probability by `pout_scale`.
    PoutScale,
    /// All pairs connect with the in-block probability.
    BlockMerge,
}

/// Synthetic multi-source dynamic-graph generator configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub t_steps: usize,
    pub nodes: usize,
    pub blocks: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub anomaly_timesteps: Vec<usize>,
    pub anomaly_mode: AnomalyMode,
    pub pout_scale: f64,
    pub view_dims: Vec<usize>,
    /// Fraction of samples whose block flips in the last view.
    pub rho: f64,
    pub block_separation: f64,
    pub feature_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            t_steps: 100,
            nodes: 30,
            blocks: 2,
            p_in: 0.3,
            p_out: 0.02,
            anomaly_timesteps: (40..=44).chain(70..=74).collect(),
            anomaly_mode: AnomalyMode::PoutScale,
            pout_scale: 10.0,
            view_dims: vec![4, 4],
            rho: 0.1,
            block_separation: 6.0,
            feature_noise: 1.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_steps == 0 {
            return Err(Error::InvalidConfig("t_steps must be >= 1".into()));
        }
        if self.blocks < 2 || self.nodes < 2 * self.blocks {
            return Err(Error::InvalidConfig(format!(
                "need nodes >= 2 * blocks >= 4, got nodes = {}, blocks = {}",
                self.nodes, self.blocks
            )));
        }
        for (name, p) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if let Some(&t) = self.anomaly_timesteps.iter().find(|&&t| t >= self.t_steps) {
            return Err(Error::InvalidConfig(format!(
                "anomaly timestep {t} outside 0..{}",
                self.t_steps
            )));
        }
        if self.view_dims.len() < 2 || self.view_dims.contains(&0) {
            return Err(Error::InvalidConfig(
                "need at least 2 views with positive dimensions".into(),
            ));
        }
        if !(0.0..=0.5).contains(&self.rho) {
            return Err(Error::InvalidConfig(format!(
                "rho = {} outside [0, 0.5]",
                self.rho
            )));
        }
        if !(self.pout_scale > 0.0 && self.pout_scale.is_finite()) {
            return Err(Error::InvalidConfig("pout_scale must be positive".into()));
        }
        if !self.block_separation.is_finite()
            || !(self.feature_noise.is_finite() && self.feature_noise >= 0.0)
        {
            return Err(Error::InvalidConfig(
                "block_separation must be finite and feature_noise non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Everything the generator produces: the snapshot stream, the per-source
/// views, timestep anomaly labels, and per-sample inconsistency labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub snapshots: Vec<GraphSnapshot>,
    pub views: Vec<ViewFeatureSpace>,
    pub timeline: LabeledSeries,
    pub inconsistent_samples: Vec<bool>,
}

/// Generate a synthetic dataset: a two-block (configurable) stochastic
/// block model per timestep, flipped to a perturbed model at anomalous
/// timesteps; per-view node features from per-block Gaussians; a fraction
/// `rho` of samples carry an inconsistent block assignment in the last
/// view.
pub fn generate_synthetic(config: &SynthConfig, seed: u64) -> Result<SyntheticDataset> {
    config.validate()?;
    let n = config.nodes;
    let blocks = config.blocks;
    let block_of: Vec<usize> = (0..n).map(|i| i * blocks / n).collect();

    // Inconsistent samples, planted in the last view.
    let flip_count = (config.rho * n as f64).round() as usize;
    let mut flip_rng = Rng::new(derive_seed(seed, streams::FLIPS));
    let mut flipped = vec![false; n];
    for &idx in flip_rng.permutation(n).iter().take(flip_count) {
        flipped[idx] = true;
    }

    // Per-view features from per-block Gaussian centers.
    let mut feature_rng = Rng::new(derive_seed(seed, streams::FEATURES));
    let last_view = config.view_dims.len() - 1;
    let mut views = Vec::with_capacity(config.view_dims.len());
    for (v, &dim) in config.view_dims.iter().enumerate() {
        let mut x = DenseMatrix::zeros(n, dim);
        for i in 0..n {
            let mut block = block_of[i];
            if v == last_view && flipped[i] {
                block = (block + 1) % blocks;
            }
            let center = block as f64 * config.block_separation;
            for j in 0..dim {
                x.set(i, j, center + config.feature_noise * feature_rng.normal());
            }
        }
        views.push(ViewFeatureSpace {
            view_id: format!("view{v:02}"),
            x,
        });
    }

    // Snapshot node features: the concatenated views.
    let blocks_ref: Vec<&DenseMatrix> = views.iter().map(|v| &v.x).collect();
    let node_features = DenseMatrix::hcat(&blocks_ref)?;

    let anomalous: Vec<bool> = {
        let mut flags = vec![false; config.t_steps];
        for &t in &config.anomaly_timesteps {
            flags[t] = true;
        }
        flags
    };

    let graph_root = derive_seed(seed, streams::GRAPH);
    let mut snapshots = Vec::with_capacity(config.t_steps);
    for (t, &is_anomalous) in anomalous.iter().enumerate() {
        let mut rng = Rng::new(derive_seed(graph_root, t as u64));
        let p_cross = if is_anomalous {
            match config.anomaly_mode {
                AnomalyMode::PoutScale => (config.p_out * config.pout_scale).min(1.0),
                AnomalyMode::BlockMerge => config.p_in,
            }
        } else {
            config.p_out
        };
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let p = if block_of[i] == block_of[j] {
                    config.p_in
                } else {
                    p_cross
                };
                if rng.bernoulli(p) {
                    edges.push(Edge {
                        src: i,
                        dst: j,
                        weight: 1.0,
                    });
                }
            }
        }
        snapshots.push(GraphSnapshot::new(
            t as i64,
            n,
            edges,
            node_features.clone(),
            None,
        )?);
    }

    Ok(SyntheticDataset {
        snapshots,
        views,
        timeline: LabeledSeries {
            timestamps: (0..config.t_steps as i64).collect(),
            labels: anomalous,
        },
        inconsistent_samples: flipped,
    })
}

/// Tunables of a detection run. Defaults mirror the documented stage
/// defaults: correlation PCA at 95% variance, median-bandwidth similarity,
/// two clusters, a 16-unit embedder trained 200 epochs at lr 0.05, and a
/// 40-tree forest of capacity 256 over shingles of width 4.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionConfig {
    pub pca_variance: f64,
    pub sigma: Option<f64>,
    pub k: usize,
    pub spectral_algorithm: SpectralAlgorithm,
    pub fusion_mode: ConsistencyMode,
    pub dgi_hidden: usize,
    pub dgi_epochs: usize,
    pub dgi_lr: f64,
    pub forest_trees: usize,
    pub forest_capacity: usize,
    pub shingle_size: usize,
    pub aggregate: ScoreAggregate,
    pub split: DatasetSplit,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            pca_variance: 0.95,
            sigma: None,
            k: 2,
            spectral_algorithm: SpectralAlgorithm::Basic,
            fusion_mode: ConsistencyMode::VsFull,
            dgi_hidden: 16,
            dgi_epochs: 200,
            dgi_lr: 0.05,
            forest_trees: 40,
            forest_capacity: 256,
            shingle_size: 4,
            aggregate: ScoreAggregate::Mean,
            split: DatasetSplit::default(),
        }
    }
}

/// Both score streams of a detection run.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionOutput {
    pub scores: ScoreSeries,
    pub consistency: ConsistencyScore,
}

fn reduce_views(
    views: &[ViewFeatureSpace],
    config: &DetectionConfig,
) -> Result<Vec<ViewFeatureSpace>> {
    views
        .iter()
        .map(|view| {
            let model = pca_fit(&view.x, config.pca_variance)?;
            let x = pca_transform(&model, &view.x)?;
            Ok(ViewFeatureSpace {
                view_id: view.view_id.clone(),
                x,
            })
        })
        .collect::<Result<_>>()
        .map_err(|e: Error| e.in_stage("pca"))
}

fn cluster_space(
    x: &DenseMatrix,
    config: &DetectionConfig,
    seed: u64,
) -> Result<(ClusterAssignment, DenseMatrix)> {
    let graph = similarity_matrix(x, config.sigma)?;
    let embedding = spectral_embed(&graph, config.k, config.spectral_algorithm)?;
    let assignment = kmeans(&embedding.u, config.k, seed)?;
    Ok((assignment, embedding.u))
}

/// PCA-reduce the views, build the full space, and cluster it.
pub fn cluster_full_space(
    views: &[ViewFeatureSpace],
    config: &DetectionConfig,
    seed: u64,
) -> Result<ClusterAssignment> {
    let reduced = reduce_views(views, config)?;
    let full = build_full_space(&reduced).map_err(|e| e.in_stage("fusion"))?;
    let cluster_seed = derive_seed(seed, streams::CLUSTER);
    let (assignment, _) =
        cluster_space(&full.x, config, cluster_seed).map_err(|e| e.in_stage("spectral"))?;
    Ok(assignment)
}

/// The fusion stream: per-sample cross-view inconsistency scores.
pub fn fuse_scores(
    views: &[ViewFeatureSpace],
    config: &DetectionConfig,
    seed: u64,
) -> Result<ConsistencyScore> {
    let reduced = reduce_views(views, config)?;
    let full = build_full_space(&reduced).map_err(|e| e.in_stage("fusion"))?;

    // One shared clustering seed: identical views then produce identical
    // assignments, keeping the identical-views control at zero score.
    let cluster_seed = derive_seed(seed, streams::CLUSTER);
    let mut view_memberships: Vec<MembershipMatrix> = Vec::with_capacity(reduced.len());
    for view in &reduced {
        let (assignment, embedding) =
            cluster_space(&view.x, config, cluster_seed).map_err(|e| e.in_stage("spectral"))?;
        let mm = membership(
            &assignment,
            &embedding,
            MembershipSource::View(view.view_id.clone()),
        )
        .map_err(|e| e.in_stage("fusion"))?;
        view_memberships.push(mm);
    }
    let (full_assignment, full_embedding) =
        cluster_space(&full.x, config, cluster_seed).map_err(|e| e.in_stage("spectral"))?;
    let full_membership = membership(&full_assignment, &full_embedding, MembershipSource::Full)
        .map_err(|e| e.in_stage("fusion"))?;

    consistency_score(&view_memberships, &full_membership, config.fusion_mode)
        .map_err(|e| e.in_stage("fusion"))
}

/// The embedding stage: train the snapshot embedder on the train split and
/// embed every snapshot.
pub fn embed_series(
    snapshots: &[GraphSnapshot],
    config: &DetectionConfig,
    seed: u64,
) -> Result<(DgiModel, Vec<SnapshotEmbedding>)> {
    if snapshots.is_empty() {
        return Err(Error::EmptyInput("no snapshots to embed".into()).in_stage("dgi"));
    }
    config.split.validate().map_err(|e| e.in_stage("dgi"))?;
    let n_train =
        ((config.split.train * snapshots.len() as f64).floor() as usize).clamp(1, snapshots.len());
    let dgi_seed = derive_seed(seed, streams::DGI);
    let model = dgi_train(
        &snapshots[..n_train],
        config.dgi_hidden,
        config.dgi_epochs,
        config.dgi_lr,
        dgi_seed,
    )
    .map_err(|e| e.in_stage("dgi"))?;
    let embeddings: Vec<SnapshotEmbedding> = snapshots
        .iter()
        .map(|g| dgi_embed(&model, g))
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage("dgi"))?;
    Ok((model, embeddings))
}

/// The forest stage: shingle the embedding stream and score it, keeping the
/// snapshot timestamps on the output axis.
pub fn score_embeddings(
    embeddings: &[SnapshotEmbedding],
    config: &DetectionConfig,
    seed: u64,
) -> Result<ScoreSeries> {
    let shingles = shingle(embeddings, config.shingle_size).map_err(|e| e.in_stage("rrcf"))?;
    let dim = shingles[0].len();
    let forest_seed = derive_seed(seed, streams::FOREST);
    let mut forest = RcForest::new(
        config.forest_trees,
        dim,
        config.forest_capacity,
        config.shingle_size,
        config.aggregate,
        forest_seed,
    )
    .map_err(|e| e.in_stage("rrcf"))?;
    let mut series = forest
        .score_series(&shingles)
        .map_err(|e| e.in_stage("rrcf"))?;
    series.timestamps = embeddings.iter().map(|e| e.t).collect();
    Ok(series)
}

/// A full detection run: the fusion stream and the temporal stream over the
/// same dataset, all randomness derived from one seed.
pub fn run_detection(
    snapshots: &[GraphSnapshot],
    views: &[ViewFeatureSpace],
    config: &DetectionConfig,
    seed: u64,
) -> Result<DetectionOutput> {
    if let (Some(snapshot), Some(view)) = (snapshots.first(), views.first()) {
        if snapshot.node_count != view.x.rows() {
            return Err(Error::SampleCountMismatch {
                expected: snapshot.node_count,
                actual: view.x.rows(),
            }
            .in_stage("fusion"));
        }
    }
    let consistency = fuse_scores(views, config, seed)?;
    let (_, embeddings) = embed_series(snapshots, config, seed)?;
    let scores = score_embeddings(&embeddings, config, seed)?;
    Ok(DetectionOutput {
        scores,
        consistency,
    })
}

/// Run the full experiment `runs` times with derived seeds (fresh data and
/// fresh model randomness per run), evaluating the temporal stream against
/// timestep labels and the fusion stream against sample labels.
pub fn run_experiment(
    synth: &SynthConfig,
    detection: &DetectionConfig,
    rule: &ThresholdRule,
    root_seed: u64,
    runs: usize,
) -> Result<ExperimentReport> {
    if runs == 0 {
        return Err(Error::InvalidParameter {
            name: "runs".into(),
            legal: ">= 1".into(),
        });
    }
    let run_root = derive_seed(root_seed, streams::RUN);
    let mut temporal_pairs = Vec::with_capacity(runs);
    let mut sample_pairs = Vec::with_capacity(runs);
    for run in 0..runs {
        let run_seed = derive_seed(run_root, run as u64);
        let data = generate_synthetic(synth, run_seed)?;
        let output = run_detection(&data.snapshots, &data.views, detection, run_seed)?;
        temporal_pairs.push((output.scores, data.timeline.clone()));
        sample_pairs.push((
            ScoreSeries {
                timestamps: (0..data.inconsistent_samples.len() as i64).collect(),
                scores: output.consistency.scores.clone(),
            },
            LabeledSeries {
                timestamps: (0..data.inconsistent_samples.len() as i64).collect(),
                labels: data.inconsistent_samples.clone(),
            },
        ));
    }
    Ok(ExperimentReport {
        temporal: evaluate(&temporal_pairs, rule)?,
        samples: evaluate(&sample_pairs, rule)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_synth() -> SynthConfig {
        SynthConfig {
            t_steps: 24,
            nodes: 16,
            anomaly_timesteps: vec![12, 13],
            view_dims: vec![3, 3],
            ..SynthConfig::default()
        }
    }

    fn fast_detection() -> DetectionConfig {
        DetectionConfig {
            dgi_hidden: 6,
            dgi_epochs: 20,
            forest_trees: 8,
            forest_capacity: 64,
            shingle_size: 2,
            ..DetectionConfig::default()
        }
    }

    #[test]
    fn split_validation() {
        assert!(DatasetSplit::default().validate().is_ok());
        assert!(DatasetSplit {
            train: 0.5,
            val: 0.2,
            test: 0.2
        }
        .validate()
        .is_err());
        assert!(DatasetSplit {
            train: 1.2,
            val: -0.1,
            test: -0.1
        }
        .validate()
        .is_err());
    }

    #[test]
    fn synth_config_validation() {
        assert!(SynthConfig::default().validate().is_ok());
        assert!(SynthConfig {
            anomaly_timesteps: vec![999],
            ..small_synth()
        }
        .validate()
        .is_err());
        assert!(SynthConfig {
            view_dims: vec![3],
            ..small_synth()
        }
        .validate()
        .is_err());
        assert!(SynthConfig {
            rho: 0.9,
            ..small_synth()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn generator_label_bookkeeping() {
        let config = small_synth();
        let data = generate_synthetic(&config, 5).unwrap();
        assert_eq!(data.snapshots.len(), 24);
        assert_eq!(data.timeline.labels.iter().filter(|&&l| l).count(), 2);
        assert!(data.timeline.labels[12] && data.timeline.labels[13]);
        let flips = data.inconsistent_samples.iter().filter(|&&f| f).count();
        assert_eq!(flips, (0.1f64 * 16.0).round() as usize);

        let no_anomalies = SynthConfig {
            anomaly_timesteps: vec![],
            ..small_synth()
        };
        let clean = generate_synthetic(&no_anomalies, 5).unwrap();
        assert!(clean.timeline.labels.iter().all(|&l| !l));
    }

    #[test]
    fn generator_deterministic() {
        let config = small_synth();
        let a = generate_synthetic(&config, 9).unwrap();
        let b = generate_synthetic(&config, 9).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&config, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn anomalous_steps_are_denser() {
        let config = SynthConfig {
            t_steps: 30,
            nodes: 20,
            anomaly_timesteps: (10..20).collect(),
            ..SynthConfig::default()
        };
        let data = generate_synthetic(&config, 3).unwrap();
        let mean_edges = |range: std::ops::Range<usize>| {
            range
                .clone()
                .map(|t| data.snapshots[t].edges.len())
                .sum::<usize>() as f64
                / range.len() as f64
        };
        let normal = mean_edges(0..10);
        let anomalous = mean_edges(10..20);
        assert!(
            anomalous > normal * 1.2,
            "anomalous steps not denser: {anomalous} vs {normal}"
        );
    }

    #[test]
    fn identical_views_control_scores_zero() {
        let config = small_synth();
        let data = generate_synthetic(&config, 21).unwrap();
        let duplicated = vec![
            ViewFeatureSpace {
                view_id: "a".into(),
                x: data.views[0].x.clone(),
            },
            ViewFeatureSpace {
                view_id: "b".into(),
                x: data.views[0].x.clone(),
            },
        ];
        let scores = fuse_scores(&duplicated, &fast_detection(), 13).unwrap();
        for &s in &scores.scores {
            assert!(s <= 1e-9, "duplicated views scored {s}");
        }
    }

    #[test]
    fn degenerate_config_still_completes() {
        let config = small_synth();
        let data = generate_synthetic(&config, 2).unwrap();
        let detection = DetectionConfig {
            dgi_epochs: 0,
            forest_trees: 1,
            ..fast_detection()
        };
        let output = run_detection(&data.snapshots, &data.views, &detection, 11).unwrap();
        assert!(output.scores.scores.iter().all(|s| s.is_finite()));
        assert!(output.consistency.scores.iter().all(|s| s.is_finite()));
        assert_eq!(output.scores.len(), 24);
    }

    #[test]
    fn detection_deterministic_given_seed() {
        let config = small_synth();
        let data = generate_synthetic(&config, 7).unwrap();
        let detection = fast_detection();
        let a = run_detection(&data.snapshots, &data.views, &detection, 3).unwrap();
        let b = run_detection(&data.snapshots, &data.views, &detection, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mismatched_views_tagged_with_fusion_stage() {
        let config = small_synth();
        let data = generate_synthetic(&config, 7).unwrap();
        let mut views = data.views.clone();
        views[1] = ViewFeatureSpace {
            view_id: "bad".into(),
            x: DenseMatrix::zeros(7, 3),
        };
        let err = run_detection(&data.snapshots, &data.views[..1], &fast_detection(), 3)
            .err()
            .map(|e| e.stage());
        // a single view fails in the fusion stage too
        assert_eq!(err.flatten(), Some("fusion"));

        let err = run_detection(&data.snapshots, &views, &fast_detection(), 3).unwrap_err();
        assert_eq!(err.stage(), Some("fusion"));
    }

    #[test]
    fn composability_detect_equals_embed_plus_score() {
        let config = small_synth();
        let data = generate_synthetic(&config, 4).unwrap();
        let detection = fast_detection();
        let direct = run_detection(&data.snapshots, &data.views, &detection, 8).unwrap();
        let (_, embeddings) = embed_series(&data.snapshots, &detection, 8).unwrap();
        let chained = score_embeddings(&embeddings, &detection, 8).unwrap();
        assert_eq!(direct.scores, chained);
    }

    #[test]
    fn experiment_produces_sane_report() {
        let report = run_experiment(
            &small_synth(),
            &fast_detection(),
            &ThresholdRule::Quantile(0.9),
            42,
            2,
        )
        .unwrap();
        assert_eq!(report.temporal.runs, 2);
        assert_eq!(report.samples.runs, 2);
        assert!(report.temporal.auc >= 0.0 && report.temporal.auc <= 1.0);
        assert!(report.samples.auc >= 0.0 && report.samples.auc <= 1.0);
        // The averaged AUC is the trapezoid of the averaged curve and
        // matches the mean of the per-run AUCs.
        let mean: f64 = report.temporal.per_run.iter().map(|r| r.auc).sum::<f64>() / 2.0;
        assert!((report.temporal.auc - mean).abs() <= 1e-12);
    }

    #[test]
    fn experiment_report_bytes_deterministic() {
        let run = || {
            run_experiment(
                &small_synth(),
                &fast_detection(),
                &ThresholdRule::Quantile(0.9),
                7,
                2,
            )
            .unwrap()
            .to_json()
        };
        assert_eq!(run(), run());
    }
}
