//! Subcommand implementations. Every run writes the fully-resolved config
//! first, then its artifacts; on failure all files written by this run are
//! removed and a stage-tagged diagnostic goes to stderr.

use std::fs;
use std::path::{Path, PathBuf};

use graphwatch_core::error::{Error, Result};
use graphwatch_core::fusion::ViewFeatureSpace;
use graphwatch_core::gnn::{save_model, GraphSnapshot};
use graphwatch_core::numerics::DenseMatrix;
use graphwatch_core::pipeline::io;
use graphwatch_core::pipeline::{
    cluster_full_space, embed_series, evaluate, fuse_scores, roc_points, run_detection,
    score_embeddings, streams, ExperimentReport, LabeledSeries,
};
use graphwatch_core::rng::derive_seed;
use graphwatch_core::rrcf::ScoreSeries;

use crate::config::RunConfig;

/// Tracks artifacts written by the current run so a failure can remove
/// partial outputs.
pub struct ArtifactSink {
    written: Vec<PathBuf>,
}

impl ArtifactSink {
    pub fn new() -> Self {
        ArtifactSink {
            written: Vec::new(),
        }
    }

    fn track(&mut self, path: &Path) {
        self.written.push(path.to_path_buf());
    }

    fn write_text(&mut self, path: &Path, text: &str) -> Result<()> {
        fs::write(path, text)?;
        self.track(path);
        Ok(())
    }

    pub fn discard_partial(&self) {
        for path in &self.written {
            let _ = fs::remove_file(path);
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Write the resolved config echo as the run's first artifact.
fn emit_echo(sink: &mut ArtifactSink, dir: &Path, config: &RunConfig) -> Result<()> {
    ensure_dir(dir)?;
    sink.write_text(&dir.join("run_config.txt"), &config.echo())
}

fn load_views(config: &RunConfig) -> Result<Vec<ViewFeatureSpace>> {
    io::read_views(&config.data_dir).map_err(|e| e.in_stage("ingest"))
}

fn load_snapshots(config: &RunConfig, views: &[ViewFeatureSpace]) -> Result<Vec<GraphSnapshot>> {
    // Snapshot node features are the concatenated views; a cross-view
    // sample mismatch is a fusion failure.
    let blocks: Vec<&DenseMatrix> = views.iter().map(|v| &v.x).collect();
    let features = DenseMatrix::hcat(&blocks).map_err(|e| e.in_stage("fusion"))?;
    io::read_snapshots(&config.data_dir.join("edges.csv"), &features)
        .map_err(|e| e.in_stage("ingest"))
}

pub fn cmd_gen(config: &RunConfig, sink: &mut ArtifactSink) -> Result<()> {
    emit_echo(sink, &config.data_dir, config)?;
    let data = graphwatch_core::pipeline::generate_synthetic(&config.synth_config(), config.seed)?;
    for view in &data.views {
        let path = config.data_dir.join(format!("{}.csv", view.view_id));
        io::write_view_csv(&path, view)?;
        sink.track(&path);
    }
    let edges = config.data_dir.join("edges.csv");
    io::write_edges_csv(&edges, &data.snapshots)?;
    sink.track(&edges);
    let t_labels = config.data_dir.join("labels_timesteps.csv");
    io::write_timestep_labels(&t_labels, &data.timeline)?;
    sink.track(&t_labels);
    let s_labels = config.data_dir.join("labels_samples.csv");
    io::write_sample_labels(&s_labels, &data.inconsistent_samples)?;
    sink.track(&s_labels);
    Ok(())
}

pub fn cmd_cluster(config: &RunConfig, sink: &mut ArtifactSink) -> Result<()> {
    emit_echo(sink, &config.out_dir, config)?;
    let views = load_views(config)?;
    let assignment = cluster_full_space(&views, &config.detection_config(), config.seed)?;
    let path = config.out_dir.join("cluster_labels.csv");
    io::write_cluster_labels_csv(&path, &assignment.labels)?;
    sink.track(&path);
    Ok(())
}

pub fn cmd_fuse_score(config: &RunConfig, sink: &mut ArtifactSink) -> Result<()> {
    emit_echo(sink, &config.out_dir, config)?;
    let views = load_views(config)?;
    let scores = fuse_scores(&views, &config.detection_config(), config.seed)?;
    let path = config.out_dir.join("consistency.csv");
    io::write_consistency_csv(&path, &scores)?;
    sink.track(&path);
    Ok(())
}

pub fn cmd_embed(config: &RunConfig, sink: &mut ArtifactSink) -> Result<()> {
    emit_echo(sink, &config.out_dir, config)?;
    let views = load_views(config)?;
    let snapshots = load_snapshots(config, &views)?;
    let (model, embeddings) = embed_series(&snapshots, &config.detection_config(), config.seed)?;
    let model_path = config.out_dir.join("dgi_model.txt");
    save_model(&model, &model_path)?;
    sink.track(&model_path);
    let path = config.out_dir.join("embeddings.csv");
    io::write_embeddings_csv(&path, &embeddings)?;
    sink.track(&path);
    Ok(())
}

pub fn cmd_detect(config: &RunConfig, sink: &mut ArtifactSink) -> Result<()> {
    emit_echo(sink, &config.out_dir, config)?;
    let detection = config.detection_config();
    if let Some(embeddings_path) = &config.embeddings {
        // Temporal stream over precomputed embeddings only.
        let embeddings =
            io::read_embeddings_csv(embeddings_path).map_err(|e| e.in_stage("ingest"))?;
        let scores = score_embeddings(&embeddings, &detection, config.seed)?;
        let path = config.out_dir.join("scores.csv");
        io::write_scores_csv(&path, &scores)?;
        sink.track(&path);
        return Ok(());
    }
    let views = load_views(config)?;
    let snapshots = load_snapshots(config, &views)?;
    let output = run_detection(&snapshots, &views, &detection, config.seed)?;
    let scores_path = config.out_dir.join("scores.csv");
    io::write_scores_csv(&scores_path, &output.scores)?;
    sink.track(&scores_path);
    let consistency_path = config.out_dir.join("consistency.csv");
    io::write_consistency_csv(&consistency_path, &output.consistency)?;
    sink.track(&consistency_path);
    Ok(())
}

pub fn cmd_eval(config: &RunConfig, sink: &mut ArtifactSink) -> Result<()> {
    emit_echo(sink, &config.out_dir, config)?;
    let views = load_views(config)?;
    let snapshots = load_snapshots(config, &views)?;
    let timeline = io::read_timestep_labels(&config.data_dir.join("labels_timesteps.csv"))
        .map_err(|e| e.in_stage("ingest"))?;
    let sample_labels = io::read_sample_labels(&config.data_dir.join("labels_samples.csv"))
        .map_err(|e| e.in_stage("ingest"))?;

    // Repeat the experiment over the same dataset with per-run model seeds
    // and average the metrics.
    let detection = config.detection_config();
    let run_root = derive_seed(config.seed, streams::RUN);
    let mut temporal_pairs = Vec::with_capacity(config.runs);
    let mut sample_pairs = Vec::with_capacity(config.runs);
    for run in 0..config.runs {
        let run_seed = derive_seed(run_root, run as u64);
        let output = run_detection(&snapshots, &views, &detection, run_seed)?;
        temporal_pairs.push((output.scores, timeline.clone()));
        let m = sample_labels.len() as i64;
        sample_pairs.push((
            ScoreSeries {
                timestamps: (0..m).collect(),
                scores: output.consistency.scores,
            },
            LabeledSeries {
                timestamps: (0..m).collect(),
                labels: sample_labels.clone(),
            },
        ));
    }
    let rule = config.threshold_rule();
    let report = ExperimentReport {
        temporal: evaluate(&temporal_pairs, &rule).map_err(|e| e.in_stage("metrics"))?,
        samples: evaluate(&sample_pairs, &rule).map_err(|e| e.in_stage("metrics"))?,
    };
    let path = config.out_dir.join("report.json");
    sink.write_text(&path, &report.to_json())?;
    Ok(())
}

pub fn cmd_roc(config: &RunConfig, sink: &mut ArtifactSink) -> Result<()> {
    emit_echo(sink, &config.out_dir, config)?;
    let scores_path = config
        .scores
        .clone()
        .unwrap_or_else(|| config.out_dir.join("scores.csv"));
    let scores = io::read_scores_csv(&scores_path).map_err(|e| e.in_stage("ingest"))?;
    let timeline = io::read_timestep_labels(&config.data_dir.join("labels_timesteps.csv"))
        .map_err(|e| e.in_stage("ingest"))?;
    if scores.scores.len() != timeline.labels.len() {
        return Err(Error::LengthMismatch {
            left: scores.scores.len(),
            right: timeline.labels.len(),
        }
        .in_stage("metrics"));
    }
    let points = roc_points(&scores.scores, &timeline.labels).map_err(|e| e.in_stage("metrics"))?;
    let path = config.out_dir.join("roc.csv");
    io::write_roc_csv(&path, &points)?;
    sink.track(&path);
    Ok(())
}
