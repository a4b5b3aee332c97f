//! Python bindings for the graphwatch toolkit.
//!
//! Exposes the main operations — synthetic data generation, spectral
//! clustering, cross-view consistency scoring, snapshot embedding, random
//! cut forest scoring, and the evaluation metrics — as plain functions over
//! Python lists, plus a `DgiModel` class wrapping the trainable snapshot
//! embedder.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use graphwatch_core::error::Error;
use graphwatch_core::fusion::{ConsistencyMode, ViewFeatureSpace};
use graphwatch_core::gnn::{
    dgi_embed, dgi_train, load_model, propagate, readout, save_model, Edge, GnnParams,
    GraphSnapshot, ReadoutKind, SnapshotEmbedding, DEFAULT_PROPAGATE_MAX_ITER,
    DEFAULT_PROPAGATE_TOL,
};
use graphwatch_core::numerics::DenseMatrix;
use graphwatch_core::pipeline::{
    self, fuse_scores, generate_synthetic, run_detection, DatasetSplit, DetectionConfig,
    SynthConfig,
};
use graphwatch_core::rrcf::{RcForest, ScoreAggregate};
use graphwatch_core::spectral::{self, SpectralAlgorithm};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(rows).map_err(to_py_err)
}

fn parse_algorithm(name: &str) -> PyResult<SpectralAlgorithm> {
    match name {
        "basic" => Ok(SpectralAlgorithm::Basic),
        "njw" => Ok(SpectralAlgorithm::Njw),
        "ms" => Ok(SpectralAlgorithm::Ms),
        "slh" => Ok(SpectralAlgorithm::Slh),
        other => Err(PyValueError::new_err(format!(
            "unknown spectral algorithm '{other}' (expected basic|njw|ms|slh)"
        ))),
    }
}

fn parse_mode(name: &str) -> PyResult<ConsistencyMode> {
    match name {
        "vs_full" => Ok(ConsistencyMode::VsFull),
        "pairwise" => Ok(ConsistencyMode::Pairwise),
        other => Err(PyValueError::new_err(format!(
            "unknown fusion mode '{other}' (expected vs_full|pairwise)"
        ))),
    }
}

fn views_from_py(views: Vec<Vec<Vec<f64>>>) -> PyResult<Vec<ViewFeatureSpace>> {
    views
        .into_iter()
        .enumerate()
        .map(|(v, rows)| {
            Ok(ViewFeatureSpace {
                view_id: format!("view{v:02}"),
                x: matrix_from_rows(&rows)?,
            })
        })
        .collect()
}

/// Build the snapshot stream from `(t, src, dst, weight)` edges and node
/// features shared across timesteps. The axis is `0..=max_t`.
fn snapshots_from_py(
    edges: &[(i64, usize, usize, f64)],
    features: &DenseMatrix,
) -> PyResult<Vec<GraphSnapshot>> {
    if edges.is_empty() {
        return Err(PyValueError::new_err("edge list is empty"));
    }
    let max_t = edges.iter().map(|e| e.0).max().unwrap();
    if edges.iter().any(|e| e.0 < 0) {
        return Err(PyValueError::new_err("negative timestep in edge list"));
    }
    let mut per_step: Vec<Vec<Edge>> = vec![Vec::new(); (max_t + 1) as usize];
    for &(t, src, dst, weight) in edges {
        per_step[t as usize].push(Edge { src, dst, weight });
    }
    per_step
        .into_iter()
        .enumerate()
        .map(|(t, step_edges)| {
            GraphSnapshot::new(
                t as i64,
                features.rows(),
                step_edges,
                features.clone(),
                None,
            )
            .map_err(to_py_err)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn detection_config(
    k: usize,
    algorithm: &str,
    sigma: Option<f64>,
    mode: &str,
    pca_variance: f64,
    hidden: usize,
    epochs: usize,
    lr: f64,
    trees: usize,
    capacity: usize,
    shingle_size: usize,
    train_frac: f64,
) -> PyResult<DetectionConfig> {
    let rest = (1.0 - train_frac) / 2.0;
    Ok(DetectionConfig {
        pca_variance,
        sigma,
        k,
        spectral_algorithm: parse_algorithm(algorithm)?,
        fusion_mode: parse_mode(mode)?,
        dgi_hidden: hidden,
        dgi_epochs: epochs,
        dgi_lr: lr,
        forest_trees: trees,
        forest_capacity: capacity,
        shingle_size,
        aggregate: ScoreAggregate::Mean,
        split: DatasetSplit {
            train: train_frac,
            val: rest,
            test: rest,
        },
    })
}

/// Spectral clustering of raw feature rows; returns one label per row.
#[pyfunction]
#[pyo3(signature = (x, k, algorithm="basic", sigma=None, seed=42))]
fn spectral_cluster(
    x: Vec<Vec<f64>>,
    k: usize,
    algorithm: &str,
    sigma: Option<f64>,
    seed: u64,
) -> PyResult<Vec<usize>> {
    let matrix = matrix_from_rows(&x)?;
    let assignment =
        spectral::spectral_cluster(&matrix, k, parse_algorithm(algorithm)?, sigma, seed)
            .map_err(to_py_err)?;
    Ok(assignment.labels)
}

/// Per-sample cross-view inconsistency scores over >= 2 views.
#[pyfunction]
#[pyo3(signature = (views, k=2, algorithm="basic", sigma=None, mode="vs_full", pca_variance=0.95, seed=42))]
fn consistency_scores(
    views: Vec<Vec<Vec<f64>>>,
    k: usize,
    algorithm: &str,
    sigma: Option<f64>,
    mode: &str,
    pca_variance: f64,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let views = views_from_py(views)?;
    let config = detection_config(
        k,
        algorithm,
        sigma,
        mode,
        pca_variance,
        16,
        0,
        0.05,
        1,
        64,
        1,
        0.6,
    )?;
    Ok(fuse_scores(&views, &config, seed)
        .map_err(to_py_err)?
        .scores)
}

/// Generate the synthetic multi-source benchmark. Returns a dict with
/// `edges`, `views`, `timestep_labels`, and `sample_labels`.
#[pyfunction]
#[pyo3(signature = (t_steps=100, nodes=30, anomalies=None, rho=0.1, view_dims=None, p_in=0.3, p_out=0.02, pout_scale=10.0, seed=42))]
#[allow(clippy::too_many_arguments)]
fn synthetic_dataset(
    py: Python<'_>,
    t_steps: usize,
    nodes: usize,
    anomalies: Option<Vec<usize>>,
    rho: f64,
    view_dims: Option<Vec<usize>>,
    p_in: f64,
    p_out: f64,
    pout_scale: f64,
    seed: u64,
) -> PyResult<Py<PyDict>> {
    let config = SynthConfig {
        t_steps,
        nodes,
        anomaly_timesteps: anomalies.unwrap_or_else(|| (40..=44).chain(70..=74).collect()),
        rho,
        view_dims: view_dims.unwrap_or_else(|| vec![4, 4]),
        p_in,
        p_out,
        pout_scale,
        ..SynthConfig::default()
    };
    let data = generate_synthetic(&config, seed).map_err(to_py_err)?;
    let edges: Vec<(i64, usize, usize, f64)> = data
        .snapshots
        .iter()
        .flat_map(|s| s.edges.iter().map(|e| (s.t, e.src, e.dst, e.weight)))
        .collect();
    let views: Vec<Vec<Vec<f64>>> = data
        .views
        .iter()
        .map(|v| (0..v.x.rows()).map(|i| v.x.row(i).to_vec()).collect())
        .collect();
    let dict = PyDict::new(py);
    dict.set_item("edges", edges)?;
    dict.set_item("views", views)?;
    dict.set_item("timestep_labels", data.timeline.labels)?;
    dict.set_item("sample_labels", data.inconsistent_samples)?;
    Ok(dict.into())
}

/// Full detection run. Returns `(temporal_scores, consistency_scores)`.
#[pyfunction]
#[pyo3(signature = (edges, views, k=2, algorithm="basic", sigma=None, mode="vs_full", pca_variance=0.95, hidden=16, epochs=200, lr=0.05, trees=40, capacity=256, shingle=4, train_frac=0.6, seed=42))]
#[allow(clippy::too_many_arguments)]
fn detect(
    edges: Vec<(i64, usize, usize, f64)>,
    views: Vec<Vec<Vec<f64>>>,
    k: usize,
    algorithm: &str,
    sigma: Option<f64>,
    mode: &str,
    pca_variance: f64,
    hidden: usize,
    epochs: usize,
    lr: f64,
    trees: usize,
    capacity: usize,
    shingle: usize,
    train_frac: f64,
    seed: u64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let views = views_from_py(views)?;
    let blocks: Vec<&DenseMatrix> = views.iter().map(|v| &v.x).collect();
    let features = DenseMatrix::hcat(&blocks).map_err(to_py_err)?;
    let snapshots = snapshots_from_py(&edges, &features)?;
    let config = detection_config(
        k,
        algorithm,
        sigma,
        mode,
        pca_variance,
        hidden,
        epochs,
        lr,
        trees,
        capacity,
        shingle,
        train_frac,
    )?;
    let output = run_detection(&snapshots, &views, &config, seed).map_err(to_py_err)?;
    Ok((output.scores.scores, output.consistency.scores))
}

/// Stream a vector series through a random cut forest; returns one CoDisp
/// score per input vector (the first `shingle - 1` are warm-up zeros).
#[pyfunction]
#[pyo3(signature = (points, trees=40, capacity=256, shingle=1, seed=42))]
fn rrcf_scores(
    points: Vec<Vec<f64>>,
    trees: usize,
    capacity: usize,
    shingle: usize,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let series: Vec<SnapshotEmbedding> = points
        .into_iter()
        .enumerate()
        .map(|(t, z)| SnapshotEmbedding { t: t as i64, z })
        .collect();
    let shingles = graphwatch_core::rrcf::shingle(&series, shingle).map_err(to_py_err)?;
    let dim = shingles[0].len();
    let mut forest = RcForest::new(trees, dim, capacity, shingle, ScoreAggregate::Mean, seed)
        .map_err(to_py_err)?;
    Ok(forest.score_series(&shingles).map_err(to_py_err)?.scores)
}

/// Fixed-point message passing over one graph: iterate the contraction
/// update from zero states and aggregate the converged node states with a
/// permutation-invariant readout. Parameters are randomly initialized under
/// the contraction constraint (`kappa` < 1) for the given seed.
#[pyfunction]
#[pyo3(signature = (edges, features, hidden=8, kappa=0.9, readout_kind="mean", seed=42))]
fn fixed_point_readout(
    edges: Vec<(usize, usize, f64)>,
    features: Vec<Vec<f64>>,
    hidden: usize,
    kappa: f64,
    readout_kind: &str,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let kind = match readout_kind {
        "mean" => ReadoutKind::Mean,
        "sum" => ReadoutKind::Sum,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown readout '{other}' (expected mean|sum)"
            )))
        }
    };
    let features = matrix_from_rows(&features)?;
    let edges: Vec<Edge> = edges
        .into_iter()
        .map(|(src, dst, weight)| Edge { src, dst, weight })
        .collect();
    let g = GraphSnapshot::new(0, features.rows(), edges, features, None).map_err(to_py_err)?;
    let params = GnnParams::random(
        g.feature_dim(),
        hidden,
        g.edge_feature_dim(),
        1,
        g.max_degree(),
        kappa,
        seed,
    )
    .map_err(to_py_err)?;
    let states = propagate(
        &g,
        &params,
        DEFAULT_PROPAGATE_TOL,
        DEFAULT_PROPAGATE_MAX_ITER,
    )
    .map_err(to_py_err)?;
    readout(&states, kind).map_err(to_py_err)
}

/// ROC curve points (fpr, tpr) for scores against boolean labels.
#[pyfunction]
fn roc_curve(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<Vec<(f64, f64)>> {
    pipeline::roc_points(&scores, &labels).map_err(to_py_err)
}

/// Area under the ROC curve.
#[pyfunction]
fn auc_score(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    let points = pipeline::roc_points(&scores, &labels).map_err(to_py_err)?;
    pipeline::auc(&points).map_err(to_py_err)
}

/// Fraction of exact label matches.
#[pyfunction]
fn accuracy_score(pred: Vec<usize>, truth: Vec<usize>) -> PyResult<f64> {
    pipeline::accuracy(&pred, &truth).map_err(to_py_err)
}

/// Unweighted mean of per-class F1 over the classes present in `truth`.
#[pyfunction]
fn macro_f1_score(pred: Vec<usize>, truth: Vec<usize>) -> PyResult<f64> {
    pipeline::macro_f1(&pred, &truth, &pipeline::ClassSet::FromTruth).map_err(to_py_err)
}

/// Chance-corrected agreement between two clusterings.
#[pyfunction]
fn adjusted_rand_index(a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
    pipeline::adjusted_rand_index(&a, &b).map_err(to_py_err)
}

/// The trainable snapshot embedder: a one-layer graph encoder with a
/// contrastive discriminator, trained unsupervised on a snapshot stream.
#[pyclass]
struct DgiModel {
    inner: graphwatch_core::gnn::DgiModel,
}

#[pymethods]
impl DgiModel {
    /// Train on `(t, src, dst, weight)` edges with shared node features.
    #[staticmethod]
    #[pyo3(signature = (edges, features, hidden=16, epochs=200, lr=0.05, seed=42))]
    fn train(
        edges: Vec<(i64, usize, usize, f64)>,
        features: Vec<Vec<f64>>,
        hidden: usize,
        epochs: usize,
        lr: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let features = matrix_from_rows(&features)?;
        let snapshots = snapshots_from_py(&edges, &features)?;
        let inner = dgi_train(&snapshots, hidden, epochs, lr, seed).map_err(to_py_err)?;
        Ok(DgiModel { inner })
    }

    /// Embed one graph given `(src, dst, weight)` edges and node features.
    fn embed(
        &self,
        edges: Vec<(usize, usize, f64)>,
        features: Vec<Vec<f64>>,
    ) -> PyResult<Vec<f64>> {
        let features = matrix_from_rows(&features)?;
        let edges: Vec<Edge> = edges
            .into_iter()
            .map(|(src, dst, weight)| Edge { src, dst, weight })
            .collect();
        let snapshot =
            GraphSnapshot::new(0, features.rows(), edges, features, None).map_err(to_py_err)?;
        Ok(dgi_embed(&self.inner, &snapshot).map_err(to_py_err)?.z)
    }

    /// Embed a whole `(t, src, dst, weight)` stream; one vector per step.
    fn embed_series(
        &self,
        edges: Vec<(i64, usize, usize, f64)>,
        features: Vec<Vec<f64>>,
    ) -> PyResult<Vec<Vec<f64>>> {
        let features = matrix_from_rows(&features)?;
        let snapshots = snapshots_from_py(&edges, &features)?;
        snapshots
            .iter()
            .map(|g| Ok(dgi_embed(&self.inner, g).map_err(to_py_err)?.z))
            .collect()
    }

    #[getter]
    fn loss_curve(&self) -> Vec<f64> {
        self.inner.loss_curve.clone()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_model(&self.inner, &path).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(DgiModel {
            inner: load_model(&path).map_err(to_py_err)?,
        })
    }
}

#[pymodule]
fn graphwatch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(spectral_cluster, m)?)?;
    m.add_function(wrap_pyfunction!(consistency_scores, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(rrcf_scores, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point_readout, m)?)?;
    m.add_function(wrap_pyfunction!(roc_curve, m)?)?;
    m.add_function(wrap_pyfunction!(auc_score, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy_score, m)?)?;
    m.add_function(wrap_pyfunction!(macro_f1_score, m)?)?;
    m.add_function(wrap_pyfunction!(adjusted_rand_index, m)?)?;
    m.add_class::<DgiModel>()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_and_mode_parsing() {
        assert!(parse_algorithm("njw").is_ok());
        assert!(parse_algorithm("nope").is_err());
        assert!(parse_mode("pairwise").is_ok());
        assert!(parse_mode("nope").is_err());
    }

    #[test]
    fn snapshot_assembly_from_edge_tuples() {
        let features = DenseMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let snapshots = snapshots_from_py(&[(0, 0, 1, 1.0), (2, 1, 2, 0.5)], &features).unwrap();
        assert_eq!(snapshots.len(), 3);
        assert_eq!(snapshots[0].edges.len(), 1);
        assert_eq!(snapshots[1].edges.len(), 0);
        assert_eq!(snapshots[2].edges.len(), 1);
    }
}
