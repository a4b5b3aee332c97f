//! Fixed-point message passing over attributed graph snapshots.
//!
//! Node states follow the recurrence
//! `h_n = tanh(A x_n + B sum_ne h_u + C sum_ne x_u + E sum_co x_e + b)`,
//! iterated synchronously from zero until the update is a contraction fixed
//! point. Contraction is enforced by rescaling the recurrent map `B` so that
//! its infinity norm times the declared maximum degree stays below a factor
//! strictly less than one.

mod dgi;

pub use dgi::{
    dgi_embed, dgi_gradients, dgi_loss, dgi_train, discriminator_scores, load_model,
    model_from_text, model_to_text, normalized_adjacency, prepare_snapshot, save_model, DgiModel,
    PreparedSnapshot, SnapshotEmbedding,
};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;
use crate::rng::Rng;

/// Undirected weighted edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// A timestamped attributed graph.
///
/// Edges are undirected, self-loops are rejected on input (they are added
/// internally where an algorithm needs them), and node features are an
/// `n x d` block. Edge features are optional; when absent, the edge weight
/// acts as the sole edge feature.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSnapshot {
    pub t: i64,
    pub node_count: usize,
    pub edges: Vec<Edge>,
    pub node_features: DenseMatrix,
    pub edge_features: Option<DenseMatrix>,
}

impl GraphSnapshot {
    pub fn new(
        t: i64,
        node_count: usize,
        edges: Vec<Edge>,
        node_features: DenseMatrix,
        edge_features: Option<DenseMatrix>,
    ) -> Result<Self> {
        if node_features.rows() != node_count {
            return Err(Error::DimensionMismatch(format!(
                "{} feature rows for {} nodes",
                node_features.rows(),
                node_count
            )));
        }
        for (idx, e) in edges.iter().enumerate() {
            if e.src >= node_count || e.dst >= node_count {
                return Err(Error::DimensionMismatch(format!(
                    "edge {idx} ({}, {}) out of range for {node_count} nodes",
                    e.src, e.dst
                )));
            }
            if e.src == e.dst {
                return Err(Error::InvalidParameter {
                    name: "edge".into(),
                    legal: format!("no self-loops (edge {idx} is ({}, {}))", e.src, e.dst),
                });
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "edge weight".into(),
                    legal: format!("finite non-negative (edge {idx} has {})", e.weight),
                });
            }
        }
        if let Some(ef) = &edge_features {
            if ef.rows() != edges.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} edge-feature rows for {} edges",
                    ef.rows(),
                    edges.len()
                )));
            }
        }
        Ok(GraphSnapshot {
            t,
            node_count,
            edges,
            node_features,
            edge_features,
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.node_features.cols()
    }

    pub fn edge_feature_dim(&self) -> usize {
        self.edge_features.as_ref().map_or(1, |ef| ef.cols())
    }

    /// Feature vector of edge `idx`; the weight when no explicit features
    /// were provided.
    pub fn edge_feature(&self, idx: usize) -> Vec<f64> {
        match &self.edge_features {
            Some(ef) => ef.row(idx).to_vec(),
            None => vec![self.edges[idx].weight],
        }
    }

    /// Incident edge indices per node.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.node_count];
        for (idx, e) in self.edges.iter().enumerate() {
            inc[e.src].push(idx);
            inc[e.dst].push(idx);
        }
        inc
    }

    pub fn max_degree(&self) -> usize {
        self.incidence().iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Parameters of the fixed-point update and the node output map.
///
/// `recurrent` (the map applied to the neighbor-state sum) is rescaled so
/// `||B||_inf * max_degree <= kappa < 1`, which makes the update a
/// contraction in the infinity norm and guarantees convergence on any graph
/// whose degree stays within `max_degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnParams {
    /// A: own-feature map, h x d.
    pub input: DenseMatrix,
    /// B: neighbor-state map, h x h.
    pub recurrent: DenseMatrix,
    /// C: neighbor-feature map, h x d.
    pub neighbor_input: DenseMatrix,
    /// E: edge-feature map, h x d_e.
    pub edge_input: DenseMatrix,
    /// b: bias, length h.
    pub bias: Vec<f64>,
    /// Output map applied to [h_n ; x_n], c x (h + d).
    pub output: DenseMatrix,
    pub kappa: f64,
    pub max_degree: usize,
}

impl GnnParams {
    /// Random parameters with the contraction constraint already enforced.
    pub fn random(
        feature_dim: usize,
        hidden_dim: usize,
        edge_feature_dim: usize,
        output_dim: usize,
        max_degree: usize,
        kappa: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::InvalidParameter {
                name: "kappa".into(),
                legal: "(0, 1)".into(),
            });
        }
        let mut rng = Rng::new(seed);
        let mut init = |rows: usize, cols: usize| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            let data: Vec<f64> = (0..rows * cols)
                .map(|_| rng.uniform(-limit, limit))
                .collect();
            DenseMatrix::from_vec(rows, cols, data)
        };
        let input = init(hidden_dim, feature_dim)?;
        let recurrent = init(hidden_dim, hidden_dim)?;
        let neighbor_input = init(hidden_dim, feature_dim)?;
        let edge_input = init(hidden_dim, edge_feature_dim)?;
        let output = init(output_dim, hidden_dim + feature_dim)?;
        let bias: Vec<f64> = (0..hidden_dim).map(|_| rng.uniform(-0.1, 0.1)).collect();
        let mut params = GnnParams {
            input,
            recurrent,
            neighbor_input,
            edge_input,
            bias,
            output,
            kappa,
            max_degree,
        };
        params.enforce_contraction();
        Ok(params)
    }

    pub fn hidden_dim(&self) -> usize {
        self.bias.len()
    }

    /// `||B||_inf * max_degree`, the contraction modulus bound.
    pub fn contraction_bound(&self) -> f64 {
        let inf_norm = (0..self.recurrent.rows())
            .map(|i| self.recurrent.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        inf_norm * self.max_degree as f64
    }

    /// Rescale the recurrent map so the contraction bound is at most kappa.
    pub fn enforce_contraction(&mut self) {
        let bound = self.contraction_bound();
        if bound > self.kappa && bound > 0.0 {
            let scale = self.kappa / bound;
            for i in 0..self.recurrent.rows() {
                for value in self.recurrent.row_mut(i) {
                    *value *= scale;
                }
            }
        }
    }
}

/// Converged node states.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStates {
    pub h: DenseMatrix,
    pub iterations_used: usize,
    pub residual: f64,
}

pub const DEFAULT_PROPAGATE_TOL: f64 = 1e-6;
pub const DEFAULT_PROPAGATE_MAX_ITER: usize = 200;

/// Iterate the state update synchronously from H = 0 until the largest
/// entry change drops to `tol`, or fail with `NoConvergence` after
/// `max_iter` sweeps (which can only happen if the contraction guard was
/// violated externally).
pub fn propagate(
    g: &GraphSnapshot,
    params: &GnnParams,
    tol: f64,
    max_iter: usize,
) -> Result<NodeStates> {
    let n = g.node_count;
    let h_dim = params.hidden_dim();
    let d = g.feature_dim();
    if params.input.cols() != d || params.neighbor_input.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "params expect {} node features, snapshot has {}",
            params.input.cols(),
            d
        )));
    }
    if params.edge_input.cols() != g.edge_feature_dim() {
        return Err(Error::DimensionMismatch(format!(
            "params expect {} edge features, snapshot has {}",
            params.edge_input.cols(),
            g.edge_feature_dim()
        )));
    }

    let incidence = g.incidence();

    // The feature-driven part of the update is constant across iterations.
    let mut base = DenseMatrix::zeros(n, h_dim);
    for node in 0..n {
        let own = params.input.matvec(g.node_features.row(node))?;
        let mut neighbor_x = vec![0.0; d];
        let mut edge_x = vec![0.0; g.edge_feature_dim()];
        for &edge_idx in &incidence[node] {
            let e = &g.edges[edge_idx];
            let other = if e.src == node { e.dst } else { e.src };
            for (acc, v) in neighbor_x.iter_mut().zip(g.node_features.row(other)) {
                *acc += v;
            }
            for (acc, v) in edge_x.iter_mut().zip(g.edge_feature(edge_idx)) {
                *acc += v;
            }
        }
        let neighbor_term = params.neighbor_input.matvec(&neighbor_x)?;
        let edge_term = params.edge_input.matvec(&edge_x)?;
        for k in 0..h_dim {
            base.set(
                node,
                k,
                own[k] + neighbor_term[k] + edge_term[k] + params.bias[k],
            );
        }
    }

    let mut h = DenseMatrix::zeros(n, h_dim);
    let mut iterations_used = 0;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let mut next = DenseMatrix::zeros(n, h_dim);
        for node in 0..n {
            let mut neighbor_h = vec![0.0; h_dim];
            for &edge_idx in &incidence[node] {
                let e = &g.edges[edge_idx];
                let other = if e.src == node { e.dst } else { e.src };
                for (acc, v) in neighbor_h.iter_mut().zip(h.row(other)) {
                    *acc += v;
                }
            }
            let recurrent_term = params.recurrent.matvec(&neighbor_h)?;
            for k in 0..h_dim {
                next.set(node, k, (base.get(node, k) + recurrent_term[k]).tanh());
            }
        }
        residual = h
            .data()
            .iter()
            .zip(next.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        h = next;
        iterations_used += 1;
        if residual <= tol {
            return Ok(NodeStates {
                h,
                iterations_used,
                residual,
            });
        }
    }
    Err(Error::NoConvergence(format!(
        "propagate residual {residual:e} after {iterations_used} iterations (tol {tol:e})"
    )))
}

/// Node output map: `o_n = G_out [h_n ; x_n]`, an n x c logits matrix.
pub fn node_output(
    states: &NodeStates,
    g: &GraphSnapshot,
    params: &GnnParams,
) -> Result<DenseMatrix> {
    let n = g.node_count;
    let h_dim = states.h.cols();
    let d = g.feature_dim();
    if params.output.cols() != h_dim + d {
        return Err(Error::DimensionMismatch(format!(
            "output map expects {} inputs, states+features give {}",
            params.output.cols(),
            h_dim + d
        )));
    }
    if states.h.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} state rows for {} nodes",
            states.h.rows(),
            n
        )));
    }
    let c = params.output.rows();
    let mut out = DenseMatrix::zeros(n, c);
    let mut concat = vec![0.0; h_dim + d];
    for node in 0..n {
        concat[..h_dim].copy_from_slice(states.h.row(node));
        concat[h_dim..].copy_from_slice(g.node_features.row(node));
        let o = params.output.matvec(&concat)?;
        out.row_mut(node).copy_from_slice(&o);
    }
    Ok(out)
}

/// Permutation-invariant readout over node states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutKind {
    Mean,
    Sum,
}

pub fn readout(states: &NodeStates, kind: ReadoutKind) -> Result<Vec<f64>> {
    let n = states.h.rows();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let h_dim = states.h.cols();
    let mut out = vec![0.0; h_dim];
    for i in 0..n {
        for (acc, v) in out.iter_mut().zip(states.h.row(i)) {
            *acc += v;
        }
    }
    if kind == ReadoutKind::Mean {
        for v in out.iter_mut() {
            *v /= n as f64;
        }
    }
    Ok(out)
}
