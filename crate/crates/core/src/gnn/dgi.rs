//! Unsupervised snapshot embedding with a contrastive objective.
//!
//! A one-layer encoder `enc(X, A) = tanh(A_hat X W_e)` (A_hat = row-normalized
//! A + I) produces node embeddings; their mean is the graph summary. A
//! bilinear discriminator `D(h, s) = sigmoid(h^T W_d s)` is trained to tell
//! real node embeddings from those of a corrupted graph (same structure,
//! row-shuffled features) with binary cross-entropy under full-batch
//! gradient descent. The trained encoder's mean embedding is the snapshot
//! vector scored downstream.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fmt::{fmt_f64, parse_f64};
use crate::gnn::GraphSnapshot;
use crate::numerics::DenseMatrix;
use crate::rng::Rng;

/// Encoder + discriminator weights and the recorded training curve.
#[derive(Debug, Clone, PartialEq)]
pub struct DgiModel {
    /// Encoder weights, d x h.
    pub w_e: DenseMatrix,
    /// Discriminator bilinear form, h x h.
    pub w_d: DenseMatrix,
    /// Loss at the start of each epoch.
    pub loss_curve: Vec<f64>,
}

/// One snapshot's encoder inputs: `z = A_hat X` and its corrupted twin.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSnapshot {
    pub z: DenseMatrix,
    pub z_corrupt: DenseMatrix,
}

/// A snapshot reduced to a single vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotEmbedding {
    pub t: i64,
    pub z: Vec<f64>,
}

/// Row-normalized adjacency with self-loops, `A_hat = norm(A + I)`.
pub fn normalized_adjacency(g: &GraphSnapshot) -> DenseMatrix {
    let n = g.node_count;
    let mut a = DenseMatrix::identity(n);
    for e in &g.edges {
        a.set(e.src, e.dst, a.get(e.src, e.dst) + e.weight);
        a.set(e.dst, e.src, a.get(e.dst, e.src) + e.weight);
    }
    for i in 0..n {
        let row_sum: f64 = a.row(i).iter().sum();
        for v in a.row_mut(i) {
            *v /= row_sum;
        }
    }
    a
}

/// Build the encoder inputs for a snapshot under a fixed corruption
/// permutation of the feature rows.
pub fn prepare_snapshot(g: &GraphSnapshot, perm: &[usize]) -> Result<PreparedSnapshot> {
    let n = g.node_count;
    if perm.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "permutation of length {} for {} nodes",
            perm.len(),
            n
        )));
    }
    let a_hat = normalized_adjacency(g);
    let z = a_hat.matmul(&g.node_features)?;
    let mut shuffled = DenseMatrix::zeros(n, g.feature_dim());
    for (dst, &src) in perm.iter().enumerate() {
        shuffled
            .row_mut(dst)
            .copy_from_slice(g.node_features.row(src));
    }
    let z_corrupt = a_hat.matmul(&shuffled)?;
    Ok(PreparedSnapshot { z, z_corrupt })
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

struct SnapshotForward {
    h: DenseMatrix,
    h_corrupt: DenseMatrix,
    summary: Vec<f64>,
    logits_real: Vec<f64>,
    logits_corrupt: Vec<f64>,
}

fn forward(
    w_e: &DenseMatrix,
    w_d: &DenseMatrix,
    prep: &PreparedSnapshot,
) -> Result<SnapshotForward> {
    let n = prep.z.rows();
    let hidden = w_e.cols();
    let mut h = prep.z.matmul(w_e)?;
    for i in 0..n {
        for v in h.row_mut(i) {
            *v = v.tanh();
        }
    }
    let mut h_corrupt = prep.z_corrupt.matmul(w_e)?;
    for i in 0..n {
        for v in h_corrupt.row_mut(i) {
            *v = v.tanh();
        }
    }
    let mut summary = vec![0.0; hidden];
    for i in 0..n {
        for (acc, v) in summary.iter_mut().zip(h.row(i)) {
            *acc += v;
        }
    }
    for v in summary.iter_mut() {
        *v /= n as f64;
    }
    let u = w_d.matvec(&summary)?;
    let logits_real: Vec<f64> = (0..n)
        .map(|i| h.row(i).iter().zip(&u).map(|(a, b)| a * b).sum())
        .collect();
    let logits_corrupt: Vec<f64> = (0..n)
        .map(|i| h_corrupt.row(i).iter().zip(&u).map(|(a, b)| a * b).sum())
        .collect();
    Ok(SnapshotForward {
        h,
        h_corrupt,
        summary,
        logits_real,
        logits_corrupt,
    })
}

/// Mean binary cross-entropy over all nodes of all prepared snapshots:
/// real embeddings are positives, corrupted ones negatives.
pub fn dgi_loss(
    w_e: &DenseMatrix,
    w_d: &DenseMatrix,
    prepared: &[PreparedSnapshot],
) -> Result<f64> {
    let mut total = 0.0;
    for prep in prepared {
        let fwd = forward(w_e, w_d, prep)?;
        let n = prep.z.rows() as f64;
        let mut acc = 0.0;
        for &a in &fwd.logits_real {
            acc += softplus(-a); // -ln sigmoid(a)
        }
        for &a in &fwd.logits_corrupt {
            acc += softplus(a); // -ln(1 - sigmoid(a))
        }
        total += acc / (2.0 * n);
    }
    Ok(total / prepared.len() as f64)
}

/// Loss and its analytic gradients with respect to the encoder and
/// discriminator weights.
pub fn dgi_gradients(
    w_e: &DenseMatrix,
    w_d: &DenseMatrix,
    prepared: &[PreparedSnapshot],
) -> Result<(f64, DenseMatrix, DenseMatrix)> {
    let d = w_e.rows();
    let hidden = w_e.cols();
    let mut grad_e = DenseMatrix::zeros(d, hidden);
    let mut grad_d = DenseMatrix::zeros(hidden, hidden);
    let mut total_loss = 0.0;
    let snap_weight = 1.0 / prepared.len() as f64;

    for prep in prepared {
        let fwd = forward(w_e, w_d, prep)?;
        let n = prep.z.rows();
        let scale = 1.0 / (2.0 * n as f64);

        let mut loss = 0.0;
        // d loss / d logit for positives and negatives.
        let g_real: Vec<f64> = fwd
            .logits_real
            .iter()
            .map(|&a| {
                loss += softplus(-a);
                (sigmoid(a) - 1.0) * scale
            })
            .collect();
        let g_corrupt: Vec<f64> = fwd
            .logits_corrupt
            .iter()
            .map(|&a| {
                loss += softplus(a);
                sigmoid(a) * scale
            })
            .collect();
        total_loss += loss / (2.0 * n as f64);

        // gamma = dL/du where u = W_d s.
        let mut gamma = vec![0.0; hidden];
        for i in 0..n {
            for (acc, v) in gamma.iter_mut().zip(fwd.h.row(i)) {
                *acc += g_real[i] * v;
            }
            for (acc, v) in gamma.iter_mut().zip(fwd.h_corrupt.row(i)) {
                *acc += g_corrupt[i] * v;
            }
        }

        // dL/dW_d = gamma s^T.
        for r in 0..hidden {
            for c in 0..hidden {
                grad_d.set(
                    r,
                    c,
                    grad_d.get(r, c) + snap_weight * gamma[r] * fwd.summary[c],
                );
            }
        }

        // dL/ds = W_d^T gamma, spread uniformly over rows of H.
        let mut ds = vec![0.0; hidden];
        for r in 0..hidden {
            for c in 0..hidden {
                ds[c] += w_d.get(r, c) * gamma[r];
            }
        }
        let u = w_d.matvec(&fwd.summary)?;

        // Backprop through tanh into W_e.
        for i in 0..n {
            for k in 0..hidden {
                let h_ik = fwd.h.get(i, k);
                let upstream = g_real[i] * u[k] + ds[k] / n as f64;
                let pre = upstream * (1.0 - h_ik * h_ik);
                if pre != 0.0 {
                    for j in 0..d {
                        grad_e.set(
                            j,
                            k,
                            grad_e.get(j, k) + snap_weight * pre * prep.z.get(i, j),
                        );
                    }
                }
                let hc_ik = fwd.h_corrupt.get(i, k);
                let pre_c = g_corrupt[i] * u[k] * (1.0 - hc_ik * hc_ik);
                if pre_c != 0.0 {
                    for j in 0..d {
                        grad_e.set(
                            j,
                            k,
                            grad_e.get(j, k) + snap_weight * pre_c * prep.z_corrupt.get(i, j),
                        );
                    }
                }
            }
        }
    }
    Ok((total_loss * snap_weight, grad_e, grad_d))
}

/// Discriminator probabilities for real and corrupted nodes of one
/// prepared snapshot.
pub fn discriminator_scores(
    model: &DgiModel,
    prep: &PreparedSnapshot,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let fwd = forward(&model.w_e, &model.w_d, prep)?;
    Ok((
        fwd.logits_real.iter().map(|&a| sigmoid(a)).collect(),
        fwd.logits_corrupt.iter().map(|&a| sigmoid(a)).collect(),
    ))
}

/// Train the embedder on a series of snapshots.
///
/// The corruption permutation is redrawn per snapshot per epoch from the
/// seeded stream; the recorded curve holds the loss at the start of each
/// epoch. With zero epochs the initialized model is returned untouched.
pub fn dgi_train(
    snapshots: &[GraphSnapshot],
    hidden: usize,
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<DgiModel> {
    if snapshots.is_empty() {
        return Err(Error::EmptyInput("dgi_train with no snapshots".into()));
    }
    if hidden == 0 {
        return Err(Error::InvalidParameter {
            name: "hidden".into(),
            legal: ">= 1".into(),
        });
    }
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lr".into(),
            legal: "(0, \u{221e})".into(),
        });
    }
    let d = snapshots[0].feature_dim();
    for s in snapshots {
        if s.feature_dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "snapshot t={} has {} features, expected {}",
                s.t,
                s.feature_dim(),
                d
            )));
        }
        if s.node_count == 0 {
            return Err(Error::EmptyGraph);
        }
    }

    let mut rng = Rng::new(seed);
    let limit = (6.0 / (d + hidden) as f64).sqrt();
    let w_e_data: Vec<f64> = (0..d * hidden)
        .map(|_| rng.uniform(-limit, limit))
        .collect();
    let mut w_e = DenseMatrix::from_vec(d, hidden, w_e_data)?;
    // Zero discriminator start: D = 1/2 everywhere, initial loss exactly ln 2.
    let mut w_d = DenseMatrix::zeros(hidden, hidden);

    // A_hat X is permutation independent; cache it per snapshot.
    let bases: Vec<(DenseMatrix, DenseMatrix)> = snapshots
        .iter()
        .map(|g| {
            let a_hat = normalized_adjacency(g);
            let z = a_hat.matmul(&g.node_features)?;
            Ok((a_hat, z))
        })
        .collect::<Result<_>>()?;

    let mut loss_curve = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let prepared: Vec<PreparedSnapshot> = snapshots
            .iter()
            .zip(&bases)
            .map(|(g, (a_hat, z))| {
                let perm = rng.permutation(g.node_count);
                let mut shuffled = DenseMatrix::zeros(g.node_count, d);
                for (dst, &src) in perm.iter().enumerate() {
                    shuffled
                        .row_mut(dst)
                        .copy_from_slice(g.node_features.row(src));
                }
                Ok(PreparedSnapshot {
                    z: z.clone(),
                    z_corrupt: a_hat.matmul(&shuffled)?,
                })
            })
            .collect::<Result<_>>()?;

        let (loss, grad_e, grad_d) = dgi_gradients(&w_e, &w_d, &prepared)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        loss_curve.push(loss);
        for j in 0..d {
            for k in 0..hidden {
                w_e.set(j, k, w_e.get(j, k) - lr * grad_e.get(j, k));
            }
        }
        for r in 0..hidden {
            for c in 0..hidden {
                w_d.set(r, c, w_d.get(r, c) - lr * grad_d.get(r, c));
            }
        }
    }

    Ok(DgiModel {
        w_e,
        w_d,
        loss_curve,
    })
}

/// Embed one snapshot: the mean encoder output over nodes.
pub fn dgi_embed(model: &DgiModel, g: &GraphSnapshot) -> Result<SnapshotEmbedding> {
    if g.node_count == 0 {
        return Err(Error::EmptyGraph);
    }
    if g.feature_dim() != model.w_e.rows() {
        return Err(Error::DimensionMismatch(format!(
            "model expects {} features, snapshot has {}",
            model.w_e.rows(),
            g.feature_dim()
        )));
    }
    let a_hat = normalized_adjacency(g);
    let z = a_hat.matmul(&g.node_features)?;
    let mut h = z.matmul(&model.w_e)?;
    let n = g.node_count;
    let hidden = model.w_e.cols();
    for i in 0..n {
        for v in h.row_mut(i) {
            *v = v.tanh();
        }
    }
    let mut out = vec![0.0; hidden];
    for i in 0..n {
        for (acc, v) in out.iter_mut().zip(h.row(i)) {
            *acc += v;
        }
    }
    for v in out.iter_mut() {
        *v /= n as f64;
    }
    Ok(SnapshotEmbedding { t: g.t, z: out })
}

/// Serialize a model as flat key-value text: a dimension header followed by
/// row-major weight blocks at 17 significant digits. Loading the text back
/// reproduces the model bit for bit.
pub fn model_to_text(model: &DgiModel) -> String {
    let mut out = String::from("graphwatch-dgi-v1\n");
    out.push_str(&format!("input_dim = {}\n", model.w_e.rows()));
    out.push_str(&format!("hidden_dim = {}\n", model.w_e.cols()));
    let join = |data: &[f64]| {
        data.iter()
            .map(|&v| fmt_f64(v))
            .collect::<Vec<_>>()
            .join(" ")
    };
    out.push_str(&format!("w_e = {}\n", join(model.w_e.data())));
    out.push_str(&format!("w_d = {}\n", join(model.w_d.data())));
    out.push_str(&format!("loss_curve = {}\n", join(&model.loss_curve)));
    out
}

pub fn model_from_text(text: &str) -> Result<DgiModel> {
    let mut lines = text.lines().enumerate();
    let parse_err = |line: usize, message: &str| Error::Parse {
        line: line + 1,
        message: message.into(),
    };
    let (line, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty model file"))?;
    if header.trim() != "graphwatch-dgi-v1" {
        return Err(parse_err(line, "unrecognized model header"));
    }
    let mut input_dim = None;
    let mut hidden_dim = None;
    let mut w_e = None;
    let mut w_d = None;
    let mut loss_curve = None;
    for (line, raw) in lines {
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let (key, value) = raw
            .split_once('=')
            .ok_or_else(|| parse_err(line, "expected 'key = value'"))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "input_dim" => {
                input_dim = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| parse_err(line, "input_dim must be an integer"))?,
                )
            }
            "hidden_dim" => {
                hidden_dim = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| parse_err(line, "hidden_dim must be an integer"))?,
                )
            }
            "w_e" | "w_d" | "loss_curve" => {
                let values: Vec<f64> = value
                    .split_whitespace()
                    .map(|tok| {
                        parse_f64(tok).ok_or_else(|| parse_err(line, "bad float in weight block"))
                    })
                    .collect::<Result<_>>()?;
                match key {
                    "w_e" => w_e = Some(values),
                    "w_d" => w_d = Some(values),
                    _ => loss_curve = Some(values),
                }
            }
            other => return Err(parse_err(line, &format!("unknown key '{other}'"))),
        }
    }
    let d = input_dim.ok_or_else(|| parse_err(0, "missing input_dim"))?;
    let hidden = hidden_dim.ok_or_else(|| parse_err(0, "missing hidden_dim"))?;
    let w_e = DenseMatrix::from_vec(d, hidden, w_e.ok_or_else(|| parse_err(0, "missing w_e"))?)?;
    let w_d = DenseMatrix::from_vec(
        hidden,
        hidden,
        w_d.ok_or_else(|| parse_err(0, "missing w_d"))?,
    )?;
    Ok(DgiModel {
        w_e,
        w_d,
        loss_curve: loss_curve.unwrap_or_default(),
    })
}

pub fn save_model(model: &DgiModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_text(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<DgiModel> {
    let text = fs::read_to_string(path)?;
    model_from_text(&text)
}
