//! Robust random cut forest scoring over shingled embedding streams.
//!
//! Snapshot embeddings are shingled (sliding-window concatenation), fed to a
//! forest of independent random cut trees in stream order, and scored by
//! CoDisp averaged across trees. The first `shingle_size - 1` timesteps have
//! no full shingle and score 0 by convention, so the output aligns one-to-one
//! with the input timestamps.

mod tree;

pub use tree::RcTree;

use crate::error::{Error, Result};
use crate::gnn::SnapshotEmbedding;
use crate::rng::derive_seed;

/// How per-tree CoDisp values are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreAggregate {
    Mean,
    Median,
}

/// Per-timestep anomaly scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries {
    pub timestamps: Vec<i64>,
    pub scores: Vec<f64>,
}

impl ScoreSeries {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// A forest of independent random cut trees with distinct seeds.
#[derive(Debug, Clone)]
pub struct RcForest {
    trees: Vec<RcTree>,
    tree_seeds: Vec<u64>,
    shingle_size: usize,
    tree_capacity: usize,
    aggregate: ScoreAggregate,
    next_id: u64,
}

impl RcForest {
    /// Build a forest. Per-tree seeds are derived from `seed` and are
    /// pairwise distinct so tree streams never collide.
    pub fn new(
        n_trees: usize,
        dim: usize,
        tree_capacity: usize,
        shingle_size: usize,
        aggregate: ScoreAggregate,
        seed: u64,
    ) -> Result<Self> {
        if n_trees == 0 {
            return Err(Error::InvalidParameter {
                name: "n_trees".into(),
                legal: ">= 1".into(),
            });
        }
        if tree_capacity == 0 {
            return Err(Error::InvalidParameter {
                name: "tree_capacity".into(),
                legal: ">= 1".into(),
            });
        }
        if shingle_size == 0 {
            return Err(Error::InvalidParameter {
                name: "shingle_size".into(),
                legal: ">= 1".into(),
            });
        }
        let mut tree_seeds = Vec::with_capacity(n_trees);
        let mut salt = 0u64;
        while tree_seeds.len() < n_trees {
            let candidate = derive_seed(seed, 0x7265_6573 + salt);
            salt += 1;
            if !tree_seeds.contains(&candidate) {
                tree_seeds.push(candidate);
            }
        }
        let trees = tree_seeds
            .iter()
            .map(|&s| RcTree::new(dim, tree_capacity, s))
            .collect();
        Ok(RcForest {
            trees,
            tree_seeds,
            shingle_size,
            tree_capacity,
            aggregate,
            next_id: 0,
        })
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    pub fn shingle_size(&self) -> usize {
        self.shingle_size
    }

    pub fn tree_capacity(&self) -> usize {
        self.tree_capacity
    }

    pub fn tree_seeds(&self) -> &[u64] {
        &self.tree_seeds
    }

    /// Insert one point into every tree and return the aggregated CoDisp.
    pub fn observe(&mut self, point: &[f64]) -> Result<f64> {
        let id = self.next_id;
        self.next_id += 1;
        let mut scores = Vec::with_capacity(self.trees.len());
        for tree in self.trees.iter_mut() {
            tree.insert_point(point, id)?;
            scores.push(tree.codisp(id)?);
        }
        Ok(match self.aggregate {
            ScoreAggregate::Mean => scores.iter().sum::<f64>() / scores.len() as f64,
            ScoreAggregate::Median => {
                scores.sort_by(f64::total_cmp);
                let mid = scores.len() / 2;
                if scores.len() % 2 == 1 {
                    scores[mid]
                } else {
                    0.5 * (scores[mid - 1] + scores[mid])
                }
            }
        })
    }

    /// Score a shingle stream in order. The returned series spans the
    /// original timestep axis: `shingle_size - 1` warm-up zeros followed by
    /// one score per shingle.
    pub fn score_series(&mut self, shingles: &[Vec<f64>]) -> Result<ScoreSeries> {
        let warmup = self.shingle_size - 1;
        let mut timestamps = Vec::with_capacity(warmup + shingles.len());
        let mut scores = Vec::with_capacity(warmup + shingles.len());
        for t in 0..warmup {
            timestamps.push(t as i64);
            scores.push(0.0);
        }
        for (offset, shingle) in shingles.iter().enumerate() {
            let score = self.observe(shingle)?;
            timestamps.push((warmup + offset) as i64);
            scores.push(score);
        }
        Ok(ScoreSeries { timestamps, scores })
    }
}

/// Sliding-window concatenation: output `i` covers embeddings
/// `i ..= i + w - 1`, each of length `w * h`.
pub fn shingle(series: &[SnapshotEmbedding], w: usize) -> Result<Vec<Vec<f64>>> {
    if w == 0 {
        return Err(Error::InvalidParameter {
            name: "w".into(),
            legal: ">= 1".into(),
        });
    }
    if series.len() < w {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            window: w,
        });
    }
    let h = series[0].z.len();
    for s in series {
        if s.z.len() != h {
            return Err(Error::DimensionMismatch(format!(
                "embedding at t={} has length {}, expected {h}",
                s.t,
                s.z.len()
            )));
        }
    }
    let mut out = Vec::with_capacity(series.len() - w + 1);
    for start in 0..=(series.len() - w) {
        let mut row = Vec::with_capacity(w * h);
        for s in &series[start..start + w] {
            row.extend_from_slice(&s.z);
        }
        out.push(row);
    }
    Ok(out)
}
