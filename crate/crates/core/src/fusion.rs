//! Multi-view fusion: single and full feature spaces, soft cluster
//! memberships per view, and cross-view disagreement scores.
//!
//! Cluster ids are not aligned across views, so comparisons go through
//! co-membership matrices (probability that two samples share a cluster),
//! which are invariant under relabeling inside any view.

use crate::error::{Error, Result};
use crate::numerics::{squared_distance, DenseMatrix};
use crate::spectral::ClusterAssignment;

/// Distance regularizer so a point sitting exactly on a centroid gets
/// membership ~1 for that cluster.
const MEMBERSHIP_EPS: f64 = 1e-12;

/// One data source's sample-by-feature block. All views of a dataset share
/// the same sample count and ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewFeatureSpace {
    pub view_id: String,
    pub x: DenseMatrix,
}

/// Column-wise concatenation of every view, with recorded boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct FullFeatureSpace {
    pub x: DenseMatrix,
    /// Column offsets; `view_boundaries[v]..view_boundaries[v+1]` slices
    /// view `v` back out exactly.
    pub view_boundaries: Vec<usize>,
}

impl FullFeatureSpace {
    pub fn view_count(&self) -> usize {
        self.view_boundaries.len() - 1
    }

    pub fn view_slice(&self, v: usize) -> DenseMatrix {
        self.x
            .slice_cols(self.view_boundaries[v], self.view_boundaries[v + 1])
    }
}

/// Where a membership matrix came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MembershipSource {
    View(String),
    Full,
}

/// Soft cluster memberships: row `i` is a probability vector over clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    pub mu: DenseMatrix,
    pub source: MembershipSource,
}

/// How per-sample disagreement is aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsistencyMode {
    /// Compare each view against the full feature space (default).
    VsFull,
    /// Compare every unordered pair of views.
    Pairwise,
}

/// Per-sample cross-view inconsistency scores, in [0, 2].
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyScore {
    pub scores: Vec<f64>,
    pub mode: ConsistencyMode,
}

/// Concatenate views into the full feature space.
pub fn build_full_space(views: &[ViewFeatureSpace]) -> Result<FullFeatureSpace> {
    if views.len() < 2 {
        return Err(Error::FewerThanTwoViews { got: views.len() });
    }
    let m = views[0].x.rows();
    for view in views {
        if view.x.rows() != m {
            return Err(Error::SampleCountMismatch {
                expected: m,
                actual: view.x.rows(),
            });
        }
    }
    let blocks: Vec<&DenseMatrix> = views.iter().map(|v| &v.x).collect();
    let x = DenseMatrix::hcat(&blocks)?;
    let mut view_boundaries = Vec::with_capacity(views.len() + 1);
    view_boundaries.push(0);
    for view in views {
        view_boundaries.push(view_boundaries.last().unwrap() + view.x.cols());
    }
    Ok(FullFeatureSpace { x, view_boundaries })
}

/// Soft membership of each embedded sample in each cluster:
/// `mu(i, c) ∝ 1 / (dist(y_i, centroid_c)^2 + eps)`, normalized per row.
pub fn membership(
    assignment: &ClusterAssignment,
    y: &DenseMatrix,
    source: MembershipSource,
) -> Result<MembershipMatrix> {
    let n = y.rows();
    if assignment.labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "assignment has {} labels for {} embedded samples",
            assignment.labels.len(),
            n
        )));
    }
    if assignment.centroids.cols() != y.cols() {
        return Err(Error::DimensionMismatch(format!(
            "centroids have {} columns, embedding has {}",
            assignment.centroids.cols(),
            y.cols()
        )));
    }
    let k = assignment.centroids.rows();
    let mut mu = DenseMatrix::zeros(n, k);
    for i in 0..n {
        let mut total = 0.0;
        for c in 0..k {
            let d2 = squared_distance(y.row(i), assignment.centroids.row(c));
            let weight = 1.0 / (d2 + MEMBERSHIP_EPS);
            mu.set(i, c, weight);
            total += weight;
        }
        for c in 0..k {
            mu.set(i, c, mu.get(i, c) / total);
        }
    }
    Ok(MembershipMatrix { mu, source })
}

/// Co-membership matrix: `M[i][j] = sum_c mu(i,c) mu(j,c)`, the probability
/// that samples i and j land in the same cluster. Symmetric, entries in
/// [0, 1], and bit-identical under any relabeling of clusters (per-entry
/// products are summed in sorted order).
pub fn co_membership(membership: &MembershipMatrix) -> DenseMatrix {
    let mu = &membership.mu;
    let n = mu.rows();
    let k = mu.cols();
    let mut m = DenseMatrix::zeros(n, n);
    let mut products = vec![0.0; k];
    for i in 0..n {
        for j in i..n {
            for c in 0..k {
                products[c] = mu.get(i, c) * mu.get(j, c);
            }
            products.sort_by(f64::total_cmp);
            let value: f64 = products.iter().sum();
            m.set(i, j, value);
            m.set(j, i, value);
        }
    }
    m
}

/// Per-sample disagreement between co-membership structures.
///
/// `VsFull`: mean over views of the average absolute difference between the
/// full-space and the view's co-membership rows. `Pairwise`: the same over
/// unordered view pairs.
pub fn consistency_score(
    views: &[MembershipMatrix],
    full: &MembershipMatrix,
    mode: ConsistencyMode,
) -> Result<ConsistencyScore> {
    if views.len() < 2 {
        return Err(Error::FewerThanTwoViews { got: views.len() });
    }
    let m = full.mu.rows();
    for view in views {
        if view.mu.rows() != m {
            return Err(Error::SampleCountMismatch {
                expected: m,
                actual: view.mu.rows(),
            });
        }
    }
    if m < 2 {
        return Err(Error::EmptyInput(format!(
            "consistency score needs at least 2 samples, got {m}"
        )));
    }

    let co_views: Vec<DenseMatrix> = views.iter().map(co_membership).collect();
    let mut scores = vec![0.0; m];
    match mode {
        ConsistencyMode::VsFull => {
            let co_full = co_membership(full);
            for co_v in &co_views {
                accumulate_row_difference(&co_full, co_v, &mut scores);
            }
            for s in scores.iter_mut() {
                *s /= views.len() as f64;
            }
        }
        ConsistencyMode::Pairwise => {
            let mut pairs = 0usize;
            for a in 0..co_views.len() {
                for b in (a + 1)..co_views.len() {
                    accumulate_row_difference(&co_views[a], &co_views[b], &mut scores);
                    pairs += 1;
                }
            }
            for s in scores.iter_mut() {
                *s /= pairs as f64;
            }
        }
    }
    Ok(ConsistencyScore { scores, mode })
}

fn accumulate_row_difference(a: &DenseMatrix, b: &DenseMatrix, scores: &mut [f64]) {
    let m = scores.len();
    for (i, score) in scores.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..m {
            if j != i {
                acc += (a.get(i, j) - b.get(i, j)).abs();
            }
        }
        *score += acc / (m - 1) as f64;
    }
}
