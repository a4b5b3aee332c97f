//! Spectral clustering and the two-way partition family.
//!
//! The flow is: Gaussian similarity matrix → Laplacian → eigen-embedding →
//! k-means. Two-way partitions sweep the Fiedler vector against a cut
//! objective (NCut, RCut, or MinMaxCut).

use crate::error::{Error, Result};
use crate::numerics::{squared_distance, sym_eig, DenseMatrix};
use crate::rng::Rng;

/// Pairwise-similarity graph from the Gaussian kernel
/// `exp(-||x_i - x_j||^2 / (2 sigma^2))` with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    pub w: DenseMatrix,
    pub sigma: f64,
}

/// Which spectrum an embedding was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingKind {
    Unnormalized,
    Symmetric,
    RandomWalk,
    /// Top eigenvectors of the similarity matrix itself (SLH-style).
    AffinityTop,
    /// Top eigenvectors of the random-walk matrix P = D^-1 W (MS-style).
    RwTop,
}

/// Laplacian variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    /// L = D - W.
    Unnormalized,
    /// I - D^-1/2 W D^-1/2.
    Symmetric,
    /// The random-walk matrix P = D^-1 W itself (not I - P).
    RandomWalk,
}

/// Embedding algorithm family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralAlgorithm {
    /// k smallest eigenvectors of L = D - W.
    Basic,
    /// k smallest eigenvectors of the symmetric normalized Laplacian with
    /// row renormalization.
    Njw,
    /// k largest eigenvectors of P = D^-1 W.
    Ms,
    /// k largest eigenvectors of W.
    Slh,
}

/// Rows are the embedded sample points fed to k-means.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    pub u: DenseMatrix,
    pub kind: EmbeddingKind,
    pub k: usize,
}

/// Output of k-means: per-sample labels plus centroids and inertia.
///
/// Labels are canonical: cluster ids are assigned in first-occurrence order
/// over the sample index, so the same input and seed give byte-identical
/// labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub centroids: DenseMatrix,
    pub inertia: f64,
}

/// Two-way cut objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutObjective {
    /// cut/vol(A) + cut/vol(B).
    Ncut,
    /// cut/|A| + cut/|B|.
    Rcut,
    /// cut/assoc(A) + cut/assoc(B).
    Mcut,
}

/// Two-way partition criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoWayCriterion {
    /// Support of the top eigenvector of W.
    Pf,
    /// Fiedler sweep of the random-walk Laplacian minimizing NCut.
    SmNcut,
    /// Fiedler sweep of the unnormalized Laplacian minimizing RCut.
    KvvRcut,
    /// Fiedler sweep of the random-walk Laplacian minimizing MinMaxCut.
    Mcut,
}

/// A two-way partition and its objective value. `partition[i]` is true for
/// samples on side A; both sides are non-empty.
#[derive(Debug, Clone, PartialEq)]
pub struct CutValue {
    pub objective: CutObjective,
    pub value: f64,
    pub partition: Vec<bool>,
}

const CONNECTIVITY_EPS: f64 = 1e-10;
const PF_SUPPORT_EPS: f64 = 1e-8;
const KMEANS_TOL: f64 = 1e-8;
const KMEANS_MAX_ITER: usize = 100;

/// Build the Gaussian-kernel similarity graph. With `sigma` absent the
/// bandwidth defaults to the median of all positive pairwise distances
/// (1 if every distance is zero).
pub fn similarity_matrix(x: &DenseMatrix, sigma: Option<f64>) -> Result<SimilarityGraph> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::EmptyInput(format!(
            "similarity matrix needs at least 2 samples, got {n}"
        )));
    }
    if let Some(s) = sigma {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma".into(),
                legal: "(0, \u{221e})".into(),
            });
        }
    }

    let mut sq = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d2 = squared_distance(x.row(i), x.row(j));
            sq.set(i, j, d2);
            sq.set(j, i, d2);
        }
    }

    let sigma = match sigma {
        Some(s) => s,
        None => median_positive_distance(&sq).unwrap_or(1.0),
    };

    let denom = 2.0 * sigma * sigma;
    let mut w = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w.set(i, j, (-sq.get(i, j) / denom).exp());
            }
        }
    }
    Ok(SimilarityGraph { w, sigma })
}

fn median_positive_distance(sq: &DenseMatrix) -> Option<f64> {
    let n = sq.rows();
    let mut distances: Vec<f64> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d2 = sq.get(i, j);
            if d2 > 0.0 {
                distances.push(d2.sqrt());
            }
        }
    }
    if distances.is_empty() {
        return None;
    }
    distances.sort_by(f64::total_cmp);
    let mid = distances.len() / 2;
    Some(if distances.len() % 2 == 1 {
        distances[mid]
    } else {
        0.5 * (distances[mid - 1] + distances[mid])
    })
}

/// Row sums of W.
pub fn degrees(graph: &SimilarityGraph) -> Vec<f64> {
    let n = graph.w.rows();
    (0..n).map(|i| graph.w.row(i).iter().sum()).collect()
}

/// Diagonal degree matrix D.
pub fn degree_matrix(graph: &SimilarityGraph) -> DenseMatrix {
    let deg = degrees(graph);
    let n = deg.len();
    let mut d = DenseMatrix::zeros(n, n);
    for (i, value) in deg.into_iter().enumerate() {
        d.set(i, i, value);
    }
    d
}

/// One of the Laplacian variants. Normalized kinds require every degree to
/// be positive.
pub fn laplacian(graph: &SimilarityGraph, kind: LaplacianKind) -> Result<DenseMatrix> {
    let n = graph.w.rows();
    let deg = degrees(graph);
    if matches!(kind, LaplacianKind::Symmetric | LaplacianKind::RandomWalk) {
        if let Some(index) = deg.iter().position(|&d| d <= 0.0) {
            return Err(Error::IsolatedNode { index });
        }
    }
    let mut out = DenseMatrix::zeros(n, n);
    match kind {
        LaplacianKind::Unnormalized => {
            for i in 0..n {
                for j in 0..n {
                    let v = if i == j {
                        deg[i] - graph.w.get(i, j)
                    } else {
                        -graph.w.get(i, j)
                    };
                    out.set(i, j, v);
                }
            }
        }
        LaplacianKind::Symmetric => {
            for i in 0..n {
                for j in 0..n {
                    let norm = graph.w.get(i, j) / (deg[i].sqrt() * deg[j].sqrt());
                    let v = if i == j { 1.0 - norm } else { -norm };
                    out.set(i, j, v);
                }
            }
        }
        LaplacianKind::RandomWalk => {
            for i in 0..n {
                for j in 0..n {
                    out.set(i, j, graph.w.get(i, j) / deg[i]);
                }
            }
        }
    }
    Ok(out)
}

/// The symmetric counterpart S = D^-1/2 W D^-1/2 of the random-walk matrix.
/// P and S share eigenvalues; eigenvectors map via u = D^-1/2 v.
fn symmetrized_random_walk(graph: &SimilarityGraph) -> Result<(DenseMatrix, Vec<f64>)> {
    let n = graph.w.rows();
    let deg = degrees(graph);
    if let Some(index) = deg.iter().position(|&d| d <= 0.0) {
        return Err(Error::IsolatedNode { index });
    }
    let mut s = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s.set(i, j, graph.w.get(i, j) / (deg[i].sqrt() * deg[j].sqrt()));
        }
    }
    Ok((s, deg))
}

/// Spectral embedding of the graph for `k` clusters.
pub fn spectral_embed(
    graph: &SimilarityGraph,
    k: usize,
    algorithm: SpectralAlgorithm,
) -> Result<SpectralEmbedding> {
    let n = graph.w.rows();
    if k < 2 || k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let (u, kind) = match algorithm {
        SpectralAlgorithm::Basic => {
            let l = laplacian(graph, LaplacianKind::Unnormalized)?;
            let eig = sym_eig(&l)?;
            (
                eig.eigenvectors.slice_cols(0, k),
                EmbeddingKind::Unnormalized,
            )
        }
        SpectralAlgorithm::Njw => {
            let l = laplacian(graph, LaplacianKind::Symmetric)?;
            let eig = sym_eig(&l)?;
            let mut u = eig.eigenvectors.slice_cols(0, k);
            for i in 0..n {
                let norm = u.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for v in u.row_mut(i) {
                        *v /= norm;
                    }
                }
            }
            (u, EmbeddingKind::Symmetric)
        }
        SpectralAlgorithm::Ms => {
            let (s, deg) = symmetrized_random_walk(graph)?;
            let eig = sym_eig(&s)?;
            let mut u = DenseMatrix::zeros(n, k);
            for rank in 0..k {
                let src = n - 1 - rank;
                for i in 0..n {
                    u.set(i, rank, eig.eigenvectors.get(i, src) / deg[i].sqrt());
                }
            }
            (u, EmbeddingKind::RwTop)
        }
        SpectralAlgorithm::Slh => {
            let eig = sym_eig(&graph.w)?;
            let mut u = DenseMatrix::zeros(n, k);
            for rank in 0..k {
                let src = n - 1 - rank;
                for i in 0..n {
                    u.set(i, rank, eig.eigenvectors.get(i, src));
                }
            }
            (u, EmbeddingKind::AffinityTop)
        }
    };
    Ok(SpectralEmbedding { u, kind, k })
}

/// Lloyd k-means with k-means++ seeding.
///
/// Stops when the largest centroid shift drops to 1e-8 or after 100
/// iterations. Empty clusters are repaired by seizing the point farthest
/// from its assigned centroid. Labels come out in first-occurrence order.
pub fn kmeans(y: &DenseMatrix, k: usize, seed: u64) -> Result<ClusterAssignment> {
    let n = y.rows();
    if k == 0 || k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let dim = y.cols();
    let mut rng = Rng::new(seed);

    // k-means++ initialization.
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(y.row(rng.index(n)).to_vec());
    let mut d2: Vec<f64> = (0..n)
        .map(|i| squared_distance(y.row(i), &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.next_f64() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All remaining mass on chosen points; fall back to uniform.
            rng.index(n)
        };
        centroids.push(y.row(next).to_vec());
        for i in 0..n {
            let d = squared_distance(y.row(i), centroids.last().unwrap());
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }

    let mut labels = vec![0usize; n];
    for _ in 0..KMEANS_MAX_ITER {
        assign_labels(y, &centroids, &mut labels);
        repair_empty_clusters(y, &mut centroids, &mut labels);

        // Recompute centroids.
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (acc, v) in sums[labels[i]].iter_mut().zip(y.row(i)) {
                *acc += v;
            }
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let mut moved = 0.0;
            for (dst, acc) in centroids[c].iter_mut().zip(&sums[c]) {
                let new = acc / counts[c] as f64;
                let d = new - *dst;
                moved += d * d;
                *dst = new;
            }
            shift = shift.max(moved.sqrt());
        }
        if shift <= KMEANS_TOL {
            break;
        }
    }
    assign_labels(y, &centroids, &mut labels);
    repair_empty_clusters(y, &mut centroids, &mut labels);

    // Canonical relabeling by first occurrence.
    let mut remap = vec![usize::MAX; k];
    let mut next_label = 0;
    for &label in &labels {
        if remap[label] == usize::MAX {
            remap[label] = next_label;
            next_label += 1;
        }
    }
    let labels: Vec<usize> = labels.iter().map(|&l| remap[l]).collect();
    let mut ordered = vec![vec![0.0; dim]; k];
    for (old, centroid) in centroids.into_iter().enumerate() {
        ordered[remap[old]] = centroid;
    }

    let centroids = DenseMatrix::from_rows(&ordered)?;
    let inertia = (0..n)
        .map(|i| squared_distance(y.row(i), centroids.row(labels[i])))
        .sum();
    Ok(ClusterAssignment {
        labels,
        centroids,
        inertia,
    })
}

fn assign_labels(y: &DenseMatrix, centroids: &[Vec<f64>], labels: &mut [usize]) {
    for i in 0..y.rows() {
        let mut best = 0usize;
        let mut best_d = squared_distance(y.row(i), &centroids[0]);
        for (c, centroid) in centroids.iter().enumerate().skip(1) {
            let d = squared_distance(y.row(i), centroid);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        labels[i] = best;
    }
}

/// Give each empty cluster the point currently farthest from its centroid.
fn repair_empty_clusters(y: &DenseMatrix, centroids: &mut [Vec<f64>], labels: &mut [usize]) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut worst = 0usize;
        let mut worst_d = -1.0;
        for i in 0..y.rows() {
            if counts[labels[i]] <= 1 {
                continue; // do not empty another cluster
            }
            let d = squared_distance(y.row(i), &centroids[labels[i]]);
            if d > worst_d {
                worst_d = d;
                worst = i;
            }
        }
        centroids[empty] = y.row(worst).to_vec();
        labels[worst] = empty;
    }
}

/// Evaluate a cut objective for a fixed two-way partition.
pub fn cut_objective(
    graph: &SimilarityGraph,
    partition: &[bool],
    objective: CutObjective,
) -> Result<f64> {
    let n = graph.w.rows();
    if partition.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "partition of length {} for {} samples",
            partition.len(),
            n
        )));
    }
    let size_a = partition.iter().filter(|&&p| p).count();
    if size_a == 0 || size_a == n {
        return Err(Error::DegeneratePartition);
    }

    let mut cut = 0.0;
    for i in 0..n {
        for j in 0..n {
            if partition[i] && !partition[j] {
                cut += graph.w.get(i, j);
            }
        }
    }
    if cut == 0.0 {
        return Ok(0.0);
    }

    match objective {
        CutObjective::Rcut => {
            let size_b = n - size_a;
            Ok(cut / size_a as f64 + cut / size_b as f64)
        }
        CutObjective::Ncut => {
            let deg = degrees(graph);
            let vol_a: f64 = (0..n).filter(|&i| partition[i]).map(|i| deg[i]).sum();
            let vol_b: f64 = (0..n).filter(|&i| !partition[i]).map(|i| deg[i]).sum();
            if vol_a <= 0.0 || vol_b <= 0.0 {
                return Err(Error::ZeroVolume);
            }
            Ok(cut / vol_a + cut / vol_b)
        }
        CutObjective::Mcut => {
            let mut assoc_a = 0.0;
            let mut assoc_b = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if partition[i] && partition[j] {
                        assoc_a += graph.w.get(i, j);
                    } else if !partition[i] && !partition[j] {
                        assoc_b += graph.w.get(i, j);
                    }
                }
            }
            if assoc_a <= 0.0 || assoc_b <= 0.0 {
                return Err(Error::ZeroVolume);
            }
            Ok(cut / assoc_a + cut / assoc_b)
        }
    }
}

/// Two-way partition by the requested criterion.
///
/// PF takes the support of the top eigenvector of W. The other criteria
/// sweep every split point of the sorted Fiedler vector and keep the
/// partition minimizing the criterion's objective.
pub fn two_way_partition(graph: &SimilarityGraph, criterion: TwoWayCriterion) -> Result<CutValue> {
    let n = graph.w.rows();
    if n < 2 {
        return Err(Error::EmptyInput(format!(
            "two-way partition needs at least 2 samples, got {n}"
        )));
    }

    if let TwoWayCriterion::Pf = criterion {
        let eig = sym_eig(&graph.w)?;
        let top = eig.eigenvectors.column(n - 1);
        let partition: Vec<bool> = top.iter().map(|v| v.abs() > PF_SUPPORT_EPS).collect();
        let size_a = partition.iter().filter(|&&p| p).count();
        if size_a == 0 || size_a == n {
            return Err(Error::DegeneratePartition);
        }
        let value = cut_objective(graph, &partition, CutObjective::Ncut)?;
        return Ok(CutValue {
            objective: CutObjective::Ncut,
            value,
            partition,
        });
    }

    // Connectivity check via the unnormalized Laplacian's second eigenvalue.
    let l = laplacian(graph, LaplacianKind::Unnormalized)?;
    let l_eig = sym_eig(&l)?;
    let lambda2 = l_eig.eigenvalues[1];
    if lambda2 <= CONNECTIVITY_EPS {
        return Err(Error::Disconnected { lambda2 });
    }

    let (fiedler, objective) = match criterion {
        TwoWayCriterion::KvvRcut => (l_eig.eigenvectors.column(1), CutObjective::Rcut),
        TwoWayCriterion::SmNcut | TwoWayCriterion::Mcut => {
            // Fiedler vector of the random-walk Laplacian, computed through
            // its symmetric similarity transform.
            let (s, deg) = symmetrized_random_walk(graph)?;
            let s_eig = sym_eig(&s)?;
            let v = s_eig.eigenvectors.column(n - 2);
            let u: Vec<f64> = v.iter().zip(&deg).map(|(x, d)| x / d.sqrt()).collect();
            let objective = if criterion == TwoWayCriterion::SmNcut {
                CutObjective::Ncut
            } else {
                CutObjective::Mcut
            };
            (u, objective)
        }
        TwoWayCriterion::Pf => unreachable!(),
    };

    sweep_partition(graph, &fiedler, objective)
}

/// Sweep all n-1 split points of the sorted vector, returning the partition
/// with the smallest objective (first minimizer wins on ties).
fn sweep_partition(
    graph: &SimilarityGraph,
    vector: &[f64],
    objective: CutObjective,
) -> Result<CutValue> {
    let n = vector.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vector[a].total_cmp(&vector[b]).then(a.cmp(&b)));

    let mut best: Option<(f64, Vec<bool>)> = None;
    let mut partition = vec![false; n];
    for t in 0..(n - 1) {
        partition[order[t]] = true;
        let mut side_a = partition.clone();
        // Canonical orientation: side A is the side containing sample 0.
        if !side_a[0] {
            for flag in side_a.iter_mut() {
                *flag = !*flag;
            }
        }
        match cut_objective(graph, &side_a, objective) {
            Ok(value) => {
                if best.as_ref().is_none_or(|(b, _)| value < *b) {
                    best = Some((value, side_a));
                }
            }
            Err(Error::ZeroVolume) => continue,
            Err(e) => return Err(e),
        }
    }
    let (value, partition) = best.ok_or(Error::ZeroVolume)?;
    Ok(CutValue {
        objective,
        value,
        partition,
    })
}

/// Full spectral clustering: similarity graph → embedding → k-means.
pub fn spectral_cluster(
    x: &DenseMatrix,
    k: usize,
    algorithm: SpectralAlgorithm,
    sigma: Option<f64>,
    seed: u64,
) -> Result<ClusterAssignment> {
    let graph = similarity_matrix(x, sigma)?;
    let embedding = spectral_embed(&graph, k, algorithm)?;
    kmeans(&embedding.u, k, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Similarity graph from an explicit weight matrix.
    pub(crate) fn graph_from_weights(w: DenseMatrix) -> SimilarityGraph {
        SimilarityGraph { w, sigma: 1.0 }
    }

    /// Two unit-weight cliques of the given sizes joined by `bridges`
    /// unit-weight edges between consecutive cross members.
    pub(crate) fn two_cliques(a: usize, b: usize, bridges: usize) -> SimilarityGraph {
        let n = a + b;
        let mut w = DenseMatrix::zeros(n, n);
        for i in 0..a {
            for j in 0..a {
                if i != j {
                    w.set(i, j, 1.0);
                }
            }
        }
        for i in a..n {
            for j in a..n {
                if i != j {
                    w.set(i, j, 1.0);
                }
            }
        }
        for e in 0..bridges {
            let (i, j) = (e % a, a + (e % b));
            w.set(i, j, 1.0);
            w.set(j, i, 1.0);
        }
        graph_from_weights(w)
    }

    #[test]
    fn similarity_formula_and_range() {
        let x = DenseMatrix::from_vec(2, 1, vec![0.0, 2.0]).unwrap();
        let g = similarity_matrix(&x, Some(1.0)).unwrap();
        assert!((g.w.get(0, 1) - (-2.0f64).exp()).abs() < 1e-12);
        assert_eq!(g.w.get(0, 0), 0.0);
        assert_eq!(g.w.get(1, 1), 0.0);
    }

    #[test]
    fn similarity_equal_points_get_weight_one() {
        let x = DenseMatrix::from_vec(3, 2, vec![1.0, 2.0, 1.0, 2.0, 5.0, 5.0]).unwrap();
        let g = similarity_matrix(&x, Some(0.5)).unwrap();
        assert_eq!(g.w.get(0, 1), 1.0);
        assert_eq!(g.w.get(1, 0), 1.0);
    }

    #[test]
    fn similarity_median_heuristic() {
        // Pairwise distances {1, 1, 2} -> median 1.
        let x = DenseMatrix::from_vec(3, 1, vec![0.0, 1.0, 2.0]).unwrap();
        let g = similarity_matrix(&x, None).unwrap();
        assert!((g.sigma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn similarity_all_coincident_defaults_sigma_one() {
        let x = DenseMatrix::from_vec(2, 1, vec![3.0, 3.0]).unwrap();
        let g = similarity_matrix(&x, None).unwrap();
        assert_eq!(g.sigma, 1.0);
    }

    #[test]
    fn similarity_rejects_bad_sigma_and_tiny_input() {
        let x = DenseMatrix::from_vec(2, 1, vec![0.0, 1.0]).unwrap();
        assert!(similarity_matrix(&x, Some(-1.0)).is_err());
        let single = DenseMatrix::from_vec(1, 1, vec![0.0]).unwrap();
        assert!(matches!(
            similarity_matrix(&single, None),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn similarity_monotone_in_distance() {
        let x = DenseMatrix::from_vec(3, 1, vec![0.0, 1.0, 5.0]).unwrap();
        let g = similarity_matrix(&x, Some(2.0)).unwrap();
        assert!(g.w.get(0, 1) > g.w.get(0, 2));
        for i in 0..3 {
            for j in 0..3 {
                assert!(g.w.get(i, j) >= 0.0 && g.w.get(i, j) <= 1.0);
                assert_eq!(g.w.get(i, j), g.w.get(j, i));
            }
        }
    }

    #[test]
    fn degree_matrix_examples() {
        let g = graph_from_weights(DenseMatrix::from_vec(2, 2, vec![0.0, 0.5, 0.5, 0.0]).unwrap());
        let d = degree_matrix(&g);
        assert_eq!(d.get(0, 0), 0.5);
        assert_eq!(d.get(1, 1), 0.5);
        assert_eq!(d.get(0, 1), 0.0);

        let zero = graph_from_weights(DenseMatrix::zeros(3, 3));
        assert_eq!(degree_matrix(&zero), DenseMatrix::zeros(3, 3));

        let complete = two_cliques(3, 0, 0);
        let d = degree_matrix(&complete);
        for i in 0..3 {
            assert_eq!(d.get(i, i), 2.0);
        }
    }

    #[test]
    fn laplacian_unnormalized_and_row_sums() {
        let g = graph_from_weights(DenseMatrix::from_vec(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap());
        let l = laplacian(&g, LaplacianKind::Unnormalized).unwrap();
        assert_eq!(
            l,
            DenseMatrix::from_vec(2, 2, vec![1.0, -1.0, -1.0, 1.0]).unwrap()
        );

        let g2 = two_cliques(3, 3, 1);
        let l2 = laplacian(&g2, LaplacianKind::Unnormalized).unwrap();
        for i in 0..6 {
            let sum: f64 = l2.row(i).iter().sum();
            assert!(sum.abs() <= 1e-12);
        }
    }

    #[test]
    fn laplacian_random_walk_is_row_stochastic() {
        let g = graph_from_weights(DenseMatrix::from_vec(2, 2, vec![0.0, 0.5, 0.5, 0.0]).unwrap());
        let p = laplacian(&g, LaplacianKind::RandomWalk).unwrap();
        assert_eq!(
            p,
            DenseMatrix::from_vec(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap()
        );
    }

    #[test]
    fn laplacian_isolated_node_rejected_for_normalized() {
        let mut w = DenseMatrix::zeros(3, 3);
        w.set(0, 1, 1.0);
        w.set(1, 0, 1.0);
        let g = graph_from_weights(w);
        assert!(matches!(
            laplacian(&g, LaplacianKind::Symmetric),
            Err(Error::IsolatedNode { index: 2 })
        ));
        assert!(laplacian(&g, LaplacianKind::Unnormalized).is_ok());
    }

    #[test]
    fn laplacian_zero_multiplicity_counts_components() {
        for components in 1..=3usize {
            let size = 3;
            let n = components * size;
            let mut w = DenseMatrix::zeros(n, n);
            for c in 0..components {
                for i in 0..size {
                    for j in 0..size {
                        if i != j {
                            w.set(c * size + i, c * size + j, 1.0);
                        }
                    }
                }
            }
            let l = laplacian(&graph_from_weights(w), LaplacianKind::Unnormalized).unwrap();
            let eig = sym_eig(&l).unwrap();
            let zeros = eig.eigenvalues.iter().filter(|&&v| v.abs() < 1e-9).count();
            assert_eq!(zeros, components);
            assert!(eig.eigenvalues[0] >= -1e-10, "PSD violated");
        }
    }

    #[test]
    fn embed_disconnected_cliques_gives_indicator_rows() {
        let g = two_cliques(2, 2, 0);
        let emb = spectral_embed(&g, 2, SpectralAlgorithm::Basic).unwrap();
        // Rows within a component coincide; across components they differ.
        let d01 = squared_distance(emb.u.row(0), emb.u.row(1));
        let d23 = squared_distance(emb.u.row(2), emb.u.row(3));
        let d02 = squared_distance(emb.u.row(0), emb.u.row(2));
        assert!(d01 < 1e-16 && d23 < 1e-16);
        assert!(d02 > 1e-2);
    }

    #[test]
    fn embed_njw_rows_unit_norm() {
        let g = two_cliques(3, 3, 1);
        let emb = spectral_embed(&g, 2, SpectralAlgorithm::Njw).unwrap();
        for i in 0..6 {
            let norm: f64 = emb.u.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn embed_ms_leading_column_constant() {
        let g = two_cliques(3, 2, 1);
        let emb = spectral_embed(&g, 2, SpectralAlgorithm::Ms).unwrap();
        let lead = emb.u.column(0);
        for v in &lead {
            assert!(
                (v - lead[0]).abs() < 1e-8,
                "leading eigenvector not constant"
            );
        }
        // And the leading eigenvalue of P is 1.
        let (s, _) = symmetrized_random_walk(&g).unwrap();
        let eig = sym_eig(&s).unwrap();
        assert!((eig.eigenvalues[4] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn embed_k_out_of_range() {
        let g = two_cliques(2, 2, 0);
        assert!(matches!(
            spectral_embed(&g, 5, SpectralAlgorithm::Basic),
            Err(Error::KTooLarge { .. })
        ));
        assert!(matches!(
            spectral_embed(&g, 1, SpectralAlgorithm::Basic),
            Err(Error::KTooLarge { .. })
        ));
    }

    #[test]
    fn kmeans_two_separated_pairs() {
        let y = DenseMatrix::from_vec(4, 1, vec![0.0, 0.1, 10.0, 10.1]).unwrap();
        let got = kmeans(&y, 2, 7).unwrap();
        assert_eq!(got.labels[0], got.labels[1]);
        assert_eq!(got.labels[2], got.labels[3]);
        assert_ne!(got.labels[0], got.labels[2]);
        assert!((got.inertia - 0.01).abs() < 1e-12);
    }

    #[test]
    fn kmeans_k_equals_n_and_k_one() {
        let y = DenseMatrix::from_vec(3, 1, vec![1.0, 5.0, 9.0]).unwrap();
        let singletons = kmeans(&y, 3, 1).unwrap();
        assert_eq!(singletons.inertia, 0.0);
        let mut sorted = singletons.labels.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2]);

        let one = kmeans(&y, 1, 1).unwrap();
        assert_eq!(one.labels, vec![0, 0, 0]);
        assert!((one.centroids.get(0, 0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn kmeans_canonical_labels_and_determinism() {
        let y = DenseMatrix::from_vec(6, 1, vec![10.0, 10.1, 0.0, 0.1, 10.2, 0.2]).unwrap();
        let a = kmeans(&y, 2, 3).unwrap();
        // First sample always gets label 0 under first-occurrence order.
        assert_eq!(a.labels[0], 0);
        for seed in [0u64, 1, 99, 12345] {
            let b = kmeans(&y, 2, seed).unwrap();
            assert_eq!(
                a.labels, b.labels,
                "seed {seed} changed well-separated labels"
            );
        }
    }

    #[test]
    fn kmeans_fixed_point_and_monotone_inertia() {
        let mut rng = Rng::new(77);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)])
            .collect();
        let y = DenseMatrix::from_rows(&rows).unwrap();
        let first = kmeans(&y, 5, 11).unwrap();
        // Reassigning from the returned centroids changes nothing.
        let mut labels = vec![0usize; 40];
        let centroids: Vec<Vec<f64>> = (0..5).map(|c| first.centroids.row(c).to_vec()).collect();
        assign_labels(&y, &centroids, &mut labels);
        assert_eq!(labels, first.labels);
    }

    #[test]
    fn cut_objectives_hand_values() {
        // 2-node unit-weight graph.
        let g = graph_from_weights(DenseMatrix::from_vec(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap());
        let split = vec![true, false];
        assert!((cut_objective(&g, &split, CutObjective::Rcut).unwrap() - 2.0).abs() < 1e-12);
        assert!((cut_objective(&g, &split, CutObjective::Ncut).unwrap() - 2.0).abs() < 1e-12);

        // K4, 2-2 split: cut = 4, rcut = 4.
        let k4 = two_cliques(4, 0, 0);
        let split = vec![true, true, false, false];
        assert!((cut_objective(&k4, &split, CutObjective::Rcut).unwrap() - 4.0).abs() < 1e-12);

        // Disconnected components as sides: all objectives 0.
        let disc = two_cliques(3, 3, 0);
        let sides = vec![true, true, true, false, false, false];
        for obj in [CutObjective::Ncut, CutObjective::Rcut, CutObjective::Mcut] {
            assert_eq!(cut_objective(&disc, &sides, obj).unwrap(), 0.0);
        }
    }

    #[test]
    fn cut_objective_degenerate_and_zero_volume() {
        let g = two_cliques(2, 2, 1);
        assert!(matches!(
            cut_objective(&g, &[true, true, true, true], CutObjective::Rcut),
            Err(Error::DegeneratePartition)
        ));
        // Star: center vs leaves has assoc(leaves) = 0 under Mcut.
        let mut w = DenseMatrix::zeros(4, 4);
        for leaf in 1..4 {
            w.set(0, leaf, 1.0);
            w.set(leaf, 0, 1.0);
        }
        let star = graph_from_weights(w);
        assert!(matches!(
            cut_objective(&star, &[true, false, false, false], CutObjective::Mcut),
            Err(Error::ZeroVolume)
        ));
    }

    #[test]
    fn two_way_partition_bridged_cliques() {
        let g = two_cliques(3, 3, 1);
        let ncut = two_way_partition(&g, TwoWayCriterion::SmNcut).unwrap();
        assert_eq!(ncut.partition, vec![true, true, true, false, false, false]);

        let rcut = two_way_partition(&g, TwoWayCriterion::KvvRcut).unwrap();
        assert_eq!(rcut.partition, vec![true, true, true, false, false, false]);
        assert!((rcut.value - 2.0 / 3.0).abs() < 1e-10);

        let mcut = two_way_partition(&g, TwoWayCriterion::Mcut).unwrap();
        assert_eq!(mcut.partition, vec![true, true, true, false, false, false]);
    }

    #[test]
    fn two_way_partition_symmetric_barbell_balanced() {
        let g = two_cliques(4, 4, 1);
        let cut = two_way_partition(&g, TwoWayCriterion::SmNcut).unwrap();
        let size_a = cut.partition.iter().filter(|&&p| p).count();
        assert_eq!(size_a, 4);
        // Side A contains the lowest sorted index by construction.
        assert!(cut.partition[0] || cut.partition[4]);
    }

    #[test]
    fn two_way_partition_rejects_disconnected() {
        let g = two_cliques(3, 3, 0);
        assert!(matches!(
            two_way_partition(&g, TwoWayCriterion::SmNcut),
            Err(Error::Disconnected { .. })
        ));
    }

    #[test]
    fn pf_partition_splits_block_diagonal() {
        // Unequal disconnected cliques: the Perron vector is supported on
        // the larger block only.
        let g = two_cliques(3, 2, 0);
        let cut = two_way_partition(&g, TwoWayCriterion::Pf).unwrap();
        let side_of_0 = cut.partition[0];
        assert_eq!(cut.partition[1], side_of_0);
        assert_eq!(cut.partition[2], side_of_0);
        assert_ne!(cut.partition[3], side_of_0);
        assert_ne!(cut.partition[4], side_of_0);
        assert_eq!(cut.value, 0.0);
    }

    #[test]
    fn sweep_matches_bruteforce_on_small_graphs() {
        // Exhaustive threshold sweep must return the best threshold
        // partition of the same Fiedler vector.
        let g = two_cliques(3, 3, 1);
        let (s, deg) = symmetrized_random_walk(&g).unwrap();
        let eig = sym_eig(&s).unwrap();
        let v = eig.eigenvectors.column(4);
        let fiedler: Vec<f64> = v.iter().zip(&deg).map(|(x, d)| x / d.sqrt()).collect();

        let mut order: Vec<usize> = (0..6).collect();
        order.sort_by(|&a, &b| fiedler[a].total_cmp(&fiedler[b]).then(a.cmp(&b)));
        let mut best = f64::INFINITY;
        for t in 0..5 {
            let mut part = vec![false; 6];
            for &i in &order[..=t] {
                part[i] = true;
            }
            if let Ok(value) = cut_objective(&g, &part, CutObjective::Ncut) {
                best = best.min(value);
            }
        }
        let swept = two_way_partition(&g, TwoWayCriterion::SmNcut).unwrap();
        assert!((swept.value - best).abs() < 1e-12);
    }

    #[test]
    fn sweep_tracks_global_bruteforce_on_small_graphs() {
        // The sweep is a relaxation: it can never beat the global minimizer
        // over all bipartitions, and on small dense graphs it should stay
        // close. The ratio is reported, not pinned.
        let mut rng = Rng::new(2040);
        let mut worst_ratio = 1.0f64;
        for _ in 0..15 {
            let n = 4 + rng.index(9);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)])
                .collect();
            let x = DenseMatrix::from_rows(&rows).unwrap();
            // Gaussian similarities are strictly positive: connected.
            let g = similarity_matrix(&x, Some(1.0)).unwrap();
            for (criterion, objective) in [
                (TwoWayCriterion::SmNcut, CutObjective::Ncut),
                (TwoWayCriterion::KvvRcut, CutObjective::Rcut),
                (TwoWayCriterion::Mcut, CutObjective::Mcut),
            ] {
                let swept = two_way_partition(&g, criterion).unwrap();
                let mut global = f64::INFINITY;
                for mask in 1u32..(1 << n) - 1 {
                    let partition: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
                    if let Ok(value) = cut_objective(&g, &partition, objective) {
                        global = global.min(value);
                    }
                }
                assert!(
                    swept.value >= global - 1e-12,
                    "sweep beat the global optimum: {} < {}",
                    swept.value,
                    global
                );
                if global > 0.0 {
                    worst_ratio = worst_ratio.max(swept.value / global);
                }
            }
        }
        println!("sweep vs global brute force: worst ratio {worst_ratio:.4}");
    }

    #[test]
    fn spectral_cluster_separated_blobs() {
        let mut rng = Rng::new(42);
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for b in 0..2 {
            for _ in 0..20 {
                let cx = if b == 0 { 0.0 } else { 10.0 };
                rows.push(vec![cx + 0.5 * rng.normal(), 0.5 * rng.normal()]);
                truth.push(b);
            }
        }
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let got = spectral_cluster(&x, 2, SpectralAlgorithm::Njw, None, 9).unwrap();
        // Perfect agreement up to relabeling.
        for i in 0..40 {
            for j in 0..40 {
                assert_eq!(
                    got.labels[i] == got.labels[j],
                    truth[i] == truth[j],
                    "samples {i},{j} disagree with ground truth"
                );
            }
        }
    }

    #[test]
    fn spectral_cluster_duplicates_share_labels() {
        let mut rows = Vec::new();
        for i in 0..6 {
            let point = vec![i as f64, (i * i) as f64 * 0.1];
            rows.push(point.clone());
            rows.push(point);
        }
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let got = spectral_cluster(&x, 3, SpectralAlgorithm::Basic, Some(1.0), 5).unwrap();
        for pair in 0..6 {
            assert_eq!(got.labels[2 * pair], got.labels[2 * pair + 1]);
        }
    }

    #[test]
    fn spectral_cluster_singletons_when_k_equals_n() {
        let x = DenseMatrix::from_vec(3, 1, vec![0.0, 5.0, 9.0]).unwrap();
        let got = spectral_cluster(&x, 3, SpectralAlgorithm::Basic, Some(1.0), 3).unwrap();
        let mut sorted = got.labels.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2]);
    }

    #[test]
    fn spectral_cluster_deterministic_bytes() {
        let x = DenseMatrix::from_vec(8, 1, vec![0.0, 0.2, 0.1, 5.0, 5.1, 5.2, 9.9, 10.0]).unwrap();
        let a = spectral_cluster(&x, 3, SpectralAlgorithm::Njw, None, 17).unwrap();
        let b = spectral_cluster(&x, 3, SpectralAlgorithm::Njw, None, 17).unwrap();
        assert_eq!(a, b);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn points(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
            prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 2..max_n)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(40))]

            #[test]
            fn similarity_invariants(rows in points(15)) {
                let x = DenseMatrix::from_rows(&rows).unwrap();
                let g = similarity_matrix(&x, None).unwrap();
                let n = rows.len();
                for i in 0..n {
                    prop_assert_eq!(g.w.get(i, i), 0.0);
                    for j in 0..n {
                        let w = g.w.get(i, j);
                        prop_assert!((0.0..=1.0).contains(&w));
                        prop_assert_eq!(w, g.w.get(j, i));
                    }
                }
                // Monotone decreasing in pairwise distance.
                for i in 0..n {
                    for j in 0..n {
                        for l in 0..n {
                            if i == j || i == l {
                                continue;
                            }
                            let dj = squared_distance(&rows[i], &rows[j]);
                            let dl = squared_distance(&rows[i], &rows[l]);
                            if dj < dl {
                                prop_assert!(g.w.get(i, j) >= g.w.get(i, l));
                            }
                        }
                    }
                }
            }

            #[test]
            fn kmeans_contract(rows in points(20), k in 1usize..5, seed in 0u64..1000) {
                prop_assume!(k <= rows.len());
                let y = DenseMatrix::from_rows(&rows).unwrap();
                let got = kmeans(&y, k, seed).unwrap();
                prop_assert_eq!(got.labels.len(), rows.len());
                // Every cluster id below k appears at least once.
                for c in 0..k {
                    prop_assert!(got.labels.contains(&c), "cluster {} empty", c);
                }
                // Inertia is exactly the summed squared distance to the
                // assigned centroids.
                let recomputed: f64 = (0..rows.len())
                    .map(|i| squared_distance(y.row(i), got.centroids.row(got.labels[i])))
                    .sum();
                prop_assert!((got.inertia - recomputed).abs() <= 1e-9 * (1.0 + recomputed));
            }
        }
    }
}
