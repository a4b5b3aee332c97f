//! Deterministic dense linear algebra: symmetric eigendecomposition,
//! column standardization, and correlation-matrix PCA preprocessing.
//!
//! Everything here is a pure function over immutable inputs — no RNG, no
//! shared state — so identical input bytes give identical output bytes.

mod eig;
mod matrix;

pub use eig::{sym_eig, EigenDecomposition};
pub use matrix::{squared_distance, DenseMatrix, DenseVector};

use crate::error::{Error, Result};

/// Fitted PCA preprocessing model.
///
/// PCA here is correlation-matrix PCA: inputs are standardized first, then
/// the eigenvectors of the correlation matrix are taken from largest
/// eigenvalue down. `components` stores every direction; transforms use the
/// first `retained` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub means: DenseVector,
    pub scales: DenseVector,
    /// Columns are principal directions, ordered by decreasing eigenvalue.
    pub components: DenseMatrix,
    /// Fraction of total variance along each component, same order.
    pub explained_variance_ratio: DenseVector,
    /// Number of components retained to reach the variance threshold.
    pub retained: usize,
}

/// Standardize columns to mean 0 and sample standard deviation 1 (ddof = 1).
///
/// Zero-variance columns map to all-zero and their scale is recorded as 1,
/// so dead features pass through instead of erroring.
pub fn standardize(x: &DenseMatrix) -> Result<(DenseMatrix, DenseVector, DenseVector)> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::EmptyInput(format!(
            "standardize needs at least 2 rows, got {n}"
        )));
    }
    let d = x.cols();
    let mut means = vec![0.0; d];
    let mut scales = vec![1.0; d];
    for j in 0..d {
        let mean = (0..n).map(|i| x.get(i, j)).sum::<f64>() / n as f64;
        means[j] = mean;
        let ss: f64 = (0..n)
            .map(|i| {
                let c = x.get(i, j) - mean;
                c * c
            })
            .sum();
        let var = ss / (n - 1) as f64;
        if var > 0.0 {
            scales[j] = var.sqrt();
        }
    }
    let mut out = DenseMatrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            out.set(i, j, (x.get(i, j) - means[j]) / scales[j]);
        }
    }
    Ok((out, means, scales))
}

/// Fit correlation-matrix PCA, retaining the smallest component count whose
/// cumulative explained variance reaches `variance_threshold`.
pub fn pca_fit(x: &DenseMatrix, variance_threshold: f64) -> Result<PcaModel> {
    if !(variance_threshold > 0.0 && variance_threshold <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "variance_threshold".into(),
            legal: "(0, 1]".into(),
        });
    }
    if x.cols() == 0 {
        return Err(Error::EmptyInput("pca on 0 columns".into()));
    }
    let (standardized, means, scales) = standardize(x)?;
    let n = x.rows();
    let d = x.cols();

    // Correlation matrix of x = covariance of the standardized data.
    let mut corr = DenseMatrix::zeros(d, d);
    for a in 0..d {
        for b in a..d {
            let mut acc = 0.0;
            for i in 0..n {
                acc += standardized.get(i, a) * standardized.get(i, b);
            }
            let value = acc / (n - 1) as f64;
            corr.set(a, b, value);
            corr.set(b, a, value);
        }
    }

    let eig = sym_eig(&corr)?;

    // Largest eigenvalue first; clamp the tiny negatives QL can produce.
    let mut components = DenseMatrix::zeros(d, d);
    let mut variances = vec![0.0; d];
    for (rank, src) in (0..d).rev().enumerate() {
        variances[rank] = eig.eigenvalues[src].max(0.0);
        for i in 0..d {
            components.set(i, rank, eig.eigenvectors.get(i, src));
        }
    }
    let total: f64 = variances.iter().sum();
    let ratios: DenseVector = if total > 0.0 {
        variances.iter().map(|v| v / total).collect()
    } else {
        vec![0.0; d]
    };

    let mut retained = d;
    let mut cumulative = 0.0;
    for (idx, r) in ratios.iter().enumerate() {
        cumulative += r;
        if cumulative >= variance_threshold - 1e-12 {
            retained = idx + 1;
            break;
        }
    }

    Ok(PcaModel {
        means,
        scales,
        components,
        explained_variance_ratio: ratios,
        retained,
    })
}

/// Project `x` onto the retained principal components: standardized `x`
/// times the first `retained` component columns.
pub fn pca_transform(model: &PcaModel, x: &DenseMatrix) -> Result<DenseMatrix> {
    let d = model.means.len();
    if x.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "pca model expects {} columns, got {}",
            d,
            x.cols()
        )));
    }
    let n = x.rows();
    let mut standardized = DenseMatrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            standardized.set(i, j, (x.get(i, j) - model.means[j]) / model.scales[j]);
        }
    }
    let leading = model.components.slice_cols(0, model.retained);
    standardized.matmul(&leading)
}
