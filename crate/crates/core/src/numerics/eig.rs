//! Symmetric eigendecomposition: Householder tridiagonalization followed by
//! implicit-shift QL iteration (the classic EISPACK `tred2`/`tql2` pair).
//! Dense, O(n^3), dependency-free — adequate for the matrix sizes this crate
//! works at (hundreds to low thousands).

use crate::error::{Error, Result};
use crate::numerics::matrix::{DenseMatrix, DenseVector};

/// Maximum QL sweeps per eigenvalue before giving up.
const MAX_SWEEPS: usize = 50;

/// Relative symmetry tolerance: `max |A - A^T| <= 1e-9 * max|A|`.
const SYMMETRY_RTOL: f64 = 1e-9;

/// Component threshold for the eigenvector sign convention.
const SIGN_EPS: f64 = 1e-12;

/// Eigenvalues ascending; eigenvector column `j` pairs with eigenvalue `j`.
///
/// Each eigenvector has unit 2-norm and a fixed sign: its first component
/// with magnitude above 1e-12 is positive. The convention pins down the
/// otherwise arbitrary eigenvector sign so identical inputs give identical
/// output bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: DenseVector,
    pub eigenvectors: DenseMatrix,
}

/// Decompose a symmetric matrix.
pub fn sym_eig(a: &DenseMatrix) -> Result<EigenDecomposition> {
    let n = a.rows();
    if n == 0 {
        return Err(Error::EmptyInput("0x0 matrix".into()));
    }
    if a.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            a.rows(),
            a.cols()
        )));
    }
    let deviation = a.symmetry_deviation();
    if deviation > SYMMETRY_RTOL * a.max_abs() {
        return Err(Error::NotSymmetric {
            max_deviation: deviation,
        });
    }

    // v starts as a copy of A and is overwritten with the eigenvectors.
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];

    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;
    sort_ascending(&mut v, &mut d);
    apply_sign_convention(&mut v);

    let mut vectors = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            vectors.set(i, j, v[i][j]);
        }
    }
    Ok(EigenDecomposition {
        eigenvalues: d,
        eigenvectors: vectors,
    })
}

/// Householder reduction of `v` (initially the input matrix) to tridiagonal
/// form; diagonal into `d`, subdiagonal into `e`, transformations
/// accumulated in `v`.
fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    d[..n].copy_from_slice(&v[n - 1][..n]);

    for i in (1..n).rev() {
        // Scale to avoid under/overflow.
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            // Generate Householder vector.
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            // Apply similarity transformation to remaining columns.
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..n.saturating_sub(1) {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on the tridiagonal form.
fn tql2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let eps = 2.0f64.powi(-52);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());

        // Find small subdiagonal element.
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m >= n {
            m = n - 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_SWEEPS {
                    return Err(Error::NoConvergence(format!(
                        "QL iteration exceeded {MAX_SWEEPS} sweeps at eigenvalue {l}"
                    )));
                }

                // Compute implicit shift.
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                // Implicit QL transformation.
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    // Accumulate transformation.
                    for row in v.iter_mut().take(n) {
                        h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn sort_ascending(v: &mut [Vec<f64>], d: &mut [f64]) {
    let n = d.len();
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().take(n).skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for row in v.iter_mut().take(n) {
                row.swap(i, k);
            }
        }
    }
}

fn apply_sign_convention(v: &mut [Vec<f64>]) {
    let n = v.len();
    for j in 0..n {
        let leading = (0..n).map(|i| v[i][j]).find(|x| x.abs() > SIGN_EPS);
        if let Some(x) = leading {
            if x < 0.0 {
                for row in v.iter_mut() {
                    row[j] = -row[j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn residual_inf(a: &DenseMatrix, eig: &EigenDecomposition) -> f64 {
        let n = a.rows();
        let mut worst = 0.0f64;
        for j in 0..n {
            let v = eig.eigenvectors.column(j);
            let av = a.matvec(&v).unwrap();
            for i in 0..n {
                worst = worst.max((av[i] - eig.eigenvalues[j] * v[i]).abs());
            }
        }
        worst
    }

    pub(crate) fn random_symmetric(n: usize, rng: &mut Rng) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let x = rng.uniform(-5.0, 5.0);
                a.set(i, j, x);
                a.set(j, i, x);
            }
        }
        a
    }

    #[test]
    fn two_node_laplacian_spectrum() {
        let a = DenseMatrix::from_vec(2, 2, vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        let eig = sym_eig(&a).unwrap();
        assert!((eig.eigenvalues[0] - 0.0).abs() < 1e-12);
        assert!((eig.eigenvalues[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_spectrum() {
        let eig = sym_eig(&DenseMatrix::identity(3)).unwrap();
        for lambda in &eig.eigenvalues {
            assert!((lambda - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn path_graph_p3_spectrum_and_fiedler() {
        // Characteristic polynomial by hand: lambda (lambda - 1)(lambda - 3).
        let a = DenseMatrix::from_vec(3, 3, vec![1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0])
            .unwrap();
        let eig = sym_eig(&a).unwrap();
        let expected = [0.0, 1.0, 3.0];
        for (got, want) in eig.eigenvalues.iter().zip(expected) {
            assert!((got - want).abs() < 1e-10, "got {got}, want {want}");
        }
        // Fiedler vector is (1, 0, -1)/sqrt(2) under the sign convention.
        let fiedler = eig.eigenvectors.column(1);
        let s = 1.0 / 2.0f64.sqrt();
        assert!((fiedler[0] - s).abs() < 1e-10);
        assert!(fiedler[1].abs() < 1e-10);
        assert!((fiedler[2] + s).abs() < 1e-10);
    }

    #[test]
    fn rejects_asymmetric() {
        let a = DenseMatrix::from_vec(2, 2, vec![1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(sym_eig(&a), Err(Error::NotSymmetric { .. })));
        // The tolerance is relative to the matrix magnitude.
        let small = DenseMatrix::from_vec(2, 2, vec![1e-3, 1e-11, 0.0, 1e-3]).unwrap();
        assert!(matches!(sym_eig(&small), Err(Error::NotSymmetric { .. })));
        let within = DenseMatrix::from_vec(2, 2, vec![1.0, 1e-10, 0.0, 1.0]).unwrap();
        assert!(sym_eig(&within).is_ok());
    }

    #[test]
    fn residual_trace_orthonormality_on_random_matrices() {
        let mut rng = Rng::new(2024);
        for trial in 0..40 {
            let n = 2 + rng.index(30);
            let a = random_symmetric(n, &mut rng);
            let eig = sym_eig(&a).unwrap();
            let scale = 1.0 + a.max_abs();

            assert!(
                residual_inf(&a, &eig) <= 1e-8 * scale,
                "residual too large on trial {trial} (n={n})"
            );

            let sum: f64 = eig.eigenvalues.iter().sum();
            assert!(
                (sum - a.trace()).abs() <= 1e-8 * n as f64 * a.max_abs().max(1.0),
                "trace drift on trial {trial}"
            );

            let vt_v = eig
                .eigenvectors
                .transpose()
                .matmul(&eig.eigenvectors)
                .unwrap();
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (vt_v.get(i, j) - want).abs() <= 1e-8,
                        "orthonormality failed on trial {trial}"
                    );
                }
            }
        }
    }

    #[test]
    fn deterministic_output() {
        let mut rng = Rng::new(5);
        let a = random_symmetric(12, &mut rng);
        let e1 = sym_eig(&a).unwrap();
        let e2 = sym_eig(&a).unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn degenerate_eigenspace_still_orthonormal() {
        // Two disconnected edges: eigenvalue 0 with multiplicity 2.
        let a = DenseMatrix::from_vec(
            4,
            4,
            vec![
                1.0, -1.0, 0.0, 0.0, //
                -1.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, -1.0, //
                0.0, 0.0, -1.0, 1.0,
            ],
        )
        .unwrap();
        let eig = sym_eig(&a).unwrap();
        assert!(eig.eigenvalues[0].abs() < 1e-12);
        assert!(eig.eigenvalues[1].abs() < 1e-12);
        assert!((eig.eigenvalues[2] - 2.0).abs() < 1e-12);
        assert!(residual_inf(&a, &eig) < 1e-10);
    }
}
