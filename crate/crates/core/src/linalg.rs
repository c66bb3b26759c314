//! Small dense linear-algebra helpers shared by the solver kernels:
//! Hermitian eigendecompositions, PSD projection, and the mapping between
//! complex Hermitian matrices and the scaled-triangle vectorization of
//! their real symmetric embedding.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// `e^{j x}`.
#[inline]
pub fn cis(x: f64) -> Complex64 {
    Complex64::new(x.cos(), x.sin())
}

/// Force exact Hermitian symmetry: `(x + x^H) / 2`.
pub fn hermitize(x: &CMat) -> CMat {
    let mut out = x.clone();
    let n = x.nrows();
    for i in 0..n {
        out[(i, i)] = Complex64::new(x[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = (x[(i, j)] + x[(j, i)].conj()) * 0.5;
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    out
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub fn hermitian_eigen(x: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitize(x));
    let n = x.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Projection onto the Hermitian PSD cone (negative eigenvalues clipped).
pub fn psd_project(x: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eigen(x);
    let n = x.nrows();
    let mut out = CMat::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            let u = vecs.column(i);
            // out += v * u u^H
            for r in 0..n {
                for c in 0..n {
                    out[(r, c)] += Complex64::new(v, 0.0) * u[r] * u[c].conj();
                }
            }
        }
    }
    hermitize(&out)
}

/// Trace of a Hermitian matrix (real part of the diagonal sum).
pub fn trace_re(x: &CMat) -> f64 {
    (0..x.nrows()).map(|i| x[(i, i)].re).sum()
}

/// `Re Tr(A X)` for Hermitian `A`, `X`.
pub fn inner_re(a: &CMat, x: &CMat) -> f64 {
    debug_assert_eq!(a.shape(), x.shape());
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let p = a[(i, j)] * x[(j, i)];
            acc += p.re;
        }
    }
    acc
}

/// Length of the scaled upper-triangle vectorization of an `n x n`
/// symmetric matrix.
#[inline]
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Index of entry `(i, j)` (`i <= j`) in the column-stacked upper triangle.
#[inline]
pub fn svec_index(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    j * (j + 1) / 2 + i
}

/// Scaled-triangle vectorization of a real symmetric matrix: upper triangle
/// stacked column-wise, off-diagonal entries multiplied by sqrt(2), so that
/// `svec(a) . svec(b) = Tr(a b)`.
pub fn svec(a: &DMatrix<f64>) -> DVector<f64> {
    let n = a.nrows();
    let s2 = 2f64.sqrt();
    let mut out = DVector::zeros(svec_len(n));
    for j in 0..n {
        for i in 0..=j {
            out[svec_index(i, j)] = if i == j { a[(i, j)] } else { a[(i, j)] * s2 };
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], n: usize) -> DMatrix<f64> {
    let s2 = 2f64.sqrt();
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let val = v[svec_index(i, j)];
            if i == j {
                out[(i, j)] = val;
            } else {
                out[(i, j)] = val / s2;
                out[(j, i)] = val / s2;
            }
        }
    }
    out
}

/// Real symmetric embedding of a Hermitian matrix:
/// `[[Re X, -Im X], [Im X, Re X]]`. `X` is PSD iff the embedding is PSD,
/// and `Tr(A X) = Tr(embed(A) embed(X)) / 2` for Hermitian `A`.
pub fn realify(x: &CMat) -> DMatrix<f64> {
    let n = x.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = x[(i, j)];
            out[(i, j)] = v.re;
            out[(n + i, n + j)] = v.re;
            out[(i, n + j)] = -v.im;
            out[(n + i, j)] = v.im;
        }
    }
    out
}

/// Recover the Hermitian matrix from a (possibly unstructured) real
/// symmetric `2n x 2n` matrix by averaging the two embedded copies.
pub fn unrealify(y: &DMatrix<f64>, n: usize) -> CMat {
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (y[(i, j)] + y[(n + i, n + j)]);
            let im = 0.5 * (y[(n + i, j)] - y[(i, n + j)]);
            out[(i, j)] = Complex64::new(re, im);
        }
    }
    hermitize(&out)
}

/// Factor a negative-semidefinite real symmetric matrix as `R = -L L^T`.
/// Eigenvalues above `tol` are an error (the matrix is not NSD).
pub fn nsd_factor(r: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let n = r.nrows();
    let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (r[(i, j)] + r[(j, i)]));
    let eig = SymmetricEigen::new(sym);
    let mut cols = Vec::new();
    for i in 0..n {
        let lam = eig.eigenvalues[i];
        if lam > tol {
            return Err(Error::Numerical(format!(
                "curvature matrix has positive eigenvalue {lam:.3e}"
            )));
        }
        if lam < 0.0 {
            cols.push(eig.eigenvectors.column(i) * (-lam).sqrt());
        }
    }
    let mut l = DMatrix::zeros(n, cols.len().max(1));
    for (c, col) in cols.iter().enumerate() {
        l.set_column(c, col);
    }
    Ok(l)
}

/// Draw a standard circular complex Gaussian vector (entries CN(0,1)).
pub fn standard_cn_vector(n: usize, rng: &mut impl rand::Rng) -> CVec {
    use rand_distr::{Distribution, StandardNormal};
    let scale = 0.5f64.sqrt();
    CVec::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * scale, im * scale)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let a = CMat::from_fn(n, n, |_, _| {
            Complex64::new(rand::Rng::gen::<f64>(&mut rng) - 0.5, rand::Rng::gen::<f64>(&mut rng) - 0.5)
        });
        hermitize(&(&a + a.adjoint()))
    }

    #[test]
    fn svec_inner_product_matches_trace() {
        let n = 5;
        let x = random_hermitian(n, 1);
        let y = random_hermitian(n, 2);
        let xr = realify(&x);
        let yr = realify(&y);
        let lhs = svec(&xr).dot(&svec(&yr));
        let rhs = 2.0 * inner_re(&x, &y);
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn realify_roundtrip() {
        let x = random_hermitian(4, 3);
        let back = unrealify(&realify(&x), 4);
        assert!((&back - &x).norm() < 1e-12);
    }

    #[test]
    fn psd_projection_clips_negative_part() {
        let x = random_hermitian(6, 4);
        let p = psd_project(&x);
        let (vals, _) = hermitian_eigen(&p);
        assert!(vals.iter().all(|&v| v >= -1e-10));
        // projection of a PSD matrix is itself
        let q = psd_project(&p);
        assert!((&q - &p).norm() < 1e-9);
    }

    #[test]
    fn eigen_sorted_descending() {
        let x = random_hermitian(5, 7);
        let (vals, vecs) = hermitian_eigen(&x);
        for w in vals.windows(2) {
            assert!(w[0] >= w[1]);
        }
        // reconstruct
        let mut recon = CMat::zeros(5, 5);
        for i in 0..5 {
            let u = vecs.column(i);
            recon += (&u * u.adjoint()) * Complex64::new(vals[i], 0.0);
        }
        assert!((&recon - &x).norm() < 1e-10);
    }
}
