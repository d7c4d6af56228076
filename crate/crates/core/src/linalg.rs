//! Small dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector};

pub type Complex64 = Complex<f64>;
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex::new(re, im)
}

pub fn real(re: f64) -> Complex64 {
    Complex::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Builds a complex matrix from real row-major data.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    assert_eq!(data.len(), rows * cols);
    CMatrix::from_fn(rows, cols, |i, j| real(data[i * cols + j]))
}

/// `sigma` counts as nonzero relative to `sigma_max` under the squared relative threshold.
pub fn is_significant(sigma: f64, sigma_max: f64, tol: f64) -> bool {
    sigma_max > 0.0 && sigma * sigma > tol * sigma_max * sigma_max
}

/// Singular values in descending order; `min(rows, cols)` of them.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Spectral norm (largest singular value).
pub fn op_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Smallest singular value of a square matrix (0 for empty).
pub fn sigma_min(a: &CMatrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

pub fn max_abs_entry(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and matching
/// unit eigenvectors as columns.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(a.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function(a: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(a);
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, k| vectors[(r, k)] * f(values[k]));
    scaled * vectors.adjoint()
}

pub fn inverse(a: &CMatrix) -> Option<CMatrix> {
    a.clone().try_inverse()
}

/// Orthonormal basis (as columns) of the column span of `a`.
pub fn orthonormal_basis(a: &CMatrix, tol: f64) -> CMatrix {
    let dim = a.nrows();
    if a.ncols() == 0 || dim == 0 {
        return CMatrix::zeros(dim, 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| is_significant(svd.singular_values[k], smax, tol))
        .collect();
    CMatrix::from_fn(dim, keep.len(), |r, k| u[(r, keep[k])])
}

/// Numerical rank under the squared relative threshold.
pub fn rank(a: &CMatrix, tol: f64) -> usize {
    let s = singular_values(a);
    let smax = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| is_significant(x, smax, tol)).count()
}

/// Orthonormal basis (as columns) of the null space of `a` in `C^{ncols}`.
pub fn null_space(a: &CMatrix, tol: f64) -> CMatrix {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    // Pad with zero rows so the SVD returns a full right factor.
    let padded = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| !is_significant(svd.singular_values[k], smax, tol))
        .collect();
    CMatrix::from_fn(cols, null.len(), |r, k| v_t[(null[k], r)].conj())
}

/// Greedy column pivoting by residual norm (modified Gram-Schmidt with one
/// re-orthogonalization pass). Returns up to `max_pick` column indices, in pick
/// order. Residual ties are broken by larger original norm, then smaller index.
pub fn pivoted_columns(a: &CMatrix, max_pick: usize, tol: f64) -> Vec<usize> {
    let cols = a.ncols();
    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    let scale = norms.iter().copied().fold(0.0, f64::max);
    let mut residual: Vec<CVector> = (0..cols).map(|j| a.column(j).into_owned()).collect();
    let mut picked = Vec::new();
    let mut available = vec![true; cols];
    while picked.len() < max_pick {
        let mut best: Option<usize> = None;
        for j in (0..cols).filter(|&j| available[j]) {
            let rj = residual[j].norm();
            best = match best {
                None => Some(j),
                Some(b) => {
                    let rb = residual[b].norm();
                    let tie = (rj - rb).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE);
                    if (!tie && rj > rb) || (tie && norms[j] > norms[b] + 1e-12 * scale) {
                        Some(j)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        let Some(b) = best else { break };
        let rnorm = residual[b].norm();
        if !is_significant(rnorm, scale, tol) {
            break;
        }
        available[b] = false;
        picked.push(b);
        let q = residual[b].unscale(rnorm);
        for j in (0..cols).filter(|&j| available[j]) {
            for _ in 0..2 {
                let proj = q.dotc(&residual[j]);
                residual[j] -= &q * proj;
            }
        }
    }
    picked
}

/// Rank computed by pivoted Gram-Schmidt; an elimination route independent of the SVD.
pub fn gram_schmidt_rank(a: &CMatrix, tol: f64) -> usize {
    pivoted_columns(a, a.ncols(), tol).len()
}
