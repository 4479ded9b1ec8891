//! Small dense linear-algebra helpers on top of nalgebra.
//!
//! Singular value decompositions are computed from the symmetric
//! eigendecomposition of `[[0, M], [Mᵀ, 0]]` (eigenvalues `±σ`) instead of
//! nalgebra's bidiagonal SVD, whose singular vectors are unreliable for
//! rank-deficient inputs.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Condition estimate above which a solve is reported as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

fn jordan_wielandt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = m.shape();
    let mut jw = DMatrix::zeros(n + p, n + p);
    jw.view_mut((0, n), (n, p)).copy_from(m);
    jw.view_mut((n, 0), (p, n)).copy_from(&m.transpose());
    jw
}

/// The `min(n, p)` singular values, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return Vec::new();
    }
    let vals = sym_eigenvalues(&jordan_wielandt(m));
    vals.iter().rev().take(k).map(|&x| x.max(0.0)).collect()
}

/// Thin SVD `M = U diag(σ) Vᵀ` with `σ` descending and `k = min(n, p)`.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub values: Vec<f64>,
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

pub fn thin_svd(m: &DMatrix<f64>) -> ThinSvd {
    let (n, p) = m.shape();
    let k = n.min(p);
    if k == 0 {
        return ThinSvd { values: Vec::new(), u: DMatrix::zeros(n, 0), v: DMatrix::zeros(p, 0) };
    }
    let (vals, vecs) = sym_eigen_sorted(&jordan_wielandt(m));
    let scale = vals.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    // Below this level the ±σ eigenvectors are not separated from the null
    // space; those singular vectors are completed orthogonally instead.
    let reliable = f64::EPSILON.sqrt() * scale;
    let mut values = Vec::with_capacity(k);
    let mut u_cols = Vec::new();
    let mut v_cols = Vec::new();
    for idx in (0..n + p).rev().take(k) {
        let sigma = vals[idx].max(0.0);
        values.push(sigma);
        if sigma > reliable && u_cols.len() == values.len() - 1 {
            let col = vecs.column(idx);
            u_cols.push(col.rows(0, n).normalize());
            v_cols.push(col.rows(n, p).normalize());
        }
    }
    ThinSvd { values, u: complete_columns(n, &u_cols, k), v: complete_columns(p, &v_cols, k) }
}

/// Extends orthonormal `cols` (length `n`) to `total` orthonormal columns.
fn complete_columns(n: usize, cols: &[DVector<f64>], total: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, total);
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    if cols.len() < total {
        let extra = complement_of(n, cols);
        for j in cols.len()..total {
            out.set_column(j, &extra.column(j - cols.len()));
        }
    }
    out
}

/// Orthonormal basis of the complement of span(`cols`), assumed orthonormal.
fn complement_of(n: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut projector = DMatrix::identity(n, n);
    for c in cols {
        projector -= c * c.transpose();
    }
    let (_, vecs) = sym_eigen_sorted(&projector);
    // Eigenvalues are ~0 (span) then ~1 (complement), ascending.
    vecs.columns(cols.len(), n - cols.len()).into_owned()
}

/// Moore–Penrose pseudoinverse, dropping singular values `≤ tol`.
pub fn pinv(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let svd = thin_svd(m);
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for (j, &sigma) in svd.values.iter().enumerate() {
        if sigma > tol {
            out += svd.v.column(j) * svd.u.column(j).transpose() / sigma;
        }
    }
    out
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest entry of `|M - M^T|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// Symmetric eigendecomposition with eigenvalues in ascending order.
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    sym_eigen_sorted(m).0.iter().copied().collect()
}

/// Complex eigenvalues of a general real matrix (real Schur form).
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    match m.nrows() {
        0 => Ok(Vec::new()),
        1 => Ok(vec![Complex64::new(m[(0, 0)], 0.0)]),
        _ => {
            let schur =
                Schur::try_new(m.clone(), f64::EPSILON, 100_000).ok_or(Error::EigenSolver)?;
            Ok(schur.complex_eigenvalues().iter().copied().collect())
        }
    }
}

pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().fold(0.0_f64, |acc, z| acc.max(z.norm())))
}

fn norm_1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse via LU with partial pivoting; fails when the 1-norm condition
/// estimate exceeds [`SINGULAR_CONDITION`].
pub fn inverse_checked(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let inv = m
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::SingularSolve { condition: f64::INFINITY })?;
    let condition = norm_1(m) * norm_1(&inv);
    if !condition.is_finite() || condition > SINGULAR_CONDITION {
        return Err(Error::SingularSolve { condition });
    }
    Ok(inv)
}

pub fn solve_checked(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(inverse_checked(m)? * rhs)
}

/// Reciprocal 2-norm condition number `σ_min / σ_max`; the empty matrix gives 1.
pub fn rcond(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    if m.nrows() != m.ncols() {
        return 0.0;
    }
    let sv = singular_values(m);
    let max = sv.first().copied().unwrap_or(0.0);
    let min = sv.last().copied().unwrap_or(0.0);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

/// Singular values (descending) with the matching left singular vectors as
/// columns.
pub fn left_singular(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let svd = thin_svd(m);
    (svd.values, svd.u)
}

/// Orthonormal basis of `range(gamma)^⊥` together with the numerical rank of
/// `gamma`. Rank uses the usual `max(m, n) · eps · σ_max` cutoff.
pub fn orthogonal_complement(gamma: &DMatrix<f64>) -> (DMatrix<f64>, usize) {
    let n = gamma.nrows();
    if gamma.ncols() == 0 || gamma.amax() == 0.0 {
        return (DMatrix::identity(n, n), 0);
    }
    let svd = thin_svd(gamma);
    let cutoff = (n.max(gamma.ncols()) as f64) * f64::EPSILON * svd.values[0];
    let rank = svd.values.iter().filter(|&&s| s > cutoff).count();
    let range: Vec<DVector<f64>> = (0..rank).map(|j| svd.u.column(j).into_owned()).collect();
    (complement_of(n, &range), rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eigenvalues_of_rotation_generator() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!(close(ev[0].im, -1.0, 1e-14) && close(ev[1].im, 1.0, 1e-14));
        assert!(ev.iter().all(|z| z.re.abs() < 1e-14));
        assert!(eigenvalues(&DMatrix::zeros(0, 0)).unwrap().is_empty());
    }

    #[test]
    fn complement_is_orthonormal_and_annihilates() {
        let g = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, -1.0]);
        let (u, rank) = orthogonal_complement(&g);
        assert_eq!(rank, 1);
        assert_eq!(u.ncols(), 2);
        assert!((u.transpose() * &u - DMatrix::identity(2, 2)).amax() < 1e-12);
        assert!((g.transpose() * &u).amax() < 1e-12);
    }

    #[test]
    fn singular_inverse_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(inverse_checked(&m), Err(Error::SingularSolve { .. })));
    }

    #[test]
    fn svd_of_rank_deficient_matrix_reconstructs() {
        let a = DMatrix::from_row_slice(3, 1, &[0.3, -1.2, 0.5]);
        let b = DMatrix::from_row_slice(1, 3, &[1.0, 0.25, -2.0]);
        let m = &a * &b;
        let svd = thin_svd(&m);
        let rec = &svd.u * DMatrix::from_diagonal(&DVector::from_vec(svd.values.clone())) * svd.v.transpose();
        assert!((rec - &m).amax() < 1e-14);
        assert!((svd.u.transpose() * &svd.u - DMatrix::identity(3, 3)).amax() < 1e-14);
        let p = pinv(&m, 1e-12);
        assert!((&m * &p * &m - &m).amax() < 1e-14);
        let (u, rank) = orthogonal_complement(&m);
        assert_eq!(rank, 1);
        assert!((m.transpose() * u).amax() < 1e-14);
    }

    #[test]
    fn spectral_norm_of_diag() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![-3.0, 2.0]));
        assert!(close(spectral_norm(&m), 3.0, 1e-14));
    }
}
