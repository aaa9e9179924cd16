use nalgebra::{DMatrix, DVector};

use super::{LinOp, StateVec, C64};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

fn real_part(m: &DMatrix<C64>) -> DMatrix<f64> {
    m.map(|z| z.re)
}

fn is_real(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Singular values, descending. Real operators go through a real SVD.
pub fn singular_values(m: &LinOp) -> Vec<f64> {
    singular_values_dense(&m.to_dense())
}

pub fn singular_values_dense(m: &DMatrix<C64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = if is_real(m) {
        real_part(m).singular_values().iter().copied().collect()
    } else {
        m.singular_values().iter().copied().collect()
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("rank tolerance must be positive, got {tol}")));
    }
    Ok(())
}

fn count_above(sv: &[f64], tol: f64) -> usize {
    let smax = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Number of singular values above `tol · σ_max`.
pub fn rank(m: &LinOp, tol: f64) -> Result<usize> {
    rank_dense(&m.to_dense(), tol)
}

pub fn rank_dense(m: &DMatrix<C64>, tol: f64) -> Result<usize> {
    check_tol(tol)?;
    Ok(count_above(&singular_values_dense(m), tol))
}

/// Rank together with an orthonormal basis of the null space.
pub fn rank_nullspace(m: &LinOp, tol: f64) -> Result<(usize, Vec<StateVec>)> {
    let (r, null) = rank_nullspace_dense(&m.to_dense(), tol)?;
    let vecs = null.into_iter().map(|v| StateVec::from_amplitudes(m.n_in(), v)).collect::<Result<_>>()?;
    Ok((r, vecs))
}

/// Dense-matrix form of [`rank_nullspace`]; the matrix shape is unrestricted.
pub fn rank_nullspace_dense(dense: &DMatrix<C64>, tol: f64) -> Result<(usize, Vec<DVector<C64>>)> {
    check_tol(tol)?;
    let (rows, cols) = dense.shape();
    // pad with zero rows so that the SVD returns a full right basis
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(dense);
        p
    } else {
        dense.clone()
    };
    let (sv, v): (Vec<f64>, DMatrix<C64>) = if is_real(&padded) {
        let svd = real_part(&padded).svd(false, true);
        let vt = svd.v_t.expect("requested V");
        (svd.singular_values.iter().copied().collect(), vt.transpose().map(|x| C64::new(x, 0.0)))
    } else {
        let svd = padded.svd(false, true);
        let vt = svd.v_t.expect("requested V");
        (svd.singular_values.iter().copied().collect(), vt.adjoint())
    };
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let mut rank = 0;
    let mut null = Vec::new();
    for (k, &s) in sv.iter().enumerate() {
        if s > tol * smax {
            rank += 1;
        } else {
            null.push(v.column(k).into_owned());
        }
    }
    Ok((rank, null))
}

/// Eigen-decomposition of a Hermitian operator with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<StateVec>,
}

impl Eigen {
    /// Eigenvectors as the columns of a dense matrix.
    pub fn vector_matrix(&self) -> DMatrix<C64> {
        let cols: Vec<_> = self.vectors.iter().map(|v| v.amplitudes().clone()).collect();
        DMatrix::from_columns(&cols)
    }
}

pub fn eig_hermitian(h: &LinOp) -> Result<Eigen> {
    let defect = h.hermiticity_defect()?;
    if defect > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let dense = h.to_dense();
    let (vals, vecs): (Vec<f64>, DMatrix<C64>) = if h.is_real() {
        let e = real_part(&dense).symmetric_eigen();
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors.map(|x| C64::new(x, 0.0)))
    } else {
        let e = dense.symmetric_eigen();
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let values = order.iter().map(|&k| vals[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| StateVec::from_amplitudes(h.n_in(), vecs.column(k).into_owned()))
        .collect::<Result<_>>()?;
    Ok(Eigen { values, vectors })
}
