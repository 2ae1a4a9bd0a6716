//! The linear maps of the EDM model: 𝒦, centering, the projected-Gram basis
//! `V`, the Householder reflector `Q`, and the constraint operator `𝓑`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sym::SymMatrix;

/// `𝒦(Y)_ij = Y_ii + Y_jj − 2Y_ij`.
pub fn kappa_map(y: &SymMatrix) -> SymMatrix {
    let m = y.as_matrix();
    let n = y.dim();
    SymMatrix::symmetrized(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            m[(i, i)] + m[(j, j)] - 2.0 * m[(i, j)]
        }
    }))
}

/// Squared-distance matrix of the rows of `points`.
pub fn squared_distances(points: &DMatrix<f64>) -> SymMatrix {
    let n = points.nrows();
    SymMatrix::symmetrized(DMatrix::from_fn(n, n, |i, j| {
        (points.row(i) - points.row(j)).norm_squared()
    }))
}

/// `J = I − eeᵀ/m`.
pub fn centering_matrix(m: usize) -> Result<SymMatrix> {
    if m < 1 {
        return Err(Error::InvalidSize(m, "centering matrix needs m >= 1"));
    }
    let inv = 1.0 / m as f64;
    Ok(SymMatrix::symmetrized(DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            1.0 - inv
        } else {
            -inv
        }
    })))
}

/// `J·A·J` computed by subtracting row and column means.
pub fn double_center(a: &SymMatrix) -> SymMatrix {
    let m = a.as_matrix();
    let n = a.dim();
    if n == 0 {
        return a.clone();
    }
    let row_means: Vec<f64> = (0..n).map(|i| m.row(i).mean()).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    SymMatrix::symmetrized(DMatrix::from_fn(n, n, |i, j| {
        m[(i, j)] - row_means[i] - row_means[j] + grand
    }))
}

/// The `m × (m−1)` matrix with rows `[−eᵀ/√m ; I − eeᵀ/(m+√m)]`, an
/// orthonormal basis of `e^⊥`.
pub fn build_v(m: usize) -> Result<DMatrix<f64>> {
    if m < 2 {
        return Err(Error::InvalidSize(m, "V needs m >= 2"));
    }
    let sm = (m as f64).sqrt();
    let c = 1.0 / (m as f64 + sm);
    Ok(DMatrix::from_fn(m, m - 1, |i, j| {
        if i == 0 {
            -1.0 / sm
        } else if i - 1 == j {
            1.0 - c
        } else {
            -c
        }
    }))
}

/// Householder reflector `Q = I − yyᵀ/(m+√m)` with `y = (1,…,1,√m+1)`.
pub fn householder_q(m: usize) -> Result<SymMatrix> {
    if m < 1 {
        return Err(Error::InvalidSize(m, "Q needs m >= 1"));
    }
    let sm = (m as f64).sqrt();
    let mut y = DVector::from_element(m, 1.0);
    y[m - 1] = sm + 1.0;
    let q = DMatrix::identity(m, m) - (&y * y.transpose()) / (m as f64 + sm);
    Ok(SymMatrix::symmetrized(q))
}

/// An element of ℝ^{m+1}: the `m` diagonal targets followed by the ⟨D,H⟩
/// target.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintVector(Vec<f64>);

impl ConstraintVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSize(
                values.len(),
                "constraint vector needs at least one diagonal entry",
            ));
        }
        Ok(ConstraintVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn diagonal_part(&self) -> &[f64] {
        &self.0[..self.0.len() - 1]
    }

    pub fn face_part(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// Matrix dimension this vector pairs with.
    pub fn matrix_dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn dot(&self, other: &ConstraintVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// `𝓑(D) = [diag(D); ⟨D,H⟩]`.
pub fn b_apply(d: &SymMatrix, h: &SymMatrix) -> Result<ConstraintVector> {
    if d.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            got: h.dim(),
        });
    }
    let mut v = d.diagonal();
    v.push(d.inner(h));
    ConstraintVector::new(v)
}

/// `𝓑*(y) = Diag(y_{1:m}) + y_{m+1}·H`.
pub fn b_adjoint(y: &ConstraintVector, h: &SymMatrix) -> Result<SymMatrix> {
    if y.matrix_dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: y.matrix_dim(),
        });
    }
    Ok(SymMatrix::from_diagonal(y.diagonal_part()).add(&h.scale(y.face_part())))
}
