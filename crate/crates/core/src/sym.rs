//! Dense symmetric matrices and the spectral helpers shared by every module.

use std::fmt::Write as _;
use std::io::BufRead;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative asymmetry tolerated (and averaged away) on construction.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A dense real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Wraps `m`, symmetrizing it via `(m + mᵀ)/2` when the asymmetry is
    /// within `1e-12·max|entry|`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let scale = m.amax();
        let mut asymmetry = 0.0_f64;
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                asymmetry = asymmetry.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if !asymmetry.is_finite() || asymmetry > SYMMETRY_TOL * scale {
            return Err(Error::Asymmetric { asymmetry, scale });
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without checking. Used internally for results of exact
    /// symmetric algebra where only roundoff can break symmetry.
    pub(crate) fn symmetrized(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        SymMatrix((m + t) * 0.5)
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal().iter().copied().collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.0.row(i).iter().copied().collect())
            .collect()
    }

    /// Frobenius inner product ⟨A, B⟩.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix(&self.0 * s)
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &other.0)
    }

    pub fn neg(&self) -> SymMatrix {
        SymMatrix(-&self.0)
    }

    /// `self` with its diagonal zeroed.
    pub fn off_diagonal(&self) -> SymMatrix {
        let mut m = self.0.clone();
        m.fill_diagonal(0.0);
        SymMatrix(m)
    }

    /// Congruence `C · self · Cᵀ` for a symmetric `C`.
    pub fn congruence(&self, c: &SymMatrix) -> SymMatrix {
        SymMatrix::symmetrized(&c.0 * &self.0 * &c.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Eigendecomposition with eigenvalues sorted in descending order. Ties
    /// keep the index order of the underlying routine.
    pub fn eigen_desc(&self) -> Spectrum {
        let eig = SymmetricEigen::new(self.0.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            eig.eigenvectors[(i, order[j])]
        });
        Spectrum { values, vectors }
    }

    /// Parses whitespace-delimited text, one row per line. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let rows = read_matrix_text(reader)?;
        Self::from_rows(&rows)
    }

    pub fn to_text(&self) -> String {
        matrix_to_text(&self.0)
    }
}

/// Eigenpairs sorted by descending eigenvalue; column `k` of `vectors`
/// belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

pub fn read_matrix_text<R: BufRead>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = trimmed
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: `{tok}`: {e}", lineno + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn matrix_to_text(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:.17e}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.5, 1.0]);
        assert!(matches!(SymMatrix::new(m), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn averages_roundoff_asymmetry() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0 + 1e-15, 1.0]);
        let s = SymMatrix::new(m).unwrap();
        assert_eq!(s.get(0, 1), s.get(1, 0));
    }

    #[test]
    fn rejects_non_square() {
        let m = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(SymMatrix::new(m), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn eigen_is_descending() {
        let s = SymMatrix::from_diagonal(&[1.0, 3.0, -2.0]);
        let sp = s.eigen_desc();
        assert_eq!(sp.values, vec![3.0, 1.0, -2.0]);
        assert!((sp.vectors[(1, 0)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        let s = SymMatrix::from_rows(&[vec![0.0, 1.5], vec![1.5, -2.25]]).unwrap();
        let back = SymMatrix::read_text(s.to_text().as_bytes()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn text_parse_error_names_line() {
        let err = SymMatrix::read_text("1 2\n2 x\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
