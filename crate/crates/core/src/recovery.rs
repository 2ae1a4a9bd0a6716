//! Coordinates from an EDM and alignment back onto the known anchors.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::edm::double_center;
use crate::error::{Error, Result};
use crate::sym::SymMatrix;

#[derive(Debug, Clone)]
pub struct Embedding {
    /// One point per row, centered.
    pub points: DMatrix<f64>,
    /// Leading eigenvalues of `−½JDJ`, descending.
    pub eigenvalues: Vec<f64>,
    /// How many of the `r` requested coordinates had a nonpositive
    /// eigenvalue and were zero-filled.
    pub deficiency: usize,
}

/// Classical MDS: top-`r` eigenpairs of `−½JDJ`, coordinates `pᵢ√λᵢ`.
pub fn cmds_embed(d: &SymMatrix, r: usize) -> Embedding {
    let b = double_center(d).scale(-0.5);
    let sp = b.eigen_desc();
    let m = d.dim();
    let mut points = DMatrix::zeros(m, r);
    let mut deficiency = 0;
    for k in 0..r {
        match sp.values.get(k) {
            Some(&lambda) if lambda > 0.0 => {
                points.set_column(k, &(sp.vectors.column(k) * lambda.sqrt()));
            }
            _ => deficiency += 1,
        }
    }
    if deficiency > 0 {
        log::debug!("cMDS: {deficiency} of {r} coordinates zero-filled");
    }
    Embedding {
        points,
        eigenvalues: sp.values.iter().take(r).copied().collect(),
        deficiency,
    }
}

#[derive(Debug, Clone)]
pub struct Alignment {
    /// Orthogonal `r × r`; rows map as `x ↦ (x − from_centroid)·R + to_centroid`.
    pub rotation: DMatrix<f64>,
    pub from_centroid: DVector<f64>,
    pub to_centroid: DVector<f64>,
    /// Cross-covariance was rank deficient; the map is still a minimizer
    /// but not unique.
    pub degenerate: bool,
}

impl Alignment {
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        ((x - &self.from_centroid).transpose() * &self.rotation).transpose() + &self.to_centroid
    }

    pub fn apply_rows(&self, points: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = points.clone();
        for i in 0..points.nrows() {
            let x = self.apply(&points.row(i).transpose());
            out.set_row(i, &x.transpose());
        }
        out
    }
}

/// Orthogonal Procrustes with translation, reflections allowed: the rigid
/// map minimizing `‖(A − μ_A)R + μ_B − B‖_F` over orthogonal `R`.
pub fn procrustes(from: &DMatrix<f64>, to: &DMatrix<f64>) -> Result<Alignment> {
    if from.shape() != to.shape() {
        return Err(Error::DimensionMismatch {
            expected: to.nrows() * to.ncols(),
            got: from.nrows() * from.ncols(),
        });
    }
    if from.nrows() == 0 {
        return Err(Error::InvalidArgument("no points to align".into()));
    }
    let from_centroid = from.row_mean().transpose();
    let to_centroid = to.row_mean().transpose();
    let a = center_rows(from, &from_centroid);
    let b = center_rows(to, &to_centroid);
    let cross = a.transpose() * b;
    let svd = cross.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    Ok(Alignment {
        rotation: u * v_t,
        from_centroid,
        to_centroid,
        degenerate: smin <= 1e-10 * smax.max(f64::MIN_POSITIVE),
    })
}

fn center_rows(m: &DMatrix<f64>, c: &DVector<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        row -= c.transpose();
    }
    out
}

#[derive(Debug, Clone)]
pub struct AlignedRecovery {
    pub estimated_source: DVector<f64>,
    /// All `n + 1` points, anchors first.
    pub aligned_points: DMatrix<f64>,
    pub alignment: Alignment,
}

/// Aligns recovered anchors onto the true ones and carries the recovered
/// source along.
pub fn procrustes_align(
    recovered_anchors: &DMatrix<f64>,
    true_anchors: &DMatrix<f64>,
    recovered_source: &DVector<f64>,
) -> Result<AlignedRecovery> {
    let r = true_anchors.ncols();
    if recovered_anchors.nrows() < r + 1 {
        return Err(Error::TooFewAnchors {
            needed: r + 1,
            got: recovered_anchors.nrows(),
            r,
        });
    }
    if recovered_source.len() != r {
        return Err(Error::DimensionMismatch {
            expected: r,
            got: recovered_source.len(),
        });
    }
    let alignment = procrustes(recovered_anchors, true_anchors)?;
    if alignment.degenerate {
        log::warn!("Procrustes cross-covariance is rank deficient");
    }
    let n = recovered_anchors.nrows();
    let mut all = recovered_anchors.clone().resize_vertically(n + 1, 0.0);
    all.set_row(n, &recovered_source.transpose());
    let aligned_points = alignment.apply_rows(&all);
    Ok(AlignedRecovery {
        estimated_source: aligned_points.row(n).transpose(),
        aligned_points,
        alignment,
    })
}

/// cMDS followed by Procrustes onto `true_anchors`; the source is the last
/// row of `d`.
pub fn recover_source(d: &SymMatrix, true_anchors: &DMatrix<f64>) -> Result<(AlignedRecovery, Embedding)> {
    let n = true_anchors.nrows();
    let r = true_anchors.ncols();
    if d.dim() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: d.dim(),
        });
    }
    let emb = cmds_embed(d, r);
    let anchors = emb.points.rows(0, n).into_owned();
    let source = emb.points.row(n).transpose();
    Ok((procrustes_align(&anchors, true_anchors, &source)?, emb))
}

/// `‖x − x̂‖²`.
pub fn position_error(est: &DVector<f64>, truth: &DVector<f64>) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: est.len(),
        });
    }
    Ok((est - truth).norm_squared())
}

/// `‖x̂ − x‖ / ‖x‖`; undefined for a source at the origin.
pub fn relative_error(est: &DVector<f64>, truth: &DVector<f64>) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: est.len(),
        });
    }
    let t = truth.norm();
    if t == 0.0 {
        return Err(Error::ZeroNormTruth);
    }
    Ok((est - truth).norm() / t)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    pub estimated_source: Vec<f64>,
    pub aligned_points: Vec<Vec<f64>>,
    pub err: Option<f64>,
    pub c_re: Option<f64>,
    pub eigenratio: f64,
    pub runtime_seconds: f64,
    pub iterations: usize,
    pub converged: bool,
    pub f: f64,
    pub g: f64,
}
