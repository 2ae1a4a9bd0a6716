//! Projections onto the rank-cut PSD set `𝒮₊(r)` and the rank-cut
//! conditional PSD cone `𝓚₊(r)`, plus the penalty `g` and its majorizer.

use serde::Serialize;

use crate::edm::double_center;
use crate::error::{Error, Result};
use crate::sym::SymMatrix;

#[derive(Debug, Clone)]
pub struct RankCutProjection {
    pub projected: SymMatrix,
    /// `‖D − Π(D)‖²`.
    pub dist_sq: f64,
    /// Spectrum of `JDJ` in descending order, with whether each eigenpair
    /// survived the cut.
    pub spectrum_used: Vec<SpectrumEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub eigenvalue: f64,
    pub kept: bool,
}

fn psd_rank_with_spectrum(a: &SymMatrix, r: usize) -> (SymMatrix, Vec<SpectrumEntry>) {
    let n = a.dim();
    let sp = a.eigen_desc();
    let floor = -1e-14 * sp.max().abs();
    let mut out = nalgebra::DMatrix::zeros(n, n);
    let mut used = Vec::with_capacity(n);
    for (k, &lambda) in sp.values.iter().enumerate() {
        let lambda = if lambda < 0.0 && lambda >= floor { 0.0 } else { lambda };
        let kept = k < r && lambda > 0.0;
        if kept {
            let p = sp.vectors.column(k);
            out += (p * p.transpose()) * lambda;
        }
        used.push(SpectrumEntry {
            eigenvalue: lambda,
            kept,
        });
    }
    (SymMatrix::symmetrized(out), used)
}

/// `Σ_{i≤r} max(0, λᵢ) pᵢpᵢᵀ` with `λ₁ ≥ … ≥ λₙ`: a nearest PSD matrix of
/// rank at most `r`.
pub fn project_psd_rank(a: &SymMatrix, r: usize) -> SymMatrix {
    psd_rank_with_spectrum(a, r).0
}

/// `Π_{𝒮₊(r)}(JDJ) + (D − JDJ)`, a nearest point of `𝓚₊(r)` to `D`. At
/// eigenvalue ties the projection is set-valued and this representative is
/// returned.
pub fn project_kplus_rank(d: &SymMatrix, r: usize) -> RankCutProjection {
    let jdj = double_center(d);
    let (psd, spectrum_used) = psd_rank_with_spectrum(&jdj, r);
    let projected = psd.add(&d.sub(&jdj));
    let dist_sq = d.sub(&projected).norm_sq();
    RankCutProjection {
        projected,
        dist_sq,
        spectrum_used,
    }
}

/// `g(D) = ½ dist²(−D, 𝓚₊(r))`.
pub fn g_value(d: &SymMatrix, r: usize) -> f64 {
    0.5 * project_kplus_rank(&d.neg(), r).dist_sq
}

/// `h(D) = ½‖Π_{𝓚₊(r)}(D)‖²`.
pub fn h_value(d: &SymMatrix, r: usize) -> f64 {
    0.5 * project_kplus_rank(d, r).projected.norm_sq()
}

/// `g_m(D, A) = ½‖D‖² − h(−A) + ⟨Π_{𝓚₊(r)}(−A), D − A⟩`, an upper bound of
/// `g` that touches it at `A`.
pub fn g_majorization(d: &SymMatrix, a: &SymMatrix, r: usize) -> Result<f64> {
    if d.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: d.dim(),
        });
    }
    let pi = project_kplus_rank(&a.neg(), r).projected;
    Ok(0.5 * d.norm_sq() - 0.5 * pi.norm_sq() + pi.inner(&d.sub(a)))
}
