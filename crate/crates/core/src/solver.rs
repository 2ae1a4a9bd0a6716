//! Majorized penalty iteration on the facially reduced model
//!
//! ```text
//! min ½‖D − Δ‖²  s.t.  −D ∈ 𝓚₊(r),  diag(D) = 0,  ⟨D, H⟩ = 0.
//! ```
//!
//! The rank-cut cone constraint is penalized with `ρ·g(D)`; each step
//! minimizes the majorized objective over `Ξ = {D : 𝓑(D) = 0}`, which
//! reduces to projecting `Δᵏ = (Δ − ρΠ(−Dᵏ))/(1+ρ)` onto `Ξ` in closed form.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::edm::{double_center, squared_distances};
use crate::error::{Error, Result};
use crate::face::FaceCertificate;
use crate::instance::{stack_source, Instance};
use crate::projection::{g_value, project_kplus_rank};
use crate::recovery::recover_source;
use crate::sym::SymMatrix;

/// Smallest `⟨H − Diag(diag H), H⟩` accepted by the subproblem.
pub const MIN_DENOMINATOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rho: f64,
    pub f_prog_tol: f64,
    pub max_iter: usize,
    pub rank: usize,
}

impl SolverConfig {
    pub fn new(rank: usize) -> Self {
        SolverConfig {
            rho: 0.1,
            f_prog_tol: 1e-4,
            max_iter: 1000,
            rank,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidArgument(format!("rho must be > 0, got {}", self.rho)));
        }
        if self.f_prog_tol.is_nan() || self.f_prog_tol <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be > 0, got {}",
                self.f_prog_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        if self.rank == 0 {
            return Err(Error::InvalidArgument("rank must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub f: f64,
    pub g: f64,
    pub f_rho: f64,
    /// `None` for the starting point.
    pub f_prog: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverTrace {
    /// Starting point first, then one record per iteration.
    pub records: Vec<IterRecord>,
    pub iterations: usize,
    pub converged: bool,
}

impl SolverTrace {
    pub fn last(&self) -> &IterRecord {
        self.records.last().expect("trace always holds the starting point")
    }

    /// Columns `iter,f,g,f_rho,f_prog`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iter,f,g,f_rho,f_prog")?;
        for r in &self.records {
            let prog = r.f_prog.map(|p| format!("{p:e}")).unwrap_or_default();
            writeln!(w, "{},{:e},{:e},{:e},{}", r.iter, r.f, r.g, r.f_rho, prog)?;
        }
        Ok(())
    }
}

/// Frobenius-nearest point to `delta_k` in `Ξ = {D : diag(D) = 0, ⟨D,H⟩ = 0}`:
/// `D = Δᵏ + 𝓑*(y)` with
/// `y_H = −⟨Δᵏ − Diag(diag Δᵏ), H⟩ / ⟨H − Diag(diag H), H⟩` and the diagonal
/// multipliers cancelling `diag(Δᵏ + y_H·H)`. With `H = 0` only the diagonal
/// is cleared.
pub fn subproblem_solve(delta_k: &SymMatrix, h: &SymMatrix) -> Result<SymMatrix> {
    if delta_k.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: delta_k.dim(),
        });
    }
    let delta_off = delta_k.off_diagonal();
    if h.as_matrix().iter().all(|&v| v == 0.0) {
        return Ok(delta_off);
    }
    let h_off = h.off_diagonal();
    let denom = h_off.inner(h);
    if denom < MIN_DENOMINATOR {
        return Err(Error::SmallDenominator(denom));
    }
    let y_h = -delta_off.inner(h) / denom;
    Ok(delta_off.add(&h_off.scale(y_h)))
}

/// Starting point on the face: cMDS of Δ, aligned onto the anchors, with the
/// anchor block replaced by the exact anchors. It is an EDM of embedding
/// dimension ≤ r that satisfies `𝓑(D⁰) = 0`.
pub fn initial_point(instance: &Instance) -> Result<SymMatrix> {
    let (rec, _) = recover_source(instance.delta(), instance.anchors())?;
    Ok(squared_distances(&stack_source(
        instance.anchors(),
        &rec.estimated_source,
    )))
}

fn objective(d: &SymMatrix, delta: &SymMatrix, cfg: &SolverConfig) -> (f64, f64, f64) {
    let f = 0.5 * d.sub(delta).norm_sq();
    let g = g_value(d, cfg.rank);
    (f, g, f + cfg.rho * g)
}

/// Runs the majorized penalty iteration until
/// `|f_ρ(Dᵏ) − f_ρ(Dᵏ⁻¹)| / (1 + f_ρ(Dᵏ⁻¹)) < tol` or `max_iter` steps.
pub fn frmpa_run(
    instance: &Instance,
    cert: &FaceCertificate,
    cfg: &SolverConfig,
) -> Result<(SymMatrix, SolverTrace)> {
    let d0 = initial_point(instance)?;
    frmpa_from(instance.delta(), cert, cfg, d0)
}

/// Same as [`frmpa_run`] from an explicit starting point.
pub fn frmpa_from(
    delta: &SymMatrix,
    cert: &FaceCertificate,
    cfg: &SolverConfig,
    d0: SymMatrix,
) -> Result<(SymMatrix, SolverTrace)> {
    cfg.validate()?;
    if cert.dim() != delta.dim() || d0.dim() != delta.dim() {
        return Err(Error::DimensionMismatch {
            expected: delta.dim(),
            got: cert.dim(),
        });
    }
    if cert.gale_dim > 0 && cert.h.norm() == 0.0 {
        return Err(Error::InconsistentCertificate(format!(
            "gale dimension {} but H = 0",
            cert.gale_dim
        )));
    }

    let mut d = d0;
    let (f, g, mut f_rho) = objective(&d, delta, cfg);
    let mut records = vec![IterRecord {
        iter: 0,
        f,
        g,
        f_rho,
        f_prog: None,
    }];
    let scale = 1.0 / (1.0 + cfg.rho);
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=cfg.max_iter {
        let pi = project_kplus_rank(&d.neg(), cfg.rank).projected;
        let delta_k = delta.sub(&pi.scale(cfg.rho)).scale(scale);
        d = subproblem_solve(&delta_k, &cert.h)?;
        if !d.is_finite() {
            return Err(Error::NonFinite {
                iteration: k,
                what: "iterate",
            });
        }
        let (f, g, next) = objective(&d, delta, cfg);
        if !next.is_finite() {
            return Err(Error::NonFinite {
                iteration: k,
                what: "objective",
            });
        }
        let f_prog = (next - f_rho).abs() / (1.0 + f_rho);
        records.push(IterRecord {
            iter: k,
            f,
            g,
            f_rho: next,
            f_prog: Some(f_prog),
        });
        f_rho = next;
        iterations = k;
        if f_prog < cfg.f_prog_tol {
            converged = true;
            break;
        }
    }

    Ok((
        d,
        SolverTrace {
            records,
            iterations,
            converged,
        },
    ))
}

/// `Σ_{i≤r} λᵢ(−JDJ) / Σ_{i≤m−1} λᵢ(−JDJ)` for an `m × m` matrix `D`,
/// eigenvalues descending. Defined as 1 when `JDJ = 0`.
pub fn eigenratio(d: &SymMatrix, r: usize) -> f64 {
    let sp = double_center(d).neg().eigen_desc();
    let m = d.dim();
    if sp.values.iter().all(|&l| l == 0.0) {
        return 1.0;
    }
    let top: f64 = sp.values.iter().take(r).sum();
    let all: f64 = sp.values.iter().take(m.saturating_sub(1)).sum();
    if all == 0.0 {
        return 1.0;
    }
    top / all
}
