//! Exposing vector → majorized penalty solve → cMDS + Procrustes.

use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::face::{exposing_vector, FaceCertificate};
use crate::instance::Instance;
use crate::recovery::{position_error, recover_source, relative_error, SolutionReport};
use crate::solver::{eigenratio, frmpa_run, SolverConfig, SolverTrace};
use crate::sym::SymMatrix;

#[derive(Debug, Clone)]
pub struct Solution {
    pub d: SymMatrix,
    pub trace: SolverTrace,
    pub certificate: FaceCertificate,
    pub report: SolutionReport,
}

/// Runs the full pipeline. `runtime_seconds` spans certificate construction
/// through source recovery and excludes any I/O.
pub fn locate(instance: &Instance, cfg: &SolverConfig) -> Result<Solution> {
    let start = Instant::now();
    let certificate = exposing_vector(instance.anchors(), instance.r())?;
    let (d, trace) = frmpa_run(instance, &certificate, cfg)?;
    let (rec, _) = recover_source(&d, instance.anchors())?;
    let runtime_seconds = start.elapsed().as_secs_f64();

    let (err, c_re) = match instance.true_source() {
        Some(truth) => (
            Some(position_error(&rec.estimated_source, truth)?),
            relative_error(&rec.estimated_source, truth).ok(),
        ),
        None => (None, None),
    };
    let last = *trace.last();
    let report = SolutionReport {
        estimated_source: rec.estimated_source.iter().copied().collect(),
        aligned_points: crate::instance::rows_of(&rec.aligned_points),
        err,
        c_re,
        eigenratio: eigenratio(&d, cfg.rank),
        runtime_seconds,
        iterations: trace.iterations,
        converged: trace.converged,
        f: last.f,
        g: last.g,
    };
    Ok(Solution {
        d,
        trace,
        certificate,
        report,
    })
}

/// JSON written by `locate solve`.
#[derive(Debug, Serialize)]
pub struct SolutionFile<'a> {
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    pub f: f64,
    pub g: f64,
    pub eigenratio: f64,
    pub report: &'a SolutionReport,
}

impl Solution {
    pub fn to_file(&self) -> SolutionFile<'_> {
        SolutionFile {
            d: self.d.to_rows(),
            iterations: self.report.iterations,
            converged: self.report.converged,
            f: self.report.f,
            g: self.report.g,
            eigenratio: self.report.eigenratio,
            report: &self.report,
        }
    }
}
