use std::io::Write;
use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::experiments::{generate, trial_rng, ExperimentSpec, RNG_ALGORITHM};
use super::oracle::gauss_newton_oracle;
use crate::error::Result;
use crate::pipeline::locate;
use crate::recovery::{position_error, relative_error};
use crate::solver::SolverConfig;

pub const CSV_HEADER: &str = "experiment,trial,method,n,r,noise,err,c_re,eigenratio,time_s,iters,converged";
pub const METHOD_FRMPA: &str = "frmpa";
pub const METHOD_ORACLE: &str = "oracle";
pub const ORACLE_RESTARTS: usize = 20;
const ORACLE_SALT: u64 = 0x6f72_6163_6c65;

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub experiment: String,
    pub trial: usize,
    pub method: &'static str,
    pub n: usize,
    pub r: usize,
    pub noise: f64,
    /// NaN when the method aborted on this trial.
    pub err: f64,
    pub c_re: Option<f64>,
    pub eigenratio: Option<f64>,
    pub time_s: f64,
    pub iters: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BenchRow {
    fn csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{:e},{:e},{},{},{:e},{},{}",
            self.experiment,
            self.trial,
            self.method,
            self.n,
            self.r,
            self.noise,
            self.err,
            opt(self.c_re),
            opt(self.eigenratio),
            self.time_s,
            self.iters,
            self.converged
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: &'static str,
    pub trials: usize,
    pub failures: usize,
    pub mean_err: f64,
    pub median_err: f64,
    pub mean_time_s: f64,
    /// Share of successful trials with eigenratio ≥ 0.9; absent for the oracle.
    pub eigenratio_ge_0_9: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub rng: &'static str,
    pub oracle_restarts: usize,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRun {
    pub spec: ExperimentSpec,
    pub metadata: Metadata,
    pub rows: Vec<BenchRow>,
    pub summary: Vec<MethodSummary>,
}

impl BenchRun {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for row in &self.rows {
            writeln!(w, "{}", row.csv_line())?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn summary_for(&self, method: &str) -> Option<&MethodSummary> {
        self.summary.iter().find(|s| s.method == method)
    }
}

fn trial_rows(spec: &ExperimentSpec, cfg: &SolverConfig, trial: usize) -> Result<[BenchRow; 2]> {
    let instance = generate(spec, trial)?;
    let truth = instance.true_source().cloned();
    let base = BenchRow {
        experiment: spec.id.to_string(),
        trial,
        method: METHOD_FRMPA,
        n: instance.n(),
        r: instance.r(),
        noise: spec.noise.level(),
        err: f64::NAN,
        c_re: None,
        eigenratio: None,
        time_s: 0.0,
        iters: 0,
        converged: false,
        error: None,
    };

    let frmpa = match locate(&instance, cfg) {
        Ok(sol) => BenchRow {
            err: sol.report.err.unwrap_or(f64::NAN),
            c_re: sol.report.c_re,
            eigenratio: Some(sol.report.eigenratio),
            time_s: sol.report.runtime_seconds,
            iters: sol.report.iterations,
            converged: sol.report.converged,
            ..base.clone()
        },
        Err(e) => {
            log::warn!("{} trial {trial}: solver aborted: {e}", spec.id);
            BenchRow {
                error: Some(e.to_string()),
                ..base.clone()
            }
        }
    };

    let mut rng = trial_rng(spec.seed, spec.id, trial, ORACLE_SALT);
    let start = Instant::now();
    let oracle = gauss_newton_oracle(&instance, ORACLE_RESTARTS, &mut rng);
    let time_s = start.elapsed().as_secs_f64();
    let oracle = match oracle {
        Ok(res) => {
            let est = DVector::from_vec(res.source);
            let (err, c_re) = match &truth {
                Some(t) => (position_error(&est, t)?, relative_error(&est, t).ok()),
                None => (f64::NAN, None),
            };
            BenchRow {
                method: METHOD_ORACLE,
                err,
                c_re,
                time_s,
                iters: res.iterations,
                converged: true,
                ..base
            }
        }
        Err(e) => BenchRow {
            method: METHOD_ORACLE,
            time_s,
            error: Some(e.to_string()),
            ..base
        },
    };
    Ok([frmpa, oracle])
}

fn summarize(method: &'static str, rows: &[BenchRow]) -> MethodSummary {
    let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.method == method).collect();
    let ok: Vec<&BenchRow> = mine.iter().copied().filter(|r| r.err.is_finite()).collect();
    let mut errs: Vec<f64> = ok.iter().map(|r| r.err).collect();
    errs.sort_by(f64::total_cmp);
    let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
    let median_err = match errs.len() {
        0 => f64::NAN,
        k if k % 2 == 1 => errs[k / 2],
        k => 0.5 * (errs[k / 2 - 1] + errs[k / 2]),
    };
    let ratios: Vec<f64> = ok.iter().filter_map(|r| r.eigenratio).collect();
    MethodSummary {
        method,
        trials: mine.len(),
        failures: mine.len() - ok.len(),
        mean_err: mean(&errs),
        median_err,
        mean_time_s: mean(&ok.iter().map(|r| r.time_s).collect::<Vec<_>>()),
        eigenratio_ge_0_9: (!ratios.is_empty())
            .then(|| ratios.iter().filter(|&&x| x >= 0.9).count() as f64 / ratios.len() as f64),
    }
}

/// Runs every trial of `spec` in parallel. Rows come back in trial order, the
/// solver row before the oracle row. A per-trial solver abort is recorded in
/// its row; only invalid specs fail the whole run.
pub fn run_experiment(spec: &ExperimentSpec, cfg: &SolverConfig) -> Result<BenchRun> {
    spec.validate()?;
    cfg.validate()?;
    let cfg = SolverConfig { rank: spec.r(), ..*cfg };
    let per_trial: Vec<Result<[BenchRow; 2]>> = (0..spec.trials)
        .into_par_iter()
        .map(|t| trial_rows(spec, &cfg, t))
        .collect();
    let mut rows = Vec::with_capacity(2 * spec.trials);
    for pair in per_trial {
        rows.extend(pair?);
    }
    let summary = vec![summarize(METHOD_FRMPA, &rows), summarize(METHOD_ORACLE, &rows)];
    Ok(BenchRun {
        spec: spec.clone(),
        metadata: Metadata {
            rng: RNG_ALGORITHM,
            oracle_restarts: ORACLE_RESTARTS,
            solver: cfg,
        },
        rows,
        summary,
    })
}
