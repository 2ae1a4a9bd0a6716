//! Independent multi-start Gauss–Newton solver for
//! `min_x Σⱼ (‖xⱼ − x‖ − δⱼ)²`, used to cross-check the matrix pipeline.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;

const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub source: Vec<f64>,
    /// `Σⱼ (‖xⱼ − x‖ − δⱼ)²` at `source`.
    pub cost: f64,
    pub iterations: usize,
    pub starts_used: usize,
}

fn cost(anchors: &DMatrix<f64>, ranges: &[f64], x: &DVector<f64>) -> f64 {
    (0..anchors.nrows())
        .map(|j| {
            let d = (anchors.row(j).transpose() - x).norm();
            (d - ranges[j]).powi(2)
        })
        .sum()
}

/// One Gauss–Newton descent with step halving. Returns `None` if it produced
/// non-finite values.
fn descend(anchors: &DMatrix<f64>, ranges: &[f64], mut x: DVector<f64>) -> Option<(DVector<f64>, f64, usize)> {
    let n = anchors.nrows();
    let r = anchors.ncols();
    let mut fx = cost(anchors, ranges, &x);
    let mut iters = 0;
    for _ in 0..MAX_ITER {
        iters += 1;
        let mut jac = DMatrix::zeros(n, r);
        let mut res = DVector::zeros(n);
        for j in 0..n {
            let diff = &x - anchors.row(j).transpose();
            let d = diff.norm();
            res[j] = d - ranges[j];
            if d > 0.0 {
                jac.set_row(j, &(diff / d).transpose());
            }
        }
        let rhs = -(jac.transpose() * &res);
        let step = (jac.transpose() * &jac).svd(true, true).solve(&rhs, 1e-14).ok()?;
        if !step.iter().all(|v| v.is_finite()) {
            return None;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand = &x + &step * t;
            let fc = cost(anchors, ranges, &cand);
            if fc <= fx {
                accepted = Some((cand, fc));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, fc)) = accepted else { break };
        let moved = (&cand - &x).norm();
        x = cand;
        let improvement = fx - fc;
        fx = fc;
        if moved <= 1e-13 * (1.0 + x.norm()) || improvement <= 1e-30 {
            break;
        }
    }
    (fx.is_finite() && x.iter().all(|v| v.is_finite())).then_some((x, fx, iters))
}

/// Best local minimizer over `restarts` uniform starts in the anchor bounding
/// box.
pub fn gauss_newton_oracle<R: Rng + ?Sized>(
    instance: &Instance,
    restarts: usize,
    rng: &mut R,
) -> Result<OracleResult> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    let anchors = instance.anchors();
    let ranges = instance.ranges();
    let r = anchors.ncols();
    let lo: Vec<f64> = (0..r).map(|k| anchors.column(k).min()).collect();
    let hi: Vec<f64> = (0..r).map(|k| anchors.column(k).max()).collect();

    let mut best: Option<(DVector<f64>, f64)> = None;
    let mut iterations = 0;
    let mut starts_used = 0;
    for _ in 0..restarts {
        let start = DVector::from_fn(r, |k, _| {
            if hi[k] > lo[k] {
                rng.random_range(lo[k]..=hi[k])
            } else {
                lo[k] + rng.random_range(-1.0..=1.0)
            }
        });
        let Some((x, fx, it)) = descend(anchors, &ranges, start) else {
            continue;
        };
        iterations += it;
        starts_used += 1;
        if best.as_ref().is_none_or(|(_, bf)| fx < *bf) {
            best = Some((x, fx));
        }
    }
    let (x, fx) = best.ok_or(Error::NonFinite {
        iteration: iterations,
        what: "every oracle start diverged",
    })?;
    Ok(OracleResult {
        source: x.iter().copied().collect(),
        cost: fx,
        iterations,
        starts_used,
    })
}
