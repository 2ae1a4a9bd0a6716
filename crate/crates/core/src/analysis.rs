//! Numerical certificates for constraint nondegeneracy of the convex model
//! `min ½‖D−Δ‖²  s.t. −D ∈ 𝓚₊, 𝓑(D) = 0`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::edm::{double_center, householder_q, squared_distances};
use crate::error::{Error, Result};
use crate::sym::SymMatrix;

pub const FEASIBILITY_TOL: f64 = 1e-8;
pub const RANK_TOL: f64 = 1e-8;
pub const INVERTIBILITY_TOL: f64 = 1e-10;

/// Both sides of `trace(AB) = u_mᵀ A [2a; c]` for `B = [0, a; aᵀ, c]`.
pub fn prop2_trace(a_mat: &SymMatrix, a: &[f64], c: f64) -> Result<(f64, f64)> {
    let m = a_mat.dim();
    if a.len() + 1 != m {
        return Err(Error::DimensionMismatch {
            expected: m.saturating_sub(1),
            got: a.len(),
        });
    }
    let mut b = DMatrix::zeros(m, m);
    for (i, &ai) in a.iter().enumerate() {
        b[(i, m - 1)] = ai;
        b[(m - 1, i)] = ai;
    }
    b[(m - 1, m - 1)] = c;
    let lhs = (a_mat.as_matrix() * &b).trace();
    let mut v = DVector::from_iterator(m, a.iter().map(|x| 2.0 * x).chain(std::iter::once(c)));
    v = a_mat.as_matrix() * v;
    Ok((lhs, v[m - 1]))
}

#[derive(Debug, Clone, Serialize)]
pub struct NondegeneracyReport {
    #[serde(rename = "M")]
    pub m: Vec<Vec<f64>>,
    pub l_q: f64,
    pub l: usize,
    pub smallest_singular_value: f64,
    pub largest_singular_value: f64,
    pub invertible: bool,
    /// `−QHQ ⪰ 0` held numerically.
    pub neg_qhq_psd: bool,
    /// `l = 0`: the sum defining `l_q` is empty and `M` is singular.
    pub empty_rank_block: bool,
    /// Smallest/largest singular value of the map
    /// `(a, c, k) ↦ 𝓑(Q[kUUᵀ, a; aᵀ, c]Q)` assembled column by column,
    /// with `U` the leading eigenvectors of the `n × n` block.
    pub direct_singular_ratio: f64,
}

fn singular_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let sv = m.singular_values();
    (sv.min(), sv.max())
}

/// Checks feasibility for the convex model to `1e-8` (relative).
pub fn check_feasible(d: &SymMatrix, h: &SymMatrix) -> Result<()> {
    if d.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: d.dim(),
        });
    }
    let scale = d.norm().max(1.0);
    if let Some((i, v)) = d
        .diagonal()
        .iter()
        .enumerate()
        .find(|(_, v)| v.abs() > FEASIBILITY_TOL * scale)
    {
        return Err(Error::Infeasible(format!("diagonal entry {i} is {v:e}")));
    }
    let ip = d.inner(h);
    if ip.abs() > FEASIBILITY_TOL * scale * h.norm().max(1.0) {
        return Err(Error::Infeasible(format!("<D,H> = {ip:e}")));
    }
    let sp = double_center(&d.neg()).eigen_desc();
    let lo = sp.values.last().copied().unwrap_or(0.0);
    if lo < -FEASIBILITY_TOL * sp.max().abs().max(1.0) {
        return Err(Error::Infeasible(format!(
            "-D is not conditionally PSD (eigenvalue {lo:e})"
        )));
    }
    Ok(())
}

/// Builds `M = [−Q/√m, w; 0, l_q] · blockdiag(2Iₙ, I₂)` at a feasible `D`,
/// where `m = n + 1`, `Q(−D)Q = [Z̄₁, z̄₂; z̄₂ᵀ, z̄₀]`, `l = rank(Z̄₁)`,
/// `w = (1,…,1,0,…,0)` with `l` ones and `l_q = Σ_{i≤l}(QHQ)ᵢᵢ`.
pub fn build_m(d: &SymMatrix, h: &SymMatrix) -> Result<NondegeneracyReport> {
    check_feasible(d, h)?;
    let m = d.dim();
    let n = m - 1;
    let q = householder_q(m)?;

    let qxq = d.neg().congruence(&q);
    let z1 = SymMatrix::symmetrized(qxq.as_matrix().view((0, 0), (n, n)).into_owned());
    let z1_spec = z1.eigen_desc();
    let lam_max = z1_spec.max();
    let l = if lam_max > 0.0 {
        z1_spec.values.iter().filter(|&&v| v > RANK_TOL * lam_max).count()
    } else {
        0
    };

    let qhq = h.congruence(&q);
    let neg_spec = qhq.neg().eigen_desc();
    let neg_qhq_psd = neg_spec.values.iter().all(|&v| v >= -1e-10 * h.norm().max(1.0));
    if !neg_qhq_psd {
        log::warn!("-QHQ is not PSD; l_q may vanish");
    }
    let l_q: f64 = (0..l).map(|i| qhq.get(i, i)).sum();

    let sm = (m as f64).sqrt();
    let mut left = DMatrix::zeros(m + 1, m + 1);
    left.view_mut((0, 0), (m, m))
        .copy_from(&(q.as_matrix() * (-1.0 / sm)));
    for i in 0..l {
        left[(i, m)] = 1.0;
    }
    left[(m, m)] = l_q;
    let right = DMatrix::from_diagonal(&DVector::from_fn(m + 1, |i, _| if i < n { 2.0 } else { 1.0 }));
    let mm = left * right;
    let (smin, smax) = singular_extremes(&mm);

    let direct = direct_map(&q, h, &z1_spec.vectors.columns(0, l).into_owned());
    let (dmin, dmax) = singular_extremes(&direct);

    Ok(NondegeneracyReport {
        m: crate::instance::rows_of(&mm),
        l_q,
        l,
        smallest_singular_value: smin,
        largest_singular_value: smax,
        invertible: smin > INVERTIBILITY_TOL * smax,
        neg_qhq_psd,
        empty_rank_block: l == 0,
        direct_singular_ratio: if dmax > 0.0 { dmin / dmax } else { 0.0 },
    })
}

/// Column `j` is `𝓑(A(eⱼ))` for the parameter vector `(a, c, k)`.
fn direct_map(q: &SymMatrix, h: &SymMatrix, u: &DMatrix<f64>) -> DMatrix<f64> {
    let m = q.dim();
    let n = m - 1;
    let uu = u * u.transpose();
    let mut out = DMatrix::zeros(m + 1, m + 1);
    for j in 0..=m {
        let mut inner = DMatrix::zeros(m, m);
        if j < n {
            inner[(j, n)] = 1.0;
            inner[(n, j)] = 1.0;
        } else if j == n {
            inner[(n, n)] = 1.0;
        } else {
            inner.view_mut((0, 0), (n, n)).copy_from(&uu);
        }
        let a = SymMatrix::symmetrized(inner).congruence(q);
        for i in 0..m {
            out[(i, j)] = a.get(i, i);
        }
        out[(m, j)] = a.inner(h);
    }
    out
}

/// A random feasible point of the convex model: a convex combination of
/// EDMs whose anchor block is the true anchor EDM, with sources drawn in one
/// dimension above the anchors so the combination is generally full rank.
pub fn sample_feasible_point<R: Rng + ?Sized>(
    anchors: &DMatrix<f64>,
    terms: usize,
    rng: &mut R,
) -> SymMatrix {
    let n = anchors.nrows();
    let r = anchors.ncols();
    let spread = anchors.amax().max(1.0);
    let lifted = anchors.clone().resize_horizontally(r + 1, 0.0);
    let weights: Vec<f64> = (0..terms.max(1)).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = DMatrix::zeros(n + 1, n + 1);
    for w in weights {
        let src = DVector::from_fn(r + 1, |_, _| rng.random_range(-spread..spread));
        let pts = crate::instance::stack_source(&lifted, &src);
        acc += squared_distances(&pts).as_matrix() * (w / total);
    }
    SymMatrix::symmetrized(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::face::exposing_vector;
    use crate::instance::stack_source;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn anchors() -> DMatrix<f64> {
        DMatrix::from_row_slice(5, 2, &[6., 4., 0., -10., 5., -3., 1., -4., 3., -3.])
    }

    fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        SymMatrix::symmetrized(&m + m.transpose())
    }

    #[test]
    fn prop2_identity_and_zero() {
        let (l, r) = prop2_trace(&SymMatrix::identity(4), &[1.0, 2.0, 3.0], 5.0).unwrap();
        assert_eq!((l, r), (5.0, 5.0));
        let (l, r) = prop2_trace(&SymMatrix::identity(4), &[0.0; 3], 0.0).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
        assert!(prop2_trace(&SymMatrix::identity(4), &[0.0; 2], 0.0).is_err());
    }

    #[test]
    fn prop2_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let a = random_sym(&mut rng, 6);
            let v: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
            let c = rng.random_range(-1.0..1.0);
            let (l, r) = prop2_trace(&a, &v, c).unwrap();
            let b_norm = (2.0 * v.iter().map(|x| x * x).sum::<f64>() + c * c).sqrt();
            assert!((l - r).abs() <= 1e-12 * a.norm() * b_norm);
        }
    }

    #[test]
    fn example_edm_is_nondegenerate() {
        let cert = exposing_vector(&anchors(), 2).unwrap();
        let d = squared_distances(&stack_source(&anchors(), &DVector::from_vec(vec![-2.0, 3.0])));
        let rep = build_m(&d, &cert.h).unwrap();
        assert_eq!(rep.l, 2);
        assert!(rep.neg_qhq_psd);
        assert!(rep.l_q < 0.0);
        assert!(rep.invertible);
        assert_eq!(rep.m.len(), 7);
    }

    #[test]
    fn zero_is_the_boundary_case() {
        let cert = exposing_vector(&anchors(), 2).unwrap();
        let rep = build_m(&SymMatrix::zeros(6), &cert.h).unwrap();
        assert_eq!(rep.l, 0);
        assert_eq!(rep.l_q, 0.0);
        assert!(rep.empty_rank_block);
        assert!(!rep.invertible);
    }

    #[test]
    fn infeasible_points_are_rejected() {
        let cert = exposing_vector(&anchors(), 2).unwrap();
        let d = squared_distances(&stack_source(&anchors(), &DVector::from_vec(vec![-2.0, 3.0])));
        // wrong sign
        assert!(matches!(build_m(&d.neg(), &cert.h), Err(Error::Infeasible(_))));
        // off the face
        let mut m = d.clone().into_matrix();
        m[(0, 1)] += 5.0;
        m[(1, 0)] += 5.0;
        assert!(matches!(
            build_m(&SymMatrix::new(m).unwrap(), &cert.h),
            Err(Error::Infeasible(_))
        ));
        // nonzero diagonal
        let bumped = d.add(&SymMatrix::from_diagonal(&[1.0, 0., 0., 0., 0., 0.]));
        assert!(matches!(build_m(&bumped, &cert.h), Err(Error::Infeasible(_))));
    }

    #[test]
    fn sampled_points_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cert = exposing_vector(&anchors(), 2).unwrap();
        for _ in 0..10 {
            let d = sample_feasible_point(&anchors(), 3, &mut rng);
            check_feasible(&d, &cert.h).unwrap();
        }
    }
}
