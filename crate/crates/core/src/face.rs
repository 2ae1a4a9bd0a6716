//! Exposing vector of the minimal face of the EDM cone that contains every
//! matrix agreeing with the fixed anchor–anchor distances.
//!
//! The construction: form the projected Gram matrix `Y = −½VᵀD̄V` of the
//! anchor EDM, take an orthonormal basis `U` of `null(Y)`, set `Z₁ = VU`
//! (a Gale matrix of the anchors) and embed `−Z₁Z₁ᵀ/2` as the leading block
//! of an otherwise zero `(n+1)×(n+1)` matrix `H`. A matrix `D` in the EDM
//! cone lies on the face iff `⟨D, H⟩ = 0`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::edm::{build_v, squared_distances};
use crate::error::{Error, Result};
use crate::sym::SymMatrix;

/// Relative eigenvalue threshold below which a direction of `Y` counts as
/// null.
pub const NULL_EIGEN_TOL: f64 = 1e-8;

/// Conditions worth surfacing that do not prevent a certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FaceWarning {
    /// The anchors span fewer (or more) affine dimensions than requested;
    /// the certificate follows the detected rank.
    AffineRankMismatch { requested: usize, detected: usize },
    /// `n = rank + 1`: the Gale basis is empty and `H = 0`.
    EmptyGale,
}

#[derive(Debug, Clone)]
pub struct GaleBasis {
    /// `n × (n − 1 − detected_rank)`, orthonormal columns.
    pub z1: DMatrix<f64>,
    pub detected_rank: usize,
    pub rank_gap: f64,
    pub warnings: Vec<FaceWarning>,
}

#[derive(Debug, Clone)]
pub struct FaceCertificate {
    pub h: SymMatrix,
    pub z1: DMatrix<f64>,
    pub gale_dim: usize,
    pub detected_rank: usize,
    pub rank_gap: f64,
    pub warnings: Vec<FaceWarning>,
}

/// `Y = −½ VᵀD̄V` for the anchor EDM `D̄`.
pub fn projected_gram(anchors: &DMatrix<f64>) -> Result<SymMatrix> {
    let n = anchors.nrows();
    if n < 2 {
        return Err(Error::TooFewAnchors {
            needed: 2,
            got: n,
            r: anchors.ncols(),
        });
    }
    let d = squared_distances(anchors);
    let v = build_v(n)?;
    Ok(SymMatrix::symmetrized(
        v.transpose() * d.as_matrix() * &v * -0.5,
    ))
}

/// `Z₁ = VU` with `U` an orthonormal basis of `null(Y)`.
///
/// The null space is read off the spectrum: eigenvalues with
/// `λ ≤ 1e-8·max(1, λ_max)` are null. When that disagrees with the
/// requested rank the spectrum wins and a warning is attached.
pub fn gale_basis(y: &SymMatrix, r: usize) -> Result<GaleBasis> {
    let m = y.dim();
    if r > m {
        return Err(Error::InvalidArgument(format!(
            "rank {r} exceeds projected Gram dimension {m}"
        )));
    }
    let spectrum = y.eigen_desc();
    let threshold = NULL_EIGEN_TOL * spectrum.max().max(1.0);
    let detected_rank = spectrum.values.iter().filter(|&&l| l > threshold).count();

    let retained_min = spectrum.values[..detected_rank]
        .last()
        .copied()
        .unwrap_or(0.0);
    let discarded_max = spectrum.values[detected_rank..]
        .iter()
        .fold(0.0_f64, |acc, l| acc.max(l.abs()));

    let mut warnings = Vec::new();
    if detected_rank != r {
        log::warn!("anchors have affine rank {detected_rank}, requested {r}");
        warnings.push(FaceWarning::AffineRankMismatch {
            requested: r,
            detected: detected_rank,
        });
    }
    if detected_rank == m {
        warnings.push(FaceWarning::EmptyGale);
    }

    let u = spectrum.vectors.columns(detected_rank, m - detected_rank);
    let v = build_v(m + 1)?;
    Ok(GaleBasis {
        z1: v * u,
        detected_rank,
        rank_gap: retained_min - discarded_max,
        warnings,
    })
}

/// Builds `H = [−Z₁Z₁ᵀ/2, 0; 0, 0]` for the given anchors.
pub fn exposing_vector(anchors: &DMatrix<f64>, r: usize) -> Result<FaceCertificate> {
    let n = anchors.nrows();
    if n < r + 1 {
        return Err(Error::TooFewAnchors {
            needed: r + 1,
            got: n,
            r,
        });
    }
    let y = projected_gram(anchors)?;
    let gale = gale_basis(&y, r)?;
    let block = &gale.z1 * gale.z1.transpose() * -0.5;
    let mut h = DMatrix::zeros(n + 1, n + 1);
    h.view_mut((0, 0), (n, n)).copy_from(&block);
    Ok(FaceCertificate {
        h: SymMatrix::symmetrized(h),
        gale_dim: gale.z1.ncols(),
        z1: gale.z1,
        detected_rank: gale.detected_rank,
        rank_gap: gale.rank_gap,
        warnings: gale.warnings,
    })
}

impl FaceCertificate {
    /// Size of the extended matrices this certificate applies to (`n + 1`).
    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn is_trivial(&self) -> bool {
        self.gale_dim == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExposureReport {
    pub feasible: bool,
    pub inner_product: f64,
}

pub const EXPOSURE_TOL: f64 = 1e-8;

/// Checks `|⟨D,H⟩| ≤ 1e-8·‖D‖·‖H‖`.
pub fn verify_exposure(cert: &FaceCertificate, d: &SymMatrix) -> Result<ExposureReport> {
    if d.dim() != cert.dim() {
        return Err(Error::DimensionMismatch {
            expected: cert.dim(),
            got: d.dim(),
        });
    }
    let inner_product = d.inner(&cert.h);
    Ok(ExposureReport {
        feasible: inner_product.abs() <= EXPOSURE_TOL * d.norm() * cert.h.norm(),
        inner_product,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::stack_source;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn example_anchors() -> DMatrix<f64> {
        DMatrix::from_row_slice(5, 2, &[6., 4., 0., -10., 5., -3., 1., -4., 3., -3.])
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize, r: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, r, |_, _| rng.random_range(-10.0..10.0))
    }

    #[test]
    fn projected_gram_example_values() {
        let y = projected_gram(&example_anchors()).unwrap();
        let expected = [
            [96.87095302, 14.06124159, 38.79436788, 21.91534355],
            [14.06124159, 5.25153015, 2.98465645, 3.10563212],
            [38.79436788, 2.98465645, 17.71778274, 8.83875841],
            [21.91534355, 3.10563212, 8.83875841, 4.95973409],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(y.get(i, j), expected[i][j], epsilon = 1e-7);
            }
        }
        // trace equals the centred scatter Σ‖xᵢ − x̄‖²
        assert_abs_diff_eq!(y.as_matrix().trace(), 124.8, epsilon = 1e-9);
    }

    #[test]
    fn coincident_anchors_give_zero_gram() {
        let anchors = DMatrix::from_element(4, 2, 1.5);
        let y = projected_gram(&anchors).unwrap();
        assert!(y.as_matrix().amax() < 1e-12);
    }

    #[test]
    fn projected_gram_needs_two_anchors() {
        assert!(projected_gram(&DMatrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn projected_gram_rank_is_affine_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y = projected_gram(&random_points(&mut rng, 6, 2)).unwrap();
        let sp = y.eigen_desc();
        let tol = 1e-10 * sp.max();
        assert_eq!(sp.values.iter().filter(|&&l| l > tol).count(), 2);
        assert!(sp.values.iter().all(|&l| l > -tol));
    }

    /// `Z₁Z₁ᵀ` is the orthogonal projector onto `null([P e]ᵀ)`, which can
    /// be formed without any eigendecomposition.
    #[test]
    fn gale_projector_is_affine_complement() {
        let p = example_anchors();
        let y = projected_gram(&p).unwrap();
        let g = gale_basis(&y, 2).unwrap();
        assert_eq!(g.z1.ncols(), 2);
        let a = p.clone().insert_column(2, 1.0);
        let ata_inv = (a.transpose() * &a).try_inverse().unwrap();
        let complement = DMatrix::identity(5, 5) - &a * ata_inv * a.transpose();
        assert!((&g.z1 * g.z1.transpose() - complement).amax() < 1e-10);
        assert!(g.warnings.is_empty());
    }

    #[test]
    fn gale_basis_properties_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let r = rng.random_range(2..=3);
            let n = rng.random_range(r + 2..=12);
            let p = random_points(&mut rng, n, r);
            let y = projected_gram(&p).unwrap();
            let g = gale_basis(&y, r).unwrap();
            let k = g.z1.ncols();
            assert_eq!(k, n - r - 1);
            assert!((g.z1.transpose() * &g.z1 - DMatrix::identity(k, k)).amax() < 1e-10);
            let e = DVector::from_element(n, 1.0);
            assert!((g.z1.transpose() * e).amax() < 1e-10);
            assert!((p.transpose() * &g.z1).amax() < 1e-8 * p.amax());
            // residual of Y on the null basis
            let u = build_v(n).unwrap().transpose() * &g.z1;
            assert!((y.as_matrix() * u).amax() <= 1e-10 * y.as_matrix().amax().max(1.0));
        }
    }

    #[test]
    fn exposing_vector_example_values() {
        let cert = exposing_vector(&example_anchors(), 2).unwrap();
        assert_abs_diff_eq!(cert.h.get(0, 0), -0.13432364, epsilon = 1e-7);
        assert_abs_diff_eq!(cert.h.get(0, 1), -0.14823009, epsilon = 1e-7);
        assert_abs_diff_eq!(cert.h.get(2, 2), -0.11472819, epsilon = 1e-7);
        assert_abs_diff_eq!(cert.h.get(3, 4), 0.11061947, epsilon = 1e-7);
        assert_abs_diff_eq!(cert.h.get(4, 4), -0.39917826, epsilon = 1e-7);
        for i in 0..6 {
            assert_eq!(cert.h.get(5, i), 0.0);
            assert_eq!(cert.h.get(i, 5), 0.0);
        }
        assert_eq!(cert.gale_dim, 2);
    }

    #[test]
    fn minimal_anchor_set_has_trivial_certificate() {
        let anchors = DMatrix::from_row_slice(3, 2, &[0., 0., 2., 0., 0., 3.]);
        let cert = exposing_vector(&anchors, 2).unwrap();
        assert_eq!(cert.gale_dim, 0);
        assert!(cert.is_trivial());
        assert_eq!(cert.h, SymMatrix::zeros(4));
        assert!(cert.warnings.contains(&FaceWarning::EmptyGale));
    }

    #[test]
    fn collinear_anchors_follow_detected_rank() {
        let anchors = DMatrix::from_row_slice(5, 2, &[0., 0., 1., 1., 2., 2., -3., -3., 5., 5.]);
        let cert = exposing_vector(&anchors, 2).unwrap();
        assert_eq!(cert.detected_rank, 1);
        assert_eq!(cert.gale_dim, 5 - 2);
        assert_eq!(
            cert.warnings,
            vec![FaceWarning::AffineRankMismatch {
                requested: 2,
                detected: 1
            }]
        );
        // still exposes the (smaller) face: any source on or off the line
        let d = squared_distances(&stack_source(&anchors, &DVector::from_vec(vec![4.0, -1.0])));
        assert!(verify_exposure(&cert, &d).unwrap().feasible);
    }

    #[test]
    fn exposure_of_example_edm() {
        let cert = exposing_vector(&example_anchors(), 2).unwrap();
        let d = squared_distances(&stack_source(
            &example_anchors(),
            &DVector::from_vec(vec![-2.0, 3.0]),
        ));
        let rep = verify_exposure(&cert, &d).unwrap();
        assert!(rep.feasible);
        assert!(rep.inner_product.abs() < 1e-10);

        let mut perturbed = d.clone().into_matrix();
        perturbed[(0, 1)] += 1.0;
        perturbed[(1, 0)] += 1.0;
        let rep = verify_exposure(&cert, &SymMatrix::new(perturbed).unwrap()).unwrap();
        assert!(!rep.feasible);

        let rep = verify_exposure(&cert, &SymMatrix::zeros(6)).unwrap();
        assert_eq!(rep.inner_product, 0.0);
        assert!(rep.feasible);

        assert!(verify_exposure(&cert, &SymMatrix::zeros(5)).is_err());
    }

    #[test]
    fn h_is_negative_semidefinite_with_gale_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let n = rng.random_range(4..=15);
            let p = random_points(&mut rng, n, 2);
            let cert = exposing_vector(&p, 2).unwrap();
            let sp = cert.h.neg().eigen_desc();
            let tol = 1e-10;
            assert!(sp.values.iter().all(|&l| l > -tol));
            assert_eq!(sp.values.iter().filter(|&&l| l > tol).count(), cert.gale_dim);
            let he = cert.h.as_matrix() * DVector::from_element(n + 1, 1.0);
            assert!(he.amax() < 1e-10);
            // dual-cone membership: Diag(−Z₁Z₁ᵀe) + Z₁Z₁ᵀ = Z₁Z₁ᵀ ⪰ 0
            let zz = &cert.z1 * cert.z1.transpose();
            let row_sums = -(&zz * DVector::from_element(n, 1.0));
            let k_star = DMatrix::from_diagonal(&row_sums) + &zz;
            assert!((&k_star - &zz).amax() < 1e-10);
        }
    }
}
