use edm_locate::edm::{b_adjoint, b_apply, kappa_map, squared_distances, ConstraintVector};
use edm_locate::face::{exposing_vector, verify_exposure};
use edm_locate::instance::stack_source;
use edm_locate::projection::{g_majorization, g_value, h_value, project_kplus_rank};
use edm_locate::recovery::procrustes;
use edm_locate::solver::subproblem_solve;
use edm_locate::SymMatrix;
use nalgebra::{DMatrix, DVector, Rotation2};
use proptest::prelude::*;

fn matrix(n: usize, c: usize, lo: f64, hi: f64) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(lo..hi, n * c).prop_map(move |v| DMatrix::from_row_slice(n, c, &v))
}

fn sym(n: usize) -> impl Strategy<Value = SymMatrix> {
    matrix(n, n, -5.0, 5.0).prop_map(|m| SymMatrix::new((&m + m.transpose()) * 0.5).unwrap())
}

/// Anchors in general position together with a source.
fn anchors_and_source() -> impl Strategy<Value = (DMatrix<f64>, DVector<f64>)> {
    (2usize..=3, 0usize..6).prop_flat_map(|(r, extra)| {
        let n = r + 1 + extra;
        (
            matrix(n, r, -10.0, 10.0),
            proptest::collection::vec(-15.0..15.0f64, r).prop_map(DVector::from_vec),
        )
    })
}

fn anchor_rank(p: &DMatrix<f64>) -> usize {
    let c = p.row_mean();
    let centred = DMatrix::from_fn(p.nrows(), p.ncols(), |i, j| p[(i, j)] - c[j]);
    let sv = centred.singular_values();
    sv.iter().filter(|&&s| s > 1e-6 * sv.max().max(1.0)).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn b_adjoint_identity(d in sym(6), h in sym(6), y in proptest::collection::vec(-3.0..3.0f64, 7)) {
        let y = ConstraintVector::new(y).unwrap();
        let lhs = b_apply(&d, &h).unwrap().dot(&y);
        let rhs = d.inner(&b_adjoint(&y, &h).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn kappa_of_centred_gram_is_edm(p in matrix(6, 3, -4.0, 4.0)) {
        let c = p.row_mean();
        let centred = DMatrix::from_fn(6, 3, |i, j| p[(i, j)] - c[j]);
        let gram = SymMatrix::new(&centred * centred.transpose()).unwrap();
        let diff = kappa_map(&gram).sub(&squared_distances(&p));
        prop_assert!(diff.as_matrix().amax() < 1e-10);
    }

    #[test]
    fn exposing_vector_annihilates_every_source((p, s) in anchors_and_source()) {
        prop_assume!(anchor_rank(&p) == p.ncols());
        let cert = exposing_vector(&p, p.ncols()).unwrap();
        let d = squared_distances(&stack_source(&p, &s));
        let report = verify_exposure(&cert, &d).unwrap();
        prop_assert!(report.feasible, "<D,H> = {}", report.inner_product);
        prop_assert!(report.inner_product.abs() <= 1e-10 * d.norm().max(1.0));
    }

    #[test]
    fn exposing_vector_is_basis_free((p, _s) in anchors_and_source()) {
        prop_assume!(anchor_rank(&p) == p.ncols());
        let n = p.nrows();
        let cert = exposing_vector(&p, p.ncols()).unwrap();
        let a = p.clone().insert_column(p.ncols(), 1.0);
        let proj = DMatrix::identity(n, n) - &a * (a.transpose() * &a).try_inverse().unwrap() * a.transpose();
        let block = cert.h.as_matrix().view((0, 0), (n, n)).into_owned();
        prop_assert!((block + proj * 0.5).amax() < 1e-9);
        prop_assert!(cert.h.as_matrix().row(n).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn projection_is_orthogonal_and_idempotent(d in sym(6), r in 1usize..=3) {
        let first = project_kplus_rank(&d, r).projected;
        let again = project_kplus_rank(&first, r).projected;
        prop_assert!(first.inner(&d.sub(&first)).abs() <= 1e-9 * d.norm_sq().max(1.0));
        prop_assert!(again.sub(&first).norm() <= 1e-9 * first.norm().max(1.0));
    }

    #[test]
    fn h_and_g_are_linked(d in sym(5), r in 1usize..=3) {
        let lhs = h_value(&d, r);
        let rhs = 0.5 * d.norm_sq() - g_value(&d.neg(), r);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * d.norm_sq().max(1.0));
    }

    #[test]
    fn majorizer_bounds_penalty(d in sym(5), a in sym(5), r in 1usize..=3) {
        let gm = g_majorization(&d, &a, r).unwrap();
        prop_assert!(gm >= g_value(&d, r) - 1e-10 * (1.0 + gm.abs()));
        let touch = g_majorization(&a, &a, r).unwrap();
        prop_assert!((touch - g_value(&a, r)).abs() <= 1e-10 * (1.0 + touch.abs()));
    }

    #[test]
    fn subproblem_output_is_in_the_affine_set(dk in sym(6), (p, _s) in anchors_and_source()) {
        prop_assume!(p.nrows() == 5 && anchor_rank(&p) == p.ncols());
        let h = exposing_vector(&p, p.ncols()).unwrap().h;
        let d = subproblem_solve(&dk, &h).unwrap();
        let b = b_apply(&d, &h).unwrap();
        prop_assert!(b.norm() <= 1e-10 * dk.norm().max(1.0));
    }

    #[test]
    fn procrustes_undoes_rigid_motion(p in matrix(6, 2, -10.0, 10.0), angle in -3.1..3.1f64, t in proptest::collection::vec(-5.0..5.0f64, 2)) {
        prop_assume!(anchor_rank(&p) == 2);
        let rot = Rotation2::new(angle);
        let shift = DVector::from_vec(t);
        let moved = DMatrix::from_fn(6, 2, |i, j| (rot * p.row(i).transpose() + &shift)[j]);
        let align = procrustes(&moved, &p).unwrap();
        prop_assert!((align.apply_rows(&moved) - &p).amax() < 1e-9);
    }
}
