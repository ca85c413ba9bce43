use std::sync::Arc;

use optimism_core::lasso::{lasso_constrained, lasso_penalized, penalized_objective};
use optimism_core::projections::{
    project_ball, project_ellipsoid, project_l1_ball, project_segment, project_subspace,
};
use optimism_core::{
    ridge_df_closed_form, smoother_matrix, trace_df, training_error, DesignMatrix, Matrix,
    RidgeSpec, Vector,
};
use proptest::prelude::*;

fn vec_strategy(n: usize, scale: f64) -> impl Strategy<Value = Vector<f64>> {
    prop::collection::vec(-scale..scale, n).prop_map(Vector::from_vec)
}

fn design_strategy(n: usize, p: usize) -> impl Strategy<Value = Matrix<f64>> {
    prop::collection::vec(-2.0f64..2.0, n * p).prop_map(move |v| Matrix::from_vec(n, p, v))
}

type Projection<'a> = Box<dyn Fn(&Vector<f64>) -> Vector<f64> + 'a>;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn training_error_is_permutation_invariant(
        (a, b, rot) in (1usize..12).prop_flat_map(|n| (vec_strategy(n, 5.0), vec_strategy(n, 5.0), 0..n))
    ) {
        let e = training_error(&a, &b).unwrap();
        let n = a.len();
        let pa = Vector::from_fn(n, |i, _| a[(i + rot) % n]);
        let pb = Vector::from_fn(n, |i, _| b[(i + rot) % n]);
        prop_assert!((training_error(&pa, &pb).unwrap() - e).abs() <= 1e-12 * (1.0 + e));
        prop_assert!(e >= 0.0);
    }

    #[test]
    fn projections_are_nonexpansive_and_idempotent(
        (a, b) in (2usize..6).prop_flat_map(|n| (vec_strategy(n, 4.0), vec_strategy(n, 4.0))),
        r in 0.1f64..3.0,
    ) {
        let n = a.len();
        let radii = Vector::from_fn(n, |i, _| r * (1.0 + i as f64) / n as f64);
        let maps: Vec<Projection> = vec![
            Box::new(|y| project_segment(y, -r, r)),
            Box::new(|y| project_ball(y, r)),
            Box::new(|y| project_l1_ball(y, r)),
            Box::new(|y| project_ellipsoid(y, &radii, 1e-12).unwrap()),
        ];
        for p in &maps {
            let (pa, pb) = (p(&a), p(&b));
            prop_assert!((&pa - &pb).norm() <= (&a - &b).norm() + 1e-12);
            prop_assert!((p(&pa) - &pa).norm() <= 1e-10);
        }
    }

    #[test]
    fn subspace_projection_is_orthogonal_and_idempotent(
        (basis, y) in (3usize..7).prop_flat_map(|n| (design_strategy(n, 2), vec_strategy(n, 3.0)))
    ) {
        let q = basis.qr().q();
        let p = project_subspace(&y, &q);
        prop_assert!((project_subspace(&p, &q) - &p).norm() <= 1e-12);
        prop_assert!(((&y - &p).dot(&p)).abs() <= 1e-10);
    }

    #[test]
    fn ridge_trace_matches_closed_form(x in design_strategy(12, 3), lambda in 0.01f64..50.0) {
        let design = Arc::new(DesignMatrix::new(x).unwrap());
        let spec = RidgeSpec::new(design.clone(), lambda).unwrap();
        let trace = trace_df(&smoother_matrix(&spec).unwrap());
        let d: Vec<f64> = design.singular_values().iter().copied().collect();
        prop_assert!((trace - ridge_df_closed_form(&d, lambda).unwrap()).abs() <= 1e-10);
        prop_assert!((0.0..=3.0).contains(&trace));
    }

    #[test]
    fn lasso_solution_minimizes_objective(
        x in design_strategy(10, 3),
        y in vec_strategy(10, 3.0),
        lambda in 0.0f64..5.0,
        probe in vec_strategy(3, 2.0),
    ) {
        let design = DesignMatrix::new(x).unwrap();
        prop_assume!(design.full_column_rank(1e-6) && design.singular_values()[2] > 0.05);
        let sol = lasso_penalized(&design, &y, lambda, 1e-12, 1_000_000).unwrap();
        let best = penalized_objective(&design, &y, &sol.beta, lambda);
        let other = penalized_objective(&design, &y, &(&sol.beta + probe * 0.01), lambda);
        prop_assert!(best <= other + 1e-9);
    }

    /// Constraining inside the column space: the constrained fit of `y`
    /// equals the constrained fit of its projection onto the column space.
    #[test]
    fn constrained_lasso_depends_on_y_only_through_column_space(
        x in design_strategy(8, 3),
        y in vec_strategy(8, 3.0),
        s in 0.1f64..3.0,
    ) {
        let design = DesignMatrix::new(x).unwrap();
        prop_assume!(design.singular_values()[2] > 0.1);
        let ly = design.left() * design.left().transpose() * &y;
        let a = lasso_constrained(&design, &y, s, 1e-13, 2_000_000).unwrap();
        let b = lasso_constrained(&design, &ly, s, 1e-13, 2_000_000).unwrap();
        prop_assert!((a.mu_hat - b.mu_hat).amax() <= 1e-8);
    }
}
