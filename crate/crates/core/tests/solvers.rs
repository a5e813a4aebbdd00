mod common;

use common::*;
use proptest::prelude::*;
use rbcm::linalg::{max_eigenvalue, solve_spd_vec, Cholesky};
use rbcm::solvers::{alm_ccrc_l1, ccrc_operator, fista_l1, lrc_fit, nnls, ridge_operator, FistaSolver, SolverError};
use rbcm::{DenseMatrix, PartitionedDictionary, SolverOptions};

#[test]
fn fista_matches_coordinate_descent_on_tall_problems() {
    let mut g = rng(100);
    let tight = SolverOptions { tol: 1e-14, max_iter: 20_000, ..SolverOptions::fista() };
    for _ in 0..30 {
        let d = random_dictionary(&mut g, 20, &[3, 3, 4]);
        let y = random_unit_vector(&mut g, 20);
        let cd = coordinate_descent_lasso(d.atoms(), &y, 0.05, 1e-12);
        let best = lasso_objective(d.atoms(), &y, &cd, 0.05);
        let a = fista_l1(&d, &y, 0.05, &SolverOptions::fista()).unwrap();
        let gap = lasso_objective(d.atoms(), &y, &a, 0.05) - best;
        assert!(gap.abs() < 1e-5, "{gap}");
        let b = fista_l1(&d, &y, 0.05, &tight).unwrap();
        let gap = lasso_objective(d.atoms(), &y, &b, 0.05) - best;
        assert!(gap.abs() < 1e-10, "{gap}");
    }
}

#[test]
fn fista_objective_trace_never_increases() {
    let mut g = rng(101);
    let d = random_dictionary(&mut g, 8, &[4, 4, 4]);
    let y = random_unit_vector(&mut g, 8);
    let s = FistaSolver::new(d.atoms())
        .unwrap()
        .solve(&y, 0.01, &SolverOptions { max_iter: 5000, ..SolverOptions::fista() })
        .unwrap();
    assert!(s.objective_trace.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn nnls_unique_tall_case_matches_projected_gradient() {
    let mut g = rng(102);
    for _ in 0..10 {
        let d = random_dictionary(&mut g, 15, &[3, 3]);
        let y = random_unit_vector(&mut g, 15);
        let a = nnls(d.atoms(), &y).unwrap();
        let pg = projected_gradient_nnls(d.atoms(), &y, 100_000);
        let gap = max_abs(&a.iter().zip(&pg).map(|(p, q)| p - q).collect::<Vec<_>>());
        assert!(gap < 1e-6, "{gap}");
        assert!(nnls_kkt_violation(d.atoms(), &y, &a) < 1e-10);
    }
}

#[test]
fn alm_with_competition_beats_zero_and_stays_feasible() {
    let mut g = rng(103);
    for _ in 0..10 {
        let d = random_dictionary(&mut g, 10, &[3, 3, 3]);
        let y = random_unit_vector(&mut g, 10);
        let z = alm_ccrc_l1(&d, &y, 0.05, 0.5, &SolverOptions::alm()).unwrap();
        // objective of the l1 collaborative-competitive problem at z and at 0
        let obj = |c: &[f64]| {
            let mut v = lasso_objective(d.atoms(), &y, c, 0.05);
            for k in 0..d.n_classes() {
                let r = d.class_range(k);
                let recon = d.class_reconstruction(k, &c[r]);
                v += 0.5 * y.iter().zip(&recon).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
            }
            v
        };
        assert!(obj(&z) < obj(&[0.0; 9]));
    }
}

#[test]
fn lrc_rejects_rank_deficient_class() {
    let x = DenseMatrix::new(3, 2, vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    match lrc_fit(4, &x, &[1.0, 0.0, 0.0]) {
        Err(SolverError::RankDeficientClass { class, .. }) => assert_eq!(class, 4),
        other => panic!("{other:?}"),
    }
}

#[test]
fn partition_validation() {
    let x = DenseMatrix::identity(3);
    assert!(PartitionedDictionary::new(&x, vec![3]).is_err());
    assert!(PartitionedDictionary::new(&x, vec![1, 1]).is_err());
    assert!(PartitionedDictionary::new(&x, vec![1, 0, 2]).is_err());
    let zero = DenseMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(PartitionedDictionary::new(&zero, vec![1, 1]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_ridge_and_ccrc_are_stationary(seed in any::<u64>(), l1 in 1e-3f64..1.0, l2 in 0.0f64..5.0) {
        let mut g = rng(seed);
        let d = random_dictionary(&mut g, 7, &[2, 3, 2]);
        let y = random_unit_vector(&mut g, 7);
        let a = ridge_operator(&d, l1).unwrap().apply(&y).unwrap();
        prop_assert!(max_abs(&ccrc_gradient(&d, &y, &a, l1, 0.0)) < 1e-8);
        let b = ccrc_operator(&d, l1, l2).unwrap().apply(&y).unwrap();
        prop_assert!(max_abs(&ccrc_gradient(&d, &y, &b, l1, l2)) < 1e-8);
    }

    #[test]
    fn prop_nnls_kkt(seed in any::<u64>()) {
        let mut g = rng(seed);
        let d = random_dictionary(&mut g, 6, &[3, 4]);
        let y = random_unit_vector(&mut g, 6);
        let a = nnls(d.atoms(), &y).unwrap();
        prop_assert!(a.iter().all(|&v| v >= 0.0));
        prop_assert!(nnls_kkt_violation(d.atoms(), &y, &a) < 1e-8);
    }

    #[test]
    fn prop_spd_solve(seed in any::<u64>(), shift in 0.01f64..2.0) {
        let mut g = rng(seed);
        let d = random_dictionary(&mut g, 5, &[2, 2]);
        let mut a = d.atoms().gram();
        a.add_diagonal(shift);
        let b = random_unit_vector(&mut g, 4);
        let x = solve_spd_vec(&a, &b).unwrap();
        let r = a.matvec(&x);
        prop_assert!(max_abs(&r.iter().zip(&b).map(|(p, q)| p - q).collect::<Vec<_>>()) < 1e-10);
        prop_assert!(Cholesky::factor(&a).unwrap().pivots().iter().all(|&p| p > 0.0));
        let top = max_eigenvalue(&a).unwrap();
        prop_assert!(top >= shift);
    }
}

#[test]
fn solvers_are_column_equivariant() {
    let mut g = rng(104);
    let order = [1, 2, 0];
    for _ in 0..5 {
        let d = random_dictionary(&mut g, 10, &[2, 3, 3]);
        let p = d.permute_classes(&order).unwrap();
        let y = random_unit_vector(&mut g, 10);
        // column of `p` -> column of `d`
        let map: Vec<usize> = order.iter().flat_map(|&c| d.class_range(c)).collect();
        let check = |a: &[f64], b: &[f64], tol: f64| {
            for (j, &src) in map.iter().enumerate() {
                assert!((b[j] - a[src]).abs() < tol, "{} vs {}", b[j], a[src]);
            }
        };
        let opts = SolverOptions { tol: 1e-14, max_iter: 50_000, ..SolverOptions::fista() };
        check(&fista_l1(&d, &y, 0.05, &opts).unwrap(), &fista_l1(&p, &y, 0.05, &opts).unwrap(), 1e-6);
        check(
            &ridge_operator(&d, 0.1).unwrap().apply(&y).unwrap(),
            &ridge_operator(&p, 0.1).unwrap().apply(&y).unwrap(),
            1e-12,
        );
        check(
            &ccrc_operator(&d, 0.1, 0.5).unwrap().apply(&y).unwrap(),
            &ccrc_operator(&p, 0.1, 0.5).unwrap().apply(&y).unwrap(),
            1e-12,
        );
        check(&nnls(d.atoms(), &y).unwrap(), &nnls(p.atoms(), &y).unwrap(), 1e-9);
    }
}
