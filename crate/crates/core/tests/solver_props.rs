use proptest::prelude::*;
use sparselab_core::bp_solver::l1_minimize_default;
use sparselab_core::rng;
use sparselab_core::{
    check_exact_recovery, cone_constraint_holds, l1_oracle, measure, sample_matrix, sample_sparse_signal,
    EntryDistribution, MeasurementMatrix, SolveStatus, SparseSignal, ValueLaw,
};

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

fn instance(
    m: usize,
    n: usize,
    s: usize,
    dist: usize,
    seed: u64,
) -> (MeasurementMatrix, SparseSignal, Vec<f64>) {
    let dist = EntryDistribution::builtins()[dist];
    let a = sample_matrix(m, n, &dist, seed).unwrap();
    let x = sample_sparse_signal(n, s.min(n), ValueLaw::Gaussian, rng::splitmix64(seed)).unwrap();
    let y = measure(&a, &x).unwrap();
    (a, x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_matches_enumeration(
        m in 1usize..=6, extra in 0usize..=4, s in 0usize..=3, dist in 0usize..5, seed in any::<u64>(),
    ) {
        let n = (m + extra).min(8);
        let (a, _, y) = instance(m, n, s, dist, seed);
        let lp = l1_minimize_default(&a, &y).unwrap();
        let oracle = l1_oracle(&a, &y).unwrap();
        prop_assert!((lp.objective - oracle.result.objective).abs() <= 1e-8 * (1.0 + oracle.result.objective));
        if oracle.is_unique() {
            for (u, v) in lp.solution.iter().zip(&oracle.result.solution) {
                prop_assert!((u - v).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn scaling_equivariance(m in 2usize..=6, n in 6usize..=10, s in 1usize..=2, alpha in 0.01f64..100.0, seed in any::<u64>()) {
        let (a, _, y) = instance(m, n, s, 0, seed);
        let base = l1_minimize_default(&a, &y).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| alpha * v).collect();
        let scaled = l1_minimize_default(&a, &ys).unwrap();
        prop_assert!((scaled.objective - alpha * base.objective).abs() <= 1e-7 * alpha * (1.0 + base.objective));
    }

    #[test]
    fn joint_scaling_keeps_solution(m in 2usize..=6, n in 6usize..=10, s in 1usize..=2, alpha in 0.01f64..100.0, seed in any::<u64>()) {
        let (a, _, y) = instance(m, n, s, 2, seed);
        let base = l1_minimize_default(&a, &y).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| alpha * v).collect();
        let scaled = l1_minimize_default(&a.scaled(alpha), &ys).unwrap();
        for (u, v) in base.solution.iter().zip(&scaled.solution) {
            prop_assert!((u - v).abs() <= 1e-9 * (1.0 + base.objective));
        }
    }

    #[test]
    fn infeasibility_agrees_with_oracle(m in 2usize..=5, extra in 0usize..=3, seed in any::<u64>()) {
        // Rademacher matrices are often rank deficient; a generic y then
        // lies outside the range.
        let n = m + extra;
        let a = sample_matrix(m, n, &EntryDistribution::rademacher(), seed).unwrap();
        let mut r = rng::root(seed ^ 1);
        let y: Vec<f64> = (0..m).map(|_| rand::Rng::sample(&mut r, rand_distr::StandardNormal)).collect();
        let lp = l1_minimize_default(&a, &y).unwrap();
        let oracle = l1_oracle(&a, &y).unwrap();
        prop_assert_eq!(lp.status, oracle.result.status);
        if oracle.result.status == SolveStatus::Optimal {
            prop_assert!((lp.objective - oracle.result.objective).abs() <= 1e-8 * (1.0 + lp.objective));
        }
    }

    #[test]
    fn minimizers_satisfy_cone_constraint(m in 2usize..=8, n in 8usize..=14, s in 1usize..=4, seed in any::<u64>()) {
        let (a, x, y) = instance(m, n, s, 2, seed);
        let z = l1_minimize_default(&a, &y).unwrap();
        // ||z||_1 <= ||x||_1 is exactly the cone condition on h = z - x.
        prop_assert!(z.objective <= l1(&x.values) + 1e-9);
        let h_off: f64 = (0..n).filter(|j| !x.support.contains(j)).map(|j| z.solution[j].abs()).sum();
        let h_on: f64 = x.support.iter().zip(&x.values).map(|(&j, v)| (z.solution[j] - v).abs()).sum();
        prop_assert!(h_off <= h_on + 1e-8);
        // Snap solver noise to zero before the exact predicate.
        let snapped: Vec<f64> = z.solution.iter().map(|v| if v.abs() < 1e-9 { 0.0 } else { *v }).collect();
        if snapped.iter().enumerate().all(|(j, v)| x.support.contains(&j) || *v == 0.0) {
            prop_assert!(cone_constraint_holds(&x, &snapped).unwrap());
        }
    }

    #[test]
    fn feasibility_of_solutions(m in 1usize..=10, n in 2usize..=20, s in 0usize..=4, dist in 0usize..5, seed in any::<u64>()) {
        let (a, _, y) = instance(m, n.max(m), s, dist, seed);
        let z = l1_minimize_default(&a, &y).unwrap();
        let az = a.apply(&z.solution);
        let yinf = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        for (u, v) in az.iter().zip(&y) {
            prop_assert!((u - v).abs() <= 1e-9 * (1.0 + yinf));
        }
        prop_assert!(z.duality_gap <= 1e-8 * (1.0 + z.objective));
    }
}

#[test]
fn identity_recovers_every_signal() {
    let a = MeasurementMatrix::identity(6).unwrap();
    for seed in 0..20 {
        let x = sample_sparse_signal(6, 3, ValueLaw::Gaussian, seed).unwrap();
        let z = l1_minimize_default(&a, &measure(&a, &x).unwrap()).unwrap();
        assert!(check_exact_recovery(&z, &x, 1e-6).unwrap());
    }
}

#[test]
fn tie_is_broken_lexicographically() {
    let a = MeasurementMatrix::from_rows(&[vec![1.0, -1.0]]).unwrap();
    let o = l1_oracle(&a, &[1.0]).unwrap();
    assert!(!o.is_unique());
    assert_eq!(o.result.solution, vec![0.0, -1.0]);
    assert!(o.optima.contains(&vec![1.0, 0.0]));
}
