mod common;

use proptest::prelude::*;

use strainlim::fem::norms::stress_lp_norm;
use strainlim::fem::StressSpace;
use strainlim::material::{apply_a_n, solve_local_step1};
use strainlim::mesh::uniform_square_mesh;
use strainlim::problems::Problem;
use strainlim::solver::{a_priori_stress_bound, a_priori_stress_measure, Solver, SolverConfig};
use strainlim::{builtin_law, BoundaryTag, RegularizationParams, SymTensor};

use common::newton_oracle;

fn comp() -> impl Strategy<Value = f64> {
    prop_oneof![-10.0..10.0f64, -1e-3..1e-3f64, -1e3..1e3f64]
}

fn tensor2() -> impl Strategy<Value = SymTensor> {
    (comp(), comp(), comp()).prop_map(|(a, b, c)| SymTensor::new2(a, b, c))
}

fn tensor3() -> impl Strategy<Value = SymTensor> {
    prop::array::uniform6(comp()).prop_map(|c| SymTensor::new3(c[0], c[1], c[2], c[3], c[4], c[5]))
}

fn any_tensor() -> impl Strategy<Value = SymTensor> {
    prop_oneof![tensor2(), tensor3()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn norm_splits_into_trace_and_deviator(s in any_tensor()) {
        let d = s.dim() as f64;
        let lhs = s.norm_sq();
        let rhs = s.deviatoric().norm_sq() + s.trace().powi(2) / d;
        prop_assert!((lhs - rhs).abs() <= 1e-14 * lhs.max(f64::MIN_POSITIVE), "{lhs} vs {rhs}");
    }

    #[test]
    fn trace_and_deviator_bounds(s in any_tensor()) {
        let d = s.dim() as f64;
        let (n, tr, dv) = (s.norm(), s.trace().abs(), s.deviatoric().norm());
        let slack = 1.0 + 1e-14;
        prop_assert!(n <= (dv + tr) * slack);
        prop_assert!(tr + dv <= (2.0 * d).sqrt() * n * slack);
        prop_assert!(tr <= d.sqrt() * n * slack);
        prop_assert!(dv <= n * slack);
    }

    #[test]
    fn power_sum_lower_bound(s in any_tensor(), k in 0usize..4) {
        let p = [1.0, 1.5, 2.0, 3.0][k];
        let lhs = 2f64.powf(1.0 - p) * s.norm().powf(p);
        let rhs = s.trace().abs().powf(p) + s.deviatoric().norm().powf(p);
        prop_assert!(lhs <= rhs * (1.0 + 1e-14), "p = {p}: {lhs} > {rhs}");
    }

    #[test]
    fn holder_power_contraction(x in -50.0..50.0f64, y in -50.0..50.0f64, k in 0usize..3) {
        prop_assume!(x != 0.0 && y != 0.0);
        let a = [0.5, 1.0 / 3.0, 0.1][k];
        let pw = |z: f64| z * z.abs().powf(a - 1.0);
        let lhs = (pw(x) - pw(y)).abs();
        let rhs = 2f64.powf(1.0 - a) * (x - y).abs().powf(a);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "a = {a}: {lhs} > {rhs}");
    }

    #[test]
    fn regularized_map_is_monotone(s in tensor2(), r in tensor2(), k in 0usize..3) {
        let (n, t) = [(1.0, 1.0), (2.0, 2.0), (100.0, 1.0)][k];
        let law = builtin_law();
        let reg = RegularizationParams::new(n, t).unwrap();
        let gap = (apply_a_n(&s, &law, &reg) - apply_a_n(&r, &law, &reg)).contract(&(s - r));
        let scale = (s - r).norm() * (s.norm() + r.norm() + 1.0);
        prop_assert!(gap >= -1e-13 * scale, "gap {gap}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn local_step1_matches_newton_oracle(r in tensor2(), k in 0usize..3) {
        let tau = [0.01, 1.0, 2.0][k];
        let law = builtin_law();
        let got = solve_local_step1(&r, tau, &law).unwrap();
        let want = newton_oracle(&r, tau, &law);
        prop_assert!((got - want).norm() <= 1e-9 * (1.0 + want.norm()), "{got:?} vs {want:?}");
    }
}

#[test]
fn a_priori_bound_holds_for_pure_dirichlet_problems() {
    // f = (c, 0) = -div F with F = diag(-c x, 0), so |F|_q^q = c^q / (q + 1).
    for &(n, c) in &[(1.0, 1.0), (2.0, 4.0), (3.0, 10.0)] {
        let law = builtin_law();
        let k = law.constants.unwrap();
        let reg = RegularizationParams::new(n, n).unwrap();
        let problem = Problem::assemble(
            uniform_square_mesh(8).unwrap(),
            StressSpace::P0,
            &[BoundaryTag::DirichletAll],
            law,
            reg,
            &|_| [c, 0.0],
            &[],
            &|_| [0.0, 0.0],
            None,
        )
        .unwrap();
        let report = Solver::new(&problem, SolverConfig::new(0.5, 1e-8).unwrap()).unwrap().run().unwrap();
        assert!(report.converged);
        let q = 1.0 + 1.0 / n;
        let f_norm = (c.powf(q) / (q + 1.0)).powf(1.0 / q);
        let bound = a_priori_stress_bound(f_norm, n, k.c1, k.c2, k.kappa, 1.0, 2.0);
        let measure = a_priori_stress_measure(&problem.disc, &report.state.t, n, k.c1);
        assert!(measure > 0.0 && measure <= bound, "n = {n}: {measure} > {bound}");
        assert!(stress_lp_norm(&problem.disc, &report.state.t, 1.0) > 0.0);
    }
}
