use std::f64::consts::PI;

use poisson_lebesgue::bestapprox::{best_approx_l2, solve_lp};
use poisson_lebesgue::harness::{
    read_coefficients, run_experiment, sample_rng, sample_unit_ball, write_coefficients, write_csv_to, ExperimentConfig,
};
use poisson_lebesgue::kernel::{kernel_norm, scaled_kernel_sup, KernelSpec};
use poisson_lebesgue::lebesgue::{gamma_bound, rhs_theorem1, verify_inequality};
use poisson_lebesgue::params::{condition_holds, n0, threshold, ClassParams, Index};
use poisson_lebesgue::scaled::ScaledValue;
use poisson_lebesgue::trig::{
    convolve_kernel, l1_norm_exact, lp_norm, sup_norm_certified, GridFunction, TrigPoly,
};
use proptest::prelude::*;

fn poly_strategy(max_degree: usize) -> impl Strategy<Value = TrigPoly<f64>> {
    (1..=max_degree).prop_flat_map(|d| {
        (
            -1.0..1.0f64,
            prop::collection::vec(-1.0..1.0f64, d),
            prop::collection::vec(-1.0..1.0f64, d),
        )
            .prop_map(|(a0, c, s)| TrigPoly::new(a0, c, s).unwrap())
    })
}

fn class_strategy() -> impl Strategy<Value = ClassParams<f64>> {
    (0.8..2.0f64, 0.45..0.9f64, 0.0..4.0f64).prop_map(|(a, r, b)| ClassParams::new(a, r, b, Index::Finite(2.0)).unwrap())
}

fn zero_mean(mut f: TrigPoly<f64>) -> TrigPoly<f64> {
    f.a0 = 0.0;
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conjugate_is_an_involution(p in 1.01..50.0f64) {
        let q = Index::Finite(p).conjugate().unwrap();
        let back = q.conjugate().unwrap().finite_value().unwrap();
        prop_assert!((back - p).abs() < 1e-10 * p);
        prop_assert!((1.0 / p + q.reciprocal() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn n0_is_minimal(alpha in 0.5..3.0f64, r in 0.3..0.9f64, pi in 0usize..4) {
        let p = [Index::Finite(1.0), Index::Finite(1.5), Index::Finite(4.0), Index::Inf][pi];
        let params = ClassParams::new(alpha, r, 0.0, p).unwrap();
        if let Ok(n) = n0(&params) {
            let thr = threshold(p).unwrap();
            prop_assert!(condition_holds(&params, n, thr));
            prop_assert!(n == 1 || !condition_holds(&params, n - 1, thr));
        }
    }

    #[test]
    fn grid_round_trip(f in poly_strategy(40), extra in 0u32..3) {
        let n = ((2 * f.degree() + 2).next_power_of_two()) << extra;
        let g = f.eval_grid(n).unwrap();
        let back = g.analyze(f.degree()).unwrap();
        let err = back.sub(&f);
        let max = err.cos.iter().chain(&err.sin).fold(err.a0.abs(), |m, v| m.max(v.abs()));
        prop_assert!(max < 1e-12, "{max}");
        let direct = GridFunction::new(f.samples(n)).unwrap();
        prop_assert_eq!(direct.len(), n);
    }

    #[test]
    fn parseval(f in poly_strategy(30)) {
        let coeff = PI * (f.a0 * f.a0 / 2.0 + f.cos.iter().chain(&f.sin).map(|c| c * c).sum::<f64>());
        let norm = lp_norm(&f, Index::Finite(2.0), 1e-13).unwrap();
        prop_assert!((norm * norm - coeff).abs() < 1e-10 * coeff.max(1e-300));
        prop_assert!((f.inner(&f) - coeff).abs() < 1e-12 * coeff.max(1.0));
    }

    #[test]
    fn exact_l1_matches_quadrature(f in poly_strategy(12)) {
        let exact = l1_norm_exact(&f);
        let trap = lp_norm(&f, Index::Finite(1.0), 1e-13).unwrap();
        let fine = GridFunction::new(f.samples(1 << 16)).unwrap().lp_norm(Index::Finite(1.0));
        prop_assert_eq!(exact, trap);
        // Trapezoid error is dominated by the kinks of |f|: at most h²|f'|/4 per
        // sign change, and there are at most 2·deg of them.
        let h = std::f64::consts::TAU / (1 << 16) as f64;
        let slope: f64 = (1..=f.degree()).map(|k| k as f64 * (f.cos[k - 1].abs() + f.sin[k - 1].abs())).sum();
        let kinks = 2.0 * f.degree() as f64 * h * h / 4.0 * slope;
        prop_assert!((exact - fine).abs() <= 2.0 * kinks + 1e-12 * exact.max(1.0));
    }

    #[test]
    fn certified_sup_encloses_dense_maximum(f in poly_strategy(20)) {
        let s = sup_norm_certified(&f);
        let dense = f.samples(1 << 15).into_iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(s.value <= dense + 1e-12);
        prop_assert!(dense <= s.upper() + 1e-12);
    }

    #[test]
    fn representation_identity(params in class_strategy(), f in poly_strategy(64), n in 1u64..48) {
        let phi = zero_mean(f);
        let trunc = (phi.degree() as u64).max(n);
        let full = KernelSpec::with_truncation(params, 1, trunc).unwrap();
        let tail = KernelSpec::with_truncation(params, n, trunc).unwrap();
        let a = convolve_kernel(&phi, &full).unwrap().deviation(n as usize);
        let b = convolve_kernel(&phi, &tail).unwrap().rescaled(a.log_scale);
        let d = a.poly.sub(&b.poly);
        let max = d.cos.iter().chain(&d.sin).fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(max < 1e-13, "{max}");
    }

    #[test]
    fn convolution_is_homogeneous(params in class_strategy(), f in poly_strategy(32), c in -3.0..3.0f64) {
        let phi = zero_mean(f);
        let spec = KernelSpec::with_truncation(params, 1, 32).unwrap();
        let a = convolve_kernel(&phi.scaled(c), &spec).unwrap().poly;
        let b = convolve_kernel(&phi, &spec).unwrap().poly.scaled(c);
        let d = a.sub(&b);
        prop_assert!(d.cos.iter().chain(&d.sin).all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn holder_chain(params in class_strategy(), f in poly_strategy(48), n in 2u64..20, pi in 0usize..3) {
        let pv = [1.0, 1.5, 3.0][pi];
        let params = params.with_p(Index::Finite(pv));
        let phi = zero_mean(f);
        prop_assume!(phi.effective_degree() >= n as usize);
        let spec = KernelSpec::new(params, n, 1e-17).unwrap();
        let rho = convolve_kernel(&phi, &spec).unwrap();
        let lhs = sup_norm_certified(&rho.poly).value;
        let kernel = match params.p_conjugate() {
            Index::Inf => scaled_kernel_sup(&spec).upper() / PI,
            pc => kernel_norm(&spec, pc, 1e-12).unwrap().at_scale(rho.log_scale),
        };
        let norm = lp_norm(&phi, params.p, 1e-12).unwrap();
        prop_assert!(lhs <= kernel * norm * (1.0 + 1e-9));
    }

    #[test]
    fn scaled_value_arithmetic(a in -1e3..1e3f64, b in -1e3..1e3f64, la in -50.0..50.0f64, lb in -50.0..50.0f64) {
        let x = ScaledValue::new(a, la);
        let y = ScaledValue::new(b, lb);
        let (xv, yv) = (a * la.exp(), b * lb.exp());
        let sum = x.add(y).value();
        prop_assert!((sum - (xv + yv)).abs() <= 1e-12 * (xv.abs() + yv.abs()).max(1e-300));
        prop_assert!(((x * y).value() - xv * yv).abs() <= 1e-12 * (xv * yv).abs());
        if b != 0.0 {
            prop_assert!((x.ratio(&y) - xv / yv).abs() <= 1e-12 * (xv / yv).abs());
        }
    }

    #[test]
    fn rhs_correction_vanishes_along_n_ladder(alpha in 0.5..3.0f64, r in 0.3..0.9f64, pi in 0usize..3) {
        let p = [1.0, 1.5, 3.0][pi];
        let params = ClassParams::new(alpha, r, 0.0, Index::Finite(p)).unwrap();
        let ratio = |n: u64| {
            let full = rhs_theorem1(&params, n, 1.0, gamma_bound()).unwrap();
            let main = rhs_theorem1(&params, n, 1.0, 0.0).unwrap();
            full.ratio(&main)
        };
        let ladder: Vec<f64> = (8..40).step_by(4).map(|e| ratio(1u64 << e)).collect();
        prop_assert!(ladder.windows(2).all(|w| w[1] < w[0]));
        prop_assert!(ladder.iter().all(|&v| v > 1.0));
        // Every correction term decays at least like n^{-slowest}.
        let slowest = r.min((1.0 - r) / p);
        let span = 2f64.powi(4 * (ladder.len() as i32 - 1));
        prop_assert!(ladder[ladder.len() - 1] - 1.0 <= (ladder[0] - 1.0) * span.powf(-slowest) * (1.0 + 1e-9));
    }

    #[test]
    fn coefficient_file_round_trip(a0 in any::<f64>(), c in prop::collection::vec(any::<f64>(), 0..20)) {
        prop_assume!(a0.is_finite() && c.iter().all(|v| v.is_finite()));
        let s: Vec<f64> = c.iter().map(|v| v / 3.0).collect();
        let poly = TrigPoly::new(a0, c, s).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("coeffs.json");
        write_coefficients(&path, &poly).unwrap();
        let back: TrigPoly<f64> = read_coefficients(&path).unwrap();
        prop_assert_eq!(back, poly);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn best_approximation_bounds_are_ordered(f in poly_strategy(48), n in 1usize..24, pi in 0usize..4) {
        let p = [1.0, 1.5, 2.0, 3.0][pi];
        let res = solve_lp(&f, n, Index::Finite(p), 1e-4, None).unwrap();
        prop_assert!(res.lower <= res.upper);
        let realized = lp_norm(&f.sub(&res.argmin), Index::Finite(p), 1e-10).unwrap();
        prop_assert!((realized - res.upper).abs() <= 1e-6 * res.upper.max(1e-12), "p={} n={} realized={:e} upper={:e}", p, n, realized, res.upper);
        if p == 2.0 {
            let exact = best_approx_l2(&f, n).unwrap();
            prop_assert!(res.gap() <= 1e-10);
            prop_assert!((res.upper - exact.upper).abs() <= 1e-8 * exact.upper.max(1e-300));
        }
    }

    #[test]
    fn best_approximation_is_monotone_in_n(f in poly_strategy(40), n in 1usize..20, pi in 0usize..3) {
        let p = Index::Finite([1.0, 1.5, 3.0][pi]);
        let first = solve_lp(&f, n, p, 1e-4, None).unwrap();
        let next = solve_lp(&f, n + 1, p, 1e-4, Some(&first.argmin)).unwrap();
        prop_assert!(next.upper <= first.upper * (1.0 + 1e-12), "{} > {}", next.upper, first.upper);
    }

    #[test]
    fn best_approximation_is_translation_invariant(f in poly_strategy(40), n in 1usize..20, j in 0usize..1024, pi in 0usize..3) {
        let p = Index::Finite([1.0, 1.5, 3.0][pi]);
        let h = 2.0 * PI * j as f64 / 1024.0;
        let a = solve_lp(&f, n, p, 1e-5, None).unwrap();
        let b = solve_lp(&f.shifted(h), n, p, 1e-5, None).unwrap();
        prop_assert!((a.upper - b.upper).abs() <= 2e-4 * a.upper.max(1e-12));
        prop_assert!(b.lower <= a.upper * (1.0 + 1e-9) && a.lower <= b.upper * (1.0 + 1e-9));
    }

    #[test]
    fn best_approximation_is_homogeneous(f in poly_strategy(40), n in 1usize..20, c in 0.1..10.0f64, pi in 0usize..3) {
        let p = Index::Finite([1.0, 1.5, 3.0][pi]);
        let a = solve_lp(&f, n, p, 1e-5, None).unwrap();
        let b = solve_lp(&f.scaled(-c), n, p, 1e-5, None).unwrap();
        prop_assert!((b.upper - c * a.upper).abs() <= 1e-4 * c * a.upper.max(1e-12));
    }

    #[test]
    fn implied_gamma_is_scale_invariant(params in class_strategy(), seed in any::<u64>(), c in 0.05..1.0f64) {
        let n = 12u64;
        let phi: TrigPoly<f64> = sample_unit_ball(params.p, 40, &mut sample_rng(seed, 0)).unwrap();
        let a = verify_inequality(&phi, &params, n, 1e-8).unwrap();
        let b = verify_inequality(&phi.scaled(c), &params, n, 1e-8).unwrap();
        let (ga, gb) = (a.implied_gamma.unwrap(), b.implied_gamma.unwrap());
        prop_assert!((ga - gb).abs() <= 1e-8 * ga.abs().max(1.0), "{ga} vs {gb}");
        prop_assert!(a.pass && b.pass);
    }

    #[test]
    fn samples_lie_on_the_unit_sphere(seed in any::<u64>(), index in 0u64..1000, cap in 1usize..200, pi in 0usize..4) {
        let p = [Index::Finite(1.0), Index::Finite(1.7), Index::Finite(2.0), Index::Finite(5.0)][pi];
        let phi: TrigPoly<f64> = sample_unit_ball(p, cap, &mut sample_rng(seed, index)).unwrap();
        prop_assert_eq!(phi.a0, 0.0);
        prop_assert!((lp_norm(&phi, p, 1e-13).unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn experiment_is_independent_of_thread_count() {
    let params = ClassParams::new(1.0, 0.5, 0.5, Index::Finite(1.5)).unwrap();
    let config = ExperimentConfig::new(params, 10, 6, 40, 99);
    let render = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let rep = pool.install(|| run_experiment(&config)).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &rep.rows).unwrap();
        String::from_utf8(buf).unwrap()
    };
    assert_eq!(render(1), render(3));
}
