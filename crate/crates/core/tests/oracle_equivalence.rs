use bff_core::oracle::{
    log_density_null, log_marginal_mixture_chisq, log_marginal_mixture_f, NoncentralDensityQuery, Oracle,
};
use bff_core::special_math::{integrate_with_breaks, QuadratureSpec};
use bff_core::TestStatistic;

fn spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-13, 1e-11, 4000).unwrap()
}

fn total_mass<F: Fn(f64) -> TestStatistic>(make: F, lambda: f64, lower: f64, breaks: &[f64]) -> f64 {
    let oracle = Oracle::default();
    integrate_with_breaks(
        |x| {
            let q = NoncentralDensityQuery::new(make(x), lambda).unwrap();
            oracle.log_density_noncentral(&q).unwrap().exp()
        },
        lower,
        f64::INFINITY,
        breaks,
        &spec(),
    )
    .unwrap()
    .value
}

#[test]
fn noncentral_densities_normalize() {
    for lambda in [0.0, 1.0, 5.0, 20.0] {
        let z = total_mass(|x| TestStatistic::Z { z: x }, lambda, f64::NEG_INFINITY, &[0.0, lambda]);
        assert!((z - 1.0).abs() <= 1e-7, "z lambda={lambda}: {z}");

        let t = total_mass(|x| TestStatistic::T { t: x, nu: 8 }, lambda, f64::NEG_INFINITY, &[0.0, lambda, 2.0 * lambda]);
        assert!((t - 1.0).abs() <= 1e-7, "t lambda={lambda}: {t}");

        for k in [1u32, 2, 5] {
            let kf = f64::from(k);
            let c = total_mass(|x| TestStatistic::ChiSq { h: x, k }, lambda, 0.0, &[1.0, kf + lambda, 2.0 * (kf + lambda)]);
            assert!((c - 1.0).abs() <= 1e-7, "chisq k={k} lambda={lambda}: {c}");
        }

        for (k, m) in [(2u32, 12u32), (4, 30)] {
            let mean = (f64::from(k) + lambda) / f64::from(k);
            let f = total_mass(|x| TestStatistic::F { f: x, k, m }, lambda, 0.0, &[0.5, mean, 3.0 * mean]);
            assert!((f - 1.0).abs() <= 1e-7, "F ({k},{m}) lambda={lambda}: {f}");
        }
    }
}

#[test]
fn mixture_f_normalizes() {
    for (k, m, tau2) in [(2u32, 82u32, 0.833), (3, 20, 5.0), (1, 8, 0.2)] {
        let total = integrate_with_breaks(
            |f| log_marginal_mixture_f(f, k, m, tau2).unwrap().exp(),
            0.0,
            f64::INFINITY,
            &[0.5, 1.0 + tau2, 4.0 * (1.0 + tau2)],
            &spec(),
        )
        .unwrap()
        .value;
        assert!((total - 1.0).abs() <= 1e-7, "k={k} m={m} tau2={tau2}: {total}");
    }
}

#[test]
fn mixture_chisq_normalizes() {
    for (k, tau2) in [(6u32, 0.8661), (1, 3.0), (10, 0.05)] {
        let total = integrate_with_breaks(
            |h| log_marginal_mixture_chisq(h, k, tau2).unwrap().exp(),
            0.0,
            f64::INFINITY,
            &[1.0, f64::from(k) * (1.0 + tau2)],
            &spec(),
        )
        .unwrap()
        .value;
        assert!((total - 1.0).abs() <= 1e-7, "k={k} tau2={tau2}: {total}");
    }
}

#[test]
fn chisq_series_single_term_at_zero_lambda() {
    let oracle = Oracle::default();
    for (h, k) in [(0.3, 1u32), (4.0, 4), (40.0, 9)] {
        let stat = TestStatistic::ChiSq { h, k };
        let q = NoncentralDensityQuery::new(stat, 0.0).unwrap();
        assert_eq!(oracle.log_density_noncentral(&q).unwrap(), log_density_null(&stat).unwrap());
    }
}

#[test]
fn large_noncentrality_series() {
    // Poisson weights peak near λ/2 = 500, far past the default min_terms
    let oracle = Oracle::default();
    let q = NoncentralDensityQuery::new(TestStatistic::ChiSq { h: 1000.0, k: 3 }, 1000.0).unwrap();
    let v = oracle.log_density_noncentral(&q).unwrap();
    // normal approximation: mean k+λ, variance 2(k+2λ)
    let approx = -0.5 * (2.0 * std::f64::consts::PI * 2.0 * 2003.0).ln() - 9.0 / (2.0 * 4006.0);
    assert!((v - approx).abs() < 0.05, "{v} vs {approx}");

    let q = NoncentralDensityQuery::new(TestStatistic::F { f: 20.0, k: 4, m: 400 }, 80.0).unwrap();
    assert!(oracle.log_density_noncentral(&q).unwrap().is_finite());
}

#[test]
fn t_series_cross_check_grid() {
    let oracle = Oracle::default();
    let mut refused = 0;
    for t in [-3.0, -0.5, 0.0, 1.0, 2.0, 5.0] {
        for nu in [1u32, 4, 15, 60] {
            for lambda in [-2.0, 0.0, 0.7, 3.0] {
                let q = NoncentralDensityQuery::new(TestStatistic::T { t, nu }, lambda).unwrap();
                let a = oracle.log_density_noncentral(&q).unwrap();
                match oracle.log_density_noncentral_t_series(t, nu, lambda) {
                    Ok(b) => assert!((a - b).abs() <= 1e-9, "t={t} nu={nu} lambda={lambda}: {a} vs {b}"),
                    Err(_) => {
                        // only the alternating (λt < 0) branch may refuse
                        assert!(lambda * t < 0.0, "t={t} nu={nu} lambda={lambda}");
                        refused += 1;
                    }
                }
            }
        }
    }
    assert!(refused <= 8, "{refused} series evaluations refused");
}

#[test]
fn marginal_equals_bf_times_null() {
    let oracle = Oracle::default();
    for stat in [
        TestStatistic::Z { z: 1.7 },
        TestStatistic::T { t: -2.2, nu: 14 },
        TestStatistic::ChiSq { h: 7.5, k: 3 },
        TestStatistic::F { f: 2.9, k: 2, m: 50 },
    ] {
        let tau2 = 2.5;
        let m1 = oracle.log_marginal_quadrature(&stat, tau2).unwrap();
        let m0 = log_density_null(&stat).unwrap();
        let closed = stat.log_bf(tau2).unwrap();
        assert!(((m1 - m0 - closed).exp() - 1.0).abs() <= 1e-6, "{stat:?}");
    }
}
