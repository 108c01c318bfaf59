//! Monte Carlo runs against exhaustive enumeration on tiny instances.

use ekr_core::combinatorics::binomial_exact;
use ekr_core::pair_stats::{
    estimate_from_records, fixed_size_oracle, law_from_records, run_trials, IndependentEnumeration,
};
use ekr_core::sampler::{enumerate_ksets, ModelConfig};
use ekr_core::stein_chen::{epsilon_multivariate, lambda_r};
use ekr_core::thresholds::janson_bounds;

const TRIALS: u64 = 20_000;

fn within_se(estimate: f64, exact: f64, trials: u64, label: &str) {
    let se = (exact * (1.0 - exact) / trials as f64).sqrt().max(1e-12);
    assert!(
        (estimate - exact).abs() <= 4.0 * se + 1e-12,
        "{label}: estimate {estimate} exact {exact} se {se}"
    );
}

#[test]
fn independent_mode_matches_oracle() {
    for (n, k) in [(4, 2), (5, 2), (6, 2), (6, 3)] {
        let oracle = IndependentEnumeration::new(n, k).unwrap();
        for p in [0.05, 0.2, 0.5] {
            let exact = oracle.evaluate(p).unwrap();
            let cfg = ModelConfig::independent(n, k, p, 7);
            let records = run_trials(&cfg, TRIALS, None).unwrap();
            let est = estimate_from_records(&cfg, 0, &records).unwrap();
            within_se(est.estimate.estimate, exact.p_no_disjoint, TRIALS, &format!("n={n} k={k} p={p}"));
            for r in 0..=k {
                let emp = records.iter().filter(|c| c.x(r) == 0).count() as f64 / TRIALS as f64;
                within_se(emp, exact.marginals[r].prob(0), TRIALS, &format!("X_{r}=0 n={n} k={k} p={p}"));
            }
        }
    }
}

#[test]
fn fixed_mode_matches_oracle() {
    for (n, k, t) in [(4, 2, 2), (4, 2, 3), (6, 3, 2), (6, 3, 4), (7, 2, 5), (8, 2, 4), (8, 3, 3)] {
        let exact = fixed_size_oracle(n, k, t).unwrap();
        assert_eq!(
            exact.joint.iter().map(|j| j.numerator.unwrap()).sum::<u64>(),
            exact.denominator.unwrap()
        );
        let cfg = ModelConfig::fixed(n, k, t, 11);
        let records = run_trials(&cfg, TRIALS, None).unwrap();
        let est = estimate_from_records(&cfg, 0, &records).unwrap();
        within_se(est.estimate.estimate, exact.p_no_disjoint, TRIALS, &format!("n={n} k={k} t={t}"));
    }
}

#[test]
fn fixed_mode_mean_formula() {
    // E(X_r) = C(t,2) M_r / (C(n,k) - 1) without replacement.
    for (n, k, t) in [(6, 3, 3), (8, 2, 4), (7, 3, 2)] {
        let o = fixed_size_oracle(n, k, t).unwrap();
        let total = binomial_exact(n as u64, k as u64).unwrap() as f64;
        for r in 0..k {
            let m = (binomial_exact(k as u64, r as u64).unwrap()
                * binomial_exact((n - k) as u64, (k - r) as u64).unwrap()) as f64;
            let expected = (t * (t - 1)) as f64 / 2.0 * m / (total - 1.0);
            assert!((o.means[r] - expected).abs() < 1e-12, "n={n} k={k} t={t} r={r}");
        }
    }
}

#[test]
fn lambda_matches_brute_force_pair_count() {
    for n in 2..=12 {
        for k in 1..=n / 2 {
            let sets = enumerate_ksets(n, k).unwrap();
            let mut pairs = vec![0_u64; k + 1];
            for i in 0..sets.len() {
                for j in i + 1..sets.len() {
                    pairs[sets[i].intersection_size(&sets[j]) as usize] += 1;
                }
            }
            let p = 0.03;
            for r in 0..=k {
                let expected = pairs[r] as f64 * p * p;
                let got = lambda_r(n as u64, k as u64, r as u64, p).unwrap();
                assert!((got - expected).abs() <= 1e-12 * expected.max(1e-300), "n={n} k={k} r={r}");
            }
        }
    }
}

#[test]
fn janson_sandwich_holds_empirically() {
    for (n, k) in [(6, 3), (6, 2), (5, 2)] {
        for p in [0.05, 0.1] {
            let j = janson_bounds(n as u64, k as u64, 0, p).unwrap();
            let cfg = ModelConfig::independent(n, k, p, 3);
            let est = estimate_from_records(&cfg, 0, &run_trials(&cfg, TRIALS, None).unwrap()).unwrap();
            let e = est.estimate;
            assert!(e.ci_high >= j.lower_bound && e.ci_low <= j.upper_bound, "n={n} k={k} p={p}");
        }
    }
}

#[test]
fn empirical_means_track_lambda() {
    let (n, k) = (200_usize, 10_usize);
    let total = binomial_exact(n as u64, k as u64).unwrap() as f64;
    let cfg = ModelConfig::independent(n, k, 40.0 / total, 5);
    let records = run_trials(&cfg, 5_000, None).unwrap();
    let law = law_from_records(&cfg, &records, 3, 0, 200).unwrap();
    for m in &law.marginals {
        assert!((m.mean - m.lambda).abs() <= 4.0 * m.mean_std_error, "r={} mean={} lambda={}", m.r, m.mean, m.lambda);
    }

    // Without replacement the mean is C(t,2) M_r / (C(n,k) - 1) instead.
    let t = 40_u64;
    let cfg = ModelConfig::fixed(n, k, t, 5);
    let records = run_trials(&cfg, 5_000, None).unwrap();
    let law = law_from_records(&cfg, &records, 3, 0, 200).unwrap();
    for m in &law.marginals {
        let partners = (binomial_exact(k as u64, m.r as u64).unwrap()
            * binomial_exact((n - k) as u64, (k - m.r) as u64).unwrap()) as f64;
        let exact = (t * (t - 1)) as f64 / 2.0 * partners / (total - 1.0);
        assert!((m.mean - exact).abs() <= 4.0 * m.mean_std_error, "r={} mean={} exact={exact}", m.r, m.mean);
    }
}

#[test]
fn joint_zero_probability_against_product() {
    // Sparse independent instance where the product approximation is tight.
    let (n, k, p) = (6, 3, 0.02);
    let eps = epsilon_multivariate(n as u64, k as u64, 1, p).unwrap().tv_bound;
    let cfg = ModelConfig::independent(n, k, p, 13);
    let records = run_trials(&cfg, TRIALS, None).unwrap();
    let law = law_from_records(&cfg, &records, 1, 1, 300).unwrap();
    let z = law.joint.p_all_zero;
    let gap = if law.joint.product_all_zero < z.ci_low {
        z.ci_low - law.joint.product_all_zero
    } else if law.joint.product_all_zero > z.ci_high {
        law.joint.product_all_zero - z.ci_high
    } else {
        0.0
    };
    assert!(gap <= eps, "gap {gap} eps {eps}");
    let (lo, hi) = law.joint.tv_ci;
    assert!(0.0 <= lo && lo <= hi && hi <= 1.0);
}
