use fadenet::experiments::{self, summarize, SweepConfig, ThresholdChoice};
use fadenet_core::stats::{ks_two_sample, ks_two_sample_critical_value};
use fadenet_core::tblas::{self, ThresholdPolicy};
use fadenet_core::trial::sample_active_count;
use fadenet_core::{NetworkParams, SeedSpec, TrialMode};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete, DiscreteCDF};

fn optimal_policy(n: u64) -> ThresholdPolicy {
    let policy = ThresholdPolicy::default();
    let delta = tblas::optimize_threshold(n as f64, &policy).unwrap().delta;
    policy.with_delta(delta)
}

#[test]
fn dense_and_virtual_paths_agree() {
    let n = 1000u64;
    let params = NetworkParams::new(n as usize, 1.0).unwrap();
    let policy = optimal_policy(n);
    let dense = experiments::run_trials(&params, &policy, TrialMode::Dense, 11, 0, 500).unwrap();
    let virt = experiments::run_trials(&params, &policy, TrialMode::Virtual, 11, 1, 500).unwrap();
    let t = |rs: &[fadenet_core::TrialRecord]| rs.iter().map(|r| r.throughput).collect::<Vec<_>>();
    let d = ks_two_sample(&t(&dense), &t(&virt));
    assert!(
        d < ks_two_sample_critical_value(0.01, 500, 500),
        "KS distance {d}"
    );
}

#[test]
fn bound_holds_in_most_trials_at_moderate_size() {
    let n = 1000u64;
    let params = NetworkParams::new(n as usize, 1.0).unwrap();
    let records =
        experiments::run_trials(&params, &optimal_policy(n), TrialMode::Virtual, 12, 0, 500)
            .unwrap();
    let held = records.iter().filter(|r| r.bound_satisfied).count() as f64 / 500.0;
    assert!(held >= 0.95, "{held}");
}

#[test]
fn violation_fraction_does_not_grow() {
    let mut prev = 1.0;
    for n in [1_000u64, 10_000, 100_000] {
        let params = NetworkParams::new(n as usize, 1.0).unwrap();
        let records =
            experiments::run_trials(&params, &optimal_policy(n), TrialMode::Virtual, 13, 0, 300)
                .unwrap();
        let v = experiments::bound_violation_fraction(&records);
        assert!(v <= prev, "n={n}: {v} > {prev}");
        prev = v;
    }
}

#[test]
fn active_count_has_binomial_marginal() {
    let (n, delta) = (2000u64, 4.0f64);
    let q = (-delta).exp();
    let trials = 10_000;
    let mut counts = vec![0usize; n as usize + 1];
    for t in 0..trials {
        let mut rng = SeedSpec::new(21, t).rng();
        counts[sample_active_count(n, q, &mut rng) as usize] += 1;
    }
    let binom = Binomial::new(q, n).unwrap();
    // Pool cells so each expected count is at least 5.
    let mut stat = 0.0;
    let mut cells = 0;
    let (mut obs, mut exp) = (0.0, 0.0);
    for k in 0..=n {
        obs += counts[k as usize] as f64;
        exp += binom.pmf(k) * trials as f64;
        if exp >= 5.0 && (1.0 - binom.cdf(k)) * trials as f64 >= 5.0 {
            stat += (obs - exp) * (obs - exp) / exp;
            cells += 1;
            obs = 0.0;
            exp = 0.0;
        }
    }
    // Whatever is left pools into the last cell.
    stat += (obs - exp) * (obs - exp) / exp;
    cells += 1;
    let critical = ChiSquared::new((cells - 1) as f64)
        .unwrap()
        .inverse_cdf(0.99);
    assert!(
        stat < critical,
        "chi2 = {stat} with {cells} cells, critical {critical}"
    );
}

#[test]
fn summary_matches_recomputation() {
    let params = NetworkParams::new(3000, 1.0).unwrap();
    let records = experiments::run_trials(
        &params,
        &optimal_policy(3000),
        TrialMode::Virtual,
        14,
        0,
        100,
    )
    .unwrap();
    let row = summarize(&records).unwrap();
    let mean = records.iter().map(|r| r.throughput).sum::<f64>() / 100.0;
    let var = records
        .iter()
        .map(|r| (r.throughput - mean).powi(2))
        .sum::<f64>()
        / 99.0;
    assert!((row.throughput.mean - mean).abs() < 1e-12);
    assert!((row.throughput.sd - var.sqrt()).abs() < 1e-12);
}

fn sweep(threads: usize, policy: ThresholdPolicy) -> experiments::ScalingReport {
    let pool = experiments::thread_pool(Some(threads)).unwrap();
    pool.install(|| {
        experiments::scaling_sweep(&SweepConfig {
            sizes: vec![100, 1_000, 10_000, 100_000],
            reps: 100,
            snr: 1.0,
            policy,
            threshold: ThresholdChoice::Optimize,
            delta: 0.0,
            mode: TrialMode::Virtual,
            seed: 15,
        })
        .unwrap()
    })
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let a = sweep(1, ThresholdPolicy::default());
    let b = sweep(6, ThresholdPolicy::default());
    assert_eq!(a, b);
}

#[test]
fn sweep_trends_with_default_slack() {
    let report = sweep(4, ThresholdPolicy::default());
    let rows = &report.rows;
    assert!(rows
        .windows(2)
        .all(|w| w[1].throughput.mean > w[0].throughput.mean));
    assert!(rows
        .windows(2)
        .all(|w| w[1].ratio_active > w[0].ratio_active));
    assert!(rows
        .iter()
        .all(|r| r.trials >= 30 && r.ratio_throughput > 0.0));
}
