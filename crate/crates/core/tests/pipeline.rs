use fadenet_core::fading::sample_gain_matrix;
use fadenet_core::netmodel::{throughput, ActiveSet, GainMatrix, NetworkParams};
use fadenet_core::oracle::{max_throughput_exhaustive, tblas_optimality_gap};
use fadenet_core::tblas::{self, activate};
use fadenet_core::trial::{run_trial, TrialMode};
use fadenet_core::{bounds, FadingSpec, SeedSpec, ThresholdPolicy};

#[test]
fn two_link_example_through_public_api() {
    let g = GainMatrix::new(2, vec![2.0, 10.0, 10.0, 3.0]).unwrap();
    let params = NetworkParams::new(2, 1.0).unwrap();
    let best = max_throughput_exhaustive(&g, &params).unwrap();
    assert_eq!(best.best.as_slice(), &[1]);
    assert!((best.throughput - 4f64.ln()).abs() < 1e-15);
    let gap = tblas_optimality_gap(&g, &params, &[2.5]).unwrap();
    assert_eq!(gap.ratio, 1.0);
}

#[test]
fn tblas_never_beats_the_optimum() {
    let params = NetworkParams::new(10, 1.0).unwrap();
    for s in 0..30 {
        let g = sample_gain_matrix(&FadingSpec::Rayleigh, 10, SeedSpec::new(40, s)).unwrap();
        let best = max_throughput_exhaustive(&g, &params).unwrap().throughput;
        for delta in [0.0, 0.5, 1.0, 2.0, 3.0] {
            let set = activate(&g.direct_gains(), delta);
            assert!(throughput(&g, &set, &params).unwrap().throughput <= best);
        }
    }
}

#[test]
fn dense_trial_matches_manual_evaluation() {
    let n = 200;
    let params = NetworkParams::new(n, 2.0).unwrap();
    let policy = ThresholdPolicy::default().with_delta(2.5);
    let seed = SeedSpec::new(41, 3);
    let rec = run_trial(&params, &policy, TrialMode::Dense, seed).unwrap();
    let g = sample_gain_matrix(&FadingSpec::Rayleigh, n, seed).unwrap();
    let set = activate(&g.direct_gains(), 2.5);
    let report = throughput(&g, &set, &params).unwrap();
    assert_eq!(rec.k_active, set.len());
    assert_eq!(rec.throughput, report.throughput);
    assert!(set.iter().all(|l| g.direct(l) > 2.5));
}

#[test]
fn achievable_bound_at_optimum_is_consistent() {
    for n in [1e3, 1e5, 1e7] {
        let sol = tblas::optimize_threshold(n, &ThresholdPolicy::default()).unwrap();
        let again =
            tblas::achievable_throughput(n, sol.delta, &ThresholdPolicy::default()).unwrap();
        assert_eq!(sol.throughput, again);
        assert!(sol.predicted_active <= n);
    }
}

#[test]
fn empty_active_set_has_zero_throughput() {
    let g = sample_gain_matrix(&FadingSpec::Rayleigh, 5, SeedSpec::new(1, 1)).unwrap();
    let r = throughput(
        &g,
        &ActiveSet::empty(),
        &NetworkParams::new(5, 1.0).unwrap(),
    )
    .unwrap();
    assert_eq!(r.throughput, 0.0);
}

#[test]
fn rate_and_sinr_laws_agree_with_each_other() {
    for &(k, snr) in &[(2usize, 1.0f64), (5, 10.0)] {
        for i in 0..50 {
            let x = i as f64 * 0.1;
            let a = bounds::rate_ccdf(x, k, snr).unwrap();
            let b = bounds::sinr_ccdf(x.exp_m1(), k, snr).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
        }
    }
}
