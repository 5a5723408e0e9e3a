mod common;

use opstable::charfn::{density, omega_tilde};
use opstable::mc_oracle::{
    empirical_cf, histogram, ks_critical, ks_two_sample, mc_price, quantile, sample_stable,
    simulate_log_price, Measure, SimConfig,
};
use opstable::{ContinuationMode, Execution, MarketModel, OptionContract, QuadratureConfig};

fn one_d(rho: f64) -> MarketModel {
    MarketModel::one_dimensional(rho, 0.3, 1.0, 0.0, ContinuationMode::RealPart).unwrap()
}

#[test]
fn self_similar_in_time() {
    let m = one_d(1.5);
    let a = simulate_log_price(&m, 2.0, &SimConfig::new(50_000, 1)).unwrap();
    let b: Vec<f64> = simulate_log_price(&m, 1.0, &SimConfig::new(50_000, 2))
        .unwrap()
        .iter()
        .map(|x| x * 2f64.powf(1.0 / 1.5))
        .collect();
    assert!(ks_two_sample(&a, &b) < ks_critical(a.len(), b.len(), 0.01));
}

#[test]
fn generic_eigen_projection_is_one_dimensional_stable() {
    let o = common::generic_orthogonal();
    let (theta, scale) = (0.9, 0.3);
    // sigma along the second eigenvector isolates Y_2
    let m = common::generic_with_sigma([o[(0, 1)].re, o[(1, 1)].re]);
    let tau = 1.5;
    let a = simulate_log_price(&m, tau, &SimConfig::new(50_000, 3)).unwrap();
    let b = sample_stable(1.0 / theta, (tau * scale).powf(theta), 50_000, &SimConfig::new(1, 4)).unwrap();
    assert!(ks_two_sample(&a, &b) < ks_critical(a.len(), b.len(), 0.01));
}

#[test]
fn empirical_cf_tracks_omega_tilde() {
    for (name, m) in [("pure scaling", common::pure_scaling_2d()), ("generic", common::generic())] {
        let n = 200_000;
        let x = simulate_log_price(&m, 0.7, &SimConfig::new(n, 5)).unwrap();
        let band = 3.0 / (n as f64).sqrt();
        let sigma = m.sigma().clone();
        let inside = (1..=50)
            .filter(|i| {
                let k = 0.1 * *i as f64;
                let want = omega_tilde(&m, &(&sigma * k), 0.7).unwrap();
                (empirical_cf(&x, k) - want).norm() < band
            })
            .count();
        assert!(inside >= 48, "{name}: {inside} of 50 inside the band");
    }
}

#[test]
fn histogram_matches_density() {
    let q = QuadratureConfig::default();
    let m = one_d(1.7);
    let n = 1_000_000;
    let x = simulate_log_price(&m, 1.0, &SimConfig::new(n, 6)).unwrap();
    let (lo, hi) = (quantile(&x, 0.005), quantile(&x, 0.995));
    let bins = 100;
    let (hist, _) = histogram(&x, lo, hi, bins);
    let width = (hi - lo) / bins as f64;
    let l1: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, h)| (h - density(&m, lo + (i as f64 + 0.5) * width, 1.0, &q).unwrap()).abs() * width)
        .sum();
    assert!(l1 < 5.0 * (bins as f64 / n as f64).sqrt(), "L1 {l1}");
}

#[test]
fn physical_measure_adds_drift() {
    let m = one_d(1.5).with_alpha(0.4);
    let cfg = SimConfig::new(1000, 9);
    let comp = simulate_log_price(&m, 2.0, &cfg).unwrap();
    let phys = simulate_log_price(&m, 2.0, &SimConfig { measure: Measure::Physical, ..cfg }).unwrap();
    for (a, b) in comp.iter().zip(&phys) {
        assert!((b - a - 0.8).abs() < 1e-12);
    }
}

#[test]
fn gaussian_mc_matches_black_scholes() {
    let vol = 0.2;
    let m = MarketModel::one_dimensional(2.0, 0.5 * vol * vol, 1.0, 0.05, ContinuationMode::RealPart).unwrap();
    let opt = OptionContract::call(100.0, 1.0).unwrap();
    let est = mc_price(&m, &opt, 100.0, 0.0, &SimConfig::new(1_000_000, 10)).unwrap();
    let bs = common::black_scholes(100.0, 100.0, 0.05, vol, 1.0);
    assert!(!est.via_parity);
    assert!((est.price - bs).abs() < 3.0 * est.stderr, "{} vs {bs} +- {}", est.price, est.stderr);
    assert!(est.variance_stable);
}

#[test]
fn heavy_tail_call_goes_through_parity() {
    let m = MarketModel::one_dimensional(1.7, 0.02, 1.0, 0.03, ContinuationMode::RealPart).unwrap();
    let opt = OptionContract::call(1.0, 0.25).unwrap();
    let est = mc_price(&m, &opt, 1.0, 0.0, &SimConfig::new(100_000, 11)).unwrap();
    assert!(est.via_parity);
    assert!(est.variance_stable);
}

#[test]
fn bit_identical_for_any_schedule() {
    let m = common::generic();
    let cfg = SimConfig { block_size: 777, ..SimConfig::new(10_000, 12) };
    let a = simulate_log_price(&m, 1.0, &cfg.with_execution(Execution::Parallel)).unwrap();
    let b = simulate_log_price(&m, 1.0, &cfg.with_execution(Execution::Sequential)).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn rotation_regime_has_no_sampler() {
    let m = common::rotation();
    assert!(simulate_log_price(&m, 1.0, &SimConfig::new(10, 1)).is_err());
}
