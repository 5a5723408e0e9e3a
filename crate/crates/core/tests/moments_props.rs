mod common;

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use opstable::mc_oracle::{empirical_cf, moment_estimate, simulate_log_price, SimConfig};
use opstable::moments::{frac_moment, marginal_cf, prefactor_c, support_factor};
use opstable::{AngularFn, ContinuationMode, LogCharFn, MarketModel, QuadratureConfig};

fn models() -> Vec<(MarketModel, f64)> {
    // (model, Theta_l) with beta ranges chosen inside the existence bound
    vec![
        (common::pure_scaling_2d(), 1.0 / 1.6),
        (common::rotation(), 1.0 / 1.5),
        (eigen_aligned(1), 0.9),
    ]
}

/// Generic model with sigma along eigenvector `l`.
fn eigen_aligned(l: usize) -> MarketModel {
    let o = common::generic_orthogonal();
    common::generic_with_sigma([o[(0, l)].re, o[(1, l)].re])
}

proptest! {
    #![proptest_config(common::props(100))]

    #[test]
    fn time_scaling_law(beta in 0.05f64..1.0, t in 0.01f64..20.0) {
        for (m, theta) in models() {
            prop_assume!(beta * theta < 1.0);
            let one = frac_moment(&m, beta, 1.0).unwrap();
            let at_t = frac_moment(&m, beta, t).unwrap();
            let want = one * t.powf(beta * theta);
            prop_assert!((at_t - want).norm() <= 1e-12 * want.norm());
        }
    }

    #[test]
    fn phase_is_the_support_factor(beta in 0.05f64..1.05) {
        prop_assume!((beta - 1.0).abs() > 1e-6);
        for (m, _) in models() {
            let v = frac_moment(&m, beta, 1.0).unwrap();
            let ratio = v / support_factor(beta);
            prop_assert!(ratio.im.abs() <= 1e-12 * ratio.norm());
            prop_assert!(ratio.re > 0.0);
        }
    }

    #[test]
    fn prefactor_is_finite_and_continuous(beta in 0.01f64..1.49) {
        let a = prefactor_c(beta, 1.5).unwrap();
        let b = prefactor_c(beta + 1e-7, 1.5).unwrap();
        prop_assert!(a.is_finite() && a > 0.0);
        prop_assert!((a - b).abs() <= 1e-4 * a);
    }
}

#[test]
fn generic_on_eigenvector_reduces_to_one_dimension() {
    for (l, (theta, scale)) in [(0.6, 0.5), (0.9, 0.3)].into_iter().enumerate() {
        let m = eigen_aligned(l);
        let flat = MarketModel::one_dimensional(1.0 / theta, scale, 1.0, 0.0, ContinuationMode::RealPart)
            .unwrap();
        for beta in [0.3, 0.7] {
            let a = frac_moment(&m, beta, 1.3).unwrap();
            let b = frac_moment(&flat, beta, 1.3).unwrap();
            assert!((a - b).norm() <= 1e-10 * b.norm(), "l {l} beta {beta}: {a} vs {b}");
        }
    }
}

#[test]
fn equal_real_parts_give_plain_sphere_average() {
    let index = common::generic_complex_index();
    let theta = 0.7;
    let quad = vec![vec![1.0, 0.2], vec![0.2, 0.6]];
    let m = MarketModel::new(
        0.0,
        DVector::from_vec(vec![0.8, 0.3]),
        0.0,
        index.clone(),
        LogCharFn::new(AngularFn::Quadratic { matrix: quad }, 0.0, ContinuationMode::RealPart),
    )
    .unwrap();
    let beta = 0.6;
    let got = frac_moment(&m, beta, 1.0).unwrap();
    // midpoint rule over xi of phi^{beta Theta}(v(xi)), v = Re(O diag(e^{-i xi sgn Im lambda}) O^H sigma_hat)
    let o = index.eigenvectors();
    let lambda = index.eigenvalues();
    let s = m.sigma_hat().map(|x| Complex64::new(x, 0.0));
    let st = o.adjoint() * s;
    let n = 4096;
    let mut avg = 0.0;
    for i in 0..n {
        let xi = 2.0 * PI * (i as f64 + 0.5) / n as f64;
        let rot = DVector::from_fn(2, |j, _| st[j] * Complex64::from_polar(1.0, -xi * lambda[j].im.signum()));
        let v = (&o * rot).map(|z| z.re);
        avg += m.angular(&(&v / v.norm())).powf(beta * theta);
    }
    avg /= n as f64;
    let want = support_factor(beta) * prefactor_c(beta, 1.0 / theta).unwrap()
        * m.sigma().norm().powf(beta)
        * avg;
    assert!((got - want).norm() <= 1e-9 * want.norm(), "{got} vs {want}");
}

#[test]
fn half_moment_matches_monte_carlo() {
    let m = MarketModel::one_dimensional(1.7, 1.0, 1.0, 0.0, ContinuationMode::RealPart).unwrap();
    let exact = frac_moment(&m, 0.5, 1.0).unwrap();
    let est = moment_estimate(&m, 0.5, 1.0, &SimConfig::new(2_000_000, 77)).unwrap();
    assert!((exact.re - est.mean.re).abs() < 3.0 * est.stderr.re);
    assert!((exact.im - est.mean.im).abs() < 3.0 * est.stderr.im);
}

#[test]
fn generic_moment_matches_monte_carlo_on_eigenvectors() {
    for l in [0, 1] {
        let m = eigen_aligned(l);
        let exact = frac_moment(&m, 0.5, 1.0).unwrap();
        let est = moment_estimate(&m, 0.5, 1.0, &SimConfig::new(1_000_000, 78 + l as u64)).unwrap();
        assert!((exact.re - est.mean.re).abs() < 3.0 * est.stderr.re, "l {l}");
        assert!((exact.im - est.mean.im).abs() < 3.0 * est.stderr.im, "l {l}");
    }
}

#[test]
fn square_marginal_of_gaussian_matches_monte_carlo() {
    let q = QuadratureConfig::default();
    let m = MarketModel::one_dimensional(2.0, 0.5, 1.0, 0.0, ContinuationMode::RealPart).unwrap();
    let n = 1_000_000;
    let x: Vec<f64> = simulate_log_price(&m, 1.0, &SimConfig::new(n, 79))
        .unwrap()
        .iter()
        .map(|v| v * v)
        .collect();
    let band = 3.0 / (n as f64).sqrt();
    for k in [0.02, 0.1, 0.3, 0.75, 1.5] {
        let got = marginal_cf(&m, 2.0, k, 1.0, &q).unwrap();
        assert!((got - empirical_cf(&x, k)).norm() < band, "k {k}");
    }
}
