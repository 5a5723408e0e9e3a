#![allow(dead_code)]

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, Normal};

use opstable::{AngularFn, ContinuationMode, LogCharFn, MarketModel, StableIndex};

pub fn norm_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

pub fn black_scholes(s: f64, k: f64, r: f64, vol: f64, tau: f64) -> f64 {
    let sd = vol * tau.sqrt();
    let d1 = ((s / k).ln() + (r + 0.5 * vol * vol) * tau) / sd;
    s * norm_cdf(d1) - k * (-r * tau).exp() * norm_cdf(d1 - sd)
}

pub fn pure_scaling_2d() -> MarketModel {
    MarketModel::new(
        0.0,
        DVector::from_vec(vec![1.0, 0.4]),
        0.0,
        StableIndex::pure_scaling(2, 0.8).unwrap(),
        LogCharFn::new(AngularFn::Constant { value: 0.7 }, 0.0, ContinuationMode::RealPart),
    )
    .unwrap()
}

pub fn rotation() -> MarketModel {
    MarketModel::new(
        0.0,
        DVector::from_vec(vec![0.6, -0.8]),
        0.0,
        StableIndex::scaling_rotation(0.75, 0.4).unwrap(),
        LogCharFn::new(
            AngularFn::Harmonics { coefficients: vec![1.0, 0.3] },
            0.0,
            ContinuationMode::RealPart,
        ),
    )
    .unwrap()
}

pub fn generic_orthogonal() -> DMatrix<Complex64> {
    let s = FRAC_1_SQRT_2;
    DMatrix::from_row_slice(2, 2, &[s, -s, s, s].map(|x| Complex64::new(x, 0.0)))
}

pub fn generic_with_sigma(sigma: [f64; 2]) -> MarketModel {
    MarketModel::new(
        0.0,
        DVector::from_vec(sigma.to_vec()),
        0.0,
        StableIndex::generic(
            vec![Complex64::new(0.6, 0.0), Complex64::new(0.9, 0.0)],
            generic_orthogonal(),
        )
        .unwrap(),
        LogCharFn::new(
            AngularFn::EigenComponents { scales: vec![0.5, 0.3] },
            0.0,
            ContinuationMode::RealPart,
        ),
    )
    .unwrap()
}

pub fn generic() -> MarketModel {
    generic_with_sigma([1.0, 0.5])
}

/// A generic index with a complex-conjugate pair, for matrix-level checks.
pub fn generic_complex_index() -> StableIndex {
    let s = FRAC_1_SQRT_2;
    let o = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(0.0, -s),
            Complex64::new(0.0, s),
        ],
    );
    StableIndex::generic(vec![Complex64::new(0.7, 0.25), Complex64::new(0.7, -0.25)], o).unwrap()
}

pub fn all_regimes() -> Vec<(&'static str, MarketModel)> {
    vec![
        ("pure scaling", pure_scaling_2d()),
        ("rotation", rotation()),
        ("generic", generic()),
    ]
}

/// Proptest settings without on-disk failure persistence, which has no
/// source root to attach to in integration tests.
pub fn props(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        failure_persistence: None,
        ..Default::default()
    }
}
