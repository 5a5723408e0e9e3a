//! Log-characteristic function, the market model, analytic continuation to
//! imaginary arguments, and densities of the projected fluctuation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_semi_infinite, QuadratureConfig};
use crate::special::{gamma, gamma_ratio_c};
use crate::stable_index::{Regime, StableIndex};

/// How `phi` is continued to the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuationMode {
    /// Principal branch, `phi(-i s) = A s^rho exp(-i pi rho / 2)`.
    PrincipalComplex,
    /// Real part of the principal value, `A s^rho cos(pi rho / 2)`.
    #[default]
    RealPart,
    /// Gamma-ratio replacement of `-k^rho + i k` (one-dimensional pure scaling only).
    GammaRatio,
}

/// Branch used when `phi` is evaluated off the real axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `(k^2)^{rho/2}` on the principal branch; Hermitian, cut on the imaginary axis.
    Even,
    /// `k^rho` analytic in the upper half plane, cut on the negative imaginary axis.
    UpperHalfPlane,
}

/// The angular part of `phi` on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AngularFn {
    /// Isotropic.
    Constant { value: f64 },
    /// One-dimensional `phi(+1)`, `phi(-1)`.
    Pair { plus: f64, minus: f64 },
    /// Two-dimensional `c0 + sum_n c_n cos(2 n eta)` in the polar angle `eta`.
    Harmonics { coefficients: Vec<f64> },
    /// `theta^T A theta` with `A` symmetric positive definite.
    Quadratic { matrix: Vec<Vec<f64>> },
    /// Independent components along real eigenvectors:
    /// `sum_j c_j |(O^T theta)_j|^{1/Theta_j}`. Generic regime only.
    EigenComponents { scales: Vec<f64> },
}

impl AngularFn {
    fn validate(&self, index: &StableIndex) -> Result<()> {
        let dim = index.dim();
        let bad = |m: String| Err(Error::InvalidModel(m));
        match self {
            AngularFn::Constant { value } => {
                if !(*value > 0.0 && value.is_finite()) {
                    return bad(format!("angular constant must be positive, got {value}"));
                }
            }
            AngularFn::Pair { plus, minus } => {
                if dim != 1 {
                    return bad("phi_plus/phi_minus only apply in one dimension".into());
                }
                if !(*plus > 0.0 && *minus > 0.0) {
                    return bad("phi_plus and phi_minus must be positive".into());
                }
                if (plus - minus).abs() > 1e-12 * plus.abs().max(minus.abs()) {
                    return bad(format!(
                        "log-characteristic function must be even: phi_plus {plus} != phi_minus {minus}"
                    ));
                }
            }
            AngularFn::Harmonics { coefficients } => {
                if dim != 2 || coefficients.is_empty() {
                    return bad("harmonic angular function needs D = 2 and coefficients".into());
                }
                let min = (0..4096)
                    .map(|i| harmonics(coefficients, PI * i as f64 / 4096.0))
                    .fold(f64::INFINITY, f64::min);
                if min <= 0.0 {
                    return bad(format!("harmonic angular function not positive (min {min})"));
                }
            }
            AngularFn::Quadratic { matrix } => {
                if matrix.len() != dim || matrix.iter().any(|r| r.len() != dim) {
                    return bad(format!("quadratic form must be {dim}x{dim}"));
                }
                let m = DMatrix::from_fn(dim, dim, |i, j| matrix[i][j]);
                if (&m - m.transpose()).amax() > 1e-12 {
                    return bad("quadratic form must be symmetric".into());
                }
                if m.cholesky().is_none() {
                    return bad("quadratic form must be positive definite".into());
                }
            }
            AngularFn::EigenComponents { scales } => {
                if index.regime() != Regime::Generic {
                    return bad("eigen-component angular function needs the generic regime".into());
                }
                if scales.len() != dim || scales.iter().any(|c| !(*c > 0.0)) {
                    return bad(format!("need {dim} positive component scales"));
                }
                let real_spectrum = index.eigenvalues().iter().all(|l| l.im == 0.0)
                    && index.eigenvectors().iter().all(|c| c.im.abs() <= 1e-12);
                if !real_spectrum {
                    return bad("eigen-component angular function needs a real spectrum".into());
                }
            }
        }
        Ok(())
    }

    /// Value on a unit vector.
    pub fn eval(&self, index: &StableIndex, theta: &DVector<f64>) -> f64 {
        match self {
            AngularFn::Constant { value } => *value,
            AngularFn::Pair { plus, minus } => {
                if theta[0] >= 0.0 {
                    *plus
                } else {
                    *minus
                }
            }
            AngularFn::Harmonics { coefficients } => {
                harmonics(coefficients, theta[1].atan2(theta[0]))
            }
            AngularFn::Quadratic { matrix } => {
                let n = theta.len();
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += theta[i] * matrix[i][j] * theta[j];
                    }
                }
                acc
            }
            AngularFn::EigenComponents { scales } => {
                let o = index.eigenvectors();
                let lambda = index.eigenvalues();
                (0..theta.len())
                    .map(|j| {
                        let proj: f64 = (0..theta.len()).map(|i| o[(i, j)].re * theta[i]).sum();
                        scales[j] * proj.abs().powf(1.0 / lambda[j].re)
                    })
                    .sum()
            }
        }
    }
}

fn harmonics(c: &[f64], eta: f64) -> f64 {
    c.iter()
        .enumerate()
        .map(|(n, cn)| cn * (2.0 * n as f64 * eta).cos())
        .sum()
}

/// Negative log-characteristic function of `L_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogCharFn {
    pub angular: AngularFn,
    /// Truncation `phi_eps(k) = phi(k) exp(-eps/|k|)`; zero disables it.
    pub epsilon: f64,
    pub mode: ContinuationMode,
}

impl LogCharFn {
    pub fn new(angular: AngularFn, epsilon: f64, mode: ContinuationMode) -> Self {
        Self {
            angular,
            epsilon,
            mode,
        }
    }
}

/// One-dimensional projection `phi(k sigma) = amplitude |k|^rho` for real `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub rho: f64,
    pub amplitude: f64,
}

/// Drift, portfolio mix, riskless rate, stable index and log-CF.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketModel {
    alpha: f64,
    sigma: DVector<f64>,
    rate: f64,
    index: StableIndex,
    logcf: LogCharFn,
}

impl MarketModel {
    pub fn new(
        alpha: f64,
        sigma: DVector<f64>,
        rate: f64,
        index: StableIndex,
        logcf: LogCharFn,
    ) -> Result<Self> {
        if sigma.len() != index.dim() {
            return Err(Error::InvalidModel(format!(
                "sigma has dimension {}, index has {}",
                sigma.len(),
                index.dim()
            )));
        }
        if !(sigma.norm() > 0.0) || sigma.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidModel("portfolio mix sigma must be nonzero".into()));
        }
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidModel(format!("riskless rate must be >= 0, got {rate}")));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidModel("drift must be finite".into()));
        }
        if !(logcf.epsilon >= 0.0) {
            return Err(Error::InvalidModel("epsilon must be >= 0".into()));
        }
        logcf.angular.validate(&index)?;
        if logcf.mode == ContinuationMode::GammaRatio
            && !(index.regime() == Regime::PureScaling && index.dim() == 1)
        {
            return Err(Error::InvalidModel(
                "gamma-ratio continuation requires one-dimensional pure scaling".into(),
            ));
        }
        Ok(Self {
            alpha,
            sigma,
            rate,
            index,
            logcf,
        })
    }

    /// One-dimensional pure-scaling model with `phi(k) = phi_pm |k|^mu`.
    pub fn one_dimensional(
        mu: f64,
        phi_pm: f64,
        sigma: f64,
        rate: f64,
        mode: ContinuationMode,
    ) -> Result<Self> {
        Self::new(
            0.0,
            DVector::from_vec(vec![sigma]),
            rate,
            StableIndex::pure_scaling(1, mu)?,
            LogCharFn::new(
                AngularFn::Pair {
                    plus: phi_pm,
                    minus: phi_pm,
                },
                0.0,
                mode,
            ),
        )
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidModel("epsilon must be >= 0".into()));
        }
        self.logcf.epsilon = epsilon;
        Ok(self)
    }

    pub fn with_mode(self, mode: ContinuationMode) -> Result<Self> {
        let mut logcf = self.logcf;
        logcf.mode = mode;
        Self::new(self.alpha, self.sigma, self.rate, self.index, logcf)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn sigma(&self) -> &DVector<f64> {
        &self.sigma
    }
    pub fn rate(&self) -> f64 {
        self.rate
    }
    pub fn index(&self) -> &StableIndex {
        &self.index
    }
    pub fn logcf(&self) -> &LogCharFn {
        &self.logcf
    }
    pub fn mode(&self) -> ContinuationMode {
        self.logcf.mode
    }

    pub fn sigma_hat(&self) -> DVector<f64> {
        &self.sigma / self.sigma.norm()
    }

    /// Angular function on a unit vector.
    pub fn angular(&self, theta: &DVector<f64>) -> f64 {
        self.logcf.angular.eval(&self.index, theta)
    }

    /// `phi(k)` for a real vector, without the epsilon damping.
    pub fn phi_undamped(&self, k: &DVector<f64>) -> Result<f64> {
        if k.norm() == 0.0 {
            return Ok(0.0);
        }
        let (r, theta) = self.index.jurek_decompose(k)?;
        Ok(r * self.angular(&theta))
    }

    /// Scalar projection along `sigma`; pure scaling only.
    pub fn projection(&self) -> Result<Projection> {
        match (self.index.regime(), self.index.radial_exponent()) {
            (Regime::PureScaling, Some(rho)) => Ok(Projection {
                rho,
                amplitude: self.sigma.norm().powf(rho) * self.angular(&self.sigma_hat()),
            }),
            _ => Err(Error::Unsupported(
                "scalar projection needs the pure-scaling regime".into(),
            )),
        }
    }

    /// Whether the projected fluctuation is Gaussian (`rho = 2`).
    pub fn is_gaussian(&self) -> bool {
        self.index.regime() == Regime::PureScaling
            && self.index.radial_exponent().is_some_and(|r| (r - 2.0).abs() < 1e-12)
    }

    /// `phi_A(k) = phi(k sigma)` continued to a complex scalar `k`.
    pub fn phi_projected_complex(&self, k: Complex64, branch: Branch) -> Result<Complex64> {
        let p = self.projection()?;
        if k.norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(p.amplitude
            * match branch {
                Branch::Even => (k * k).powf(0.5 * p.rho),
                Branch::UpperHalfPlane => {
                    let mut arg = k.im.atan2(k.re);
                    if arg < -0.5 * PI {
                        arg += 2.0 * PI;
                    }
                    Complex64::from_polar(k.norm().powf(p.rho), p.rho * arg)
                }
            })
    }
}

/// `phi(k) = r_k phi(theta_k)`, damped by `exp(-eps/|k|)` when `eps > 0`.
pub fn phi(model: &MarketModel, k: &DVector<f64>) -> Result<Complex64> {
    let norm = k.norm();
    if norm == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut v = model.phi_undamped(k)?;
    if model.logcf.epsilon > 0.0 {
        v *= (-model.logcf.epsilon / norm).exp();
    }
    Ok(Complex64::new(v, 0.0))
}

/// Characteristic function `exp(-t phi(k))` of `L_t`.
pub fn omega_tilde(model: &MarketModel, k: &DVector<f64>, t: f64) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    Ok((-t * phi(model, k)?).exp())
}

/// Continuation `phi(-i s sigma)`.
pub fn phi_imag(model: &MarketModel, s: f64) -> Result<Complex64> {
    let p = model.projection()?;
    let s = s.abs();
    let a = p.amplitude;
    let rho = p.rho;
    Ok(match model.logcf.mode {
        ContinuationMode::PrincipalComplex => {
            Complex64::from_polar(a * s.powf(rho), -0.5 * PI * rho)
        }
        ContinuationMode::RealPart => Complex64::new(a * s.powf(rho) * (0.5 * PI * rho).cos(), 0.0),
        ContinuationMode::GammaRatio => {
            let ratio = gamma_ratio_c(Complex64::new(s + rho, 0.0), Complex64::new(s, 0.0));
            Complex64::new(-a * (ratio.re - 0.5 * s * gamma(1.0 + rho)), 0.0)
        }
    })
}

/// Density of `sigma . L_tau` at `xi` by cosine-transform inversion.
pub fn density(model: &MarketModel, xi: f64, tau: f64, q: &QuadratureConfig) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    let p = model.projection()?;
    let c = tau * p.amplitude;
    let scale = c.powf(-1.0 / p.rho);
    let max_width = if xi == 0.0 {
        f64::INFINITY
    } else {
        4.0 * PI / xi.abs()
    };
    let res = integrate_semi_infinite(
        q,
        scale,
        max_width,
        |k| Complex64::new((k * xi).cos() * (-c * k.powf(p.rho)).exp(), 0.0),
        |k| (-c * k.powf(p.rho)).exp(),
    )?;
    if res.error > 1e-6 {
        log::warn!(
            "density quadrature at xi={xi} is coarse: error estimate {:e}",
            res.error
        );
    }
    Ok(res.value.re / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(phi_pm: f64, sigma: f64) -> MarketModel {
        MarketModel::one_dimensional(2.0, phi_pm, sigma, 0.0, ContinuationMode::RealPart).unwrap()
    }

    #[test]
    fn phi_at_origin_is_zero() {
        let m = gauss(0.5, 1.0);
        assert_eq!(phi(&m, &DVector::zeros(1)).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(
            omega_tilde(&m, &DVector::zeros(1), 3.0).unwrap(),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn pure_scaling_power_law() {
        let m = MarketModel::one_dimensional(1.5, 0.5, 1.0, 0.0, ContinuationMode::RealPart)
            .unwrap();
        let v = phi(&m, &DVector::from_vec(vec![2.0])).unwrap();
        assert!((v.re - 0.5 * 2f64.powf(1.5)).abs() < 1e-14);
        let w = phi(&m, &DVector::from_vec(vec![-2.0])).unwrap();
        assert_eq!(v, w);
    }

    #[test]
    fn continuation_modes_at_gaussian() {
        for mode in [
            ContinuationMode::PrincipalComplex,
            ContinuationMode::RealPart,
            ContinuationMode::GammaRatio,
        ] {
            let m = MarketModel::one_dimensional(2.0, 0.7, 1.3, 0.0, mode).unwrap();
            let v = phi_imag(&m, 1.0).unwrap();
            let want = -0.7 * 1.3 * 1.3;
            assert!((v.re - want).abs() < 1e-12, "{mode:?}: {v}");
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn continuation_at_three_halves() {
        let m = MarketModel::one_dimensional(1.5, 1.0, 1.0, 0.0, ContinuationMode::PrincipalComplex)
            .unwrap();
        let v = phi_imag(&m, 1.0).unwrap();
        let want = Complex64::from_polar(1.0, -0.75 * PI);
        assert!((v - want).norm() < 1e-14);
        let m = m.with_mode(ContinuationMode::RealPart).unwrap();
        let v = phi_imag(&m, 1.0).unwrap();
        assert!((v.re + 0.5f64.sqrt()).abs() < 1e-14 && v.im == 0.0);
    }

    #[test]
    fn gamma_ratio_only_in_one_dimension() {
        let idx = StableIndex::pure_scaling(2, 0.8).unwrap();
        let r = MarketModel::new(
            0.0,
            DVector::from_vec(vec![1.0, 0.5]),
            0.01,
            idx,
            LogCharFn::new(AngularFn::Constant { value: 1.0 }, 0.0, ContinuationMode::GammaRatio),
        );
        assert!(matches!(r, Err(Error::InvalidModel(_))));
    }

    #[test]
    fn odd_pair_is_rejected() {
        let r = MarketModel::new(
            0.0,
            DVector::from_vec(vec![1.0]),
            0.0,
            StableIndex::pure_scaling(1, 1.5).unwrap(),
            LogCharFn::new(AngularFn::Pair { plus: 1.0, minus: 0.9 }, 0.0, ContinuationMode::RealPart),
        );
        assert!(matches!(r, Err(Error::InvalidModel(_))));
    }

    #[test]
    fn epsilon_damping_is_monotone() {
        let k = DVector::from_vec(vec![0.7]);
        let mut last = f64::INFINITY;
        for eps in [0.0, 0.01, 0.1, 1.0] {
            let m = gauss(0.5, 1.0).with_epsilon(eps).unwrap();
            let v = phi(&m, &k).unwrap().norm();
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn gaussian_density_closed_form() {
        // phi_pm sigma^2 = 0.5 -> variance 2 * 0.5 * tau = 1
        let m = gauss(0.5, 1.0);
        let q = QuadratureConfig::default();
        let v = density(&m, 0.0, 1.0, &q).unwrap();
        assert!((v - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
        let v = density(&m, 1.3, 1.0, &q).unwrap();
        let want = (-0.5f64 * 1.3 * 1.3).exp() / (2.0 * PI).sqrt();
        assert!((v - want).abs() < 1e-12);
    }

    #[test]
    fn cauchy_density_closed_form() {
        let m = MarketModel::one_dimensional(1.0, 0.4, 1.5, 0.0, ContinuationMode::RealPart).unwrap();
        let q = QuadratureConfig::default();
        let gamma_scale = 0.4 * 1.5 * 2.0;
        let v = density(&m, 0.0, 2.0, &q).unwrap();
        assert!((v - 1.0 / (PI * gamma_scale)).abs() < 1e-10);
        let x = 0.9;
        let v = density(&m, x, 2.0, &q).unwrap();
        let want = gamma_scale / (PI * (gamma_scale * gamma_scale + x * x));
        assert!((v - want).abs() < 1e-10);
    }

    #[test]
    fn density_is_symmetric() {
        let m = MarketModel::one_dimensional(1.7, 0.3, 1.0, 0.0, ContinuationMode::RealPart).unwrap();
        let q = QuadratureConfig::default();
        for x in [0.2, 1.0, 3.5] {
            let a = density(&m, x, 0.8, &q).unwrap();
            let b = density(&m, -x, 0.8, &q).unwrap();
            assert_eq!(a, b);
            assert!(a > 0.0);
        }
    }
}
