//! The stable exponent matrix `E`, its powers `r^{E^T}` and Jurek coordinates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const UNITARY_TOL: f64 = 1e-12;
const DISTINCT_TOL: f64 = 1e-12;
const BISECTION_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    PureScaling,
    ScalingRotation,
    Generic,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    PureScaling {
        mu: f64,
    },
    ScalingRotation {
        mu: f64,
        b: f64,
    },
    Generic {
        eigenvalues: Vec<Complex64>,
        vectors: DMatrix<Complex64>,
        inverse: DMatrix<Complex64>,
    },
}

/// Stable index `E` in one of three regimes. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct StableIndex {
    dim: usize,
    kind: Kind,
}

impl StableIndex {
    /// `E = (D mu)^{-1} I` with `0 < D mu <= 2`.
    pub fn pure_scaling(dim: usize, mu: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidModel("dimension must be positive".into()));
        }
        let rho = dim as f64 * mu;
        if !(rho > 0.0 && rho <= 2.0) {
            return Err(Error::InvalidModel(format!(
                "stability bound violated: D*mu = {rho} must lie in (0, 2]"
            )));
        }
        Ok(Self {
            dim,
            kind: Kind::PureScaling { mu },
        })
    }

    /// Two-dimensional `E = [[1/(2mu), -b], [b, 1/(2mu)]]` with `0 < 2 mu <= 2`.
    pub fn scaling_rotation(mu: f64, b: f64) -> Result<Self> {
        let rho = 2.0 * mu;
        if !(rho > 0.0 && rho <= 2.0) {
            return Err(Error::InvalidModel(format!(
                "stability bound violated: 2*mu = {rho} must lie in (0, 2]"
            )));
        }
        if !b.is_finite() {
            return Err(Error::InvalidModel("rotation rate must be finite".into()));
        }
        Ok(Self {
            dim: 2,
            kind: Kind::ScalingRotation { mu, b },
        })
    }

    /// Spectral form `E^T = O diag(lambda) O^dagger` with unitary `O`
    /// (eigenvectors in columns).
    pub fn generic(eigenvalues: Vec<Complex64>, vectors: DMatrix<Complex64>) -> Result<Self> {
        let dim = eigenvalues.len();
        if dim == 0 || vectors.nrows() != dim || vectors.ncols() != dim {
            return Err(Error::InvalidModel(format!(
                "eigenvector matrix must be {dim}x{dim}"
            )));
        }
        for (i, a) in eigenvalues.iter().enumerate() {
            if a.re <= 0.0 {
                return Err(Error::InvalidModel(format!(
                    "eigenvalue {i} has non-positive real part {}",
                    a.re
                )));
            }
            for b in &eigenvalues[i + 1..] {
                if (a - b).norm() <= DISTINCT_TOL {
                    return Err(Error::Unsupported(
                        "repeated eigenvalues (Jordan blocks) are not supported".into(),
                    ));
                }
            }
            if a.im != 0.0 && !eigenvalues.iter().any(|b| (b - a.conj()).norm() <= DISTINCT_TOL) {
                return Err(Error::InvalidModel(format!(
                    "complex eigenvalue {a} has no conjugate partner"
                )));
            }
        }
        let adjoint = vectors.adjoint();
        let gram = &vectors * &adjoint;
        let gap = (&gram - DMatrix::<Complex64>::identity(dim, dim))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if gap > UNITARY_TOL {
            return Err(Error::InvalidModel(format!(
                "eigenvector matrix is not unitary (deviation {gap:e})"
            )));
        }
        let idx = Self {
            dim,
            kind: Kind::Generic {
                eigenvalues,
                vectors,
                inverse: adjoint,
            },
        };
        let et = idx.spectral_exponent();
        let imag = et.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        if imag > 1e-10 {
            return Err(Error::InvalidModel(format!(
                "spectral data does not yield a real exponent (imaginary part {imag:e})"
            )));
        }
        Ok(idx)
    }

    pub fn regime(&self) -> Regime {
        match self.kind {
            Kind::PureScaling { .. } => Regime::PureScaling,
            Kind::ScalingRotation { .. } => Regime::ScalingRotation,
            Kind::Generic { .. } => Regime::Generic,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stability parameter `mu` (pure scaling and rotation regimes).
    pub fn mu(&self) -> Option<f64> {
        match self.kind {
            Kind::PureScaling { mu } | Kind::ScalingRotation { mu, .. } => Some(mu),
            Kind::Generic { .. } => None,
        }
    }

    pub fn rotation_rate(&self) -> Option<f64> {
        match self.kind {
            Kind::ScalingRotation { b, .. } => Some(b),
            _ => None,
        }
    }

    /// Power-law exponent of the radial coordinate: `D mu` or `2 mu`.
    pub fn radial_exponent(&self) -> Option<f64> {
        match self.kind {
            Kind::PureScaling { mu } => Some(self.dim as f64 * mu),
            Kind::ScalingRotation { mu, .. } => Some(2.0 * mu),
            Kind::Generic { .. } => None,
        }
    }

    /// Eigenvalues of `E^T`.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        match &self.kind {
            Kind::PureScaling { mu } => {
                vec![Complex64::new(1.0 / (self.dim as f64 * mu), 0.0); self.dim]
            }
            Kind::ScalingRotation { mu, b } => {
                let a = 1.0 / (2.0 * mu);
                vec![Complex64::new(a, *b), Complex64::new(a, -*b)]
            }
            Kind::Generic { eigenvalues, .. } => eigenvalues.clone(),
        }
    }

    /// Unitary eigenvector matrix `O` of `E^T` (columns).
    pub fn eigenvectors(&self) -> DMatrix<Complex64> {
        match &self.kind {
            Kind::PureScaling { .. } => DMatrix::identity(self.dim, self.dim),
            Kind::ScalingRotation { .. } => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        Complex64::new(s, 0.0),
                        Complex64::new(s, 0.0),
                        Complex64::new(0.0, s),
                        Complex64::new(0.0, -s),
                    ],
                )
            }
            Kind::Generic { vectors, .. } => vectors.clone(),
        }
    }

    fn spectral_exponent(&self) -> DMatrix<Complex64> {
        let o = self.eigenvectors();
        let d = DMatrix::from_diagonal(&DVector::from_vec(self.eigenvalues()));
        &o * d * o.adjoint()
    }

    /// The real matrix `E^T`.
    pub fn exponent_transpose(&self) -> DMatrix<f64> {
        match self.kind {
            Kind::PureScaling { mu } => {
                DMatrix::identity(self.dim, self.dim) / (self.dim as f64 * mu)
            }
            Kind::ScalingRotation { mu, b } => {
                let a = 1.0 / (2.0 * mu);
                DMatrix::from_row_slice(2, 2, &[a, b, -b, a])
            }
            Kind::Generic { .. } => self.spectral_exponent().map(|c| c.re),
        }
    }

    /// `r^{E^T} = O diag(r^lambda) O^{-1}`.
    pub fn matrix_power(&self, r: f64) -> Result<DMatrix<Complex64>> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("matrix power needs r > 0, got {r}")));
        }
        let ln_r = r.ln();
        Ok(match &self.kind {
            Kind::PureScaling { .. } | Kind::ScalingRotation { .. } => {
                self.real_power(ln_r).map(|x| Complex64::new(x, 0.0))
            }
            Kind::Generic {
                eigenvalues,
                vectors,
                inverse,
            } => {
                let diag = DVector::from_iterator(
                    self.dim,
                    eigenvalues.iter().map(|l| (l * ln_r).exp()),
                );
                vectors * DMatrix::from_diagonal(&diag) * inverse
            }
        })
    }

    /// Real part of `r^{E^T}` given `ln r`.
    fn real_power(&self, ln_r: f64) -> DMatrix<f64> {
        match &self.kind {
            Kind::PureScaling { mu } => {
                DMatrix::identity(self.dim, self.dim) * (ln_r / (self.dim as f64 * mu)).exp()
            }
            Kind::ScalingRotation { mu, b } => {
                // r^{a} O_{-b ln r}
                let scale = (ln_r / (2.0 * mu)).exp();
                let (s, c) = (b * ln_r).sin_cos();
                DMatrix::from_row_slice(2, 2, &[c, s, -s, c]) * scale
            }
            Kind::Generic { .. } => self
                .matrix_power(ln_r.exp())
                .expect("positive radius")
                .map(|c| c.re),
        }
    }

    /// Applies `r^{E^T}` to a real vector.
    pub fn apply_power(&self, r: f64, k: &DVector<f64>) -> Result<DVector<f64>> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("matrix power needs r > 0, got {r}")));
        }
        Ok(self.real_power(r.ln()) * k)
    }

    /// Jurek coordinates `k = radius^{E^T} angle` with `|angle| = 1`.
    pub fn jurek_decompose(&self, k: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        if k.len() != self.dim {
            return Err(Error::Domain(format!(
                "vector has dimension {}, expected {}",
                k.len(),
                self.dim
            )));
        }
        let norm = k.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Domain(
                "Jurek coordinates need a nonzero finite vector".into(),
            ));
        }
        match &self.kind {
            Kind::PureScaling { mu } => Ok((norm.powf(self.dim as f64 * mu), k / norm)),
            Kind::ScalingRotation { mu, b } => {
                let (s, c) = (2.0 * b * mu * norm.ln()).sin_cos();
                let u = k / norm;
                let angle = DVector::from_vec(vec![c * u[0] - s * u[1], s * u[0] + c * u[1]]);
                Ok((norm.powf(2.0 * mu), angle))
            }
            Kind::Generic {
                eigenvalues,
                inverse,
                ..
            } => {
                let kc = k.map(|x| Complex64::new(x, 0.0));
                let proj = inverse * kc;
                let terms: Vec<(f64, f64)> = proj
                    .iter()
                    .zip(eigenvalues)
                    .filter(|(p, _)| p.norm_sqr() > 0.0)
                    .map(|(p, l)| (p.norm_sqr().ln(), l.re))
                    .collect();
                let ln_r = solve_log_radius(&terms)?;
                let angle = self.real_power(-ln_r) * k;
                Ok((ln_r.exp(), angle))
            }
        }
    }

    /// Rebuilds `radius^{E^T} angle`.
    pub fn jurek_compose(&self, radius: f64, angle: &DVector<f64>) -> Result<DVector<f64>> {
        self.apply_power(radius, angle)
    }
}

/// Solves `sum_j exp(a_j - 2 theta_j u) = 1` for `u = ln r`; the left side
/// is strictly decreasing in `u` when every `theta_j > 0`.
fn solve_log_radius(terms: &[(f64, f64)]) -> Result<f64> {
    // g(u) = ln sum exp(a_j - 2 theta_j u), decreasing
    let g = |u: f64| -> (f64, f64) {
        let m = terms
            .iter()
            .map(|(a, t)| a - 2.0 * t * u)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        let mut ds = 0.0;
        for (a, t) in terms {
            let w = (a - 2.0 * t * u - m).exp();
            s += w;
            ds += -2.0 * t * w;
        }
        (m + s.ln(), ds / s)
    };
    let (mut lo, mut hi) = (-50.0, 50.0);
    if g(lo).0 < 0.0 || g(hi).0 > 0.0 {
        return Err(Error::numerical(
            "Jurek radius outside the bracket ln r in [-50, 50]",
            g(lo).0.min(-g(hi).0).abs(),
        ));
    }
    let mut iterations = 0;
    while hi - lo > 1e-6 {
        iterations += 1;
        if iterations > BISECTION_LIMIT {
            return Err(Error::numerical(
                "Jurek root-finder did not converge",
                hi - lo,
            ));
        }
        let mid = 0.5 * (lo + hi);
        if g(mid).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..50 {
        let (v, dv) = g(u);
        let step = v / dv;
        u -= step;
        if step.abs() <= 1e-15 * u.abs().max(1.0) {
            break;
        }
    }
    Ok(u)
}
