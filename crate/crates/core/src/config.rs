//! JSON model configuration.
//!
//! ```json
//! {
//!   "regime": "pure_scaling",
//!   "dim": 1,
//!   "mu": 1.7,
//!   "phi_plus": 0.02,
//!   "phi_minus": 0.02,
//!   "sigma": [1.0],
//!   "rate": 0.03,
//!   "mode": "real_part"
//! }
//! ```
//!
//! The generic regime takes `eigenvalues` as `[re, im]` pairs and
//! `eigenvectors` as rows of `[re, im]` pairs. Angular functions other than
//! the `phi_plus`/`phi_minus` pair go under `angular` with a `kind` tag.
//! Unknown keys are rejected, and every model invariant is checked again on
//! load.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charfn::{AngularFn, ContinuationMode, LogCharFn, MarketModel};
use crate::error::{Error, Result};
use crate::quad::QuadratureConfig;
use crate::stable_index::{Regime, StableIndex};

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub regime: Regime,
    #[serde(default = "one")]
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvectors: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angular: Option<AngularFn>,
    pub sigma: Vec<f64>,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub rate: f64,
    #[serde(default)]
    pub mode: ContinuationMode,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
}

fn missing(field: &str) -> Error {
    Error::InvalidModel(format!("config is missing `{field}`"))
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidModel(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidModel(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn index(&self) -> Result<StableIndex> {
        match self.regime {
            Regime::PureScaling => StableIndex::pure_scaling(self.dim, self.mu.ok_or_else(|| missing("mu"))?),
            Regime::ScalingRotation => {
                if self.dim != 2 {
                    return Err(Error::InvalidModel("the rotation regime is two-dimensional".into()));
                }
                StableIndex::scaling_rotation(
                    self.mu.ok_or_else(|| missing("mu"))?,
                    self.b.ok_or_else(|| missing("b"))?,
                )
            }
            Regime::Generic => {
                let vals = self.eigenvalues.as_ref().ok_or_else(|| missing("eigenvalues"))?;
                let rows = self.eigenvectors.as_ref().ok_or_else(|| missing("eigenvectors"))?;
                let n = vals.len();
                if n != self.dim || rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidModel(format!(
                        "generic regime needs {} eigenvalues and a {0}x{0} eigenvector matrix",
                        self.dim
                    )));
                }
                let lambda = vals.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                let o = DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]));
                StableIndex::generic(lambda, o)
            }
        }
    }

    fn angular_fn(&self) -> Result<AngularFn> {
        match (&self.angular, self.phi_plus, self.phi_minus) {
            (Some(a), None, None) => Ok(a.clone()),
            (None, Some(plus), minus) => Ok(AngularFn::Pair {
                plus,
                minus: minus.unwrap_or(plus),
            }),
            (None, None, _) => Err(missing("phi_plus or angular")),
            _ => Err(Error::InvalidModel(
                "give either phi_plus/phi_minus or angular, not both".into(),
            )),
        }
    }

    pub fn to_model(&self) -> Result<MarketModel> {
        self.quadrature.validate()?;
        MarketModel::new(
            self.alpha,
            DVector::from_vec(self.sigma.clone()),
            self.rate,
            self.index()?,
            LogCharFn::new(self.angular_fn()?, self.epsilon, self.mode),
        )
    }

    pub fn from_model(model: &MarketModel, quadrature: QuadratureConfig) -> Self {
        let index = model.index();
        let (eigenvalues, eigenvectors) = if index.regime() == Regime::Generic {
            let o = index.eigenvectors();
            (
                Some(index.eigenvalues().iter().map(|l| [l.re, l.im]).collect()),
                Some(
                    (0..o.nrows())
                        .map(|i| (0..o.ncols()).map(|j| [o[(i, j)].re, o[(i, j)].im]).collect())
                        .collect(),
                ),
            )
        } else {
            (None, None)
        };
        let logcf = model.logcf();
        let (phi_plus, phi_minus, angular) = match &logcf.angular {
            AngularFn::Pair { plus, minus } => (Some(*plus), Some(*minus), None),
            other => (None, None, Some(other.clone())),
        };
        Self {
            regime: index.regime(),
            dim: index.dim(),
            mu: index.mu(),
            b: index.rotation_rate(),
            eigenvalues,
            eigenvectors,
            phi_plus,
            phi_minus,
            angular,
            sigma: model.sigma().iter().copied().collect(),
            alpha: model.alpha(),
            rate: model.rate(),
            mode: logcf.mode,
            epsilon: logcf.epsilon,
            quadrature,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_loads() {
        let cfg = ModelConfig::from_json(
            r#"{"regime": "pure_scaling", "mu": 1.7, "phi_plus": 0.02, "sigma": [1.0], "rate": 0.03}"#,
        )
        .unwrap();
        let m = cfg.to_model().unwrap();
        assert_eq!(m.projection().unwrap().rho, 1.7);
        assert_eq!(m.mode(), ContinuationMode::RealPart);
    }

    #[test]
    fn unknown_keys_and_bad_index_rejected() {
        let extra = r#"{"regime": "pure_scaling", "mu": 1.7, "phi_plus": 1, "sigma": [1], "colour": 3}"#;
        assert!(ModelConfig::from_json(extra).is_err());
        let bad = r#"{"regime": "pure_scaling", "mu": 2.5, "phi_plus": 1, "sigma": [1]}"#;
        let err = ModelConfig::from_json(bad).unwrap().to_model().unwrap_err();
        assert!(err.to_string().contains("stability bound"), "{err}");
    }

    #[test]
    fn generic_round_trip() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let o = DMatrix::from_row_slice(
            2,
            2,
            &[s, -s, s, s].map(|x| Complex64::new(x, 0.0)),
        );
        let index =
            StableIndex::generic(vec![Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)], o).unwrap();
        let m = MarketModel::new(
            0.1,
            DVector::from_vec(vec![1.0, 0.5]),
            0.02,
            index,
            LogCharFn::new(AngularFn::EigenComponents { scales: vec![0.3, 0.2] }, 0.0, ContinuationMode::RealPart),
        )
        .unwrap();
        let cfg = ModelConfig::from_model(&m, QuadratureConfig::default());
        let back = ModelConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_model().unwrap(), m);
    }
}
