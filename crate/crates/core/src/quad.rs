//! Panelized Gauss-Legendre quadrature for the Fourier-type integrals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gauss_legendre;

/// Settings of the semi-infinite panel quadrature.
///
/// Panels start at `0.25 * scale` wide (the scale is the characteristic
/// width of the integrand) and grow geometrically by `panel_growth`. The
/// walk stops once the integrand envelope drops below `tolerance * 1e-3`,
/// or fails once it passes `theta_cutoff * scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub theta_cutoff: f64,
    pub nodes_per_panel: usize,
    pub panel_growth: f64,
    pub tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            theta_cutoff: 1e4,
            nodes_per_panel: 32,
            panel_growth: 1.5,
            tolerance: 1e-10,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_cutoff > 0.0 && self.panel_growth > 0.0 && self.tolerance > 0.0)
            || self.nodes_per_panel == 0
        {
            return Err(Error::InvalidModel(
                "quadrature settings must all be positive".into(),
            ));
        }
        if self.tolerance > 1e-6 {
            return Err(Error::InvalidModel(format!(
                "quadrature tolerance {} exceeds 1e-6",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Gauss-Legendre rule mapped onto arbitrary intervals.
#[derive(Debug, Clone)]
pub struct PanelRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += *w * f(mid + half * x);
        }
        acc * half
    }

    pub fn integrate_real<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// Result of a quadrature with its error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
    pub upper: f64,
}

/// Integrates `f` over `[0, inf)`.
///
/// `envelope(k)` must bound `|f|` from `k` onwards; it drives the stopping
/// rule. `max_width` caps the panel width so oscillatory integrands keep a
/// bounded number of periods per panel. The error estimate is the gap
/// between the `n`- and `2n`-node rules plus the envelope left at the cut.
pub fn integrate_semi_infinite<F, G>(
    cfg: &QuadratureConfig,
    scale: f64,
    max_width: f64,
    f: F,
    envelope: G,
) -> Result<Quadrature>
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64) -> f64,
{
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::numerical("non-positive integration scale", f64::NAN));
    }
    let coarse = PanelRule::new(cfg.nodes_per_panel);
    let fine = PanelRule::new(2 * cfg.nodes_per_panel);
    let stop = cfg.tolerance * 1e-3;
    let hard_limit = cfg.theta_cutoff * scale;
    let reference = envelope(scale).max(f64::MIN_POSITIVE);

    let mut lo = 0.0;
    let mut width = (0.25 * scale).min(max_width);
    let mut sum_coarse = Complex64::new(0.0, 0.0);
    let mut sum_fine = Complex64::new(0.0, 0.0);
    loop {
        let hi = lo + width;
        sum_coarse += coarse.integrate(lo, hi, &f);
        sum_fine += fine.integrate(lo, hi, &f);
        lo = hi;
        let env = envelope(lo);
        if lo >= scale && env < stop {
            let error = (sum_fine - sum_coarse).norm() + env * width;
            return Ok(Quadrature {
                value: sum_fine,
                error,
                upper: lo,
            });
        }
        if lo > hard_limit || !env.is_finite() {
            if !env.is_finite() || env > reference {
                return Err(Error::Divergent(format!(
                    "integrand envelope {env:e} at {lo:e} does not decay"
                )));
            }
            return Err(Error::numerical(
                format!("integration cutoff {hard_limit:e} reached before decay"),
                env,
            ));
        }
        width = (width * cfg.panel_growth).min(max_width);
    }
}

/// Plain composite rule on `[a, b]` split into `panels` equal pieces.
pub fn integrate_interval<F: Fn(f64) -> f64>(
    rule: &PanelRule,
    a: f64,
    b: f64,
    panels: usize,
    f: F,
) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            rule.integrate_real(lo, lo + h, &f)
        })
        .sum()
}
