//! Characteristic functions of real powers of the projected fluctuation and
//! closed-form fractional moments.
//!
//! Powers of negative numbers use the principal branch,
//! `x^beta = |x|^beta e^{i pi beta}` for `x < 0`. This is what makes the
//! moment of a symmetric variable carry the support factor
//! `cos(pi beta / 2) e^{i pi beta / 2}`.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::charfn::{omega_tilde, MarketModel};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::quad::{integrate_semi_infinite, QuadratureConfig};
use crate::special::{gamma, gauss_legendre, rgamma};
use crate::stable_index::Regime;

const INTEGER_TOL: f64 = 1e-12;
const SPHERE_NODES: usize = 1 << 10;
const SPHERE_TOL: f64 = 1e-10;

/// Returns the integer `beta` is within `1e-12` of, if any.
pub fn near_integer(beta: f64) -> Option<i64> {
    let r = beta.round();
    ((beta - r).abs() <= INTEGER_TOL).then_some(r as i64)
}

/// Constants of the rotated-ray kernel for a given `beta >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub beta: f64,
    /// `exp(i pi / (2 beta))`
    pub rot: Complex64,
    /// `exp(-i pi {beta} / beta)`
    pub phase: Complex64,
    pub floor_even: bool,
}

impl KernelParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta >= 1.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("kernel needs beta >= 1, got {beta}")));
        }
        let floor = match near_integer(beta) {
            Some(n) => n as f64,
            None => beta.floor(),
        };
        let frac = (beta - floor).max(0.0);
        Ok(Self {
            beta,
            rot: Complex64::from_polar(1.0, PI / (2.0 * beta)),
            phase: Complex64::from_polar(1.0, -PI * frac / beta),
            floor_even: (floor as i64) % 2 == 0,
        })
    }

    /// Direction of the second ray, which is also its weight.
    fn second_ray(&self) -> Complex64 {
        if self.floor_even {
            self.rot * self.phase
        } else {
            self.rot.conj() * self.phase
        }
    }

    /// True when the two rays cancel and the kernel vanishes identically.
    pub fn is_degenerate(&self) -> bool {
        (self.rot + self.second_ray()).norm() < 1e-12
    }
}

/// Kernel `K(k, lambda)` by quadrature along the rotated rays.
///
/// Accurate while `exp(|lambda| t)` stays moderate against `exp(-k t^beta)`;
/// for large `lambda^2 / k` the integrand cancels heavily.
pub fn kernel_k(p: &KernelParams, k: f64, lambda: f64, q: &QuadratureConfig) -> Result<Complex64> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!(
            "kernel is a distribution at k = {k}; need k > 0"
        )));
    }
    let r1 = p.rot;
    let r2 = p.second_ray();
    let beta = p.beta;
    let g1 = lambda * r1.im;
    let g2 = -lambda * r2.im;
    let res = integrate_semi_infinite(
        q,
        k.powf(-1.0 / beta),
        f64::INFINITY,
        |t| {
            let damp = (-k * t.powf(beta)).exp();
            let a = r1 * (Complex64::new(0.0, -lambda) * r1 * t).exp();
            let b = r2 * (Complex64::new(0.0, lambda) * r2 * t).exp();
            damp * (a + b)
        },
        |t| (-k * t.powf(beta) + g1.max(g2) * t).exp(),
    )?;
    Ok(res.value / (2.0 * PI))
}

/// `exp(-t phi(sigma_hat lambda))` for real `lambda`.
fn projected_cf(model: &MarketModel, lambda: f64, t: f64) -> Result<f64> {
    let k = model.sigma_hat() * lambda;
    Ok(omega_tilde(model, &k, t)?.re)
}

/// `lambda` where `t phi(sigma_hat lambda) = 1`.
fn characteristic_width(model: &MarketModel, t: f64) -> Result<f64> {
    let g = |u: f64| -> Result<f64> {
        let c = projected_cf(model, u.exp(), t)?;
        Ok(-c.ln() - 1.0)
    };
    let (mut lo, mut hi) = (-40.0, 40.0);
    if g(lo)? > 0.0 || g(hi)? < 0.0 {
        return Err(Error::numerical("no characteristic width found", f64::NAN));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Gauss-Legendre table of `lambda -> omega(lambda)` for the transform
/// `F(w) = int omega(lambda) e^{-i lambda w} d lambda` at complex `w`.
struct CosTable {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CosTable {
    fn eval(&self, w: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, wt) in self.nodes.iter().zip(&self.weights) {
            acc += wt * (w * x).cos();
        }
        2.0 * acc
    }

    /// Sum of absolute terms at `|Im w| = y`; bounds rounding noise.
    fn noise(&self, y: f64) -> f64 {
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, wt)| wt.abs() * (x * y).cosh())
            .sum();
        2.0 * s * f64::EPSILON
    }
}

fn cos_table(model: &MarketModel, t: f64, s_max: f64, n: usize) -> Result<CosTable> {
    let h = characteristic_width(model, t)?;
    let exponent = |lambda: f64| -> Result<f64> { Ok(-projected_cf(model, lambda, t)?.ln()) };
    let mut upper = h;
    while exponent(upper)? - upper * s_max < 50.0 {
        upper *= 1.2;
        if upper > 1e6 * h {
            return Err(Error::Divergent(
                "characteristic function decays too slowly for complex arguments".into(),
            ));
        }
    }
    let width = (0.5 * h).min(2.0 * PI / s_max);
    let panels = (upper / width).ceil() as usize;
    if panels > 200_000 {
        return Err(Error::numerical("lambda table too large", panels as f64));
    }
    let (gx, gw) = gauss_legendre(n);
    let mut nodes = Vec::with_capacity(panels * n);
    let mut weights = Vec::with_capacity(panels * n);
    for p in 0..panels {
        let a = p as f64 * width;
        for (x, w) in gx.iter().zip(&gw) {
            let lambda = a + 0.5 * width * (x + 1.0);
            nodes.push(lambda);
            weights.push(0.5 * width * w * projected_cf(model, lambda, t)?);
        }
    }
    Ok(CosTable { nodes, weights })
}

/// Fourier transform of `(sigma . L_t)^beta` at `k >= 0`.
///
/// `beta = 1` is the plain characteristic function. Otherwise the kernel
/// representation is used with the two integrations exchanged: the inner
/// integral over `lambda` is the transform of the characteristic function at
/// the complex points `rot * s` and `second_ray * s`, tabulated once. This
/// needs a characteristic function decaying faster than any exponential,
/// i.e. a radial exponent above 1, and loses accuracy when
/// `k |sigma|^beta` is small against the inverse width of the law. For even
/// integer `beta` in the pure-scaling regime such failures fall back to
/// [`marginal_cf_contour`].
pub fn marginal_cf(
    model: &MarketModel,
    beta: f64,
    k: f64,
    t: f64,
    q: &QuadratureConfig,
) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    if !(k >= 0.0) {
        return Err(Error::Domain(format!("need k >= 0, got {k}")));
    }
    let p = KernelParams::new(beta)?;
    if k == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if near_integer(beta) == Some(1) {
        return omega_tilde(model, &(model.sigma() * k), t);
    }
    if p.is_degenerate() {
        return Err(Error::Unsupported(format!(
            "the kernel vanishes identically for beta = {beta} in (1, 2)"
        )));
    }
    match swapped_order(model, &p, beta, k, t, q) {
        Ok(v) => Ok(v),
        Err(e) if e.is_numerical() && contour_applies(model, beta) => {
            log::debug!("marginal cf at k = {k}: {e}; using the contour route");
            marginal_cf_contour(model, beta, k, t, q)
        }
        Err(e) => Err(e),
    }
}

fn contour_applies(model: &MarketModel, beta: f64) -> bool {
    matches!(near_integer(beta), Some(n) if n % 2 == 0)
        && model.index().regime() == Regime::PureScaling
}

fn swapped_order(
    model: &MarketModel,
    p: &KernelParams,
    beta: f64,
    k: f64,
    t: f64,
    q: &QuadratureConfig,
) -> Result<Complex64> {
    let kk = k * model.sigma().norm().powf(beta);
    let s_scale = kk.powf(-1.0 / beta);
    let s_max = (60.0 / kk).powf(1.0 / beta);
    let table = cos_table(model, t, s_max, 2 * q.nodes_per_panel)?;
    let r1 = p.rot;
    let r2 = p.second_ray();
    let outer = QuadratureConfig {
        theta_cutoff: s_max / s_scale,
        ..q.clone()
    };
    let res = integrate_semi_infinite(
        &outer,
        s_scale,
        f64::INFINITY,
        |s| {
            let damp = (-kk * s.powf(beta)).exp();
            damp * (r1 * table.eval(r1 * s) + r2 * table.eval(r2 * s))
        },
        |s| {
            let damp = (-kk * s.powf(beta)).exp();
            let y = s * r1.im.abs().max(r2.im.abs());
            damp * ((table.eval(r1 * s)).norm() + table.eval(r2 * s).norm() + table.noise(y))
        },
    )
    .map_err(|e| match e {
        // the table overflows at large imaginary arguments, which shows up as
        // a non-decaying envelope; that is a precision failure, not divergence
        Error::Divergent(msg) => Error::numerical(format!("cancellation for small k: {msg}"), f64::NAN),
        other => other,
    })?;
    let value = res.value / (2.0 * PI);
    if res.error > 1e-6 {
        return Err(Error::numerical(
            format!("marginal characteristic function at k = {k} did not converge"),
            res.error,
        ));
    }
    Ok(value)
}

/// Contour representation of the marginal characteristic function, for
/// even integer `beta` and the pure-scaling regime. A cross-check of
/// [`marginal_cf`] through an independent integral.
///
/// For even integer `beta` both rays of the integration line point along
/// `-i`, and the characteristic function is evaluated at real arguments.
/// After an integration by parts the outer integral is rotated by `pi/4`,
/// where it converges absolutely.
pub fn marginal_cf_contour(
    model: &MarketModel,
    beta: f64,
    k: f64,
    t: f64,
    q: &QuadratureConfig,
) -> Result<Complex64> {
    let n = near_integer(beta).filter(|n| *n >= 2 && n % 2 == 0).ok_or_else(|| {
        Error::Unsupported(format!("contour route needs an even integer beta, got {beta}"))
    })?;
    if !(t > 0.0 && k >= 0.0) {
        return Err(Error::Domain("need t > 0 and k >= 0".into()));
    }
    if k == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let proj = model.projection()?;
    let rho = proj.rho;
    let beta = n as f64;
    // omega at (k/y)^{1/beta} xi sigma is exp(-a y^{-rho/beta} xi^rho).
    let a = t * proj.amplitude * k.powf(rho / beta);
    let dir = Complex64::from_polar(1.0, 0.25 * PI);
    let dexp = |y: Complex64| -> Result<Complex64> {
        // d/dy of int_0^inf sin(xi)/xi exp(-a y^{-rho/beta} xi^rho) d xi
        let c = a * y.powf(-rho / beta);
        let scale = c.re.powf(-1.0 / rho);
        let inner = integrate_semi_infinite(
            q,
            scale,
            2.0 * PI,
            |xi| xi.sin() * xi.powf(rho - 1.0) * (-c * xi.powf(rho)).exp(),
            |xi| xi.powf(rho - 1.0) * (-c.re * xi.powf(rho)).exp(),
        )?;
        Ok(inner.value * c * (rho / beta) / y)
    };
    // u = v^beta removes the y^{1/beta - 1} endpoint singularity.
    let first_err = std::cell::Cell::new(None);
    let res = integrate_semi_infinite(
        q,
        1.0,
        f64::INFINITY,
        |v| {
            if v == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let u = v.powf(beta);
            let y = dir * u;
            match dexp(y) {
                Ok(d) => (Complex64::i() * y).exp() * d * dir * beta * v.powf(beta - 1.0),
                Err(e) => {
                    first_err.replace(Some(e));
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        |v| (-v.powf(beta) * dir.im).exp() * (1.0 + v.powf(-rho)),
    )?;
    if let Some(e) = first_err.take() {
        return Err(e);
    }
    Ok(res.value * (2.0 / PI))
}

/// Prefactor `C(beta, rho)` of the absolute moment of a symmetric stable law
/// with characteristic function `exp(-|k|^rho)`.
///
/// Written with the reciprocal Gamma function,
/// `2^beta Gamma((beta+1)/2) Gamma(1 - beta/rho) / (sqrt(pi) Gamma(1 - beta/2))`,
/// so the removable poles are harmless. At `rho = 2` every `beta > 0` is
/// allowed (Gaussian absolute moments).
pub fn prefactor_c(beta: f64, rho: f64) -> Result<f64> {
    if !(beta > 0.0 && rho > 0.0 && rho <= 2.0) {
        return Err(Error::Domain(format!(
            "need beta > 0 and rho in (0, 2], got beta = {beta}, rho = {rho}"
        )));
    }
    let base = 2f64.powf(beta) * gamma(0.5 * (beta + 1.0)) / PI.sqrt();
    if rho == 2.0 {
        return Ok(base);
    }
    if beta >= rho {
        return Err(Error::MomentInfinite(format!(
            "the moment exists only for beta < {rho}, got beta = {beta}"
        )));
    }
    Ok(base * gamma(1.0 - beta / rho) * rgamma(1.0 - 0.5 * beta))
}

/// `cos(pi beta / 2) e^{i pi beta / 2}`, the support factor of a symmetric law.
pub fn support_factor(beta: f64) -> Complex64 {
    Complex64::from_polar((0.5 * PI * beta).cos(), 0.5 * PI * beta)
}

/// Closed-form moment `E[(sigma . L_t)^beta]` in every regime.
pub fn frac_moment(model: &MarketModel, beta: f64, t: f64) -> Result<Complex64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("need beta > 0, got {beta}")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    if let Some(n) = near_integer(beta) {
        if n % 2 != 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if !model.is_gaussian() {
            return Err(Error::MomentInfinite(format!(
                "even moment beta = {n} of a non-Gaussian law is infinite"
            )));
        }
    }
    let sigma = model.sigma().norm();
    let support = support_factor(beta);
    let index = model.index();
    match index.regime() {
        Regime::PureScaling => {
            let rho = index.radial_exponent().unwrap_or(2.0);
            let c = prefactor_c(beta, rho)?;
            let ang = model.angular(&model.sigma_hat());
            Ok(support * c * (sigma * t.powf(1.0 / rho)).powf(beta) * ang.powf(beta / rho))
        }
        Regime::ScalingRotation => {
            let rho = index.radial_exponent().unwrap_or(2.0);
            let c = prefactor_c(beta, rho)?;
            let s = model.sigma_hat();
            let avg = sphere_average(|eta| {
                let (sn, cs) = eta.sin_cos();
                let v = DVector::from_vec(vec![cs * s[0] - sn * s[1], sn * s[0] + cs * s[1]]);
                model.angular(&v).powf(beta / rho)
            })?;
            Ok(support * c * (sigma * t.powf(1.0 / rho)).powf(beta) * avg)
        }
        Regime::Generic => generic_moment(model, beta, t, support),
    }
}

/// Periodic trapezoid average over `[0, 2 pi)` with a doubling check.
fn sphere_average<F: Fn(f64) -> f64 + Sync + Send>(f: F) -> Result<f64> {
    let avg = |n: usize| -> f64 {
        let vals = map_indexed(n, Execution::default(), |i| f(2.0 * PI * i as f64 / n as f64));
        vals.iter().sum::<f64>() / n as f64
    };
    let a = avg(SPHERE_NODES);
    let b = avg(2 * SPHERE_NODES);
    if (a - b).abs() > SPHERE_TOL * b.abs().max(1.0) {
        return Err(Error::numerical("sphere average not converged", (a - b).abs()));
    }
    Ok(b)
}

fn generic_moment(model: &MarketModel, beta: f64, t: f64, support: Complex64) -> Result<Complex64> {
    let index = model.index();
    let o = index.eigenvectors();
    let lambda = index.eigenvalues();
    let dim = index.dim();
    let s_hat = model.sigma_hat().map(|x| Complex64::new(x, 0.0));
    let s_tilde = o.adjoint() * &s_hat;
    let theta_l = (0..dim)
        .filter(|&j| s_tilde[j].norm() > 1e-12)
        .map(|j| lambda[j].re)
        .fold(f64::NEG_INFINITY, f64::max);
    if beta * theta_l >= 1.0 && !model.is_gaussian() {
        return Err(Error::MomentInfinite(format!(
            "the moment exists only for beta * Theta_l < 1, got {}",
            beta * theta_l
        )));
    }
    let in_j: Vec<bool> = (0..dim)
        .map(|j| (lambda[j].re - theta_l).abs() <= 1e-12)
        .collect();
    let sigma = model.sigma().norm();
    let c = prefactor_c(beta, 1.0 / theta_l)?;
    let avg = sphere_average(|xi| {
        let rotated: DVector<Complex64> = DVector::from_fn(dim, |j, _| {
            s_tilde[j] * Complex64::from_polar(1.0, -xi * lambda[j].im.signum())
        });
        let v = (&o * rotated).map(|z| z.re);
        let v = &v / v.norm();
        let phi = model.angular(&v);
        let lhs: f64 = (0..dim)
            .filter(|&j| !in_j[j])
            .map(|j| s_tilde[j].norm_sqr() * phi.powf(2.0 * lambda[j].re))
            .sum();
        let rhs = sigma * sigma * phi.powf(2.0 * theta_l);
        let weight = if (lhs - rhs).abs() <= 1e-12 * rhs {
            0.5
        } else if lhs <= rhs {
            1.0
        } else {
            0.0
        };
        weight * phi.powf(beta * theta_l)
    })?;
    Ok(support * c * (sigma * t.powf(theta_l)).powf(beta) * avg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::ContinuationMode;

    fn model(mu: f64, phi: f64, sigma: f64) -> MarketModel {
        MarketModel::one_dimensional(mu, phi, sigma, 0.0, ContinuationMode::RealPart).unwrap()
    }

    #[test]
    fn prefactor_gaussian_first_moment() {
        let c = prefactor_c(1.0, 2.0).unwrap();
        assert!((c - 2.0 / PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn prefactor_rejects_beta_at_rho() {
        assert!(matches!(prefactor_c(1.5, 1.5), Err(Error::MomentInfinite(_))));
        assert!(matches!(prefactor_c(1.6, 1.5), Err(Error::MomentInfinite(_))));
    }

    #[test]
    fn prefactor_cauchy_half_moment() {
        // E|X|^{1/2} for a standard Cauchy law is 1 / cos(pi/4) = sqrt(2)
        let c = prefactor_c(0.5, 1.0).unwrap();
        assert!((c - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn kernel_params_are_unimodular() {
        for beta in [1.0, 1.3, 2.0, 2.7, 3.5, 4.0] {
            let p = KernelParams::new(beta).unwrap();
            assert!((p.rot.norm() - 1.0).abs() < 1e-15);
            assert!((p.phase.norm() - 1.0).abs() < 1e-15);
        }
        assert!(KernelParams::new(0.9).is_err());
        assert!(KernelParams::new(1.5).unwrap().is_degenerate());
        assert!(!KernelParams::new(2.5).unwrap().is_degenerate());
        assert!(!KernelParams::new(3.0).unwrap().is_degenerate());
    }

    #[test]
    fn kernel_matches_quadratic_closed_form() {
        let p = KernelParams::new(2.0).unwrap();
        let q = QuadratureConfig::default();
        let k = 1.0;
        for lambda in [0.0, 0.5, -1.0, 2.0] {
            let got = kernel_k(&p, k, lambda, &q).unwrap();
            let want = p.rot / (2.0 * PI)
                * (PI / k).sqrt()
                * Complex64::from_polar(1.0, -lambda * lambda / (4.0 * k));
            assert!((got - want).norm() < 1e-10, "lambda {lambda}: {got} vs {want}");
        }
    }

    #[test]
    fn kernel_even_for_even_integer_beta() {
        let q = QuadratureConfig::default();
        for beta in [2.0, 4.0] {
            let p = KernelParams::new(beta).unwrap();
            for lambda in [0.3, 1.1] {
                let a = kernel_k(&p, 1.5, lambda, &q).unwrap();
                let b = kernel_k(&p, 1.5, -lambda, &q).unwrap();
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn marginal_first_power_is_plain_cf() {
        let m = model(1.5, 0.5, 1.2);
        let q = QuadratureConfig::default();
        let got = marginal_cf(&m, 1.0, 0.7, 2.0, &q).unwrap();
        let want = omega_tilde(&m, &DVector::from_vec(vec![0.7 * 1.2]), 2.0).unwrap();
        assert_eq!(got, want);
        assert_eq!(marginal_cf(&m, 2.5, 0.0, 2.0, &q).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn marginal_square_of_gaussian() {
        // v = 2 phi sigma^2 t = 1
        let m = model(2.0, 0.5, 1.0);
        let q = QuadratureConfig::default();
        for k in [0.75, 1.0, 2.0] {
            let want = (Complex64::new(1.0, -2.0 * k)).powf(-0.5);
            let got = marginal_cf(&m, 2.0, k, 1.0, &q).unwrap();
            assert!((got - want).norm() < 1e-8, "k {k}: {got} vs {want}");
            let alt = marginal_cf_contour(&m, 2.0, k, 1.0, &q).unwrap();
            assert!((alt - want).norm() < 1e-8, "contour k {k}: {alt} vs {want}");
        }
    }

    #[test]
    fn two_routes_agree_for_heavy_tails() {
        let m = model(1.6, 0.7, 1.0);
        let q = QuadratureConfig::default();
        for (beta, k) in [(2.0, 1.0), (4.0, 1.0)] {
            let a = marginal_cf(&m, beta, k, 1.0, &q).unwrap();
            let b = marginal_cf_contour(&m, beta, k, 1.0, &q).unwrap();
            assert!((a - b).norm() < 1e-7, "beta {beta}: {a} vs {b}");
        }
    }

    #[test]
    fn degenerate_kernel_is_reported() {
        let m = model(1.8, 0.5, 1.0);
        let q = QuadratureConfig::default();
        assert!(matches!(marginal_cf(&m, 1.5, 1.0, 1.0, &q), Err(Error::Unsupported(_))));
    }

    #[test]
    fn odd_and_even_integer_moments() {
        let m = model(1.5, 0.5, 1.0);
        assert_eq!(frac_moment(&m, 1.0, 1.0).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(frac_moment(&m, 3.0, 2.0).unwrap(), Complex64::new(0.0, 0.0));
        assert!(matches!(frac_moment(&m, 2.0, 1.0), Err(Error::MomentInfinite(_))));
        assert!(matches!(frac_moment(&m, 1.6, 1.0), Err(Error::MomentInfinite(_))));
    }

    #[test]
    fn gaussian_second_moment_is_variance() {
        let m = model(2.0, 0.3, 1.5);
        let v = frac_moment(&m, 2.0, 2.0).unwrap();
        assert!((v.re - 2.0 * 0.3 * 1.5 * 1.5 * 2.0).abs() < 1e-12);
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn time_scaling_law() {
        let m = model(1.7, 0.4, 1.3);
        for beta in [0.3, 0.5, 1.2] {
            let a = frac_moment(&m, beta, 1.0).unwrap();
            let b = frac_moment(&m, beta, 3.0).unwrap();
            let want = a * 3f64.powf(beta / 1.7);
            assert!((b - want).norm() < 1e-12 * want.norm());
            let ph = (a / support_factor(beta)).im;
            assert!(ph.abs() < 1e-14);
        }
    }
}
