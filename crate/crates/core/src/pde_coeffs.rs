//! Coefficients of the generalized Black-Scholes equation.
//!
//! `a_n^(k)` are the signed Stirling numbers of the first kind, `S_n` the
//! binomial differences of the continued log-characteristic function and
//! `E_n` the coefficients of the log-price derivatives. For a radial exponent
//! below 2 the `E_n` with `n > 1` are infinite; they are returned on a
//! truncated domain together with their growth rate and are never summed.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::charfn::{phi_imag, MarketModel};
use crate::error::{Error, Result};
use crate::special::{gamma, gauss_legendre};

/// Largest `k` for which the table is built.
pub const K_LIMIT: usize = 64;

/// Lower end of the log-spaced Lévy panels; below it a series is used.
const XI_MIN: f64 = 1e-6;
const LOG_PANEL: f64 = 0.25;
const NODES: usize = 32;

/// Rows `a[k][n]` for `0 <= n <= k <= k_max` by the first-kind recurrence.
pub fn stirling_table(k_max: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
    for k in 0..k_max {
        let prev = &rows[k];
        let mut next = vec![BigInt::zero(); k + 2];
        for n in 1..=k + 1 {
            let carry = prev[n - 1].clone();
            let stay = if n <= k {
                &prev[n] * BigInt::from(k as u64)
            } else {
                BigInt::zero()
            };
            next[n] = carry - stay;
        }
        rows.push(next);
    }
    rows
}

/// `a_n^(k)`, exact.
pub fn stirling_a(n: usize, k: usize) -> Result<BigInt> {
    if n == 0 || n > k || k > K_LIMIT {
        return Err(Error::Domain(format!(
            "need 1 <= n <= k <= {K_LIMIT}, got n = {n}, k = {k}"
        )));
    }
    Ok(stirling_table(k)[k][n].clone())
}

/// `a_n^(k)` from its elementary-symmetric definition: the signed sum over
/// `(k - n)`-subsets of `{1, ..., k-1}` of the product of their elements.
/// Exponential cost; a test oracle for small `k`.
pub fn stirling_a_enumerated(n: usize, k: usize) -> Result<BigInt> {
    if n == 0 || n > k || k > 20 {
        return Err(Error::Domain(format!("enumeration needs 1 <= n <= k <= 20, got {n}, {k}")));
    }
    let m = k - n;
    let mut total = BigInt::zero();
    for mask in 0u32..(1u32 << (k - 1)) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let mut prod = BigInt::one();
        for j in 0..k - 1 {
            if mask & (1 << j) != 0 {
                prod *= BigInt::from(j as u64 + 1);
            }
        }
        total += prod;
    }
    Ok(if m % 2 == 1 { -total } else { total })
}

fn binomial(n: usize, q: usize) -> f64 {
    (0..q).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `S_n = sum_q C(n,q) (-1)^{n-q} phi(-i q sigma)`.
pub fn s_coeff(model: &MarketModel, n: usize) -> Result<Complex64> {
    if n > K_LIMIT {
        return Err(Error::Domain(format!("n must be <= {K_LIMIT}")));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for q in 0..=n {
        let sign = if (n - q) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(n, q) * phi_imag(model, q as f64)?;
    }
    Ok(acc)
}

/// Radial exponent and amplitude of a one-dimensional projection, rejecting
/// the Gaussian point where the Lévy density is not a function.
fn levy_params(model: &MarketModel) -> Result<(f64, f64)> {
    let p = model.projection()?;
    if p.rho >= 2.0 {
        return Err(Error::Unsupported(
            "the Gaussian Lévy density is a distribution (delta''), not a function".into(),
        ));
    }
    Ok((p.rho, p.amplitude))
}

/// Constant `c` in `phi~(xi) = c xi^{-rho-1}`.
fn levy_constant(rho: f64, amplitude: f64) -> f64 {
    if (rho - 1.0).abs() < 1e-12 {
        // Gamma(-rho) cos(pi rho / 2) -> -pi/2 as rho -> 1
        return -amplitude / PI;
    }
    amplitude / (gamma(-rho) * 2.0 * (0.5 * PI * rho).cos())
}

/// Inverse Laplace transform of the continued log-characteristic function,
/// `A / (Gamma(-rho) 2 cos(pi rho / 2)) xi^{-rho-1}` with `A = phi_pm |sigma|^rho`.
///
/// Negative for every `0 < rho < 2`: it is minus the one-sided Lévy density.
pub fn levy_density_tilde(model: &MarketModel, xi: f64) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::Domain(format!("xi must be positive, got {xi}")));
    }
    let (rho, amp) = levy_params(model)?;
    Ok(levy_constant(rho, amp) * xi.powf(-rho - 1.0))
}

/// `int_{XI_MIN}^{cutoff} xi^{-rho-1} f(xi) d xi` on log-spaced panels.
fn log_panels<F: Fn(f64) -> f64>(rho: f64, cutoff: f64, f: F) -> f64 {
    let (gx, gw) = gauss_legendre(NODES);
    let lo = XI_MIN.ln();
    let hi = cutoff.ln();
    let panels = ((hi - lo) / LOG_PANEL).ceil().max(1.0) as usize;
    let width = (hi - lo) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * width;
        for (x, w) in gx.iter().zip(&gw) {
            let u = a + 0.5 * width * (x + 1.0);
            let xi = u.exp();
            acc += 0.5 * width * w * f(xi) * (-rho * u).exp();
        }
    }
    acc
}

/// `int_0^{x} xi^{-rho-1} sum_j c_j xi^{j} d xi` for a power-series head.
fn series_head(rho: f64, x: f64, coeffs: &[(i32, f64)]) -> f64 {
    coeffs
        .iter()
        .map(|&(j, c)| c * x.powf(j as f64 - rho) / (j as f64 - rho))
        .sum()
}

/// `e^{-x} - 1 + x` without cancellation.
fn compensated_exp(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        x * x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0 - x / 120.0)))
    } else {
        (-x).exp_m1() + x
    }
}

fn check_cutoff(cutoff: f64) -> Result<()> {
    if !(cutoff > XI_MIN && cutoff.is_finite()) {
        return Err(Error::Domain(format!("cutoff must be finite and > {XI_MIN}, got {cutoff}")));
    }
    Ok(())
}

/// Compensated truncated Laplace transform
/// `psi(q) = int_0^cutoff phi~(xi) (e^{-q xi} - 1 + q xi) d xi`.
pub fn truncated_laplace(model: &MarketModel, q: f64, cutoff: f64) -> Result<f64> {
    check_cutoff(cutoff)?;
    let (rho, amp) = levy_params(model)?;
    let c = levy_constant(rho, amp);
    let head = series_head(
        rho,
        XI_MIN,
        &[(2, q * q / 2.0), (3, -q.powi(3) / 6.0), (4, q.powi(4) / 24.0)],
    );
    Ok(c * (head + log_panels(rho, cutoff, |xi| compensated_exp(q * xi))))
}

/// `S_n` from the binomial form applied to [`truncated_laplace`]; the
/// compensating terms drop out of the binomial sum for `n >= 2`.
pub fn s_coeff_truncated(model: &MarketModel, n: usize, cutoff: f64) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for q in 0..=n {
        let sign = if (n - q) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(n, q) * truncated_laplace(model, q as f64, cutoff)?;
    }
    Ok(acc)
}

/// `S_n = int_0^cutoff phi~(xi) (e^{-xi} - 1)^n d xi` for `n >= 2`; at
/// `n = 1` the compensated integrand `e^{-xi} - 1 + xi` is used.
pub fn s_coeff_levy(model: &MarketModel, n: usize, cutoff: f64) -> Result<f64> {
    check_cutoff(cutoff)?;
    if n == 0 {
        return Ok(0.0);
    }
    let (rho, amp) = levy_params(model)?;
    let c = levy_constant(rho, amp);
    if n == 1 {
        return truncated_laplace(model, 1.0, cutoff);
    }
    let nf = n as f64;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    // (e^{-xi} - 1)^n = (-xi)^n (1 - n xi / 2 + n(3n+1) xi^2 / 24 + ...)
    let head = sign
        * series_head(
            rho,
            XI_MIN,
            &[
                (n as i32, 1.0),
                (n as i32 + 1, -nf / 2.0),
                (n as i32 + 2, nf * (3.0 * nf + 1.0) / 24.0),
            ],
        );
    let body = log_panels(rho, cutoff, |xi| (-xi).exp_m1().powi(n as i32));
    Ok(c * (head + body))
}

/// A truncated `E_n` with the rate at which it grows with the cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedCoeff {
    pub value: f64,
    pub cutoff: f64,
    /// `value ~ cutoff^growth` as the cutoff grows; zero when convergent.
    pub growth: f64,
}

/// `E_n` on `[0, cutoff]`. `n = 1` uses the compensated integrand and
/// converges for `rho > 1`; `n > 1` grows like `cutoff^{n - rho}`.
pub fn e_coeff(model: &MarketModel, n: usize, cutoff: f64) -> Result<TruncatedCoeff> {
    check_cutoff(cutoff)?;
    if n == 0 {
        return Err(Error::Domain("E_n is defined for n >= 1".into()));
    }
    if model.is_gaussian() {
        return Ok(TruncatedCoeff {
            value: e_coeff_gaussian(model, n)?,
            cutoff,
            growth: 0.0,
        });
    }
    let (rho, amp) = levy_params(model)?;
    if n == 1 {
        return Ok(TruncatedCoeff {
            value: -truncated_laplace(model, 1.0, cutoff)?,
            cutoff,
            growth: if rho > 1.0 { 0.0 } else { 1.0 - rho },
        });
    }
    let nf = n as f64;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let factorial: f64 = (1..=n).map(|i| i as f64).product();
    let c = levy_constant(rho, amp);
    Ok(TruncatedCoeff {
        value: sign * c * cutoff.powf(nf - rho) / ((nf - rho) * factorial),
        cutoff,
        growth: nf - rho,
    })
}

/// Gaussian `E_n` from the functional `phi~ = -A delta''`:
/// `E_1 = A`, `E_2 = -A`, zero beyond.
pub fn e_coeff_gaussian(model: &MarketModel, n: usize) -> Result<f64> {
    if !model.is_gaussian() {
        return Err(Error::Unsupported("delta'' functional needs the Gaussian model".into()));
    }
    let amp = model.projection()?.amplitude;
    // -A g''(0) with g_1 = -(e^{-xi} - 1 + xi), g_n = (-1)^n xi^n / n!
    let second_derivative_at_zero = match n {
        1 => -1.0,
        2 => 1.0,
        _ => 0.0,
    };
    Ok(-amp * second_derivative_at_zero)
}

/// `E_n = sum_{k >= max(n,2)} a_n^(k) / k! S_k` over a finite table.
pub fn e_from_s(a: &[Vec<BigInt>], s: &[Complex64], n: usize) -> Complex64 {
    let k_max = s.len().saturating_sub(1).min(a.len().saturating_sub(1));
    let mut acc = Complex64::new(0.0, 0.0);
    let mut factorial = 1.0;
    for k in 1..=k_max {
        factorial *= k as f64;
        if k < n.max(2) {
            continue;
        }
        let a_nk = a[k][n].to_f64().unwrap_or(f64::NAN);
        acc += a_nk / factorial * s[k];
    }
    acc
}

/// `sum_n E_n (-i k)^n`.
pub fn hamiltonian_series(e: &[f64], k: Complex64) -> Complex64 {
    let x = Complex64::new(0.0, -1.0) * k;
    let mut pow = x;
    let mut acc = Complex64::new(0.0, 0.0);
    for en in e {
        acc += en * pow;
        pow *= x;
    }
    acc
}

/// `int_0^inf phi~(xi) [ (e^{-xi} - 1) i k + e^{i k xi} - 1 ] d xi`.
///
/// Integrated numerically up to `cutoff` and continued analytically beyond
/// it, so the result does not depend on the cutoff. Needs `1 < rho < 2`.
pub fn hamiltonian_levy(model: &MarketModel, k: f64, cutoff: f64) -> Result<Complex64> {
    check_cutoff(cutoff)?;
    let (rho, amp) = levy_params(model)?;
    if rho <= 1.0 {
        return Err(Error::Unsupported("the Lévy-integral Hamiltonian needs rho > 1".into()));
    }
    let c = levy_constant(rho, amp);
    let ik = Complex64::new(0.0, k);
    let integrand = |xi: f64| -> Complex64 {
        ik * (-xi).exp_m1() + (Complex64::new(0.0, k * xi)).exp() - 1.0
    };
    // small-xi series: xi^2 (ik - k^2)/2 - xi^3 (ik + ik^3)/6 + xi^4 (ik + k^4)/24
    let head_coeff = [
        (2, (ik - k * k) / 2.0),
        (3, -(ik + ik * k * k) / 6.0),
        (4, (ik + k.powi(4)) / 24.0),
    ];
    let mut acc: Complex64 = head_coeff
        .iter()
        .map(|&(j, cj)| cj * XI_MIN.powf(j as f64 - rho) / (j as f64 - rho))
        .sum();

    let (gx, gw) = gauss_legendre(NODES);
    let split = 1.0f64.min(cutoff);
    let lo = XI_MIN.ln();
    let panels = ((split.ln() - lo) / LOG_PANEL).ceil() as usize;
    let width = (split.ln() - lo) / panels as f64;
    for p in 0..panels {
        let a = lo + p as f64 * width;
        for (x, w) in gx.iter().zip(&gw) {
            let u = a + 0.5 * width * (x + 1.0);
            acc += 0.5 * width * w * integrand(u.exp()) * (-rho * u).exp();
        }
    }
    if cutoff > split {
        let step = 1.0f64.min(PI / k.abs().max(1e-300));
        let panels = ((cutoff - split) / step).ceil() as usize;
        let width = (cutoff - split) / panels as f64;
        for p in 0..panels {
            let a = split + p as f64 * width;
            for (x, w) in gx.iter().zip(&gw) {
                let xi = a + 0.5 * width * (x + 1.0);
                acc += 0.5 * width * w * integrand(xi) * xi.powf(-rho - 1.0);
            }
        }
    }
    // Tail beyond the cutoff: e^{-xi} is negligible, -(1 + ik) integrates in
    // closed form and e^{ik xi} by repeated integration by parts.
    let x = cutoff.max(split);
    acc += -(1.0 + ik) * x.powf(-rho) / rho;
    if k != 0.0 {
        let mut term = Complex64::new(0.0, 0.0);
        let mut factor = Complex64::new(0.0, 1.0) / k;
        let mut a = rho + 1.0;
        for _ in 0..6 {
            term += factor * x.powf(-a);
            factor *= Complex64::new(0.0, -1.0) * a / k;
            a += 1.0;
        }
        acc += (ik * x).exp() * term;
    }
    Ok(c * acc)
}

/// Closed form of [`hamiltonian_levy`]: `c' (ik + (-ik)^rho)` with
/// `c' = A / (2 cos(pi rho / 2))`.
pub fn hamiltonian_levy_closed(model: &MarketModel, k: f64) -> Result<Complex64> {
    let (rho, amp) = levy_params(model)?;
    let cp = amp / (2.0 * (0.5 * PI * rho).cos());
    let ik = Complex64::new(0.0, k);
    Ok(cp * (ik + (-ik).powf(rho)))
}

/// The coefficient table for one model.
#[derive(Debug, Clone)]
pub struct CoeffTable {
    /// `a[k][n]`, `0 <= n <= k <= k_max`.
    pub a: Vec<Vec<BigInt>>,
    /// `S_0 ... S_{k_max}`.
    pub s: Vec<Complex64>,
    /// `E_1 ... E_{k_max}` on the truncated domain.
    pub e: Vec<TruncatedCoeff>,
    pub cutoff: f64,
}

impl CoeffTable {
    pub fn build(model: &MarketModel, k_max: usize, cutoff: f64) -> Result<Self> {
        if k_max == 0 || k_max > K_LIMIT {
            return Err(Error::Domain(format!("k_max must be in 1..={K_LIMIT}")));
        }
        let a = stirling_table(k_max);
        let s = (0..=k_max)
            .map(|n| s_coeff(model, n))
            .collect::<Result<Vec<_>>>()?;
        let e = (1..=k_max)
            .map(|n| e_coeff(model, n, cutoff))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { a, s, e, cutoff })
    }
}
