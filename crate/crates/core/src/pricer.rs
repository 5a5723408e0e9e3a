//! European option prices from the Fourier-space solution of the generalized
//! Black-Scholes equation.
//!
//! With `tau = T - t`, `c = phi(-i sigma)`, `z = c tau`, `d = ln(S/K) + r tau`
//! and `w = d + z`, the call is `S N1 - K e^{-r tau} N0`. Let `X` be the
//! fluctuation with characteristic function `exp(-tau (V(k) - i k c))`. Then
//! `N0 = P(X <= w)`, `N1 = e^z (E[e^{-X}] - E[e^{-X}; X > w])`, and
//! `E[e^{-X}]` takes its continued value `e^{-c tau}`. For a radial exponent
//! below 2 the true expectation is infinite, so this value is what keeps the
//! call finite. It also makes put-call parity exact.
//!
//! The appendix representation through the `M` factors is available as
//! [`n_factor_appendix`]; it coincides with [`n_factor`] for Gaussian
//! fluctuations.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charfn::{phi_imag, Branch, ContinuationMode, MarketModel};
use crate::error::{Error, Result};
use crate::quad::{integrate_semi_infinite, Quadrature, QuadratureConfig};
use crate::special::gamma_ratio_c;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionStyle {
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionContract {
    pub style: OptionStyle,
    pub strike: f64,
    pub maturity: f64,
}

impl OptionContract {
    pub fn new(style: OptionStyle, strike: f64, maturity: f64) -> Result<Self> {
        if !(strike > 0.0 && strike.is_finite()) {
            return Err(Error::Domain(format!("strike must be positive, got {strike}")));
        }
        if !(maturity > 0.0 && maturity.is_finite()) {
            return Err(Error::Domain(format!("maturity must be positive, got {maturity}")));
        }
        Ok(Self {
            style,
            strike,
            maturity,
        })
    }

    pub fn call(strike: f64, maturity: f64) -> Result<Self> {
        Self::new(OptionStyle::Call, strike, maturity)
    }

    pub fn put(strike: f64, maturity: f64) -> Result<Self> {
        Self::new(OptionStyle::Put, strike, maturity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceReport {
    pub style: OptionStyle,
    pub spot: f64,
    pub strike: f64,
    pub tau: f64,
    /// Real part of the raw price.
    pub price: f64,
    pub n1: Complex64,
    pub n2: Complex64,
    /// `d + z`, the upper limit of both factors in the shifted variable.
    pub d1: Complex64,
    /// Number of stocks `N_S = -dC/dS`.
    pub hedge: f64,
    /// `N_S S + C`.
    pub portfolio: f64,
    /// `|V + K e^{-r tau} Re N2|`; zero when the closed-form portfolio holds.
    pub portfolio_gap: f64,
    /// `|Im(raw price)|`.
    pub imag_residue: f64,
    pub quadrature_error: f64,
    /// `|C - P - (S - K e^{-r tau})|` from the two raw prices.
    pub parity_gap: f64,
    pub mode: ContinuationMode,
}

/// `V(k)` without the rate term.
fn potential(model: &MarketModel, k: Complex64) -> Result<Complex64> {
    let p = model.projection()?;
    match model.mode() {
        ContinuationMode::GammaRatio => {
            let ik = Complex64::i() * k;
            Ok(-p.amplitude * gamma_ratio_c(ik + p.rho, ik))
        }
        _ => {
            let c = phi_imag(model, 1.0)?;
            Ok(Complex64::i() * k * c + model.phi_projected_complex(-k, Branch::Even)?)
        }
    }
}

/// `H(k) = r i k + V(k)` with `V(k) = i k phi(-i sigma) + phi(-k sigma)`; in
/// gamma-ratio mode `V(k) = -A Gamma(ik + rho) / Gamma(ik)`.
pub fn hamiltonian(model: &MarketModel, k: Complex64) -> Result<Complex64> {
    Ok(Complex64::i() * k * model.rate() + potential(model, k)?)
}

/// Characteristic function of the fluctuation `X` at real `k`,
/// `exp(-tau (V(k) - i k c))`.
pub fn fluctuation_cf(model: &MarketModel, k: f64, tau: f64) -> Result<Complex64> {
    match model.mode() {
        ContinuationMode::GammaRatio => {
            let c = phi_imag(model, 1.0)?;
            let kc = Complex64::new(k, 0.0);
            Ok((-tau * (potential(model, kc)? - Complex64::i() * kc * c)).exp())
        }
        _ => {
            let p = model.projection()?;
            Ok(Complex64::new((-tau * p.amplitude * k.abs().powf(p.rho)).exp(), 0.0))
        }
    }
}

/// Regular part of the payoff transform together with the weight of its
/// `2 pi delta(k - i)` term, which is carried symbolically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffTransform {
    pub regular: Complex64,
    /// Coefficient `c` of `c * 2 pi delta(k - i)`.
    pub delta_weight: Complex64,
}

/// `K^{ik+1} (-(ik+1)^{-1} + (ik)^{-1} + 2 pi delta(k-i))` for a call, all
/// signs flipped for a put.
pub fn payoff_transform(opt: &OptionContract, k: Complex64) -> Result<PayoffTransform> {
    let ik = Complex64::i() * k;
    if ik.norm() < 1e-14 || (ik + 1.0).norm() < 1e-14 {
        return Err(Error::Pole(format!("payoff transform has a pole at k = {k}")));
    }
    let scale = (Complex64::new(opt.strike.ln(), 0.0) * (ik + 1.0)).exp();
    let sign = match opt.style {
        OptionStyle::Call => 1.0,
        OptionStyle::Put => -1.0,
    };
    Ok(PayoffTransform {
        regular: sign * scale * (-(ik + 1.0).inv() + ik.inv()),
        // K^{ik+1} at k = i is K^0 = 1
        delta_weight: Complex64::new(sign, 0.0),
    })
}

/// Characteristic width of the fluctuation, `(tau A)^{-1/rho}`.
fn cf_width(model: &MarketModel, tau: f64) -> Result<(f64, f64)> {
    let p = model.projection()?;
    Ok(((tau * p.amplitude).powf(-1.0 / p.rho), p.rho))
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("time to maturity must be positive, got {tau}")));
    }
    Ok(())
}

/// A factor value with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NFactor {
    pub value: Complex64,
    pub error: f64,
}

fn oscillation_width(w: Complex64) -> f64 {
    6.0 * PI / w.re.abs().max(1.0)
}

/// `P(X <= w)` by Fourier inversion along the positive half line.
fn cdf(model: &MarketModel, w: Complex64, tau: f64, q: &QuadratureConfig) -> Result<Quadrature> {
    let (h, _) = cf_width(model, tau)?;
    let grow = w.im.abs();
    let symmetric = model.mode() != ContinuationMode::GammaRatio;
    let mut res = integrate_semi_infinite(
        q,
        h,
        oscillation_width(w),
        |k| {
            let ikw = Complex64::i() * k * w;
            let plus = fluctuation_cf(model, k, tau).unwrap_or_default();
            if symmetric {
                // [e^{-ikw} - e^{ikw}] chi / (ik) = -2 sin(kw) chi / k
                -2.0 * (k * w).sin() * plus / k
            } else {
                let minus = fluctuation_cf(model, -k, tau).unwrap_or_default();
                ((-ikw).exp() * plus - ikw.exp() * minus) / (Complex64::i() * k)
            }
        },
        |k| {
            let env = fluctuation_cf(model, k, tau).map(|c| c.norm()).unwrap_or(f64::NAN);
            2.0 * env * (k * grow).exp() * (1.0 / k.max(1e-300)).min(w.norm().max(1.0))
        },
    )?;
    res.value = 0.5 - res.value / (2.0 * PI);
    res.error /= 2.0 * PI;
    Ok(res)
}

/// `E[e^{-X}; X > w]`.
fn upper_exp_moment(
    model: &MarketModel,
    w: Complex64,
    tau: f64,
    q: &QuadratureConfig,
) -> Result<Quadrature> {
    let (h, _) = cf_width(model, tau)?;
    let grow = w.im.abs();
    let mut res = integrate_semi_infinite(
        q,
        h,
        oscillation_width(w),
        |k| {
            let ikw = Complex64::i() * k * w;
            let plus = fluctuation_cf(model, k, tau).unwrap_or_default();
            let minus = fluctuation_cf(model, -k, tau).unwrap_or_default();
            let ik = Complex64::new(0.0, k);
            plus * (-ikw).exp() / (1.0 + ik) + minus * ikw.exp() / (1.0 - ik)
        },
        |k| {
            let env = fluctuation_cf(model, k, tau).map(|c| c.norm()).unwrap_or(f64::NAN);
            2.0 * env * (k * grow).exp() / (1.0 + k * k).sqrt()
        },
    )?;
    let pre = (-w).exp() / (2.0 * PI);
    res.value *= pre;
    res.error *= pre.norm();
    Ok(res)
}

/// `N^(s)(d; z) = int_{-inf}^d e^{-s xi} nu(xi + z) d xi` for `s` in {0, 1}.
///
/// `s = 1` uses the continued value of `E[e^{-X}]`, see the module docs.
pub fn n_factor(
    model: &MarketModel,
    s: u8,
    d: f64,
    z: Complex64,
    tau: f64,
    q: &QuadratureConfig,
) -> Result<NFactor> {
    check_tau(tau)?;
    let w = d + z;
    match s {
        0 => {
            let r = cdf(model, w, tau, q)?;
            Ok(NFactor {
                value: r.value,
                error: r.error,
            })
        }
        1 => {
            let total = (-tau * phi_imag(model, 1.0)?).exp();
            let r = upper_exp_moment(model, w, tau, q)?;
            let ez = z.exp();
            Ok(NFactor {
                value: ez * (total - r.value),
                error: ez.norm() * r.error,
            })
        }
        _ => Err(Error::Domain(format!("s must be 0 or 1, got {s}"))),
    }
}

/// `(M1, M2)` at `theta` for the shift `s`, from the polar form
/// `l = sqrt(theta^2 + s^2)`, `cos(phi_p) = p theta / l`, `sin(phi_p) = s / l`,
/// `alpha_p = A tau l^rho sin(rho phi_p)`.
pub fn m_factors(model: &MarketModel, theta: f64, s: f64, tau: f64) -> Result<(Complex64, Complex64)> {
    check_tau(tau)?;
    if !(theta >= 0.0 && s >= 0.0) {
        return Err(Error::Domain("need theta >= 0 and s >= 0".into()));
    }
    let p = model.projection()?;
    let l = theta.hypot(s);
    let mut m1 = Complex64::new(0.0, 0.0);
    let mut m2 = Complex64::new(0.0, 0.0);
    if l == 0.0 {
        return Ok((Complex64::new(2.0, 0.0), m2));
    }
    for sign in [1.0, -1.0] {
        let angle = s.atan2(sign * theta);
        let mag = p.amplitude * tau * l.powf(p.rho);
        let alpha = mag * (p.rho * angle).sin();
        let term = (-mag * (p.rho * angle).cos()).exp() * Complex64::new(alpha.cos(), -alpha.sin());
        m1 += term;
        m2 += sign * term;
    }
    Ok((m1, m2))
}

/// The appendix integral for `N^(s)`:
/// `(e^{sz}/2) [ e^{-tau phi(i s sigma)} + (1/pi) int_0^inf e^{theta z_i}
/// ( sin(theta(d+z_r))/theta M1 + i cos(theta(d+z_r))/theta M2 ) d theta ]`.
///
/// The continuation is the branch of `k^rho` analytic in the upper half
/// plane. For a radial exponent below 2 this differs from the even
/// characteristic function on the negative axis, and the integral can fail
/// to converge; that is reported as [`Error::Divergent`].
pub fn n_factor_appendix(
    model: &MarketModel,
    s: u8,
    d: f64,
    z: Complex64,
    tau: f64,
    q: &QuadratureConfig,
) -> Result<NFactor> {
    check_tau(tau)?;
    if s > 1 {
        return Err(Error::Domain(format!("s must be 0 or 1, got {s}")));
    }
    let sf = s as f64;
    let (h, _) = cf_width(model, tau)?;
    let p = model.projection()?;
    let x = d + z.re;
    let res = integrate_semi_infinite(
        q,
        h,
        oscillation_width(Complex64::new(x, 0.0)),
        |theta| {
            let (m1, m2) = m_factors(model, theta, sf, tau).unwrap_or_default();
            let (sn, cs) = (theta * x).sin_cos();
            (theta * z.im).exp() * (sn * m1 + Complex64::i() * cs * m2) / theta
        },
        |theta| {
            let l = theta.hypot(sf);
            let mut env = 0.0;
            for sign in [1.0, -1.0] {
                let angle = sf.atan2(sign * theta);
                env += (-p.amplitude * tau * l.powf(p.rho) * (p.rho * angle).cos()).exp();
            }
            (theta * z.im).exp() * env * (1.0 + 1.0 / theta.max(1e-300))
        },
    )?;
    let at_origin = (-tau * model.phi_projected_complex(Complex64::new(0.0, sf), Branch::UpperHalfPlane)?)
        .exp();
    let pre = 0.5 * (sf * z).exp();
    Ok(NFactor {
        value: pre * (at_origin + res.value / PI),
        error: pre.norm() * res.error / PI,
    })
}

struct RawPrice {
    call: Complex64,
    put: Complex64,
    n1: NFactor,
    n0: NFactor,
    w: Complex64,
}

fn raw_price(
    model: &MarketModel,
    strike: f64,
    spot: f64,
    tau: f64,
    q: &QuadratureConfig,
) -> Result<RawPrice> {
    let r = model.rate();
    let z = tau * phi_imag(model, 1.0)?;
    let d = (spot / strike).ln() + r * tau;
    let n1 = n_factor(model, 1, d, z, tau, q)?;
    let n0 = n_factor(model, 0, d, z, tau, q)?;
    let disc = strike * (-r * tau).exp();
    Ok(RawPrice {
        call: spot * n1.value - disc * n0.value,
        put: disc * (1.0 - n0.value) - spot * (1.0 - n1.value),
        n1,
        n0,
        w: d + z,
    })
}

fn check_market(opt: &OptionContract, spot: f64, t: f64) -> Result<f64> {
    if !(spot > 0.0 && spot.is_finite()) {
        return Err(Error::Domain(format!("spot must be positive, got {spot}")));
    }
    if !(t >= 0.0 && t < opt.maturity) {
        return Err(Error::Domain(format!(
            "need 0 <= t < T, got t = {t}, T = {}",
            opt.maturity
        )));
    }
    Ok(opt.maturity - t)
}

fn pick(style: OptionStyle, raw: &RawPrice) -> Complex64 {
    match style {
        OptionStyle::Call => raw.call,
        OptionStyle::Put => raw.put,
    }
}

/// Relative bump for the finite-difference hedge ratio.
pub const HEDGE_BUMP: f64 = 1e-5;

/// Price, factors, hedge ratio and diagnostics.
pub fn price_option(
    model: &MarketModel,
    opt: &OptionContract,
    spot: f64,
    t: f64,
    q: &QuadratureConfig,
) -> Result<PriceReport> {
    q.validate()?;
    let tau = check_market(opt, spot, t)?;
    let raw = raw_price(model, opt.strike, spot, tau, q)?;
    let value = pick(opt.style, &raw);
    let disc = opt.strike * (-model.rate() * tau).exp();
    let parity_gap = (raw.call - raw.put - (spot - disc)).norm();
    let (hedge, portfolio) = hedge_and_portfolio(model, opt, spot, t, q)?;
    let portfolio_gap = (portfolio + disc * raw.n0.value.re).abs();
    Ok(PriceReport {
        style: opt.style,
        spot,
        strike: opt.strike,
        tau,
        price: value.re,
        n1: raw.n1.value,
        n2: raw.n0.value,
        d1: raw.w,
        hedge,
        portfolio,
        portfolio_gap,
        imag_residue: value.im.abs(),
        quadrature_error: spot * raw.n1.error + disc * raw.n0.error,
        parity_gap,
        mode: model.mode(),
    })
}

/// Price only, without the hedge bumps.
pub fn price_value(
    model: &MarketModel,
    opt: &OptionContract,
    spot: f64,
    t: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    let tau = check_market(opt, spot, t)?;
    Ok(pick(opt.style, &raw_price(model, opt.strike, spot, tau, q)?).re)
}

/// `N_S = -dC/dS` by a central difference and the portfolio `N_S S + C`.
pub fn hedge_and_portfolio(
    model: &MarketModel,
    opt: &OptionContract,
    spot: f64,
    t: f64,
    q: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let tau = check_market(opt, spot, t)?;
    let h = HEDGE_BUMP * spot;
    let up = pick(opt.style, &raw_price(model, opt.strike, spot + h, tau, q)?).re;
    let down = pick(opt.style, &raw_price(model, opt.strike, spot - h, tau, q)?).re;
    let centre = raw_price(model, opt.strike, spot, tau, q)?;
    let hedge = -(up - down) / (2.0 * h);
    // The exact derivative of S N1 - K e^{-r tau} N0 in S is N1 (minus one for a put).
    let exact = match opt.style {
        OptionStyle::Call => -centre.n1.value.re,
        OptionStyle::Put => 1.0 - centre.n1.value.re,
    };
    if (hedge - exact).abs() > 1e-4 {
        log::warn!(
            "unstable finite-difference hedge: {hedge} vs analytic {exact} at spot {spot}"
        );
    }
    Ok((hedge, hedge * spot + pick(opt.style, &centre).re))
}
