//! Monte Carlo ground truth with exact terminal sampling.
//!
//! Every draw comes from a ChaCha8 stream selected by `(master_seed, block)`,
//! so an estimate depends only on the seed and the path count, never on how
//! the blocks were scheduled. Block results are reduced in block order.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::charfn::{phi_imag, AngularFn, ContinuationMode, MarketModel};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::pricer::{OptionContract, OptionStyle};
use crate::stable_index::Regime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// Includes the drift `alpha tau`.
    Physical,
    /// The fluctuation `sigma . L_tau` alone.
    #[default]
    Compensated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub master_seed: u64,
    pub block_size: usize,
    pub measure: Measure,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            master_seed: 0x5eed,
            block_size: 16_384,
            measure: Measure::Compensated,
            execution: Execution::default(),
        }
    }
}

impl SimConfig {
    pub fn new(n_paths: usize, master_seed: u64) -> Self {
        Self {
            n_paths,
            master_seed,
            ..Self::default()
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::Domain("n_paths must be at least 1".into()));
        }
        if self.block_size == 0 {
            return Err(Error::Domain("block_size must be at least 1".into()));
        }
        Ok(())
    }

    fn n_blocks(&self) -> usize {
        self.n_paths.div_ceil(self.block_size)
    }

    fn block_len(&self, b: usize) -> usize {
        self.block_size.min(self.n_paths - b * self.block_size)
    }

    fn stream(&self, b: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(b as u64);
        rng
    }
}

/// Runs `f` once per block with that block's stream and length.
fn per_block<T, F>(cfg: &SimConfig, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync + Send,
{
    map_indexed(cfg.n_blocks(), cfg.execution, |b| {
        let mut rng = cfg.stream(b);
        f(&mut rng, cfg.block_len(b))
    })
}

/// One draw with characteristic function `exp(-|k|^mu)` by the
/// Chambers-Mallows-Stuck transform.
pub fn standard_stable<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    // 1 - u lies in (0, 1], so the logarithm is finite
    let w = -(1.0 - rng.random::<f64>()).ln();
    if mu == 1.0 {
        return v.tan();
    }
    if mu == 2.0 {
        return 2.0 * v.sin() * w.sqrt();
    }
    let cv = v.cos().max(f64::MIN_POSITIVE);
    (mu * v).sin() / cv.powf(1.0 / mu) * ((v - mu * v).cos() / w).powf((1.0 - mu) / mu)
}

fn check_index(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu <= 2.0) {
        return Err(Error::Domain(format!("stability index must lie in (0, 2], got {mu}")));
    }
    Ok(())
}

/// `n` draws of `scale * Z` with `Z` standard, i.e. characteristic function
/// `exp(-scale^mu |k|^mu)`. Uses `cfg` for seeding and blocking only.
pub fn sample_stable(mu: f64, scale: f64, n: usize, cfg: &SimConfig) -> Result<Vec<f64>> {
    check_index(mu)?;
    if !(scale > 0.0) {
        return Err(Error::Domain(format!("scale must be positive, got {scale}")));
    }
    let cfg = SimConfig { n_paths: n, ..*cfg };
    cfg.validate()?;
    Ok(per_block(&cfg, |rng, len| {
        (0..len).map(|_| scale * standard_stable(mu, rng)).collect::<Vec<_>>()
    })
    .concat())
}

/// Exact sampler of `sigma . L_tau`.
#[derive(Debug, Clone)]
enum Sampler {
    Radial { rho: f64, scale: f64 },
    Components(Vec<(f64, f64)>),
}

impl Sampler {
    fn new(model: &MarketModel, tau: f64) -> Result<Self> {
        match model.index().regime() {
            Regime::PureScaling => {
                let p = model.projection()?;
                Ok(Sampler::Radial {
                    rho: p.rho,
                    scale: (tau * p.amplitude).powf(1.0 / p.rho),
                })
            }
            Regime::Generic => {
                let AngularFn::EigenComponents { scales } = &model.logcf().angular else {
                    return Err(Error::Unsupported(
                        "exact sampling in the generic regime needs eigen-component scales".into(),
                    ));
                };
                let o = model.index().eigenvectors();
                let lambda = model.index().eigenvalues();
                let sigma = model.sigma();
                let mut parts = Vec::with_capacity(scales.len());
                for (j, c) in scales.iter().enumerate() {
                    let alpha = 1.0 / lambda[j].re;
                    check_index(alpha)?;
                    let weight: f64 = (0..sigma.len()).map(|i| o[(i, j)].re * sigma[i]).sum();
                    // sigma . (O Y) = sum_j (O^T sigma)_j Y_j, Y_j(tau) = (tau c_j)^{1/alpha_j} Z
                    parts.push((alpha, weight * (tau * c).powf(1.0 / alpha)));
                }
                Ok(Sampler::Components(parts))
            }
            Regime::ScalingRotation => Err(Error::Unsupported(
                "exact terminal sampling is not available for the rotation regime".into(),
            )),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Radial { rho, scale } => scale * standard_stable(*rho, rng),
            Sampler::Components(parts) => parts
                .iter()
                .map(|(alpha, w)| w * standard_stable(*alpha, rng))
                .sum(),
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("horizon must be positive, got {tau}")));
    }
    Ok(())
}

/// Terminal values of `sigma . L_tau`, plus `alpha tau` under the physical
/// measure.
pub fn simulate_log_price(model: &MarketModel, tau: f64, cfg: &SimConfig) -> Result<Vec<f64>> {
    check_tau(tau)?;
    cfg.validate()?;
    let sampler = Sampler::new(model, tau)?;
    let shift = match cfg.measure {
        Measure::Physical => model.alpha() * tau,
        Measure::Compensated => 0.0,
    };
    Ok(per_block(cfg, |rng, len| {
        (0..len).map(|_| shift + sampler.draw(rng)).collect::<Vec<_>>()
    })
    .concat())
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    sum: f64,
    sumsq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        self.sum += x;
        self.sumsq += x * x;
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.sum += o.sum;
        self.sumsq += o.sumsq;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n
    }

    fn stderr(&self) -> f64 {
        let m = self.mean();
        let var = (self.sumsq / self.n - m * m).max(0.0) * self.n / (self.n - 1.0).max(1.0);
        (var / self.n).sqrt()
    }
}

/// Standard error from the spread of block means. Agrees with the naive
/// standard error when the payoff variance is finite.
fn batch_stderr(blocks: &[Moments]) -> f64 {
    let full: Vec<&Moments> = blocks.iter().filter(|b| b.n > 0.0).collect();
    if full.len() < 2 {
        return f64::NAN;
    }
    let k = full.len() as f64;
    let means: Vec<f64> = full.iter().map(|b| b.mean()).collect();
    let avg = means.iter().sum::<f64>() / k;
    let var = means.iter().map(|m| (m - avg).powi(2)).sum::<f64>() / (k - 1.0);
    (var / k).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McPrice {
    pub price: f64,
    pub stderr: f64,
    /// Standard error from block means.
    pub batch_stderr: f64,
    /// Standard error from the first half of the blocks, for the doubling test.
    pub half_stderr: f64,
    /// True when the batch and naive errors agree within a factor of two and
    /// halving the sample grows the error by roughly `sqrt 2`.
    pub variance_stable: bool,
    pub n_paths: usize,
    pub seed: u64,
    pub measure: Measure,
    /// The put was simulated and the call obtained by parity.
    pub via_parity: bool,
}

/// Discounted expected payoff with `S_T = S exp((r + c) tau + sigma . L_tau)`,
/// `c = phi(-i sigma)` in its real-part continuation.
///
/// For a radial exponent below 2 the call payoff has infinite mean, so the
/// bounded put is simulated and the call follows from
/// `C = P + S - K e^{-r tau}`.
pub fn mc_price(
    model: &MarketModel,
    opt: &OptionContract,
    spot: f64,
    t: f64,
    cfg: &SimConfig,
) -> Result<McPrice> {
    cfg.validate()?;
    if cfg.measure != Measure::Compensated {
        return Err(Error::Domain("risk-neutral pricing needs the compensated measure".into()));
    }
    if model.mode() == ContinuationMode::GammaRatio {
        return Err(Error::Unsupported(
            "the gamma-ratio fluctuation law has no exact sampler".into(),
        ));
    }
    if !(spot > 0.0) {
        return Err(Error::Domain(format!("spot must be positive, got {spot}")));
    }
    if !(t >= 0.0 && t < opt.maturity) {
        return Err(Error::Domain("need 0 <= t < T".into()));
    }
    let tau = opt.maturity - t;
    let real = model.clone().with_mode(ContinuationMode::RealPart)?;
    let c = phi_imag(&real, 1.0)?.re;
    let sampler = Sampler::new(model, tau)?;
    let heavy = match &sampler {
        Sampler::Radial { rho, .. } => *rho < 2.0,
        Sampler::Components(parts) => parts.iter().any(|(a, _)| *a < 2.0),
    };
    let r = model.rate();
    let disc = (-r * tau).exp();
    let forward = spot * ((r + c) * tau).exp();
    let k = opt.strike;
    let simulate_put = heavy || opt.style == OptionStyle::Put;
    let blocks = per_block(cfg, |rng, len| {
        let mut m = Moments::default();
        for _ in 0..len {
            let st = forward * sampler.draw(rng).exp();
            let pay = if simulate_put { (k - st).max(0.0) } else { (st - k).max(0.0) };
            m.push(disc * pay);
        }
        m
    });
    let mut total = Moments::default();
    let half = blocks.len().div_ceil(2);
    let mut first = Moments::default();
    for (i, b) in blocks.iter().enumerate() {
        total.merge(b);
        if i < half {
            first.merge(b);
        }
    }
    let mut price = total.mean();
    let via_parity = simulate_put && opt.style == OptionStyle::Call;
    if via_parity {
        price += spot - k * disc;
    }
    let stderr = total.stderr();
    let batch = batch_stderr(&blocks);
    let half_stderr = first.stderr();
    let ratio = half_stderr / stderr;
    let variance_stable = stderr == 0.0
        || ((batch / stderr).is_nan() || (0.5..=2.0).contains(&(batch / stderr)))
            && (ratio.is_nan() || (1.0..=2.0).contains(&ratio));
    Ok(McPrice {
        price,
        stderr,
        batch_stderr: batch,
        half_stderr,
        variance_stable,
        n_paths: cfg.n_paths,
        seed: cfg.master_seed,
        measure: cfg.measure,
        via_parity,
    })
}

/// `(1/n) sum exp(i k x)`.
pub fn empirical_cf(samples: &[f64], k: f64) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for x in samples {
        let (s, c) = (k * x).sin_cos();
        re += c;
        im += s;
    }
    Complex64::new(re, im) / samples.len() as f64
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic critical value of [`ks_two_sample`] at level `alpha`.
pub fn ks_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: Complex64,
    /// Standard errors of the real and imaginary parts.
    pub stderr: Complex64,
    pub n: usize,
}

/// Signed power `x^beta` on the principal branch, `|x|^beta e^{i pi beta}`
/// for negative `x`.
fn signed_power(x: f64, beta: f64) -> Complex64 {
    let m = x.abs().powf(beta);
    if x >= 0.0 {
        Complex64::new(m, 0.0)
    } else {
        Complex64::from_polar(m, PI * beta)
    }
}

/// Sample mean of `x^beta` over given samples.
pub fn signed_power_moment(samples: &[f64], beta: f64) -> MomentEstimate {
    let (mut re, mut im) = (Moments::default(), Moments::default());
    for &x in samples {
        let v = signed_power(x, beta);
        re.push(v.re);
        im.push(v.im);
    }
    MomentEstimate {
        mean: Complex64::new(re.mean(), im.mean()),
        stderr: Complex64::new(re.stderr(), im.stderr()),
        n: samples.len(),
    }
}

/// Streaming estimate of `E[(sigma . L_t)^beta]` over `cfg.n_paths` draws.
pub fn moment_estimate(
    model: &MarketModel,
    beta: f64,
    t: f64,
    cfg: &SimConfig,
) -> Result<MomentEstimate> {
    check_tau(t)?;
    cfg.validate()?;
    let sampler = Sampler::new(model, t)?;
    let blocks = per_block(cfg, |rng, len| {
        let (mut re, mut im) = (Moments::default(), Moments::default());
        for _ in 0..len {
            let v = signed_power(sampler.draw(rng), beta);
            re.push(v.re);
            im.push(v.im);
        }
        (re, im)
    });
    let (mut re, mut im) = (Moments::default(), Moments::default());
    for (a, b) in &blocks {
        re.merge(a);
        im.merge(b);
    }
    Ok(MomentEstimate {
        mean: Complex64::new(re.mean(), im.mean()),
        stderr: Complex64::new(re.stderr(), im.stderr()),
        n: cfg.n_paths,
    })
}

/// Normalized histogram over `[lo, hi)` with `bins` cells; also returns the
/// fraction of samples that fell inside.
pub fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> (Vec<f64>, f64) {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0.0; bins];
    let mut inside = 0usize;
    for &x in samples {
        if x >= lo && x < hi {
            let i = (((x - lo) / width) as usize).min(bins - 1);
            counts[i] += 1.0;
            inside += 1;
        }
    }
    let n = samples.len() as f64;
    for c in &mut counts {
        *c /= n * width;
    }
    (counts, inside as f64 / n)
}

/// Empirical quantile by sorting a copy.
pub fn quantile(samples: &[f64], p: f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let i = ((p * (s.len() - 1) as f64).round() as usize).min(s.len() - 1);
    s[i]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_case_has_variance_two() {
        let cfg = SimConfig::new(200_000, 7);
        let x = sample_stable(2.0, 1.0, cfg.n_paths, &cfg).unwrap();
        let n = x.len() as f64;
        let var = x.iter().map(|v| v * v).sum::<f64>() / n;
        // Var(x^2) = 3 * 4 - 4 = 8
        assert!((var - 2.0).abs() < 3.0 * (8.0 / n).sqrt());
    }

    #[test]
    fn cauchy_median_is_zero() {
        let cfg = SimConfig::new(100_000, 11);
        let x = sample_stable(1.0, 1.0, cfg.n_paths, &cfg).unwrap();
        let med = quantile(&x, 0.5);
        // sd of the median: 1 / (2 f(0) sqrt n) with f(0) = 1/pi
        assert!(med.abs() < 3.0 * PI / (2.0 * (x.len() as f64).sqrt()));
    }

    #[test]
    fn empirical_cf_in_clt_band() {
        let cfg = SimConfig::new(200_000, 3);
        let x = sample_stable(1.5, 0.7, cfg.n_paths, &cfg).unwrap();
        let c = 0.7f64.powf(1.5);
        let band = 3.0 / (x.len() as f64).sqrt();
        for k in [0.25f64, 0.5, 1.0, 2.0, 4.0] {
            let want = (-c * k.powf(1.5)).exp();
            assert!((empirical_cf(&x, k) - want).norm() < band, "k {k}");
        }
    }

    #[test]
    fn deterministic_across_schedules() {
        let m = MarketModel::one_dimensional(1.7, 0.02, 1.0, 0.01, ContinuationMode::RealPart)
            .unwrap();
        let opt = OptionContract::call(1.0, 0.25).unwrap();
        let cfg = SimConfig {
            block_size: 1000,
            ..SimConfig::new(20_000, 42)
        };
        let a = mc_price(&m, &opt, 1.0, 0.0, &cfg.with_execution(Execution::Parallel)).unwrap();
        let b = mc_price(&m, &opt, 1.0, 0.0, &cfg.with_execution(Execution::Sequential)).unwrap();
        assert_eq!(a.price.to_bits(), b.price.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn zero_strike_call_is_spot() {
        let m = MarketModel::one_dimensional(2.0, 0.02, 1.0, 0.03, ContinuationMode::RealPart)
            .unwrap();
        let opt = OptionContract {
            style: OptionStyle::Call,
            strike: 0.0,
            maturity: 1.0,
        };
        let est = mc_price(&m, &opt, 100.0, 0.0, &SimConfig::new(200_000, 5)).unwrap();
        assert!((est.price - 100.0).abs() < 3.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn physical_measure_rejected_for_pricing() {
        let m = MarketModel::one_dimensional(2.0, 0.02, 1.0, 0.03, ContinuationMode::RealPart)
            .unwrap();
        let opt = OptionContract::call(1.0, 1.0).unwrap();
        let cfg = SimConfig {
            measure: Measure::Physical,
            ..SimConfig::new(10, 1)
        };
        assert!(mc_price(&m, &opt, 1.0, 0.0, &cfg).is_err());
        assert!(sample_stable(2.5, 1.0, 10, &cfg).is_err());
    }

    #[test]
    fn ks_statistic_basics() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        assert_eq!(ks_two_sample(&a, &[10.0, 11.0]), 1.0);
        assert!((ks_critical(1000, 1000, 0.01) - 1.6276 * (2.0f64 / 1000.0).sqrt()).abs() < 1e-3);
    }
}
