//! Binary antipodal transmission over AWGN(σ²) and BSC(p).
//!
//! Bit 0 is sent as +1 and bit 1 as -1. A received value `y` is turned into
//! the posterior pair `(p, q) = (P(1|y), P(0|y))`, the likelihood
//! `g = ln(q/p) = 2y/σ²` and the spread `h = q - p = tanh(g/2)`. The three
//! forms carry the same information and the decoder moves between them.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rm_code::Codeword;
use crate::{Error, Result};

/// Likelihood magnitude clamp. `tanh(G_MAX / 2)` is within `1e-17` of 1.
pub const G_MAX: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    Awgn { sigma2: f64 },
    Bsc { p: f64 },
}

impl ChannelModel {
    pub fn awgn(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidNoise(sigma2));
        }
        Ok(Self::Awgn { sigma2 })
    }

    pub fn bsc(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 0.5) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(Self::Bsc { p })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricForm {
    ReceivedY,
    LikelihoodG,
    SpreadH,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricVector {
    pub form: MetricForm,
    pub values: Vec<f64>,
}

impl MetricVector {
    pub fn new(form: MetricForm, values: Vec<f64>) -> Self {
        Self { form, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Likelihood form of this vector. Received values need the channel to be
    /// interpreted; on a BSC they are first reduced to hard decisions.
    pub fn to_likelihoods(&self, channel: &ChannelModel) -> Result<Vec<f64>> {
        Ok(match (self.form, channel) {
            (MetricForm::LikelihoodG, _) => self.values.iter().map(|&g| clamp_g(g)).collect(),
            (MetricForm::SpreadH, _) => self
                .values
                .iter()
                .map(|&h| spread_to_likelihood(h))
                .collect(),
            (MetricForm::ReceivedY, ChannelModel::Awgn { sigma2 }) => self
                .values
                .iter()
                .map(|&y| likelihood(y, *sigma2))
                .collect(),
            (MetricForm::ReceivedY, ChannelModel::Bsc { p }) => {
                let mag = bsc_llr(*p, false)?;
                self.values
                    .iter()
                    .map(|&y| if hard_decision(y) == 0 { mag } else { -mag })
                    .collect()
            }
        })
    }
}

/// Master seed; trial `t` draws from ChaCha8 stream `t` under that seed, so
/// samples do not depend on which worker runs which trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(trial);
        rng
    }
}

pub fn transmit_bpsk(word: &Codeword) -> MetricVector {
    MetricVector::new(
        MetricForm::ReceivedY,
        word.bits()
            .iter()
            .map(|&b| if b == 0 { 1.0 } else { -1.0 })
            .collect(),
    )
}

/// Adds `N(0, sigma^2)` noise in place.
pub fn add_awgn<R: Rng + ?Sized>(values: &mut [f64], sigma: f64, rng: &mut R) {
    for y in values {
        let z: f64 = rng.sample(StandardNormal);
        *y += sigma * z;
    }
}

pub fn awgn_sample(
    x: &MetricVector,
    sigma2: f64,
    seed: &SeedSpec,
    trial: u64,
) -> Result<MetricVector> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidNoise(sigma2));
    }
    let mut values = x.values.clone();
    add_awgn(&mut values, sigma2.sqrt(), &mut seed.trial_rng(trial));
    Ok(MetricVector::new(MetricForm::ReceivedY, values))
}

/// Flips each bit independently with probability `p`; returns the flip count.
pub fn flip_bsc<R: Rng + ?Sized>(bits: &mut [u8], p: f64, rng: &mut R) -> usize {
    let mut flips = 0;
    for b in bits {
        if rng.random::<f64>() < p {
            *b ^= 1;
            flips += 1;
        }
    }
    flips
}

pub fn bsc_sample(word: &Codeword, p: f64, seed: &SeedSpec, trial: u64) -> Result<Codeword> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let mut bits = word.0.clone();
    flip_bsc(&mut bits, p, &mut seed.trial_rng(trial));
    Ok(Codeword(bits))
}

#[inline]
pub fn clamp_g(g: f64) -> f64 {
    g.clamp(-G_MAX, G_MAX)
}

/// Posterior probabilities `(p, q) = (P(1|y), P(0|y))`.
pub fn posterior(y: f64, sigma2: f64) -> (f64, f64) {
    let g = likelihood(y, sigma2);
    let p = 1.0 / (1.0 + g.exp());
    let q = 1.0 / (1.0 + (-g).exp());
    (p, q)
}

/// `g = 2y/σ²`, clamped to `±G_MAX`.
#[inline]
pub fn likelihood(y: f64, sigma2: f64) -> f64 {
    clamp_g(2.0 * y / sigma2)
}

/// `h = q - p = tanh(g/2)`.
#[inline]
pub fn spread(g: f64) -> f64 {
    (0.5 * g).tanh()
}

/// Inverse of [`spread`], clamped so that `h = ±1` maps to `±G_MAX`.
#[inline]
pub fn spread_to_likelihood(h: f64) -> f64 {
    clamp_g(2.0 * h.atanh())
}

#[inline]
pub fn hard_decision(y: f64) -> u8 {
    if y >= 0.0 {
        0
    } else {
        1
    }
}

/// `ln((1-p)/p)`. With `allow_degenerate`, `p = 0` maps to `G_MAX` and
/// `p = 1/2` to 0; otherwise `p` must lie strictly inside `(0, 1/2)`.
pub fn bsc_llr(p: f64, allow_degenerate: bool) -> Result<f64> {
    if p > 0.0 && p < 0.5 {
        return Ok(clamp_g(((1.0 - p) / p).ln()));
    }
    if allow_degenerate {
        if p == 0.0 {
            return Ok(G_MAX);
        }
        if p == 0.5 {
            return Ok(0.0);
        }
    }
    Err(Error::InvalidProbability(p))
}

pub fn bsc_metrics(word: &Codeword, p: f64) -> Result<MetricVector> {
    bsc_metrics_with(word, p, false)
}

pub fn bsc_metrics_with(word: &Codeword, p: f64, allow_degenerate: bool) -> Result<MetricVector> {
    let mag = bsc_llr(p, allow_degenerate)?;
    Ok(MetricVector::new(
        MetricForm::LikelihoodG,
        word.bits()
            .iter()
            .map(|&b| if b == 0 { mag } else { -mag })
            .collect(),
    ))
}

/// Monte-Carlo estimate of `(E[h], E[h^2])` for `+1` sent over AWGN(σ²).
pub fn moment_estimate(sigma2: f64, trials: u64, seed: &SeedSpec) -> Result<(f64, f64)> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidNoise(sigma2));
    }
    if trials == 0 {
        return Err(Error::Config(
            "moment estimate needs at least one trial".into(),
        ));
    }
    let sigma = sigma2.sqrt();
    let mut rng = seed.trial_rng(0);
    let (mut s1, mut s2) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let z: f64 = rng.sample(StandardNormal);
        let h = spread(likelihood(1.0 + sigma * z, sigma2));
        s1 += h;
        s2 += h * h;
    }
    Ok((s1 / trials as f64, s2 / trials as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrConvention {
    EbN0,
    EsN0,
}

impl SnrConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::EbN0 => "eb_n0",
            Self::EsN0 => "es_n0",
        }
    }
}

impl std::str::FromStr for SnrConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "eb_n0" | "ebn0" => Ok(Self::EbN0),
            "es_n0" | "esn0" => Ok(Self::EsN0),
            other => Err(Error::Parse(format!("unknown SNR convention {other:?}"))),
        }
    }
}

/// Noise power for unit-energy ±1 signalling at the given SNR.
pub fn snr_to_sigma2(snr_db: f64, rate: f64, convention: SnrConvention) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidRate(rate));
    }
    let lin = 10f64.powf(snr_db / 10.0);
    Ok(match convention {
        SnrConvention::EbN0 => 1.0 / (2.0 * rate * lin),
        SnrConvention::EsN0 => 1.0 / (2.0 * lin),
    })
}
