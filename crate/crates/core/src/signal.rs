//! Synthetic noise, sinusoids and signal-plus-noise series.
//!
//! A composite series is `y = λ·s + ε`, where the sinusoid `s` has been
//! rescaled so that `Σ|s_t| = Σ|ε_t|`. With that normalization `λ` is the
//! signal-to-noise ratio and `λ = 0` is the null hypothesis.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::spectral::{TimeSeries, MIN_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NoiseDistribution {
    #[serde(rename = "normal")]
    StandardNormal,
    /// Student's t with two degrees of freedom.
    #[serde(rename = "t2")]
    StudentT2,
}

impl NoiseDistribution {
    pub const ALL: [NoiseDistribution; 2] = [Self::StandardNormal, Self::StudentT2];

    pub fn name(self) -> &'static str {
        match self {
            Self::StandardNormal => "normal",
            Self::StudentT2 => "t2",
        }
    }

    /// Stable numeric id used in seed derivation.
    pub fn id(self) -> u64 {
        match self {
            Self::StandardNormal => 0,
            Self::StudentT2 => 1,
        }
    }
}

impl fmt::Display for NoiseDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for NoiseDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Self::StandardNormal),
            "t2" => Ok(Self::StudentT2),
            other => Err(Error::InvalidArgument(format!(
                "unknown noise distribution {other:?} (expected \"normal\" or \"t2\")"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSpec {
    pub distribution: NoiseDistribution,
    pub n: usize,
}

impl NoiseSpec {
    pub fn new(distribution: NoiseDistribution, n: usize) -> Result<Self> {
        if n < MIN_LEN {
            return Err(Error::TooShort { len: n });
        }
        Ok(Self { distribution, n })
    }
}

/// `n` IID draws from the noise distribution.
pub fn gen_noise<R: Rng + ?Sized>(spec: &NoiseSpec, rng: &mut R) -> Vec<f64> {
    match spec.distribution {
        NoiseDistribution::StandardNormal => (0..spec.n).map(|_| rng.sample(StandardNormal)).collect(),
        NoiseDistribution::StudentT2 => {
            let t = StudentT::new(2.0).expect("two degrees of freedom is valid");
            (0..spec.n).map(|_| t.sample(rng)).collect()
        }
    }
}

/// A zero-phase cosine `amplitude·cos(2π·frequency·(t−1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub frequency: f64,
    pub amplitude: f64,
}

impl SignalSpec {
    pub fn new(frequency: f64, amplitude: f64) -> Result<Self> {
        check_frequency(frequency)?;
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "amplitude must be positive, got {amplitude}"
            )));
        }
        Ok(Self {
            frequency,
            amplitude,
        })
    }

    /// Unit-amplitude signal with frequency uniform on the open interval
    /// `(0, 1/2)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let frequency = loop {
            let f: f64 = rng.random_range(0.0..0.5);
            if f > 0.0 {
                break f;
            }
        };
        Self {
            frequency,
            amplitude: 1.0,
        }
    }

    pub fn samples(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|t| self.amplitude * (2.0 * PI * self.frequency * t as f64).cos())
            .collect()
    }
}

fn check_frequency(frequency: f64) -> Result<()> {
    if frequency > 0.0 && frequency < 0.5 {
        Ok(())
    } else {
        Err(Error::FrequencyOutOfRange(frequency))
    }
}

pub fn gen_sinusoid(n: usize, frequency: f64, amplitude: f64) -> Result<Vec<f64>> {
    check_frequency(frequency)?;
    Ok((0..n)
        .map(|t| amplitude * (2.0 * PI * frequency * t as f64).cos())
        .collect())
}

/// Scale `c` with `Σ|c·signal_t| = Σ|noise_t|`.
pub fn normalize_magnitude(signal: &[f64], noise: &[f64]) -> Result<f64> {
    let signal_mag: f64 = signal.iter().map(|v| v.abs()).sum();
    if signal_mag == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let noise_mag: f64 = noise.iter().map(|v| v.abs()).sum();
    Ok(noise_mag / signal_mag)
}

/// `λ·signal + noise`, elementwise.
pub fn compose(lambda: f64, signal: &[f64], noise: &[f64]) -> Result<TimeSeries> {
    if signal.len() != noise.len() {
        return Err(Error::LengthMismatch {
            signal: signal.len(),
            noise: noise.len(),
        });
    }
    TimeSeries::new(
        signal
            .iter()
            .zip(noise)
            .map(|(s, e)| lambda * s + e)
            .collect(),
    )
}

/// A generated series with the ingredients that produced it.
#[derive(Debug, Clone)]
pub struct CompositeSeries {
    pub series: TimeSeries,
    pub lambda: f64,
    /// The magnitude-normalized sinusoid; `amplitude` is the normalizing scale.
    pub signal: SignalSpec,
    pub noise: Vec<f64>,
    pub noise_seed: u64,
}

/// Fresh noise and a fresh random-frequency sinusoid from `noise_seed`,
/// combined at signal-to-noise ratio `lambda`.
pub fn generate_composite(spec: &NoiseSpec, lambda: f64, noise_seed: u64) -> Result<CompositeSeries> {
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be finite, got {lambda}")));
    }
    let mut rng = seed::substream(noise_seed, 0);
    let noise = gen_noise(spec, &mut rng);
    let unit = SignalSpec::random(&mut rng);
    let raw = unit.samples(spec.n);
    let scale = normalize_magnitude(&raw, &noise)?;
    let signal = SignalSpec {
        frequency: unit.frequency,
        amplitude: scale,
    };
    let scaled: Vec<f64> = raw.iter().map(|v| v * scale).collect();
    let series = compose(lambda, &scaled, &noise)?;
    Ok(CompositeSeries {
        series,
        lambda,
        signal,
        noise,
        noise_seed,
    })
}
