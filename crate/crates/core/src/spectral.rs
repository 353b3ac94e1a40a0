//! Centered unitary DFT, intensities and the maximum scaled intensity.
//!
//! All transforms are taken after removing the sample mean, so the
//! zero-frequency coefficient is always exactly zero. The intensity vector
//! is the modulus of each DFT coefficient and the scaled intensity divides
//! it by the sample standard deviation, which gives the identity
//! `‖scaled_intensity‖² = n − 1` for every non-constant series.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Smallest series length accepted by [`TimeSeries`].
pub const MIN_LEN: usize = 3;

/// An evenly spaced series of observations at times `1..=n`.
///
/// Values are stored as complex numbers; series built with
/// [`TimeSeries::new`] are flagged as real, which enables the real-only
/// operations (autocovariances, the Chebyshev identity, plotting).
#[derive(Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<Complex64>,
    real: bool,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::validate(values.len(), values.iter().map(|v| v.is_finite()))?;
        Ok(Self {
            values: values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
            real: true,
        })
    }

    pub fn from_complex(values: Vec<Complex64>) -> Result<Self> {
        Self::validate(values.len(), values.iter().map(|v| v.is_finite()))?;
        Ok(Self {
            values,
            real: false,
        })
    }

    fn validate(len: usize, mut finite: impl Iterator<Item = bool>) -> Result<()> {
        if len < MIN_LEN {
            return Err(Error::TooShort { len });
        }
        match finite.position(|ok| !ok) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Real parts of the observations, or `None` for a complex series.
    pub fn real_values(&self) -> Option<Vec<f64>> {
        self.real.then(|| self.values.iter().map(|v| v.re).collect())
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.len() as f64
    }

    /// `Σ|y_t − ȳ|² / (n − 1)`.
    pub fn sample_variance(&self) -> f64 {
        let mean = self.mean();
        let ss: f64 = self.values.iter().map(|v| (v - mean).norm_sqr()).sum();
        ss / (self.len() - 1) as f64
    }

    /// The series reordered so that position `t` holds `y[order[t]]`.
    ///
    /// Panics if `order` is not a permutation of `0..n`.
    pub fn permuted(&self, order: &[usize]) -> TimeSeries {
        assert_eq!(order.len(), self.len(), "permutation length mismatch");
        let mut seen = vec![false; self.len()];
        let values = order
            .iter()
            .map(|&i| {
                assert!(!std::mem::replace(&mut seen[i], true), "index {i} repeated");
                self.values[i]
            })
            .collect();
        TimeSeries {
            values,
            real: self.real,
        }
    }
}

impl fmt::Debug for TimeSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.real_values() {
            Some(re) => f.debug_tuple("TimeSeries").field(&re).finish(),
            None => f.debug_tuple("TimeSeries").field(&self.values).finish(),
        }
    }
}

/// `y_t − ȳ` for every observation.
pub fn center(series: &TimeSeries) -> Vec<Complex64> {
    let mean = series.mean();
    series.values().iter().map(|v| v - mean).collect()
}

/// Unitary DFT of the centered series at an arbitrary frequency `delta`.
///
/// Periodic in `delta` with period 1; the phase `delta·(t−1)` is reduced
/// modulo 1 before evaluating the exponential.
pub fn dft_at(series: &TimeSeries, delta: f64) -> Complex64 {
    if delta.rem_euclid(1.0) == 0.0 {
        // centering makes the zero-frequency sum vanish
        return Complex64::new(0.0, 0.0);
    }
    let centered = center(series);
    let n = centered.len();
    let sum: Complex64 = centered
        .iter()
        .enumerate()
        .map(|(t, v)| {
            let phase = (delta * t as f64).rem_euclid(1.0);
            v * Complex64::from_polar(1.0, -2.0 * PI * phase)
        })
        .sum();
    sum / (n as f64).sqrt()
}

/// A reusable FFT plan for one series length.
///
/// Evaluating the DFT vector over the fundamental frequencies is the
/// hot loop of the permutation test, so the plan and its twiddle factors
/// are built once per length and shared across threads.
#[derive(Clone)]
pub struct SpectrumPlan {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl SpectrumPlan {
    pub fn new(n: usize) -> Self {
        let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
        Self { n, fft }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn scratch_len(&self) -> usize {
        self.fft.get_inplace_scratch_len()
    }

    /// Replaces a centered series in `buf` with its unitary DFT vector.
    ///
    /// The zero-frequency coefficient is set to exactly zero. With
    /// `real_input` the upper half is overwritten with the conjugate of the
    /// lower half, so `r[n−k] = conj(r[k])` holds bit for bit.
    pub fn transform(&self, buf: &mut [Complex64], scratch: &mut [Complex64], real_input: bool) {
        assert_eq!(buf.len(), self.n);
        self.fft.process_with_scratch(buf, scratch);
        let norm = 1.0 / (self.n as f64).sqrt();
        buf[0] = Complex64::new(0.0, 0.0);
        for v in buf.iter_mut().skip(1) {
            *v *= norm;
        }
        if real_input {
            let n = self.n;
            for k in 1..=n / 2 {
                buf[n - k] = buf[k].conj();
            }
            if n % 2 == 0 {
                buf[n / 2].im = 0.0;
            }
        }
    }

    /// Largest intensity over the non-zero fundamental frequencies of an
    /// already transformed buffer, with its index. Ties go to the smallest
    /// index.
    pub(crate) fn max_intensity(dft: &[Complex64]) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 1);
        for (k, v) in dft.iter().enumerate().skip(1) {
            let w = v.norm();
            if w > best.0 {
                best = (w, k);
            }
        }
        best
    }
}

impl fmt::Debug for SpectrumPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectrumPlan").field("n", &self.n).finish()
    }
}

/// DFT vector, intensities and maximum scaled intensity of one series.
///
/// Index `k` (zero-based) corresponds to frequency `k / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumAnalysis {
    pub dft: Vec<Complex64>,
    pub intensity: Vec<f64>,
    pub scaled_intensity: Vec<f64>,
    pub sample_variance: f64,
    pub msi: f64,
    /// Zero-based index of the maximum, always in `1..n`.
    pub argmax_index: usize,
    pub real_input: bool,
}

impl SpectrumAnalysis {
    pub fn len(&self) -> usize {
        self.dft.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dft.is_empty()
    }

    pub fn frequency(&self, index: usize) -> f64 {
        index as f64 / self.len() as f64
    }

    pub fn argmax_frequency(&self) -> f64 {
        self.frequency(self.argmax_index)
    }

    /// `w_k / σ` for an externally supplied population standard deviation.
    pub fn standardised_intensity(&self, sigma: f64) -> Result<Vec<f64>> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "population standard deviation must be positive, got {sigma}"
            )));
        }
        Ok(self.intensity.iter().map(|w| w / sigma).collect())
    }

    /// `(frequency, scaled intensity)` pairs for `0 < δ ≤ 1/2`.
    ///
    /// For real input these frequencies carry the whole spectrum.
    pub fn nyquist_bins(&self) -> Vec<(f64, f64)> {
        let n = self.len();
        (1..=n / 2)
            .map(|k| (self.frequency(k), self.scaled_intensity[k]))
            .collect()
    }
}

pub fn analyze_spectrum(series: &TimeSeries) -> Result<SpectrumAnalysis> {
    analyze_spectrum_with(&SpectrumPlan::new(series.len()), series)
}

/// As [`analyze_spectrum`], reusing a plan built for `series.len()`.
pub fn analyze_spectrum_with(plan: &SpectrumPlan, series: &TimeSeries) -> Result<SpectrumAnalysis> {
    if plan.len() != series.len() {
        return Err(Error::InvalidArgument(format!(
            "plan built for length {} used with series of length {}",
            plan.len(),
            series.len()
        )));
    }
    let sample_variance = series.sample_variance();
    if !(sample_variance > 0.0) {
        return Err(Error::DegenerateSeries);
    }
    let s = sample_variance.sqrt();

    let mut dft = center(series);
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.scratch_len()];
    plan.transform(&mut dft, &mut scratch, series.is_real());

    let intensity: Vec<f64> = dft.iter().map(|r| r.norm()).collect();
    let scaled_intensity: Vec<f64> = intensity.iter().map(|w| w / s).collect();
    let (max_w, argmax_index) = SpectrumPlan::max_intensity(&dft);

    Ok(SpectrumAnalysis {
        dft,
        intensity,
        scaled_intensity,
        sample_variance,
        msi: max_w / s,
        argmax_index,
        real_input: series.is_real(),
    })
}

/// `MSI² / (n − 1)`, the share of the total squared intensity held by the
/// largest spike.
pub fn fisher_statistic(analysis: &SpectrumAnalysis) -> f64 {
    analysis.msi * analysis.msi / (analysis.len() - 1) as f64
}

fn real_centered(series: &TimeSeries) -> Result<Vec<f64>> {
    if !series.is_real() {
        return Err(Error::ComplexUnsupported);
    }
    Ok(center(series).into_iter().map(|v| v.re).collect())
}

fn lagged_sum(centered: &[f64], lag: usize) -> f64 {
    centered
        .iter()
        .zip(&centered[lag..])
        .map(|(a, b)| a * b)
        .sum()
}

/// Sample autocovariance with denominator `n − lag − 1`, defined for
/// `0 ≤ lag ≤ n − 2`. Lag 0 is the sample variance.
pub fn autocovariance(series: &TimeSeries, lag: usize) -> Result<f64> {
    let max = series.len() - 2;
    if lag > max {
        return Err(Error::LagOutOfRange { lag, max });
    }
    let centered = real_centered(series)?;
    Ok(lagged_sum(&centered, lag) / (series.len() - lag - 1) as f64)
}

/// Sample autocovariances and autocorrelations for lags `0..=n−2`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrelationProfile {
    pub autocovariances: Vec<f64>,
    pub autocorrelations: Vec<f64>,
}

impl AutocorrelationProfile {
    pub fn new(series: &TimeSeries) -> Result<Self> {
        let centered = real_centered(series)?;
        let n = centered.len();
        let autocovariances: Vec<f64> = (0..=n - 2)
            .map(|lag| lagged_sum(&centered, lag) / (n - lag - 1) as f64)
            .collect();
        let gamma0 = autocovariances[0];
        if !(gamma0 > 0.0) {
            return Err(Error::DegenerateSeries);
        }
        let autocorrelations = autocovariances.iter().map(|g| g / gamma0).collect();
        Ok(Self {
            autocovariances,
            autocorrelations,
        })
    }
}

/// Chebyshev polynomial of the first kind, `T_ℓ(φ) = cos(ℓ·arccos φ)`,
/// by the three-term recurrence.
pub fn chebyshev_t(ell: usize, phi: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&phi) {
        return Err(Error::Domain(phi));
    }
    Ok(ChebyshevIter::new(phi).nth(ell).expect("infinite iterator"))
}

/// Yields `T_0(φ), T_1(φ), T_2(φ), …`.
struct ChebyshevIter {
    curr: f64,
    next: f64,
    phi: f64,
}

impl ChebyshevIter {
    fn new(phi: f64) -> Self {
        Self {
            curr: 1.0,
            next: phi,
            phi,
        }
    }
}

impl Iterator for ChebyshevIter {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.curr;
        let after = 2.0 * self.phi * self.next - self.curr;
        self.curr = self.next;
        self.next = after;
        Some(out)
    }
}

/// Squared scaled intensity at frequency `delta`, evaluated from the
/// sample autocorrelations as a polynomial in `φ = cos(2πδ)`:
///
/// ```text
/// ‖F(δ)‖²/s² = (n−1)/n + 2 Σ_{ℓ=1}^{n−2} ((n−ℓ−1)/n) ρ̂_ℓ T_ℓ(φ)
///                      + 2 (y_1−ȳ)(y_n−ȳ) / (n s²) · T_{n−1}(φ)
/// ```
///
/// The final term is the lag `n − 1` cross product, which has no
/// autocovariance of its own (its denominator would be zero).
pub fn spectral_identity(series: &TimeSeries, delta: f64) -> Result<f64> {
    let profile = AutocorrelationProfile::new(series)?;
    let centered = real_centered(series)?;
    let n = centered.len();
    let nf = n as f64;
    let s2 = profile.autocovariances[0];
    let phi = (2.0 * PI * delta).cos().clamp(-1.0, 1.0);

    let mut cheb = ChebyshevIter::new(phi).skip(1);
    let mut total = (nf - 1.0) / nf;
    for (lag, rho) in profile.autocorrelations.iter().enumerate().skip(1) {
        let t = cheb.next().expect("infinite iterator");
        total += 2.0 * ((nf - lag as f64 - 1.0) / nf) * rho * t;
    }
    let t_last = cheb.next().expect("infinite iterator");
    total += 2.0 * centered[0] * centered[n - 1] / (nf * s2) * t_last;
    Ok(total)
}

/// Dense row-major complex matrix, used for the DFT and centering matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn identity(n: usize) -> Self {
        let mut m = Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        };
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.n + col]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(self.get(c, r).conj());
            }
        }
        Self { n, data }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                let row = &other.data[k * n..(k + 1) * n];
                for (out, b) in data[r * n..(r + 1) * n].iter_mut().zip(row) {
                    *out += a * b;
                }
            }
        }
        Self { n, data }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n);
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest elementwise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `U[ℓ][k] = ω^{ℓk} / √n` with `ω = exp(−2iπ/n)` (zero-based indices).
pub fn unitary_dft_matrix(n: usize) -> ComplexMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    let mut data = Vec::with_capacity(n * n);
    for l in 0..n {
        for k in 0..n {
            // reduce the exponent first so large n keeps full precision
            let e = (l * k) % n;
            data.push(Complex64::from_polar(scale, -2.0 * PI * e as f64 / n as f64));
        }
    }
    ComplexMatrix { n, data }
}

/// `I − 11ᵀ/n`.
pub fn centering_matrix(n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(n);
    let off = Complex64::new(1.0 / n as f64, 0.0);
    for v in m.data.iter_mut() {
        *v -= off;
    }
    m
}
