//! Permutation null distribution of the maximum scaled intensity.
//!
//! Simulation `m` of a plan draws its permutation from substream `m` of the
//! plan's master seed, so the simulated null is the same whether the
//! simulations run sequentially or across any number of threads.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::seed;
use crate::spectral::{analyze_spectrum_with, center, SpectrumAnalysis, SpectrumPlan, TimeSeries};

pub const DEFAULT_PERMUTATIONS: usize = 1000;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationPlan {
    master_seed: u64,
    permutations: usize,
}

impl PermutationPlan {
    pub fn new(master_seed: u64, permutations: usize) -> Result<Self> {
        if permutations == 0 {
            return Err(Error::InvalidArgument(
                "number of permutations must be at least 1".into(),
            ));
        }
        Ok(Self {
            master_seed,
            permutations,
        })
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn permutations(&self) -> usize {
        self.permutations
    }

    /// Generator for simulation `index`.
    pub fn rng_for(&self, index: usize) -> ChaCha8Rng {
        seed::substream(self.master_seed, index as u64)
    }
}

/// A uniformly random ordering of `0..n` (Fisher–Yates).
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

/// Simulated maximum scaled intensities of `M` permuted copies of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    msi_values: Vec<f64>,
    sorted: Vec<f64>,
    plan: PermutationPlan,
}

impl NullDistribution {
    pub fn new(msi_values: Vec<f64>, plan: PermutationPlan) -> Result<Self> {
        if msi_values.len() != plan.permutations() {
            return Err(Error::InvalidArgument(format!(
                "expected {} simulated values, got {}",
                plan.permutations(),
                msi_values.len()
            )));
        }
        if let Some(bad) = msi_values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "simulated MSI values must be finite and non-negative, got {bad}"
            )));
        }
        let mut sorted = msi_values.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            msi_values,
            sorted,
            plan,
        })
    }

    /// Values in simulation order.
    pub fn values(&self) -> &[f64] {
        &self.msi_values
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn plan(&self) -> PermutationPlan {
        self.plan
    }

    pub fn len(&self) -> usize {
        self.msi_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.msi_values.is_empty()
    }

    /// Number of simulated values `≥ observed`.
    pub fn exceedances(&self, observed: f64) -> usize {
        self.len() - self.sorted.partition_point(|v| *v < observed)
    }

    /// Fraction of simulated values `≤ s`.
    pub fn empirical_cdf(&self, s: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= s) as f64 / self.len() as f64
    }
}

pub fn empirical_cdf(null: &NullDistribution, s: f64) -> f64 {
    null.empirical_cdf(s)
}

/// Fraction of simulated values at least as large as the observed MSI.
/// Ties count as extreme.
pub fn p_value(observed_msi: f64, null: &NullDistribution) -> f64 {
    null.exceedances(observed_msi) as f64 / null.len() as f64
}

pub fn simulate_null(series: &TimeSeries, plan: PermutationPlan) -> Result<NullDistribution> {
    simulate_null_with(&SpectrumPlan::new(series.len()), series, plan)
}

/// As [`simulate_null`], reusing a spectrum plan for `series.len()`.
pub fn simulate_null_with(
    spectrum: &SpectrumPlan,
    series: &TimeSeries,
    plan: PermutationPlan,
) -> Result<NullDistribution> {
    let n = series.len();
    if spectrum.len() != n {
        return Err(Error::InvalidArgument(format!(
            "plan built for length {} used with series of length {n}",
            spectrum.len()
        )));
    }
    let variance = series.sample_variance();
    if !(variance > 0.0) {
        return Err(Error::DegenerateSeries);
    }
    // centering and the sample variance are invariant under permutation
    let s = variance.sqrt();
    let centered = center(series);
    let zero = Complex64::new(0.0, 0.0);
    let real_input = series.is_real();

    let msi_values: Vec<f64> = (0..plan.permutations())
        .into_par_iter()
        .map_init(
            || {
                (
                    vec![zero; n],
                    vec![zero; spectrum.scratch_len()],
                    Vec::with_capacity(n),
                )
            },
            |(buf, scratch, order), m| {
                let mut rng = plan.rng_for(m);
                order.clear();
                order.extend(0..n);
                order.shuffle(&mut rng);
                for (slot, &i) in buf.iter_mut().zip(order.iter()) {
                    *slot = centered[i];
                }
                spectrum.transform(buf, scratch, real_input);
                SpectrumPlan::max_intensity(buf).0 / s
            },
        )
        .collect();

    NullDistribution::new(msi_values, plan)
}

/// Wilson score interval for a binomial proportion, clamped to `[0, 1]`.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= successes <= trials and trials > 0, got {successes}/{trials}"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    Ok((low, high))
}

/// Outcome of one permutation-spectrum test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub n: usize,
    pub observed_msi: f64,
    pub argmax_frequency: f64,
    pub p_value: f64,
    /// Simulated values at least as large as the observed MSI.
    pub exceedances: u64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub confidence: f64,
    pub permutations: usize,
    pub master_seed: u64,
}

/// A test result together with the spectrum and null it was computed from.
#[derive(Debug, Clone)]
pub struct TestOutcome {
    pub result: TestResult,
    pub spectrum: SpectrumAnalysis,
    pub null: NullDistribution,
}

pub fn run_test(series: &TimeSeries, plan: PermutationPlan, confidence: f64) -> Result<TestResult> {
    run_test_detailed(series, plan, confidence).map(|o| o.result)
}

pub fn run_test_detailed(
    series: &TimeSeries,
    plan: PermutationPlan,
    confidence: f64,
) -> Result<TestOutcome> {
    let spectrum_plan = SpectrumPlan::new(series.len());
    let spectrum = analyze_spectrum_with(&spectrum_plan, series)?;
    let null = simulate_null_with(&spectrum_plan, series, plan)?;
    let exceedances = null.exceedances(spectrum.msi) as u64;
    let (wilson_low, wilson_high) =
        wilson_interval(exceedances, plan.permutations() as u64, confidence)?;
    let result = TestResult {
        n: series.len(),
        observed_msi: spectrum.msi,
        argmax_frequency: spectrum.argmax_frequency(),
        p_value: p_value(spectrum.msi, &null),
        exceedances,
        wilson_low,
        wilson_high,
        confidence,
        permutations: plan.permutations(),
        master_seed: plan.master_seed(),
    };
    Ok(TestOutcome {
        result,
        spectrum,
        null,
    })
}
