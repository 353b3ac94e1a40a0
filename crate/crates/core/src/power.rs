//! Monte Carlo power of the test over a grid of noise distributions,
//! series lengths and signal-to-noise ratios.
//!
//! Each cell runs `K` replicates; every replicate draws fresh noise and a
//! fresh random-frequency sinusoid, runs a full permutation test and counts
//! a rejection when `p ≤ α`. Cell seeds are derived from the master seed
//! and the cell coordinates, so cells (and the replicates inside them) can
//! be evaluated in any order.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permutation::{simulate_null_with, wilson_interval, PermutationPlan};
use crate::seed::derive_seed;
use crate::signal::{generate_composite, NoiseDistribution, NoiseSpec};
use crate::spectral::{analyze_spectrum_with, SpectrumPlan};

/// Identifies the power-table file format.
pub const TABLE_SCHEMA: &str = "permspec.power-table";
pub const TABLE_SCHEMA_VERSION: u32 = 1;

/// Confidence level of the per-cell Wilson intervals.
pub const CELL_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub distributions: Vec<NoiseDistribution>,
    pub n_values: Vec<usize>,
    pub lambda_values: Vec<f64>,
    pub replicates: usize,
    pub permutations: usize,
    pub alpha: f64,
    pub master_seed: u64,
}

impl StudyConfig {
    /// Small grid that runs in minutes: K = 500, M = 200.
    pub fn desk_scale(master_seed: u64) -> Self {
        Self {
            distributions: NoiseDistribution::ALL.to_vec(),
            n_values: vec![30, 60],
            lambda_values: vec![0.0, 0.4, 0.8, 1.0],
            replicates: 500,
            permutations: 200,
            alpha: 0.05,
            master_seed,
        }
    }

    /// The full 4 × 6 grid per distribution with K = 10,000 and M = 1000.
    /// Expect hours of CPU time.
    pub fn full_scale(master_seed: u64) -> Self {
        Self {
            distributions: NoiseDistribution::ALL.to_vec(),
            n_values: vec![30, 60, 120, 240],
            lambda_values: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            replicates: 10_000,
            permutations: 1000,
            alpha: 0.05,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 || self.permutations == 0 {
            return Err(Error::InvalidArgument(
                "replicates and permutations must be at least 1".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if let Some(n) = self.n_values.iter().find(|n| **n < 3) {
            return Err(Error::TooShort { len: *n });
        }
        if let Some(l) = self.lambda_values.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "lambda values must be finite and non-negative, got {l}"
            )));
        }
        Ok(())
    }
}

/// Power estimate for one `(distribution, n, λ)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellResult {
    pub distribution: NoiseDistribution,
    pub n: usize,
    pub lambda: f64,
    #[serde(rename = "K")]
    pub replicates: usize,
    #[serde(rename = "M")]
    pub permutations: usize,
    pub alpha: f64,
    pub rejections: usize,
    pub power: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub cell_seed: u64,
}

impl CellResult {
    /// Binomial standard error of the power estimate.
    pub fn standard_error(&self) -> f64 {
        let k = self.replicates as f64;
        (self.power * (1.0 - self.power) / k).sqrt()
    }
}

pub fn cell_seed(master_seed: u64, distribution: NoiseDistribution, n: usize, lambda_index: usize) -> u64 {
    derive_seed(master_seed, &[distribution.id(), n as u64, lambda_index as u64])
}

/// p-value of one replicate. The replicate's series and permutation plan
/// come from two seeds derived from `(cell_seed, replicate)`.
fn replicate_p_value(
    spectrum: &SpectrumPlan,
    spec: &NoiseSpec,
    lambda: f64,
    permutations: usize,
    cell_seed: u64,
    replicate: usize,
) -> Result<f64> {
    let composite = generate_composite(spec, lambda, derive_seed(cell_seed, &[replicate as u64, 0]))?;
    let plan = PermutationPlan::new(derive_seed(cell_seed, &[replicate as u64, 1]), permutations)?;
    let observed = analyze_spectrum_with(spectrum, &composite.series)?.msi;
    let null = simulate_null_with(spectrum, &composite.series, plan)?;
    Ok(crate::permutation::p_value(observed, &null))
}

pub fn run_cell(
    distribution: NoiseDistribution,
    n: usize,
    lambda: f64,
    replicates: usize,
    permutations: usize,
    alpha: f64,
    cell_seed: u64,
) -> Result<CellResult> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("replicates must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let spec = NoiseSpec::new(distribution, n)?;
    let spectrum = SpectrumPlan::new(n);
    let p_values = (0..replicates)
        .into_par_iter()
        .map(|r| replicate_p_value(&spectrum, &spec, lambda, permutations, cell_seed, r))
        .collect::<Result<Vec<f64>>>()?;
    let rejections = p_values.iter().filter(|p| **p <= alpha).count();
    let (wilson_low, wilson_high) =
        wilson_interval(rejections as u64, replicates as u64, CELL_CONFIDENCE)?;
    Ok(CellResult {
        distribution,
        n,
        lambda,
        replicates,
        permutations,
        alpha,
        rejections,
        power: rejections as f64 / replicates as f64,
        wilson_low,
        wilson_high,
        cell_seed,
    })
}

/// All cells of a study, in grid order (distribution, then n, then λ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTable {
    pub schema: String,
    pub schema_version: u32,
    pub cells: Vec<CellResult>,
}

impl Default for PowerTable {
    fn default() -> Self {
        Self::new(Vec::new())
    }
}

impl PowerTable {
    pub fn new(cells: Vec<CellResult>) -> Self {
        Self {
            schema: TABLE_SCHEMA.to_string(),
            schema_version: TABLE_SCHEMA_VERSION,
            cells,
        }
    }

    pub fn get(&self, distribution: NoiseDistribution, n: usize, lambda: f64) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.distribution == distribution && c.n == n && c.lambda == lambda)
    }

    fn check(&self) -> Result<()> {
        if self.schema != TABLE_SCHEMA {
            return Err(Error::Schema(format!("unexpected schema {:?}", self.schema)));
        }
        if self.schema_version != TABLE_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        for (i, c) in self.cells.iter().enumerate() {
            if c.replicates == 0 || c.rejections > c.replicates {
                return Err(Error::Schema(format!("cell {i}: rejections/K out of range")));
            }
            if c.power != c.rejections as f64 / c.replicates as f64 {
                return Err(Error::Schema(format!("cell {i}: power != rejections / K")));
            }
            let in_unit = |v: f64| (0.0..=1.0).contains(&v);
            if !(in_unit(c.wilson_low) && in_unit(c.wilson_high) && c.wilson_low <= c.wilson_high) {
                return Err(Error::Schema(format!("cell {i}: invalid Wilson interval")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: PowerTable =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        table.check()?;
        Ok(table)
    }
}

pub fn run_grid(config: &StudyConfig) -> Result<PowerTable> {
    config.validate()?;
    let mut coords = Vec::new();
    for &d in &config.distributions {
        for &n in &config.n_values {
            for (li, &lambda) in config.lambda_values.iter().enumerate() {
                coords.push((d, n, li, lambda));
            }
        }
    }
    let cells = coords
        .into_iter()
        .map(|(d, n, li, lambda)| {
            run_cell(
                d,
                n,
                lambda,
                config.replicates,
                config.permutations,
                config.alpha,
                cell_seed(config.master_seed, d, n, li),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerTable::new(cells))
}

pub fn persist_table(table: &PowerTable, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(table.to_json().as_bytes())?;
    Ok(())
}

pub fn load_table(path: &Path) -> Result<PowerTable> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    PowerTable::from_json(&text)
}
