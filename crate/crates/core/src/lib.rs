//! Detect periodic signals in a time series with the permutation-spectrum
//! test.
//!
//! The test statistic is the maximum scaled intensity (MSI): the largest
//! modulus of the centered unitary DFT over the non-zero fundamental
//! frequencies, divided by the sample standard deviation. Its null
//! distribution is simulated by recomputing the MSI on random permutations
//! of the series, which only assumes the noise is exchangeable. A fat-tailed
//! noise vector therefore gets a null distribution with fat tails of its own.
//!
//! ```
//! use permspec::{run_test, PermutationPlan, TimeSeries};
//!
//! let n = 60;
//! let y: Vec<f64> = (0..n)
//!     .map(|t| (2.0 * std::f64::consts::PI * 0.2 * t as f64).cos() + 0.3 * ((t * 7) % 5) as f64)
//!     .collect();
//! let series = TimeSeries::new(y)?;
//! let result = run_test(&series, PermutationPlan::new(42, 1000)?, 0.95)?;
//! assert!(result.p_value < 0.01);
//! assert!((result.argmax_frequency - 0.2).abs() < 1e-12);
//! # Ok::<(), permspec::Error>(())
//! ```
//!
//! The guide in `book/` walks through the mathematics chapter by chapter;
//! its code listings are compiled and run as doctests of this crate.

mod error;
pub mod permutation;
pub mod plot;
pub mod power;
pub mod report;
pub mod seed;
pub mod signal;
pub mod spectral;

pub use error::{Error, Result};
pub use permutation::{
    empirical_cdf, p_value, random_permutation, run_test, run_test_detailed, simulate_null,
    wilson_interval, NullDistribution, PermutationPlan, TestOutcome, TestResult,
};
pub use plot::{plot_model, render_plot, render_svg, PlotModel};
pub use power::{load_table, persist_table, run_cell, run_grid, CellResult, PowerTable, StudyConfig};
pub use report::{emit_report, ingest_csv, load_report, parse_report, ColumnSelector};
pub use signal::{
    compose, gen_noise, gen_sinusoid, generate_composite, normalize_magnitude, CompositeSeries,
    NoiseDistribution, NoiseSpec, SignalSpec,
};
pub use spectral::{
    analyze_spectrum, autocovariance, center, centering_matrix, chebyshev_t, dft_at,
    fisher_statistic, spectral_identity, unitary_dft_matrix, AutocorrelationProfile,
    ComplexMatrix, SpectrumAnalysis, SpectrumPlan, TimeSeries,
};

// Chapters of the guide, compiled so their listings run under `cargo test --doc`.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    pub mod spectrum {}
    #[doc = include_str!("../../../book/src/autocorrelation.md")]
    pub mod autocorrelation {}
    #[doc = include_str!("../../../book/src/permutation-test.md")]
    pub mod permutation_test {}
    #[doc = include_str!("../../../book/src/signals.md")]
    pub mod signals {}
    #[doc = include_str!("../../../book/src/power.md")]
    pub mod power {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
