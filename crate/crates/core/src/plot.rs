//! Two-panel SVG plot of a permutation-spectrum test.
//!
//! The left panel shows the scaled intensities over the Nyquist range as
//! bars. The right panel shows a mirrored kernel density ("violin") of the
//! simulated null MSI values with its quartiles. Both panels share one
//! vertical scale and mark the observed MSI with a red dot.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::permutation::{NullDistribution, TestResult};
use crate::spectral::SpectrumAnalysis;

const DENSITY_POINTS: usize = 128;

/// Everything needed to draw the plot, in data coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotModel {
    /// `(frequency, scaled intensity)` for `0 < frequency ≤ 1/2`.
    pub bars: Vec<(f64, f64)>,
    /// `(MSI value, density)` along the violin's vertical axis.
    pub density: Vec<(f64, f64)>,
    pub bandwidth: f64,
    pub quartiles: [f64; 3],
    pub null_min: f64,
    pub null_max: f64,
    pub observed_msi: f64,
    pub argmax_frequency: f64,
    pub p_value: f64,
    /// Upper end of the shared vertical axis.
    pub y_max: f64,
}

/// Linear-interpolation quantile of sorted data (Hyndman–Fan type 7).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule of thumb, `0.9·min(sd, IQR/1.34)·m^(−1/5)`.
///
/// Falls back to whichever spread measure is positive, and to a small
/// fixed width when all values coincide.
pub fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let m = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / m;
    let sd = if sorted.len() > 1 {
        (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    let iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr / 1.34),
        (true, false) => sd,
        (false, true) => iqr / 1.34,
        (false, false) => return 1e-3 * mean.abs().max(1.0),
    };
    0.9 * spread * m.powf(-0.2)
}

/// Gaussian kernel density estimate at `x`.
pub fn kernel_density(values: &[f64], bandwidth: f64, x: f64) -> f64 {
    let norm = 1.0 / (values.len() as f64 * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    values
        .iter()
        .map(|v| {
            let u = (x - v) / bandwidth;
            (-0.5 * u * u).exp()
        })
        .sum::<f64>()
        * norm
}

pub fn plot_model(result: &TestResult, spectrum: &SpectrumAnalysis, null: &NullDistribution) -> Result<PlotModel> {
    if !spectrum.real_input {
        return Err(Error::ComplexUnsupported);
    }
    let sorted = null.sorted_values();
    let bandwidth = silverman_bandwidth(sorted);
    let null_min = sorted[0];
    let null_max = sorted[sorted.len() - 1];
    let lo = (null_min - 3.0 * bandwidth).max(0.0);
    let hi = null_max + 3.0 * bandwidth;
    let density = (0..DENSITY_POINTS)
        .map(|i| {
            let y = lo + (hi - lo) * i as f64 / (DENSITY_POINTS - 1) as f64;
            (y, kernel_density(sorted, bandwidth, y))
        })
        .collect();
    let bars = spectrum.nyquist_bins();
    let tallest = bars.iter().map(|b| b.1).fold(0.0, f64::max);
    let y_max = 1.05 * tallest.max(hi).max(spectrum.msi);
    Ok(PlotModel {
        bars,
        density,
        bandwidth,
        quartiles: [0.25, 0.5, 0.75].map(|p| quantile(sorted, p)),
        null_min,
        null_max,
        observed_msi: spectrum.msi,
        argmax_frequency: spectrum.argmax_frequency(),
        p_value: result.p_value,
        y_max,
    })
}

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 480.0;
const TOP: f64 = 60.0;
const BOTTOM: f64 = 420.0;
const LEFT_X0: f64 = 70.0;
const LEFT_X1: f64 = 560.0;
const RIGHT_X0: f64 = 620.0;
const RIGHT_X1: f64 = 790.0;
const MARKER: &str = "#d62728";

/// Round step for about five ticks over `[0, max]`.
fn tick_step(max: f64) -> f64 {
    let raw = max / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let unit = raw / mag;
    let nice = if unit <= 1.0 {
        1.0
    } else if unit <= 2.0 {
        2.0
    } else if unit <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

pub fn render_svg(model: &PlotModel) -> String {
    let y_of = |v: f64| BOTTOM - (BOTTOM - TOP) * (v / model.y_max);
    let x_of = |f: f64| LEFT_X0 + (LEFT_X1 - LEFT_X0) * (f / 0.5);
    let mut s = String::new();

    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{:.1}" y="28" text-anchor="middle" font-size="15">Permutation-Spectrum Test Plot (p = {:.4})</text>"#,
        WIDTH / 2.0,
        model.p_value
    )
    .unwrap();

    // shared vertical axis
    writeln!(s, r#"<g id="y-axis" stroke="black">"#).unwrap();
    writeln!(s, r#"<line x1="{LEFT_X0}" y1="{TOP}" x2="{LEFT_X0}" y2="{BOTTOM}"/>"#).unwrap();
    let step = tick_step(model.y_max);
    let mut tick = 0.0;
    while tick <= model.y_max + 1e-12 {
        let y = y_of(tick);
        writeln!(
            s,
            r#"<line x1="{:.1}" y1="{y:.3}" x2="{LEFT_X0}" y2="{y:.3}"/><text x="{:.1}" y="{:.3}" text-anchor="end" stroke="none">{}</text>"#,
            LEFT_X0 - 5.0,
            LEFT_X0 - 8.0,
            y + 4.0,
            format_tick(tick)
        )
        .unwrap();
        tick += step;
    }
    writeln!(s, "</g>").unwrap();
    writeln!(
        s,
        r#"<text transform="translate(20 {:.1}) rotate(-90)" text-anchor="middle">Scaled intensity</text>"#,
        (TOP + BOTTOM) / 2.0
    )
    .unwrap();

    // left panel: bars over the Nyquist range
    writeln!(s, r#"<g id="spectrum-panel">"#).unwrap();
    writeln!(s, r#"<line x1="{LEFT_X0}" y1="{BOTTOM}" x2="{LEFT_X1}" y2="{BOTTOM}" stroke="black"/>"#).unwrap();
    let bar_w = 0.8 * (LEFT_X1 - LEFT_X0) / (model.bars.len().max(1) as f64 + 0.5);
    for &(f, h) in &model.bars {
        let x = x_of(f) - bar_w / 2.0;
        let y = y_of(h);
        writeln!(
            s,
            r##"<rect class="bar" x="{x:.3}" y="{y:.3}" width="{bar_w:.3}" height="{:.3}" fill="#4c72b0" data-frequency="{f}" data-value="{h}"/>"##,
            BOTTOM - y
        )
        .unwrap();
    }
    for i in 0..=5 {
        let f = 0.1 * i as f64;
        writeln!(
            s,
            r#"<text x="{:.3}" y="{:.1}" text-anchor="middle">{f:.1}</text>"#,
            x_of(f),
            BOTTOM + 18.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Frequency</text>"#,
        (LEFT_X0 + LEFT_X1) / 2.0,
        BOTTOM + 40.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<circle class="observed" cx="{:.3}" cy="{:.3}" r="5" fill="{MARKER}" data-value="{}"/>"#,
        x_of(model.argmax_frequency.min(1.0 - model.argmax_frequency)),
        y_of(model.observed_msi),
        model.observed_msi
    )
    .unwrap();
    writeln!(s, "</g>").unwrap();

    // right panel: violin of the simulated null
    let centre = (RIGHT_X0 + RIGHT_X1) / 2.0;
    let half = (RIGHT_X1 - RIGHT_X0) / 2.0 * 0.9;
    let peak = model.density.iter().map(|d| d.1).fold(0.0, f64::max);
    let width_at = |d: f64| if peak > 0.0 { half * d / peak } else { 0.0 };
    writeln!(s, r#"<g id="null-panel">"#).unwrap();
    writeln!(s, r#"<line x1="{RIGHT_X0}" y1="{BOTTOM}" x2="{RIGHT_X1}" y2="{BOTTOM}" stroke="black"/>"#).unwrap();
    let mut path = String::new();
    for (i, &(v, d)) in model.density.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        write!(path, "{cmd}{:.3},{:.3} ", centre + width_at(d), y_of(v)).unwrap();
    }
    for &(v, d) in model.density.iter().rev() {
        write!(path, "L{:.3},{:.3} ", centre - width_at(d), y_of(v)).unwrap();
    }
    path.push('Z');
    writeln!(
        s,
        r##"<path class="violin" d="{path}" fill="#c9d7ee" stroke="#4c72b0" data-bandwidth="{}"/>"##,
        model.bandwidth
    )
    .unwrap();
    for q in model.quartiles {
        let w = width_at(kernel_density_from_model(model, q));
        writeln!(
            s,
            r#"<line class="quartile" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black" data-value="{q}"/>"#,
            centre - w,
            y_of(q),
            centre + w,
            y_of(q)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<circle class="observed" cx="{centre:.3}" cy="{:.3}" r="5" fill="{MARKER}" data-value="{}"/>"#,
        y_of(model.observed_msi),
        model.observed_msi
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{centre:.1}" y="{:.1}" text-anchor="middle">Simulated null MSI</text>"#,
        BOTTOM + 18.0
    )
    .unwrap();
    writeln!(s, "</g>").unwrap();
    s.push_str("</svg>\n");
    s
}

/// Density at `v`, interpolated from the model's grid.
fn kernel_density_from_model(model: &PlotModel, v: f64) -> f64 {
    let d = &model.density;
    match d.iter().position(|p| p.0 >= v) {
        None => d.last().map_or(0.0, |p| p.1),
        Some(0) => d[0].1,
        Some(i) => {
            let (x0, y0) = d[i - 1];
            let (x1, y1) = d[i];
            y0 + (y1 - y0) * (v - x0) / (x1 - x0)
        }
    }
}

fn format_tick(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn render_plot(
    result: &TestResult,
    null: &NullDistribution,
    spectrum: &SpectrumAnalysis,
    path: &Path,
) -> Result<()> {
    let model = plot_model(result, spectrum, null)?;
    fs::write(path, render_svg(&model))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permutation::{run_test_detailed, PermutationPlan};
    use crate::spectral::TimeSeries;

    #[test]
    fn quantile_type7() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn density_integrates_to_one() {
        let v = [0.5, 1.0, 1.2, 2.0, 2.1, 3.5];
        let h = silverman_bandwidth(&v);
        assert!(h > 0.0);
        let (lo, hi, steps) = (-5.0, 10.0, 20_000);
        let dx = (hi - lo) / steps as f64;
        let area: f64 = (0..steps)
            .map(|i| kernel_density(&v, h, lo + (i as f64 + 0.5) * dx) * dx)
            .sum();
        assert!((area - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bandwidth_of_constant_sample_is_positive() {
        assert!(silverman_bandwidth(&[2.0, 2.0, 2.0]) > 0.0);
    }

    #[test]
    fn tick_steps_are_round() {
        assert_eq!(tick_step(5.0), 1.0);
        assert_eq!(tick_step(8.0), 2.0);
        assert_eq!(tick_step(0.9), 0.2);
    }

    #[test]
    fn complex_input_cannot_be_plotted() {
        let z = TimeSeries::from_complex(
            [(1.0, 0.5), (0.0, 2.0), (-1.0, 0.2), (0.4, -1.0)]
                .map(|(a, b)| num_complex::Complex64::new(a, b))
                .to_vec(),
        )
        .unwrap();
        let o = run_test_detailed(&z, PermutationPlan::new(1, 20).unwrap(), 0.95).unwrap();
        assert!(matches!(
            plot_model(&o.result, &o.spectrum, &o.null),
            Err(Error::ComplexUnsupported)
        ));
    }

    #[test]
    fn model_matches_inputs() {
        let y: Vec<f64> = (0..30).map(|t| ((t * 7919) % 31) as f64 / 7.0).collect();
        let o = run_test_detailed(&TimeSeries::new(y).unwrap(), PermutationPlan::new(2, 300).unwrap(), 0.95)
            .unwrap();
        let m = plot_model(&o.result, &o.spectrum, &o.null).unwrap();
        assert_eq!(m.bars.len(), 15);
        for (k, &(f, h)) in m.bars.iter().enumerate() {
            assert_eq!(f, (k + 1) as f64 / 30.0);
            assert!((h - o.spectrum.scaled_intensity[k + 1]).abs() < 1e-9);
        }
        let sorted = o.null.sorted_values();
        assert_eq!(m.quartiles[1], quantile(sorted, 0.5));
        assert!(m.y_max >= m.observed_msi && m.y_max >= m.null_max);
    }
}
