//! Acceptance suite. Every criterion prints one PASS/FAIL line.
//!
//! Run with `cargo test -p permspec --test acceptance -- --nocapture` to see
//! the lines.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;

use permspec::power::StudyConfig;
use permspec::seed::substream;
use permspec::spectral::SpectrumPlan;
use permspec::{
    analyze_spectrum, dft_at, gen_noise, p_value, run_grid, simulate_null, spectral_identity,
    NoiseDistribution, NoiseSpec, PermutationPlan, PowerTable, TimeSeries,
};

fn verdict(name: &str, pass: bool, detail: &str) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name} failed: {detail}");
}

fn noise_series(distribution: NoiseDistribution, n: usize, seed: u64, stream: u64) -> TimeSeries {
    let spec = NoiseSpec::new(distribution, n).unwrap();
    TimeSeries::new(gen_noise(&spec, &mut substream(seed, stream))).unwrap()
}

const DESK_SEED: u64 = 20_201_130;

fn desk_grid() -> &'static PowerTable {
    static GRID: OnceLock<PowerTable> = OnceLock::new();
    GRID.get_or_init(|| run_grid(&StudyConfig::desk_scale(DESK_SEED)).unwrap())
}

/// Reference power at α = 0.05 (10,000 replicates) for the desk-scale cells with λ > 0.
const REFERENCE_POWER: &[(NoiseDistribution, usize, f64, f64)] = &[
    (NoiseDistribution::StandardNormal, 30, 0.4, 0.0739),
    (NoiseDistribution::StandardNormal, 30, 0.8, 0.3403),
    (NoiseDistribution::StandardNormal, 30, 1.0, 0.5684),
    (NoiseDistribution::StandardNormal, 60, 0.4, 0.1486),
    (NoiseDistribution::StandardNormal, 60, 0.8, 0.7682),
    (NoiseDistribution::StandardNormal, 60, 1.0, 0.9201),
    (NoiseDistribution::StudentT2, 30, 0.4, 0.0778),
    (NoiseDistribution::StudentT2, 30, 0.8, 0.2663),
    (NoiseDistribution::StudentT2, 30, 1.0, 0.4354),
    (NoiseDistribution::StudentT2, 60, 0.4, 0.1188),
    (NoiseDistribution::StudentT2, 60, 0.8, 0.5485),
    (NoiseDistribution::StudentT2, 60, 1.0, 0.7624),
];

#[test]
fn desk_grid_matches_reference_power() {
    let grid = desk_grid();
    assert_eq!(grid.cells.len(), 16);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for &(d, n, lambda, target) in REFERENCE_POWER {
        let cell = grid.get(d, n, lambda).unwrap();
        let dev = (cell.power - target).abs();
        worst = worst.max(dev);
        println!("    {d:<6} n={n:<3} λ={lambda:<3} power={:.4} reference={target:.4} |Δ|={dev:.4}", cell.power);
        if dev > 0.07 {
            failures.push(format!("{d} n={n} λ={lambda}"));
        }
    }
    for d in NoiseDistribution::ALL {
        for n in [30, 60] {
            let cell = grid.get(d, n, 0.0).unwrap();
            let dev = (cell.power - 0.05).abs();
            println!("    {d:<6} n={n:<3} λ=0   power={:.4} target=0.0500 |Δ|={dev:.4}", cell.power);
            if dev > 0.03 {
                failures.push(format!("{d} n={n} λ=0"));
            }
        }
    }
    verdict(
        "desk-scale power vs reference (K=500, M=200)",
        failures.is_empty(),
        &format!("max |Δ| vs reference {worst:.4} (tol 0.07), failures {failures:?}"),
    );
}

#[test]
fn robustness_ordering() {
    let grid = desk_grid();
    let mut failures = Vec::new();
    for n in [30, 60] {
        for lambda in [0.4, 0.8, 1.0] {
            let normal = grid.get(NoiseDistribution::StandardNormal, n, lambda).unwrap();
            let t2 = grid.get(NoiseDistribution::StudentT2, n, lambda).unwrap();
            let se = (normal.standard_error().powi(2) + t2.standard_error().powi(2)).sqrt();
            if normal.power < t2.power - 3.0 * se {
                failures.push(format!("n={n} λ={lambda}: {} < {}", normal.power, t2.power));
            }
        }
    }
    verdict(
        "robustness ordering normal >= t2 (3 SE)",
        failures.is_empty(),
        &format!("violations {failures:?}"),
    );
}

/// Kolmogorov–Smirnov distance between the p-values and U{0, 1/M, …, 1}.
fn ks_discrete_uniform(p_values: &[f64], m: usize) -> f64 {
    let mut counts = vec![0usize; m + 1];
    for p in p_values {
        counts[(p * m as f64).round() as usize] += 1;
    }
    let total = p_values.len() as f64;
    let mut cum = 0usize;
    let mut d = 0.0f64;
    for (j, c) in counts.iter().enumerate() {
        cum += c;
        let expected = (j + 1) as f64 / (m + 1) as f64;
        d = d.max((cum as f64 / total - expected).abs());
    }
    d
}

fn null_uniformity(distribution: NoiseDistribution, seed: u64) -> (f64, f64) {
    let (tests, n, m) = (2000usize, 60usize, 200usize);
    let p_values: Vec<f64> = (0..tests)
        .map(|i| {
            let y = noise_series(distribution, n, seed, i as u64);
            let observed = analyze_spectrum(&y).unwrap().msi;
            let plan = PermutationPlan::new(seed ^ (i as u64).wrapping_mul(0x9E37_79B9), m).unwrap();
            p_value(observed, &simulate_null(&y, plan).unwrap())
        })
        .collect();
    // asymptotic one-sample KS critical value at the 0.01 level
    let critical = 1.6276 / (tests as f64).sqrt();
    (ks_discrete_uniform(&p_values, m), critical)
}

#[test]
fn null_p_values_uniform_normal() {
    let (d, crit) = null_uniformity(NoiseDistribution::StandardNormal, 11);
    verdict(
        "null p-value uniformity (normal, n=60, M=200, 2000 tests)",
        d < crit,
        &format!("KS D={d:.4}, critical {crit:.4}"),
    );
}

#[test]
fn null_p_values_uniform_t2() {
    let (d, crit) = null_uniformity(NoiseDistribution::StudentT2, 12);
    verdict(
        "null p-value uniformity (t2, n=60, M=200, 2000 tests)",
        d < crit,
        &format!("KS D={d:.4}, critical {crit:.4}"),
    );
}

#[test]
fn parseval_identity() {
    let mut rng = substream(31, 0);
    let mut worst = 0.0f64;
    for i in 0..1000u64 {
        let n = rng.random_range(3..=512usize);
        let d = NoiseDistribution::ALL[(i % 2) as usize];
        let y = noise_series(d, n, 32, i);
        let values = y.real_values().unwrap();
        let mean = values.iter().sum::<f64>() / n as f64;
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        let a = analyze_spectrum(&y).unwrap();
        let energy: f64 = a.intensity.iter().map(|w| w * w).sum();
        worst = worst.max((energy - ss).abs() / ss);
    }
    verdict(
        "Parseval identity (1000 series, n in 3..=512)",
        worst <= 1e-10,
        &format!("max relative error {worst:.3e} (tol 1e-10)"),
    );
}

#[test]
fn spectral_identity_oracle() {
    let mut rng = substream(41, 0);
    let mut worst = 0.0f64;
    for i in 0..1000u64 {
        let n = rng.random_range(3..=512usize);
        let delta: f64 = rng.random_range(0.0..1.0);
        let d = NoiseDistribution::ALL[(i % 2) as usize];
        let y = noise_series(d, n, 42, i);
        let direct = dft_at(&y, delta).norm_sqr() / y.sample_variance();
        let via_acf = spectral_identity(&y, delta).unwrap();
        worst = worst.max((direct - via_acf).abs() / direct.abs());
    }
    verdict(
        "Chebyshev/autocorrelation identity vs direct DFT (1000 pairs)",
        worst <= 1e-8,
        &format!("max relative error {worst:.3e} (tol 1e-8)"),
    );
}

fn all_orders(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in all_orders(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

/// MSI by direct summation of the DFT definition.
fn brute_msi(y: &[f64]) -> f64 {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let s2 = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (1..n)
        .map(|k| {
            let r: Complex64 = y
                .iter()
                .enumerate()
                .map(|(t, v)| Complex64::from_polar(v - mean, -2.0 * PI * ((k * t) % n) as f64 / n as f64))
                .sum();
            (r.norm_sqr() / n as f64 / s2).sqrt()
        })
        .fold(0.0, f64::max)
}

#[test]
fn exhaustive_permutation_oracle() {
    let tol = |v: f64| 1e-9 * v.max(1.0);
    let mut worst_sup = 0.0f64;
    let mut outside = 0usize;
    for i in 0..50u64 {
        let n = [4, 5, 6][(i % 3) as usize];
        let y = noise_series(NoiseDistribution::StandardNormal, n, 51, i);
        let values = y.real_values().unwrap();
        let mut exact: Vec<f64> = all_orders(n)
            .iter()
            .map(|o| brute_msi(&o.iter().map(|&j| values[j]).collect::<Vec<_>>()))
            .collect();
        exact.sort_by(f64::total_cmp);
        let null = simulate_null(&y, PermutationPlan::new(52 + i, 5000).unwrap()).unwrap();

        outside += null
            .values()
            .iter()
            .filter(|v| !exact.iter().any(|e| (e - *v).abs() <= tol(*e)))
            .count();
        let sim = null.sorted_values();
        for &s in &exact {
            let f_exact = exact.partition_point(|e| *e <= s + tol(s)) as f64 / exact.len() as f64;
            let f_sim = sim.partition_point(|e| *e <= s + tol(s)) as f64 / sim.len() as f64;
            worst_sup = worst_sup.max((f_exact - f_sim).abs());
        }
    }
    verdict(
        "exhaustive permutation oracle (50 series, n in {4,5,6}, M=5000)",
        outside == 0 && worst_sup <= 0.05,
        &format!("values outside exact support {outside}, max sup|F_sim - F_exact| {worst_sup:.4} (tol 0.05)"),
    );
}

#[test]
fn dft_moments() {
    let (reps, n) = (20_000usize, 16usize);
    let plan = SpectrumPlan::new(n);
    let mut sum = vec![Complex64::new(0.0, 0.0); n];
    let mut cross = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..reps {
        let y = noise_series(NoiseDistribution::StandardNormal, n, 61, i as u64);
        let a = permspec::spectral::analyze_spectrum_with(&plan, &y).unwrap();
        for k in 1..n {
            sum[k] += a.dft[k];
            for j in 1..n {
                cross[k][j] += a.dft[k] * a.dft[j].conj();
            }
        }
    }
    let r = reps as f64;
    let mean: Vec<Complex64> = sum.iter().map(|s| s / r).collect();
    let cov = |k: usize, j: usize| cross[k][j] / r - mean[k] * mean[j].conj();
    let max_mean = (1..n).map(|k| mean[k].norm()).fold(0.0, f64::max);
    let max_var_dev = (1..n).map(|k| (cov(k, k).re - 1.0).abs()).fold(0.0, f64::max);
    let mut max_corr = 0.0f64;
    for k in 1..n {
        for j in 1..n {
            if j != k {
                let c = cov(k, j).norm() / (cov(k, k).re * cov(j, j).re).sqrt();
                max_corr = max_corr.max(c);
            }
        }
    }
    verdict(
        "DFT coordinate moments (20000 normal series, n=16)",
        max_mean < 0.03 && max_var_dev <= 0.05 && max_corr < 0.03,
        &format!("max |mean| {max_mean:.4}, max |var-1| {max_var_dev:.4}, max |corr| {max_corr:.4}"),
    );
}

fn run_cli(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_permspec")).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "permspec {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let mut identical = Vec::new();

    let sim: Vec<_> = ["a", "b"]
        .iter()
        .map(|tag| {
            run_cli(&["simulate", "--n", "60", "--lambda", "1", "--noise", "t2", "--seed", "9", "--out", &p(&format!("sim_{tag}.csv"))])
                .stdout
        })
        .collect();
    identical.push(("simulate", sim[0] == sim[1] && read(Path::new(&p("sim_a.csv"))) == read(Path::new(&p("sim_b.csv")))));

    let tests: Vec<_> = [("a", None), ("b", Some("1"))]
        .iter()
        .map(|(tag, threads)| {
            let report = p(&format!("report_{tag}.json"));
            let plot = p(&format!("plot_{tag}.svg"));
            let mut args = vec![];
            if let Some(t) = threads {
                args.extend(["--threads", t]);
            }
            let input = p("sim_a.csv");
            args.extend([
                "test", "--seed", "1", "--permutations", "1000", "--out-report", &report, "--out-plot", &plot, &input,
            ]);
            run_cli(&args).stdout
        })
        .collect();
    identical.push((
        "test",
        tests[0] == tests[1]
            && read(Path::new(&p("report_a.json"))) == read(Path::new(&p("report_b.json")))
            && read(Path::new(&p("plot_a.svg"))) == read(Path::new(&p("plot_b.svg"))),
    ));

    let studies: Vec<_> = [("a", None), ("b", Some("2"))]
        .iter()
        .map(|(tag, threads)| {
            let out = p(&format!("power_{tag}.json"));
            let mut args = vec![];
            if let Some(t) = threads {
                args.extend(["--threads", t]);
            }
            args.extend([
                "power-study", "--seed", "5", "--replicates", "60", "--permutations", "60", "--n", "30", "--lambda", "0,1",
                "--out", &out,
            ]);
            run_cli(&args).stdout
        })
        .collect();
    identical.push((
        "power-study",
        studies[0] == studies[1] && read(Path::new(&p("power_a.json"))) == read(Path::new(&p("power_b.json"))),
    ));

    let diverged: Vec<_> = identical.iter().filter(|(_, ok)| !ok).map(|(name, _)| *name).collect();
    verdict(
        "CLI determinism (simulate, test, power-study; varied thread counts)",
        diverged.is_empty(),
        &format!("subcommands with differing output {diverged:?}"),
    );
}
