//! Command-line front end: run a test on a CSV column, run a power study,
//! or simulate a signal-plus-noise series.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use permspec::permutation::{DEFAULT_CONFIDENCE, DEFAULT_PERMUTATIONS};
use permspec::power::StudyConfig;
use permspec::{
    emit_report, generate_composite, ingest_csv, persist_table, render_plot, run_grid,
    run_test_detailed, ColumnSelector, NoiseDistribution, NoiseSpec, PermutationPlan,
};

#[derive(Debug, Parser)]
#[command(name = "permspec", version, about = "Permutation-spectrum test for periodic signals")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test one CSV column for a periodic signal.
    Test(TestArgs),
    /// Estimate power over a grid of noise distributions, lengths and signal-to-noise ratios.
    PowerStudy(PowerArgs),
    /// Generate a signal-plus-noise series and write it as a one-column CSV.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct TestArgs {
    /// CSV file holding the series.
    input: PathBuf,
    /// Column index (zero-based) or header name.
    #[arg(long, default_value = "0")]
    column: ColumnSelector,
    /// Skip a header row when selecting the column by index.
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    permutations: usize,
    /// Confidence level of the Wilson interval for the p-value.
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
    confidence: f64,
    #[arg(long)]
    out_report: Option<PathBuf>,
    #[arg(long)]
    out_plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PowerArgs {
    /// K = 500, M = 200, n in {30, 60}, λ in {0, 0.4, 0.8, 1} (the default).
    #[arg(long, conflicts_with = "full_scale")]
    desk_scale: bool,
    /// K = 10,000, M = 1000, n in {30, 60, 120, 240}, λ in {0, 0.2, …, 1}. Takes hours.
    #[arg(long)]
    full_scale: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Override the permutations per test.
    #[arg(long)]
    permutations: Option<usize>,
    /// Override the replicates per cell.
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Comma-separated series lengths, overriding the preset.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Comma-separated signal-to-noise ratios, overriding the preset.
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Comma-separated noise distributions (normal, t2), overriding the preset.
    #[arg(long, value_delimiter = ',')]
    noise: Option<Vec<NoiseDistribution>>,
    #[arg(long, default_value = "power_table.json")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 60)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value = "normal")]
    noise: NoiseDistribution,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn run(cli: Cli) -> permspec::Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| permspec::Error::InvalidArgument(e.to_string()))?;
    }
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Test(args) => {
            let series = ingest_csv(&args.input, &args.column, args.header)?;
            let plan = PermutationPlan::new(args.seed, args.permutations)?;
            let outcome = run_test_detailed(&series, plan, args.confidence)?;
            let r = &outcome.result;
            writeln!(stdout, "n                 {}", r.n)?;
            writeln!(stdout, "observed MSI      {}", r.observed_msi)?;
            writeln!(stdout, "argmax frequency  {}", r.argmax_frequency)?;
            writeln!(stdout, "p-value           {} ({} of {} permutations)", r.p_value, r.exceedances, r.permutations)?;
            writeln!(
                stdout,
                "{:.0}% Wilson        [{}, {}]",
                100.0 * r.confidence,
                r.wilson_low,
                r.wilson_high
            )?;
            if let Some(path) = &args.out_report {
                emit_report(r, path)?;
            }
            if let Some(path) = &args.out_plot {
                render_plot(r, &outcome.null, &outcome.spectrum, path)?;
            }
        }
        Command::PowerStudy(args) => {
            let mut config = if args.full_scale {
                StudyConfig::full_scale(args.seed)
            } else {
                StudyConfig::desk_scale(args.seed)
            };
            config.alpha = args.alpha;
            if let Some(m) = args.permutations {
                config.permutations = m;
            }
            if let Some(k) = args.replicates {
                config.replicates = k;
            }
            if let Some(n) = args.n {
                config.n_values = n;
            }
            if let Some(l) = args.lambda {
                config.lambda_values = l;
            }
            if let Some(d) = args.noise {
                config.distributions = d;
            }
            let table = run_grid(&config)?;
            persist_table(&table, &args.out)?;
            writeln!(stdout, "{:<8} {:>5} {:>6} {:>8} {:>17}", "noise", "n", "lambda", "power", "95% Wilson")?;
            for c in &table.cells {
                writeln!(
                    stdout,
                    "{:<8} {:>5} {:>6} {:>8.4} [{:.4}, {:.4}]",
                    c.distribution.name(),
                    c.n,
                    c.lambda,
                    c.power,
                    c.wilson_low,
                    c.wilson_high
                )?;
            }
        }
        Command::Simulate(args) => {
            let spec = NoiseSpec::new(args.noise, args.n)?;
            let composite = generate_composite(&spec, args.lambda, args.seed)?;
            let mut body = String::new();
            for v in composite.series.real_values().expect("simulated series are real") {
                body.push_str(&format!("{v}\n"));
            }
            fs::write(&args.out, body)?;
            writeln!(
                stdout,
                "signal frequency {} amplitude {} lambda {}",
                composite.signal.frequency, composite.signal.amplitude, composite.lambda
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("permspec: error: {e}");
            ExitCode::from(1)
        }
    }
}
