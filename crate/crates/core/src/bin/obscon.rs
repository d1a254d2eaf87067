use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use obscon_core::experiments::{
    dat_columns, run_constant, run_disk_tables, run_functional, run_optimize, run_table1, sibling, write_file,
    ExperimentConfig, Format, RunSettings, SweepSettings, Table,
};
use obscon_core::{Domain, Error, Result};

/// Spectral observability functionals for -Δ + εV₀ on the unit interval and disk.
#[derive(Debug, Parser)]
#[command(name = "obscon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// J_N over the (eps, delta) grid on the interval, V = eps x² near the centre.
    Table1(Options),
    /// J_N over the (eps, delta) grid on the disk for V = 1/r² and V = r.
    DiskTables(Options),
    /// J_N for one configuration, with per-mode masses.
    Functional(Options),
    /// Finite-time and asymptotic observability constants for one configuration.
    Constant(Options),
    /// Maximise J_N over densities of mass L|Ω|.
    Optimize(Options),
    /// Quick internal consistency checks.
    Selftest,
}

#[derive(Debug, Args)]
struct Options {
    /// Config file of key = value settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// interval | disk
    #[arg(long)]
    domain: Option<String>,
    /// interval-x2 | disk-inverse-square | disk-r
    #[arg(long)]
    potential: Option<String>,
    /// Comma-separated perturbation strengths.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Comma-separated support sizes.
    #[arg(long, value_delimiter = ',')]
    delta: Option<Vec<f64>>,
    /// Number of modes in the infimum.
    #[arg(long = "N")]
    modes: Option<usize>,
    /// Modes kept in the perturbation sums.
    #[arg(long = "M")]
    truncation: Option<usize>,
    /// half | full | four-sectors | intervals:a:b,... | sectors:a:b,... | density:L
    #[arg(long)]
    subset: Option<String>,
    /// Time horizon.
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Measure fraction.
    #[arg(long = "L")]
    fraction: Option<f64>,
    /// Cells on the interval, increments per direction on the disk.
    #[arg(long)]
    mesh: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    /// Decimal places in CSV cells, or `full` for round-trip output.
    #[arg(long)]
    precision: Option<String>,
    /// Leave wall-clock time out of JSON reports.
    #[arg(long)]
    no_timing: bool,
}

impl Options {
    fn config(&self) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        Ok(file.merge(ExperimentConfig {
            domain: self.domain.clone(),
            potential: self.potential.clone(),
            eps: self.eps.clone(),
            delta: self.delta.clone(),
            subset: self.subset.clone(),
            modes: self.modes,
            truncation: self.truncation,
            horizon: self.horizon,
            fraction: self.fraction,
            mesh: self.mesh,
            out: self.out.clone(),
            seed: self.seed,
            format: self.format.clone(),
            precision: self.precision.clone(),
            timing: self.no_timing.then_some(false),
        }))
    }
}

fn emit(config: &ExperimentConfig, text: &str) -> Result<()> {
    match &config.out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render_table(config: &ExperimentConfig, table: &Table) -> Result<String> {
    Ok(match config.format()? {
        Format::Csv => table.to_csv(config.precision()?),
        Format::Json => table.to_json() + "\n",
    })
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialise") + "\n"
}

fn require_json(config: &ExperimentConfig) -> Result<()> {
    match config.format()? {
        Format::Json => Ok(()),
        Format::Csv if config.format.is_none() => Ok(()),
        Format::Csv => Err(Error::Config("field `format`: single-configuration reports are JSON only".into())),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Table1(opts) => {
            let config = opts.config()?;
            let settings = SweepSettings::interval_defaults().with_config(&config, Domain::UnitInterval)?;
            let table = run_table1(&settings)?;
            emit(&config, &render_table(&config, &table)?)
        }
        Command::DiskTables(opts) => {
            let config = opts.config()?;
            let settings = SweepSettings::disk_defaults().with_config(&config, Domain::UnitDisk)?;
            let (inverse_square, radius) = run_disk_tables(&settings)?;
            let a = render_table(&config, &inverse_square)?;
            let b = render_table(&config, &radius)?;
            match &config.out {
                Some(path) => {
                    write_file(&sibling(path, "inverse-square.csv"), &a)?;
                    write_file(&sibling(path, "radius.csv"), &b)
                }
                None => {
                    print!("# {}\n{a}\n# {}\n{b}", inverse_square.title, radius.title);
                    Ok(())
                }
            }
        }
        Command::Functional(opts) => {
            let config = opts.config()?;
            require_json(&config)?;
            let report = run_functional(&RunSettings::resolve(&config)?)?;
            if let Some(path) = &config.out {
                let positions = (1..=report.per_mode_mass.len()).map(|j| j as f64);
                write_file(&sibling(path, "masses.dat"), &dat_columns(positions, &report.per_mode_mass))?;
            }
            emit(&config, &json(&report))
        }
        Command::Constant(opts) => {
            let config = opts.config()?;
            require_json(&config)?;
            let report = run_constant(&RunSettings::resolve(&config)?)?;
            emit(&config, &json(&report))
        }
        Command::Optimize(opts) => {
            let config = opts.config()?;
            require_json(&config)?;
            let report = run_optimize(&RunSettings::resolve(&config)?)?;
            if let Some(path) = &config.out {
                let steps = (0..report.trace.len()).map(|i| i as f64);
                write_file(&sibling(path, "trace.dat"), &dat_columns(steps, &report.trace))?;
                write_file(
                    &sibling(path, "density.dat"),
                    &dat_columns(report.nodes.iter().copied(), &report.density),
                )?;
            }
            emit(&config, &json(&report))
        }
        Command::Selftest => {
            let checks = obscon_core::selftest::run_checks();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            match checks.iter().filter(|c| !c.passed).count() {
                0 => Ok(()),
                n => Err(Error::Numerical(format!("{n} self-test check(s) failed"))),
            }
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("OBSCON_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("OBSCON_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot size the worker pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("obscon: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
