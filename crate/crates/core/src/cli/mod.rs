//! Command-line front end: configuration, subcommands and file output.

mod commands;
mod config;
mod output;
mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::Report;
pub use config::{
    AdvantageSection, CellSection, FisherSection, GridSection, ProbeSection, RunConfig, SpectraSection, SqlSection,
    StateSection, TomoSection,
};
pub use output::OutputDir;
pub use svg::{line_chart, Series};

use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "faraday-noon", version, about = "Faraday-rotation NOON polarimetry in rubidium vapor")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Cell temperature, °C.
    #[arg(long, global = true, value_name = "C", allow_negative_numbers = true)]
    pub temp: Option<f64>,
    /// Upper end of the field grid, mT.
    #[arg(long, global = true, value_name = "mT", allow_negative_numbers = true)]
    pub bmax: Option<f64>,
    /// Number of field grid points.
    #[arg(long, global = true, value_name = "N")]
    pub grid: Option<usize>,
    /// Seed for optimizer starts and simulated counts.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Remove Rb-87 from the cell.
    #[arg(long, global = true)]
    pub pure_rb85: bool,
    /// Keep the cell phases and drop all absorption.
    #[arg(long, global = true)]
    pub lossless: bool,
    /// Count lost photons as an outcome.
    #[arg(long, global = true)]
    pub include_noclick: bool,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transmission spectra over temperatures and fields.
    Spectra,
    /// Coincidence and singles fringes over the field grid.
    Fringes,
    /// Pair Fisher information over the field grid.
    Fisher,
    /// Optimized single-photon Fisher information over the field grid.
    Sql,
    /// NOON advantage ratios at one field.
    Advantage {
        /// Field, mT.
        #[arg(long, value_name = "mT", allow_negative_numbers = true)]
        field: Option<f64>,
    },
    /// State reconstruction from coincidence counts.
    Tomo {
        /// Counts CSV with header B_mT,t_int_s,N_HH,N_HV,N_VV.
        #[arg(long, value_name = "PATH", conflicts_with = "simulate", required_unless_present = "simulate")]
        data: Option<PathBuf>,
        /// Simulate counts for the configured state first.
        #[arg(long)]
        simulate: bool,
    },
}

/// Loads the config file (or defaults) and applies command-line overrides.
pub fn effective_config(common: &CommonArgs, command: &Command) -> Result<RunConfig> {
    let mut c = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            RunConfig::from_toml(&text).map_err(|e| match e {
                Error::Parse { line, message } => Error::Parse {
                    line,
                    message: format!("{}: {message}", path.display()),
                },
                other => other,
            })?
        }
        None => RunConfig::default(),
    };
    let is_tomo = matches!(command, Command::Tomo { .. });
    if let Some(t) = common.temp {
        c.cell.temperature_c = t;
        c.spectra.temperatures_c = vec![t];
    }
    if let Some(b) = common.bmax {
        if is_tomo {
            c.tomo.stop_mt = b;
        } else {
            c.grid.stop_mt = b;
        }
    }
    if let Some(n) = common.grid {
        if is_tomo {
            c.tomo.points = n;
        } else {
            c.grid.points = n;
        }
    }
    if let Some(s) = common.seed {
        c.seed = s;
    }
    if let Some(o) = &common.out {
        c.out = o.clone();
    }
    if common.pure_rb85 {
        c.cell.rb87_fraction = 0.0;
    }
    c.cell.lossless |= common.lossless;
    c.fisher.include_no_click |= common.include_noclick;
    if let Command::Advantage { field: Some(b) } = command {
        c.advantage.field_mt = *b;
    }
    c.validate()?;
    Ok(c)
}

/// Runs one parsed invocation inside a pool of the requested size.
pub fn execute(cli: &Cli) -> Result<Report> {
    let config = effective_config(&cli.common, &cli.command)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(Error::invalid("--threads must be positive"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Spectra => commands::spectra(&config),
        Command::Fringes => commands::fringes(&config),
        Command::Fisher => commands::fisher(&config),
        Command::Sql => commands::sql(&config),
        Command::Advantage { .. } => commands::advantage(&config),
        Command::Tomo { data, .. } => commands::tomo(&config, data.as_deref()),
    })
}

/// Parses `args`, runs the command, prints results and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            println!("{}", report.summary);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
