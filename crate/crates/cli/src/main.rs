//! `molwg`: command-line front end for the molecule/waveguide toolkit.

mod commands;
mod config;
mod error;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::RunOptions;
use config::Config;
use error::CliError;
use output::{write_run, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "molwg", version, about = "Single-molecule / waveguide coupling toolkit")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML config file (lengths in nm); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "molwg-out")]
    out: PathBuf,
    /// Also write plot-ready CSV files.
    #[arg(long, global = true)]
    emit_plot_data: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Guided modes, effective mode area and group velocity.
    Modes,
    /// Emitter-waveguide coupling rates.
    Coupling {
        /// Take A_eff and v_g from the mode solver; optionally from a
        /// previous `modes` output (file or directory).
        #[arg(long, num_args = 0..=1, value_name = "MODES_OUTPUT")]
        from_mode_solver: Option<Option<PathBuf>>,
    },
    /// Per-photon phase and extinction versus detuning.
    PhaseScan {
        /// Detuning range in units of Γ, e.g. `-3,3`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
        delta_range: Option<(f64, f64)>,
        /// Photon numbers, e.g. `1,2,4`.
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<u32>>,
    },
    /// 2D FDTD dipole run with power bookkeeping.
    Fdtd,
    /// 2D FDTD run with a quarter-wave Bragg reflector.
    Bragg {
        #[arg(long)]
        periods: Option<usize>,
    },
    /// Hong-Ou-Mandel interference of two molecules.
    Hom,
    /// Mach-Zehnder phase gate with the molecule in one arm.
    Mzgate {
        /// Send a pump photon through the molecule with the probe.
        #[arg(long)]
        pump: bool,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .or_else(|| s.split_once(':'))
        .ok_or_else(|| format!("expected 'min,max', got '{s}'"))?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("bad minimum '{a}': {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("bad maximum '{b}': {e}"))?;
    if !(hi > lo) {
        return Err(format!("range maximum {hi} must exceed minimum {lo}"));
    }
    Ok((lo, hi))
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Modes => "modes",
            Command::Coupling { .. } => "coupling",
            Command::PhaseScan { .. } => "phase-scan",
            Command::Fdtd => "fdtd",
            Command::Bragg { .. } => "bragg",
            Command::Hom => "hom",
            Command::Mzgate { .. } => "mzgate",
        }
    }

    fn options(&self, emit_plot_data: bool) -> (RunOptions, BTreeMap<String, String>) {
        let mut opts = RunOptions {
            emit_plot_data,
            ..Default::default()
        };
        let mut overrides = BTreeMap::new();
        match self {
            Command::Coupling { from_mode_solver } => {
                if let Some(src) = from_mode_solver {
                    let v = src.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "in-process".into());
                    overrides.insert("from_mode_solver".into(), v);
                }
                opts.from_mode_solver = from_mode_solver.clone();
            }
            Command::PhaseScan { delta_range, m } => {
                if let Some((lo, hi)) = delta_range {
                    overrides.insert("delta_range".into(), format!("{lo},{hi}"));
                }
                if let Some(m) = m {
                    let list: Vec<String> = m.iter().map(u32::to_string).collect();
                    overrides.insert("m".into(), list.join(","));
                }
                opts.delta_range = *delta_range;
                opts.photon_numbers = m.clone();
            }
            Command::Bragg { periods } => {
                if let Some(p) = periods {
                    overrides.insert("periods".into(), p.to_string());
                }
                opts.periods = *periods;
            }
            Command::Mzgate { pump } => {
                if *pump {
                    overrides.insert("pump".into(), "true".into());
                }
                opts.pump = *pump;
            }
            Command::Modes | Command::Fdtd | Command::Hom => {}
        }
        if emit_plot_data {
            overrides.insert("emit_plot_data".into(), "true".into());
        }
        (opts, overrides)
    }
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let text = match &cli.common.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut manifest = RunManifest::new(cli.command.name(), cli.common.config.as_deref(), &cli.common.out, &text);
    let cfg = Config::parse(&text)?;
    let (opts, overrides) = cli.command.options(cli.common.emit_plot_data);
    manifest.overrides = overrides;
    let artifacts = match &cli.command {
        Command::Modes => commands::cmd_modes(&cfg, &opts)?,
        Command::Coupling { .. } => commands::cmd_coupling(&cfg, &opts)?,
        Command::PhaseScan { .. } => commands::cmd_phase_scan(&cfg, &opts)?,
        Command::Fdtd => commands::cmd_fdtd(&cfg, &opts)?,
        Command::Bragg { .. } => commands::cmd_bragg(&cfg, &opts)?,
        Command::Hom => commands::cmd_hom(&cfg, &opts)?,
        Command::Mzgate { .. } => commands::cmd_mzgate(&cfg, &opts)?,
    };
    write_run(&cli.common.out, manifest, &artifacts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("molwg {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
