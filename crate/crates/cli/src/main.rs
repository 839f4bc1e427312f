//! Command-line front end for the cavity simulations.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::CliError;
use crate::config::{apply_override, default_table, merge, parse_table, resolve, RunConfig};
use crate::output::Artifacts;

#[derive(Parser, Debug)]
#[command(name = "kerr-cavity", version, about = "Driven-dissipative three-mode Kerr cavity simulations")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// TOML run configuration; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (config key `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed (config key `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores (config key `threads`).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override any config key, e.g. `--set params.omega2=2.5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Energy-landscape extrema of the lossless cavity over a grid.
    Closed,
    /// Mean-field time series from seeded initial conditions.
    Trace,
    /// Stationary states and their stability.
    FixedPoints,
    /// Fluctuation eigenvalues of the uniform stationary states.
    Stability,
    /// Spectral functions around a uniform stationary state.
    Spectrum {
        /// `numeric_6x6` or `analytic_uniform` (key `spectrum.method`).
        #[arg(long)]
        method: Option<String>,
        /// `lowest` or `highest` population background (key `spectrum.branch`).
        #[arg(long)]
        branch: Option<String>,
    },
    /// Gaussian moment equations, as a pump sweep or a trace from vacuum.
    Cumulant {
        #[arg(long)]
        modes: Option<usize>,
        /// `sweep` or `trace`.
        #[arg(long)]
        output: Option<String>,
    },
    /// Truncated-Fock master equation, same outputs as `cumulant`.
    Oracle {
        #[arg(long)]
        modes: Option<usize>,
        /// Highest Fock level per mode.
        #[arg(long)]
        cutoff: Option<usize>,
        #[arg(long)]
        output: Option<String>,
    },
    /// Region map over detuning and drive.
    PhaseDiagram {
        #[arg(long)]
        ics_per_point: Option<usize>,
    },
    /// Mean field, Gaussian closure and density matrix along a pump sweep.
    Compare {
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long)]
        cutoff: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Closed => "closed",
            Command::Trace => "trace",
            Command::FixedPoints => "fixed-points",
            Command::Stability => "stability",
            Command::Spectrum { .. } => "spectrum",
            Command::Cumulant { .. } => "cumulant",
            Command::Oracle { .. } => "oracle",
            Command::PhaseDiagram { .. } => "phase-diagram",
            Command::Compare { .. } => "compare",
        }
    }

    /// Flag values as dotted config assignments.
    fn overrides(&self) -> Vec<String> {
        let sec = self.name();
        let mut out = Vec::new();
        let mut put = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push(format!("{sec}.{key}={v}"));
            }
        };
        let quoted = |s: &Option<String>| s.as_ref().map(|v| format!("{v:?}"));
        match self {
            Command::Spectrum { method, branch } => {
                put("method", quoted(method));
                put("branch", quoted(branch));
            }
            Command::Cumulant { modes, output } => {
                put("modes", modes.map(|m| m.to_string()));
                put("output", quoted(output));
            }
            Command::Oracle { modes, cutoff, output } => {
                put("modes", modes.map(|m| m.to_string()));
                put("cutoff", cutoff.map(|m| m.to_string()));
                put("output", quoted(output));
            }
            Command::PhaseDiagram { ics_per_point } => put("ics_per_point", ics_per_point.map(|m| m.to_string())),
            Command::Compare { modes, cutoff } => {
                put("modes", modes.map(|m| m.to_string()));
                put("cutoff", cutoff.map(|m| m.to_string()));
            }
            Command::Closed | Command::Trace | Command::FixedPoints | Command::Stability => {}
        }
        out
    }
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut table = default_table(cli.global.config.is_none());
    if let Some(path) = &cli.global.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| kerr_cavity::Error::Config(format!("{}: {e}", path.display())))?;
        merge(&mut table, parse_table(&text)?);
    }
    let g = &cli.global;
    let mut sets: Vec<String> = Vec::new();
    if let Some(o) = &g.out {
        sets.push(format!("out={:?}", o.display().to_string()));
    }
    if let Some(s) = g.seed {
        sets.push(format!("seed={s}"));
    }
    if let Some(t) = g.threads {
        sets.push(format!("threads={t}"));
    }
    sets.extend(cli.command.overrides());
    sets.extend(g.set.iter().cloned());
    for s in &sets {
        apply_override(&mut table, s)?;
    }
    Ok(resolve(table)?)
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = load(cli)?;
    if cfg.threads > 0 {
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    let mut art = Artifacts::new(&cfg.out)?;
    eprintln!("{}: {}", cli.command.name(), commands::describe(&cfg.params()));
    match &cli.command {
        Command::Closed => commands::closed(&cfg, &mut art),
        Command::Trace => commands::trace(&cfg, &mut art),
        Command::FixedPoints => commands::fixed_points(&cfg, &mut art),
        Command::Stability => commands::stability(&cfg, &mut art),
        Command::Spectrum { .. } => commands::spectrum(&cfg, &mut art),
        Command::Cumulant { .. } => commands::cumulant(&cfg, &mut art),
        Command::Oracle { .. } => commands::oracle(&cfg, &mut art),
        Command::PhaseDiagram { .. } => commands::phase_diagram(&cfg, &mut art),
        Command::Compare { .. } => commands::compare_cmd(&cfg, &mut art),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
