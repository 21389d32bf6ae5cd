use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use teamgame::experiments::{
    cmd_run, cmd_stability, cmd_sweep, load_json, preset, ExperimentConfig, Preset,
    StabilityConfig, SweepConfig, PRESET_NAMES,
};
use teamgame::Error;

#[derive(Parser)]
#[command(name = "teamgame", version, about = "Learning dynamics in two-team zero-sum games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// JSON configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Compiled-in configuration (see `preset list`).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more dynamics on a game and write trajectories.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one method over many seeded random games.
    Sweep {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Number of games (overrides the configuration).
        #[arg(long)]
        n_games: Option<usize>,
    },
    /// Print a stability report for a point as JSON.
    Stability {
        #[command(flatten)]
        source: Source,
    },
    /// Inspect the compiled-in presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Show { name: String },
}

fn load<T: serde::de::DeserializeOwned>(
    source: &Source,
    command: &str,
    pick: impl Fn(Preset) -> Option<T>,
) -> teamgame::Result<T> {
    match (&source.config, &source.preset) {
        (Some(path), _) => load_json(path),
        (None, Some(name)) => {
            let p = preset(name)?;
            let actual = p.command();
            pick(p).ok_or_else(|| {
                Error::Config(format!("preset '{name}' is for `{actual}`, not `{command}`"))
            })
        }
        (None, None) => Err(Error::Config("pass --config PATH or --preset NAME".into())),
    }
}

fn out_dir(source: &Source, configured: Option<&Path>, name: Option<&str>) -> PathBuf {
    source
        .out
        .clone()
        .or_else(|| configured.map(Path::to_path_buf))
        .unwrap_or_else(|| Path::new("out").join(name.unwrap_or("run")))
}

fn execute(cli: Cli) -> teamgame::Result<()> {
    match cli.command {
        Command::Run { source, seed } => {
            let mut cfg: ExperimentConfig =
                load(&source, "run", |p| if let Preset::Run(c) = p { Some(c) } else { None })?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let out = out_dir(&source, cfg.out.as_deref(), cfg.name.as_deref());
            let summary = cmd_run(&cfg, &out)?;
            for m in &summary.methods {
                match (&m.error, m.final_ne_gap) {
                    (Some(e), _) => println!("{:<5} failed: {e}", m.method),
                    (None, Some(gap)) => println!(
                        "{:<5} {:<14} ne_gap {gap:.3e}  avg ne_gap {:.3e}  {} after {} steps",
                        m.method,
                        if m.converged { "converged" } else { "not converged" },
                        m.average_ne_gap.unwrap_or(f64::NAN),
                        m.termination.as_deref().unwrap_or("?"),
                        m.iterations
                    ),
                    (None, None) => println!("{:<5} no result", m.method),
                }
            }
            println!("wrote {}", out.display());
        }
        Command::Sweep { source, seed, jobs, n_games } => {
            let mut cfg: SweepConfig =
                load(&source, "sweep", |p| if let Preset::Sweep(c) = p { Some(c) } else { None })?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = n_games {
                cfg.n_games = n;
            }
            let out = out_dir(&source, cfg.out.as_deref(), cfg.name.as_deref());
            let s = cmd_sweep(&cfg, jobs, &out)?;
            let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3e}"));
            println!(
                "{}/{} games converged (fraction {}), median final ne_gap {}, {:.1} s",
                s.converged,
                s.n_games,
                s.fraction_converged.map_or("n/a".into(), |f| format!("{f:.3}")),
                fmt(s.median_final_ne_gap),
                s.wall_clock_s
            );
            println!("wrote {}", out.display());
        }
        Command::Stability { source } => {
            let cfg: StabilityConfig = load(&source, "stability", |p| {
                if let Preset::Stability(c) = p { Some(c) } else { None }
            })?;
            let report = cmd_stability(&cfg)?;
            let json = report.to_json()?;
            println!("{json}");
            if let Some(out) = source.out.clone().or(cfg.out.clone()) {
                std::fs::create_dir_all(&out)?;
                std::fs::write(out.join("stability.json"), json)?;
            }
        }
        Command::Preset { action: PresetAction::List } => {
            for (name, about) in PRESET_NAMES {
                println!("{name:<14} {:<10} {about}", preset(name)?.command());
            }
        }
        Command::Preset { action: PresetAction::Show { name } } => {
            println!("{}", serde_json::to_string_pretty(&preset(&name)?)?);
        }
    }
    Ok(())
}

/// 2 for anything the user can fix in the input, 3 for numeric failures.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numeric(_) | Error::Divergence { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
