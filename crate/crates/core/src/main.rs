use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use agboost::booster::{ReusePreset, ScheduleConstants, TheoryInputs, Variant};
use agboost::experiment::{
    cmd_cv, cmd_grid, cmd_params, cmd_potentials, cmd_run, cmd_synth, ExperimentConfig, SynthConfig, TheorySection,
};
use agboost::{Error, ErrorClass, Result};

#[derive(Parser)]
#[command(
    name = "agboost",
    version,
    about = "Agnostic boosting with labeled and unlabeled data"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for folds and grid cells.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Train once on a train/test split and write the report and ensemble.
    Run,
    /// k-fold cross-validation.
    Cv,
    /// Grid search over rounds and m with inner cross-validation.
    Grid,
    /// Print the theoretical parameter schedule.
    Params(ParamsArgs),
    /// Write the potential curves as CSV.
    Potentials(PotentialArgs),
    /// Generate a synthetic dataset with a checksummed manifest.
    Synth,
}

#[derive(Args)]
struct ParamsArgs {
    #[arg(long, value_parser = parse_variant)]
    variant: Option<Variant>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// VC dimension of the base class, or log |B| for the reuse variant.
    #[arg(long)]
    complexity: Option<f64>,
    #[arg(long = "c-x")]
    c_x: Option<f64>,
    /// Reuse schedule: fewer_unlabeled or fewer_calls.
    #[arg(long = "reuse-preset", value_parser = parse_preset)]
    reuse_preset: Option<ReusePreset>,
}

#[derive(Args)]
struct PotentialArgs {
    #[arg(long = "z-min", default_value_t = -3.0, allow_hyphen_values = true)]
    z_min: f64,
    #[arg(long = "z-max", default_value_t = 3.0, allow_hyphen_values = true)]
    z_max: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown variant {s:?} (plain, reuse, covariate, pab)"))
}

fn parse_preset(s: &str) -> std::result::Result<ReusePreset, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown preset {s:?} (fewer_unlabeled, fewer_calls)"))
}

fn require_config(common: &Common) -> Result<&Path> {
    common
        .config
        .as_deref()
        .ok_or_else(|| Error::config("--config", "this command needs a config file"))
}

fn load_experiment(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(require_config(common)?)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    if let Some(w) = common.workers {
        cfg.workers = Some(w);
    }
    Ok(cfg)
}

fn write_or_print(out: Option<&Path>, json: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, json)?,
        None => println!("{json}"),
    }
    Ok(())
}

/// `report.json` -> `report.ensemble.json`.
fn ensemble_path(report: &Path) -> PathBuf {
    let stem = report
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    report.with_file_name(format!("{stem}.ensemble.json"))
}

fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    match cli.command {
        Command::Run => {
            let cfg = load_experiment(common)?;
            let (out, ensemble) = cmd_run(&cfg)?;
            let json = serde_json::to_string_pretty(&out)?;
            if let Some(p) = &cfg.out {
                std::fs::write(p, json)?;
                std::fs::write(ensemble_path(p), ensemble.to_json()?)?;
                if let Some(acc) = out.test_accuracy {
                    println!("test accuracy {acc:.4} (selected round {})", out.report.selected_round);
                }
            } else {
                println!("{json}");
            }
        }
        Command::Cv => {
            let cfg = load_experiment(common)?;
            let out = cmd_cv(&cfg)?;
            if let Some(p) = &cfg.out {
                std::fs::write(p, serde_json::to_string_pretty(&out)?)?;
            }
            println!("{} {}", out.dataset.name, out.summary);
        }
        Command::Grid => {
            let cfg = load_experiment(common)?;
            let out = cmd_grid(&cfg)?;
            if let Some(p) = &cfg.out {
                std::fs::write(p, serde_json::to_string_pretty(&out)?)?;
            }
            println!(
                "{} {} (T={}, m={})",
                out.dataset.name, out.summary, out.best_cell.0, out.best_cell.1
            );
        }
        Command::Params(args) => {
            let mut section = match &common.config {
                Some(p) => {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| Error::config("--config", format!("{}: {e}", p.display())))?;
                    // Either a bare theory section or an experiment config holding one.
                    let mut value: serde_json::Value =
                        serde_json::from_str(&text).map_err(|e| Error::config("config", e.to_string()))?;
                    if let Some(t) = value.get_mut("theory") {
                        value = t.take();
                    }
                    serde_json::from_value::<TheorySection>(value)
                        .map_err(|e| Error::config("theory", e.to_string()))?
                }
                None => TheorySection {
                    variant: args.variant.unwrap_or(Variant::Plain),
                    inputs: TheoryInputs {
                        epsilon: args
                            .epsilon
                            .ok_or_else(|| Error::config("--epsilon", "required without --config"))?,
                        delta: args.delta.unwrap_or(0.05),
                        gamma: 1.0,
                        complexity: 1.0,
                        c_x: 1.0,
                        constants: ScheduleConstants::default(),
                        reuse_preset: ReusePreset::default(),
                        master_seed: 0,
                    },
                },
            };
            if let Some(v) = args.variant {
                section.variant = v;
            }
            let inp = &mut section.inputs;
            inp.epsilon = args.epsilon.unwrap_or(inp.epsilon);
            inp.delta = args.delta.unwrap_or(inp.delta);
            inp.gamma = args.gamma.unwrap_or(inp.gamma);
            inp.complexity = args.complexity.unwrap_or(inp.complexity);
            inp.c_x = args.c_x.unwrap_or(inp.c_x);
            inp.reuse_preset = args.reuse_preset.unwrap_or(inp.reuse_preset);
            if let Some(seed) = common.seed {
                inp.master_seed = seed;
            }
            let text = cmd_params(&section.inputs, section.variant)?;
            write_or_print(common.out.as_deref(), text.trim_end())?;
        }
        Command::Potentials(args) => {
            let out = common.out.clone().unwrap_or_else(|| PathBuf::from("potentials.csv"));
            let rows = cmd_potentials(args.z_min, args.z_max, args.step, &out)?;
            println!("wrote {rows} rows to {}", out.display());
        }
        Command::Synth => {
            let path = require_config(common)?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
            let mut cfg: SynthConfig =
                serde_json::from_str(&text).map_err(|e| Error::config("config", e.to_string()))?;
            if let Some(seed) = common.seed {
                cfg.seed = seed;
            }
            let out = common
                .out
                .clone()
                .or_else(|| cfg.out.clone())
                .ok_or_else(|| Error::config("--out", "synth needs an output path"))?;
            let manifest = cmd_synth(&cfg, &out)?;
            println!("wrote {} and {}", out.display(), manifest.display());
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Config => 2,
        ErrorClass::Data => 3,
        ErrorClass::Budget => 4,
        ErrorClass::Other => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
