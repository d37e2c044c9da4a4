use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use lpcompress::bench::{self, ExperimentConfig, Overrides};
use lpcompress::compression::CompressionModel;
use lpcompress::error::{Error, Result};
use lpcompress::instances::{presets, Instance};
use lpcompress::json;
use lpcompress::oracle::PriorSpec;

#[derive(Parser, Debug)]
#[command(name = "lpcompress", version, about = "Learn exact affine compressions of repeated linear programs")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment config (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use the instance's nominal cost and unfiltered draws.
    #[arg(long, global = true)]
    known_prior: bool,
    /// Calibration miscoverage level.
    #[arg(long, global = true)]
    rho: Option<f64>,
    /// Calibration failure probability.
    #[arg(long, global = true)]
    delta0: Option<f64>,
    /// Learning-certificate failure probability.
    #[arg(long, global = true)]
    delta1: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Preset name; replaces the config's instance.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Instance JSON or MPS file; replaces the config's instance path.
    #[arg(long, global = true)]
    instance: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write an instance file.
    Gen,
    /// Learn a compression model and its certificate.
    Learn {
        /// Number of retained training costs.
        #[arg(long)]
        n1: Option<usize>,
    },
    /// Fit and calibrate the estimated prior.
    Calibrate,
    /// Solve a single cost, optionally through a learned model.
    Solve {
        /// Comma-separated cost vector; defaults to the nominal cost.
        #[arg(long)]
        cost: Option<String>,
        /// `model.json` from `learn`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Run the configured experiment sweep.
    Bench,
    /// Brute-force oracle for small instances.
    Oracle {
        #[command(subcommand)]
        what: OracleCommand,
    },
    /// List preset names.
    Presets,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Vertices, reachable set, direction basis and its dimension.
    DirStar {
        /// Prior JSON, e.g. `{"shape":"ball","center":[0,1],"radius":0.1}`.
        #[arg(long)]
        prior: Option<String>,
    },
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides {
        seed: c.seed,
        known_prior: c.known_prior,
        rho: c.rho,
        delta0: c.delta0,
        delta1: c.delta1,
        out: c.out.clone(),
        jobs: c.jobs,
    });
    if c.preset.is_some() || c.instance.is_some() {
        cfg.instance.preset = c.preset.clone();
        cfg.instance.path = c.instance.clone();
    }
    Ok(cfg)
}

fn parse_cost(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Domain(format!("bad cost entry '{t}': {e}")))
        })
        .collect()
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", json::to_string(v)?);
    Ok(())
}

fn load_instance(cfg: &ExperimentConfig) -> Result<Instance> {
    bench::pipeline::load_configured_instance(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli.common)?;
    match cli.command {
        Command::Gen => {
            let path = bench::cmd_gen(&cfg)?;
            println!("{}", path.display());
        }
        Command::Learn { n1 } => {
            if let Some(n) = n1 {
                cfg.n1 = n;
            }
            let out = bench::cmd_learn(&cfg)?;
            info!("wrote model, trace and certificate to {}", cfg.out.display());
            print_json(&out.report)?;
        }
        Command::Calibrate => {
            let est = bench::cmd_calibrate(&cfg)?;
            info!("threshold {} at order statistic {} of {}", est.threshold, est.k, est.m);
            println!("{}", cfg.out.join("prior.json").display());
        }
        Command::Solve { cost, model } => {
            let inst = load_instance(&cfg)?;
            let c = match cost {
                Some(s) => parse_cost(&s)?,
                None => inst.c0.clone(),
            };
            let model: Option<CompressionModel> = model.as_deref().map(json::read_file).transpose()?;
            print_json(&bench::cmd_solve(&inst, &c, model.as_ref())?)?;
        }
        Command::Bench => {
            let report = bench::cmd_bench(&cfg)?;
            for e in &report.errors {
                error!("{} seed {}: {}", e.label, e.seed, e.message);
            }
            println!("{}", cfg.out.join("metrics.csv").display());
        }
        Command::Oracle {
            what: OracleCommand::DirStar { prior },
        } => {
            let inst = load_instance(&cfg)?;
            let prior: Option<PriorSpec> = prior.as_deref().map(serde_json::from_str).transpose()?;
            print_json(&bench::cmd_oracle(&inst, prior)?)?;
        }
        Command::Presets => {
            for p in presets::all() {
                println!("{}", p.name);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::FAILURE
        }
    }
}
