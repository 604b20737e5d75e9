use std::path::PathBuf;
use std::process::ExitCode;

use agf_core::experiments::{
    load_channel, cmd_selftest, cmd_simulate, cmd_unitarity, DesignChoice, ExperimentConfig, SelftestLevel,
};
use agf_core::linalg::SeedStream;
use agf_core::measurement::NoiseKind;
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "agf", version, about = "Channel reconstruction from average gate fidelities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Fast,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Noise {
    Sphere,
    Gaussian,
}

#[derive(Subcommand)]
enum Command {
    /// Run a reconstruction sweep and write one CSV row per trial.
    Simulate {
        /// JSON experiment config; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        qubits: Option<usize>,
        /// Comma-separated measurement counts.
        #[arg(long, visible_alias = "m-values", value_delimiter = ',')]
        m: Option<Vec<usize>>,
        /// Comma-separated noise strengths.
        #[arg(long, visible_alias = "eta-values", value_delimiter = ',')]
        eta: Option<Vec<f64>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, visible_alias = "master-seed")]
        seed: Option<u64>,
        #[arg(long, visible_alias = "output-path")]
        out: Option<PathBuf>,
        #[arg(long, visible_alias = "noise-kind", value_enum)]
        noise: Option<Noise>,
        /// Solver settings as inline JSON; missing fields keep their defaults.
        #[arg(long)]
        solver: Option<String>,
        /// Record wall-clock times (output is then not byte-reproducible).
        #[arg(long, visible_alias = "record-timing")]
        timing: bool,
    },
    /// Check structural identities and report pass/fail per property.
    Selftest {
        #[arg(long, value_enum, default_value = "fast")]
        level: Level,
        #[arg(long)]
        json: bool,
    },
    /// Compare the unitarity with the scaled AGF variance over a gate set.
    Unitarity {
        /// `depolarizing`, `identity`, `random-unitary`, `mixture:<p>` or a Choi CSV path.
        #[arg(long)]
        channel: String,
        /// `full-n1`, `full-n2` or `sampled`.
        #[arg(long, default_value = "full-n1")]
        design: String,
        /// Qubits of a sampled design; must agree with a full design.
        #[arg(long)]
        qubits: Option<usize>,
        /// Size of a sampled design.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("AGF_THREADS") {
        let n: usize = v.parse().with_context(|| format!("AGF_THREADS={v} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate {
            config,
            qubits,
            m,
            eta,
            trials,
            seed,
            out,
            noise,
            solver,
            timing,
        } => {
            let mut cfg = match config {
                Some(p) => ExperimentConfig::from_file(&p).with_context(|| format!("reading {}", p.display()))?,
                None => ExperimentConfig::default(),
            };
            if let Some(v) = qubits {
                cfg.qubits = v;
            }
            if let Some(v) = m {
                cfg.m_values = v;
            }
            if let Some(v) = eta {
                cfg.eta_values = v;
            }
            if let Some(v) = trials {
                cfg.trials = v;
            }
            if let Some(v) = seed {
                cfg.master_seed = v;
            }
            if let Some(v) = out {
                cfg.output_path = v.to_string_lossy().into_owned();
            }
            if let Some(v) = noise {
                cfg.noise_kind = match v {
                    Noise::Sphere => NoiseKind::Sphere,
                    Noise::Gaussian => NoiseKind::Gaussian,
                };
            }
            if let Some(v) = solver {
                cfg.solver = serde_json::from_str(&v).context("parsing --solver")?;
            }
            cfg.record_timing |= timing;
            let rows = cmd_simulate(&cfg).with_context(|| format!("sweep writing to {}", cfg.output_path))?;
            let errors = rows.iter().filter(|r| r.status == "error").count();
            eprintln!("{} trials written to {} ({} errors)", rows.len(), cfg.output_path, errors);
            Ok(true)
        }
        Command::Selftest { level, json } => {
            let level = match level {
                Level::Fast => SelftestLevel::Fast,
                Level::Full => SelftestLevel::Full,
            };
            let report = cmd_selftest(level)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.render());
            }
            Ok(report.all_passed())
        }
        Command::Unitarity {
            channel,
            design,
            qubits,
            samples,
            seed,
            json,
        } => {
            let choice = DesignChoice::parse(&design, qubits.unwrap_or(1), samples)?;
            let d = choice.dim();
            if let Some(q) = qubits {
                if 1usize << q != d {
                    bail!("--qubits {q} does not match design {design}");
                }
            }
            let x = load_channel(&channel, d, SeedStream::new(seed, 0))
                .with_context(|| format!("loading channel '{channel}'"))?;
            let gates = choice.build(SeedStream::new(seed, 1))?;
            let report = cmd_unitarity(&x, &gates)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.render());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
