use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lambid::commands;
use lambid::config::RunConfig;
use lambid::lambid_core::curves::MaterialParam;
use lambid::Error;

#[derive(Parser)]
#[command(name = "lambid", version, about = "Lamb wave dispersion solver and Bayesian stiffness identification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `sampler.chains` in the config.
    #[arg(long)]
    chains: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Trace A0 and S0 over the configured band.
    Solve(Common),
    /// Perturb each constant and report the dispersion shifts.
    Sensitivity {
        #[command(flatten)]
        common: Common,
        /// Restrict to these parameters (c11, c13, c33, c55, rho); repeatable.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<MaterialParam>,
    },
    /// Synthesize a surface wavefield from the forward model.
    Synth(Common),
    /// 2D transform a wavefield and pick A0/S0 ridges.
    Extract(Common),
    /// Sample the posterior of the constants given picked points.
    Identify(Common),
    /// Posterior summary, curve ensemble and joint densities.
    Summarize(Common),
}

fn parse_param(s: &str) -> Result<MaterialParam, String> {
    MaterialParam::parse(s).ok_or_else(|| format!("unknown parameter `{s}` (expected c11, c13, c33, c55 or rho)"))
}

fn load(c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(&c.config)?;
    if c.seed.is_some() {
        cfg.seed = c.seed;
    }
    if let Some(n) = c.chains {
        cfg.sampler.chains = n;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Solve(c) => {
            let r = commands::solve(&load(&c)?, &c.out)?;
            println!("order {}", r.order);
            if r.excluded > 0 {
                eprintln!("warning: {} grid points excluded", r.excluded);
            }
            println!("wrote {}", r.path.display());
        }
        Command::Sensitivity { common, params } => {
            let rows = commands::sensitivity(&load(&common)?, &common.out, &params)?;
            for r in rows {
                println!("{:>4} {}  max_omega_shift {:.4e}", r.param, r.mode, r.max_omega_shift);
            }
        }
        Command::Synth(c) => {
            let p = commands::synth(&load(&c)?, &c.out)?;
            println!("wrote {}", p.display());
        }
        Command::Extract(c) => {
            let obs = commands::extract(&load(&c)?, &c.out)?;
            println!("picked {} points", obs.len());
        }
        Command::Identify(c) => {
            let chains = commands::identify(&load(&c)?, &c.out)?;
            for (i, ch) in chains.iter().enumerate() {
                println!("chain {i}: acceptance {:.3}", ch.acceptance_rate());
            }
            for w in commands::chain_warnings(&chains) {
                eprintln!("warning: {w}");
            }
        }
        Command::Summarize(c) => {
            let r = commands::summarize_run(&load(&c)?, &c.out)?;
            println!("{} samples, {} ensemble members", r.summary.n_samples, r.ensemble.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
