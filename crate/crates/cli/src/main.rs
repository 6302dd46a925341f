//! `lsnet`: fit latent space cluster models to fixture networks and produce
//! the analysis artifacts.

mod commands;
mod config;
mod data;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lsnet::synth::SynthConfig;
use lsnet::{Error, Result};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "lsnet", version, about = "Latent space cluster models for networks")]
struct Cli {
    /// TOML file with run settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic clustered network with known truth.
    Simulate(SimulateArgs),
    /// Maximum likelihood fit, optionally followed by a mixture fit.
    FitMle(RunArgs),
    /// Posterior sampling of the latent position cluster model.
    FitMcmc(RunArgs),
    /// Choose the number of groups by the summed criterion.
    SelectG(RunArgs),
    /// Complete-linkage clustering of fitted positions.
    Cluster(RunArgs),
    /// Relative importance of covariates for latent distances.
    Importance(RunArgs),
    /// Compare models with and without each covariate.
    Scan(RunArgs),
    /// Posterior predictive goodness of fit.
    Gof(RunArgs),
    /// All analysis artifacts for a fit directory.
    Report(RunArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    #[arg(long)]
    nodes: Option<PathBuf>,
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Pair matrix as `name=path` or a path; repeatable.
    #[arg(long)]
    pairs: Vec<String>,
    #[arg(long)]
    trials: Option<u32>,
    /// Reject duplicate fixtures instead of capping counts at the trial count.
    #[arg(long)]
    no_clamp: bool,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    groups: Option<usize>,
    /// `a..b`, `a-b` or a comma list.
    #[arg(long)]
    groups_range: Option<String>,
    /// Comma-separated covariates, or `all`.
    #[arg(long, value_delimiter = ',')]
    covariates: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    control: Option<Vec<String>>,
    /// individual, joint or controlled.
    #[arg(long)]
    mode: Option<String>,
    /// fast or paper.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory written by fit-mle or fit-mcmc.
    #[arg(long)]
    fit: Option<PathBuf>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Residual magnitude marking an extreme pair.
    #[arg(long)]
    threshold: Option<f64>,
    /// Positions used as the distance response: posterior or mle.
    #[arg(long)]
    response: Option<String>,
    /// Use summed fixture counts instead of binarized degree in goodness of fit.
    #[arg(long)]
    count_degree: bool,
}

impl RunArgs {
    fn into_config(self) -> RunConfig {
        RunConfig {
            nodes: self.nodes,
            edges: self.edges,
            pairs: self.pairs,
            trials: self.trials,
            clamp: self.no_clamp.then_some(false),
            dim: self.dim,
            groups: self.groups,
            groups_range: self.groups_range,
            covariates: self.covariates,
            control: self.control,
            mode: self.mode,
            preset: self.preset,
            burnin: self.burnin,
            iterations: self.iterations,
            thin: self.thin,
            chains: self.chains,
            seed: self.seed,
            priors: None,
            out: self.out,
            fit: self.fit,
            replicates: self.replicates,
            threshold: self.threshold,
            response: self.response,
            count_degree: self.count_degree.then_some(true),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 60)]
    n_nodes: usize,
    #[arg(long, default_value_t = 3)]
    groups: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 3.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.5)]
    spread: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    beta0: f64,
    #[arg(long, default_value_t = 3)]
    trials: u32,
    /// Active covariate as `name=value`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    coef: Vec<String>,
}

impl SimulateArgs {
    fn into_config(self) -> Result<(SynthConfig, PathBuf)> {
        let coefficients = self
            .coef
            .iter()
            .map(|c| {
                let (name, value) = c
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("--coef `{c}` is not name=value")))?;
                let value: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("--coef `{c}` has a non-numeric value")))?;
                Ok((name.trim().to_string(), value))
            })
            .collect::<Result<Vec<_>>>()?;
        let cfg = SynthConfig {
            n_nodes: self.n_nodes,
            groups: self.groups,
            dim: self.dim,
            radius: self.radius,
            spread: self.spread,
            beta0: self.beta0,
            trials: self.trials,
            coefficients,
            seed: self.seed,
        };
        Ok((cfg, self.out))
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start {t} worker threads: {e}")))?;
    }
    let load = |args: RunArgs| -> Result<RunConfig> {
        let mut cfg = match &cli.config {
            Some(p) => RunConfig::from_path(p)?,
            None => RunConfig::default(),
        };
        cfg.overlay(&args.into_config());
        Ok(cfg)
    };
    match cli.command {
        Command::Simulate(args) => {
            let (cfg, out) = args.into_config()?;
            commands::simulate(&cfg, &out)
        }
        Command::FitMle(a) => commands::fit_mle_cmd(&load(a)?),
        Command::FitMcmc(a) => commands::fit_mcmc_cmd(&load(a)?),
        Command::SelectG(a) => commands::select_g_cmd(&load(a)?),
        Command::Cluster(a) => commands::cluster_cmd(&load(a)?),
        Command::Importance(a) => commands::importance_cmd(&load(a)?),
        Command::Scan(a) => commands::scan_cmd(&load(a)?),
        Command::Gof(a) => commands::gof_cmd(&load(a)?),
        Command::Report(a) => commands::report_cmd(&load(a)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
