//! Command-line front end. Exit codes: 0 success, 1 numerical failure,
//! 2 usage or I/O error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::{sets_seed, RunConfig};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "ngp", version, about = "Gaussian process regression with Levy subordinator input warping")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set sampler.n_sweeps=20`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Random seed. Falls back to the config, then to NGP_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Shorthand for `--set levy.family=...` (tempered_stable, gamma, stable, identity).
    #[arg(long, global = true)]
    pub levy: Option<String>,
    /// Shorthand for `--set kernel.family=...` (se, matern52).
    #[arg(long, global = true)]
    pub kernel: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset into an existing directory.
    Gen {
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the model to the observed rows of a dataset and write a results bundle.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Posterior at new inputs from a fitted bundle.
    Predict {
        #[arg(long)]
        bundle: PathBuf,
        /// CSV with columns x_0..x_{d-1}; other columns are ignored.
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw subordinator paths from the prior.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        paths: usize,
        /// Also write W on this many evenly spaced points per dimension.
        #[arg(long, requires = "grid_out")]
        grid_points: Option<usize>,
        #[arg(long)]
        grid_out: Option<PathBuf>,
    },
    /// Rescale the x_ columns of a CSV to [0, 1].
    Normalize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

impl GlobalArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(l) = &self.levy {
            overrides.push(format!("levy.family=\"{l}\""));
        }
        if let Some(k) = &self.kernel {
            overrides.push(format!("kernel.family=\"{k}\""));
        }
        let mut cfg = RunConfig::load(self.config.as_deref(), &overrides)?;
        let explicit = sets_seed(self.config.as_deref(), &overrides)?;
        cfg.resolve_seed(self.seed, explicit)?;
        Ok(cfg)
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Gen { out } => {
            let o = commands::cmd_gen(&cli.global.config()?, out)?;
            eprintln!("wrote {}", o.dataset.display());
        }
        Command::Fit { data, out } => {
            let f = commands::cmd_fit(&cli.global.config()?, data, out)?;
            let s = &f.summary;
            eprintln!(
                "acceptance {:.3}, avg log cond. lik. {:.2} ± {:.2}, GP log marginal {:.2}",
                s.acceptance_rate, s.avg_log_cond_lik, s.std_log_cond_lik, s.gp_log_marginal
            );
        }
        Command::Predict { bundle, points, out } => {
            let t = commands::cmd_predict(bundle, points, out)?;
            eprintln!("wrote {} predictions to {}", t.mean.len(), out.display());
        }
        Command::Simulate {
            out,
            paths,
            grid_points,
            grid_out,
        } => {
            let grid = grid_points.zip(grid_out.as_deref());
            commands::cmd_simulate(&cli.global.config()?, *paths, out, grid)?;
        }
        Command::Normalize { input, out } => {
            for (k, (lo, hi)) in commands::cmd_normalize(input, out)?.iter().enumerate() {
                eprintln!("x_{k}: [{lo}, {hi}] -> [0, 1]");
            }
        }
    }
    Ok(())
}

/// Parse `args`, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
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
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
