use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lyap_core::quadrature::{QuadratureRule, DEFAULT_TRUNCATION_SIGMAS};
use lyap_core::sampling::InstanceGenerator;
use lyap_core::verify::Suite;
use lyap_core::{validate_instance, MomentInstance, RawInstance};

use crate::error::CliError;

/// Multi-point Lyapunov exponents of the stochastic heat equation.
#[derive(Debug, Parser)]
#[command(name = "lyap", version)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Write results to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Seed for randomly generated instances.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    GaussLegendre,
    Trapezoid,
}

impl From<Rule> for QuadratureRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::GaussLegendre => QuadratureRule::GaussLegendre,
            Rule::Trapezoid => QuadratureRule::Trapezoid,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the exponent by all three routes.
    Gamma {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Largest accepted pairwise deviation relative to 1 + |γ|.
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
    /// Export the cluster trajectories, merge events and partition.
    Clusters {
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Run the randomized self-check suites.
    Verify {
        /// Instances per suite.
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Comma-separated subset of: triple, oracle, structure, recursion, momentum, quadrature.
        #[arg(long, value_delimiter = ',')]
        suites: Vec<Suite>,
    },
    /// Evaluate the moment by contour quadrature and compare its rate with γ.
    Moments {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Time scale T.
        #[arg(long = "T", allow_negative_numbers = true)]
        big_t: f64,
        /// Grid points per axis.
        #[arg(long)]
        points: Option<usize>,
        /// Window half-width in units of 1/sqrt(T t).
        #[arg(long, default_value_t = DEFAULT_TRUNCATION_SIGMAS)]
        truncation_sigmas: f64,
        /// Comma-separated contour abscissas, one per flattened point.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        offsets: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = Rule::GaussLegendre)]
        rule: Rule,
        /// Largest accepted |Im/Re| of the quadrature result.
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
    /// Tabulate γ over a grid of one parameter.
    Sweep {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Parameter to vary: `t` or `x<k>` with one-based k.
        #[arg(long)]
        vary: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        /// Number of evenly spaced grid values, endpoints included.
        #[arg(long)]
        steps: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// JSON file `{"t": .., "x": [..], "m": [..]}`.
    #[arg(long, conflicts_with_all = ["t", "x", "m"])]
    pub input: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Comma-separated locations.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    /// Comma-separated multiplicities.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub m: Option<Vec<i64>>,
}

impl InstanceArgs {
    fn given(&self) -> bool {
        self.input.is_some() || self.t.is_some() || self.x.is_some() || self.m.is_some()
    }

    pub fn load(&self) -> Result<MomentInstance, CliError> {
        if let Some(path) = &self.input {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::new("Io", format!("cannot read {}: {e}", path.display())))?;
            let raw: RawInstance = serde_json::from_str(&text)
                .map_err(|e| CliError::new("InvalidJson", e.to_string()))?;
            return Ok(validate_instance(raw.t, &raw.x, &raw.m)?);
        }
        match (self.t, &self.x, &self.m) {
            (Some(t), Some(x), Some(m)) => Ok(validate_instance(t, x, m)?),
            _ => Err(CliError::usage(
                "give either --input or all of --t, --x and --m",
            )),
        }
    }

    /// The given instance, or one drawn from `seed` when no source is given.
    pub fn load_or_sample(&self, seed: u64) -> Result<MomentInstance, CliError> {
        if self.given() {
            self.load()
        } else {
            Ok(InstanceGenerator::new(seed).sample())
        }
    }
}
