use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lorentz_core::lab::Suite;
use lorentz_core::{Exponent, QuadratureSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "LORENTZ_LAB_SEED";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    /// `‖f‖_{p,q}` from `f*`.
    Quasinorm,
    /// `‖f‖_{(p,q)}` from `f**`.
    Starstar,
    /// `‖∇f‖_{p,q}`.
    Gradient,
    /// `‖u‖_{p,q} / (|Ω|^{1/n} ‖∇u‖_{p,q})`.
    PoincareRatio,
}

#[derive(Debug, Parser)]
#[command(name = "lorentz-lab", version, about = "Lorentz-space norms, counterexample gallery and inequality checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    #[arg(long, global = true, value_enum, default_value = "pretty")]
    pub format: Format,
    /// Relative tolerance of every quadrature.
    #[arg(long, global = true)]
    pub quad_rel_tol: Option<f64>,
    /// Absolute tolerance of every quadrature.
    #[arg(long, global = true)]
    pub quad_abs_tol: Option<f64>,
    /// Random seed; `LORENTZ_LAB_SEED` takes precedence.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the command output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Omit the generation timestamp so output is byte-stable.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a norm of a gallery item.
    Norm {
        /// Gallery id, e.g. "u_radial(r=1,alpha=1,n=2,p=2)".
        item: String,
        #[arg(long)]
        p: f64,
        #[arg(long, value_parser = parse_exponent)]
        q: Exponent,
        #[arg(long, value_enum, default_value = "quasinorm")]
        functional: Functional,
    },
    /// Strict-inclusion witness for `L^{p,q1} ⊊ L^{p,q2}`.
    Witness {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q1: f64,
        #[arg(long, value_parser = parse_exponent)]
        q2: Exponent,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        /// Directory for `<suite>.jsonl` and `<suite>.csv`.
        #[arg(long, default_value = "reports")]
        out_dir: PathBuf,
    },
    /// Tabulate a functional over a parameter grid.
    Sweep {
        /// Family name (u_slice, u_radial, v, power_singularity, up) or an id
        /// template with `{key}` placeholders.
        family: String,
        /// `key=v1,v2,...`; repeatable. The key `q` sets the secondary
        /// exponent; `p` sets both the item and the norm exponent.
        #[arg(long = "grid", value_parser = parse_axis)]
        grid: Vec<Axis>,
        #[arg(long, value_enum, default_value = "quasinorm")]
        functional: Functional,
    },
    /// List the standard gallery items with their closed forms.
    Gallery,
}

/// One sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    s.parse::<Exponent>().map_err(|e| e.to_string())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse::<Suite>().map_err(|e| e.to_string())
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    let (key, rest) = s.split_once('=').ok_or_else(|| format!("grid axis must look like key=v1,v2: {s:?}"))?;
    let key = key.trim();
    if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("bad grid key {key:?}"));
    }
    let values: Vec<String> = rest.split(',').map(|v| v.trim().to_string()).collect();
    for v in &values {
        parse_exponent(v).map_err(|_| format!("bad grid value {v:?} for {key}"))?;
    }
    Ok(Axis { key: key.to_string(), values })
}

/// Everything a run depends on, echoed into JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub q: Vec<Exponent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<Functional>,
    pub quad: QuadratureSpec,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// `seed_env` is the value of [`SEED_ENV`], if set.
    pub fn from_cli(cli: &Cli, seed_env: Option<&str>) -> Result<RunConfig, CliError> {
        let g = &cli.global;
        let mut quad = QuadratureSpec::default();
        if let Some(t) = g.quad_rel_tol {
            quad = quad.with_rel_tol(t)?;
        }
        if let Some(t) = g.quad_abs_tol {
            quad = quad.with_abs_tol(t)?;
        }
        let seed = match seed_env {
            Some(s) => s.trim().parse().map_err(|_| CliError::Usage(format!("{SEED_ENV} is not a seed: {s:?}")))?,
            None => g.seed.unwrap_or(DEFAULT_SEED),
        };
        let mut cfg = RunConfig {
            command: String::new(),
            item: None,
            p: Vec::new(),
            q: Vec::new(),
            grid: Vec::new(),
            functional: None,
            quad,
            seed,
            output: g.output.clone(),
            format: g.format,
        };
        match &cli.command {
            Command::Norm { item, p, q, functional } => {
                cfg.command = "norm".into();
                cfg.item = Some(item.clone());
                cfg.p = vec![*p];
                cfg.q = vec![*q];
                cfg.functional = Some(*functional);
            }
            Command::Witness { p, q1, q2, .. } => {
                cfg.command = "witness".into();
                cfg.p = vec![*p];
                cfg.q = vec![Exponent::from(*q1), *q2];
            }
            Command::Verify { suite, .. } => {
                cfg.command = format!("verify {}", suite.name());
            }
            Command::Sweep { family, grid, functional } => {
                cfg.command = "sweep".into();
                cfg.item = Some(family.clone());
                cfg.grid = grid.clone();
                cfg.functional = Some(*functional);
            }
            Command::Gallery => cfg.command = "gallery".into(),
        }
        Ok(cfg)
    }
}
