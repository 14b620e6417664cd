use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qrel_core::format::parse_key_values;

use crate::InputError;

#[derive(Parser, Debug)]
#[command(name = "qrel", version, about = "Extended quantum relative entropy and jump verification")]
pub struct Cli {
    /// Plain-text `key = value` file; flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print D(ρ‖σ) with 12 decimals, or `inf`.
    Div {
        rho: PathBuf,
        sigma: PathBuf,
        #[arg(long)]
        rank_tol: Option<f64>,
    },
    /// Print the extended von Neumann entropy of a positive operator.
    Entropy { rho: PathBuf },
    /// Apply a channel to a positive operator and print the image as JSON.
    Apply {
        /// Channel id or channel file.
        channel: String,
        rho: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite.
    Verify {
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
        /// Dimension range `lo..hi` (inclusive).
        #[arg(long)]
        dims: Option<String>,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        m_max: Option<usize>,
        #[arg(long)]
        slack: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the jump of a family before and after a channel.
    Jump {
        /// Family descriptor file.
        family: PathBuf,
        #[arg(long)]
        channel: Option<String>,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        slack: Option<f64>,
        /// Write an SVG plot of both divergence sequences.
        #[arg(long, value_name = "FILE")]
        plot: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Replay the proof checks for a family and a channel.
    Trace {
        family: PathBuf,
        #[arg(long)]
        channel: Option<String>,
        #[arg(long)]
        m_max: Option<usize>,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        slack: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Default)]
pub struct Common {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report destination; written atomically.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

/// Entries of the config file, consumed key by key.
#[derive(Debug, Default)]
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

const KEYS: &[&str] = &[
    "seed", "trials", "dims", "nmax", "n_max", "window", "m_max", "slack", "rank_tol", "out", "format", "channel",
];

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, InputError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
        let entries = parse_key_values(&text)?;
        if let Some(k) = entries.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(InputError(format!(
                "unknown config key {k:?}; expected one of {}",
                KEYS.join(", ")
            )));
        }
        Ok(Self { entries })
    }

    /// Flag value if given, else the config entry under any of `keys`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, keys: &[&str]) -> Result<Option<T>, InputError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        for k in keys {
            if let Some(v) = self.entries.get(*k) {
                return v
                    .parse()
                    .map(Some)
                    .map_err(|e| InputError(format!("config key {k} = {v:?}: {e}")));
            }
        }
        Ok(None)
    }
}

/// Parses `lo..hi` or a single dimension.
pub fn parse_dims(s: &str) -> Result<(usize, usize), InputError> {
    let num = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|_| InputError(format!("bad dimension {x:?} in {s:?}")))
    };
    match s.split_once("..") {
        Some((lo, hi)) => Ok((num(lo)?, num(hi.trim_start_matches('='))?)),
        None => {
            let d = num(s)?;
            Ok((d, d))
        }
    }
}

pub fn positive_tol(name: &str, x: Option<f64>) -> Result<Option<f64>, InputError> {
    match x {
        Some(v) if !(v > 0.0 && v.is_finite()) => Err(InputError(format!("{name} must be positive, got {v}"))),
        _ => Ok(x),
    }
}
