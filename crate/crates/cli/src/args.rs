use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "hweyl",
    version,
    about = "Weyl-law error terms on Heisenberg manifolds"
)]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// `key=value` file supplying defaults; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for sampling and evaluation.
    #[arg(long, global = true, value_parser = parse_threads)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Signed,
    Absolute,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Table of τ_l(n) and d(n) for n ≤ limit.
    Tau {
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long, default_value_t = 1000, value_parser = parse_count_u64)]
        limit: u64,
    },
    /// Truncated series s_{k;v}(τ_l; y) with a convergence table.
    Series {
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        v: usize,
        /// Cutoff; defaults to the cap for this k.
        #[arg(long)]
        y: Option<f64>,
        /// Number of halvings of y listed in the convergence table.
        #[arg(long, default_value_t = 4)]
        doublings: u32,
    },
    /// R_ψ(x) and its normalisation at stratified points.
    ErrorTerm {
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long, default_value_t = 100.0)]
        xmin: f64,
        #[arg(long, default_value_t = 1e4)]
        xmax: f64,
        #[arg(long, default_value_t = 1000, value_parser = parse_count)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Exact eigenvalue counts against the ψ-sum.
    ExactCheck {
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long, default_value_t = 100.0)]
        xmin: f64,
        #[arg(long, default_value_t = 2000.0)]
        xmax: f64,
        #[arg(long, default_value_t = 500, value_parser = parse_count)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Mean square of R_ψ minus its truncated cosine expansion.
    Expansion {
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long = "T", default_value_t = 1e4)]
        #[serde(rename = "T")]
        t: f64,
        /// Cutoff; defaults to T/log²T.
        #[arg(long)]
        y: Option<f64>,
        #[arg(long, default_value_t = 10_000, value_parser = parse_count)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Power moments over [T, 2T], or absolute-moment growth with --A.
    Moments {
        #[arg(long, default_value_t = 1)]
        l: u32,
        /// Integer moment order (default 2).
        #[arg(long, conflicts_with = "a")]
        k: Option<u32>,
        /// Real exponent of |R|; runs the growth report over the T list.
        #[arg(long = "A")]
        #[serde(rename = "A")]
        a: Option<f64>,
        /// Height, or comma-separated heights with --A.
        #[arg(long = "T", value_delimiter = ',', default_value = "1e5")]
        #[serde(rename = "T")]
        t: Vec<f64>,
        #[arg(long, default_value_t = 100_000, value_parser = parse_count)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Signed)]
        mode: ModeArg,
        /// Series cutoff for the predicted constant; defaults to the cap for k.
        #[arg(long)]
        y: Option<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Histogram of the normalised error over [t-lo, t-hi].
    Distribution {
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long = "t-lo", default_value_t = 1e5)]
        #[serde(rename = "t-lo")]
        t_lo: f64,
        #[arg(long = "t-hi", default_value_t = 2e5)]
        #[serde(rename = "t-hi")]
        t_hi: f64,
        #[arg(long, default_value_t = 100_000, value_parser = parse_count)]
        samples: usize,
        #[arg(long, default_value_t = 50, value_parser = parse_count)]
        bins: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Constants for one l: Weyl coefficient and moment coefficients for k = 2..9.
    Report {
        #[arg(long, default_value_t = 1)]
        l: u32,
        /// Series cutoff; defaults to the cap for each k.
        #[arg(long)]
        y: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Tau { .. } => "tau",
            Self::Series { .. } => "series",
            Self::ErrorTerm { .. } => "error-term",
            Self::ExactCheck { .. } => "exact-check",
            Self::Expansion { .. } => "expansion",
            Self::Moments { .. } => "moments",
            Self::Distribution { .. } => "distribution",
            Self::Report { .. } => "report",
        }
    }
}

/// Accepts `200000` as well as `2e5`.
fn parse_count(s: &str) -> Result<usize, String> {
    parse_count_u64(s).and_then(|v| usize::try_from(v).map_err(|e| e.to_string()))
}

fn parse_count_u64(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !v.is_finite() || v < 0.0 || v.fract() != 0.0 || v > 1e15 {
        return Err(format!("'{s}' is not a non-negative integer"));
    }
    Ok(v as u64)
}

fn parse_threads(s: &str) -> Result<usize, String> {
    match parse_count(s)? {
        0 => Err("thread count must be at least 1".into()),
        n => Ok(n),
    }
}
