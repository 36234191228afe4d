use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "phantom", version, about = "Decay series, spectra and pseudospectra of OTOC transfer matrices")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Arithmetic backend for iterations.
    #[arg(long, global = true, value_enum, default_value_t = BackendKind::Float)]
    pub backend: BackendKind,
    /// Working precision in bits for the float backend and special functions.
    #[arg(long, global = true, default_value_t = 256)]
    pub precision: u32,
    /// Seed for random vectors and Monte Carlo.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write one file per dataset here instead of printing to stdout.
    #[arg(long, global = true, env = "PHANTOM_OUT_DIR")]
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Rational,
    Float,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Obc,
    Pbc,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairArg {
    Otoc,
    Random,
    Exp,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Size {
    /// Number of qudits (open/periodic chain) or walk sites.
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    /// Local dimension.
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    /// Last time step; defaults depend on the command.
    #[arg(long)]
    pub t_max: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// OTOC on the open chain.
    ObcOtoc {
        #[command(flatten)]
        #[serde(flatten)]
        size: Size,
        /// Qudit the operator is measured on.
        #[arg(long, default_value_t = 1)]
        j: usize,
    },
    /// OTOC on the periodic chain.
    PbcOtoc {
        #[command(flatten)]
        #[serde(flatten)]
        size: Size,
        #[arg(long, default_value_t = 1)]
        j: usize,
    },
    /// Left-bath absorption of the biased walk: exact and Monte Carlo.
    RandomWalk {
        #[command(flatten)]
        #[serde(flatten)]
        size: Size,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
    /// Two-diagonal Jordan block with p_k = μ^{-(k-1)}, v = e₁.
    Jordan {
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long, default_value = "3/10")]
        delta: String,
        #[arg(long, default_value = "1/2")]
        sigma: String,
        #[arg(long, default_value = "1")]
        mu: String,
        #[arg(long)]
        t_max: Option<usize>,
    },
    /// Open chain with exponentially localised p_k = μ^{-k}, v = e₁.
    Rescaled {
        #[command(flatten)]
        #[serde(flatten)]
        size: Size,
        #[arg(long, default_value = "27/20")]
        mu: String,
    },
    /// Analytic eigenvalues.
    Spectrum {
        #[arg(long, value_enum, default_value_t = Model::Obc)]
        model: Model,
        #[command(flatten)]
        #[serde(flatten)]
        size: Size,
    },
    /// ε-pseudospectrum of the transient block on a rectangular grid.
    Pseudospectrum {
        #[arg(long, value_enum, default_value_t = Model::Obc)]
        model: Model,
        #[command(flatten)]
        #[serde(flatten)]
        size: Size,
        #[arg(long, default_value_t = 1e-5)]
        eps: f64,
        /// Grid points per axis.
        #[arg(long, default_value_t = 201)]
        grid: usize,
    },
    /// Plateau, late rate, transition time and ordering verdict.
    Rates {
        #[arg(long, value_enum, default_value_t = Model::Obc)]
        model: Model,
        #[command(flatten)]
        #[serde(flatten)]
        size: Size,
        #[arg(long, value_enum, default_value_t = PairArg::Otoc)]
        pair: PairArg,
        /// μ for the exponentially localised pair.
        #[arg(long, default_value = "27/20")]
        mu: String,
        /// λ_eff level defining the transition time.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value_t = 10)]
        window: usize,
        /// Iterate to this multiple of n.
        #[arg(long, default_value_t = 3)]
        horizon: usize,
    },
    /// Dataset behind figure N (1–8).
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=8))]
        number: u8,
        /// System size; each figure has its own default.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long)]
        t_max: Option<usize>,
        /// Grid points per axis for pseudospectrum figures.
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
}
