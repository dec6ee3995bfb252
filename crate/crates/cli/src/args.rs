//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "fractal", version, about = "Net measures, prescribed-dimension sets and multifractal measures")]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dyadic net measure of a digital set, with an optional optimal cover.
    Netmeasure(NetmeasureArgs),
    /// Nested family of sets with prescribed box dimensions.
    Family(FamilyArgs),
    /// Self-similar systems: dimensions, entropy map and rasterisation.
    #[command(subcommand)]
    Ifs(IfsCommand),
    /// Build atomic measures.
    #[command(subcommand)]
    Construct(ConstructCommand),
    /// Local dimensions, level sets and spectra.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Fortet-Mourier distance and the enlargement probe.
    #[command(subcommand)]
    Dist(DistCommand),
    /// Run one pipeline from a key=value config file.
    Run(RunArgs),
    /// Run the acceptance criteria and print one line per criterion.
    Acceptance(AcceptanceArgs),
}

#[derive(Args, Debug)]
pub struct NetmeasureArgs {
    #[arg(long)]
    pub set: PathBuf,
    #[arg(long)]
    pub s: f64,
    /// Covers use cubes of depth at least this.
    #[arg(long)]
    pub delta_depth: u32,
    /// Write the optimal cover here.
    #[arg(long)]
    pub cover: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    #[arg(long)]
    pub set: PathBuf,
    /// Comma-separated increasing exponents.
    #[arg(long)]
    pub alphas: String,
    #[arg(long)]
    pub kmax: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum IfsCommand {
    /// Similarity dimension.
    Dim(RatioSource),
    /// Entropy dimension of a frequency vector.
    Lambda {
        #[command(flatten)]
        source: RatioSource,
        #[arg(long)]
        p: String,
    },
    /// Constrained entropy maximum f(λ).
    F {
        #[command(flatten)]
        source: RatioSource,
        #[arg(long)]
        lambda: f64,
    },
    /// Inverse g(α) of f.
    G {
        #[command(flatten)]
        source: RatioSource,
        #[arg(long)]
        alpha: f64,
    },
    /// Dyadic rasterisation of the attractor.
    Raster {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct RatioSource {
    /// Comma-separated contraction ratios.
    #[arg(long)]
    pub ratios: Option<String>,
    /// System file; its ratios are used.
    #[arg(long)]
    pub system: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ConstructCommand {
    /// Cover measure concentrated near a target set.
    Prop41 {
        #[arg(long)]
        k: PathBuf,
        #[arg(long)]
        e: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spread each atom into a cloud of grid points.
    Spray {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        k: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        rho: f64,
        /// One count, or one per atom.
        #[arg(long)]
        counts: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Geometric mixture with weights 2^-k.
    Mixture {
        /// Comma-separated measure files.
        #[arg(long)]
        measures: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// (1 - t) ν + t μ0.
    Blend {
        #[arg(long)]
        nu: PathBuf,
        #[arg(long)]
        mu0: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Mode {
    Fit,
    Lower,
}

#[derive(Args, Debug)]
pub struct CoarseArgs {
    #[arg(long)]
    pub mu: PathBuf,
    #[arg(long)]
    pub k: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Radius depths `lo,hi`.
    #[arg(long)]
    pub radius_window: String,
    #[arg(long, value_enum, default_value_t = Mode::Fit)]
    pub mode: Mode,
}

#[derive(Subcommand, Debug)]
pub enum AnalyzeCommand {
    /// Local-dimension estimates at every point of K.
    Localdim {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        k: PathBuf,
        /// Radius depths `lo,hi`.
        #[arg(long)]
        window: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Points of K whose estimate is within eps of alpha.
    Levelset {
        #[command(flatten)]
        coarse: CoarseArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Box dimension of the coarse level sets over an exponent grid.
    Spectrum {
        #[command(flatten)]
        coarse: CoarseArgs,
        /// `lo:hi:step` or a comma list.
        #[arg(long, allow_hyphen_values = true)]
        alphas: String,
        /// Box-count depths `lo,hi`.
        #[arg(long)]
        box_window: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower L^q spectrum.
    Lq {
        #[arg(long)]
        mu: PathBuf,
        /// `lo:hi:step` or a comma list.
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long)]
        window: String,
        #[arg(long, value_enum, default_value_t = Mode::Fit)]
        estimator: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Legendre transform of a curve over q.
    Legendre {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        alphas: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// L^q spectrum of a typical measure on a set of box dimension s.
    Reference {
        #[arg(long)]
        s: f64,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum DistCommand {
    /// Fortet-Mourier distance.
    Fm {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
    },
    /// μ(E) - ν(E(γ)) together with the distance.
    Probe {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        gamma: f64,
    },
}

#[derive(Args, Debug)]
pub struct RunArgs {
    pub config: PathBuf,
}

#[derive(Args, Debug)]
pub struct AcceptanceArgs {
    /// Comma-separated criterion numbers (default: all).
    #[arg(long)]
    pub only: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
