use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "dimtrunc",
    version,
    about = "Dimension-truncation studies for elliptic PDEs with random coefficients",
    long_about = "Dimension-truncation studies for elliptic PDEs with random coefficients.\n\n\
Exit status: 0 on success, 1 on usage or input errors, 2 when a linear solve \
fails to converge or a coefficient loses positivity, 3 when check-theory finds \
a violated inequality."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Truncation error of the mean solution for a lognormal coefficient
    /// a = exp(Σ y_j ψ_j) with β-Gaussian parameters.
    StudyLognormal(StudyArgs),
    /// Truncation error of the mean of G(u) = ∫ u² for an affine
    /// coefficient a = a0 + Σ y_j ψ_j with uniform parameters on [-1, 1].
    StudyAffineQoi(StudyArgs),
    /// H¹ errors of the P1 solver against u* = sin(πx₁) sin(πx₂).
    FemVerify(FemVerifyArgs),
    /// Weighted absolute moments C(α, β, ν) = E[exp(α|Y|) |Y|^ν] of the
    /// β-Gaussian law, by quadrature and, where known, in closed form.
    Moments(MomentsArgs),
    /// Generating vector of a rank-1 lattice rule.
    LatticeGen(LatticeArgs),
    /// Stechkin's tail bound, the discrete coefficient-perturbation bound
    /// and the β-uniform moment bound on randomized inputs.
    CheckTheory(CheckArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat key = value file; flags given on the command line override it.
    /// A manifest.txt written by an earlier run replays that run.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR", default_value = "dimtrunc-out")]
    pub out: PathBuf,
    /// Worker threads; 0 uses every available core.
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Decay exponent θ > 1 of the basis ψ_j = j^{-θ} sin(jπx₁) sin(jπx₂).
    /// Repeat or comma-separate to run several; one CSV per value
    /// [key field.theta, default 1.5,2,3].
    #[arg(long, value_name = "THETA", value_delimiter = ',')]
    pub theta: Vec<f64>,
    /// Seed of the random lattice shift [key study.seed].
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Shape β ≥ 1 of the parameter law exp(-|y|^β/β); 2 is the standard
    /// normal. Lognormal study only [key study.beta].
    #[arg(long, value_name = "BETA")]
    pub beta: Option<f64>,
    /// Mesh level m; the mesh width is h = 2^{-m} [key fem.level].
    #[arg(long, value_name = "M")]
    pub fem_level: Option<u32>,
    /// Reference dimension s' used in place of the infinite expansion
    /// [key study.s_ref].
    #[arg(long, value_name = "S")]
    pub s_ref: Option<usize>,
    /// Truncation dimensions, comma separated and increasing
    /// [key study.s_list].
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub s_list: Vec<usize>,
    /// Number of lattice nodes, a power of two [key study.nodes].
    #[arg(long, value_name = "N")]
    pub nodes: Option<u64>,
    /// Generating-vector construction: cbc or korobov [key lattice.generator].
    #[arg(long, value_name = "NAME")]
    pub generator: Option<String>,
    /// Korobov multiplier (odd); implies --generator korobov
    /// [key lattice.korobov].
    #[arg(long, value_name = "A")]
    pub korobov: Option<u64>,
    /// Map applied to shifted lattice points: tent or none
    /// [key lattice.transform].
    #[arg(long, value_name = "NAME")]
    pub transform: Option<String>,
    /// Record solve times in the wall_ms column (makes output
    /// non-reproducible) [key study.timings].
    #[arg(long)]
    pub timings: bool,
    /// Also write a gnuplot script plot.gp for the log-log error plot.
    #[arg(long)]
    pub emit_plot: bool,
}

#[derive(Debug, Args)]
pub struct FemVerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Mesh levels to solve on [key verify.levels, default 2,3,4,5,6].
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub levels: Vec<u32>,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Shape β ≥ 1 [key moments.beta, default 2].
    #[arg(long, value_name = "BETA")]
    pub beta: Option<f64>,
    /// Exponential weight α in [0, 1); α must be below 1 when β = 1
    /// [key moments.alpha, default 0].
    #[arg(long, value_name = "ALPHA")]
    pub alpha: Option<f64>,
    /// Power ν of |y| [key moments.nu, default 1].
    #[arg(long, value_name = "NU")]
    pub nu: Option<u32>,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of nodes, a power of two [key lattice.n, default 8192].
    #[arg(long, value_name = "N")]
    pub n: Option<u64>,
    /// Dimension [key lattice.s, default 512].
    #[arg(long, value_name = "S")]
    pub s: Option<usize>,
    /// Decay exponent behind the CBC weights γ_j = j^{-2θ}
    /// [key field.theta, default 2].
    #[arg(long, value_name = "THETA")]
    pub theta: Option<f64>,
    /// Use the Korobov vector (1, a, a², ...) mod n instead of CBC
    /// [key lattice.korobov].
    #[arg(long, value_name = "A")]
    pub korobov: Option<u64>,
    /// Write the shifted nodes as CSV to standard output instead of the
    /// vector [key lattice.emit_points].
    #[arg(long)]
    pub emit_points: bool,
    /// Seed of the random shift used by --emit-points [key study.seed].
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Map applied to emitted points: none or tent
    /// [key lattice.transform, default none].
    #[arg(long, value_name = "NAME")]
    pub transform: Option<String>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Seed for the random sequences and parameter draws [key check.seed].
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Randomized sequences for Stechkin's bound [key check.stechkin_cases,
    /// default 200].
    #[arg(long, value_name = "N")]
    pub cases: Option<usize>,
    /// Parameter draws per truncation dimension for the perturbation bound
    /// [key check.strang_draws, default 50].
    #[arg(long, value_name = "N")]
    pub draws: Option<usize>,
    /// Decay exponent of the lognormal field in the perturbation bound
    /// [key field.theta, default 2].
    #[arg(long, value_name = "THETA")]
    pub theta: Option<f64>,
    /// Mesh level for the perturbation bound [key fem.level, default 4].
    #[arg(long, value_name = "M")]
    pub fem_level: Option<u32>,
}
