//! Command-line definitions.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::io::Layout;
use crate::metrics::Format;

#[derive(Debug, Parser)]
#[command(name = "tubal-bench", version, about = "Experiments with tubal tensor sampling, decompositions and robust recovery")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Base seed; replication `i` uses `seed + i`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of replications.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    /// Metrics destination; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for slice-parallel kernels.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Randomized Gram products `U_r^T * U_r` from sampled horizontal slices.
    BenchMultiply(MultiplyArgs),
    /// t-CX and t-CUR approximations against the truncated t-SVD.
    Decompose(DecomposeArgs),
    /// Robust PCA by full ADMM and by CUR t-NN.
    Rpca(RpcaArgs),
    /// Tensor completion by full ADMM and by CUR t-NN.
    Complete(CompleteArgs),
    /// Write a synthetic tensor file.
    Gen(GenArgs),
    /// Stack a directory of binary PGM frames into a tensor file.
    ConvertPgm(ConvertArgs),
}

/// Slice budget: a count or `auto` for `ceil(r ln r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slices {
    Auto,
    Count(usize),
}

impl FromStr for Slices {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Slices::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("expected a positive count or `auto`, got {s:?}")),
            Ok(n) => Ok(Slices::Count(n)),
        }
    }
}

impl Slices {
    pub fn resolve(self, rank: usize) -> usize {
        match self {
            Slices::Count(n) => n,
            Slices::Auto => ((rank as f64) * (rank as f64).ln()).ceil().max(1.0) as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MultiplyMethod {
    Uniform,
    Leverage,
}

#[derive(Debug, Clone, Args)]
pub struct MultiplyArgs {
    /// Source tensor file; a sparse replicated tensor is generated otherwise.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub n1: usize,
    #[arg(long, default_value_t = 200)]
    pub n2: usize,
    #[arg(long, default_value_t = 5)]
    pub n3: usize,
    #[arg(long, default_value_t = 0.01)]
    pub density: f64,
    /// Width `r` of the left singular factor `U_r`.
    #[arg(long, default_value_t = 50)]
    pub rank: usize,
    #[arg(long, default_value = "auto")]
    pub slices: Slices,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "uniform,leverage")]
    pub methods: Vec<MultiplyMethod>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecompMethod {
    Cx,
    Cur,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scores {
    /// Leverage scores from the full t-SVD.
    Deterministic,
    /// Leverage scores from a Gaussian sketch.
    Randomized,
    /// Uniform without replacement.
    Uniform,
    /// Squared slice norms.
    Norm,
}

#[derive(Debug, Clone, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 60)]
    pub n1: usize,
    #[arg(long, default_value_t = 50)]
    pub n2: usize,
    #[arg(long, default_value_t = 8)]
    pub n3: usize,
    /// Relative Frobenius noise added to the synthetic low-rank tensor.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Target tubal rank, also the rank of the synthetic tensor.
    #[arg(long, default_value_t = 5)]
    pub rank: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "cx")]
    pub methods: Vec<DecompMethod>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "deterministic,randomized")]
    pub scores: Vec<Scores>,
    /// Lateral slice counts.
    #[arg(long, value_delimiter = ',', default_value = "25,35")]
    pub c: Vec<usize>,
    /// Horizontal slice counts for t-CUR; defaults to each `c`.
    #[arg(long, value_delimiter = ',')]
    pub l: Vec<usize>,
    /// Directory for the factors of the first replication.
    #[arg(long)]
    pub save_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMethod {
    Full,
    Cur,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurSamplingArg {
    Leverage,
    Uniform,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "full,cur")]
    pub methods: Vec<SolveMethod>,
    /// Rank used to score slices in CUR t-NN.
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    #[arg(long, default_value_t = 20)]
    pub c: usize,
    #[arg(long, default_value_t = 20)]
    pub l: usize,
    #[arg(long, value_enum, default_value_t = CurSamplingArg::Leverage)]
    pub sampling: CurSamplingArg,
    /// Sparsity weight; `1/sqrt(max(n1, n2) n3)` of each solved tensor when omitted.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    /// Per-solve wall-clock limit in seconds.
    #[arg(long, default_value_t = 1200.0)]
    pub time_limit: f64,
    /// Ground truth tensor for the rse column.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Directory for the recovered tensors of the first replication.
    #[arg(long)]
    pub save_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RpcaArgs {
    /// Observed tensor; a synthetic instance with known truth is generated otherwise.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub n1: usize,
    #[arg(long, default_value_t = 50)]
    pub n2: usize,
    #[arg(long, default_value_t = 5)]
    pub n3: usize,
    /// Corrupted fraction of the synthetic instance.
    #[arg(long, default_value_t = 0.05)]
    pub fraction: f64,
    #[arg(long, default_value_t = 5.0)]
    pub magnitude: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompleteArgs {
    /// Observed tensor (zero off the mask); a synthetic low-rank tensor is generated otherwise.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Observation mask file.
    #[arg(long, conflicts_with = "mask_rate")]
    pub mask: Option<PathBuf>,
    /// Bernoulli observation rate used when no mask file is given.
    #[arg(long)]
    pub mask_rate: Option<f64>,
    #[arg(long, default_value_t = 40)]
    pub n1: usize,
    #[arg(long, default_value_t = 40)]
    pub n2: usize,
    #[arg(long, default_value_t = 5)]
    pub n3: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Gaussian,
    Lowrank,
    Sparse,
    Rpca,
    Mask,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    /// Tensor file to write (the observed tensor for `rpca`).
    #[arg(long)]
    pub save: PathBuf,
    /// Clean tensor for `lowrank` and `rpca`.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
    /// Corrupted positions for `rpca`.
    #[arg(long)]
    pub mask_out: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub n1: usize,
    #[arg(long, default_value_t = 50)]
    pub n2: usize,
    #[arg(long, default_value_t = 5)]
    pub n3: usize,
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.01)]
    pub density: f64,
    #[arg(long, default_value_t = 0.05)]
    pub fraction: f64,
    #[arg(long, default_value_t = 5.0)]
    pub magnitude: f64,
    /// Observation rate for `mask`.
    #[arg(long, default_value_t = 0.5)]
    pub rate: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ConvertArgs {
    /// Directory of `.pgm` frames, read in lexicographic order.
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Layout::Frontal)]
    pub layout: Layout,
    #[arg(long)]
    pub save: PathBuf,
}
