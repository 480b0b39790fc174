use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use resdeconv_core::{ImageFormat, KernelFamily};

#[derive(Debug, Parser)]
#[command(name = "resdeconv", version, about = "Non-blind deconvolution toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Blur an image with a kernel and add seeded Gaussian noise.
    Degrade(DegradeArgs),
    /// Restore one or more images with a known kernel.
    Deconv(DeconvArgs),
    /// Print PSNR/SSIM (and optionally losses) as a CSV row.
    Eval(EvalArgs),
    /// Compare the fast solvers against dense-matrix oracles on random instances.
    OracleCheck(OracleArgs),
    /// Generate a blur kernel.
    KernelGen(KernelGenArgs),
    /// Build a directory of (clear, kernel, blurry) triples with a CSV index.
    MakeTestset(TestsetArgs),
    /// Export residues, series components and residue energies of an IRD run.
    Trace(TraceArgs),
    /// Write image pairs and their reference loss values for cross-checking.
    LossFixture(LossFixtureArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Ird,
    Wiener,
    Admm,
    Apg,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ird => "ird",
            Method::Wiener => "wiener",
            Method::Admm => "admm",
            Method::Apg => "apg",
        }
    }
}

#[derive(Debug, Args)]
pub struct DegradeArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub kernel: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Output format (pgm8, pgm16, png, txt); defaults to the input's.
    #[arg(long)]
    pub format: Option<ImageFormat>,
}

#[derive(Debug, Args)]
pub struct DeconvArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    /// Input image; repeat for batch runs.
    #[arg(long, required = true)]
    pub image: Vec<PathBuf>,
    #[arg(long)]
    pub kernel: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Regularization for ird and wiener.
    #[arg(long, default_value_t = 0.01)]
    pub sigma: f64,
    /// Number of residual iterations N for ird.
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    /// Prior patch file (kernel text layout); identity when omitted.
    #[arg(long)]
    pub fx: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.25)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    /// Use the 2λt gradient step in apg instead of 2t.
    #[arg(long)]
    pub paper_literal_step: bool,
    /// Write IRD residues and energies here (one subdirectory per image).
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
    /// Iterations at which residue images are written.
    #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000")]
    pub trace_at: Vec<usize>,
    /// Output format; defaults to each input's.
    #[arg(long)]
    pub format: Option<ImageFormat>,
    /// Worker threads across images.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub restored: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    /// Append content, edge and total loss columns.
    #[arg(long)]
    pub loss: bool,
    #[arg(long, default_value_t = resdeconv_core::metrics::DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = resdeconv_core::metrics::DEFAULT_GAMMA)]
    pub gamma: f64,
    /// Print a header line first.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub kernel: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub sigma: f64,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub fx: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KernelGenArgs {
    #[arg(long, default_value = "trajectory")]
    pub family: KernelFamily,
    #[arg(long, default_value_t = 21)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exact disk radius; overrides --size and --seed for the disk family.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TestsetArgs {
    #[arg(long, required = true)]
    pub image: Vec<PathBuf>,
    /// Number of generated kernels, each applied to every image.
    #[arg(long, default_value_t = 8)]
    pub kernels: usize,
    #[arg(long, default_value_t = 21)]
    pub size: usize,
    #[arg(long, default_value = "trajectory")]
    pub family: KernelFamily,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "pgm16")]
    pub format: ImageFormat,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub kernel: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    #[arg(long)]
    pub fx: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000")]
    pub at: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LossFixtureArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub count: usize,
    #[arg(long, default_value_t = 35)]
    pub size: usize,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Redirect outputs; the recorded --out is used otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
}
