mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rcm_core::rcm_sim::Kernel;
use rcm_core::Rational;

#[derive(Parser, Debug)]
#[command(
    name = "rcm",
    version,
    about = "Subgraph count asymptotics and simulation for the random-connection model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format (defaults: csv for census, json otherwise)
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,

    /// Largest partition grid (n·r cells) to enumerate
    #[arg(long, global = true, default_value_t = rcm_core::partitions::DEFAULT_BUDGET)]
    pub budget: usize,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write output here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List or count set partitions of the n×r grid
    Enumerate(EnumerateArgs),
    /// Diagram point set and its upper hull
    Hull(HullArgs),
    /// Count templates with r cores and m endpoints
    Census(CensusArgs),
    /// Phase and exponents for a decay exponent alpha
    Classify(ClassifyArgs),
    /// Monte Carlo distribution of the subgraph count
    Simulate(SimulateArgs),
    /// Moment or cumulant from the diagram sum
    Moments(MomentsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    All,
    Nonflat,
    Cnf,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long, value_enum, default_value = "cnf")]
    pub class: ClassArg,
    /// Only tally partitions by block count
    #[arg(long)]
    pub counts: bool,
}

/// A template given inline or read from a file.
#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct GraphSource {
    /// Template as `r=<int> m=<int> edges=a-b,...`
    #[arg(long)]
    pub graph: Option<String>,
    /// File holding a template description
    #[arg(long)]
    pub graph_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HullArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub n: usize,
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub m: usize,
    /// graph6 file of connected graphs on r+m vertices
    #[arg(long)]
    pub graph6: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Decay exponent as p/q
    #[arg(long, value_parser = parse_rational)]
    pub alpha: Rational,
    /// Also report the growth order of the n-th cumulant
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    /// Dimension of the torus
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Torus side length
    #[arg(long, default_value_t = 1.0)]
    pub l: f64,
    /// Intensity of the point process
    #[arg(long)]
    pub lambda: f64,
    /// constant, indicator:<r0> or exponential:<s>
    #[arg(long, value_parser = parse_kernel, default_value = "constant")]
    pub kernel: Kernel,
    /// Connection scale c
    #[arg(long, conflicts_with = "alpha", required_unless_present = "alpha")]
    pub c: Option<f64>,
    /// Use c = lambda^(-alpha), alpha given as p/q
    #[arg(long, value_parser = parse_rational)]
    pub alpha: Option<Rational>,
    /// Endpoint locations, e.g. "0.5,0.5;0.1,0.2"
    #[arg(long, value_parser = parse_points)]
    pub endpoints: Option<Vec<Vec<f64>>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    /// Add the distance to the Poisson law with the computed mean count
    #[arg(long)]
    pub gof: bool,
    /// Monte Carlo samples for the mean used by --gof
    #[arg(long, default_value_t = 200_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Moment,
    Cumulant,
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "cumulant")]
    pub kind: KindArg,
    /// Monte Carlo samples per diagram for non-constant kernels
    #[arg(long, default_value_t = 200_000)]
    pub samples: usize,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    let (p, q) = s
        .split_once('/')
        .ok_or_else(|| format!("`{s}` is not a rational literal p/q"))?;
    let p: i64 = p.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
    let q: i64 = q.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
    if q == 0 {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(Rational::new(p, q))
}

fn parse_kernel(s: &str) -> Result<Kernel, String> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let num = |a: Option<&str>| -> Result<f64, String> {
        a.ok_or_else(|| format!("kernel `{name}` needs a parameter, e.g. `{name}:0.5`"))?
            .parse()
            .map_err(|_| format!("bad kernel parameter in `{s}`"))
    };
    match name {
        "constant" if arg.is_none() => Ok(Kernel::Constant),
        "indicator" => Ok(Kernel::Indicator { r0: num(arg)? }),
        "exponential" => Ok(Kernel::Exponential { s: num(arg)? }),
        _ => Err(format!(
            "unknown kernel `{s}` (constant, indicator:<r0>, exponential:<s>)"
        )),
    }
}

fn parse_points(s: &str) -> Result<Vec<Vec<f64>>, String> {
    s.split(';')
        .map(|p| {
            p.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| format!("bad coordinate `{x}` in `{s}`"))
                })
                .collect()
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
