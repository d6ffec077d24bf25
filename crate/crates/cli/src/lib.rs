//! The `lift` command-line front end.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use lifting_core::solver::Preconditioning;
use lifting_core::whitney::SampleMode;

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "lift", version, about = "Lifted variational problems on cubical grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curve of fastest descent, compared against the cycloid.
    Brachistochrone(BrachistochroneArgs),
    /// Total variation denoising of a gray image.
    Denoise(DenoiseArgs),
    /// Disparity from a cost volume or a rectified image pair.
    Stereo(StereoArgs),
    /// Dense correspondences between two color images.
    Register(RegisterArgs),
    /// Runs the built-in property checks.
    Selftest,
}

/// Options shared by all solving subcommands.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat `key = value` file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Relative residual tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Primal steps are multiplied, dual steps divided by this.
    #[arg(long)]
    pub primal_weight: Option<f64>,
    /// `diagonal` or `scalar`.
    #[arg(long)]
    pub preconditioning: Option<PreconditioningArg>,
    /// `vertices`, `centers`, `midpoints` or `midpoints:K`.
    #[arg(long)]
    pub samples: Option<SamplesArg>,
    /// Adds the wall time to the report, which then differs between runs.
    #[arg(long)]
    pub wall_time: bool,
}

#[derive(Debug, Args)]
pub struct BrachistochroneArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Lattice vertices along x and y, e.g. `25x14`.
    #[arg(long)]
    pub grid: Option<Pair<usize>>,
    /// Physical width and height of the box, e.g. `1x1`.
    #[arg(long)]
    pub size: Option<Pair<f64>>,
    /// Gravitational acceleration.
    #[arg(long)]
    pub g: Option<f64>,
    /// Height of the top lattice row; one cell height by default.
    #[arg(long)]
    pub y_min: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// PGM, PPM or PNG input; color images are averaged to gray.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<usize>,
    /// Label range `min:max` in image units.
    #[arg(long)]
    pub range: Option<Range>,
    /// Weight of the quadratic data term.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StereoArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Cost volume file (`CVOL` format).
    #[arg(long)]
    pub volume: Option<PathBuf>,
    /// Left image of a rectified pair, used when no volume is given.
    #[arg(long)]
    pub left: Option<PathBuf>,
    #[arg(long)]
    pub right: Option<PathBuf>,
    /// Disparity levels for an image pair.
    #[arg(long)]
    pub labels: Option<usize>,
    /// Weight of the matching cost against the regularizer.
    #[arg(long)]
    pub weight: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RegisterArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub fixed: Option<PathBuf>,
    #[arg(long)]
    pub moving: Option<PathBuf>,
    /// Weight of the area term added to the color distance.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// `identity` maps the image border onto itself, `free` leaves it open.
    #[arg(long)]
    pub boundary: Option<BoundaryArg>,
}

/// `AxB`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pair<T>(pub T, pub T);

impl<T: FromStr> FromStr for Pair<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected AxB, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<T>().map_err(|_| format!("bad number {v:?} in {s:?}"));
        Ok(Pair(parse(a)?, parse(b)?))
    }
}

/// `min:max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range(pub f64, pub f64);

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected min:max, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad number {v:?} in {s:?}"));
        Ok(Range(parse(a)?, parse(b)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PreconditioningArg(pub Preconditioning);

impl FromStr for PreconditioningArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "diagonal" => Ok(Self(Preconditioning::Diagonal)),
            "scalar" => Ok(Self(Preconditioning::Scalar)),
            _ => Err(format!("unknown preconditioning {s:?}, expected diagonal or scalar")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplesArg(pub SampleModeSpec);

/// Sample placement independent of the problem's dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleModeSpec {
    Vertices,
    Centers,
    Midpoints(usize),
}

impl SampleModeSpec {
    pub fn resolve(self, domain_dims: usize) -> SampleMode {
        match self {
            SampleModeSpec::Vertices => SampleMode::Vertices,
            SampleModeSpec::Centers => SampleMode::Centers,
            SampleModeSpec::Midpoints(per_edge) => SampleMode::Codomain {
                domain_dims,
                per_edge,
            },
        }
    }
}

impl FromStr for SamplesArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mode = match s.split_once(':') {
            None if s == "vertices" => SampleModeSpec::Vertices,
            None if s == "centers" => SampleModeSpec::Centers,
            None if s == "midpoints" => SampleModeSpec::Midpoints(1),
            Some(("midpoints", k)) => {
                let k: usize = k.parse().map_err(|_| format!("bad midpoint count {k:?}"))?;
                if k == 0 {
                    return Err("midpoint count must be positive".into());
                }
                SampleModeSpec::Midpoints(k)
            }
            _ => return Err(format!("unknown sample mode {s:?}")),
        };
        Ok(Self(mode))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryArg {
    Identity,
    Free,
}

impl FromStr for BoundaryArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "identity" => Ok(Self::Identity),
            "free" => Ok(Self::Free),
            _ => Err(format!("unknown boundary {s:?}, expected identity or free")),
        }
    }
}

/// Caps the worker pool from `LIFT_THREADS`.
pub fn init_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("LIFT_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("LIFT_THREADS must be a positive integer, got {value:?}")))?;
    // a second initialization in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `argv` and runs the subcommand; the returned lines go to stdout.
pub fn run<I, T>(argv: I) -> CliResult<Vec<String>>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                return Ok(vec![e.render().to_string().trim_end().to_string()]);
            }
            _ => return Err(CliError::Usage(e.render().to_string().trim_end().to_string())),
        },
    };
    init_threads()?;
    match cli.command {
        Command::Brachistochrone(a) => commands::brachistochrone(&a),
        Command::Denoise(a) => commands::denoise(&a),
        Command::Stereo(a) => commands::stereo(&a),
        Command::Register(a) => commands::register(&a),
        Command::Selftest => commands::selftest(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_parsers() {
        assert_eq!("25x14".parse::<Pair<usize>>().unwrap(), Pair(25, 14));
        assert!("25-14".parse::<Pair<usize>>().is_err());
        assert_eq!("0:1.5".parse::<Range>().unwrap(), Range(0.0, 1.5));
        assert_eq!(
            "midpoints:3".parse::<SamplesArg>().unwrap().0,
            SampleModeSpec::Midpoints(3)
        );
        assert!("midpoints:0".parse::<SamplesArg>().is_err());
        assert!("corners".parse::<SamplesArg>().is_err());
        assert_eq!("free".parse::<BoundaryArg>().unwrap(), BoundaryArg::Free);
    }
}
