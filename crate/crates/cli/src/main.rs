//! `quasiline`: batch scenarios over the core library, writing CSV reports
//! and a manifest into an output directory.
//!
//! Exit status: 0 when every check of the scenario passed, 1 when a check
//! failed, 2 on IO or input errors.

mod artifacts;
mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, err: std::io::Error },
    /// Parse failure inside a named file.
    File { path: PathBuf, err: quasiline_core::Error },
    Input(String),
    Core(quasiline_core::Error),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), err }
    }

    fn status(&self) -> u8 {
        use quasiline_core::Error as E;
        match self {
            CliError::Io { .. } | CliError::File { .. } | CliError::Input(_) => 2,
            CliError::Core(E::Parse { .. } | E::Invalid(_) | E::NotConvex(_) | E::NotNormalized(_) | E::MissingTail(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io { path, err } => write!(f, "{}: {err}", path.display()),
            CliError::File { path, err } => write!(f, "{}: {err}", path.display()),
            CliError::Input(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<quasiline_core::Error> for CliError {
    fn from(e: quasiline_core::Error) -> Self {
        CliError::Core(e)
    }
}

/// Abscissae given as `a:b:n` (n evenly spaced points) or `v1,v2,...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number '{t}' in grid '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    let xs = match parts.as_slice() {
        [a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|_| format!("bad point count '{n}' in grid '{s}'"))?;
            match n {
                0 => return Err(format!("grid '{s}' has no points")),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("grid '{s}' is neither a:b:n nor a comma list")),
    };
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(format!("grid '{s}' has a non-finite point"));
    }
    Ok(Grid(xs))
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Log-margin tolerance of the checks.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Evaluation grid, `a:b:n` or `v1,v2,...`.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: Option<Grid>,
    /// Run compute kernels on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformKind {
    Cosine,
    Stieltjes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartArg {
    Re,
    Im,
}

#[derive(Debug, Parser)]
#[command(name = "quasiline", version, about = "Quasianalyticity and weighted-density scenarios")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Conjugate of a PL profile with the involution and Young-Fenchel checks.
    Conjugate {
        #[arg(long)]
        p: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Integral verdict of a profile, or the branch verdicts of a weight.
    Verdict {
        #[arg(long, conflicts_with = "weight", required_unless_present = "weight")]
        p: Option<PathBuf>,
        #[arg(long)]
        weight: Option<PathBuf>,
        /// Number of series terms reported.
        #[arg(long, default_value_t = 60)]
        kmax: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Cosine or Stieltjes transform of a measure on a grid.
    Transform {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, value_enum, default_value = "cosine")]
        kind: TransformKind,
        #[command(flatten)]
        common: Common,
    },
    /// Density verdict for a two-sided weight.
    Thm2 {
        #[arg(long)]
        weight: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Every estimate of the uniqueness chain for a measure and a profile.
    Vulchain {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        p: PathBuf,
        /// Multiplies every synthesized constant.
        #[arg(long, default_value_t = 1.0)]
        cert_scale: f64,
        /// Skip the log-integral trend.
        #[arg(long)]
        no_carleman: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Sinc product, measure and certificates for a convergent profile.
    Counterexample {
        #[arg(long)]
        p: PathBuf,
        #[arg(long, default_value_t = 65536.0)]
        rmax: f64,
        #[arg(long, default_value_t = 4.0)]
        xmax: f64,
        #[arg(long, value_enum, default_value = "re")]
        part: PartArg,
        #[command(flatten)]
        common: Common,
    },
    /// Polynomial distances and rho_n(i) for a measure and a weight.
    Density {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        weight: PathBuf,
        /// Working precision in decimal digits.
        #[arg(long, default_value_t = 50)]
        precision: u32,
        #[arg(long, default_value_t = 24)]
        nmax: usize,
        #[command(flatten)]
        common: Common,
    },
    /// rho_n(i) from a moment sequence.
    MomentReport {
        /// One moment per line, starting with m_0.
        #[arg(long, conflicts_with = "lognormal", required_unless_present = "lognormal")]
        moments: Option<PathBuf>,
        /// Use m_k = e^{k^2/2}.
        #[arg(long)]
        lognormal: bool,
        #[arg(long)]
        weight: PathBuf,
        #[arg(long, default_value_t = 50)]
        precision: u32,
        #[arg(long, default_value_t = 24)]
        nmax: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("0:1:3").unwrap(), Grid(vec![0.0, 0.5, 1.0]));
        assert_eq!(parse_grid("-4,-16").unwrap(), Grid(vec![-4.0, -16.0]));
        assert_eq!(parse_grid("2:9:1").unwrap(), Grid(vec![2.0]));
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:x:3").is_err());
        assert!(parse_grid("1:2").is_err());
    }
}
