//! Command-line surface.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "magbound", version, about = "Torsion-function bounds on the lowest magnetic Neumann eigenvalue")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Torsion solve, maximum point, level profile and F, G, C, rho.
    Torsion(DomainArgs),
    /// Lowest eigenvalue of the disk with per-mode table.
    Spectrum(SpectrumArgs),
    /// Bound report for one domain.
    Bound(BoundArgs),
    /// Bound report with the 2-D solve and same-area disk margins.
    Compare(BoundArgs),
    /// Bound or comparison over a field range or a one-parameter domain family.
    Sweep(SweepArgs),
    /// Invariant suite on the builtin domains with measured margins.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// `lo:hi:n` with `n ≥ 1`; `n = 1` requires `lo = hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected lo:hi:n, got '{s}'"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|e| format!("'{}': {e}", parts[2]))?;
        if !(lo.is_finite() && hi.is_finite()) || n == 0 {
            return Err(format!("range '{s}' must have finite ends and n ≥ 1"));
        }
        if n == 1 && lo != hi || n > 1 && lo >= hi {
            return Err(format!("range '{s}' must be increasing"));
        }
        Ok(Range { lo, hi, n })
    }
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64).collect()
    }
}

pub fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("'{s}': {e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("'{s}' must be positive"))
    }
}

pub fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("'{s}': {e}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("'{s}' must be non-negative"))
    }
}

/// Resolution and output settings shared by every command.
#[derive(Debug, Args)]
pub struct Common {
    /// Target mesh size.
    #[arg(long = "mesh-h", default_value = "0.02", value_parser = positive)]
    pub mesh_h: f64,
    /// Level-set radius grid lo:hi:n inside (0, 1).
    #[arg(long = "r-grid", default_value = "0.02:0.995:400")]
    pub r_grid: Range,
    /// Radial grid size of the disk fiber solver.
    #[arg(long = "radial-n", default_value_t = 4096)]
    pub radial_n: usize,
    /// Directory for report and plot-data files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Format of the report printed on stdout (json by default; validate
    /// prints one line per check unless a format is given).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Relative tolerance of inequalities between discretized quantities.
    #[arg(long, default_value = "0.02", value_parser = non_negative)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct DomainArgs {
    /// Domain description file (JSON).
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    pub domain: Option<PathBuf>,
    /// Builtin domain by name, e.g. "ellipse(2,1)".
    #[arg(long)]
    pub builtin: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Field intensity.
    #[arg(long, conflicts_with = "b_range", required_unless_present = "b_range", value_parser = non_negative)]
    pub b: Option<f64>,
    /// Field intensities lo:hi:n.
    #[arg(long = "b-range")]
    pub b_range: Option<Range>,
}

impl FieldArgs {
    pub fn values(&self) -> Vec<f64> {
        match (self.b, self.b_range) {
            (Some(b), _) => vec![b],
            (None, Some(r)) => r.values(),
            (None, None) => Vec::new(),
        }
    }
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Disk radius.
    #[arg(long = "R", value_parser = positive)]
    pub radius: f64,
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[command(flatten)]
    pub field: FieldArgs,
    /// Also solve the 2-D eigenproblem.
    #[arg(long)]
    pub direct: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Domain description file (JSON), swept over --b-range.
    #[arg(long, conflicts_with_all = ["builtin", "family"])]
    pub domain: Option<PathBuf>,
    /// Builtin domain by name, swept over --b-range.
    #[arg(long, conflicts_with = "family")]
    pub builtin: Option<String>,
    /// One-parameter family at fixed --b, scaled to area pi:
    /// ellipse:lo:hi:n (aspect ratio) or superellipse:lo:hi:n (even power).
    #[arg(long, required_unless_present_any = ["domain", "builtin"])]
    pub family: Option<String>,
    #[command(flatten)]
    pub field: FieldArgs,
    /// Also solve the 2-D eigenproblem and report conjecture margins.
    #[arg(long)]
    pub direct: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Skip the 2-D eigenvalue solves.
    #[arg(long = "skip-direct")]
    pub skip_direct: bool,
    #[command(flatten)]
    pub common: Common,
}
