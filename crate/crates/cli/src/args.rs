use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eigentomo::cosine::DEFAULT_NULL_TOL;
use eigentomo::imagefit::DEFAULT_SLICE_RESOLUTION;
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 1729;

#[derive(Parser, Debug)]
#[command(
    name = "eigentomo",
    version,
    about = "Null residual-stress fields on the cube, stress recovery and eigenstrain reduction"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand. Serialized into each report.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Global {
    /// Highest cosine frequency per axis.
    #[arg(long = "N", global = true, default_value_t = 2)]
    #[serde(rename = "N")]
    pub n: usize,
    /// Grid points per axis on [0, 2π].
    #[arg(long, global = true, default_value_t = 33)]
    pub m: usize,
    /// Poisson ratio.
    #[arg(long, global = true, default_value_t = 0.28, allow_hyphen_values = true)]
    pub nu: f64,
    /// Young's modulus.
    #[arg(long = "E", global = true, default_value_t = 1.0)]
    #[serde(rename = "E")]
    pub e: f64,
    #[command(flatten)]
    pub tol: TolArgs,
    /// Seed for randomized inputs.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output file format; inferred from the `--out` extension when absent.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Position of the sampled x3 slice.
    #[arg(long = "slice-x3", global = true, default_value_t = FRAC_PI_2, allow_hyphen_values = true)]
    pub slice_x3: f64,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TolArgs {
    /// Bound on max |ε22|.
    #[arg(long = "tol-eps22", global = true, default_value_t = 1e-10)]
    pub eps22: f64,
    /// Bound on max |ε33|.
    #[arg(long = "tol-eps33", global = true, default_value_t = 1e-10)]
    pub eps33: f64,
    /// Bound on the boundary traction.
    #[arg(long = "tol-traction", global = true, default_value_t = 1e-10)]
    pub traction: f64,
    /// Bound on the analytic divergence at the nodes.
    #[arg(long = "tol-div", global = true, default_value_t = 1e-12)]
    pub div: f64,
    /// Bound on the finite-difference divergence (unchecked if absent).
    #[arg(long = "tol-div-fd", global = true)]
    pub div_fd: Option<f64>,
    /// Relative singular-value cut for the null space.
    #[arg(long = "tol-null", global = true, default_value_t = DEFAULT_NULL_TOL)]
    pub null: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Vtk,
    Json,
    Pgm,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Orthonormal null basis of the zero-traction system and its dimension check.
    Nullbasis,
    /// Plane-strain, traction and equilibrium diagnostics of a field.
    Verify(SourceArgs),
    /// Least-squares fit of null fields to a binary image on a slice.
    Fit(FitArgs),
    /// Reduction of a polynomial eigenstrain to a diagonal one.
    Reduce(ReduceArgs),
    /// Recovery of diagonal stresses from shears or shears from diagonals.
    Recover(RecoverArgs),
    /// Shear-only equilibrium checks for polynomial potentials.
    Poorly(PoorlyArgs),
    /// Writes a field as CSV, VTK, coefficient JSON or a sign-pattern PGM slice.
    Export(ExportArgs),
}

/// Where a stress field comes from. Defaults to null-basis field 0.
#[derive(Args, Debug, Clone, Default, Serialize)]
#[group(id = "source", multiple = false)]
pub struct SourceArgs {
    /// Null-basis field at the chosen N.
    #[arg(long)]
    pub basis_index: Option<usize>,
    /// Generator JSON `{N, nu?, b}`.
    #[arg(long)]
    pub generator: Option<PathBuf>,
    /// Potential coefficient JSON `{N, a}`.
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// Sampled field CSV.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// The zero field.
    #[arg(long)]
    pub zero: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Checkerboard,
    Disk,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FitArgs {
    /// Target image (PGM or CSV); a generated pattern is used otherwise.
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "checkerboard")]
    pub pattern: Pattern,
    /// Side of the generated pattern in pixels.
    #[arg(long, default_value_t = 16)]
    pub pattern_size: usize,
    /// Checkerboard cell size in pixels.
    #[arg(long, default_value_t = 1)]
    pub cell: usize,
    /// Disk radius as a fraction of the half side.
    #[arg(long, default_value_t = 0.6)]
    pub radius: f64,
    /// Fit at each of these N instead of --N, e.g. `2,4,8`.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<usize>,
    /// Slice nodes per side.
    #[arg(long, default_value_t = DEFAULT_SLICE_RESOLUTION)]
    pub slice_res: usize,
    /// Fitted stress component.
    #[arg(long, default_value = "s11")]
    pub component: String,
}

#[derive(Args, Debug, Clone, Serialize)]
#[group(id = "eigenstrain", multiple = false)]
pub struct EigenstrainSource {
    /// Eigenstrain JSON keyed by "11".."12".
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Random eigenstrain of this total degree (seeded).
    #[arg(long)]
    pub random_degree: Option<u32>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ReduceArgs {
    /// Without an input, the built-in example `ε12 = -x1² x3 / 2` is used.
    #[command(flatten)]
    pub source: EigenstrainSource,
    /// Degree bound of the isotropic search.
    #[arg(long, default_value_t = 6)]
    pub degree_bound: u32,
    /// Share of nonzero monomials in random input.
    #[arg(long, default_value_t = 0.5)]
    pub density: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    DiagonalFromShear,
    ShearFromDiagonal,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryArg {
    /// Dirichlet for zero diagonal data, traction otherwise.
    Auto,
    Dirichlet,
    Traction,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RecoverArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Boundary rows of the shear solve.
    #[arg(long, value_enum, default_value = "auto")]
    pub boundary: BoundaryArg,
    /// Use finite differences of the samples even when an exact series is known.
    #[arg(long)]
    pub sampled_only: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PoorlyArgs {
    /// Potentials as `{U1, U2, U3}` or `{phi, psi, omega, c23?}` JSON.
    #[arg(long, conflicts_with = "random_degree")]
    pub params: Option<PathBuf>,
    /// Random `U` potentials of this degree (seeded); the default input.
    #[arg(long)]
    pub random_degree: Option<u32>,
    /// Also bracket with the shear field of these parameters.
    #[arg(long)]
    pub bracket_with: Option<PathBuf>,
    /// Also bracket with a second random triple.
    #[arg(long, conflicts_with = "bracket_with")]
    pub bracket_random: bool,
    #[arg(long, default_value_t = 0.5)]
    pub density: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExportArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Component rendered by the PGM format.
    #[arg(long, default_value = "s11")]
    pub component: String,
    /// PGM slice nodes per side.
    #[arg(long, default_value_t = DEFAULT_SLICE_RESOLUTION)]
    pub slice_res: usize,
}
