//! Reconstruction of the full stress tensor from partial components.
//!
//! With zero body force and zero traction, the shear components determine the
//! diagonal ones by line integration, and the diagonal components determine
//! the shears through a first-order system solved here in least squares.

pub mod lsqr;
mod shear;

use serde::{Deserialize, Serialize};

use crate::cosine::{CosinePotential, StressSeries};
use crate::error::{Error, Result};
use crate::field::{axis_stride, derivative_fd, sym_slot, Grid3, SymTensorField3, FD_MIN_POINTS};
use crate::trig::Axis;

pub use shear::{
    assemble_shear_recovery, singular_value_extremes, solve_shear_recovery, DiscreteOperator, ShearSolution, SvMethod,
    DENSE_SV_MAX_COLS, SINGULAR_TOL,
};

/// Absolute far-face tolerance on the analytic path.
pub const FAR_FACE_TOL_ANALYTIC: f64 = 1e-9;

/// Far-face tolerance factor on the grid path, applied as `factor · h² · scale`.
pub const FAR_FACE_GRID_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoveryMode {
    DiagonalFromShear,
    ShearFromDiagonal,
}

/// Boundary rows used when recovering shears.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryMode {
    /// `τ = 0` at every boundary node (three rows per face node).
    #[default]
    Dirichlet,
    /// Only the two shear tractions of each face (two rows per face node).
    Traction,
}

#[derive(Debug, Clone)]
pub struct RecoveryProblem {
    pub grid: Grid3,
    /// Sampled field; the components being recovered are zero.
    pub known: SymTensorField3,
    pub mode: RecoveryMode,
    pub boundary: BoundaryMode,
    /// Exact series for the known components, when available.
    pub source: Option<StressSeries>,
}

impl RecoveryProblem {
    /// Keeps only the components `mode` reads.
    pub fn from_field(field: &SymTensorField3, mode: RecoveryMode) -> Self {
        let mut known = field.clone();
        let drop = match mode {
            RecoveryMode::DiagonalFromShear => 0..3,
            RecoveryMode::ShearFromDiagonal => 3..6,
        };
        for s in drop {
            known.comps[s].iter_mut().for_each(|v| *v = 0.0);
        }
        RecoveryProblem { grid: field.grid, known, mode, boundary: BoundaryMode::default(), source: None }
    }

    /// Samples `p` on `grid` and keeps its series for exact derivatives.
    pub fn from_potential(p: &CosinePotential, grid: Grid3, mode: RecoveryMode) -> Self {
        let series = p.stress_series();
        let mut out = Self::from_field(&series.eval(grid), mode);
        out.source = Some(series);
        out
    }

    pub fn with_boundary(mut self, boundary: BoundaryMode) -> Self {
        self.boundary = boundary;
        self
    }

    /// Drops the exact series so that only sampled data is used.
    pub fn sampled_only(mut self) -> Self {
        self.source = None;
        self
    }
}

/// Diagonal recovery with its far-face consistency data.
#[derive(Debug, Clone)]
pub struct DiagonalRecovery {
    pub field: SymTensorField3,
    /// `max |σ_ii|` on the face `x_i = 2π`, per axis.
    pub far_face: [f64; 3],
    pub tol: f64,
    pub analytic: bool,
}

/// `σ_ii(x) = -∫₀^{x_i} (∂_j σ_ij + ∂_k σ_ik) ds` for `{j, k}` the other two axes.
///
/// Fails if the recovered `σ_ii` does not vanish on `x_i = 2π`.
pub fn recover_diagonal_from_shear(p: &RecoveryProblem) -> Result<SymTensorField3> {
    let r = recover_diagonal_detailed(p)?;
    for (axis, &v) in r.far_face.iter().enumerate() {
        if v.is_nan() || v > r.tol {
            return Err(Error::FarFaceInconsistent { axis: axis + 1, value: v, tol: r.tol });
        }
    }
    Ok(r.field)
}

/// As [`recover_diagonal_from_shear`] but reports far-face values instead of failing on them.
pub fn recover_diagonal_detailed(p: &RecoveryProblem) -> Result<DiagonalRecovery> {
    if p.mode != RecoveryMode::DiagonalFromShear {
        return Err(Error::InvalidInput("problem is not set up for diagonal-from-shear".into()));
    }
    let grid = p.grid;
    let mut field = p.known.clone();
    let (diag, tol, analytic) = match &p.source {
        Some(series) => (diagonal_analytic(series, &grid)?, FAR_FACE_TOL_ANALYTIC, true),
        None => {
            if grid.m() < FD_MIN_POINTS {
                return Err(Error::MissingDerivatives(format!(
                    "no exact series and m = {} is below the finite-difference minimum {FD_MIN_POINTS}",
                    grid.m()
                )));
            }
            let h = grid.spacing();
            let scale = (3..6).map(|s| p.known.max_abs(s)).fold(1.0, f64::max);
            (diagonal_grid(&p.known), FAR_FACE_GRID_FACTOR * h * h * scale, false)
        }
    };
    let m = grid.m();
    let mut far_face = [0.0; 3];
    for (i, d) in diag.into_iter().enumerate() {
        far_face[i] =
            (0..grid.len()).filter(|&idx| grid.unindex(idx)[i] == m - 1).fold(0.0f64, |acc, idx| acc.max(d[idx].abs()));
        field.comps[i] = d;
    }
    Ok(DiagonalRecovery { field, far_face, tol, analytic })
}

fn diagonal_analytic(series: &StressSeries, grid: &Grid3) -> Result<[Vec<f64>; 3]> {
    let mut out: [Vec<f64>; 3] = Default::default();
    for (i, slot) in out.iter_mut().enumerate() {
        let mut rate = series.component(i, (i + 1) % 3).derivative((i + 1) % 3);
        rate.add(&series.component(i, (i + 2) % 3).derivative((i + 2) % 3));
        *slot = rate.antiderivative(i)?.scaled(-1.0).eval_on([Axis::Closed(grid.m()); 3]);
    }
    Ok(out)
}

fn diagonal_grid(known: &SymTensorField3) -> [Vec<f64>; 3] {
    let grid = known.grid;
    let m = grid.m();
    let h = grid.spacing();
    std::array::from_fn(|i| {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        let mut rate = derivative_fd(&grid, &known.comps[sym_slot(i, j)], j);
        let other = derivative_fd(&grid, &known.comps[sym_slot(i, k)], k);
        rate.iter_mut().zip(other).for_each(|(a, b)| *a += b);
        // cumulative trapezoid from the x_i = 0 face
        let stride = axis_stride(m, i);
        let mut out = vec![0.0; grid.len()];
        for idx in 0..grid.len() {
            if grid.unindex(idx)[i] != 0 {
                continue;
            }
            let mut acc = 0.0;
            for t in 1..m {
                let cur = idx + t * stride;
                acc += 0.5 * h * (rate[cur - stride] + rate[cur]);
                out[cur] = -acc;
            }
        }
        out
    })
}

/// Relative L2 error `|a - b| / |b|` over the given component slots.
pub fn relative_l2(a: &SymTensorField3, b: &SymTensorField3, slots: &[usize]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &s in slots {
        for (x, y) in a.comps[s].iter().zip(&b.comps[s]) {
            num += (x - y) * (x - y);
            den += y * y;
        }
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn observed_order(h: &[f64], err: &[f64]) -> f64 {
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Report emitted by the recovery workflows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub mode: RecoveryMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryMode>,
    pub m: usize,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_singular_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_singular_value_relative: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singular_value_method: Option<SvMethod>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub far_face: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub far_face_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_vs_oracle: Option<f64>,
    /// False when the far-face values exceed their tolerance.
    pub consistent: bool,
}

/// Runs either recovery and reports it. `oracle` is the full true field, if known.
///
/// Far-face inconsistency is reported through `consistent` rather than as an error.
pub fn recover(p: &RecoveryProblem, oracle: Option<&SymTensorField3>) -> Result<(SymTensorField3, RecoveryReport)> {
    let mut report = RecoveryReport {
        mode: p.mode,
        boundary: None,
        m: p.grid.m(),
        residual: 0.0,
        min_singular_value: None,
        min_singular_value_relative: None,
        singular_value_method: None,
        far_face: None,
        far_face_tol: None,
        iterations: None,
        error_vs_oracle: None,
        consistent: true,
    };
    let (field, slots) = match p.mode {
        RecoveryMode::DiagonalFromShear => {
            let r = recover_diagonal_detailed(p)?;
            report.residual = r.far_face.iter().copied().fold(0.0, f64::max);
            report.consistent = r.far_face.iter().all(|&v| v <= r.tol);
            report.far_face = Some(r.far_face);
            report.far_face_tol = Some(r.tol);
            (r.field, [0, 1, 2])
        }
        RecoveryMode::ShearFromDiagonal => {
            let sol = solve_shear_recovery(&assemble_shear_recovery(p)?)?;
            let mut field = p.known.clone();
            for (k, t) in sol.tau.into_iter().enumerate() {
                field.comps[3 + k] = t;
            }
            report.boundary = Some(p.boundary);
            report.residual = sol.residual;
            report.min_singular_value = Some(sol.min_singular_value);
            report.min_singular_value_relative = Some(sol.min_singular_value_relative);
            report.singular_value_method = Some(sol.sv_method);
            report.iterations = Some(sol.iterations);
            (field, [3, 4, 5])
        }
    };
    if let Some(truth) = oracle {
        if truth.grid != field.grid {
            return Err(Error::Shape(format!(
                "oracle grid m = {} differs from m = {}",
                truth.grid.m(),
                field.grid.m()
            )));
        }
        report.error_vs_oracle = Some(relative_l2(&field, truth, &slots));
    }
    Ok((field, report))
}
