use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;

use super::lsqr::{lsqr, singular_value_estimate, LinearMap, LsqrOptions};
use super::{BoundaryMode, RecoveryMode, RecoveryProblem};
use crate::error::{Error, Result};
use crate::field::{axis_stride, derivative_fd, fd_stencil, Face, Grid3};
use crate::trig::Axis;

/// Smallest grid accepted by the shear assembly.
pub const SHEAR_MIN_POINTS: usize = 9;

/// Relative singular-value threshold below which the operator is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-8;

/// Largest unknown count for which singular values come from a dense SVD.
pub const DENSE_SV_MAX_COLS: usize = 3 * 9 * 9 * 9;

/// Slot of `σ_ij` (`i != j`) in `τ = (σ23, σ13, σ12)`.
fn tau_slot(i: usize, j: usize) -> usize {
    3 - i - j
}

/// Sparse least-squares system for the shear unknowns.
///
/// Unknown `k·n + node` is `τ_k` at `node`, with `n = m³`. Rows: three
/// equilibrium rows per node (node-major), then boundary rows face by face in
/// [`Face::ALL`] order, face nodes with the first tangent axis fastest and
/// the constrained shears of each node in traction order (`σ_{a j}`, `j`
/// ascending, for a face normal to `a`).
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub grid: Grid3,
    pub boundary: BoundaryMode,
    pub n_equilibrium: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    // transpose in CSR form, for a row-parallel adjoint
    t_ptr: Vec<usize>,
    t_rows: Vec<usize>,
    t_vals: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl DiscreteOperator {
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |p| (self.cols[p], self.vals[p]))
    }

    fn to_dense(&self) -> Mat<f64> {
        let mut a = Mat::zeros(self.nrows(), self.ncols());
        for r in 0..self.nrows() {
            for (c, v) in self.row(r) {
                a[(r, c)] += v;
            }
        }
        a
    }
}

impl LinearMap for DiscreteOperator {
    fn nrows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    fn ncols(&self) -> usize {
        self.t_ptr.len() - 1
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows())
            .into_par_iter()
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|p| self.vals[p] * x[self.cols[p]]).sum())
            .collect()
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        (0..self.ncols())
            .into_par_iter()
            .map(|c| (self.t_ptr[c]..self.t_ptr[c + 1]).map(|p| self.t_vals[p] * y[self.t_rows[p]]).sum())
            .collect()
    }
}

/// Builds equilibrium rows `Σ_{i≠j} ∂_i σ_ij = -∂_j σ_jj` and boundary rows.
///
/// Boundary rows are weighted by `1/h` so they scale like the derivative rows.
/// The Dirichlet mode is only consistent with zero diagonal data (a nonzero
/// equilibrated shear field cannot vanish on the whole boundary), so it
/// rejects a nonzero right-hand side.
pub fn assemble_shear_recovery(p: &RecoveryProblem) -> Result<DiscreteOperator> {
    if p.mode != RecoveryMode::ShearFromDiagonal {
        return Err(Error::InvalidInput("problem is not set up for shear-from-diagonal".into()));
    }
    let grid = p.grid;
    let m = grid.m();
    if m < SHEAR_MIN_POINTS {
        return Err(Error::GridTooCoarse { m, min: SHEAR_MIN_POINTS });
    }
    let n = grid.len();
    let h = grid.spacing();

    // -∂_j σ_jj at every node
    let source: [Vec<f64>; 3] = match &p.source {
        Some(series) => std::array::from_fn(|j| series.comps[j].derivative(j).eval_on([Axis::Closed(grid.m()); 3])),
        None => std::array::from_fn(|j| derivative_fd(&grid, &p.known.comps[j], j)),
    };

    let equilibrium: Vec<[Vec<(usize, f64)>; 3]> = (0..n)
        .into_par_iter()
        .map(|node| {
            let t = grid.unindex(node);
            std::array::from_fn(|j| {
                let mut row = Vec::with_capacity(6);
                for i in (0..3).filter(|&i| i != j) {
                    let base = tau_slot(i, j) * n;
                    let stride = axis_stride(m, i) as isize;
                    for (o, w) in fd_stencil(m, t[i], h) {
                        if w != 0.0 {
                            row.push((base + (node as isize + o * stride) as usize, w));
                        }
                    }
                }
                row
            })
        })
        .collect();

    let mut row_ptr = vec![0];
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut rhs = Vec::new();
    for (node, rows) in equilibrium.into_iter().enumerate() {
        for (j, row) in rows.into_iter().enumerate() {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
            rhs.push(-source[j][node]);
        }
    }
    let n_equilibrium = rhs.len();

    let weight = 1.0 / h;
    for face in Face::ALL {
        let slots: Vec<usize> = match p.boundary {
            BoundaryMode::Dirichlet => vec![0, 1, 2],
            BoundaryMode::Traction => (0..3).filter(|&j| j != face.axis).map(|j| tau_slot(face.axis, j)).collect(),
        };
        for b in 0..m {
            for a in 0..m {
                let node = face.node(&grid, a, b);
                for &s in &slots {
                    cols.push(s * n + node);
                    vals.push(weight);
                    row_ptr.push(cols.len());
                    rhs.push(0.0);
                }
            }
        }
    }

    if p.boundary == BoundaryMode::Dirichlet && rhs.iter().any(|&v| v != 0.0) {
        return Err(Error::InvalidInput(
            "Dirichlet boundary rows need zero diagonal data; use the traction boundary mode".into(),
        ));
    }

    let (t_ptr, t_rows, t_vals) = transpose(&row_ptr, &cols, &vals, 3 * n);
    Ok(DiscreteOperator { grid, boundary: p.boundary, n_equilibrium, row_ptr, cols, vals, t_ptr, t_rows, t_vals, rhs })
}

fn transpose(row_ptr: &[usize], cols: &[usize], vals: &[f64], ncols: usize) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let mut count = vec![0usize; ncols + 1];
    for &c in cols {
        count[c + 1] += 1;
    }
    for c in 0..ncols {
        count[c + 1] += count[c];
    }
    let t_ptr = count.clone();
    let mut next = count;
    let mut t_rows = vec![0; cols.len()];
    let mut t_vals = vec![0.0; cols.len()];
    for r in 0..row_ptr.len() - 1 {
        for p in row_ptr[r]..row_ptr[r + 1] {
            let c = cols[p];
            t_rows[next[c]] = r;
            t_vals[next[c]] = vals[p];
            next[c] += 1;
        }
    }
    (t_ptr, t_rows, t_vals)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SvMethod {
    DenseSvd,
    /// Ritz values of a Golub-Kahan bidiagonalization.
    LanczosEstimate,
}

#[derive(Debug, Clone)]
pub struct ShearSolution {
    /// `(σ23, σ13, σ12)` lattices.
    pub tau: [Vec<f64>; 3],
    /// `|A x - b|`.
    pub residual: f64,
    pub min_singular_value: f64,
    /// `σ_min / σ_max`.
    pub min_singular_value_relative: f64,
    pub sv_method: SvMethod,
    pub iterations: usize,
    /// LSQR stopping reason; 7 means the iteration cap was hit.
    pub istop: u8,
}

const ESTIMATE_MAX_ITER: usize = 20_000;
const ESTIMATE_WINDOW: usize = 100;
const ESTIMATE_TOL: f64 = 1e-9;

/// Extreme singular values: exact up to [`DENSE_SV_MAX_COLS`] unknowns,
/// Lanczos estimates from a fixed probe vector beyond.
pub fn singular_value_extremes(op: &DiscreteOperator) -> Result<(f64, f64, SvMethod)> {
    if op.ncols() <= DENSE_SV_MAX_COLS {
        let s = op.to_dense().singular_values().map_err(|e| Error::Svd(format!("{e:?}")))?;
        let smax = s.iter().copied().fold(0.0, f64::max);
        let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
        return Ok((smin, smax, SvMethod::DenseSvd));
    }
    // fixed pseudo-random probe so the estimate is reproducible
    let probe: Vec<f64> = (0..op.nrows()).map(|r| ((r * 7919 + 13) % 1009) as f64 / 1009.0 - 0.5).collect();
    let est = singular_value_estimate(op, &probe, ESTIMATE_MAX_ITER, ESTIMATE_WINDOW, ESTIMATE_TOL);
    Ok((est.min, est.max, SvMethod::LanczosEstimate))
}

/// LSQR least-squares solve with a smallest-singular-value report.
///
/// In the Dirichlet mode a relative smallest singular value below
/// [`SINGULAR_TOL`] is an error.
pub fn solve_shear_recovery(op: &DiscreteOperator) -> Result<ShearSolution> {
    let (smin, smax, sv_method) = singular_value_extremes(op)?;
    let relative = if smax > 0.0 { smin / smax } else { 0.0 };
    if op.boundary == BoundaryMode::Dirichlet && relative <= SINGULAR_TOL {
        return Err(Error::RankDeficient { sigma_min: smin, relative });
    }
    let out = lsqr(op, &op.rhs, LsqrOptions::default());
    let ax = op.apply(&out.x);
    let residual = ax.iter().zip(&op.rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let n = op.grid.len();
    let tau = std::array::from_fn(|k| out.x[k * n..(k + 1) * n].to_vec());
    Ok(ShearSolution {
        tau,
        residual,
        min_singular_value: smin,
        min_singular_value_relative: relative,
        sv_method,
        iterations: out.iterations,
        istop: out.istop,
    })
}
