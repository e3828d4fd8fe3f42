use std::io::Write;

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::{index_flatten, index_unflatten, NullGenerator};
use crate::error::{Error, Result};
use crate::field::ElasticConstants;

/// Default singular-value cut, relative to the largest singular value.
pub const DEFAULT_NULL_TOL: f64 = 1e-10;

/// Zero-traction system `A b = 0` on the flattened generator, `3N² × N³`.
///
/// Rows come in three blocks: `Σ_j j² b_{jkl} = 0` for each `(k, l)`, then
/// `Σ_k k² b_{jkl} = 0` for each `(j, l)`, then `Σ_l l² b_{jkl} = 0` for each
/// `(j, k)`. Within a block the row index is `p + (q-1) N` for the free pair `(p, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub n: usize,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ConstraintSystem {
    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|r| (0..self.cols).map(|c| self.get(r, c) * x[c]).sum()).collect()
    }

    fn to_faer(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |r, c| self.get(r, c))
    }
}

/// Assembles the boundary system.
///
/// Written in `b`, the face-`x1` rows carry a common factor `2(1-ν)k²l²` and the
/// face-`x2`/`x3` rows carry `2ν j²l²` and `2ν j²k²`. These are divided out, so
/// the matrix holds the integers `j²`, `k²`, `l²` and does not depend on `ν`.
/// For `ν = 0` the last two blocks are void and the reduction is invalid.
pub fn assemble_constraints(n: usize, c: &ElasticConstants) -> Result<ConstraintSystem> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    c.validate()?;
    if c.nu == 0.0 {
        return Err(Error::InvalidInput("nu = 0 makes the face-x2/x3 conditions vacuous".into()));
    }
    let rows = 3 * n * n;
    let cols = n * n * n;
    let mut data = vec![0.0; rows * cols];
    for l in 1..=n {
        for k in 1..=n {
            for j in 1..=n {
                let col = index_flatten(j, k, l, n)? - 1;
                let block_rows =
                    [(k - 1) + (l - 1) * n, n * n + (j - 1) + (l - 1) * n, 2 * n * n + (j - 1) + (k - 1) * n];
                let weights = [j * j, k * k, l * l];
                for (r, w) in block_rows.into_iter().zip(weights) {
                    data[r * cols + col] = w as f64;
                }
            }
        }
    }
    Ok(ConstraintSystem { n, rows, cols, data })
}

/// Orthonormal basis of `null(A)`, one column per basis vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullBasis {
    #[serde(rename = "N")]
    pub n: usize,
    pub tol: f64,
    /// Singular values of `A`, nonincreasing.
    pub singular_values: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
}

impl NullBasis {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn generator(&self, q: usize) -> Result<NullGenerator> {
        let col = self
            .columns
            .get(q)
            .ok_or_else(|| Error::InvalidInput(format!("basis index {q} out of range (dim {})", self.dim())))?;
        NullGenerator::new(self.n, col.clone())
    }

    /// `Σ_q w_q B_q` as a generator.
    pub fn combine(&self, weights: &[f64]) -> Result<NullGenerator> {
        if weights.len() != self.dim() {
            return Err(Error::Shape(format!("{} weights for {} basis vectors", weights.len(), self.dim())));
        }
        let mut b = vec![0.0; self.n.pow(3)];
        for (w, col) in weights.iter().zip(&self.columns) {
            b.iter_mut().zip(col).for_each(|(acc, v)| *acc += w * v);
        }
        NullGenerator::new(self.n, b)
    }

    /// One row per generator entry: `i,j,k,l,b1,...,bd`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "i,j,k,l")?;
        for q in 1..=self.dim() {
            write!(w, ",b{q}")?;
        }
        writeln!(w)?;
        for row in 0..self.n.pow(3) {
            let (j, k, l) = index_unflatten(row + 1, self.n)?;
            write!(w, "{},{j},{k},{l}", row + 1)?;
            for col in &self.columns {
                write!(w, ",{}", col[row])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Computes an orthonormal null basis of `sys` by SVD.
///
/// Singular values `<= tol * σ_max` count as zero. Every null direction has
/// (numerically) zero singular value, so the basis is made canonical by
/// Gram-Schmidt on the projections of `e_1, e_2, ...` in column order, and each
/// column's first nonzero entry is made positive. The result depends only on the
/// null space, not on the SVD's internal rotation.
pub fn null_basis(sys: &ConstraintSystem, tol: f64) -> Result<NullBasis> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidInput(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    let a = sys.to_faer();
    let svd = a.svd().map_err(|e| Error::Svd(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let singular_values: Vec<f64> = (0..s.nrows()).map(|i| s[i]).collect();
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values.iter().filter(|&&v| smax > 0.0 && v > tol * smax).count();
    let cols = sys.ncols();
    let dim = cols - rank;
    let v = svd.V();

    // projector rows: P e_i = Vn Vn^T e_i
    let null_cols: Vec<Vec<f64>> = (rank..cols).map(|c| (0..cols).map(|r| v[(r, c)]).collect()).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for i in 0..cols {
        if basis.len() == dim {
            break;
        }
        let mut cand = vec![0.0; cols];
        for nc in &null_cols {
            let w = nc[i];
            cand.iter_mut().zip(nc).for_each(|(c, x)| *c += w * x);
        }
        let start = norm(&cand);
        if start < 1e-8 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let d = dot(q, &cand);
                cand.iter_mut().zip(q).for_each(|(c, x)| *c -= d * x);
            }
        }
        let nrm = norm(&cand);
        if nrm < 1e-6 * start.max(1e-2) {
            continue;
        }
        cand.iter_mut().for_each(|c| *c /= nrm);
        let peak = cand.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if let Some(first) = cand.iter().find(|x| x.abs() > 1e-12 * peak) {
            if *first < 0.0 {
                cand.iter_mut().for_each(|c| *c = -*c);
            }
        }
        basis.push(cand);
    }
    if basis.len() != dim {
        return Err(Error::Svd(format!("extracted {} of {} null directions", basis.len(), dim)));
    }

    // Refinement b <- b - A⁺(A b), with A b formed in doubled precision. The
    // traction of a basis field is A b scaled by up to 2(1-ν)N⁴, so the plain
    // SVD residual (a few ulps of |A|) is not small enough at larger N.
    let rows = sys.nrows();
    let u_r: Vec<Vec<f64>> = (0..rank).map(|i| (0..rows).map(|r| svd.U()[(r, i)]).collect()).collect();
    let v_r: Vec<Vec<f64>> = (0..rank).map(|i| (0..cols).map(|c| v[(c, i)]).collect()).collect();
    let sparse_rows: Vec<Vec<(usize, f64)>> = sys
        .data
        .chunks(cols)
        .map(|row| row.iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(c, a)| (c, *a)).collect())
        .collect();
    for b in basis.iter_mut() {
        for _ in 0..2 {
            let r: Vec<f64> = sparse_rows.iter().map(|row| dot2(row.iter().map(|&(c, a)| (a, b[c])))).collect();
            let mut delta = vec![0.0; cols];
            for ((ui, vi), si) in u_r.iter().zip(&v_r).zip(&singular_values) {
                let y = dot(ui, &r) / si;
                delta.iter_mut().zip(vi).for_each(|(d, x)| *d += x * y);
            }
            b.iter_mut().zip(&delta).for_each(|(bc, d)| *bc -= d);
        }
    }
    Ok(NullBasis { n: sys.n, tol, singular_values, columns: basis })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dot product accurate as if computed in twice the working precision.
fn dot2(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for (x, y) in pairs {
        let (p, pe) = two_product(x, y);
        let t = s + p;
        let z = t - s;
        c += (s - (t - z)) + (p - z) + pe;
        s = t;
    }
    s + c
}

/// Exact product `x y = p + e` by Dekker's splitting, no fused multiply-add needed.
fn two_product(x: f64, y: f64) -> (f64, f64) {
    fn split(a: f64) -> (f64, f64) {
        let c = 134217729.0 * a;
        let hi = c - (c - a);
        (hi, a - hi)
    }
    let p = x * y;
    let (xh, xl) = split(x);
    let (yh, yl) = split(y);
    (p, xl * yl - (((p - xh * yh) - xl * yh) - xh * yl))
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cosine::{coeffs_from_generator, CosinePotential};
    const C: ElasticConstants = ElasticConstants { e: 1.0, nu: 0.28 };

    #[test]
    fn shapes() {
        let a1 = assemble_constraints(1, &C).unwrap();
        assert_eq!((a1.nrows(), a1.ncols()), (3, 1));
        assert_eq!((0..3).map(|r| a1.get(r, 0)).collect::<Vec<_>>(), vec![1.0, 1.0, 1.0]);
        let a2 = assemble_constraints(2, &C).unwrap();
        assert_eq!((a2.nrows(), a2.ncols()), (12, 8));
        let a8 = assemble_constraints(8, &C).unwrap();
        assert_eq!((a8.nrows(), a8.ncols()), (192, 512));
        assert!(assemble_constraints(0, &C).is_err());
        assert!(assemble_constraints(2, &ElasticConstants { e: 1.0, nu: 0.0 }).is_err());
    }

    #[test]
    fn n1_has_trivial_null_space() {
        let nb = null_basis(&assemble_constraints(1, &C).unwrap(), DEFAULT_NULL_TOL).unwrap();
        assert_eq!(nb.dim(), 0);
    }

    #[test]
    fn n2_single_vector_by_hand() {
        // Σ_j j² b = 0 per (k,l) etc.: b ∝ (-1)^{j+k+l} (4/j²)(4/k²)(4/l²) / norm
        let nb = null_basis(&assemble_constraints(2, &C).unwrap(), DEFAULT_NULL_TOL).unwrap();
        assert_eq!(nb.dim(), 1);
        let mut expected: Vec<f64> = (1..=8)
            .map(|i| {
                let (j, k, l) = index_unflatten(i, 2).unwrap();
                let w = |f: usize| if f == 1 { 4.0 } else { -1.0 };
                w(j) * w(k) * w(l)
            })
            .collect();
        let nrm = norm(&expected);
        expected.iter_mut().for_each(|v| *v /= nrm);
        for (a, b) in nb.columns[0].iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_is_orthonormal_and_annihilated() {
        for n in 2..=5 {
            let sys = assemble_constraints(n, &C).unwrap();
            let nb = null_basis(&sys, DEFAULT_NULL_TOL).unwrap();
            assert_eq!(nb.dim(), (n - 1).pow(3));
            for (p, a) in nb.columns.iter().enumerate() {
                assert!(sys.apply(a).iter().all(|v| v.abs() <= 1e-10));
                for (q, b) in nb.columns.iter().enumerate() {
                    let expected = if p == q { 1.0 } else { 0.0 };
                    assert!((dot(a, b) - expected).abs() < 1e-12);
                }
                let first = a.iter().find(|x| x.abs() > 1e-12).unwrap();
                assert!(*first > 0.0);
            }
        }
    }

    #[test]
    fn basis_is_deterministic() {
        let sys = assemble_constraints(4, &C).unwrap();
        let a = null_basis(&sys, DEFAULT_NULL_TOL).unwrap();
        let b = null_basis(&sys, DEFAULT_NULL_TOL).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_tolerance_rejected() {
        let sys = assemble_constraints(2, &C).unwrap();
        assert!(null_basis(&sys, 0.0).is_err());
        assert!(null_basis(&sys, 1.0).is_err());
    }

    /// The boundary equations written directly in `a` (sum of σ_ii over a face)
    /// equal the simplified rows times their common factor, for any ν.
    #[test]
    fn simplified_rows_are_nu_independent() {
        let n = 3;
        for &nu in &[0.1, 0.28, -0.5, 0.45] {
            let c = ElasticConstants { e: 1.0, nu };
            let sys = assemble_constraints(n, &c).unwrap();
            for col in 0..n.pow(3) {
                let mut b = vec![0.0; n.pow(3)];
                b[col] = 1.0;
                let p: CosinePotential = coeffs_from_generator(&NullGenerator::new(n, b).unwrap(), &c).unwrap();
                let (j, k, l) = index_unflatten(col + 1, n).unwrap();
                // face x1: l² a2 + k² a3, grouped by (k, l)
                let raw1 = (l * l) as f64 * p.get(2, j, k, l) + (k * k) as f64 * p.get(3, j, k, l);
                let row1 = (k - 1) + (l - 1) * n;
                let scale1 = 2.0 * (1.0 - nu) * (k * k * l * l) as f64;
                assert!((raw1 - scale1 * sys.get(row1, col)).abs() < 1e-9);
                // face x2: j² a3 + l² a1, grouped by (j, l)
                let raw2 = (j * j) as f64 * p.get(3, j, k, l) + (l * l) as f64 * p.get(1, j, k, l);
                let row2 = n * n + (j - 1) + (l - 1) * n;
                let scale2 = 2.0 * nu * (j * j * l * l) as f64;
                assert!((raw2 - scale2 * sys.get(row2, col)).abs() < 1e-9);
                // face x3: k² a1 + j² a2, grouped by (j, k)
                let raw3 = (k * k) as f64 * p.get(1, j, k, l) + (j * j) as f64 * p.get(2, j, k, l);
                let row3 = 2 * n * n + (j - 1) + (k - 1) * n;
                let scale3 = 2.0 * nu * (j * j * k * k) as f64;
                assert!((raw3 - scale3 * sys.get(row3, col)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn csv_layout() {
        let nb = null_basis(&assemble_constraints(2, &C).unwrap(), DEFAULT_NULL_TOL).unwrap();
        let mut buf = Vec::new();
        nb.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "i,j,k,l,b1");
        assert_eq!(lines.len(), 9);
        assert!(lines[6].starts_with("6,2,1,2,"));
    }
}
