//! Exact search for an isotropic representative `s I + ∇_s u` of a polynomial eigenstrain.

use num_traits::{One, Zero};
use serde::Serialize;

use super::{sym_gradient, PolyEigenstrain};
use crate::error::{Error, Result};
use crate::field::sym_slot;
use crate::poly::{homogeneous_monomials, int, rat, Exponents, Poly, PolyVector, Rational};

/// Outcome of [`isotropic_certificate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub feasible: bool,
    pub degree: u32,
    /// Squared coefficient-space residual of the least-squares fit, as `p/q`.
    #[serde(serialize_with = "ser_rational")]
    pub residual_rational: Rational,
    /// Best `s` and `u` found; exact representation when feasible.
    #[serde(skip)]
    pub s: Poly,
    #[serde(skip)]
    pub u: PolyVector,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

type SparseRow = Vec<(usize, Rational)>;

/// Least squares `min |s I + ∇_s u - eps|²` over `deg s <= bound`,
/// `deg u <= bound + 1`, in exact arithmetic.
///
/// The map preserves homogeneous degree (`s_d` and `u_{d+1}` only reach
/// degree `d`), so the problem splits into one small block per degree.
pub fn isotropic_certificate(eps: &PolyEigenstrain, bound: u32) -> Result<Certificate> {
    let degree = eps.degree();
    if bound < degree {
        return Err(Error::DegreeBoundTooSmall { bound, degree });
    }
    let mut residual = Rational::zero();
    let mut s = Poly::zero();
    let mut u: PolyVector = std::array::from_fn(|_| Poly::zero());
    for d in 0..=bound {
        let low = homogeneous_monomials(d);
        let high = homogeneous_monomials(d + 1);
        let nh = high.len();
        let col_s = |q: usize| q;
        let col_u = |a: usize, q: usize| low.len() + a * nh + q;
        let ncols = low.len() + 3 * nh;
        let find = |e: &Exponents| high.iter().position(|h| h == e).expect("monomial of degree d+1");

        let mut rows: Vec<SparseRow> = Vec::with_capacity(6 * low.len());
        let mut rhs = Vec::with_capacity(6 * low.len());
        for i in 0..3 {
            for j in i..3 {
                let target = eps.get(i, j);
                for (q, mu) in low.iter().enumerate() {
                    let mut row: SparseRow = Vec::new();
                    if i == j {
                        row.push((col_s(q), Rational::one()));
                        let mut e = *mu;
                        e[i] += 1;
                        row.push((col_u(i, find(&e)), int(e[i] as i64)));
                    } else {
                        // (∂_j u_i + ∂_i u_j) / 2
                        for (a, b) in [(i, j), (j, i)] {
                            let mut e = *mu;
                            e[b] += 1;
                            row.push((col_u(a, find(&e)), rat(e[b] as i64, 2)));
                        }
                    }
                    rows.push(row);
                    rhs.push(target.coeff(*mu));
                }
            }
        }
        let (x, r2) = least_squares_exact(&rows, ncols, &rhs);
        residual += r2;
        for (q, mu) in low.iter().enumerate() {
            s.add_term(*mu, x[col_s(q)].clone());
        }
        for (a, ua) in u.iter_mut().enumerate() {
            for (q, e) in high.iter().enumerate() {
                ua.add_term(*e, x[col_u(a, q)].clone());
            }
        }
    }
    debug_assert_eq!(residual.is_zero(), {
        let mut fit = sym_gradient(&u);
        for i in 0..3 {
            fit.comps[sym_slot(i, i)] += &s;
        }
        &fit == eps
    });
    Ok(Certificate { feasible: residual.is_zero(), degree: bound, residual_rational: residual, s, u })
}

/// Solves the normal equations of a sparse rational system exactly (free
/// variables set to zero) and returns the solution with `|b - Ax|²`.
fn least_squares_exact(rows: &[SparseRow], ncols: usize, b: &[Rational]) -> (Vec<Rational>, Rational) {
    let mut g = vec![vec![Rational::zero(); ncols]; ncols];
    let mut h = vec![Rational::zero(); ncols];
    for (row, bi) in rows.iter().zip(b) {
        for (c1, v1) in row {
            if !bi.is_zero() {
                h[*c1] += v1 * bi;
            }
            for (c2, v2) in row {
                g[*c1][*c2] += v1 * v2;
            }
        }
    }
    let x = solve_consistent(g, h);
    let mut r2 = Rational::zero();
    for (row, bi) in rows.iter().zip(b) {
        let mut r = bi.clone();
        for (c, v) in row {
            if !x[*c].is_zero() {
                r -= v * &x[*c];
            }
        }
        r2 += &r * &r;
    }
    (x, r2)
}

/// Gauss-Jordan elimination for a consistent square system; any solution.
fn solve_consistent(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Vec<Rational> {
    let n = b.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..n).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(row, p);
        b.swap(row, p);
        let inv = a[row][col].recip();
        let nz: Vec<usize> = (col..n).filter(|&c| !a[row][c].is_zero()).collect();
        for &c in &nz {
            a[row][c] *= &inv;
        }
        b[row] *= &inv;
        let (prow, pb) = (a[row].clone(), b[row].clone());
        for r in 0..n {
            if r == row || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for &c in &nz {
                let t = &f * &prow[c];
                a[r][c] -= t;
            }
            if !pb.is_zero() {
                b[r] -= &f * &pb;
            }
        }
        pivots.push(col);
        row += 1;
    }
    let mut x = vec![Rational::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = b[r].clone();
    }
    x
}
