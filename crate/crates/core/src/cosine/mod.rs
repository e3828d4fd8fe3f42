//! Null residual-stress fields on the cube built from cosine-series Maxwell potentials.
//!
//! The potential is `Λ_i = Σ a^i_{jkl} cos(j x1) cos(k x2) cos(l x3)` with
//! `j, k, l ∈ 1..=N`, and the stress is its double curl
//!
//! ```text
//! σ11 = ∂3²Λ2 + ∂2²Λ3   σ12 = -∂1∂2Λ3
//! σ22 = ∂1²Λ3 + ∂3²Λ1   σ13 = -∂1∂3Λ2
//! σ33 = ∂2²Λ1 + ∂1²Λ2   σ23 = -∂2∂3Λ1
//! ```
//!
//! which is divergence free term by term. Choosing `a` from a generator `b`
//! (see [`coeffs_from_generator`]) makes `ε22 = ε33 = 0`, and `b` in the null
//! space of the boundary system (see [`null_basis`]) makes the traction vanish.

mod nullspace;
mod operator;

pub use nullspace::{assemble_constraints, null_basis, ConstraintSystem, NullBasis, DEFAULT_NULL_TOL};
pub use operator::{apply_operator, epsys_residual, maxwell_operator, maxwell_stress_poly, potential_from_scalar};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{hooke_strain_from_stress, sym_slot, ElasticConstants, Grid3, SymTensorField3, VectorField3};
use crate::trig::{Axis, Kind, SeparableSeries, TrigField};

/// 1-based column index of `b_{jkl}`: `j + (k-1) N + (l-1) N²`.
pub fn index_flatten(j: usize, k: usize, l: usize, n: usize) -> Result<usize> {
    if n == 0 || !(1..=n).contains(&j) || !(1..=n).contains(&k) || !(1..=n).contains(&l) {
        return Err(Error::IndexOutOfRange { j, k, l, n });
    }
    Ok(j + (k - 1) * n + (l - 1) * n * n)
}

/// Inverse of [`index_flatten`].
pub fn index_unflatten(i: usize, n: usize) -> Result<(usize, usize, usize)> {
    if n == 0 || i == 0 || i > n * n * n {
        return Err(Error::InvalidInput(format!("column index {i} out of range for N = {n}")));
    }
    let j = (i - 1) % n + 1;
    let k = ((i - 1) / n) % n + 1;
    let l = (i - 1) / (n * n) + 1;
    Ok((j, k, l))
}

/// Coefficients `b_{jkl}` stored flat in `[l][k][j]` order (`j` fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullGenerator {
    #[serde(rename = "N")]
    pub n: usize,
    pub b: Vec<f64>,
}

impl NullGenerator {
    pub fn new(n: usize, b: Vec<f64>) -> Result<Self> {
        let g = NullGenerator { n, b };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("N must be at least 1".into()));
        }
        if self.b.len() != self.n.pow(3) {
            return Err(Error::Shape(format!(
                "generator has {} entries, N = {} needs {}",
                self.b.len(),
                self.n,
                self.n.pow(3)
            )));
        }
        if let Some(index) = self.b.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { component: "b", index });
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize, l: usize) -> f64 {
        self.b[j - 1 + self.n * (k - 1 + self.n * (l - 1))]
    }
}

/// Potential coefficients `a^i_{jkl}`, each array flat in `[l][k][j]` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosinePotential {
    #[serde(rename = "N")]
    pub n: usize,
    pub a: [Vec<f64>; 3],
}

impl CosinePotential {
    pub fn zeros(n: usize) -> Self {
        CosinePotential { n, a: std::array::from_fn(|_| vec![0.0; n * n * n]) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("N must be at least 1".into()));
        }
        for (i, a) in self.a.iter().enumerate() {
            if a.len() != self.n.pow(3) {
                return Err(Error::Shape(format!("a{} has {} entries, need {}", i + 1, a.len(), self.n.pow(3))));
            }
            if let Some(index) = a.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { component: ["a1", "a2", "a3"][i], index });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.a[i - 1][j - 1 + self.n * (k - 1 + self.n * (l - 1))]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let n = self.n;
        self.a[i - 1][j - 1 + n * (k - 1 + n * (l - 1))] = v;
    }

    /// `Λ_i` as a cosine series.
    pub fn potential_series(&self, i: usize) -> SeparableSeries {
        let n = self.n;
        let mut s = SeparableSeries::zeros([Kind::Cos; 3], n);
        for l in 1..=n {
            for k in 1..=n {
                for j in 1..=n {
                    s.set([j, k, l], self.get(i, j, k, l));
                }
            }
        }
        s
    }

    /// Double-curl stress of the potential as exact trig series.
    pub fn stress_series(&self) -> StressSeries {
        let lam: [SeparableSeries; 3] = std::array::from_fn(|i| self.potential_series(i + 1));
        let d2 = |s: &SeparableSeries, a: usize| s.derivative(a).derivative(a);
        let sum = |x: SeparableSeries, y: SeparableSeries| {
            let mut f = TrigField::from_series(x);
            f.push(y);
            f
        };
        let comps = [
            sum(d2(&lam[1], 2), d2(&lam[2], 1)),
            sum(d2(&lam[2], 0), d2(&lam[0], 2)),
            sum(d2(&lam[0], 1), d2(&lam[1], 0)),
            TrigField::from_series(lam[0].derivative(1).derivative(2).scaled(-1.0)),
            TrigField::from_series(lam[1].derivative(0).derivative(2).scaled(-1.0)),
            TrigField::from_series(lam[2].derivative(0).derivative(1).scaled(-1.0)),
        ];
        StressSeries { comps }
    }
}

/// `a^i_{jkl} = b_{jkl} v_i(j, k, l; ν)` with
/// `v = (j²(-(1-ν)j² + νk² + νl²), k²((1-ν)j² - νk² + νl²), l²((1-ν)j² + νk² - νl²))`.
pub fn coeffs_from_generator(g: &NullGenerator, c: &ElasticConstants) -> Result<CosinePotential> {
    g.validate()?;
    c.validate()?;
    let nu = c.nu;
    let n = g.n;
    let mut p = CosinePotential::zeros(n);
    for l in 1..=n {
        for k in 1..=n {
            for j in 1..=n {
                let b = g.get(j, k, l);
                let (j2, k2, l2) = ((j * j) as f64, (k * k) as f64, (l * l) as f64);
                p.set(1, j, k, l, b * j2 * (-(1.0 - nu) * j2 + nu * k2 + nu * l2));
                p.set(2, j, k, l, b * k2 * ((1.0 - nu) * j2 - nu * k2 + nu * l2));
                p.set(3, j, k, l, b * l2 * ((1.0 - nu) * j2 + nu * k2 - nu * l2));
            }
        }
    }
    Ok(p)
}

/// Six stress components as exact trig series, storage order `(11, 22, 33, 23, 13, 12)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StressSeries {
    pub comps: [TrigField; 6],
}

impl StressSeries {
    pub fn component(&self, i: usize, j: usize) -> &TrigField {
        &self.comps[sym_slot(i, j)]
    }

    /// `Div(σ)_j = Σ_i ∂_i σ_ij` as series.
    pub fn divergence(&self) -> [TrigField; 3] {
        std::array::from_fn(|j| {
            let mut f = TrigField::default();
            for i in 0..3 {
                f.add(&self.component(i, j).derivative(i));
            }
            f
        })
    }

    pub fn eval(&self, grid: Grid3) -> SymTensorField3 {
        let comps = std::array::from_fn(|s| self.comps[s].eval_on([Axis::Closed(grid.m()); 3]));
        SymTensorField3 { grid, comps }
    }

    pub fn eval_point(&self, x: [f64; 3]) -> [f64; 6] {
        std::array::from_fn(|s| self.comps[s].eval_point(x))
    }
}

/// Samples the Maxwell stress of `p` on the grid from analytic derivatives.
pub fn eval_stress(p: &CosinePotential, grid: Grid3) -> SymTensorField3 {
    p.stress_series().eval(grid)
}

/// Elastic strain of the potential's stress field.
pub fn eval_strain(p: &CosinePotential, grid: Grid3, c: &ElasticConstants) -> Result<SymTensorField3> {
    hooke_strain_from_stress(&eval_stress(p, grid), c)
}

/// Analytic divergence of the potential's stress sampled on the grid.
pub fn eval_divergence(p: &CosinePotential, grid: Grid3) -> VectorField3 {
    let div = p.stress_series().divergence();
    VectorField3 { grid, comps: std::array::from_fn(|j| div[j].eval_on([Axis::Closed(grid.m()); 3])) }
}
