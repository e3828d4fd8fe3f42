//! Grids, symmetric-tensor fields, isotropic Hooke's law and finite-difference
//! equilibrium diagnostics on the cube `[0, 2π]³`.
//!
//! Lattices are stored flat with `x1` varying fastest: node `(t1, t2, t3)` lives
//! at `t1 + m * (t2 + m * t3)`. Tensor components are always ordered
//! `(11, 22, 33, 23, 13, 12)`, so the last three form the shear vector
//! `τ = (σ23, σ13, σ12)`.

mod export;
mod fd;
mod hooke;

pub use export::{read_field_csv, write_field_csv, write_field_vtk};
pub use fd::{axis_stride, derivative_fd, divergence_fd, fd_stencil, FD_MIN_POINTS};
pub use hooke::{hooke_strain_from_stress, hooke_stress_from_strain};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Isotropic elastic constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticConstants {
    /// Young's modulus.
    pub e: f64,
    /// Poisson ratio.
    pub nu: f64,
}

impl Default for ElasticConstants {
    fn default() -> Self {
        ElasticConstants { e: 1.0, nu: 0.28 }
    }
}

impl ElasticConstants {
    pub fn new(e: f64, nu: f64) -> Result<Self> {
        let c = ElasticConstants { e, nu };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.e.is_finite() && self.nu.is_finite() && self.e > 0.0 && self.nu > -1.0 && self.nu < 0.5 {
            Ok(())
        } else {
            Err(Error::InvalidElasticConstants { e: self.e, nu: self.nu })
        }
    }
}

/// Closed uniform grid on `[0, 2π]³` with `m` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid3 {
    m: usize,
}

impl Grid3 {
    pub fn new(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::GridTooCoarse { m, min: 3 });
        }
        Ok(Grid3 { m })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * PI / (self.m - 1) as f64
    }

    #[inline]
    pub fn coord(&self, t: usize) -> f64 {
        // exact endpoints: the last node is 2π, not (m-1) * h
        2.0 * PI * t as f64 / (self.m - 1) as f64
    }

    pub fn axis(&self) -> Vec<f64> {
        (0..self.m).map(|t| self.coord(t)).collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.m * self.m * self.m
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, t1: usize, t2: usize, t3: usize) -> usize {
        t1 + self.m * (t2 + self.m * t3)
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> [usize; 3] {
        [idx % self.m, (idx / self.m) % self.m, idx / (self.m * self.m)]
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.unindex(idx).iter().any(|&t| t == 0 || t == self.m - 1)
    }
}

/// Tensor component labels in storage order.
pub const COMPONENT_NAMES: [&str; 6] = ["s11", "s22", "s33", "s23", "s13", "s12"];

/// Storage slot of the symmetric component `(i, j)` (0-based axes).
#[inline]
pub fn sym_slot(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) => 3,
        (0, 2) => 4,
        (0, 1) => 5,
        _ => panic!("axis out of range: ({i}, {j})"),
    }
}

/// Symmetric rank-2 tensor field sampled on a [`Grid3`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField3 {
    pub grid: Grid3,
    pub comps: [Vec<f64>; 6],
}

impl SymTensorField3 {
    pub fn zeros(grid: Grid3) -> Self {
        let n = grid.len();
        SymTensorField3 { grid, comps: std::array::from_fn(|_| vec![0.0; n]) }
    }

    pub fn from_components(grid: Grid3, comps: [Vec<f64>; 6]) -> Result<Self> {
        for (c, name) in comps.iter().zip(COMPONENT_NAMES) {
            if c.len() != grid.len() {
                return Err(Error::Shape(format!(
                    "component {name} has {} samples, grid needs {}",
                    c.len(),
                    grid.len()
                )));
            }
        }
        Ok(SymTensorField3 { grid, comps })
    }

    /// Samples `f(x)` at every node; `f` returns the six components in storage order.
    pub fn from_fn(grid: Grid3, f: impl Fn([f64; 3]) -> [f64; 6] + Sync) -> Self {
        use rayon::prelude::*;
        let samples: Vec<[f64; 6]> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let [a, b, c] = grid.unindex(idx);
                f([grid.coord(a), grid.coord(b), grid.coord(c)])
            })
            .collect();
        let comps = std::array::from_fn(|s| samples.iter().map(|v| v[s]).collect());
        SymTensorField3 { grid, comps }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, idx: usize) -> f64 {
        self.comps[sym_slot(i, j)][idx]
    }

    pub fn check_finite(&self) -> Result<()> {
        for (c, name) in self.comps.iter().zip(COMPONENT_NAMES) {
            if let Some(index) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { component: name, index });
            }
        }
        Ok(())
    }

    /// Largest absolute value of one component.
    pub fn max_abs(&self, slot: usize) -> f64 {
        max_abs(&self.comps[slot])
    }

    /// Largest absolute value over all components.
    pub fn max_abs_all(&self) -> f64 {
        (0..6).map(|s| self.max_abs(s)).fold(0.0, f64::max)
    }
}

/// Vector field sampled on a [`Grid3`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    pub grid: Grid3,
    pub comps: [Vec<f64>; 3],
}

impl VectorField3 {
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(|c| max_abs(c)).fold(0.0, f64::max)
    }
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// One face of the cube: axis `k` at `x_k = 0` (`high == false`) or `x_k = 2π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub axis: usize,
    pub high: bool,
}

impl Face {
    /// Faces in report order: x1=0, x1=2π, x2=0, x2=2π, x3=0, x3=2π.
    pub const ALL: [Face; 6] = [
        Face { axis: 0, high: false },
        Face { axis: 0, high: true },
        Face { axis: 1, high: false },
        Face { axis: 1, high: true },
        Face { axis: 2, high: false },
        Face { axis: 2, high: true },
    ];

    pub fn normal_sign(&self) -> f64 {
        if self.high {
            1.0
        } else {
            -1.0
        }
    }

    /// The two in-face axes, ascending.
    pub fn tangent_axes(&self) -> [usize; 2] {
        match self.axis {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        }
    }

    /// Grid index of face node `(a, b)`; `a` runs along the first tangent axis.
    pub fn node(&self, grid: &Grid3, a: usize, b: usize) -> usize {
        let fixed = if self.high { grid.m() - 1 } else { 0 };
        let mut t = [0usize; 3];
        let [ta, tb] = self.tangent_axes();
        t[self.axis] = fixed;
        t[ta] = a;
        t[tb] = b;
        grid.index(t[0], t[1], t[2])
    }
}

/// Traction `σ·n` on each face, `m × m` vectors per face with the first tangent axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceTractions {
    pub faces: [Vec<[f64; 3]>; 6],
}

impl FaceTractions {
    pub fn max_abs(&self) -> f64 {
        self.faces.iter().flat_map(|f| f.iter()).flat_map(|v| v.iter()).fold(0.0, |acc, x| acc.max(x.abs()))
    }
}

/// Evaluates `σ·n` at every boundary node of every face.
pub fn traction_on_boundary(sigma: &SymTensorField3) -> FaceTractions {
    let grid = sigma.grid;
    let m = grid.m();
    let faces = Face::ALL.map(|face| {
        let sign = face.normal_sign();
        let mut out = Vec::with_capacity(m * m);
        for b in 0..m {
            for a in 0..m {
                let idx = face.node(&grid, a, b);
                out.push(std::array::from_fn(|j| sign * sigma.get(face.axis, j, idx)));
            }
        }
        out
    });
    FaceTractions { faces }
}
