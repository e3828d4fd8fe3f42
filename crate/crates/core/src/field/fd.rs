use rayon::prelude::*;

use super::{Grid3, SymTensorField3, VectorField3};
use crate::error::{Error, Result};

/// Minimum points per axis for the divergence stencils.
pub const FD_MIN_POINTS: usize = 5;

/// Offsets (in steps along the axis) and weights of the second-order stencil
/// for `d/dx` at position `t` on an axis of `m` points with spacing `h`.
pub fn fd_stencil(m: usize, t: usize, h: f64) -> [(isize, f64); 3] {
    let inv2h = 1.0 / (2.0 * h);
    if t == 0 {
        [(0, -3.0 * inv2h), (1, 4.0 * inv2h), (2, -inv2h)]
    } else if t == m - 1 {
        [(0, 3.0 * inv2h), (-1, -4.0 * inv2h), (-2, inv2h)]
    } else {
        [(-1, -inv2h), (1, inv2h), (0, 0.0)]
    }
}

/// Stride of `axis` in the flat lattice index.
pub fn axis_stride(m: usize, axis: usize) -> usize {
    m.pow(axis as u32)
}

/// Second-order derivative of a lattice along `axis`: central in the interior,
/// three-point one-sided on the two faces.
pub fn derivative_fd(grid: &Grid3, values: &[f64], axis: usize) -> Vec<f64> {
    let m = grid.m();
    let h = grid.spacing();
    let stride = axis_stride(m, axis) as isize;
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let t = grid.unindex(idx)[axis];
            fd_stencil(m, t, h).iter().map(|&(o, w)| w * values[(idx as isize + o * stride) as usize]).sum()
        })
        .collect()
}

/// `Div(σ)_j = Σ_i ∂_i σ_ij` with second-order finite differences.
pub fn divergence_fd(sigma: &SymTensorField3) -> Result<VectorField3> {
    let grid = sigma.grid;
    if grid.m() < FD_MIN_POINTS {
        return Err(Error::GridTooCoarse { m: grid.m(), min: FD_MIN_POINTS });
    }
    let comps = std::array::from_fn(|j| {
        let mut acc = vec![0.0; grid.len()];
        for i in 0..3 {
            let d = derivative_fd(&grid, &sigma.comps[super::sym_slot(i, j)], i);
            acc.iter_mut().zip(d).for_each(|(a, v)| *a += v);
        }
        acc
    });
    Ok(VectorField3 { grid, comps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_is_divergence_free() {
        let g = Grid3::new(7).unwrap();
        let s = SymTensorField3::from_fn(g, |_| [1.0, -2.0, 3.0, 0.5, 0.25, 4.0]);
        assert!(divergence_fd(&s).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn linear_field_is_exact() {
        let g = Grid3::new(9).unwrap();
        let s = SymTensorField3::from_fn(g, |x| [x[0], 0.0, 0.0, 0.0, 0.0, 0.0]);
        let d = divergence_fd(&s).unwrap();
        assert!(d.comps[0].iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(d.comps[1].iter().chain(&d.comps[2]).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn quadratic_is_exact_at_faces() {
        let g = Grid3::new(6).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|i| g.coord(g.unindex(i)[2]).powi(2)).collect();
        let d = derivative_fd(&g, &vals, 2);
        for (i, v) in d.iter().enumerate() {
            let x = g.coord(g.unindex(i)[2]);
            assert!((v - 2.0 * x).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let g = Grid3::new(4).unwrap();
        assert!(matches!(divergence_fd(&SymTensorField3::zeros(g)), Err(Error::GridTooCoarse { m: 4, min: 5 })));
    }
}
