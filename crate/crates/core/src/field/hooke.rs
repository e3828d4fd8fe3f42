use super::{ElasticConstants, SymTensorField3};
use crate::error::Result;

/// Pointwise isotropic compliance: `[σ11, σ22, σ33, σ23, σ13, σ12]` to strain.
#[inline]
pub(crate) fn strain_from_stress_point(s: [f64; 6], c: &ElasticConstants) -> [f64; 6] {
    let (e, nu) = (c.e, c.nu);
    let shear = (1.0 + nu) / e;
    [
        (s[0] - nu * (s[1] + s[2])) / e,
        (s[1] - nu * (s[0] + s[2])) / e,
        (s[2] - nu * (s[0] + s[1])) / e,
        shear * s[3],
        shear * s[4],
        shear * s[5],
    ]
}

#[inline]
pub(crate) fn stress_from_strain_point(eps: [f64; 6], c: &ElasticConstants) -> [f64; 6] {
    let (e, nu) = (c.e, c.nu);
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let two_mu = e / (1.0 + nu);
    let tr = eps[0] + eps[1] + eps[2];
    [
        lambda * tr + two_mu * eps[0],
        lambda * tr + two_mu * eps[1],
        lambda * tr + two_mu * eps[2],
        two_mu * eps[3],
        two_mu * eps[4],
        two_mu * eps[5],
    ]
}

fn map_points(
    f: &SymTensorField3,
    c: &ElasticConstants,
    op: fn([f64; 6], &ElasticConstants) -> [f64; 6],
) -> Result<SymTensorField3> {
    c.validate()?;
    f.check_finite()?;
    let mut out = SymTensorField3::zeros(f.grid);
    for idx in 0..f.grid.len() {
        let v = op(std::array::from_fn(|s| f.comps[s][idx]), c);
        for (s, x) in v.into_iter().enumerate() {
            out.comps[s][idx] = x;
        }
    }
    Ok(out)
}

/// Elastic strain from stress under isotropic Hooke's law.
pub fn hooke_strain_from_stress(sigma: &SymTensorField3, c: &ElasticConstants) -> Result<SymTensorField3> {
    map_points(sigma, c, strain_from_stress_point)
}

/// Stress from elastic strain; exact inverse of [`hooke_strain_from_stress`].
pub fn hooke_stress_from_strain(epsilon: &SymTensorField3, c: &ElasticConstants) -> Result<SymTensorField3> {
    map_points(epsilon, c, stress_from_strain_point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::field::Grid3;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn uniform(values: [f64; 6]) -> SymTensorField3 {
        let g = Grid3::new(3).unwrap();
        SymTensorField3::from_fn(g, |_| values)
    }

    #[test]
    fn zero_stress_gives_zero_strain() {
        let eps = hooke_strain_from_stress(&uniform([0.0; 6]), &ElasticConstants::default()).unwrap();
        assert_eq!(eps.max_abs_all(), 0.0);
        let sig = hooke_stress_from_strain(&uniform([0.0; 6]), &ElasticConstants::default()).unwrap();
        assert_eq!(sig.max_abs_all(), 0.0);
    }

    #[test]
    fn hydrostatic_stress() {
        let eps =
            hooke_strain_from_stress(&uniform([1.0, 1.0, 1.0, 0.0, 0.0, 0.0]), &ElasticConstants::default()).unwrap();
        for s in 0..3 {
            assert!(eps.comps[s].iter().all(|v| (v - 0.44).abs() < 1e-15));
        }
        for s in 3..6 {
            assert_eq!(eps.max_abs(s), 0.0);
        }
    }

    #[test]
    fn uniaxial_s22() {
        let eps =
            hooke_strain_from_stress(&uniform([0.0, 1.0, 0.0, 0.0, 0.0, 0.0]), &ElasticConstants::default()).unwrap();
        assert_abs_diff_eq!(eps.comps[0][0], -0.28, epsilon = 1e-15);
        assert_abs_diff_eq!(eps.comps[1][0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eps.comps[2][0], -0.28, epsilon = 1e-15);
    }

    #[test]
    fn shear_uses_tensor_convention() {
        let c = ElasticConstants::new(2.0, 0.25).unwrap();
        let eps = hooke_strain_from_stress(&uniform([0.0, 0.0, 0.0, 1.0, 2.0, 3.0]), &c).unwrap();
        assert_abs_diff_eq!(eps.comps[3][0], 0.625, epsilon = 1e-15);
        assert_abs_diff_eq!(eps.comps[5][0], 1.875, epsilon = 1e-15);
    }

    #[test]
    fn rejects_nan_and_bad_constants() {
        let mut f = uniform([0.0; 6]);
        f.comps[2][3] = f64::NAN;
        assert!(matches!(
            hooke_strain_from_stress(&f, &ElasticConstants::default()),
            Err(Error::NonFinite { component: "s33", index: 3 })
        ));
        let bad = ElasticConstants { e: -1.0, nu: 0.3 };
        assert!(hooke_stress_from_strain(&uniform([0.0; 6]), &bad).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(
            s in prop::array::uniform6(-1e3f64..1e3),
            e in 0.1f64..100.0,
            nu in -0.9f64..0.49,
        ) {
            let c = ElasticConstants::new(e, nu).unwrap();
            let back = stress_from_strain_point(strain_from_stress_point(s, &c), &c);
            let scale = s.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
            for i in 0..6 {
                prop_assert!((back[i] - s[i]).abs() <= 1e-13 * scale,
                    "component {} : {} vs {}", i, back[i], s[i]);
            }
        }
    }
}
