//! Constant-coefficient differential operators acting on exact polynomials.
//!
//! An operator is stored as a [`Poly`] in symbols: the monomial with exponents
//! `[e1, e2, e3]` stands for `∂1^e1 ∂2^e2 ∂3^e3`. Products of such operators are
//! then ordinary polynomial products.

use num_traits::One;

use crate::error::Result;
use crate::poly::{Poly, PolyVector, Rational};

fn d2(axis: usize) -> Poly {
    let mut e = [0; 3];
    e[axis] = 2;
    Poly::monomial(e, Rational::one())
}

/// Applies the operator `op` to `a`.
pub fn apply_operator(op: &Poly, a: &Poly) -> Poly {
    let mut out = Poly::zero();
    for (e, c) in op.terms() {
        let mut t = a.clone();
        for (axis, &order) in e.iter().enumerate() {
            t = t.deriv_n(axis, order as usize);
        }
        out += &t.scale(c);
    }
    out
}

fn cross(l: &[Poly; 3], r: &[Poly; 3]) -> Result<[Poly; 3]> {
    Ok([
        &l[1].mul(&r[2])? - &l[2].mul(&r[1])?,
        &l[2].mul(&r[0])? - &l[0].mul(&r[2])?,
        &l[0].mul(&r[1])? - &l[1].mul(&r[0])?,
    ])
}

/// Fourth-order operator mapping a scalar to a potential with `ε22 = ε33 = 0`.
///
/// It is the cross product of the symbol vectors
/// `(∂2² - ν∂3², ∂1² - ν∂3², -ν(∂1² + ∂2²))` and `(∂2² - ∂3², ∂1², -∂1²)`, which
/// expands to `(-(1-ν)∂1² + ν∂2² + ν∂3²)∂1²`, `((1-ν)∂1² - ν∂2² + ν∂3²)∂2²`,
/// `((1-ν)∂1² + ν∂2² - ν∂3²)∂3²`.
pub fn maxwell_operator(nu: &Rational) -> Result<[Poly; 3]> {
    let left = [&d2(1) - &d2(2).scale(nu), &d2(0) - &d2(2).scale(nu), -(&d2(0) + &d2(1)).scale(nu)];
    let right = [&d2(1) - &d2(2), d2(0), -d2(0)];
    cross(&left, &right)
}

/// `Λ = 𝒜 a` for a scalar polynomial `a`.
pub fn potential_from_scalar(a: &Poly, nu: &Rational) -> Result<PolyVector> {
    let op = maxwell_operator(nu)?;
    Ok(std::array::from_fn(|i| apply_operator(&op[i], a)))
}

/// Residuals of `σ33 - ν(σ11 + σ22) = 0` and `σ33 - σ22 = 0` written in the potential:
///
/// ```text
/// ∂1²(Λ2 - νΛ3) + ∂2²(Λ1 - νΛ3) - ν∂3²(Λ1 + Λ2)
/// ∂1²(Λ2 - Λ3) + ∂2²Λ1 - ∂3²Λ1
/// ```
pub fn epsys_residual(lam: &PolyVector, nu: &Rational) -> [Poly; 2] {
    let dd = |p: &Poly, a: usize| p.deriv_n(a, 2);
    let r1 = &(&dd(&(&lam[1] - &lam[2].scale(nu)), 0) + &dd(&(&lam[0] - &lam[2].scale(nu)), 1))
        - &dd(&(&lam[0] + &lam[1]), 2).scale(nu);
    let r2 = &(&dd(&(&lam[1] - &lam[2]), 0) + &dd(&lam[0], 1)) - &dd(&lam[0], 2);
    [r1, r2]
}

/// Double-curl stress of a polynomial potential, storage order `(11, 22, 33, 23, 13, 12)`.
pub fn maxwell_stress_poly(lam: &PolyVector) -> [Poly; 6] {
    let dd = |p: &Poly, a: usize| p.deriv_n(a, 2);
    let dx = |p: &Poly, a: usize, b: usize| -p.deriv(a).deriv(b);
    [
        &dd(&lam[1], 2) + &dd(&lam[2], 1),
        &dd(&lam[2], 0) + &dd(&lam[0], 2),
        &dd(&lam[0], 1) + &dd(&lam[1], 0),
        dx(&lam[0], 1, 2),
        dx(&lam[1], 0, 2),
        dx(&lam[2], 0, 1),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn nu() -> Rational {
        rat(7, 25)
    }

    #[test]
    fn expanded_form_matches_cross_product() {
        let nu = nu();
        let one_m = &Rational::one() - &nu;
        let op = maxwell_operator(&nu).unwrap();
        let expected = [
            (&(&d2(1).scale(&nu) + &d2(2).scale(&nu)) - &d2(0).scale(&one_m)).mul(&d2(0)).unwrap(),
            (&(&d2(0).scale(&one_m) - &d2(1).scale(&nu)) + &d2(2).scale(&nu)).mul(&d2(1)).unwrap(),
            (&(&d2(0).scale(&one_m) + &d2(1).scale(&nu)) - &d2(2).scale(&nu)).mul(&d2(2)).unwrap(),
        ];
        assert_eq!(op, expected);
    }

    /// Taking the first left entry as `∂2² - ν∂2²` breaks the identity.
    #[test]
    fn literal_first_entry_fails_residual() {
        let nu = nu();
        let left = [&d2(1) - &d2(1).scale(&nu), &d2(0) - &d2(2).scale(&nu), -(&d2(0) + &d2(1)).scale(&nu)];
        let right = [&d2(1) - &d2(2), d2(0), -d2(0)];
        let op = cross(&left, &right).unwrap();
        let a = Poly::monomial([4, 2, 0], int(1));
        let lam: PolyVector = std::array::from_fn(|i| apply_operator(&op[i], &a));
        let r = epsys_residual(&lam, &nu);
        assert!(!(r[0].is_zero() && r[1].is_zero()));
    }

    #[test]
    fn zero_scalar_gives_zero_potential() {
        let lam = potential_from_scalar(&Poly::zero(), &nu()).unwrap();
        assert!(lam.iter().all(Poly::is_zero));
    }

    #[test]
    fn x1_sixth() {
        let nu = nu();
        let a = Poly::monomial([6, 0, 0], int(1));
        let lam = potential_from_scalar(&a, &nu).unwrap();
        // Λ1 = -(1-ν) ∂1⁴ x1⁶ = -(1-ν) 360 x1²
        let expected = Poly::monomial([2, 0, 0], -(&Rational::one() - &nu) * int(360));
        assert_eq!(lam[0], expected);
        assert!(lam[1].is_zero());
        assert!(lam[2].is_zero());
        let r = epsys_residual(&lam, &nu);
        assert!(r[0].is_zero() && r[1].is_zero());
    }

    #[test]
    fn random_degree_eight_satisfies_residual_and_strain() {
        let nu = nu();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let a = Poly::random(&mut rng, 8, [true; 3], 0.4);
            let lam = potential_from_scalar(&a, &nu).unwrap();
            let r = epsys_residual(&lam, &nu);
            assert!(r[0].is_zero() && r[1].is_zero());
            // ε22 ∝ σ22 - ν(σ11 + σ33), ε33 ∝ σ33 - ν(σ11 + σ22)
            let s = maxwell_stress_poly(&lam);
            let e22 = &s[1] - &(&s[0] + &s[2]).scale(&nu);
            let e33 = &s[2] - &(&s[0] + &s[1]).scale(&nu);
            assert!(e22.is_zero() && e33.is_zero());
        }
    }
}
