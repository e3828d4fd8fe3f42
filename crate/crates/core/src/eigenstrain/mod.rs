//! Reduction of an eigenstrain to a diagonal one generating the same residual stress.
//!
//! Any `∇_s u` is a null eigenstrain, so `eps` and `eps - ∇_s u` produce the
//! same stress. Choosing `u` to absorb every off-diagonal entry leaves a
//! diagonal tensor.

mod certificate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::sym_slot;
use crate::poly::{rat, Poly, PolyVector};
use crate::poorly::PoorlyParamU;

pub use certificate::{isotropic_certificate, Certificate};

/// JSON keys of the six components, in storage order.
pub const EIGENSTRAIN_KEYS: [&str; 6] = ["11", "22", "33", "23", "13", "12"];

/// Symmetric tensor of polynomials, storage order `(11, 22, 33, 23, 13, 12)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolyEigenstrain {
    pub comps: [Poly; 6],
}

impl PolyEigenstrain {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.comps[sym_slot(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.comps[sym_slot(i, j)] = p;
    }

    pub fn diagonal(e: &PolyVector) -> Self {
        let mut out = Self::zero();
        for (i, p) in e.iter().enumerate() {
            out.comps[i] = p.clone();
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.comps.iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        self.comps[3..].iter().all(Poly::is_zero)
    }

    /// `ε12 = -x1² x3 / 2`, all other components zero. It reduces to a diagonal
    /// eigenstrain but to no isotropic one.
    pub fn anisotropic_example() -> Self {
        let mut eps = Self::zero();
        eps.set(0, 1, Poly::monomial([2, 0, 1], rat(-1, 2)));
        eps
    }

    /// Random tensor with every component of total degree `<= degree`.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, degree: u32, density: f64) -> Self {
        PolyEigenstrain { comps: std::array::from_fn(|_| Poly::random(rng, degree, [true; 3], density)) }
    }
}

impl std::ops::Sub for &PolyEigenstrain {
    type Output = PolyEigenstrain;
    fn sub(self, rhs: &PolyEigenstrain) -> PolyEigenstrain {
        PolyEigenstrain { comps: std::array::from_fn(|s| &self.comps[s] - &rhs.comps[s]) }
    }
}

impl Serialize for PolyEigenstrain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<&str, &Poly> = EIGENSTRAIN_KEYS.iter().copied().zip(&self.comps).collect();
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyEigenstrain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mut map: BTreeMap<String, Poly> = BTreeMap::deserialize(d)?;
        if let Some(k) = map.keys().find(|k| !EIGENSTRAIN_KEYS.contains(&k.as_str())) {
            return Err(serde::de::Error::custom(format!("unknown component key {k:?}")));
        }
        Ok(PolyEigenstrain { comps: EIGENSTRAIN_KEYS.map(|k| map.remove(k).unwrap_or_default()) })
    }
}

/// `[∇_s u]_ij = (∂_j u_i + ∂_i u_j) / 2`.
pub fn sym_gradient(u: &PolyVector) -> PolyEigenstrain {
    let half = rat(1, 2);
    let mut out = PolyEigenstrain::zero();
    for i in 0..3 {
        for j in i..3 {
            let p = if i == j { u[i].deriv(i) } else { (&u[i].deriv(j) + &u[j].deriv(i)).scale(&half) };
            out.set(i, j, p);
        }
    }
    out
}

/// Potential `u` and diagonal entries `e` with `eps - diag(e) = ∇_s u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionResult {
    pub u: PolyVector,
    pub e: PolyVector,
}

/// Builds the particular `u` with all integration constants zero.
///
/// `∂2∂3u1 = -∂1ε23 + ∂2ε13 + ∂3ε12` (and cyclic) are integrated from the
/// origin. That alone reproduces `2ε12` only up to its trace on `x3 = 0`
/// (similarly for the other pairs), so a correction depending on two
/// variables at a time is added before reading off `e_i = ε_ii - ∂_i u_i`.
pub fn diagonalize(eps: &PolyEigenstrain) -> Result<ReductionResult> {
    let d = |i: usize, j: usize, k: usize| eps.get(j, k).deriv(i);
    let r1 = &(&d(1, 0, 2) + &d(2, 0, 1)) - &d(0, 1, 2);
    let r2 = &(&d(0, 1, 2) + &d(2, 0, 1)) - &d(1, 0, 2);
    let r3 = &(&d(0, 1, 2) + &d(1, 0, 2)) - &d(2, 0, 1);
    let mut u = [r1.integrate(1)?.integrate(2)?, r2.integrate(0)?.integrate(2)?, r3.integrate(0)?.integrate(1)?];

    let two = rat(2, 1);
    let g12 = eps.get(0, 1).at_zero(2).scale(&two);
    let g13 = eps.get(0, 2).at_zero(1).scale(&two);
    let g23 = eps.get(1, 2).at_zero(0).scale(&two);
    u[1] += &g12.integrate(0)?;
    u[2] += &(&g13.integrate(0)? + &g23.integrate(1)?);

    let e = std::array::from_fn(|i| eps.get(i, i) - &u[i].deriv(i));
    Ok(ReductionResult { u, e })
}

/// Homogeneous potential `u⁰_i = ∂_i(U_{i+1} - U_{i+2})` (indices cyclic).
/// Its symmetric gradient is diagonal.
pub fn homogeneous_u(p: &PoorlyParamU) -> PolyVector {
    let u = p.components();
    std::array::from_fn(|i| (&u[(i + 1) % 3] - &u[(i + 2) % 3]).deriv(i))
}

/// Checks the reduction identity `eps - diag(e) = ∇_s u` exactly.
pub fn check_reduction(eps: &PolyEigenstrain, r: &ReductionResult) -> bool {
    eps - &PolyEigenstrain::diagonal(&r.e) == sym_gradient(&r.u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, vec_add, vec_is_zero};
    use crate::poorly::is_poorly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mono(e: [u32; 3], n: i64, d: i64) -> Poly {
        Poly::monomial(e, rat(n, d))
    }

    fn counterexample() -> PolyEigenstrain {
        let mut eps = PolyEigenstrain::zero();
        eps.set(0, 1, mono([2, 0, 1], -1, 2));
        eps
    }

    #[test]
    fn sym_gradient_examples() {
        let id = sym_gradient(&[Poly::var(0), Poly::var(1), Poly::var(2)]);
        assert_eq!(id, PolyEigenstrain::diagonal(&std::array::from_fn(|_| Poly::constant(int(1)))));
        let g = sym_gradient(&[Poly::var(1), Poly::zero(), Poly::zero()]);
        let mut expected = PolyEigenstrain::zero();
        expected.set(1, 0, Poly::constant(rat(1, 2)));
        assert_eq!(g, expected);
    }

    #[test]
    fn zero_input() {
        let r = diagonalize(&PolyEigenstrain::zero()).unwrap();
        assert!(vec_is_zero(&r.u) && vec_is_zero(&r.e));
    }

    #[test]
    fn pure_null_eigenstrain() {
        let mut eps = PolyEigenstrain::zero();
        eps.set(0, 1, Poly::var(2));
        let r = diagonalize(&eps).unwrap();
        assert_eq!(r.u, [mono([0, 1, 1], 1, 1), mono([1, 0, 1], 1, 1), mono([1, 1, 0], -1, 1)]);
        assert!(vec_is_zero(&r.e));
        assert!(check_reduction(&eps, &r));
    }

    #[test]
    fn counterexample_reduction() {
        let eps = counterexample();
        let r = diagonalize(&eps).unwrap();
        assert_eq!(r.u, [mono([2, 1, 1], -1, 2), mono([3, 0, 1], -1, 6), mono([3, 1, 0], 1, 6)]);
        assert_eq!(r.e, [mono([1, 1, 1], 1, 1), Poly::zero(), Poly::zero()]);
        assert!(check_reduction(&eps, &r));
        // off-diagonals of ∇_s u reproduce the input
        assert_eq!(sym_gradient(&r.u).get(0, 1), &mono([2, 0, 1], -1, 2));
    }

    #[test]
    fn correction_terms_are_needed() {
        // ε12 = x1 x2 has no x3: the double integral alone gives u = 0
        let mut eps = PolyEigenstrain::zero();
        eps.set(0, 1, mono([1, 1, 0], 1, 1));
        eps.set(0, 2, mono([2, 0, 1], 3, 1));
        eps.set(1, 2, mono([0, 2, 1], -2, 5));
        let r = diagonalize(&eps).unwrap();
        assert!(check_reduction(&eps, &r));
    }

    #[test]
    fn homogeneous_part() {
        let u3 = PoorlyParamU::new(Poly::zero(), Poly::zero(), mono([1, 1, 0], 1, 1)).unwrap();
        assert_eq!(homogeneous_u(&u3), [-Poly::var(1), Poly::var(0), Poly::zero()]);
        assert!(vec_is_zero(&homogeneous_u(&PoorlyParamU::zero())));
        assert!(sym_gradient(&homogeneous_u(&u3)).is_diagonal());
    }

    #[test]
    fn homogeneous_shift_gives_another_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let eps = PolyEigenstrain::random(&mut rng, 4, 0.3);
            let p = PoorlyParamU::random(&mut rng, 5, 0.4);
            let r = diagonalize(&eps).unwrap();
            let u0 = homogeneous_u(&p);
            assert!(is_poorly(&u0).0);
            let uc = p.components();
            let e2 = std::array::from_fn(|i| &r.e[i] - &(&uc[(i + 1) % 3] - &uc[(i + 2) % 3]).deriv_n(i, 2));
            let shifted = ReductionResult { u: vec_add(&r.u, &u0), e: e2 };
            assert!(check_reduction(&eps, &shifted));
        }
    }

    #[test]
    fn random_reductions_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let eps = PolyEigenstrain::random(&mut rng, 4, 0.4);
            let r = diagonalize(&eps).unwrap();
            assert!(check_reduction(&eps, &r));
        }
    }

    #[test]
    fn json_keys() {
        let eps = counterexample();
        let s = serde_json::to_string(&eps).unwrap();
        assert!(s.starts_with(r#"{"11":[],"12":[{"exponents":[2,0,1],"coeff":"-1/2"}]"#), "{s}");
        assert_eq!(serde_json::from_str::<PolyEigenstrain>(&s).unwrap(), eps);
        assert!(serde_json::from_str::<PolyEigenstrain>(r#"{"21":[]}"#).is_err());
        assert_eq!(serde_json::from_str::<PolyEigenstrain>("{}").unwrap(), PolyEigenstrain::zero());
    }
}
