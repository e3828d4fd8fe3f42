//! Shear-only equilibrium fields ("poorly" fields) in exact polynomial arithmetic.
//!
//! The shear vector is `τ = (σ23, σ13, σ12)`. With zero diagonal stress the
//! equilibrium equations read
//!
//! ```text
//! ∂2σ12 + ∂3σ13 = 0
//! ∂1σ12 + ∂3σ23 = 0
//! ∂1σ13 + ∂2σ23 = 0
//! ```
//!
//! which is exactly the poorly condition `∂iXj + ∂jXi = 0 (i < j)` for
//! `X = (σ23, σ13, σ12)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Poly, PolyVector};

fn require_free_of(p: &Poly, name: &'static str, axes: &[usize]) -> Result<()> {
    for &a in axes {
        if p.depends_on(a) {
            return Err(Error::VariableRestriction { name, var: a + 1 });
        }
    }
    Ok(())
}

/// Potentials `U1(x2,x3)`, `U2(x1,x3)`, `U3(x1,x2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawU", into = "RawU")]
pub struct PoorlyParamU {
    u: PolyVector,
}

#[derive(Serialize, Deserialize)]
struct RawU {
    #[serde(rename = "U1")]
    u1: Poly,
    #[serde(rename = "U2")]
    u2: Poly,
    #[serde(rename = "U3")]
    u3: Poly,
}

impl TryFrom<RawU> for PoorlyParamU {
    type Error = Error;
    fn try_from(r: RawU) -> Result<Self> {
        PoorlyParamU::new(r.u1, r.u2, r.u3)
    }
}

impl From<PoorlyParamU> for RawU {
    fn from(p: PoorlyParamU) -> Self {
        let [u1, u2, u3] = p.u;
        RawU { u1, u2, u3 }
    }
}

impl PoorlyParamU {
    /// Fails if `U_i` depends on `x_i`.
    pub fn new(u1: Poly, u2: Poly, u3: Poly) -> Result<Self> {
        require_free_of(&u1, "U1", &[0])?;
        require_free_of(&u2, "U2", &[1])?;
        require_free_of(&u3, "U3", &[2])?;
        Ok(PoorlyParamU { u: [u1, u2, u3] })
    }

    pub fn zero() -> Self {
        PoorlyParamU { u: std::array::from_fn(|_| Poly::zero()) }
    }

    /// Random potentials of total degree `<= degree`.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, degree: u32, density: f64) -> Self {
        let u = std::array::from_fn(|i| {
            let mut vars = [true; 3];
            vars[i] = false;
            Poly::random(rng, degree, vars, density)
        });
        PoorlyParamU { u }
    }

    pub fn components(&self) -> &PolyVector {
        &self.u
    }
}

/// The `(φ, ψ, ω)` form, plus the integration function `c23(x1)` that the
/// base-point-0 antiderivatives leave in `σ23`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpw", into = "RawSpw")]
pub struct PoorlyParamSPW {
    phi: Poly,
    psi: Poly,
    omega: Poly,
    c23: Poly,
}

#[derive(Serialize, Deserialize)]
struct RawSpw {
    phi: Poly,
    psi: Poly,
    omega: Poly,
    #[serde(default)]
    c23: Poly,
}

impl TryFrom<RawSpw> for PoorlyParamSPW {
    type Error = Error;
    fn try_from(r: RawSpw) -> Result<Self> {
        PoorlyParamSPW::new(r.phi, r.psi, r.omega, r.c23)
    }
}

impl From<PoorlyParamSPW> for RawSpw {
    fn from(p: PoorlyParamSPW) -> Self {
        RawSpw { phi: p.phi, psi: p.psi, omega: p.omega, c23: p.c23 }
    }
}

impl PoorlyParamSPW {
    /// `φ(x1,x3)`, `ψ(x2,x3)`, `ω(x1,x2)`, `c23(x1)`.
    pub fn new(phi: Poly, psi: Poly, omega: Poly, c23: Poly) -> Result<Self> {
        require_free_of(&phi, "phi", &[1])?;
        require_free_of(&psi, "psi", &[0])?;
        require_free_of(&omega, "omega", &[2])?;
        require_free_of(&c23, "c23", &[1, 2])?;
        Ok(PoorlyParamSPW { phi, psi, omega, c23 })
    }

    pub fn phi(&self) -> &Poly {
        &self.phi
    }

    pub fn psi(&self) -> &Poly {
        &self.psi
    }

    pub fn omega(&self) -> &Poly {
        &self.omega
    }

    pub fn c23(&self) -> &Poly {
        &self.c23
    }
}

/// `τ = (∂1(U3 - U2), ∂2(U1 - U3), ∂3(U2 - U1))`.
pub fn tau_from_u(p: &PoorlyParamU) -> PolyVector {
    let [u1, u2, u3] = &p.u;
    [(u3 - u2).deriv(0), (u1 - u3).deriv(1), (u2 - u1).deriv(2)]
}

/// `σ12 = φ + ψ`, `σ13 = ω - ∫₀^{x3} ∂2ψ`, `σ23 = c23 - ∫₀^{x3} ∂1φ - ∫₀^{x2} ∂1ω`.
pub fn tau_from_spw(p: &PoorlyParamSPW) -> Result<PolyVector> {
    let s12 = &p.phi + &p.psi;
    let s13 = &p.omega - &p.psi.deriv(1).integrate(2)?;
    let s23 = &(&p.c23 - &p.phi.deriv(0).integrate(2)?) - &p.omega.deriv(0).integrate(1)?;
    Ok([s23, s13, s12])
}

/// Parameters of the `(φ, ψ, ω)` form that generate the same `τ` as `p`.
pub fn convert_u_to_spw(p: &PoorlyParamU) -> Result<PoorlyParamSPW> {
    let [u1, u2, u3] = &p.u;
    let phi = u2.deriv(2);
    let psi = -u1.deriv(2);
    let omega = &u1.at_zero(2).deriv(1) - &u3.deriv(1);
    let c23 = &u3.at_zero(1).deriv(0) - &u2.at_zero(2).deriv(0);
    PoorlyParamSPW::new(phi, psi, omega, c23)
}

/// The three shear-equilibrium residuals of `τ = (σ23, σ13, σ12)`.
pub fn shear_equilibrium_residual(tau: &PolyVector) -> PolyVector {
    let [s23, s13, s12] = tau;
    [&s12.deriv(1) + &s13.deriv(2), &s12.deriv(0) + &s23.deriv(2), &s13.deriv(0) + &s23.deriv(1)]
}

/// Returns whether `∂1X2+∂2X1`, `∂1X3+∂3X1`, `∂2X3+∂3X2` all vanish, and those residuals.
pub fn is_poorly(x: &PolyVector) -> (bool, PolyVector) {
    let r = [&x[1].deriv(0) + &x[0].deriv(1), &x[2].deriv(0) + &x[0].deriv(2), &x[2].deriv(1) + &x[1].deriv(2)];
    (r.iter().all(Poly::is_zero), r)
}

/// `[X, Y]_i = Σ_j (X_j ∂_j Y_i - Y_j ∂_j X_i)`.
pub fn lie_bracket(x: &PolyVector, y: &PolyVector) -> Result<PolyVector> {
    let mut out: PolyVector = std::array::from_fn(|_| Poly::zero());
    for (i, o) in out.iter_mut().enumerate() {
        for j in 0..3 {
            *o += &x[j].mul(&y[i].deriv(j))?;
            *o -= &y[j].mul(&x[i].deriv(j))?;
        }
    }
    Ok(out)
}

/// `(∂1∂2τ3, ∂1∂3τ2, ∂2∂3τ1)`, all zero for an equilibrated shear field.
pub fn mixed_second_derivatives(tau: &PolyVector) -> PolyVector {
    [tau[2].deriv(0).deriv(1), tau[1].deriv(0).deriv(2), tau[0].deriv(1).deriv(2)]
}

/// Symbol of the shear-equilibrium operator acting on `(σ23, σ13, σ12)`.
pub fn principal_symbol(xi: [f64; 3]) -> [[f64; 3]; 3] {
    let [a, b, c] = xi;
    [[0.0, c, b], [c, 0.0, a], [b, a, 0.0]]
}

/// Determinant of [`principal_symbol`], equal to `2ξ1ξ2ξ3`.
pub fn principal_symbol_det(xi: [f64; 3]) -> f64 {
    let m = principal_symbol(xi);
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}
