//! Sparse multivariate polynomials in `x1, x2, x3` with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Exponent triple `[e1, e2, e3]` for `x1^e1 x2^e2 x3^e3`.
pub type Exponents = [u32; 3];

/// Default bound on total degree for degree-raising operations.
pub const DEFAULT_DEGREE_CAP: u32 = 12;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Polynomial with no zero coefficients stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Exponents, Rational>,
}

/// Vector of three polynomial components.
pub type PolyVector = [Poly; 3];

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Rational) -> Self {
        Poly::monomial([0, 0, 0], c)
    }

    /// The coordinate function `x_{axis+1}`.
    pub fn var(axis: usize) -> Self {
        let mut e = [0; 3];
        e[axis] = 1;
        Poly::monomial(e, Rational::one())
    }

    pub fn monomial(exps: Exponents, coeff: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(exps, coeff);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Exponents, Rational)>) -> Self {
        let mut p = Poly::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exps: Exponents, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(exps).or_insert_with(Rational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: Exponents) -> Rational {
        self.terms.get(&exps).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree; the zero polynomial reports 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn depends_on(&self, axis: usize) -> bool {
        self.terms.keys().any(|e| e[axis] > 0)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect() }
    }

    pub fn checked_mul(&self, other: &Poly, cap: u32) -> Result<Poly> {
        let degree = self.degree() + other.degree();
        if !self.is_zero() && !other.is_zero() && degree > cap {
            return Err(Error::DegreeCap { degree, cap });
        }
        let mut out = Poly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        Ok(out)
    }

    /// Product under [`DEFAULT_DEGREE_CAP`].
    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        self.checked_mul(other, DEFAULT_DEGREE_CAP)
    }

    /// `∂/∂x_{axis+1}`.
    pub fn deriv(&self, axis: usize) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            if e[axis] > 0 {
                let mut ne = *e;
                ne[axis] -= 1;
                out.add_term(ne, c * int(e[axis] as i64));
            }
        }
        out
    }

    /// Repeated derivative `∂^order`.
    pub fn deriv_n(&self, axis: usize, order: usize) -> Poly {
        (0..order).fold(self.clone(), |p, _| p.deriv(axis))
    }

    /// Antiderivative `∫_0^{x_axis} p ds`, under [`DEFAULT_DEGREE_CAP`].
    pub fn integrate(&self, axis: usize) -> Result<Poly> {
        self.integrate_capped(axis, DEFAULT_DEGREE_CAP)
    }

    pub fn integrate_capped(&self, axis: usize, cap: u32) -> Result<Poly> {
        if !self.is_zero() && self.degree() + 1 > cap {
            return Err(Error::DegreeCap { degree: self.degree() + 1, cap });
        }
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            let mut ne = *e;
            ne[axis] += 1;
            out.add_term(ne, c / int(ne[axis] as i64));
        }
        Ok(out)
    }

    /// Restriction to the plane `x_axis = 0`.
    pub fn at_zero(&self, axis: usize) -> Poly {
        Poly::from_terms(self.terms.iter().filter(|(e, _)| e[axis] == 0).map(|(e, c)| (*e, c.clone())))
    }

    pub fn eval(&self, x: &[Rational; 3]) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &ei) in x.iter().zip(e) {
                for _ in 0..ei {
                    t *= xi;
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, x: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c.to_f64().unwrap_or(f64::NAN)
                    * x[0].powi(e[0] as i32)
                    * x[1].powi(e[1] as i32)
                    * x[2].powi(e[2] as i32)
            })
            .sum()
    }

    /// Random polynomial of total degree `<= degree`, using only the variables
    /// flagged in `vars`. Coefficients are small rationals `p/q`; roughly
    /// `density` of the admissible monomials are populated.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, degree: u32, vars: [bool; 3], density: f64) -> Poly {
        let mut p = Poly::zero();
        for e in monomials_up_to(degree) {
            if (0..3).any(|a| e[a] > 0 && !vars[a]) {
                continue;
            }
            if rng.gen::<f64>() < density {
                let num = rng.gen_range(-9i64..=9);
                let den = rng.gen_range(1i64..=6);
                p.add_term(e, rat(num, den));
            }
        }
        p
    }
}

/// All exponent triples with total degree `<= degree`, graded then lexicographic.
pub fn monomials_up_to(degree: u32) -> Vec<Exponents> {
    (0..=degree).flat_map(homogeneous_monomials).collect()
}

/// Exponent triples with total degree exactly `degree`.
pub fn homogeneous_monomials(degree: u32) -> Vec<Exponents> {
    let mut out = Vec::new();
    for e1 in (0..=degree).rev() {
        for e2 in (0..=degree - e1).rev() {
            out.push([e1, e2, degree - e1 - e2]);
        }
    }
    out
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self += &rhs;
        self
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c.clone());
        }
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        self -= &rhs;
        self
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, -c.clone());
        }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl Mul<&Rational> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Rational) -> Poly {
        self.scale(rhs)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // highest degree first reads more naturally
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then(b.0.cmp(a.0))
        });
        for (n, (e, c)) in terms.into_iter().enumerate() {
            let mag = c.abs();
            if n == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let is_const = e.iter().all(|&x| x == 0);
            if !mag.is_one() || is_const {
                write!(f, "{mag}")?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut first = true;
            for (axis, &p) in e.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "x{}", axis + 1)?;
                if p > 1 {
                    write!(f, "^{p}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exponents: [u32; 3],
    coeff: String,
}

/// Parses `"p/q"` or `"p"`; decimals are rejected.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.contains('.') || s.contains('e') || s.contains('E') {
        return Err(Error::Parse(format!("rational must be p/q, got {s:?}")));
    }
    let r: Rational = s.parse().map_err(|e| Error::Parse(format!("bad rational {s:?}: {e:?}")))?;
    Ok(r)
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr: Vec<TermRepr> =
            self.terms.iter().map(|(e, c)| TermRepr { exponents: *e, coeff: c.to_string() }).collect();
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = Vec::<TermRepr>::deserialize(d)?;
        let mut p = Poly::zero();
        for t in repr {
            let c = parse_rational(&t.coeff).map_err(serde::de::Error::custom)?;
            p.add_term(t.exponents, c);
        }
        Ok(p)
    }
}

pub fn vec_is_zero(v: &PolyVector) -> bool {
    v.iter().all(Poly::is_zero)
}

pub fn vec_add(a: &PolyVector, b: &PolyVector) -> PolyVector {
    std::array::from_fn(|i| &a[i] + &b[i])
}

pub fn vec_sub(a: &PolyVector, b: &PolyVector) -> PolyVector {
    std::array::from_fn(|i| &a[i] - &b[i])
}
