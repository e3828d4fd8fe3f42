//! Separable trigonometric series on the cube.
//!
//! A [`SeparableSeries`] is `Σ c[f1,f2,f3] P(f) T1(f1 x1) T2(f2 x2) T3(f3 x3)` where each
//! `T_a` is fixed per axis to either `cos` or `sin`, frequencies run over
//! `0..=n` and `P(f) = f1^p1 f2^p2 f3^p3` is an integer multiplier kept
//! symbolic. Derivatives only bump `p` and flip signs, so two derivative
//! chains that agree mathematically give bitwise equal coefficients whatever
//! order they were applied in, and cancel exactly when added.

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Cos,
    Sin,
}

impl Kind {
    #[inline]
    fn of(self, angle: f64) -> f64 {
        match self {
            Kind::Cos => angle.cos(),
            Kind::Sin => angle.sin(),
        }
    }

    #[inline]
    fn eval(self, f: usize, x: f64) -> f64 {
        self.of(f as f64 * x)
    }
}

/// Sample points along one axis.
#[derive(Debug, Clone, Copy)]
pub enum Axis<'a> {
    /// `n` equispaced nodes covering the closed interval `[0, 2π]`. Phases are
    /// reduced in integers, so `sin` vanishes exactly at both ends.
    Closed(usize),
    Points(&'a [f64]),
}

impl Axis<'_> {
    pub fn len(&self) -> usize {
        match self {
            Axis::Closed(n) => *n,
            Axis::Points(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `T(f x_p)` for `f in 0..s`, `p` fastest.
    fn table(&self, kind: Kind, s: usize) -> Vec<f64> {
        let mut t = Vec::with_capacity(s * self.len());
        match *self {
            Axis::Closed(n) => {
                let period = (n.max(2) - 1) as u64;
                for f in 0..s as u64 {
                    t.extend((0..n as u64).map(|p| {
                        let r = (f * p) % period;
                        kind.of(std::f64::consts::TAU * r as f64 / period as f64)
                    }));
                }
            }
            Axis::Points(pts) => {
                for f in 0..s {
                    t.extend(pts.iter().map(|&x| kind.eval(f, x)));
                }
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparableSeries {
    pub kinds: [Kind; 3],
    n: usize,
    coef: Vec<f64>,
    mult: [u32; 3],
}

impl SeparableSeries {
    pub fn zeros(kinds: [Kind; 3], n: usize) -> Self {
        SeparableSeries { kinds, n, coef: vec![0.0; (n + 1).pow(3)], mult: [0; 3] }
    }

    #[inline]
    pub fn max_freq(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, f: [usize; 3]) -> usize {
        let s = self.n + 1;
        f[0] + s * (f[1] + s * f[2])
    }

    #[inline]
    fn multiplier(&self, f: [usize; 3]) -> f64 {
        (0..3).map(|a| (f[a] as u64).pow(self.mult[a])).product::<u64>() as f64
    }

    /// Effective coefficient of `T1(f1 x1) T2(f2 x2) T3(f3 x3)`.
    #[inline]
    pub fn get(&self, f: [usize; 3]) -> f64 {
        let c = self.coef[self.slot(f)];
        if self.mult == [0; 3] {
            c
        } else {
            c * self.multiplier(f)
        }
    }

    pub fn set(&mut self, f: [usize; 3], v: f64) {
        self.materialize();
        let i = self.slot(f);
        self.coef[i] = v;
    }

    /// Folds the symbolic multiplier into the coefficients.
    fn materialize(&mut self) {
        if self.mult != [0; 3] {
            self.coef = self.effective();
            self.mult = [0; 3];
        }
    }

    fn effective(&self) -> Vec<f64> {
        self.freqs().map(|f| self.get(f)).collect()
    }

    fn freqs(&self) -> impl Iterator<Item = [usize; 3]> {
        let s = self.n + 1;
        (0..s * s * s).map(move |i| [i % s, (i / s) % s, i / (s * s)])
    }

    pub fn scaled(&self, c: f64) -> Self {
        SeparableSeries { coef: self.coef.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    /// `∂/∂x_{axis+1}`.
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = self.clone();
        // d/dx cos(fx) = -f sin(fx), d/dx sin(fx) = f cos(fx)
        match self.kinds[axis] {
            Kind::Cos => {
                out.kinds[axis] = Kind::Sin;
                out.coef.iter_mut().for_each(|c| *c = -*c);
            }
            Kind::Sin => out.kinds[axis] = Kind::Cos,
        }
        out.mult[axis] += 1;
        out
    }

    /// `∫_0^{x_{axis+1}} (·) ds`. Fails if a nonzero `cos(0·x)` term would integrate to `x`.
    pub fn antiderivative(&self, axis: usize) -> Result<Self> {
        let mut kinds = self.kinds;
        let mut out;
        match self.kinds[axis] {
            Kind::Cos => {
                kinds[axis] = Kind::Sin;
                out = SeparableSeries::zeros(kinds, self.n);
                for f in self.freqs() {
                    let v = self.get(f);
                    if v == 0.0 {
                        continue;
                    }
                    if f[axis] == 0 {
                        return Err(Error::NonPeriodicAntiderivative { axis: axis + 1 });
                    }
                    out.set(f, v / f[axis] as f64);
                }
            }
            Kind::Sin => {
                // ∫_0^x sin(fs) ds = (1 - cos(fx)) / f
                kinds[axis] = Kind::Cos;
                out = SeparableSeries::zeros(kinds, self.n);
                for f in self.freqs() {
                    let v = self.get(f);
                    if v == 0.0 || f[axis] == 0 {
                        continue;
                    }
                    let w = v / f[axis] as f64;
                    let idx = out.slot(f);
                    out.coef[idx] -= w;
                    let mut f0 = f;
                    f0[axis] = 0;
                    let idx0 = out.slot(f0);
                    out.coef[idx0] += w;
                }
            }
        }
        Ok(out)
    }

    /// Evaluates at a point.
    pub fn eval_point(&self, x: [f64; 3]) -> f64 {
        let mut acc = 0.0;
        for f3 in 0..=self.n {
            let c3 = self.kinds[2].eval(f3, x[2]);
            for f2 in 0..=self.n {
                let c2 = self.kinds[1].eval(f2, x[1]);
                let mut inner = 0.0;
                for f1 in 0..=self.n {
                    inner += self.get([f1, f2, f3]) * self.kinds[0].eval(f1, x[0]);
                }
                acc += c3 * c2 * inner;
            }
        }
        acc
    }

    /// Evaluates on the tensor-product lattice `xs1 × xs2 × xs3`, `x1` fastest.
    pub fn eval_on_axes(&self, axes: [&[f64]; 3]) -> Vec<f64> {
        self.eval_on(axes.map(Axis::Points))
    }

    /// Evaluates on a tensor-product lattice, `x1` fastest.
    ///
    /// Sums run `f1` innermost, then `f2`, then `f3`, independently of thread count.
    pub fn eval_on(&self, axes: [Axis; 3]) -> Vec<f64> {
        let coef = self.effective();
        if coef.iter().all(|&c| c == 0.0) {
            return vec![0.0; axes.iter().map(Axis::len).product()];
        }
        let s = self.n + 1;
        let [m1, m2, m3] = axes.map(|a| a.len());
        let tables: [Vec<f64>; 3] = std::array::from_fn(|a| axes[a].table(self.kinds[a], s));
        // stage 1: t1[(p1 * s + f2) * s + f3] = Σ_f1 T(f1, p1) c
        let mut t1 = vec![0.0; m1 * s * s];
        for p1 in 0..m1 {
            for f3 in 0..s {
                for f2 in 0..s {
                    let mut acc = 0.0;
                    for f1 in 0..s {
                        acc += tables[0][f1 * m1 + p1] * coef[f1 + s * (f2 + s * f3)];
                    }
                    t1[(p1 * s + f2) * s + f3] = acc;
                }
            }
        }
        // stage 2: t2[(p2 * m1 + p1) * s + f3]
        let mut t2 = vec![0.0; m1 * m2 * s];
        for p2 in 0..m2 {
            for p1 in 0..m1 {
                for f3 in 0..s {
                    let mut acc = 0.0;
                    for f2 in 0..s {
                        acc += tables[1][f2 * m2 + p2] * t1[(p1 * s + f2) * s + f3];
                    }
                    t2[(p2 * m1 + p1) * s + f3] = acc;
                }
            }
        }
        let mut out = vec![0.0; m1 * m2 * m3];
        out.par_chunks_mut(m1 * m2).enumerate().for_each(|(p3, plane)| {
            for (q, v) in plane.iter_mut().enumerate() {
                let mut acc = 0.0;
                for f3 in 0..s {
                    acc += tables[2][f3 * m3 + p3] * t2[q * s + f3];
                }
                *v = acc;
            }
        });
        out
    }
}

/// Sum of separable series.
///
/// Terms with equal kinds and multipliers are merged by adding raw
/// coefficients (exact cancellation); evaluation first combines all terms of
/// a kind pattern into one coefficient array.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigField {
    pub terms: Vec<SeparableSeries>,
}

impl TrigField {
    pub fn from_series(s: SeparableSeries) -> Self {
        TrigField { terms: vec![s] }
    }

    pub fn push(&mut self, s: SeparableSeries) {
        if let Some(t) = self.terms.iter_mut().find(|t| t.kinds == s.kinds && t.n == s.n && t.mult == s.mult) {
            t.coef.iter_mut().zip(&s.coef).for_each(|(a, b)| *a += b);
        } else {
            self.terms.push(s);
        }
    }

    pub fn add(&mut self, other: &TrigField) {
        for t in &other.terms {
            self.push(t.clone());
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        TrigField { terms: self.terms.iter().map(|t| t.scaled(c)).collect() }
    }

    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = TrigField::default();
        for t in &self.terms {
            out.push(t.derivative(axis));
        }
        out
    }

    pub fn antiderivative(&self, axis: usize) -> Result<Self> {
        let mut out = TrigField::default();
        for t in self.combined() {
            out.push(t.antiderivative(axis)?);
        }
        Ok(out)
    }

    /// One materialized series per kind pattern.
    pub fn combined(&self) -> Vec<SeparableSeries> {
        let mut out: Vec<SeparableSeries> = Vec::new();
        for t in &self.terms {
            let eff = t.effective();
            match out.iter_mut().find(|o| o.kinds == t.kinds && o.n == t.n) {
                Some(o) => o.coef.iter_mut().zip(&eff).for_each(|(a, b)| *a += b),
                None => out.push(SeparableSeries { kinds: t.kinds, n: t.n, coef: eff, mult: [0; 3] }),
            }
        }
        out
    }

    pub fn eval_point(&self, x: [f64; 3]) -> f64 {
        self.combined().iter().map(|t| t.eval_point(x)).sum()
    }

    pub fn eval_on_axes(&self, axes: [&[f64]; 3]) -> Vec<f64> {
        self.eval_on(axes.map(Axis::Points))
    }

    pub fn eval_on(&self, axes: [Axis; 3]) -> Vec<f64> {
        let len = axes.iter().map(Axis::len).product();
        let mut out = vec![0.0; len];
        for t in self.combined() {
            out.iter_mut().zip(t.eval_on(axes)).for_each(|(a, v)| *a += v);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn single(kinds: [Kind; 3], n: usize, f: [usize; 3], c: f64) -> SeparableSeries {
        let mut s = SeparableSeries::zeros(kinds, n);
        s.set(f, c);
        s
    }

    #[test]
    fn derivative_of_cosine_mode() {
        // d/dx2 [2 cos(x1) cos(3 x2) sin(x3)] = -6 cos(x1) sin(3 x2) sin(x3)
        let s = single([Kind::Cos, Kind::Cos, Kind::Sin], 3, [1, 3, 1], 2.0);
        let d = s.derivative(1);
        assert_eq!(d.kinds, [Kind::Cos, Kind::Sin, Kind::Sin]);
        assert_eq!(d.get([1, 3, 1]), -6.0);
        let x = [0.3, 1.1, 2.0];
        let fd = (s.eval_point([x[0], x[1] + 1e-6, x[2]]) - s.eval_point([x[0], x[1] - 1e-6, x[2]])) / 2e-6;
        assert!((d.eval_point(x) - fd).abs() < 1e-8);
    }

    #[test]
    fn antiderivative_of_sine_starts_at_zero() {
        let s = single([Kind::Sin, Kind::Cos, Kind::Cos], 2, [2, 1, 1], 1.0);
        let a = s.antiderivative(0).unwrap();
        for &x1 in &[0.0, 0.4, 2.5, 2.0 * PI] {
            let x = [x1, 0.7, 0.2];
            let expected = (1.0 - (2.0 * x1).cos()) / 2.0 * 0.7f64.cos() * 0.2f64.cos();
            assert!((a.eval_point(x) - expected).abs() < 1e-15);
        }
        assert!(a.eval_point([0.0, 0.7, 0.2]).abs() < 1e-16);
        assert_eq!(a.derivative(0).eval_point([1.3, 0.7, 0.2]), s.eval_point([1.3, 0.7, 0.2]));
    }

    #[test]
    fn constant_mode_cannot_be_integrated() {
        let s = single([Kind::Cos; 3], 1, [0, 1, 1], 1.0);
        assert!(matches!(s.antiderivative(0), Err(Error::NonPeriodicAntiderivative { axis: 1 })));
    }

    #[test]
    fn lattice_evaluation_matches_pointwise() {
        let mut s = SeparableSeries::zeros([Kind::Sin, Kind::Cos, Kind::Sin], 3);
        let mut v = 0.1;
        for f in s.freqs().collect::<Vec<_>>() {
            s.set(f, v);
            v = (v * 7.3 + 0.11) % 1.0 - 0.5;
        }
        let ax1 = [0.0, 0.5, 1.7];
        let ax2 = [0.2, 3.0];
        let ax3 = [1.0, 2.0, 4.0, 6.0];
        let lat = s.eval_on_axes([&ax1, &ax2, &ax3]);
        for (p3, &x3) in ax3.iter().enumerate() {
            for (p2, &x2) in ax2.iter().enumerate() {
                for (p1, &x1) in ax1.iter().enumerate() {
                    let idx = p1 + 3 * (p2 + 2 * p3);
                    assert!((lat[idx] - s.eval_point([x1, x2, x3])).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn field_merges_matching_kinds() {
        let mut f = TrigField::default();
        f.push(single([Kind::Cos; 3], 1, [1, 1, 1], 1.0));
        f.push(single([Kind::Cos; 3], 1, [1, 1, 1], -1.0));
        f.push(single([Kind::Sin, Kind::Cos, Kind::Cos], 1, [1, 1, 1], 1.0));
        assert_eq!(f.terms.len(), 2);
        assert_eq!(f.eval_point([0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn mixed_partials_cancel_exactly() {
        let mut s = SeparableSeries::zeros([Kind::Cos; 3], 7);
        let mut v = 0.37;
        for f in s.freqs().collect::<Vec<_>>() {
            s.set(f, v);
            v = (v * 9.1 + 0.07) % 1.0 - 0.5;
        }
        let mut f = TrigField::from_series(s.derivative(0).derivative(1).derivative(1));
        f.push(s.derivative(1).derivative(0).derivative(1).scaled(-1.0));
        let m = Axis::Closed(9);
        assert!(f.eval_on([m, m, m]).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn closed_axis_has_exact_endpoint_zeros() {
        let s = single([Kind::Sin, Kind::Cos, Kind::Cos], 5, [5, 2, 3], 1.0);
        let m = 17;
        let lat = s.eval_on([Axis::Closed(m), Axis::Closed(m), Axis::Closed(m)]);
        for p in 0..m * m {
            assert_eq!(lat[p * m], 0.0);
            assert_eq!(lat[p * m + m - 1], 0.0);
        }
        let pts: Vec<f64> = (0..m).map(|p| 2.0 * PI * p as f64 / (m - 1) as f64).collect();
        let reference = s.eval_on_axes([&pts, &pts, &pts]);
        assert!(lat.iter().zip(&reference).all(|(a, b)| (a - b).abs() < 1e-13));
    }
}
