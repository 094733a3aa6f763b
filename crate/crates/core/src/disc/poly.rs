//! Sparse real polynomials in the real coordinates `(x0, y0, x1, y1, ..., xn, yn)`.
//!
//! Variable `2k` is `x_k = Re z_k` and `2k + 1` is `y_k = Im z_k`. Every
//! monomial carries a weighted degree where `x0, y0` count 2 and the other
//! variables count 1.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::types::{ComplexPoint, Covector, HermitianForm, C64};
use crate::error::{Error, Result};

pub type Exponent = Vec<u32>;

#[derive(Debug, Clone, PartialEq)]
pub struct DefiningPolynomial {
    n: usize,
    terms: BTreeMap<Exponent, f64>,
}

/// Value, (1,0)-gradient and complex Hessian blocks of a real function.
#[derive(Debug, Clone)]
pub struct DefiningEval {
    pub value: f64,
    pub gradient: Option<Covector>,
    /// `d2 rho / dz_i dz_j`.
    pub hess_zz: Option<DMatrix<C64>>,
    /// `d2 rho / dz_i dconj(z_j)`.
    pub hess_zzbar: Option<DMatrix<C64>>,
}

impl DefiningPolynomial {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponent, f64)>>(n: usize, terms: I) -> Result<Self> {
        let mut p = Self::zero(n);
        for (e, c) in terms {
            if e.len() != 2 * n + 2 {
                return Err(Error::Dimension { expected: 2 * n + 2, got: e.len() });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; 2 * n + 2], c);
        p
    }

    /// The real variable with index `var` (see module docs).
    pub fn variable(n: usize, var: usize) -> Self {
        let mut e = vec![0; 2 * n + 2];
        e[var] = 1;
        let mut p = Self::zero(n);
        p.add_term(e, 1.0);
        p
    }

    /// `x0 - t(conj z_alpha) A z_alpha`.
    pub fn quadric(a: &HermitianForm) -> Self {
        let n = a.n();
        let mut p = Self::variable(n, 0);
        p.sub_assign(&Self::hermitian(a));
        p
    }

    /// The real polynomial `t(conj z_alpha) A z_alpha`.
    pub fn hermitian(a: &HermitianForm) -> Self {
        let n = a.n();
        let mut p = Self::zero(n);
        let dims = 2 * n + 2;
        for i in 0..n {
            for j in 0..n {
                let c = a.entry(i, j);
                let (xi, yi, xj, yj) = (2 * (i + 1), 2 * (i + 1) + 1, 2 * (j + 1), 2 * (j + 1) + 1);
                // (xi - i yi)(xj + i yj) = xi xj + yi yj + i (xi yj - yi xj)
                p.add_term(mono(dims, &[xi, xj]), c.re);
                p.add_term(mono(dims, &[yi, yj]), c.re);
                p.add_term(mono(dims, &[xi, yj]), -c.im);
                p.add_term(mono(dims, &[yi, xj]), c.im);
            }
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_vars(&self) -> usize {
        2 * self.n + 2
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u32]) -> f64 {
        self.terms.get(e).copied().unwrap_or(0.0)
    }

    pub fn add_term(&mut self, e: Exponent, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(e) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    /// Drop coefficients with magnitude at most `tol`.
    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.abs() > tol);
    }

    pub fn weighted_degree(e: &[u32]) -> u32 {
        2 * (e[0] + e[1]) + e[2..].iter().sum::<u32>()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn min_weighted_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| Self::weighted_degree(e)).min()
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (e, c) in &other.terms {
            self.add_term(e.clone(), *c);
        }
    }

    pub fn sub_assign(&mut self, other: &Self) {
        for (e, c) in &other.terms {
            self.add_term(e.clone(), -*c);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        p.add_assign(other);
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut p = self.clone();
        p.sub_assign(other);
        p
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = Self::zero(self.n);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), c * s);
        }
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero(self.n);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.n, 1.0);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiply each monomial by `t^(weighted degree - 2)`.
    pub fn dilate(&self, t: f64) -> Self {
        let mut p = Self::zero(self.n);
        for (e, c) in &self.terms {
            let w = Self::weighted_degree(e) as i32 - 2;
            p.add_term(e.clone(), c * t.powi(w));
        }
        p
    }

    /// Keep only monomials of weighted degree `<= max`.
    pub fn truncate_weighted(&self, max: u32) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().filter(|(e, _)| Self::weighted_degree(e) <= max).map(|(e, c)| (e.clone(), *c)).collect(),
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|e| e[var] > 0)
    }

    /// Partial derivative with respect to the real variable `var`.
    pub fn derivative(&self, var: usize) -> Self {
        let mut p = Self::zero(self.n);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[var] -= 1;
            p.add_term(d, c * e[var] as f64);
        }
        p
    }

    /// Mixed partial derivative for a multi-index over the real variables.
    pub fn partial(&self, alpha: &[u32]) -> Self {
        let mut p = self.clone();
        for (var, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                p = p.derivative(var);
            }
        }
        p
    }

    pub fn eval_real(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.num_vars());
        let mut powers: Vec<Vec<f64>> = Vec::with_capacity(x.len());
        let max_deg = self.terms.keys().flat_map(|e| e.iter().copied()).max().unwrap_or(0) as usize;
        for &xi in x {
            let mut row = Vec::with_capacity(max_deg + 1);
            let mut acc = 1.0;
            for _ in 0..=max_deg {
                row.push(acc);
                acc *= xi;
            }
            powers.push(row);
        }
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().enumerate().map(|(k, &p)| powers[k][p as usize]).product::<f64>())
            .sum()
    }

    pub fn eval(&self, z: &ComplexPoint) -> f64 {
        self.eval_real(&z.to_real())
    }

    /// Replace variable `k` by `subs[k]`; all substitutes share the output dimension.
    pub fn substitute(&self, subs: &[DefiningPolynomial]) -> Result<Self> {
        if subs.len() != self.num_vars() {
            return Err(Error::Dimension { expected: self.num_vars(), got: subs.len() });
        }
        let out_n = subs.first().map(|s| s.n).unwrap_or(self.n);
        let mut cache: Vec<Vec<DefiningPolynomial>> = subs.iter().map(|s| vec![Self::constant(out_n, 1.0), s.clone()]).collect();
        let mut out = Self::zero(out_n);
        for (e, c) in &self.terms {
            let mut term = Self::constant(out_n, *c);
            for (k, &p) in e.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                while cache[k].len() <= p as usize {
                    let next = cache[k].last().unwrap().mul(&subs[k]);
                    cache[k].push(next);
                }
                term = term.mul(&cache[k][p as usize]);
            }
            out.add_assign(&term);
        }
        Ok(out)
    }

    /// Value, gradient `d rho / dz_j = (d/dx_j - i d/dy_j) rho / 2` and Hessian blocks.
    pub fn eval_defining(&self, z: &ComplexPoint, order: usize) -> DefiningEval {
        let x = z.to_real();
        let value = self.eval_real(&x);
        let d = self.n + 1;
        let mut out = DefiningEval { value, gradient: None, hess_zz: None, hess_zzbar: None };
        if order == 0 {
            return out;
        }
        let first: Vec<f64> = (0..2 * d).map(|v| self.derivative(v).eval_real(&x)).collect();
        out.gradient = Some(Covector((0..d).map(|j| C64::new(first[2 * j], -first[2 * j + 1]) * 0.5).collect()));
        if order >= 2 {
            let mut second = DMatrix::<f64>::zeros(2 * d, 2 * d);
            for a in 0..2 * d {
                let da = self.derivative(a);
                for b in a..2 * d {
                    let v = da.derivative(b).eval_real(&x);
                    second[(a, b)] = v;
                    second[(b, a)] = v;
                }
            }
            let (hzz, hzzb) = wirtinger_second(&second, d);
            out.hess_zz = Some(hzz);
            out.hess_zzbar = Some(hzzb);
        }
        out
    }

    pub fn to_json(&self) -> PolynomialJson {
        PolynomialJson { n: self.n, terms: self.terms.iter().map(|(e, c)| TermJson { exp: e.clone(), coeff: *c }).collect() }
    }

    pub fn from_json(j: &PolynomialJson) -> Result<Self> {
        Self::from_terms(j.n, j.terms.iter().map(|t| (t.exp.clone(), t.coeff)))
    }
}

/// Wirtinger second derivatives from the real Hessian (vars ordered x0, y0, x1, ...).
pub(crate) fn wirtinger_second(h: &DMatrix<f64>, d: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let mut zz = DMatrix::zeros(d, d);
    let mut zzb = DMatrix::zeros(d, d);
    for k in 0..d {
        for l in 0..d {
            let xx = h[(2 * k, 2 * l)];
            let xy = h[(2 * k, 2 * l + 1)];
            let yx = h[(2 * k + 1, 2 * l)];
            let yy = h[(2 * k + 1, 2 * l + 1)];
            zz[(k, l)] = C64::new(xx - yy, -xy - yx) * 0.25;
            zzb[(k, l)] = C64::new(xx + yy, xy - yx) * 0.25;
        }
    }
    (zz, zzb)
}

pub(crate) fn mono(dims: usize, vars: &[usize]) -> Exponent {
    let mut e = vec![0; dims];
    for &v in vars {
        e[v] += 1;
    }
    e
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub coeff: f64,
}

impl Serialize for DefiningPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DefiningPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PolynomialJson::deserialize(d)?;
        Self::from_json(&j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r1() -> DefiningPolynomial {
        DefiningPolynomial::quadric(&HermitianForm::identity(1))
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn quadric_gradient_at_origin() {
        let z = ComplexPoint::zero(1);
        let ev = r1().eval_defining(&z, 1);
        assert_eq!(ev.value, 0.0);
        let g = ev.gradient.unwrap();
        assert_eq!(g.0, vec![c(0.5, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn quadric_gradient_at_one_one() {
        let z = ComplexPoint::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let ev = r1().eval_defining(&z, 2);
        assert!(ev.value.abs() < 1e-15);
        let g = ev.gradient.unwrap();
        assert!((g.0[0] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((g.0[1] - c(-1.0, 0.0)).norm() < 1e-15);
        // d2/dz1 dconj(z1) (x0 - |z1|^2) = -1
        assert!((ev.hess_zzbar.unwrap()[(1, 1)] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(ev.hess_zz.unwrap()[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn zero_polynomial_is_flat() {
        let p = DefiningPolynomial::zero(2);
        let z = ComplexPoint::new(vec![c(0.3, 1.0), c(-2.0, 0.5), c(0.1, 0.1)]).unwrap();
        let ev = p.eval_defining(&z, 1);
        assert_eq!(ev.value, 0.0);
        assert!(ev.gradient.unwrap().0.iter().all(|g| g.norm() == 0.0));
    }

    #[test]
    fn hermitian_polynomial_matches_form() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.25), c(0.5, -0.25), c(-2.0, 0.0)]);
        let a = HermitianForm::new(m).unwrap();
        let p = DefiningPolynomial::hermitian(&a);
        let z = ComplexPoint::new(vec![c(0.0, 0.0), c(0.7, -0.2), c(-0.4, 1.1)]).unwrap();
        assert!((p.eval(&z) - a.quad(z.alpha())).abs() < 1e-14);
    }

    #[test]
    fn weighted_degree_and_dilation() {
        let y0x1 = DefiningPolynomial::from_terms(1, [(vec![0, 1, 1, 0], 1.0)]).unwrap();
        assert_eq!(DefiningPolynomial::weighted_degree(&[0, 1, 1, 0]), 3);
        let d = y0x1.dilate(0.1);
        assert!((d.coeff(&[0, 1, 1, 0]) - 0.1).abs() < 1e-16);
        let r = r1();
        assert_eq!(r.dilate(0.37), r);
    }

    #[test]
    fn substitution_composes() {
        // p = x0 * y1, substitute x0 -> x0 + 1, others identity
        let p = DefiningPolynomial::from_terms(1, [(vec![1, 0, 0, 1], 2.0)]).unwrap();
        let mut subs: Vec<_> = (0..4).map(|k| DefiningPolynomial::variable(1, k)).collect();
        subs[0] = subs[0].add(&DefiningPolynomial::constant(1, 1.0));
        let q = p.substitute(&subs).unwrap();
        let x = [0.3, -0.2, 0.5, 1.5];
        assert!((q.eval_real(&x) - 2.0 * 1.3 * 1.5).abs() < 1e-14);
    }

    #[test]
    fn json_shape() {
        let p = r1();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.starts_with("{\"n\":1,\"terms\":["));
        let back: DefiningPolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    proptest! {
        #[test]
        fn product_evaluates_pointwise(
            c1 in -2.0f64..2.0, c2 in -2.0f64..2.0,
            x in proptest::collection::vec(-1.5f64..1.5, 4),
        ) {
            let p = DefiningPolynomial::from_terms(1, [(vec![1, 0, 2, 0], c1), (vec![0, 1, 0, 0], 1.0)]).unwrap();
            let q = DefiningPolynomial::from_terms(1, [(vec![0, 0, 1, 1], c2), (vec![0, 0, 0, 0], 0.5)]).unwrap();
            let lhs = p.mul(&q).eval_real(&x);
            let rhs = p.eval_real(&x) * q.eval_real(&x);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
