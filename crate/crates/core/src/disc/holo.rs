//! Holomorphic polynomial maps `C^{n+1} -> C^{n+1}` with exact jets.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::types::{ComplexPoint, MapJet2, C64};
use crate::error::{Error, Result};

/// Exponents over `(z0, z1, ..., zn)`.
pub type HoloExponent = Vec<u32>;

#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap {
    n: usize,
    components: Vec<BTreeMap<HoloExponent, C64>>,
}

impl PolyMap {
    pub fn zero(n: usize) -> Self {
        Self { n, components: vec![BTreeMap::new(); n + 1] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..=n {
            m.add_term(i, unit(n, i), C64::new(1.0, 0.0));
        }
        m
    }

    /// `z -> linear * z + offset`.
    pub fn affine(linear: &DMatrix<C64>, offset: &[C64]) -> Result<Self> {
        let d = linear.nrows();
        if linear.ncols() != d || offset.len() != d || d < 2 {
            return Err(Error::Dimension { expected: d, got: offset.len() });
        }
        let n = d - 1;
        let mut m = Self::zero(n);
        for i in 0..d {
            m.add_term(i, vec![0; d], offset[i]);
            for j in 0..d {
                m.add_term(i, unit(n, j), linear[(i, j)]);
            }
        }
        Ok(m)
    }

    /// Anisotropic dilation `(z0, z_alpha) -> (t^2 z0, t z_alpha)`.
    pub fn dilation(n: usize, t: f64) -> Self {
        let mut m = Self::zero(n);
        m.add_term(0, unit(n, 0), C64::new(t * t, 0.0));
        for i in 1..=n {
            m.add_term(i, unit(n, i), C64::new(t, 0.0));
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn component(&self, i: usize) -> impl Iterator<Item = (&HoloExponent, C64)> {
        self.components[i].iter().map(|(e, &c)| (e, c))
    }

    pub fn add_term(&mut self, component: usize, e: HoloExponent, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        match self.components[component].entry(e) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == C64::new(0.0, 0.0) {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn prune(&mut self, tol: f64) {
        for comp in &mut self.components {
            comp.retain(|_, c| c.norm() > tol);
        }
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().flat_map(|c| c.keys()).map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, z: &[C64]) -> Vec<C64> {
        let powers = powers_of(z, self.max_exponent());
        self.components.iter().map(|comp| comp.iter().map(|(e, c)| c * monomial(&powers, e)).sum()).collect()
    }

    pub fn eval_point(&self, z: &ComplexPoint) -> ComplexPoint {
        ComplexPoint::new(self.eval(z.coords())).expect("dimension n + 1 >= 2")
    }

    /// Jacobian `dF_z`, entry `(i, j) = dF_i / dz_j`.
    pub fn jacobian(&self, z: &[C64]) -> DMatrix<C64> {
        let d = self.n + 1;
        let powers = powers_of(z, self.max_exponent());
        let mut jac = DMatrix::zeros(d, d);
        for (i, comp) in self.components.iter().enumerate() {
            for (e, c) in comp {
                for j in 0..d {
                    if e[j] == 0 {
                        continue;
                    }
                    let mut de = e.clone();
                    de[j] -= 1;
                    jac[(i, j)] += c * e[j] as f64 * monomial(&powers, &de);
                }
            }
        }
        jac
    }

    /// Exact 2-jet at `p`.
    pub fn jet2(&self, p: &[C64]) -> MapJet2 {
        let d = self.n + 1;
        let powers = powers_of(p, self.max_exponent());
        let mut quadratic = vec![DMatrix::zeros(d, d); d];
        for (i, comp) in self.components.iter().enumerate() {
            for (e, c) in comp {
                for j in 0..d {
                    for k in 0..d {
                        let mut de = e.clone();
                        if de[j] == 0 {
                            continue;
                        }
                        let f1 = de[j] as f64;
                        de[j] -= 1;
                        if de[k] == 0 {
                            continue;
                        }
                        let f2 = de[k] as f64;
                        de[k] -= 1;
                        quadratic[i][(j, k)] += c * f1 * f2 * monomial(&powers, &de);
                    }
                }
            }
        }
        let value = self.eval(p);
        MapJet2 {
            value: ComplexPoint::new(value).expect("dimension n + 1 >= 2"),
            linear: self.jacobian(p),
            quadratic,
        }
    }

    /// `self o inner`.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap> {
        if inner.n != self.n {
            return Err(Error::Dimension { expected: self.n, got: inner.n });
        }
        let d = self.n + 1;
        let mut cache: Vec<Vec<PolyMap1>> = (0..d).map(|k| vec![PolyMap1::one(d), PolyMap1::from_component(&inner.components[k])]).collect();
        let mut out = PolyMap::zero(self.n);
        for (i, comp) in self.components.iter().enumerate() {
            for (e, c) in comp {
                let mut term = PolyMap1::one(d).scale(*c);
                for (k, &p) in e.iter().enumerate() {
                    if p == 0 {
                        continue;
                    }
                    while cache[k].len() <= p as usize {
                        let next = cache[k].last().unwrap().mul(&cache[k][1]);
                        cache[k].push(next);
                    }
                    term = term.mul(&cache[k][p as usize]);
                }
                for (te, tc) in term.0 {
                    out.add_term(i, te, tc);
                }
            }
        }
        Ok(out)
    }

    /// Conjugation `L_t^{-1} o F o L_t` by the anisotropic dilation.
    pub fn dilate(&self, t: f64) -> PolyMap {
        let mut out = PolyMap::zero(self.n);
        for (i, comp) in self.components.iter().enumerate() {
            let wi = if i == 0 { 2 } else { 1 };
            for (e, c) in comp {
                let w = 2 * e[0] as i32 + e[1..].iter().sum::<u32>() as i32;
                out.add_term(i, e.clone(), c * t.powi(w - wi));
            }
        }
        out
    }

    pub fn sub(&self, other: &PolyMap) -> PolyMap {
        let mut out = self.clone();
        for (i, comp) in other.components.iter().enumerate() {
            for (e, c) in comp {
                out.add_term(i, e.clone(), -c);
            }
        }
        out
    }

    fn max_exponent(&self) -> usize {
        self.components.iter().flat_map(|c| c.keys()).flat_map(|e| e.iter().copied()).max().unwrap_or(0) as usize
    }

    pub fn to_json(&self) -> PolyMapJson {
        PolyMapJson {
            n: self.n,
            components: self
                .components
                .iter()
                .map(|comp| comp.iter().map(|(e, c)| HoloTermJson { exp: e.clone(), coeff: [c.re, c.im] }).collect())
                .collect(),
        }
    }

    pub fn from_json(j: &PolyMapJson) -> Result<Self> {
        if j.components.len() != j.n + 1 {
            return Err(Error::Dimension { expected: j.n + 1, got: j.components.len() });
        }
        let mut m = Self::zero(j.n);
        for (i, comp) in j.components.iter().enumerate() {
            for t in comp {
                if t.exp.len() != j.n + 1 {
                    return Err(Error::Dimension { expected: j.n + 1, got: t.exp.len() });
                }
                m.add_term(i, t.exp.clone(), C64::new(t.coeff[0], t.coeff[1]));
            }
        }
        Ok(m)
    }
}

/// Scalar holomorphic polynomial used during composition.
#[derive(Clone)]
struct PolyMap1(BTreeMap<HoloExponent, C64>);

impl PolyMap1 {
    fn one(d: usize) -> Self {
        let mut m = BTreeMap::new();
        m.insert(vec![0; d], C64::new(1.0, 0.0));
        Self(m)
    }

    fn from_component(c: &BTreeMap<HoloExponent, C64>) -> Self {
        Self(c.clone())
    }

    fn scale(mut self, s: C64) -> Self {
        for v in self.0.values_mut() {
            *v *= s;
        }
        self
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out: BTreeMap<HoloExponent, C64> = BTreeMap::new();
        for (e1, c1) in &self.0 {
            for (e2, c2) in &other.0 {
                let e: HoloExponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *out.entry(e).or_insert(C64::new(0.0, 0.0)) += c1 * c2;
            }
        }
        out.retain(|_, c| *c != C64::new(0.0, 0.0));
        Self(out)
    }
}

fn unit(n: usize, i: usize) -> HoloExponent {
    let mut e = vec![0; n + 1];
    e[i] = 1;
    e
}

fn powers_of(z: &[C64], max: usize) -> Vec<Vec<C64>> {
    z.iter()
        .map(|&zi| {
            let mut row = Vec::with_capacity(max + 1);
            let mut acc = C64::new(1.0, 0.0);
            for _ in 0..=max {
                row.push(acc);
                acc *= zi;
            }
            row
        })
        .collect()
}

fn monomial(powers: &[Vec<C64>], e: &[u32]) -> C64 {
    e.iter().enumerate().map(|(k, &p)| powers[k][p as usize]).product()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyMapJson {
    pub n: usize,
    pub components: Vec<Vec<HoloTermJson>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HoloTermJson {
    pub exp: Vec<u32>,
    pub coeff: [f64; 2],
}
