//! Hypersurfaces in normal form and exact derivative tables for their defining functions.

use nalgebra::DMatrix;

use super::poly::{mono, wirtinger_second, DefiningPolynomial};
use super::types::{HermitianForm, C64};
use crate::error::{Error, Result};

/// `x0 - t(conj z_alpha) A z_alpha + b0 y0^2 + sum (b_j z_j + conj(b_j z_j)) y0 + higher`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormSurface {
    a: HermitianForm,
    b0: f64,
    b: Vec<C64>,
    higher: DefiningPolynomial,
}

impl NormalFormSurface {
    pub fn new(a: HermitianForm, b0: f64, b: Vec<C64>, higher: DefiningPolynomial) -> Result<Self> {
        let n = a.n();
        if b.len() != n {
            return Err(Error::Dimension { expected: n, got: b.len() });
        }
        if higher.n() != n {
            return Err(Error::Dimension { expected: n, got: higher.n() });
        }
        if let Some(w) = higher.min_weighted_degree() {
            if w < 3 {
                return Err(Error::InvalidParameters(format!("higher-order part has a term of weighted degree {w}")));
            }
        }
        let pure_x0 = higher.terms().any(|(e, _)| e[0] > 0 && e.iter().skip(1).all(|&k| k == 0));
        if pure_x0 {
            return Err(Error::InvalidParameters("higher-order part contains a pure x0 power".into()));
        }
        Ok(Self { a, b0, b, higher })
    }

    pub fn quadric(a: HermitianForm) -> Self {
        let n = a.n();
        Self { a, b0: 0.0, b: vec![C64::new(0.0, 0.0); n], higher: DefiningPolynomial::zero(n) }
    }

    /// Reads off `A`, `b0`, `b` from a polynomial already in normal form at 0.
    pub fn from_defining(rho: &DefiningPolynomial) -> Result<Self> {
        let n = rho.n();
        let dims = rho.num_vars();
        let low = rho.truncate_weighted(2);
        if (low.coeff(&mono(dims, &[0])) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameters("x0 coefficient is not 1; bring the surface to normal form first".into()));
        }
        let quad = low.sub(&DefiningPolynomial::variable(n, 0));
        let mut second = DMatrix::<f64>::zeros(dims, dims);
        for i in 0..dims {
            for j in 0..dims {
                second[(i, j)] = quad.derivative(i).derivative(j).eval_real(&vec![0.0; dims]);
            }
        }
        let (zz, zzb) = wirtinger_second(&second, n + 1);
        let amat = DMatrix::from_fn(n, n, |i, j| -zzb[(j + 1, i + 1)]);
        let pluriharmonic = zz.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if pluriharmonic > 1e-12 {
            return Err(Error::InvalidParameters(format!("harmonic quadratic terms present (size {pluriharmonic:.3e}); bring the surface to normal form first")));
        }
        let a = HermitianForm::new(amat)?;
        let r = DefiningPolynomial::quadric(&a);
        if low.sub(&r).terms().any(|(_, c)| c.abs() > 1e-12) {
            return Err(Error::InvalidParameters("low-order part is not x0 - t(conj z) A z".into()));
        }
        let b0 = rho.coeff(&mono(dims, &[1, 1]));
        let b: Vec<C64> = (1..=n)
            .map(|j| C64::new(rho.coeff(&mono(dims, &[1, 2 * j])), -rho.coeff(&mono(dims, &[1, 2 * j + 1]))) * 0.5)
            .collect();
        let mut s = Self::quadric(a);
        s.b0 = b0;
        s.b = b;
        let mut higher = rho.sub(&s.defining_polynomial());
        higher.prune(0.0);
        Self::new(s.a, s.b0, s.b, higher)
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn form(&self) -> &HermitianForm {
        &self.a
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn b(&self) -> &[C64] {
        &self.b
    }

    pub fn higher(&self) -> &DefiningPolynomial {
        &self.higher
    }

    pub fn is_quadric(&self) -> bool {
        self.b0 == 0.0 && self.b.iter().all(|c| *c == C64::new(0.0, 0.0)) && self.higher.is_empty()
    }

    /// The full defining polynomial `rho`.
    pub fn defining_polynomial(&self) -> DefiningPolynomial {
        let n = self.n();
        let dims = 2 * n + 2;
        let mut p = DefiningPolynomial::quadric(&self.a);
        p.add_term(mono(dims, &[1, 1]), self.b0);
        for (j, bj) in self.b.iter().enumerate() {
            let (xj, yj) = (2 * (j + 1), 2 * (j + 1) + 1);
            p.add_term(mono(dims, &[1, xj]), 2.0 * bj.re);
            p.add_term(mono(dims, &[1, yj]), -2.0 * bj.im);
        }
        p.add_assign(&self.higher);
        p
    }

    /// `rho_t = rho o L_t / t^2`.
    pub fn dilate(&self, t: f64) -> Self {
        Self {
            a: self.a.clone(),
            b0: self.b0 * t * t,
            b: self.b.iter().map(|c| c * t).collect(),
            higher: self.higher.dilate(t),
        }
    }

    /// Scales everything beyond the quadric by `s`; `s = 0` gives the quadric.
    pub fn interpolate_from_quadric(&self, s: f64) -> Self {
        Self {
            a: self.a.clone(),
            b0: self.b0 * s,
            b: self.b.iter().map(|c| c * s).collect(),
            higher: self.higher.scale(s),
        }
    }

    pub fn calculus(&self) -> SurfaceCalculus {
        SurfaceCalculus::new(&self.defining_polynomial())
    }
}

/// Wirtinger derivatives of `rho` at a point.
#[derive(Debug, Clone)]
pub struct PointDerivatives {
    pub value: f64,
    /// `d rho / dz_k`.
    pub d: Vec<C64>,
    /// `d2 rho / dz_j dz_k`.
    pub dd: DMatrix<C64>,
    /// `d2 rho / dz_j dconj(z_k)`.
    pub ddbar: DMatrix<C64>,
}

/// First and second real partials of `rho`, precomputed as polynomials.
#[derive(Debug, Clone)]
pub struct SurfaceCalculus {
    rho: DefiningPolynomial,
    first: Vec<DefiningPolynomial>,
    second: Vec<Vec<DefiningPolynomial>>,
}

impl SurfaceCalculus {
    pub fn new(rho: &DefiningPolynomial) -> Self {
        let dims = rho.num_vars();
        let first: Vec<DefiningPolynomial> = (0..dims).map(|v| rho.derivative(v)).collect();
        let second = (0..dims).map(|a| (0..dims).map(|b| first[a].derivative(b)).collect()).collect();
        Self { rho: rho.clone(), first, second }
    }

    pub fn rho(&self) -> &DefiningPolynomial {
        &self.rho
    }

    pub fn value(&self, z: &[C64]) -> f64 {
        self.rho.eval_real(&to_real(z))
    }

    pub fn eval(&self, z: &[C64]) -> PointDerivatives {
        let x = to_real(z);
        let d = z.len();
        let g: Vec<f64> = self.first.iter().map(|p| p.eval_real(&x)).collect();
        let mut h = DMatrix::<f64>::zeros(2 * d, 2 * d);
        for a in 0..2 * d {
            for b in a..2 * d {
                let v = self.second[a][b].eval_real(&x);
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        let (dd, ddbar) = wirtinger_second(&h, d);
        PointDerivatives {
            value: self.rho.eval_real(&x),
            d: (0..d).map(|k| C64::new(g[2 * k], -g[2 * k + 1]) * 0.5).collect(),
            dd,
            ddbar,
        }
    }
}

fn to_real(z: &[C64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y0x1(n: usize, c: f64) -> DefiningPolynomial {
        let dims = 2 * n + 2;
        DefiningPolynomial::from_terms(n, [(mono(dims, &[1, 2]), c)]).unwrap()
    }

    #[test]
    fn b_term_read_off() {
        let a = HermitianForm::identity(1);
        let rho = DefiningPolynomial::quadric(&a).add(&y0x1(1, 1.0));
        let s = NormalFormSurface::from_defining(&rho).unwrap();
        assert!((s.b()[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!(s.higher().is_empty());
        assert_eq!(s.defining_polynomial(), rho);
    }

    #[test]
    fn harmonic_terms_rejected() {
        let a = HermitianForm::identity(1);
        // Re(z1^2) = x1^2 - y1^2
        let extra = DefiningPolynomial::from_terms(1, [(vec![0, 0, 2, 0], 1.0), (vec![0, 0, 0, 2], -1.0)]).unwrap();
        assert!(NormalFormSurface::from_defining(&DefiningPolynomial::quadric(&a).add(&extra)).is_err());
    }

    #[test]
    fn derivatives_of_quadric() {
        let s = NormalFormSurface::quadric(HermitianForm::identity(1));
        let d = s.calculus().eval(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(d.value.abs() < 1e-15);
        assert!((d.d[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((d.d[1] + C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((d.ddbar[(1, 1)] + C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(d.dd.iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn dilation_scales_weights() {
        let a = HermitianForm::identity(1);
        let cubic = DefiningPolynomial::from_terms(1, [(vec![0, 1, 2, 0], 1.0)]).unwrap();
        let s = NormalFormSurface::new(a, 1.0, vec![C64::new(1.0, 0.0)], cubic).unwrap();
        let t = s.dilate(0.1);
        assert!((t.b0() - 0.01).abs() < 1e-15);
        assert!((t.b()[0].re - 0.1).abs() < 1e-15);
        assert!((t.higher().coeff(&[0, 1, 2, 0]) - 0.01).abs() < 1e-15);
    }
}
