//! Truncated Fourier representation of a lifted disc `(f, g)` with `g = zeta f*`.

use serde::{Deserialize, Serialize};

use super::fourier::{analyze, grid_point, horner, horner_derivative, synthesize};
use super::holder::MIN_GRID;
use super::types::{complex_table, BoundaryJet1, ComplexPoint, C64};
use crate::error::{Error, Result};

pub const DEFAULT_MODES: usize = 32;
pub const DEFAULT_SAMPLES: usize = 256;

/// Lifted disc `(f, g)`.
///
/// `f = sum_{j=0}^{N} c_j zeta^j` and `g = sum_{k=0}^{N+1} e_k zeta^k`, so that
/// `f* = g / zeta` has coefficients `d_j = e_{j+1}` for `j = -1..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedDisc {
    n: usize,
    f_coeffs: Vec<Vec<C64>>,
    g_coeffs: Vec<Vec<C64>>,
    f_samples: Vec<Vec<C64>>,
    g_samples: Vec<Vec<C64>>,
    df_samples: Vec<Vec<C64>>,
    dg_samples: Vec<Vec<C64>>,
}

impl LiftedDisc {
    /// `f_coeffs` has `N + 1` rows and `g_coeffs` has `N + 2` rows, each of length `n + 1`.
    pub fn new(f_coeffs: Vec<Vec<C64>>, g_coeffs: Vec<Vec<C64>>, samples: usize) -> Result<Self> {
        if samples < MIN_GRID {
            return Err(Error::InvalidGrid { m: samples, min: MIN_GRID });
        }
        let d = f_coeffs.first().map(|r| r.len()).unwrap_or(0);
        if d < 2 {
            return Err(Error::Dimension { expected: 2, got: d });
        }
        if g_coeffs.len() != f_coeffs.len() + 1 {
            return Err(Error::Dimension { expected: f_coeffs.len() + 1, got: g_coeffs.len() });
        }
        if let Some(bad) = f_coeffs.iter().chain(&g_coeffs).find(|r| r.len() != d) {
            return Err(Error::Dimension { expected: d, got: bad.len() });
        }
        let df: Vec<Vec<C64>> = f_coeffs.iter().enumerate().skip(1).map(|(k, r)| r.iter().map(|c| c * k as f64).collect()).collect();
        let dg: Vec<Vec<C64>> = g_coeffs.iter().enumerate().skip(1).map(|(k, r)| r.iter().map(|c| c * k as f64).collect()).collect();
        Ok(Self {
            n: d - 1,
            f_samples: synthesize(&f_coeffs, 0, samples, d),
            g_samples: synthesize(&g_coeffs, 0, samples, d),
            df_samples: synthesize(&df, 0, samples, d),
            dg_samples: synthesize(&dg, 0, samples, d),
            f_coeffs,
            g_coeffs,
        })
    }

    /// Projects boundary samples of `f` and `g` onto modes `0..=N` and `0..=N+1`.
    ///
    /// Returns the disc and the largest negative-frequency coefficient discarded.
    pub fn from_samples(f: &[Vec<C64>], g: &[Vec<C64>], modes: usize, samples: usize) -> Result<(Self, f64)> {
        let m = f.len();
        if m < 2 * (modes + 2) {
            return Err(Error::InvalidGrid { m, min: 2 * (modes + 2) });
        }
        let d = f[0].len();
        let fc = analyze(f, 0, modes as i64, d);
        let gc = analyze(g, 0, modes as i64 + 1, d);
        let half = (m / 2) as i64;
        let leak_f = analyze(f, -half + 1, -1, d);
        let leak_g = analyze(g, -half + 1, -1, d);
        let leak = leak_f.iter().chain(&leak_g).flatten().map(|c| c.norm()).fold(0.0, f64::max);
        Ok((Self::new(fc, gc, samples)?, leak))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Truncation order `N`.
    pub fn modes(&self) -> usize {
        self.f_coeffs.len() - 1
    }

    pub fn samples(&self) -> usize {
        self.f_samples.len()
    }

    pub fn f_coeffs(&self) -> &[Vec<C64>] {
        &self.f_coeffs
    }

    pub fn g_coeffs(&self) -> &[Vec<C64>] {
        &self.g_coeffs
    }

    /// Coefficient `d_j` of `f*`, for `j >= -1`.
    pub fn fstar_coeff(&self, j: i64) -> &[C64] {
        &self.g_coeffs[(j + 1) as usize]
    }

    pub fn f_samples(&self) -> &[Vec<C64>] {
        &self.f_samples
    }

    pub fn g_samples(&self) -> &[Vec<C64>] {
        &self.g_samples
    }

    pub fn df_samples(&self) -> &[Vec<C64>] {
        &self.df_samples
    }

    pub fn dg_samples(&self) -> &[Vec<C64>] {
        &self.dg_samples
    }

    pub fn zeta(&self, j: usize) -> C64 {
        grid_point(j, self.samples())
    }

    pub fn eval_f(&self, zeta: C64) -> Vec<C64> {
        (0..=self.n).map(|c| horner(&self.f_coeffs, c, zeta)).collect()
    }

    pub fn eval_g(&self, zeta: C64) -> Vec<C64> {
        (0..=self.n).map(|c| horner(&self.g_coeffs, c, zeta)).collect()
    }

    pub fn eval_df(&self, zeta: C64) -> Vec<C64> {
        (0..=self.n).map(|c| horner_derivative(&self.f_coeffs, c, zeta)).collect()
    }

    pub fn eval_dg(&self, zeta: C64) -> Vec<C64> {
        (0..=self.n).map(|c| horner_derivative(&self.g_coeffs, c, zeta)).collect()
    }

    /// `f(0)`.
    pub fn center(&self) -> ComplexPoint {
        ComplexPoint::new(self.f_coeffs[0].clone()).expect("n + 1 >= 2")
    }

    /// Value and derivative of `f` and `g` at `zeta = 1`, summed spectrally.
    pub fn boundary_jet(&self) -> BoundaryJet1 {
        let one = C64::new(1.0, 0.0);
        BoundaryJet1 { f1: self.eval_f(one), df1: self.eval_df(one), g1: self.eval_g(one), dg1: self.eval_dg(one) }
    }

    pub fn with_samples(&self, samples: usize) -> Result<Self> {
        Self::new(self.f_coeffs.clone(), self.g_coeffs.clone(), samples)
    }

    /// Pads with zeros or truncates to `modes`.
    pub fn with_modes(&self, modes: usize) -> Result<Self> {
        let d = self.n + 1;
        let mut f = self.f_coeffs.clone();
        let mut g = self.g_coeffs.clone();
        f.resize(modes + 1, vec![C64::new(0.0, 0.0); d]);
        g.resize(modes + 2, vec![C64::new(0.0, 0.0); d]);
        Self::new(f, g, self.samples())
    }

    /// Multiplies the lift `g` by a scalar.
    pub fn scale_lift(&self, s: C64) -> Result<Self> {
        let g = self.g_coeffs.iter().map(|r| r.iter().map(|c| c * s).collect()).collect();
        Self::new(self.f_coeffs.clone(), g, self.samples())
    }

    /// Norm of the top tenth of the Fourier modes of `f` and `g`.
    pub fn tail_estimate(&self) -> f64 {
        let count = self.f_coeffs.len().div_ceil(10).max(1);
        let f_tail = &self.f_coeffs[self.f_coeffs.len() - count..];
        let g_tail = &self.g_coeffs[self.g_coeffs.len() - count..];
        f_tail.iter().chain(g_tail).flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Sup distance of `f` and of `g` on a common grid fine enough for both.
    pub fn distance(&self, other: &Self) -> f64 {
        let m = self.samples().max(other.samples()).max(4 * (self.modes().max(other.modes()) + 2));
        let a = if self.samples() == m { self.clone() } else { self.with_samples(m).expect("m >= 8") };
        let b = if other.samples() == m { other.clone() } else { other.with_samples(m).expect("m >= 8") };
        let sup = |x: &[Vec<C64>], y: &[Vec<C64>]| {
            x.iter().zip(y).map(|(p, q)| super::types::dist(p, q)).fold(0.0, f64::max)
        };
        sup(&a.f_samples, &b.f_samples).max(sup(&a.g_samples, &b.g_samples))
    }

    /// Distance of `f` only.
    pub fn distance_f(&self, other: &Self) -> f64 {
        let m = self.samples().max(other.samples()).max(4 * (self.modes().max(other.modes()) + 2));
        let a = self.with_samples(m).expect("m >= 8");
        let b = other.with_samples(m).expect("m >= 8");
        a.f_samples.iter().zip(&b.f_samples).map(|(p, q)| super::types::dist(p, q)).fold(0.0, f64::max)
    }

    /// Boundary curve `zeta -> (f, g)` as points of `R^{4n+4}`.
    pub fn real_curve(&self) -> Vec<Vec<f64>> {
        self.f_samples
            .iter()
            .zip(&self.g_samples)
            .map(|(f, g)| f.iter().chain(g).flat_map(|c| [c.re, c.im]).collect())
            .collect()
    }

    pub fn to_json(&self) -> DiscJson {
        DiscJson {
            n: self.n,
            modes: self.modes(),
            samples: self.samples(),
            f_coeffs: self.f_coeffs.clone(),
            fstar_coeffs: self.g_coeffs.clone(),
        }
    }

    pub fn from_json(j: &DiscJson) -> Result<Self> {
        let d = Self::new(j.f_coeffs.clone(), j.fstar_coeffs.clone(), j.samples)?;
        if d.n != j.n || d.modes() != j.modes {
            return Err(Error::Format(format!("disc header says n={}, N={} but coefficients give n={}, N={}", j.n, j.modes, d.n, d.modes())));
        }
        Ok(d)
    }

    /// Rows `theta, Re/Im f_0.., Re/Im g_0..` of the boundary samples.
    pub fn boundary_table(&self) -> (Vec<String>, Vec<Vec<f64>>) {
        let mut header = vec!["theta".to_string()];
        for name in ["f", "g"] {
            for c in 0..=self.n {
                header.push(format!("{name}{c}_re"));
                header.push(format!("{name}{c}_im"));
            }
        }
        let m = self.samples();
        let rows = (0..m)
            .map(|j| {
                let mut row = vec![2.0 * std::f64::consts::PI * j as f64 / m as f64];
                row.extend(self.f_samples[j].iter().chain(&self.g_samples[j]).flat_map(|c| [c.re, c.im]));
                row
            })
            .collect();
        (header, rows)
    }
}

/// JSON form of a disc; `fstar_coeffs[k]` is the coefficient of index `k - 1` of `f*`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscJson {
    pub n: usize,
    pub modes: usize,
    pub samples: usize,
    #[serde(with = "complex_table")]
    pub f_coeffs: Vec<Vec<C64>>,
    #[serde(with = "complex_table")]
    pub fstar_coeffs: Vec<Vec<C64>>,
}
