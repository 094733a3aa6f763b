//! Seeded random forms, disc parameters and centers for tests and experiments.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::disc::{ComplexPoint, HermitianForm, C64};
use crate::quadric::{center_of_star, FullDiscParams, StarDiscParams};

/// Signs of the eigenvalues of a random form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    Positive,
    /// At least one eigenvalue of each sign when `n >= 2`; a random sign when `n = 1`.
    Mixed,
    Any,
}

pub struct Fixtures {
    rng: ChaCha8Rng,
}

impl Fixtures {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.rng.random_range(0..items.len())]
    }

    /// Uniform in the disc of radius `r`.
    pub fn complex_in_disc(&mut self, r: f64) -> C64 {
        let rho = r * self.uniform(0.0, 1.0).sqrt();
        C64::from_polar(rho, self.uniform(0.0, std::f64::consts::TAU))
    }

    pub fn complex_vec(&mut self, n: usize, scale: f64) -> Vec<C64> {
        (0..n).map(|_| C64::new(self.uniform(-scale, scale), self.uniform(-scale, scale))).collect()
    }

    /// Unitary matrix from the QR factorization of a random complex matrix.
    pub fn unitary(&mut self, n: usize) -> DMatrix<C64> {
        let entries = self.complex_vec(n * n, 1.0);
        DMatrix::from_vec(n, n, entries).qr().q()
    }

    pub fn hermitian_form(&mut self, n: usize, signature: Signature) -> HermitianForm {
        let mut eig: Vec<f64> = (0..n).map(|_| self.uniform(0.5, 2.0)).collect();
        match signature {
            Signature::Positive => {}
            Signature::Mixed if n == 1 => {
                if self.rng.random_bool(0.5) {
                    eig[0] = -eig[0];
                }
            }
            Signature::Mixed => {
                let neg = self.rng.random_range(1..n);
                eig.iter_mut().take(neg).for_each(|e| *e = -*e);
            }
            Signature::Any => eig.iter_mut().for_each(|e| {
                if self.rng.random_bool(0.5) {
                    *e = -*e
                }
            }),
        }
        let u = self.unitary(n);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, eig.iter().map(|&e| C64::new(e, 0.0))));
        let m = &u * d * u.adjoint();
        // exact symmetry after round-off
        let m = DMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
        HermitianForm::new(m).expect("nonzero eigenvalues")
    }

    /// Vector with `|t(conj v) A v| >= 0.2 |v|^2`, components of size about 1.
    pub fn non_isotropic(&mut self, a: &HermitianForm) -> Vec<C64> {
        loop {
            let v = self.complex_vec(a.n(), 1.0);
            let nv: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            if nv > 0.1 && a.quad(&v).abs() >= 0.2 * nv {
                return v;
            }
        }
    }

    pub fn star_params(&mut self, a: &HermitianForm, max_abs_a: f64) -> StarDiscParams {
        StarDiscParams { a: self.complex_in_disc(max_abs_a), v: self.non_isotropic(a) }
    }

    pub fn full_params(&mut self, a: &HermitianForm, max_abs_a: f64) -> FullDiscParams {
        let n = a.n();
        let w = loop {
            let w = self.complex_vec(n, 1.0);
            if w.iter().map(|c| c.norm_sqr()).sum::<f64>() > 0.1 {
                break w;
            }
        };
        FullDiscParams {
            a: self.complex_in_disc(max_abs_a),
            v: self.complex_vec(n, 1.0),
            w,
            y0: self.uniform(-1.0, 1.0),
            b: self.uniform(0.5, 2.0) * if self.rng.random_bool(0.5) { 1.0 } else { -1.0 },
        }
    }

    /// Center of a random star disc, hence a point of the admissible region.
    pub fn admissible_center(&mut self, a: &HermitianForm, max_abs_a: f64) -> (StarDiscParams, ComplexPoint) {
        let p = self.star_params(a, max_abs_a);
        let z = center_of_star(&p, a);
        (p, z)
    }

    /// Coefficient noise of size `size`, decaying like `1 / (1 + j)^2` in the mode index.
    pub fn coefficient_noise(&mut self, rows: usize, d: usize, size: f64) -> Vec<Vec<C64>> {
        (0..rows)
            .map(|j| {
                let s = size / ((1 + j) * (1 + j)) as f64;
                (0..d).map(|_| C64::new(self.uniform(-s, s), self.uniform(-s, s))).collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_streams_repeat() {
        let mut a = Fixtures::new(7);
        let mut b = Fixtures::new(7);
        assert_eq!(a.complex_vec(3, 1.0), b.complex_vec(3, 1.0));
    }

    #[test]
    fn forms_have_requested_signature() {
        let mut fx = Fixtures::new(1);
        for n in 1..4 {
            assert_eq!(fx.hermitian_form(n, Signature::Positive).signature(), (n, 0));
            if n > 1 {
                let (p, q) = fx.hermitian_form(n, Signature::Mixed).signature();
                assert!(p > 0 && q > 0);
            }
        }
    }
}
