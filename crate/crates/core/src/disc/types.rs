use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Point of C^{n+1}, split as `z0` (weight 2) and `z_alpha = (z1, ..., zn)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexPoint(Vec<C64>);

impl ComplexPoint {
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Dimension { expected: 2, got: coords.len() });
        }
        Ok(Self(coords))
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![C64::new(0.0, 0.0); n + 1])
    }

    pub fn from_parts(z0: C64, alpha: &[C64]) -> Self {
        let mut v = Vec::with_capacity(alpha.len() + 1);
        v.push(z0);
        v.extend_from_slice(alpha);
        Self(v)
    }

    pub fn n(&self) -> usize {
        self.0.len() - 1
    }

    pub fn z0(&self) -> C64 {
        self.0[0]
    }

    pub fn alpha(&self) -> &[C64] {
        &self.0[1..]
    }

    pub fn coords(&self) -> &[C64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<C64> {
        self.0
    }

    /// Real coordinates in the order (x0, y0, x1, y1, ...).
    pub fn to_real(&self) -> Vec<f64> {
        self.0.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        dist(&self.0, &other.0)
    }
}

/// Covector acting on C^{n+1} by the complex pairing; stored as a row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Covector(pub Vec<C64>);

impl Covector {
    pub fn pair(&self, v: &[C64]) -> C64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Pullback-style transport `w -> w (dF)^{-1}`; `None` if `df` is singular.
    pub fn transport(&self, df: &DMatrix<C64>) -> Option<Covector> {
        let lu = df.clone().transpose().lu();
        let rhs = nalgebra::DVector::from_column_slice(&self.0);
        lu.solve(&rhs).map(|x| Covector(x.iter().copied().collect()))
    }
}

/// Invertible Hermitian matrix `A` of the model hyperquadric `x0 = t(conj z) A z`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm {
    matrix: DMatrix<C64>,
}

pub const SINGULARITY_TOL: f64 = 1e-12;

impl HermitianForm {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::Dimension { expected: n.max(1), got: matrix.ncols() });
        }
        let asym = (&matrix - matrix.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if asym > 1e-12 * (1.0 + matrix.iter().map(|c| c.norm()).fold(0.0, f64::max)) {
            return Err(Error::NotHermitian(asym));
        }
        let det = matrix.clone().determinant().norm();
        if det <= SINGULARITY_TOL {
            return Err(Error::SingularForm(det));
        }
        // symmetrize exactly so that quadratic forms come out real
        let matrix = (&matrix + matrix.adjoint()).map(|c| c * 0.5);
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: DMatrix::identity(n, n) }
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let d: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)))
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    /// `t(conj u) A v`.
    pub fn form(&self, u: &[C64], v: &[C64]) -> C64 {
        let n = self.n();
        let mut s = C64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..n {
                row += self.matrix[(i, j)] * v[j];
            }
            s += u[i].conj() * row;
        }
        s
    }

    /// The real number `t(conj v) A v`.
    pub fn quad(&self, v: &[C64]) -> f64 {
        self.form(v, v).re
    }

    /// Row vector `t(conj v) A`.
    pub fn conj_row(&self, v: &[C64]) -> Vec<C64> {
        let n = self.n();
        (0..n).map(|j| (0..n).map(|i| v[i].conj() * self.matrix[(i, j)]).sum()).collect()
    }

    /// Counts of (positive, negative) eigenvalues.
    pub fn signature(&self) -> (usize, usize) {
        let eig = self.matrix.clone().symmetric_eigenvalues();
        let pos = eig.iter().filter(|&&x| x > 0.0).count();
        (pos, eig.len() - pos)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.signature().1 == 0
    }
}

/// Value and first derivative at `zeta = 1` of a lifted disc `(f, g)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryJet1 {
    pub f1: Vec<C64>,
    pub df1: Vec<C64>,
    pub g1: Vec<C64>,
    pub dg1: Vec<C64>,
}

impl BoundaryJet1 {
    pub fn distance(&self, other: &Self) -> f64 {
        [
            dist(&self.f1, &other.f1),
            dist(&self.df1, &other.df1),
            dist(&self.g1, &other.g1),
            dist(&self.dg1, &other.dg1),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// 2-jet of a holomorphic map at a base point.
///
/// `quadratic[i]` is the symmetric matrix of second derivatives of the i-th
/// component, so `d2F(u, v)_i = t(u) quadratic[i] v`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapJet2 {
    pub value: ComplexPoint,
    pub linear: DMatrix<C64>,
    pub quadratic: Vec<DMatrix<C64>>,
}

impl MapJet2 {
    pub fn identity(n: usize) -> Self {
        let d = n + 1;
        Self {
            value: ComplexPoint::zero(n),
            linear: DMatrix::identity(d, d),
            quadratic: vec![DMatrix::zeros(d, d); d],
        }
    }

    pub fn n(&self) -> usize {
        self.value.n()
    }

    /// Matrix `M_{ik} = sum_j d2F_i/dz_j dz_k u_j`, the derivative of `dF` along `u`.
    pub fn quadratic_along(&self, u: &[C64]) -> DMatrix<C64> {
        let d = self.linear.nrows();
        DMatrix::from_fn(d, d, |i, k| (0..d).map(|j| self.quadratic[i][(j, k)] * u[j]).sum())
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let mut m = self.value.distance(&other.value);
        m = m.max((&self.linear - &other.linear).iter().map(|c| c.norm()).fold(0.0, f64::max));
        for (a, b) in self.quadratic.iter().zip(&other.quadratic) {
            m = m.max((a - b).iter().map(|c| c.norm()).fold(0.0, f64::max));
        }
        m
    }
}

pub(crate) fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Serde helper: complex numbers as `[re, im]`.
pub mod complex_pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &C64, s: S) -> Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

pub mod complex_vec {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

pub mod complex_table {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<C64>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|row| row.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<C64>>, D::Error> {
        let raw = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|row| row.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_form_rejects_bad_input() {
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, 1.0), C64::new(1.0, 0.0)]);
        assert!(matches!(HermitianForm::new(m), Err(Error::NotHermitian(_))));
        assert!(matches!(HermitianForm::diagonal(&[1.0, 0.0]), Err(Error::SingularForm(_))));
    }

    #[test]
    fn quad_and_signature() {
        let a = HermitianForm::diagonal(&[1.0, -1.0]).unwrap();
        let v = [C64::new(1.0, 1.0), C64::new(0.0, 1.0)];
        assert!((a.quad(&v) - 1.0).abs() < 1e-15);
        assert_eq!(a.signature(), (1, 1));
        assert!(!a.is_positive_definite());
    }

    #[test]
    fn covector_transport_inverts_differential() {
        let df = DMatrix::from_row_slice(2, 2, &[C64::new(2.0, 0.0), C64::new(1.0, 1.0), C64::new(0.0, 0.0), C64::new(3.0, 0.0)]);
        let w = Covector(vec![C64::new(1.0, 0.0), C64::new(0.5, -1.0)]);
        let t = w.transport(&df).unwrap();
        // t * df == w
        for k in 0..2 {
            let s: C64 = (0..2).map(|i| t.0[i] * df[(i, k)]).sum();
            assert!((s - w.0[k]).norm() < 1e-14);
        }
    }
}
