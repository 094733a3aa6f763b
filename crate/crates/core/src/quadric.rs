//! Closed-form stationary discs of the hyperquadric `x0 = t(conj z_alpha) A z_alpha`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::disc::types::{complex_pair, complex_vec, norm, BoundaryJet1, ComplexPoint, HermitianForm, MapJet2, C64};
use crate::disc::{LiftedDisc, PolyMap, DEFAULT_MODES, DEFAULT_SAMPLES};
use crate::error::{Error, Result};

pub const MAX_ABS_A: f64 = 1.0 - 1e-9;
pub const WARN_ABS_A: f64 = 0.95;
const MAX_CLOSED_FORM_MODES: usize = 8192;
const ISOTROPY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullDiscParams {
    #[serde(with = "complex_pair")]
    pub a: C64,
    #[serde(with = "complex_vec")]
    pub v: Vec<C64>,
    #[serde(with = "complex_vec")]
    pub w: Vec<C64>,
    pub y0: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarDiscParams {
    #[serde(with = "complex_pair")]
    pub a: C64,
    #[serde(with = "complex_vec")]
    pub v: Vec<C64>,
}

/// Truncation and sampling used for closed-form discs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedFormOptions {
    pub modes: usize,
    pub samples: usize,
}

impl Default for ClosedFormOptions {
    fn default() -> Self {
        Self { modes: DEFAULT_MODES, samples: DEFAULT_SAMPLES }
    }
}

impl ClosedFormOptions {
    /// Raises the mode count until the geometric tail `|a|^N` is below round-off.
    fn resolve(&self, abs_a: f64) -> (usize, usize) {
        let mut modes = self.modes.max(1);
        if abs_a > 0.0 {
            let needed = ((1e-17f64).ln() / abs_a.ln()).ceil() as usize + 2;
            modes = modes.max(needed.min(MAX_CLOSED_FORM_MODES));
        }
        let samples = self.samples.max((4 * (modes + 2)).next_power_of_two());
        (modes, samples)
    }
}

fn check_a(a: C64) -> Result<f64> {
    let abs_a = a.norm();
    if !abs_a.is_finite() || abs_a >= MAX_ABS_A {
        return Err(Error::NearBoundaryParameter { abs_a });
    }
    if abs_a > WARN_ABS_A {
        log::warn!("|a| = {abs_a:.4} is close to the unit circle; closed-form truncation uses many modes");
    }
    Ok(abs_a)
}

fn check_len(v: &[C64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Dimension { expected: n, got: v.len() });
    }
    Ok(())
}

impl FullDiscParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        check_a(self.a)?;
        check_len(&self.v, n)?;
        check_len(&self.w, n)?;
        if norm(&self.w) == 0.0 {
            return Err(Error::InvalidParameters("w must be nonzero".into()));
        }
        if self.b == 0.0 || !self.b.is_finite() {
            return Err(Error::InvalidParameters("b must be a nonzero real".into()));
        }
        Ok(())
    }
}

impl StarDiscParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        check_a(self.a)?;
        check_len(&self.v, n)?;
        if norm(&self.v) == 0.0 {
            return Err(Error::InvalidParameters("v must be nonzero".into()));
        }
        Ok(())
    }

    /// `gamma = 2(1 - a) / (1 - |a|^2)`.
    pub fn gamma(&self) -> C64 {
        (C64::new(1.0, 0.0) - self.a) * 2.0 / (1.0 - self.a.norm_sqr())
    }

    /// The same disc in the full parametrization.
    pub fn to_full(&self, a_form: &HermitianForm) -> FullDiscParams {
        let one = C64::new(1.0, 0.0);
        let a = self.a;
        let q = a_form.quad(&self.v);
        let shift = -(a - a.conj()) / (1.0 - a.norm_sqr()) * q;
        FullDiscParams {
            a,
            v: self.v.clone(),
            w: self.v.iter().map(|x| -(one - a) * x).collect(),
            y0: shift.im,
            b: 2.0 / (one - a).norm_sqr(),
        }
    }
}

fn zero_rows(count: usize, d: usize) -> Vec<Vec<C64>> {
    vec![vec![C64::new(0.0, 0.0); d]; count]
}

/// Disc of the full family glued to `Q^A`, with its lift.
pub fn build_disc_full(p: &FullDiscParams, a_form: &HermitianForm, opts: ClosedFormOptions) -> Result<LiftedDisc> {
    let n = a_form.n();
    p.validate(n)?;
    let abs_a = p.a.norm();
    let (modes, samples) = opts.resolve(abs_a);
    let d = n + 1;
    let a = p.a;
    let vav = a_form.quad(&p.v);
    let vaw = a_form.form(&p.v, &p.w);
    let waw = a_form.quad(&p.w);
    let s = waw / (1.0 - a.norm_sqr());

    let mut f = zero_rows(modes + 1, d);
    f[0][0] = C64::new(vav + s, p.y0);
    f[0][1..].copy_from_slice(&p.v);
    let mut apow = C64::new(1.0, 0.0);
    for row in f.iter_mut().skip(1) {
        // apow = a^(k-1)
        row[0] = vaw * apow * 2.0 + apow * a * (2.0 * s);
        for (c, wc) in row[1..].iter_mut().zip(&p.w) {
            *c = wc * apow;
        }
        apow *= a;
    }

    // g = b (1 - a zeta) ((zeta - conj a) / 2, -((zeta - conj a) t(conj v) + t(conj w)) A)
    let b = p.b;
    let mut g = zero_rows(modes + 2, d);
    g[0][0] = -a.conj() * (b / 2.0);
    g[1][0] = C64::new((1.0 + a.norm_sqr()) * b / 2.0, 0.0);
    g[2][0] = -a * (b / 2.0);
    let rv = a_form.conj_row(&p.v);
    let rw = a_form.conj_row(&p.w);
    for j in 0..n {
        let u = rw[j] - a.conj() * rv[j];
        g[0][j + 1] = -u * b;
        g[1][j + 1] = -(rv[j] - a * u) * b;
        g[2][j + 1] = a * rv[j] * b;
    }
    LiftedDisc::new(f, g, samples)
}

/// Star-normalized disc: `h(1) = 0`, `h*(1) = (1, 0, ..., 0)`.
pub fn build_disc_star(p: &StarDiscParams, a_form: &HermitianForm, opts: ClosedFormOptions) -> Result<LiftedDisc> {
    let n = a_form.n();
    p.validate(n)?;
    let (modes, samples) = opts.resolve(p.a.norm());
    let d = n + 1;
    let a = p.a;
    let one = C64::new(1.0, 0.0);
    let scale0 = p.gamma() * a_form.quad(&p.v);

    // (1 - zeta) / (1 - a zeta) = 1 + sum_{k>=1} (a^k - a^(k-1)) zeta^k
    let mut f = zero_rows(modes + 1, d);
    let mut apow = one;
    for (k, row) in f.iter_mut().enumerate() {
        let s = if k == 0 { one } else { apow * a - apow };
        if k > 0 {
            apow *= a;
        }
        row[0] = scale0 * s;
        for (c, vc) in row[1..].iter_mut().zip(&p.v) {
            *c = vc * s;
        }
    }

    let bb = 2.0 / (one - a).norm_sqr();
    let mut g = zero_rows(modes + 2, d);
    g[0][0] = -a.conj() * (bb / 2.0);
    g[1][0] = C64::new((1.0 + a.norm_sqr()) * bb / 2.0, 0.0);
    g[2][0] = -a * (bb / 2.0);
    let rv = a_form.conj_row(&p.v);
    for j in 0..n {
        // (1 - a zeta)(1 - zeta) = 1 - (1 + a) zeta + a zeta^2
        g[0][j + 1] = rv[j] * bb;
        g[1][j + 1] = -(one + a) * rv[j] * bb;
        g[2][j + 1] = a * rv[j] * bb;
    }
    LiftedDisc::new(f, g, samples)
}

/// `h(0) = (gamma t(conj v) A v, v)`.
pub fn center_of_star(p: &StarDiscParams, a_form: &HermitianForm) -> ComplexPoint {
    ComplexPoint::from_parts(p.gamma() * a_form.quad(&p.v), &p.v)
}

/// Inverse of the half-plane map `a -> gamma(a)`.
fn a_from_gamma(gamma: C64) -> C64 {
    (gamma * 2.0 - gamma * gamma) / gamma.norm_sqr()
}

fn isotropy_scale(v: &[C64]) -> f64 {
    ISOTROPY_TOL * norm(v).powi(2).max(1e-300)
}

/// Star parameters of the disc centered at `z`.
pub fn invert_center(z: &ComplexPoint, a_form: &HermitianForm) -> Result<StarDiscParams> {
    check_len(z.alpha(), a_form.n())?;
    let v = z.alpha().to_vec();
    let q = a_form.quad(&v);
    if q.abs() <= isotropy_scale(&v) {
        return Err(Error::IsotropicDirection(q));
    }
    let gamma = z.z0() / q;
    if gamma.re <= 1.0 {
        return Err(Error::OutsideAdmissibleRegion { re_gamma: gamma.re });
    }
    Ok(StarDiscParams { a: a_from_gamma(gamma), v })
}

/// Closed-form `(h(1), h'(1), g(1), g'(1))` of a star disc.
pub fn star_boundary_jet(p: &StarDiscParams, a_form: &HermitianForm) -> BoundaryJet1 {
    let n = a_form.n();
    let one = C64::new(1.0, 0.0);
    let a = p.a;
    let vav = a_form.quad(&p.v);
    let mut df1 = vec![C64::new(-2.0 * vav / (1.0 - a.norm_sqr()), 0.0)];
    df1.extend(p.v.iter().map(|x| -x / (one - a)));
    let mut dg1 = vec![(one + a.norm_sqr() - a * 2.0) / (one - a).norm_sqr()];
    dg1.extend(a_form.conj_row(&p.v).into_iter().map(|x| -x * 2.0 / (one - a.conj())));
    let mut g1 = vec![C64::new(0.0, 0.0); n + 1];
    g1[0] = one;
    BoundaryJet1 { f1: vec![C64::new(0.0, 0.0); n + 1], df1, g1, dg1 }
}

/// Star parameters from `w_alpha = f'_alpha(1)` and `s0 = f'_0(1) g'_0(1)`.
pub fn invert_jet(w_alpha: &[C64], s0: C64, a_form: &HermitianForm) -> Result<StarDiscParams> {
    check_len(w_alpha, a_form.n())?;
    let q = a_form.quad(w_alpha);
    if q.abs() <= isotropy_scale(w_alpha) || norm(w_alpha) == 0.0 {
        return Err(Error::IsotropicDirection(q));
    }
    let gamma = C64::new(1.0, 0.0) - s0 / (2.0 * q);
    if gamma.re <= 1.0 {
        return Err(Error::InconsistentJet { re_gamma: gamma.re });
    }
    let a = a_from_gamma(gamma);
    let v = w_alpha.iter().map(|w| -(C64::new(1.0, 0.0) - a) * w).collect();
    Ok(StarDiscParams { a, v })
}

/// Star parameters from a boundary jet.
pub fn invert_boundary_jet(bj: &BoundaryJet1, a_form: &HermitianForm) -> Result<StarDiscParams> {
    invert_jet(&bj.df1[1..], bj.df1[0] * bj.dg1[0], a_form)
}

/// Automorphisms of `Q^A` used in the experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuadricAutomorphism {
    /// `(z0 + 2 t(conj w) A z + t(conj w) A w + i s, z + w)`.
    Heisenberg {
        #[serde(with = "complex_vec")]
        w: Vec<C64>,
        s: f64,
    },
    /// `(t^2 z0, t z)`.
    Dilation { t: f64 },
    /// `(z0, U z)` with `t(conj U) A U = A`; `u` is row-major.
    Rotation {
        #[serde(with = "crate::disc::types::complex_table")]
        u: Vec<Vec<C64>>,
    },
}

impl QuadricAutomorphism {
    pub fn rotation(u: &DMatrix<C64>) -> Self {
        Self::Rotation { u: (0..u.nrows()).map(|i| u.row(i).iter().copied().collect()).collect() }
    }

    fn rotation_matrix(u: &[Vec<C64>], n: usize) -> Result<DMatrix<C64>> {
        if u.len() != n || u.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension { expected: n, got: u.len() });
        }
        Ok(DMatrix::from_fn(n, n, |i, j| u[i][j]))
    }

    pub fn validate(&self, a_form: &HermitianForm) -> Result<()> {
        let n = a_form.n();
        match self {
            Self::Heisenberg { w, s } => {
                check_len(w, n)?;
                if !s.is_finite() {
                    return Err(Error::InvalidParameters("s must be finite".into()));
                }
            }
            Self::Dilation { t } => {
                if !(*t > 0.0 && t.is_finite()) {
                    return Err(Error::InvalidParameters(format!("dilation factor must be positive (got {t})")));
                }
            }
            Self::Rotation { u } => {
                let m = Self::rotation_matrix(u, n)?;
                let defect = (m.adjoint() * a_form.matrix() * &m - a_form.matrix()).iter().map(|c| c.norm()).fold(0.0, f64::max);
                if defect > 1e-10 {
                    return Err(Error::InvalidRotation(defect));
                }
            }
        }
        Ok(())
    }

    /// The map as an exact polynomial.
    pub fn map(&self, a_form: &HermitianForm) -> Result<PolyMap> {
        self.validate(a_form)?;
        let n = a_form.n();
        let d = n + 1;
        match self {
            Self::Heisenberg { w, s } => {
                let row = a_form.conj_row(w);
                let mut lin = DMatrix::identity(d, d);
                for j in 0..n {
                    lin[(0, j + 1)] = row[j] * 2.0;
                }
                let mut offset = vec![C64::new(a_form.quad(w), *s)];
                offset.extend_from_slice(w);
                PolyMap::affine(&lin, &offset)
            }
            Self::Dilation { t } => Ok(PolyMap::dilation(n, *t)),
            Self::Rotation { u } => {
                let m = Self::rotation_matrix(u, n)?;
                let mut lin = DMatrix::identity(d, d);
                lin.view_mut((1, 1), (n, n)).copy_from(&m);
                PolyMap::affine(&lin, &vec![C64::new(0.0, 0.0); d])
            }
        }
    }

    pub fn inverse(&self, a_form: &HermitianForm) -> Result<Self> {
        self.validate(a_form)?;
        Ok(match self {
            Self::Heisenberg { w, s } => Self::Heisenberg { w: w.iter().map(|x| -x).collect(), s: -s },
            Self::Dilation { t } => Self::Dilation { t: 1.0 / t },
            Self::Rotation { u } => {
                let m = Self::rotation_matrix(u, a_form.n())?;
                let inv = m.try_inverse().ok_or(Error::InvalidRotation(f64::INFINITY))?;
                Self::rotation(&inv)
            }
        })
    }

    /// Exact 2-jet at `base`.
    pub fn jet2(&self, a_form: &HermitianForm, base: &ComplexPoint) -> Result<MapJet2> {
        Ok(self.map(a_form)?.jet2(base.coords()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::types::dist;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn a1() -> HermitianForm {
        HermitianForm::identity(1)
    }

    fn am1() -> HermitianForm {
        HermitianForm::diagonal(&[-1.0]).unwrap()
    }

    fn star(a: C64, v: C64) -> StarDiscParams {
        StarDiscParams { a, v: vec![v] }
    }

    #[test]
    fn full_axis_disc() {
        let p = FullDiscParams { a: c(0.0, 0.0), v: vec![c(0.0, 0.0)], w: vec![c(1.0, 0.0)], y0: 0.0, b: 1.0 };
        let d = build_disc_full(&p, &a1(), ClosedFormOptions::default()).unwrap();
        for j in [0, 3, 77] {
            let z = d.zeta(j);
            assert!(dist(&d.f_samples()[j], &[c(1.0, 0.0), z]) < 1e-14);
            // zeta conj(zeta) = 1 turns the fiber into (zeta / 2, -1)
            assert!(dist(&d.g_samples()[j], &[z / 2.0, c(-1.0, 0.0)]) < 1e-14);
            let h = &d.f_samples()[j];
            assert!((h[0].re - h[1].norm_sqr()).abs() < 1e-14);
        }
        let d = build_disc_full(&p, &am1(), ClosedFormOptions::default()).unwrap();
        assert!(dist(&d.f_samples()[5], &[c(-1.0, 0.0), d.zeta(5)]) < 1e-14);
    }

    #[test]
    fn star_disc_at_zero() {
        let d = build_disc_star(&star(c(0.0, 0.0), c(1.0, 0.0)), &a1(), ClosedFormOptions::default()).unwrap();
        for j in [0, 10, 100] {
            let z = d.zeta(j);
            let one = c(1.0, 0.0);
            assert!(dist(&d.f_samples()[j], &[(one - z) * 2.0, one - z]) < 1e-14);
            assert!(dist(&d.g_samples()[j], &[z, (one - z) * 2.0]) < 1e-14);
        }
        assert!(d.center().distance(&ComplexPoint::from_parts(c(2.0, 0.0), &[c(1.0, 0.0)])) < 1e-15);
        let d = build_disc_star(&star(c(0.0, 0.0), c(1.0, 0.0)), &am1(), ClosedFormOptions::default()).unwrap();
        let z = d.zeta(7);
        assert!(dist(&d.f_samples()[7], &[(c(1.0, 0.0) - z) * -2.0, c(1.0, 0.0) - z]) < 1e-14);
    }

    #[test]
    fn star_is_full_with_matching_parameters() {
        let a = HermitianForm::diagonal(&[1.0, -2.0]).unwrap();
        let p = StarDiscParams { a: c(0.3, -0.4), v: vec![c(0.7, 0.1), c(-0.2, 0.5)] };
        let s = build_disc_star(&p, &a, ClosedFormOptions::default()).unwrap();
        let f = build_disc_full(&p.to_full(&a), &a, ClosedFormOptions::default()).unwrap();
        assert!(s.distance(&f) < 1e-13);
    }

    #[test]
    fn centers() {
        assert!(center_of_star(&star(c(0.0, 0.0), c(1.0, 0.0)), &a1()).distance(&ComplexPoint::from_parts(c(2.0, 0.0), &[c(1.0, 0.0)])) < 1e-15);
        assert!(center_of_star(&star(c(0.0, 0.0), c(1.0, 0.0)), &am1()).distance(&ComplexPoint::from_parts(c(-2.0, 0.0), &[c(1.0, 0.0)])) < 1e-15);
        let z = center_of_star(&star(c(0.5, 0.0), c(1.0, 0.0)), &a1());
        assert!((z.z0() - c(4.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn center_inversion() {
        let p = invert_center(&ComplexPoint::from_parts(c(2.0, 0.0), &[c(1.0, 0.0)]), &a1()).unwrap();
        assert!(p.a.norm() < 1e-15 && (p.v[0] - 1.0).norm() < 1e-15);
        let p = invert_center(&ComplexPoint::from_parts(c(4.0 / 3.0, 0.0), &[c(1.0, 0.0)]), &a1()).unwrap();
        assert!((p.a - 0.5).norm() < 1e-15);
        assert!(matches!(
            invert_center(&ComplexPoint::from_parts(c(1.0, 0.0), &[c(1.0, 0.0)]), &a1()),
            Err(Error::OutsideAdmissibleRegion { .. })
        ));
        let hyp = HermitianForm::diagonal(&[1.0, -1.0]).unwrap();
        assert!(matches!(
            invert_center(&ComplexPoint::from_parts(c(2.0, 0.0), &[c(1.0, 0.0), c(0.0, 1.0)]), &hyp),
            Err(Error::IsotropicDirection(_))
        ));
    }

    #[test]
    fn boundary_jets_at_zero() {
        let bj = star_boundary_jet(&star(c(0.0, 0.0), c(1.0, 0.0)), &a1());
        assert!(dist(&bj.df1, &[c(-2.0, 0.0), c(-1.0, 0.0)]) < 1e-15);
        assert!(dist(&bj.dg1, &[c(1.0, 0.0), c(-2.0, 0.0)]) < 1e-15);
        let bj = star_boundary_jet(&star(c(0.0, 0.0), c(1.0, 0.0)), &am1());
        assert!(dist(&bj.df1, &[c(2.0, 0.0), c(-1.0, 0.0)]) < 1e-15);
        assert!(dist(&bj.dg1, &[c(1.0, 0.0), c(2.0, 0.0)]) < 1e-15);
    }

    #[test]
    fn spectral_jet_matches_formula() {
        let a = HermitianForm::diagonal(&[2.0, -1.0]).unwrap();
        let p = StarDiscParams { a: c(-0.2, 0.6), v: vec![c(0.3, 0.9), c(1.1, -0.4)] };
        let d = build_disc_star(&p, &a, ClosedFormOptions::default()).unwrap();
        assert!(d.boundary_jet().distance(&star_boundary_jet(&p, &a)) < 1e-12);
    }

    #[test]
    fn jet_inversion() {
        let p = invert_jet(&[c(-1.0, 0.0)], c(-2.0, 0.0), &a1()).unwrap();
        assert!(p.a.norm() < 1e-15 && (p.v[0] - 1.0).norm() < 1e-15);
        let half = star(c(0.5, 0.0), c(1.0, 0.0));
        let back = invert_boundary_jet(&star_boundary_jet(&half, &a1()), &a1()).unwrap();
        assert!((back.a - half.a).norm() < 1e-14 && (back.v[0] - half.v[0]).norm() < 1e-14);
        assert!(matches!(invert_jet(&[c(0.0, 0.0)], c(-2.0, 0.0), &a1()), Err(Error::IsotropicDirection(_))));
    }

    #[test]
    fn near_boundary_rejected() {
        let p = star(c(1.0 - 1e-10, 0.0), c(1.0, 0.0));
        assert!(matches!(build_disc_star(&p, &a1(), ClosedFormOptions::default()), Err(Error::NearBoundaryParameter { .. })));
    }

    #[test]
    fn automorphisms_preserve_quadric() {
        let a = a1();
        let r = crate::disc::DefiningPolynomial::quadric(&a);
        let h = QuadricAutomorphism::Heisenberg { w: vec![c(1.0, 0.0)], s: 0.0 }.map(&a).unwrap();
        // (z0 + 2 z1 + 1, z1 + 1)
        let img = h.eval(&[c(0.3, 0.2), c(-0.5, 0.1)]);
        assert!(dist(&img, &[c(0.3 + 2.0 * -0.5 + 1.0, 0.2 + 0.2), c(0.5, 0.1)]) < 1e-15);
        for k in 0..100 {
            let th = k as f64 * 0.37;
            let z1 = C64::from_polar(0.1 + 0.02 * k as f64, th);
            let z = ComplexPoint::from_parts(c(z1.norm_sqr(), (k as f64 * 0.1).sin()), &[z1]);
            assert!(r.eval(&h.eval_point(&z)).abs() < 1e-12);
            let dz = PolyMap::dilation(1, 0.7).eval_point(&z);
            assert!((r.eval(&dz) - 0.49 * r.eval(&z)).abs() < 1e-14);
        }
        let rot = QuadricAutomorphism::rotation(&DMatrix::from_element(1, 1, c(-1.0, 0.0)));
        assert!(rot.validate(&a).is_ok());
        let bad = QuadricAutomorphism::rotation(&DMatrix::from_element(1, 1, c(2.0, 0.0)));
        assert!(matches!(bad.validate(&a), Err(Error::InvalidRotation(_))));
    }

    #[test]
    fn automorphism_inverses() {
        let a = HermitianForm::diagonal(&[1.0, -1.0]).unwrap();
        let u = DMatrix::from_row_slice(2, 2, &[c(2f64.sqrt(), 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2f64.sqrt(), 0.0)]);
        let kinds = [
            QuadricAutomorphism::Heisenberg { w: vec![c(0.2, -0.1), c(0.4, 0.3)], s: 0.7 },
            QuadricAutomorphism::Dilation { t: 0.6 },
            QuadricAutomorphism::rotation(&u),
        ];
        let z = [c(0.1, -0.3), c(0.5, 0.2), c(-0.4, 0.9)];
        for k in kinds {
            let f = k.map(&a).unwrap();
            let g = k.inverse(&a).unwrap().map(&a).unwrap();
            assert!(dist(&g.eval(&f.eval(&z)), &z) < 1e-13, "{k:?}");
        }
    }
}
