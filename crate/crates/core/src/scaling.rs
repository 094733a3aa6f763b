//! Normal-form reduction of polynomial defining functions, anisotropic dilations of
//! surfaces and maps, and the decay probes under dilation.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::disc::holder::holder_norm;
use crate::disc::{ComplexPoint, DefiningPolynomial, LiftedDisc, MapJet2, NormalFormSurface, PolyMap, C64};
use crate::error::{Error, Result};
use crate::jetdet::pushforward_disc;

/// Largest `|rho(p)|` accepted as "p lies on the surface".
pub const ON_SURFACE_TOL: f64 = 1e-9;
/// Weighted degree kept when solving for `x0` as a graph.
pub const GRAPH_DEGREE: u32 = 4;

/// Coordinate change produced by [`to_normal_form`].
#[derive(Debug, Clone)]
pub struct NormalFormRecord {
    /// Normal-form coordinates to original coordinates.
    pub phi: PolyMap,
    /// Original coordinates to normal-form coordinates.
    pub phi_inv: PolyMap,
    /// Index of the original coordinate replaced by the normal direction.
    pub pivot: usize,
    /// Sum of absolute coefficients of what the truncated graph leaves over (0 if exact).
    pub truncation_residual: f64,
}

/// Real substitution for `z = p + T w`, expressed in the real coordinates of `w`.
fn complex_affine(t: &DMatrix<C64>, p: &[C64]) -> Vec<DefiningPolynomial> {
    let d = p.len();
    let n = d - 1;
    let var = |k| DefiningPolynomial::variable(n, k);
    let mut subs = Vec::with_capacity(2 * d);
    for k in 0..d {
        let mut x = DefiningPolynomial::constant(n, p[k].re);
        let mut y = DefiningPolynomial::constant(n, p[k].im);
        for j in 0..d {
            let c = t[(k, j)];
            x.add_assign(&var(2 * j).scale(c.re).sub(&var(2 * j + 1).scale(c.im)));
            y.add_assign(&var(2 * j).scale(c.im).add(&var(2 * j + 1).scale(c.re)));
        }
        subs.push(x);
        subs.push(y);
    }
    subs
}

/// Brings `rho` to the shape `x0 - t(conj z) A z + b0 y0^2 + 2 Re(b z) y0 + higher` at `p`.
pub fn to_normal_form(rho: &DefiningPolynomial, p: &ComplexPoint) -> Result<(NormalFormSurface, NormalFormRecord)> {
    let n = rho.n();
    if p.n() != n {
        return Err(Error::Dimension { expected: n, got: p.n() });
    }
    let d = n + 1;
    let at_p = rho.eval_defining(p, 1);
    if at_p.value.abs() > ON_SURFACE_TOL {
        return Err(Error::InvalidParameters(format!("point is not on the surface (rho(p) = {:.3e})", at_p.value)));
    }
    let grad = at_p.gradient.expect("order 1 requested").0;
    let gmax = grad.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if gmax == 0.0 {
        return Err(Error::NonHypersurface);
    }
    let pivot = if grad[0].norm() >= 0.1 * gmax {
        0
    } else {
        (0..d).max_by(|&a, &b| grad[a].norm().total_cmp(&grad[b].norm())).expect("d >= 2")
    };
    // new z0 is 2 d rho_p (z - p); the others are the old coordinates except the pivot
    let others: Vec<usize> = (0..d).filter(|&k| k != pivot).collect();
    let mut s = DMatrix::<C64>::zeros(d, d);
    for k in 0..d {
        s[(0, k)] = grad[k] * 2.0;
    }
    for (row, &k) in others.iter().enumerate() {
        s[(row + 1, k)] = C64::new(1.0, 0.0);
    }
    let t = s.clone().try_inverse().ok_or(Error::NonHypersurface)?;

    let mut rho1 = rho.substitute(&complex_affine(&t, p.coords()))?;
    rho1.add_term(vec![0; 2 * d], -rho1.coeff(&vec![0; 2 * d]));
    rho1.prune(1e-14);
    let x0 = DefiningPolynomial::variable(n, 0);
    let rest = rho1.sub(&x0);

    // x0 = psi(y0, z_alpha) with psi = -rest(psi, y0, z_alpha)
    let (with_x0, without_x0) = split_on(&rest, 0);
    let mut psi = without_x0.scale(-1.0);
    let mut truncation_residual = 0.0;
    if !with_x0.is_empty() {
        for _ in 0..=GRAPH_DEGREE {
            let next = without_x0.add(&substitute_x0(&with_x0, &psi)?.truncate_weighted(GRAPH_DEGREE)).scale(-1.0);
            if next == psi {
                break;
            }
            psi = next;
        }
        let left = rho1.substitute(&graph_substitution(n, &psi))?;
        truncation_residual = left.terms().map(|(_, c)| c.abs()).sum();
    }
    let mut rho2 = x0.sub(&psi);
    rho2.prune(1e-14);

    // remove the harmonic quadratic part 2 Re q(z_alpha) by z0 <- z0 - 2 q
    let dims = 2 * d;
    let mut hess = DMatrix::<f64>::zeros(dims, dims);
    let zero = vec![0.0; dims];
    for a in 2..dims {
        for b in 2..dims {
            hess[(a, b)] = rho2.derivative(a).derivative(b).eval_real(&zero);
        }
    }
    let (zz, _) = crate::disc::poly::wirtinger_second(&hess, d);
    let mut q = PolyMap::zero(n);
    for i in 1..d {
        for j in 1..d {
            let mut e = vec![0u32; d];
            e[i] += 1;
            e[j] += 1;
            q.add_term(0, e, zz[(i, j)] * 0.5);
        }
    }
    q.prune(1e-15);
    let (re_q, im_q) = holomorphic_to_real(&q, 0);
    let mut shift: Vec<DefiningPolynomial> = (0..dims).map(|k| DefiningPolynomial::variable(n, k)).collect();
    shift[0] = shift[0].sub(&re_q.scale(2.0));
    shift[1] = shift[1].sub(&im_q.scale(2.0));
    let mut rho3 = rho2.substitute(&shift)?;
    rho3.prune(1e-13);
    let surface = NormalFormSurface::from_defining(&rho3)?;

    // phi(z') = p + T (z'0 - 2 q(z'_alpha), z'_alpha)
    let mut inner = PolyMap::identity(n);
    for (e, c) in q.component(0).map(|(e, c)| (e.clone(), c)).collect::<Vec<_>>() {
        inner.add_term(0, e, -c * 2.0);
    }
    let phi = PolyMap::affine(&t, p.coords())?.compose(&inner)?;
    // phi_inv(z) = (w0 + 2 q(w_alpha), w_alpha) with w = S (z - p)
    let offset: Vec<C64> = (&s * DMatrix::from_column_slice(d, 1, p.coords())).iter().map(|c| -c).collect();
    let w = PolyMap::affine(&s, &offset)?;
    let mut outer = PolyMap::identity(n);
    for (e, c) in q.component(0).map(|(e, c)| (e.clone(), c)).collect::<Vec<_>>() {
        outer.add_term(0, e, c * 2.0);
    }
    let mut phi_inv = outer.compose(&w)?;
    phi_inv.prune(1e-15);
    Ok((surface, NormalFormRecord { phi, phi_inv, pivot, truncation_residual }))
}

/// Splits into the terms that involve variable `var` and those that do not.
fn split_on(p: &DefiningPolynomial, var: usize) -> (DefiningPolynomial, DefiningPolynomial) {
    let mut with = DefiningPolynomial::zero(p.n());
    let mut without = DefiningPolynomial::zero(p.n());
    for (e, c) in p.terms() {
        if e[var] > 0 {
            with.add_term(e.clone(), c);
        } else {
            without.add_term(e.clone(), c);
        }
    }
    (with, without)
}

fn graph_substitution(n: usize, psi: &DefiningPolynomial) -> Vec<DefiningPolynomial> {
    let mut subs: Vec<DefiningPolynomial> = (0..2 * n + 2).map(|k| DefiningPolynomial::variable(n, k)).collect();
    subs[0] = psi.clone();
    subs
}

fn substitute_x0(p: &DefiningPolynomial, psi: &DefiningPolynomial) -> Result<DefiningPolynomial> {
    p.substitute(&graph_substitution(p.n(), psi))
}

/// Real and imaginary parts of one component of a holomorphic polynomial map.
fn holomorphic_to_real(map: &PolyMap, component: usize) -> (DefiningPolynomial, DefiningPolynomial) {
    let n = map.n();
    let d = n + 1;
    let z: Vec<(DefiningPolynomial, DefiningPolynomial)> =
        (0..d).map(|k| (DefiningPolynomial::variable(n, 2 * k), DefiningPolynomial::variable(n, 2 * k + 1))).collect();
    let mut re = DefiningPolynomial::zero(n);
    let mut im = DefiningPolynomial::zero(n);
    for (e, c) in map.component(component) {
        let mut acc = (DefiningPolynomial::constant(n, c.re), DefiningPolynomial::constant(n, c.im));
        for (k, &pw) in e.iter().enumerate() {
            for _ in 0..pw {
                let (a, b) = &acc;
                let (x, y) = &z[k];
                acc = (a.mul(x).sub(&b.mul(y)), a.mul(y).add(&b.mul(x)));
            }
        }
        re.add_assign(&acc.0);
        im.add_assign(&acc.1);
    }
    (re, im)
}

/// `rho_t = rho o L_t / t^2`.
pub fn dilate_defining(surface: &NormalFormSurface, t: f64) -> Result<NormalFormSurface> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameters(format!("dilation factor must lie in (0, 1] (got {t})")));
    }
    Ok(surface.dilate(t))
}

/// Multi-indices over `vars` real variables of total order at most `max`.
fn multi_indices(vars: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0; vars]];
    let mut frontier = out.clone();
    for _ in 0..max {
        let mut next = Vec::new();
        for a in &frontier {
            let start = a.iter().rposition(|&k| k > 0).unwrap_or(0);
            for v in start..vars {
                let mut b = a.clone();
                b[v] += 1;
                next.push(b);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Grid sup over the real ball of radius `radius` of all partials of order `<= 4` of `rho - r`.
pub fn c4_distance(surface: &NormalFormSurface, radius: f64, grid: usize) -> f64 {
    let diff = surface.defining_polynomial().sub(&DefiningPolynomial::quadric(surface.form()));
    if diff.terms().all(|(_, c)| c == 0.0) {
        return 0.0;
    }
    let vars = diff.num_vars();
    let partials: Vec<DefiningPolynomial> =
        multi_indices(vars, 4).iter().map(|a| diff.partial(a)).filter(|p| p.terms().any(|(_, c)| c != 0.0)).collect();
    let axis: Vec<f64> = if grid <= 1 {
        vec![0.0]
    } else {
        (0..grid).map(|k| -radius + 2.0 * radius * k as f64 / (grid - 1) as f64).collect()
    };
    let mut best = 0.0f64;
    let mut idx = vec![0usize; vars];
    let mut x = vec![0.0; vars];
    loop {
        for (v, &i) in idx.iter().enumerate() {
            x[v] = axis[i];
        }
        if x.iter().map(|v| v * v).sum::<f64>() <= radius * radius * (1.0 + 1e-12) {
            for p in &partials {
                best = best.max(p.eval_real(&x).abs());
            }
        }
        let mut v = 0;
        loop {
            if v == vars {
                return best;
            }
            idx[v] += 1;
            if idx[v] < axis.len() {
                break;
            }
            idx[v] = 0;
            v += 1;
        }
    }
}

/// Conjugation `F_t = L_t^{-1} o F o L_t` by the anisotropic dilation.
pub trait Dilate: Sized {
    fn dilate_by(&self, t: f64) -> Self;
}

impl Dilate for PolyMap {
    fn dilate_by(&self, t: f64) -> Self {
        self.dilate(t)
    }
}

impl Dilate for MapJet2 {
    fn dilate_by(&self, t: f64) -> Self {
        let d = self.linear.nrows();
        let lambda: Vec<f64> = (0..d).map(|k| if k == 0 { t * t } else { t }).collect();
        let value = self.value.coords().iter().zip(&lambda).map(|(v, l)| v / *l).collect();
        MapJet2 {
            value: ComplexPoint::new(value).expect("same dimension"),
            linear: DMatrix::from_fn(d, d, |i, k| self.linear[(i, k)] * lambda[k] / lambda[i]),
            quadratic: self
                .quadratic
                .iter()
                .enumerate()
                .map(|(i, q)| DMatrix::from_fn(d, d, |j, k| q[(j, k)] * lambda[j] * lambda[k] / lambda[i]))
                .collect(),
        }
    }
}

pub fn dilate_map<T: Dilate>(map: &T, t: f64) -> T {
    map.dilate_by(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayOptions {
    /// Holder exponent of the `C^{1,eps}` norm.
    pub eps: f64,
    /// The disc boundary must stay within this distance of the origin.
    pub radius: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self { eps: 0.5, radius: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecaySample {
    pub t: f64,
    pub norm: f64,
    pub leakage: f64,
}

/// `|F_t* disc - disc|` in `C^{1,eps}` of the boundary curve for each `t`.
pub fn pushforward_decay_probe(map: &PolyMap, disc: &LiftedDisc, ts: &[f64], opts: DecayOptions) -> Result<Vec<DecaySample>> {
    let origin = vec![C64::new(0.0, 0.0); map.n() + 1];
    let jet_gap = map.jet2(&origin).distance(&MapJet2::identity(map.n()));
    if jet_gap > 1e-12 {
        return Err(Error::InvalidParameters(format!("map must agree with the identity to second order at 0 (2-jet gap {jet_gap:.3e})")));
    }
    let sup = disc.f_samples().iter().map(|f| crate::disc::types::norm(f)).fold(0.0, f64::max);
    if sup > opts.radius {
        return Err(Error::Domain { sup, radius: opts.radius });
    }
    let base = disc.real_curve();
    ts.iter()
        .map(|&t| {
            let (moved, rep) = pushforward_disc(&map.dilate(t), disc)?;
            let diff: Vec<Vec<f64>> = moved.real_curve().iter().zip(&base).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect();
            Ok(DecaySample { t, norm: holder_norm(&diff, 1, opts.eps)?, leakage: rep.leakage })
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::poly::mono;
    use crate::disc::types::HermitianForm;
    use crate::quadric::{build_disc_star, ClosedFormOptions, StarDiscParams};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn r_plus(exp: Vec<u32>, coeff: f64) -> DefiningPolynomial {
        let a = HermitianForm::identity(1);
        DefiningPolynomial::quadric(&a).add(&DefiningPolynomial::from_terms(1, [(exp, coeff)]).unwrap())
    }

    fn points(n: usize) -> impl Iterator<Item = (f64, C64)> {
        (0..n).map(|k| {
            let s = k as f64;
            ((0.37 * s).sin() * 0.8, c((1.3 * s).cos() * 0.7, (0.9 * s + 0.4).sin() * 0.7))
        })
    }

    #[test]
    fn normal_form_is_identity_on_quadric() {
        let a = HermitianForm::identity(1);
        let r = DefiningPolynomial::quadric(&a);
        let (s, rec) = to_normal_form(&r, &ComplexPoint::zero(1)).unwrap();
        assert!(s.is_quadric());
        assert_eq!(s.form(), &a);
        assert_eq!(rec.phi, PolyMap::identity(1));
        assert_eq!(rec.phi_inv, PolyMap::identity(1));
    }

    #[test]
    fn harmonic_quadratic_removed() {
        // x0 - |z1|^2 + Re(z1^2)
        let rho = r_plus(vec![0, 0, 2, 0], 1.0).add(&DefiningPolynomial::from_terms(1, [(vec![0, 0, 0, 2], -1.0)]).unwrap());
        let (s, rec) = to_normal_form(&rho, &ComplexPoint::zero(1)).unwrap();
        assert!(s.is_quadric());
        assert_eq!(s.form(), &HermitianForm::identity(1));
        assert!((rec.phi_inv.jet2(&[c(0.0, 0.0); 2]).quadratic[0][(1, 1)] - c(2.0, 0.0)).norm() < 1e-15);
        let new_rho = s.defining_polynomial();
        for (y0, z1) in points(100) {
            let x0 = z1.norm_sqr() - (z1 * z1).re;
            let z = ComplexPoint::from_parts(c(x0, y0), &[z1]);
            assert!(rho.eval(&z).abs() < 1e-14);
            assert!(new_rho.eval(&rec.phi_inv.eval_point(&z)).abs() < 1e-13);
        }
    }

    #[test]
    fn b_term_survives() {
        let rho = r_plus(vec![0, 1, 1, 0], 1.0);
        let (s, rec) = to_normal_form(&rho, &ComplexPoint::zero(1)).unwrap();
        assert!((s.b()[0] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(s.higher().is_empty());
        assert_eq!(rec.truncation_residual, 0.0);
    }

    #[test]
    fn off_origin_point_and_x0_dependence() {
        // x0 + 0.1 x0^2 - |z1|^2 + y0 x1, taken at a nonzero surface point
        let rho = r_plus(vec![0, 1, 1, 0], 1.0).add(&DefiningPolynomial::from_terms(1, [(vec![2, 0, 0, 0], 0.1)]).unwrap());
        let z1 = c(0.3, -0.2);
        let y0 = 0.25;
        // solve 0.1 x0^2 + x0 - |z1|^2 + y0 Re z1 = 0 for the root near 0
        let k = -z1.norm_sqr() + y0 * z1.re;
        let x0 = (-1.0 + (1.0 - 0.4 * k).sqrt()) / 0.2;
        let p = ComplexPoint::from_parts(c(x0, y0), &[z1]);
        let (s, rec) = to_normal_form(&rho, &p).unwrap();
        assert!(rec.phi.eval_point(&ComplexPoint::zero(1)).distance(&p) < 1e-14);
        let back = rec.phi_inv.compose(&rec.phi).unwrap();
        let probe = ComplexPoint::from_parts(c(0.2, 0.1), &[c(-0.3, 0.4)]);
        assert!(back.eval_point(&probe).distance(&probe) < 1e-13);
        assert!(rec.truncation_residual > 0.0);
        assert_eq!(s.form().signature(), (1, 0));
        // surface points close to p map close to the new zero set, up to the dropped weight >= 5 terms
        let new_rho = s.defining_polynomial();
        for (dy, dz) in points(20) {
            let (dy, dz) = (dy * 1e-4, dz * 1e-2);
            let zz = z1 + dz;
            let yy = y0 + dy;
            let k = -zz.norm_sqr() + yy * zz.re;
            let xx = (-1.0 + (1.0 - 0.4 * k).sqrt()) / 0.2;
            let w = rec.phi_inv.eval_point(&ComplexPoint::from_parts(c(xx, yy), &[zz]));
            assert!(new_rho.eval(&w).abs() < 1e-8, "{}", new_rho.eval(&w));
        }
    }

    #[test]
    fn singular_gradient_rejected() {
        let rho = DefiningPolynomial::from_terms(1, [(mono(4, &[0, 0]), 1.0), (mono(4, &[2, 2]), -1.0)]).unwrap();
        assert!(matches!(to_normal_form(&rho, &ComplexPoint::zero(1)), Err(Error::NonHypersurface)));
    }

    #[test]
    fn dilation_semigroup_and_scaling() {
        let s = NormalFormSurface::from_defining(&r_plus(vec![0, 1, 2, 0], 1.0).add(&DefiningPolynomial::from_terms(1, [(vec![0, 1, 1, 0], 1.0)]).unwrap())).unwrap();
        let a = dilate_defining(&dilate_defining(&s, 0.5).unwrap(), 0.2).unwrap();
        let b = dilate_defining(&s, 0.1).unwrap();
        assert!(a.defining_polynomial().sub(&b.defining_polynomial()).terms().all(|(_, c)| c.abs() < 1e-16));
        assert!((b.higher().coeff(&[0, 1, 2, 0]) - 0.01).abs() < 1e-16);
        assert!((b.b()[0].re - 0.05).abs() < 1e-16);
        assert!(dilate_defining(&s, 1.5).is_err());
    }

    #[test]
    fn c4_distance_linear_and_decaying() {
        let s1 = NormalFormSurface::from_defining(&r_plus(vec![0, 1, 1, 0], 0.3)).unwrap();
        let s2 = NormalFormSurface::from_defining(&r_plus(vec![0, 1, 1, 0], 0.6)).unwrap();
        assert!((c4_distance(&s2, 1.0, 9) / c4_distance(&s1, 1.0, 9) - 2.0).abs() < 1e-10);
        assert_eq!(c4_distance(&NormalFormSurface::quadric(HermitianForm::identity(1)), 1.0, 9), 0.0);
        let mut last = 0.0;
        for t in [0.05, 0.1, 0.2, 0.5, 1.0] {
            let v = c4_distance(&s1.dilate(t), 1.0, 9);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn jet_dilation_matches_map_dilation() {
        let mut map = PolyMap::identity(1);
        map.add_term(0, vec![1, 1], c(0.5, 0.2));
        map.add_term(1, vec![0, 2], c(-0.3, 0.0));
        map.add_term(1, vec![1, 0], c(0.7, 0.0));
        let origin = [c(0.0, 0.0); 2];
        let t = 0.3;
        let direct = dilate_map(&map, t).jet2(&origin);
        let via = dilate_map(&map.jet2(&origin), t);
        assert!(direct.distance(&via) < 1e-15);
        let lam = PolyMap::dilation(1, 0.7);
        assert_eq!(dilate_map(&lam, t), lam);
    }

    #[test]
    fn decay_probe_is_linear_in_t() {
        let a = HermitianForm::identity(1);
        let disc = build_disc_star(&StarDiscParams { a: c(0.0, 0.0), v: vec![c(1.0, 0.0)] }, &a, ClosedFormOptions::default()).unwrap();
        let mut map = PolyMap::identity(1);
        map.add_term(0, vec![0, 3], c(1.0, 0.0));
        let ts = [0.2, 0.1, 0.05];
        let out = pushforward_decay_probe(&map, &disc, &ts, DecayOptions::default()).unwrap();
        let slope = loglog_slope(&ts, &out.iter().map(|s| s.norm).collect::<Vec<_>>());
        assert!(slope >= 0.95, "slope {slope}");
        let zero = pushforward_decay_probe(&PolyMap::identity(1), &disc, &ts, DecayOptions::default()).unwrap();
        assert!(zero.iter().all(|s| s.norm < 1e-12));
        assert!(matches!(
            pushforward_decay_probe(&map, &disc, &ts, DecayOptions { eps: 0.5, radius: 1.0 }),
            Err(Error::Domain { .. })
        ));
    }
}
