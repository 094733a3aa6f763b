//! The twisted conormal fibration of a hypersurface and the index data of discs attached to it.
//!
//! A lifted disc `(f, g)` is attached when `(f(zeta), g(zeta))` satisfies the
//! `2n + 2` real equations below at every boundary point. With `P = d rho / dz0`
//! and `D_j = d rho / dz_j` at `z`, and `w` the fiber coordinate:
//!
//! * `rho(z)`
//! * `i u - i conj(u)` with `u = 2 w0 conj(zeta P)`
//! * `u_j + conj(u_j)` and `i (u_j - conj(u_j))` with `u_j = 2 P w_j - 2 w0 D_j`
//!
//! When `P = 1/2` these are exactly `i w0 / zeta - i zeta conj(w0)` and the real and
//! imaginary parts of `w_j - 2 w0 D_j`. The general form keeps the zero set equal to
//! `{w in zeta R* d rho}` when `rho` depends on `y0`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::disc::types::{Covector, C64, I};
use crate::disc::{LiftedDisc, NormalFormSurface, PointDerivatives, SurfaceCalculus};
use crate::error::{Error, Result};

pub const CONDITION_WARN: f64 = 1e10;

#[derive(Debug, Clone)]
pub struct FibrationEquations {
    surface: NormalFormSurface,
    calc: SurfaceCalculus,
}

/// Holomorphic partials `d rho~_i / d(z, w)` of the real equations at one point.
///
/// Rows follow the equation order, columns are `(z0..zn, w0..wn)`. The matrix
/// of antiholomorphic partials is the conjugate.
pub(crate) fn holomorphic_partials(der: &PointDerivatives, zeta: C64, w: &[C64]) -> DMatrix<C64> {
    let d = w.len();
    let n = d - 1;
    let mut h = DMatrix::<C64>::zeros(2 * d, 2 * d);
    let p = der.d[0];
    let w0 = w[0];
    for k in 0..d {
        h[(0, k)] = der.d[k];
        // d/dz_k of conj(P) is d2 rho / dz_k dconj(z0)
        let dpbar = der.ddbar[(k, 0)];
        h[(1, k)] = I * 2.0 * w0 * zeta.conj() * dpbar - I * 2.0 * w0.conj() * zeta * der.dd[(0, k)];
    }
    h[(1, d)] = I * 2.0 * zeta.conj() * p.conj();
    for j in 1..=n {
        let (re_row, im_row) = (1 + j, 1 + n + j);
        for k in 0..d {
            let du = w[j] * der.dd[(0, k)] * 2.0 - w0 * der.dd[(j, k)] * 2.0;
            // d conj(u_j) / dz_k = conj(d u_j / dconj(z_k))
            let du_bar = (w[j] * der.ddbar[(0, k)] * 2.0 - w0 * der.ddbar[(j, k)] * 2.0).conj();
            h[(re_row, k)] = du + du_bar;
            h[(im_row, k)] = I * du - I * du_bar;
        }
        let dw0 = -der.d[j] * 2.0;
        let dwj = p * 2.0;
        h[(re_row, d)] = dw0;
        h[(im_row, d)] = I * dw0;
        h[(re_row, d + j)] = dwj;
        h[(im_row, d + j)] = I * dwj;
    }
    h
}

pub(crate) fn residual_from(der: &PointDerivatives, zeta: C64, w: &[C64]) -> Vec<f64> {
    let d = w.len();
    let n = d - 1;
    let p = der.d[0];
    let mut out = vec![0.0; 2 * d];
    out[0] = der.value;
    let u = w[0] * (zeta * p).conj() * 2.0;
    out[1] = (I * u - I * u.conj()).re;
    for j in 1..=n {
        let uj = p * w[j] * 2.0 - w[0] * der.d[j] * 2.0;
        out[1 + j] = 2.0 * uj.re;
        out[1 + n + j] = -2.0 * uj.im;
    }
    out
}

impl FibrationEquations {
    pub fn new(surface: &NormalFormSurface) -> Self {
        Self { surface: surface.clone(), calc: surface.calculus() }
    }

    pub fn surface(&self) -> &NormalFormSurface {
        &self.surface
    }

    pub fn calculus(&self) -> &SurfaceCalculus {
        &self.calc
    }

    pub fn n(&self) -> usize {
        self.surface.n()
    }

    /// The `2n + 2` real equation values at `(z, w)` over the boundary point `zeta`.
    pub fn residual(&self, zeta: C64, z: &[C64], w: &[C64]) -> Vec<f64> {
        residual_from(&self.calc.eval(z), zeta, w)
    }

    /// Membership in the fibration: all equations vanish to `tol` and `w0 != 0`.
    pub fn contains(&self, zeta: C64, z: &[C64], w: &[C64], tol: f64) -> bool {
        w[0].norm() > tol && self.residual(zeta, z, w).iter().all(|r| r.abs() <= tol)
    }

    /// Holomorphic partials of the equations (see [`holomorphic_partials`]).
    pub fn linearize(&self, zeta: C64, z: &[C64], w: &[C64]) -> DMatrix<C64> {
        holomorphic_partials(&self.calc.eval(z), zeta, w)
    }

    /// Whether the fibration fiber is totally real at the point, with the
    /// smallest principal angle between its tangent space `T` and `iT`.
    pub fn total_reality_check(&self, zeta: C64, z: &[C64], w: &Covector) -> Result<(bool, f64)> {
        let w = &w.0;
        let res = self.residual(zeta, z, w);
        let worst = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if worst > 1e-8 || w[0].norm() == 0.0 {
            return Err(Error::NotOnFibration(worst));
        }
        let h = self.linearize(zeta, z, w);
        let d2 = h.ncols();
        // real Jacobian: dE/dRe u = 2 Re H, dE/dIm u = -2 Im H
        let jr = DMatrix::<f64>::from_fn(h.nrows(), 2 * d2, |i, c| if c < d2 { 2.0 * h[(i, c)].re } else { -2.0 * h[(i, c - d2)].im });
        let eig = SymmetricEigen::new(jr.transpose() * &jr);
        let mut order: Vec<usize> = (0..2 * d2).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let dim = 2 * d2 - h.nrows();
        let kernel = DMatrix::from_fn(2 * d2, dim, |r, c| eig.eigenvectors[(r, order[c])]);
        // multiplication by i on (Re u, Im u)
        let ik = DMatrix::from_fn(2 * d2, dim, |r, c| if r < d2 { -kernel[(r + d2, c)] } else { kernel[(r - d2, c)] });
        let cosines = (kernel.transpose() * ik).singular_values();
        let max_cos = cosines.iter().fold(0.0f64, |m, &s| m.max(s)).min(1.0);
        let angle = max_cos.acos();
        Ok((angle > 1e-8, angle))
    }
}

/// Samples of a matrix-valued function on the boundary grid.
#[derive(Debug, Clone)]
pub struct CircleMatrixFunction {
    pub samples: Vec<DMatrix<C64>>,
    /// Condition number of each sample.
    pub condition: Vec<f64>,
    pub warnings: Vec<String>,
}

impl CircleMatrixFunction {
    pub fn new(samples: Vec<DMatrix<C64>>) -> Self {
        let condition: Vec<f64> = samples.iter().map(condition_number).collect();
        let warnings = condition
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > CONDITION_WARN)
            .map(|(k, c)| format!("sample {k} is ill-conditioned (cond {c:.3e})"))
            .collect();
        Self { samples, condition, warnings }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_condition(&self) -> f64 {
        self.condition.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest reciprocal condition number over the samples.
    pub fn min_reciprocal_condition(&self) -> f64 {
        1.0 / self.max_condition()
    }

    pub fn determinants(&self) -> Vec<C64> {
        self.samples.iter().map(|m| m.clone().determinant()).collect()
    }

    /// Right multiplication of every sample by a constant matrix.
    pub fn mul_constant(&self, c: &DMatrix<C64>) -> Self {
        Self::new(self.samples.iter().map(|m| m * c).collect())
    }
}

fn condition_number(m: &DMatrix<C64>) -> f64 {
    let s = m.clone().singular_values();
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `G(zeta_k)`: partials of the equations in `(conj z, conj w)` along the boundary of `d`.
pub fn assemble_g(eqs: &FibrationEquations, d: &LiftedDisc) -> Result<CircleMatrixFunction> {
    let samples: Vec<DMatrix<C64>> = (0..d.samples())
        .map(|k| eqs.linearize(d.zeta(k), &d.f_samples()[k], &d.g_samples()[k]).map(|c| c.conj()))
        .collect();
    let out = CircleMatrixFunction::new(samples);
    if let Some(index) = out.condition.iter().position(|c| !c.is_finite()) {
        return Err(Error::DegenerateFibration { index });
    }
    Ok(out)
}

/// `B = -conj(G)^{-1} G` samplewise.
pub fn matrix_b(g: &CircleMatrixFunction) -> Result<CircleMatrixFunction> {
    let mut samples = Vec::with_capacity(g.len());
    for (index, m) in g.samples.iter().enumerate() {
        let lu = m.map(|c| c.conj()).lu();
        let x = lu.solve(m).ok_or(Error::DegenerateFibration { index })?;
        samples.push(-x);
    }
    let out = CircleMatrixFunction::new(samples);
    for w in &out.warnings {
        log::warn!("{w}");
    }
    Ok(out)
}

/// Winding number around 0 of a closed sampled curve.
pub fn winding_number(values: &[C64]) -> Result<i64> {
    let m = values.len();
    if let Some(k) = values.iter().position(|v| v.norm() == 0.0 || !v.is_finite()) {
        return Err(Error::DegenerateFibration { index: k });
    }
    let mut total = 0.0;
    for k in 0..m {
        let step = (values[(k + 1) % m] / values[k]).arg();
        if step.abs() >= PI / 2.0 {
            return Err(Error::UnderResolved(format!("argument jumps by {step:.3} between samples {k} and {}; raise M", (k + 1) % m)));
        }
        total += step;
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 1e-6 {
        return Err(Error::UnderResolved(format!("winding {turns} is not integral")));
    }
    Ok(rounded as i64)
}

/// Maslov index: winding number of `det B`.
pub fn maslov_index(b: &CircleMatrixFunction) -> Result<i64> {
    winding_number(&b.determinants())
}

/// Maslov index of the fibration along the boundary of `d`.
pub fn maslov_of_disc(eqs: &FibrationEquations, d: &LiftedDisc) -> Result<i64> {
    maslov_index(&matrix_b(&assemble_g(eqs, d)?)?)
}

/// The block-diagonal model `diag(-1, -R, ..., -R, zeta^2)` with `R = [[0, zeta], [zeta, 0]]`.
pub fn model_b1(n: usize, zeta: C64) -> DMatrix<C64> {
    let d = 2 * n + 2;
    let mut m = DMatrix::zeros(d, d);
    m[(0, 0)] = C64::new(-1.0, 0.0);
    for j in 0..n {
        let k = 1 + 2 * j;
        m[(k, k + 1)] = -zeta;
        m[(k + 1, k)] = -zeta;
    }
    m[(d - 1, d - 1)] = zeta * zeta;
    m
}

/// Partial indices of the model reduction, largest first: `2`, then `1` repeated `2n` times, then `0`.
///
/// The individual values are read off the diagonal blocks; only their
/// nonnegativity and their sum are established in general. The sum is checked
/// against the winding number of `det B1`.
pub fn model_partial_indices(n: usize) -> Vec<i64> {
    let mut out = vec![2];
    out.extend(std::iter::repeat_n(1, 2 * n));
    out.push(0);
    let samples = CircleMatrixFunction::new((0..64).map(|k| model_b1(n, crate::disc::fourier::grid_point(k, 64))).collect());
    let winding = maslov_index(&samples).expect("model determinant is -(-zeta^2)^n zeta^2");
    assert_eq!(out.iter().sum::<i64>(), winding, "model partial indices disagree with det B1 winding");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::types::HermitianForm;
    use crate::disc::ComplexPoint;
    use crate::quadric::{build_disc_star, ClosedFormOptions, StarDiscParams};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn model(n: usize) -> (FibrationEquations, LiftedDisc) {
        let a = if n == 1 { HermitianForm::identity(1) } else { HermitianForm::diagonal(&[1.0, -1.0]).unwrap() };
        let v: Vec<C64> = (0..n).map(|j| c(1.0, 0.3 * j as f64)).collect();
        let d = build_disc_star(&StarDiscParams { a: c(0.1, 0.2), v }, &a, ClosedFormOptions::default()).unwrap();
        (FibrationEquations::new(&NormalFormSurface::quadric(a)), d)
    }

    #[test]
    fn star_disc_is_attached() {
        let a = HermitianForm::identity(1);
        let d = build_disc_star(&StarDiscParams { a: c(0.0, 0.0), v: vec![c(1.0, 0.0)] }, &a, ClosedFormOptions::default()).unwrap();
        let eqs = FibrationEquations::new(&NormalFormSurface::quadric(a));
        for k in (0..d.samples()).step_by(d.samples() / 20) {
            let r = eqs.residual(d.zeta(k), &d.f_samples()[k], &d.g_samples()[k]);
            assert!(r.iter().all(|x| x.abs() < 1e-12), "{r:?}");
        }
    }

    #[test]
    fn zero_section_and_off_surface() {
        let eqs = FibrationEquations::new(&NormalFormSurface::quadric(HermitianForm::identity(1)));
        let z = [c(1.0, 0.0), c(1.0, 0.0)];
        let zero = [c(0.0, 0.0); 2];
        let r = eqs.residual(c(1.0, 0.0), &z, &zero);
        assert!(r.iter().all(|x| x.abs() < 1e-15));
        assert!(!eqs.contains(c(1.0, 0.0), &z, &zero, 1e-12));
        let r = eqs.residual(c(1.0, 0.0), &[c(1.0, 0.0), c(0.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((r[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn g_matrix_at_one() {
        let a = HermitianForm::identity(1);
        let d = build_disc_star(&StarDiscParams { a: c(0.0, 0.0), v: vec![c(1.0, 0.0)] }, &a, ClosedFormOptions::default()).unwrap();
        let g = assemble_g(&FibrationEquations::new(&NormalFormSurface::quadric(a)), &d).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
                c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0), c(0.0, 0.0),
                c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0),
                c(0.0, 0.0), c(0.0, 2.0), c(0.0, 0.0), c(0.0, -1.0),
            ],
        );
        assert!((&g.samples[0] - &expected).iter().all(|x| x.norm() < 1e-13), "{}", g.samples[0]);
        assert!(g.samples[0].clone().determinant().norm() > 0.1);
    }

    #[test]
    fn b_is_an_involution_up_to_conjugation() {
        let (eqs, d) = model(2);
        let b = matrix_b(&assemble_g(&eqs, &d).unwrap()).unwrap();
        for m in &b.samples {
            let prod = m * m.map(|x| x.conj());
            let defect = (prod - DMatrix::<C64>::identity(6, 6)).iter().map(|x| x.norm()).fold(0.0, f64::max);
            assert!(defect < 1e-10);
        }
    }

    #[test]
    fn maslov_of_model_discs() {
        for n in [1, 2] {
            let (eqs, d) = model(n);
            assert_eq!(maslov_of_disc(&eqs, &d).unwrap(), 2 * n as i64 + 2);
            let fine = d.with_samples(2 * d.samples()).unwrap();
            assert_eq!(maslov_of_disc(&eqs, &fine).unwrap(), 2 * n as i64 + 2);
        }
    }

    #[test]
    fn constant_multiplier_keeps_maslov() {
        let (eqs, d) = model(1);
        let g = assemble_g(&eqs, &d).unwrap();
        let cmat = DMatrix::from_fn(4, 4, |i, j| c(if i == j { 2.0 } else { 0.1 }, 0.3 * (i as f64 - j as f64)));
        assert_eq!(maslov_index(&matrix_b(&g.mul_constant(&cmat)).unwrap()).unwrap(), 4);
    }

    #[test]
    fn constant_b_has_zero_index() {
        let m = DMatrix::from_fn(3, 3, |i, j| c((i + 2 * j) as f64, if i == j { 3.0 } else { 0.0 }));
        let b = CircleMatrixFunction::new(vec![m; 16]);
        assert_eq!(maslov_index(&b).unwrap(), 0);
    }

    #[test]
    fn coarse_grid_is_under_resolved() {
        let z: Vec<C64> = (0..8).map(|k| crate::disc::fourier::grid_point(k, 8).powi(3)).collect();
        assert!(matches!(winding_number(&z), Err(Error::UnderResolved(_))));
    }

    /// The column and row operations that reduce G on the model to B1.
    #[test]
    fn reduction_to_model_b1() {
        let n = 2;
        let a = HermitianForm::diagonal(&[1.0, -1.0]).unwrap();
        let p = StarDiscParams { a: c(0.3, -0.2), v: vec![c(0.8, 0.1), c(0.2, -0.5)] };
        let disc = build_disc_star(&p, &a, ClosedFormOptions::default()).unwrap();
        let eqs = FibrationEquations::new(&NormalFormSurface::quadric(a.clone()));
        let g = assemble_g(&eqs, &disc).unwrap();
        let d = n + 1;
        let ainv_t = a.matrix().clone().try_inverse().unwrap().transpose();
        let mut right = DMatrix::<C64>::identity(2 * d, 2 * d);
        right[(0, 0)] = c(2.0, 0.0);
        right.view_mut((1, 1), (n, n)).copy_from(&ainv_t);
        // rows (r0, r2, r_{n+2}, r3, r_{n+3}, ..., r1); columns (z0, z1, w1, ..., zn, wn, w0)
        let mut rows = vec![0];
        for j in 1..=n {
            rows.push(1 + j);
            rows.push(1 + n + j);
        }
        rows.push(1);
        let mut cols = vec![0];
        for j in 1..=n {
            cols.push(j);
            cols.push(d + j);
        }
        cols.push(d);
        let b_scale = 2.0 / (c(1.0, 0.0) - p.a).norm_sqr();
        for k in (0..disc.samples()).step_by(16) {
            let zeta = disc.zeta(k);
            let gr = &g.samples[k] * &right;
            let mut pm = DMatrix::from_fn(2 * d, 2 * d, |i, j| gr[(rows[i], cols[j])]);
            let s = c(1.0, 0.0) - (p.a * zeta).conj();
            for j in 1..=n {
                let (zc, wc) = (2 * j - 1, 2 * j);
                for i in 0..2 * d {
                    pm[(i, zc)] /= s * b_scale;
                    pm[(i, wc)] *= s;
                }
            }
            let b1 = -pm.map(|x| x.conj()).try_inverse().unwrap() * &pm;
            let model = model_b1(n, zeta);
            // diagonal blocks agree; the off-diagonal part is block upper triangular
            for i in 0..2 * d {
                for j in 0..2 * d {
                    let same_block = i == j || (i > 0 && j > 0 && i < 2 * d - 1 && j < 2 * d - 1 && (i - 1) / 2 == (j - 1) / 2);
                    if same_block {
                        assert!((b1[(i, j)] - model[(i, j)]).norm() < 1e-10, "({i},{j}) at {zeta}: {b1}");
                    } else if i > j {
                        assert!(b1[(i, j)].norm() < 1e-10, "({i},{j}) below the blocks at {zeta}");
                    }
                }
            }
        }
    }

    #[test]
    fn partial_indices() {
        for n in 1..=5 {
            let idx = model_partial_indices(n);
            assert_eq!(idx.iter().sum::<i64>(), 2 * n as i64 + 2);
            assert!(idx.iter().all(|&k| k >= 0));
        }
        assert_eq!(model_partial_indices(1), vec![2, 1, 1, 0]);
    }

    #[test]
    fn model_fibration_is_totally_real() {
        let (eqs, d) = model(1);
        for k in (0..d.samples()).step_by(32) {
            let (ok, angle) = eqs.total_reality_check(d.zeta(k), &d.f_samples()[k], &Covector(d.g_samples()[k].clone())).unwrap();
            assert!(ok && angle > 0.1, "angle {angle}");
        }
        let off = eqs.total_reality_check(c(1.0, 0.0), ComplexPoint::from_parts(c(1.0, 0.0), &[c(0.0, 0.0)]).coords(), &Covector(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        assert!(matches!(off, Err(Error::NotOnFibration(_))));
    }
}
