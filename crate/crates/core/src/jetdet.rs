//! Pushforward of lifted discs, transport of boundary 1-jets through 2-jets of maps,
//! and pointwise reconstruction of a map from its 2-jet at the origin.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::disc::types::{dist, norm};
use crate::disc::{BoundaryJet1, ComplexPoint, Covector, LiftedDisc, MapJet2, NormalFormSurface, PolyMap, C64};
use crate::error::{Error, Result};
use crate::quadric::{build_disc_star, center_of_star, invert_center, invert_jet, ClosedFormOptions};
use crate::scaling::to_normal_form;
use crate::solver::{solve_from_quadric, DiscConstraint, SolveOptions};

/// Tolerance for `g~(1)` being a positive multiple of `(1, 0, ..., 0)`.
pub const ALIGNMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PushforwardReport {
    /// Largest negative-frequency coefficient dropped when projecting back.
    pub leakage: f64,
    pub tail: f64,
}

/// `(F o f, g (dF_f)^{-1})`, re-projected onto the same number of modes.
pub fn pushforward_disc(map: &PolyMap, d: &LiftedDisc) -> Result<(LiftedDisc, PushforwardReport)> {
    if map.n() != d.n() {
        return Err(Error::Dimension { expected: d.n(), got: map.n() });
    }
    let modes = d.modes();
    // enough points that the composed polynomial does not alias back onto the kept modes
    let m = d.samples().max((2 * (map.degree().max(1) as usize + 1) * (modes + 2)).next_power_of_two());
    let fine = if m == d.samples() { d.clone() } else { d.with_samples(m)? };
    let mut fs = Vec::with_capacity(m);
    let mut gs = Vec::with_capacity(m);
    for (k, (f, g)) in fine.f_samples().iter().zip(fine.g_samples()).enumerate() {
        let jac = map.jacobian(f);
        let moved = Covector(g.clone()).transport(&jac).ok_or(Error::SingularDifferential { index: k })?;
        fs.push(map.eval(f));
        gs.push(moved.0);
    }
    let (out, leakage) = LiftedDisc::from_samples(&fs, &gs, modes, d.samples())?;
    let tail = out.tail_estimate();
    Ok((out, PushforwardReport { leakage, tail }))
}

/// Transport of `bj` through a 2-jet taken at `bj.f1`, with no renormalization.
pub fn transport_jet1(j: &MapJet2, bj: &BoundaryJet1) -> Result<BoundaryJet1> {
    let d = j.linear.nrows();
    if bj.df1.len() != d {
        return Err(Error::Dimension { expected: d - 1, got: bj.df1.len().saturating_sub(1) });
    }
    let l = &j.linear;
    let linv = l.clone().try_inverse().ok_or(Error::SingularDifferential { index: 0 })?;
    let row = |v: &[C64]| DMatrix::from_row_slice(1, d, v);
    let df = l * DMatrix::from_column_slice(d, 1, &bj.df1);
    let g = row(&bj.g1) * &linv;
    let m = j.quadratic_along(&bj.df1);
    let dg = row(&bj.dg1) * &linv - row(&bj.g1) * &linv * m * &linv;
    Ok(BoundaryJet1 {
        f1: j.value.coords().to_vec(),
        df1: df.iter().copied().collect(),
        g1: g.iter().copied().collect(),
        dg1: dg.iter().copied().collect(),
    })
}

/// Scale of the lift at `zeta = 1`: `lambda` with `g1 = lambda e0`, `lambda > 0`.
fn alignment(g1: &[C64]) -> Result<f64> {
    let lambda = g1[0];
    let off = norm(&g1[1..]).max(lambda.im.abs());
    if lambda.re <= 0.0 || off > ALIGNMENT_TOL * lambda.re.max(1.0) {
        return Err(Error::NormalMisalignment(off.max(if lambda.re <= 0.0 { -lambda.re } else { 0.0 })));
    }
    Ok(lambda.re)
}

/// Transport of a star-normalized boundary jet through a 2-jet fixing the origin,
/// rescaling the lift so the result is star-normalized again.
pub fn pushforward_jet1(j: &MapJet2, bj: &BoundaryJet1) -> Result<BoundaryJet1> {
    let value = norm(j.value.coords());
    if value > 1e-12 {
        return Err(Error::InvalidParameters(format!("2-jet must fix the origin (|F(0)| = {value:.3e})")));
    }
    if norm(&bj.f1) > ALIGNMENT_TOL {
        return Err(Error::InvalidParameters("boundary jet is not star-normalized (f(1) != 0)".into()));
    }
    let mut out = transport_jet1(j, bj)?;
    let lambda = alignment(&out.g1)?;
    out.g1.iter_mut().chain(out.dg1.iter_mut()).for_each(|c| *c /= lambda);
    Ok(out)
}

/// Divides the lift by the positive scalar that makes `g(1) = (1, 0, ..., 0)`.
pub fn renormalize_lift(d: &LiftedDisc) -> Result<LiftedDisc> {
    let lambda = alignment(&d.eval_g(C64::new(1.0, 0.0)))?;
    d.scale_lift(C64::new(1.0 / lambda, 0.0))
}

fn source_disc(source: &NormalFormSurface, z: &ComplexPoint, opts: &SolveOptions) -> Result<LiftedDisc> {
    if source.is_quadric() {
        let p = invert_center(z, source.form())?;
        build_disc_star(&p, source.form(), ClosedFormOptions { modes: opts.modes, samples: opts.output_samples })
    } else {
        Ok(solve_from_quadric(source, &DiscConstraint::center(z.clone()), opts)?.0)
    }
}

fn target_center(target: &NormalFormSurface, bj: &BoundaryJet1, opts: &SolveOptions) -> Result<ComplexPoint> {
    let w_alpha = bj.df1[1..].to_vec();
    let s0 = bj.df1[0] * bj.dg1[0];
    if target.is_quadric() {
        Ok(center_of_star(&invert_jet(&w_alpha, s0, target.form())?, target.form()))
    } else {
        Ok(solve_from_quadric(target, &DiscConstraint::jet(w_alpha, s0), opts)?.0.center())
    }
}

/// `F(z) := f(0)` where `f` is the target disc whose boundary 1-jet is the transport by `j`
/// of the boundary 1-jet of the source disc centered at `z`.
pub fn reconstruct_map(
    j: &MapJet2,
    source: &NormalFormSurface,
    target: &NormalFormSurface,
    points: &[ComplexPoint],
    opts: &SolveOptions,
) -> Vec<Result<ComplexPoint>> {
    points
        .iter()
        .map(|z| {
            let h = source_disc(source, z, opts)?;
            let moved = pushforward_jet1(j, &h.boundary_jet())?;
            target_center(target, &moved, opts)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminationGap {
    /// Whether the 2-jets at the origin agree to 1e-12.
    pub same_jet: bool,
    /// Sup over points of the distance between the two reconstructions.
    pub reconstruction_gap: f64,
    /// Sup over points of `|F(z) - G(z)|`.
    pub direct_gap: f64,
    /// Sup over points of the distance between each reconstruction and its direct evaluation.
    pub fidelity: f64,
}

/// Reconstructs `map` on `points`, first moving `map(0)` to the origin through the
/// normal-form change of `target` at `map(0)` when needed.
pub fn reconstruct_polymap(
    map: &PolyMap,
    source: &NormalFormSurface,
    target: &NormalFormSurface,
    points: &[ComplexPoint],
    opts: &SolveOptions,
) -> Result<Vec<ComplexPoint>> {
    let origin = ComplexPoint::zero(map.n());
    let image = map.eval_point(&origin);
    if norm(image.coords()) <= 1e-12 {
        return reconstruct_map(&map.jet2(origin.coords()), source, target, points, opts).into_iter().collect();
    }
    let (normal, record) = to_normal_form(&target.defining_polynomial(), &image)?;
    let normalized = record.phi_inv.compose(map)?;
    let rec: Result<Vec<_>> = reconstruct_map(&normalized.jet2(origin.coords()), source, &normal, points, opts).into_iter().collect();
    Ok(rec?.iter().map(|p| record.phi.eval_point(p)).collect())
}

/// Compares the reconstructions of `f` and `g` from their 2-jets at 0 with each other and
/// with direct evaluation.
pub fn determination_gap(
    f: &PolyMap,
    g: &PolyMap,
    source: &NormalFormSurface,
    target: Option<&NormalFormSurface>,
    points: &[ComplexPoint],
    opts: &SolveOptions,
) -> Result<DeterminationGap> {
    let target = target.unwrap_or(source);
    let origin = vec![C64::new(0.0, 0.0); f.n() + 1];
    let same_jet = f.jet2(&origin).distance(&g.jet2(&origin)) <= 1e-12;
    let rf = reconstruct_polymap(f, source, target, points, opts)?;
    let rg = reconstruct_polymap(g, source, target, points, opts)?;
    let mut gap = DeterminationGap { same_jet, reconstruction_gap: 0.0, direct_gap: 0.0, fidelity: 0.0 };
    for ((z, a), b) in points.iter().zip(&rf).zip(&rg) {
        let (fz, gz) = (f.eval(z.coords()), g.eval(z.coords()));
        gap.reconstruction_gap = gap.reconstruction_gap.max(a.distance(b));
        gap.direct_gap = gap.direct_gap.max(dist(&fz, &gz));
        gap.fidelity = gap.fidelity.max(dist(a.coords(), &fz)).max(dist(b.coords(), &gz));
    }
    Ok(gap)
}
