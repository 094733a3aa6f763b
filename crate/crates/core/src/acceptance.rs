//! The acceptance suite as library functions, shared by the test target and `selftest`.

use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::conormal::{maslov_of_disc, model_partial_indices, FibrationEquations};
use crate::disc::types::{dist, norm};
use crate::disc::{ComplexPoint, DefiningPolynomial, HermitianForm, LiftedDisc, NormalFormSurface, PolyMap, C64};
use crate::error::Result;
use crate::fixtures::{Fixtures, Signature};
use crate::jetdet::{determination_gap, pushforward_disc, pushforward_jet1, reconstruct_map, renormalize_lift, transport_jet1};
use crate::quadric::{
    build_disc_full, build_disc_star, center_of_star, invert_boundary_jet, invert_center, ClosedFormOptions,
    QuadricAutomorphism, StarDiscParams,
};
use crate::scaling::{c4_distance, loglog_slope, pushforward_decay_probe, DecayOptions};
use crate::solver::{family_scan, solve_disc, solve_from_quadric, DiscConstraint, SolveOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{mark}] {:>2} {:<28} {} ({:.2} s)", self.id, self.title, self.detail, self.seconds)
    }
}

pub const TITLES: [&str; 12] = [
    "closed-form gluing",
    "conormality of lifts",
    "parametrization round trips",
    "maslov index",
    "model partial indices",
    "solver-oracle agreement",
    "perturbed family",
    "dilation decay",
    "pushforward decay",
    "diagram commutativity",
    "jet determination",
    "one-sidedness",
];

/// Runs criterion `id` (1-based); errors inside count as failure.
pub fn run(id: u32, seed: u64) -> Outcome {
    let start = Instant::now();
    let result = match id {
        1 => closed_form_gluing(seed),
        2 => conormality(seed),
        3 => round_trips(seed),
        4 => maslov(seed),
        5 => partial_indices(),
        6 => solver_oracle(seed),
        7 => perturbed_family(),
        8 => dilation_decay(),
        9 => pushforward_decay(),
        10 => commutativity(seed),
        11 => jet_determination(seed),
        12 => one_sidedness(seed),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    let budget = match id {
        1 => Some(5.0),
        4 => Some(10.0),
        6 => Some(30.0),
        11 => Some(120.0),
        _ => None,
    };
    let (passed, detail) = match budget {
        Some(b) if seconds >= b => (false, format!("{detail}; over the {b} s budget")),
        _ => (passed, detail),
    };
    Outcome { id, title: TITLES.get(id as usize - 1).copied().unwrap_or("unknown"), passed, detail, seconds }
}

pub fn run_all(seed: u64) -> Vec<Outcome> {
    (1..=12).map(|id| run(id, seed)).collect()
}

type Check = Result<(bool, String)>;

fn closed(modes: usize, samples: usize) -> ClosedFormOptions {
    ClosedFormOptions { modes, samples }
}

/// 100 full-family discs with their forms, alternating n = 1, 2 and mixed signature.
fn random_full_discs(seed: u64) -> Result<Vec<(HermitianForm, LiftedDisc)>> {
    let mut fx = Fixtures::new(seed);
    (0..100)
        .map(|k| {
            let n = 1 + k % 2;
            let a = fx.hermitian_form(n, Signature::Mixed);
            let p = fx.full_params(&a, 0.9);
            let d = build_disc_full(&p, &a, closed(32, 512))?;
            Ok((a, d.with_samples(512)?))
        })
        .collect()
}

fn closed_form_gluing(seed: u64) -> Check {
    let mut worst = 0.0f64;
    for (a, d) in random_full_discs(seed)? {
        let r = DefiningPolynomial::quadric(&a);
        for f in d.f_samples() {
            worst = worst.max(r.eval(&ComplexPoint::new(f.clone())?).abs());
        }
    }
    Ok((worst <= 1e-10, format!("max |r(h)| = {worst:.2e} over 100 discs x 512 points")))
}

fn conormality(seed: u64) -> Check {
    let mut worst = 0.0f64;
    let mut smallest = f64::INFINITY;
    for (a, d) in random_full_discs(seed)? {
        let r = DefiningPolynomial::quadric(&a);
        for k in 0..d.samples() {
            let zeta = d.zeta(k);
            let grad = r.eval_defining(&ComplexPoint::new(d.f_samples()[k].clone())?, 1).gradient.expect("order 1").0;
            let dir: Vec<C64> = grad.iter().map(|c| c * zeta).collect();
            let g = &d.g_samples()[k];
            let lambda: C64 = dir.iter().zip(g).map(|(u, v)| u.conj() * v).sum::<C64>() / norm(&dir).powi(2);
            let real: Vec<C64> = dir.iter().map(|u| u * lambda.re).collect();
            worst = worst.max(dist(g, &real));
            smallest = smallest.min(lambda.re.abs());
        }
    }
    let ok = worst <= 1e-10 && smallest > 1e-6;
    Ok((ok, format!("max |g - c zeta dr| = {worst:.2e} with real c, min |c| = {smallest:.2e}")))
}

fn round_trips(seed: u64) -> Check {
    let mut fx = Fixtures::new(seed);
    let (mut center_err, mut jet_err) = (0.0f64, 0.0f64);
    let param_dist = |p: &StarDiscParams, q: &StarDiscParams| (p.a - q.a).norm().max(dist(&p.v, &q.v));
    for k in 0..100 {
        let a = fx.hermitian_form(1 + k % 2, Signature::Mixed);
        let p = fx.star_params(&a, 0.9);
        center_err = center_err.max(param_dist(&invert_center(&center_of_star(&p, &a), &a)?, &p));
        let d = build_disc_star(&p, &a, ClosedFormOptions::default())?;
        jet_err = jet_err.max(param_dist(&invert_boundary_jet(&d.boundary_jet(), &a)?, &p));
    }
    let ok = center_err <= 1e-10 && jet_err <= 1e-10;
    Ok((ok, format!("center round trip {center_err:.2e}, jet round trip {jet_err:.2e}")))
}

fn maslov(seed: u64) -> Check {
    let mut fx = Fixtures::new(seed);
    let mut bad = Vec::new();
    for (n, a) in [(1, HermitianForm::identity(1)), (2, HermitianForm::diagonal(&[1.0, -1.0])?)] {
        let eqs = FibrationEquations::new(&NormalFormSurface::quadric(a.clone()));
        for _ in 0..20 {
            let p = fx.star_params(&a, 0.5);
            let d = build_disc_star(&p, &a, ClosedFormOptions::default())?;
            let m1 = maslov_of_disc(&eqs, &d)?;
            let m2 = maslov_of_disc(&eqs, &d.with_samples(2 * d.samples())?)?;
            let want = 2 * n as i64 + 2;
            if m1 != want || m2 != want {
                bad.push(format!("n={n}: {m1}/{m2}"));
            }
        }
    }
    Ok((bad.is_empty(), if bad.is_empty() { "4 (n=1) and 6 (n=2) on 20 discs each, stable under doubling".into() } else { bad.join(", ") }))
}

fn partial_indices() -> Check {
    let mut ok = true;
    let mut sums = Vec::new();
    for n in 1..=5 {
        let k = model_partial_indices(n);
        let s: i64 = k.iter().sum();
        ok &= s == 2 * n as i64 + 2 && k.iter().all(|&x| x >= 0);
        sums.push(s.to_string());
    }
    Ok((ok, format!("sums {} for n = 1..5, all entries >= 0: {ok}", sums.join(","))))
}

fn solver_oracle(seed: u64) -> Check {
    let mut fx = Fixtures::new(seed);
    let opts = SolveOptions::default();
    let (mut worst, mut worst_c) = (0.0f64, 0.0f64);
    for k in 0..20 {
        let a = if k % 2 == 0 { HermitianForm::identity(1) } else { HermitianForm::diagonal(&[1.0, -1.0])? };
        let s = NormalFormSurface::quadric(a.clone());
        let (p, z) = fx.admissible_center(&a, 0.3);
        let exact = build_disc_star(&p, &a, ClosedFormOptions::default())?;
        let base = exact.with_modes(opts.modes)?;
        let d = a.n() + 1;
        let add = |rows: &[Vec<C64>], noise: Vec<Vec<C64>>| -> Vec<Vec<C64>> {
            rows.iter().zip(noise).map(|(r, e)| r.iter().zip(e).map(|(x, y)| x + y).collect()).collect()
        };
        let f = add(base.f_coeffs(), fx.coefficient_noise(opts.modes + 1, d, 1e-2));
        let g = add(base.g_coeffs(), fx.coefficient_noise(opts.modes + 2, d, 1e-2));
        let guess = LiftedDisc::new(f, g, base.samples())?;
        let (sol, rep) = solve_disc(&s, &DiscConstraint::center(z), &guess, &opts)?;
        worst = worst.max(sol.distance(&exact));
        worst_c = worst_c.max(rep.contraction_constant(3, 1e-13).unwrap_or(0.0));
    }
    let ok = worst <= 1e-8 && worst_c < 1e3;
    Ok((ok, format!("max C0 distance {worst:.2e}, max r_(k+1)/r_k^2 = {worst_c:.2e}")))
}

fn perturbed_surface(exp: Vec<u32>, coeff: f64) -> Result<NormalFormSurface> {
    let a = HermitianForm::identity(1);
    NormalFormSurface::from_defining(&DefiningPolynomial::quadric(&a).add(&DefiningPolynomial::from_terms(1, [(exp, coeff)])?))
}

fn center_grid() -> Vec<ComplexPoint> {
    let steps = [-0.1, -0.05, 0.0, 0.05, 0.1];
    steps
        .iter()
        .flat_map(|&d0| steps.iter().map(move |&d1| ComplexPoint::from_parts(C64::new(2.0 + d0, 0.0), &[C64::new(1.0 + d1, 0.0)])))
        .collect()
}

fn perturbed_family() -> Check {
    // coefficients of the quartic perturbation's discs decay slowly enough to need refinement
    let opts = SolveOptions { max_modes: Some(128), ..SolveOptions::default() };
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, s) in [("0.05 y0 x1", perturbed_surface(vec![0, 1, 1, 0], 0.05)?), ("0.1 y0 x1^2", perturbed_surface(vec![0, 1, 2, 0], 0.1)?)] {
        let origin = ComplexPoint::from_parts(C64::new(2.0, 0.0), &[C64::new(1.0, 0.0)]);
        let (base, _) = solve_from_quadric(&s, &DiscConstraint::center(origin), &opts)?;
        let (mut res, mut jet_gap, mut solved) = (0.0f64, 0.0f64, 0);
        for out in family_scan(&s, &base, &center_grid(), &opts) {
            let Ok((d, rep)) = out else { continue };
            solved += 1;
            res = res.max(rep.boundary_residual).max(rep.verification_residual);
            let cons = DiscConstraint::jet_of(&d);
            match solve_from_quadric(&s, &cons, &opts) {
                Ok((again, _)) => jet_gap = jet_gap.max(again.distance(&d)),
                Err(_) => jet_gap = f64::INFINITY,
            }
        }
        ok &= solved == 25 && res <= 1e-9 && jet_gap <= 1e-8;
        notes.push(format!("{name}: {solved}/25 solved, residual {res:.2e}, jet re-solve gap {jet_gap:.2e}"));
    }
    Ok((ok, notes.join("; ")))
}

fn dilation_decay() -> Check {
    let ts = [0.2, 0.1, 0.05];
    let spread = |s: &NormalFormSurface, power: i32| {
        let r: Vec<f64> = ts.iter().map(|&t| c4_distance(&s.dilate(t), 1.0, 9) / t.powi(power)).collect();
        let max = r.iter().cloned().fold(f64::MIN, f64::max);
        let min = r.iter().cloned().fold(f64::MAX, f64::min);
        max / min - 1.0
    };
    let cubic = spread(&perturbed_surface(vec![0, 1, 1, 0], 1.0)?, 1);
    let quartic = spread(&perturbed_surface(vec![0, 1, 2, 0], 1.0)?, 2);
    Ok((cubic <= 0.01 && quartic <= 0.01, format!("relative spread of ratio/t: {cubic:.2e}, of ratio/t^2: {quartic:.2e}")))
}

fn pushforward_decay() -> Check {
    let a = HermitianForm::identity(1);
    let disc = build_disc_star(&StarDiscParams { a: C64::new(0.0, 0.0), v: vec![C64::new(1.0, 0.0)] }, &a, ClosedFormOptions::default())?;
    let mut map = PolyMap::identity(1);
    map.add_term(0, vec![0, 3], C64::new(1.0, 0.0));
    let ts = [0.2, 0.1, 0.05];
    let out = pushforward_decay_probe(&map, &disc, &ts, DecayOptions::default())?;
    let norms: Vec<f64> = out.iter().map(|s| s.norm).collect();
    let slope = loglog_slope(&ts, &norms);
    Ok((slope >= 0.95, format!("log-log slope {slope:.4} (norms {})", norms.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", "))))
}

fn commutativity(seed: u64) -> Check {
    let mut fx = Fixtures::new(seed);
    let mut worst = [0.0f64; 3];
    let origin = |n: usize| vec![C64::new(0.0, 0.0); n + 1];
    for k in 0..20 {
        let (n, a) = if k % 2 == 0 { (1, HermitianForm::identity(1)) } else { (2, HermitianForm::diagonal(&[1.0, -1.0])?) };
        let p = fx.star_params(&a, 0.5);
        let d = build_disc_star(&p, &a, ClosedFormOptions::default())?;
        let bj = d.boundary_jet();

        // the Heisenberg translation moves 0, so compare the raw transport without renormalizing
        let heis = QuadricAutomorphism::Heisenberg { w: fx.complex_vec(n, 0.5), s: fx.uniform(-0.5, 0.5) }.map(&a)?;
        let (moved, _) = pushforward_disc(&heis, &d)?;
        worst[0] = worst[0].max(moved.boundary_jet().distance(&transport_jet1(&heis.jet2(&origin(n)), &bj)?));

        let dil = PolyMap::dilation(n, fx.uniform(0.5, 1.5));
        let (moved, _) = pushforward_disc(&dil, &d)?;
        worst[1] = worst[1].max(renormalize_lift(&moved)?.boundary_jet().distance(&pushforward_jet1(&dil.jet2(&origin(n)), &bj)?));

        let u = if n == 1 {
            DMatrix::from_element(1, 1, C64::from_polar(1.0, fx.uniform(0.0, std::f64::consts::TAU)))
        } else {
            let (s, t1, t2) = (fx.uniform(-0.5, 0.5), fx.uniform(0.0, std::f64::consts::TAU), fx.uniform(0.0, std::f64::consts::TAU));
            let boost = DMatrix::from_row_slice(2, 2, &[C64::new(s.cosh(), 0.0), C64::new(s.sinh(), 0.0), C64::new(s.sinh(), 0.0), C64::new(s.cosh(), 0.0)]);
            let phase = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::from_polar(1.0, t1), C64::from_polar(1.0, t2)]));
            boost * phase
        };
        let rot = QuadricAutomorphism::rotation(&u).map(&a)?;
        let (moved, _) = pushforward_disc(&rot, &d)?;
        worst[2] = worst[2].max(renormalize_lift(&moved)?.boundary_jet().distance(&pushforward_jet1(&rot.jet2(&origin(n)), &bj)?));
    }
    let ok = worst.iter().all(|&w| w <= 1e-9);
    Ok((ok, format!("max jet gap: heisenberg {:.2e}, dilation {:.2e}, rotation {:.2e}", worst[0], worst[1], worst[2])))
}

/// Centers of star discs with `|a| <= 0.3`, `v` near 1.
fn sample_centers(fx: &mut Fixtures, a: &HermitianForm, count: usize) -> Vec<ComplexPoint> {
    (0..count)
        .map(|_| {
            let p = StarDiscParams { a: fx.complex_in_disc(0.3), v: vec![C64::new(fx.uniform(0.7, 1.3), fx.uniform(-0.3, 0.3))] };
            center_of_star(&p, a)
        })
        .collect()
}

fn jet_determination(seed: u64) -> Check {
    let mut fx = Fixtures::new(seed);
    let opts = SolveOptions::default();
    let a = HermitianForm::identity(1);
    let q = NormalFormSurface::quadric(a.clone());
    let pts = sample_centers(&mut fx, &a, 20);
    let origin = [C64::new(0.0, 0.0); 2];

    let lam = PolyMap::dilation(1, 0.8);
    let mut gap_a = 0.0f64;
    for (z, w) in pts.iter().zip(reconstruct_map(&lam.jet2(&origin), &q, &q, &pts, &opts)) {
        gap_a = gap_a.max(w?.distance(&lam.eval_point(z)));
    }

    let s = perturbed_surface(vec![0, 1, 1, 0], 0.05)?;
    let mut gap_b = 0.0f64;
    for (z, w) in pts.iter().zip(reconstruct_map(&PolyMap::identity(1).jet2(&origin), &s, &s, &pts, &opts)) {
        gap_b = gap_b.max(w?.distance(z));
    }

    let rot = QuadricAutomorphism::rotation(&DMatrix::from_element(1, 1, C64::new(-1.0, 0.0))).map(&a)?;
    let gap_c = determination_gap(&lam, &rot, &q, None, &pts, &opts)?;
    let ok = gap_a <= 1e-6 && gap_b <= 1e-6 && gap_c.reconstruction_gap > 1e-2 && !gap_c.same_jet;
    Ok((
        ok,
        format!(
            "(a) dilation {gap_a:.2e}, (b) identity on perturbed {gap_b:.2e}, (c) distinct-jet gap {:.3}",
            gap_c.reconstruction_gap
        ),
    ))
}

/// Literal reading: `r o h < 0` at interior points for positive definite `A`.
fn one_sidedness(seed: u64) -> Check {
    let mut fx = Fixtures::new(seed);
    let (mut min_r, mut max_r) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..20 {
        let a = fx.hermitian_form(1 + k % 2, Signature::Positive);
        let p = fx.star_params(&a, 0.7);
        let d = build_disc_star(&p, &a, ClosedFormOptions::default())?;
        let r = DefiningPolynomial::quadric(&a);
        for _ in 0..50 {
            let zeta = fx.complex_in_disc(0.95);
            let v = r.eval(&ComplexPoint::new(d.eval_f(zeta))?);
            min_r = min_r.min(v);
            max_r = max_r.max(v);
        }
    }
    Ok((max_r < 0.0, format!("r(h(zeta)) over 20 discs x 50 interior points lies in [{min_r:.3e}, {max_r:.3e}]")))
}
