//! Damped Gauss-Newton solver for lifted discs attached to the conormal fibration of a
//! perturbed hyperquadric, with continuation from the closed-form quadric discs.

use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::conormal::{holomorphic_partials, residual_from, FibrationEquations};
use crate::disc::fourier::{grid_point, synthesize};
use crate::disc::types::{complex_pair, complex_vec, C64};
use crate::disc::{ComplexPoint, LiftedDisc, NormalFormSurface, DEFAULT_MODES, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::quadric::{build_disc_star, invert_center, invert_jet, ClosedFormOptions};

/// What fixes a disc inside the star-normalized family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pinning {
    /// `f(0) = z`.
    Center { z: ComplexPoint },
    /// `f'_alpha(1) = w_alpha` and `f'_0(1) g'_0(1) = s0`.
    Jet {
        #[serde(with = "complex_vec")]
        w_alpha: Vec<C64>,
        #[serde(with = "complex_pair")]
        s0: C64,
    },
}

/// Star normalization `f(1) = 0`, `g(1) = (1, 0, ..., 0)` plus one pinning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscConstraint {
    pub pinning: Pinning,
}

impl DiscConstraint {
    pub fn center(z: ComplexPoint) -> Self {
        Self { pinning: Pinning::Center { z } }
    }

    pub fn jet(w_alpha: Vec<C64>, s0: C64) -> Self {
        Self { pinning: Pinning::Jet { w_alpha, s0 } }
    }

    /// Jet pinning matching the boundary data of `d`.
    pub fn jet_of(d: &LiftedDisc) -> Self {
        let bj = d.boundary_jet();
        Self::jet(bj.df1[1..].to_vec(), bj.df1[0] * bj.dg1[0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub modes: usize,
    /// Collocation points; `None` means `4 * modes`.
    pub collocation: Option<usize>,
    pub tol: f64,
    pub tail_tol: f64,
    pub max_iter: usize,
    pub lambda0: f64,
    /// Boundary samples cached on the returned disc.
    pub output_samples: usize,
    /// If set, an under-resolved solve is retried with twice the modes up to this many.
    pub max_modes: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            modes: DEFAULT_MODES,
            collocation: None,
            tol: 1e-10,
            tail_tol: 1e-8,
            max_iter: 50,
            lambda0: 1e-3,
            output_samples: DEFAULT_SAMPLES,
            max_modes: None,
        }
    }
}

impl SolveOptions {
    fn collocation_points(&self) -> usize {
        self.collocation.unwrap_or(4 * self.modes).max(8)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    /// Sup of the fibration equations over the collocation points.
    pub boundary_residual: f64,
    /// Sup of the normalization and pinning equations.
    pub constraint_residual: f64,
    /// Norm of the top tenth of the Fourier modes.
    pub tail: f64,
    /// Sup of the fibration equations on a grid four times finer.
    pub verification_residual: f64,
    /// C^0 distance of the solution from the initial guess.
    pub distance_from_guess: f64,
    /// Max of boundary and constraint residual before each step.
    pub history: Vec<f64>,
}

impl SolveReport {
    /// Largest `r_{k+1} / r_k^2` over the last steps, ignoring steps that land on round-off.
    pub fn contraction_constant(&self, last: usize, floor: f64) -> Option<f64> {
        let h = &self.history;
        if h.len() < 2 {
            return None;
        }
        let start = h.len().saturating_sub(last + 1);
        h[start..]
            .windows(2)
            .filter(|w| w[1] > floor)
            .map(|w| w[1] / (w[0] * w[0]))
            .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.max(c))))
    }
}

/// Unknown layout: `Re/Im c_{j,l}` for `j = 0..=N`, then `Re/Im e_{k,l}` for `k = 0..=N+1`.
struct Layout {
    d: usize,
    modes: usize,
}

impl Layout {
    fn f_col(&self, j: usize, l: usize) -> usize {
        2 * (j * self.d + l)
    }

    fn g_col(&self, k: usize, l: usize) -> usize {
        2 * (self.d * (self.modes + 1) + k * self.d + l)
    }

    fn len(&self) -> usize {
        2 * self.d * (2 * self.modes + 3)
    }

    fn pack(&self, disc: &LiftedDisc) -> DVector<f64> {
        let mut x = DVector::zeros(self.len());
        for (j, row) in disc.f_coeffs().iter().enumerate() {
            for (l, c) in row.iter().enumerate() {
                x[self.f_col(j, l)] = c.re;
                x[self.f_col(j, l) + 1] = c.im;
            }
        }
        for (k, row) in disc.g_coeffs().iter().enumerate() {
            for (l, c) in row.iter().enumerate() {
                x[self.g_col(k, l)] = c.re;
                x[self.g_col(k, l) + 1] = c.im;
            }
        }
        x
    }

    fn unpack(&self, x: &DVector<f64>) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
        let f = (0..=self.modes)
            .map(|j| (0..self.d).map(|l| C64::new(x[self.f_col(j, l)], x[self.f_col(j, l) + 1])).collect())
            .collect();
        let g = (0..=self.modes + 1)
            .map(|k| (0..self.d).map(|l| C64::new(x[self.g_col(k, l)], x[self.g_col(k, l) + 1])).collect())
            .collect();
        (f, g)
    }
}

/// Adds `kappa du` for a complex unknown `u` to the real rows of a complex equation.
fn add_complex(jac: &mut DMatrix<f64>, row: usize, col: usize, kappa: C64) {
    jac[(row, col)] += kappa.re;
    jac[(row, col + 1)] -= kappa.im;
    jac[(row + 1, col)] += kappa.im;
    jac[(row + 1, col + 1)] += kappa.re;
}

struct System<'a> {
    eqs: &'a FibrationEquations,
    constraint: &'a DiscConstraint,
    layout: Layout,
    m: usize,
    powers: Vec<Vec<C64>>,
    weight: f64,
}

struct Evaluation {
    residual: DVector<f64>,
    boundary: f64,
    constraint: f64,
}

impl<'a> System<'a> {
    fn new(eqs: &'a FibrationEquations, constraint: &'a DiscConstraint, opts: &SolveOptions) -> Self {
        let m = opts.collocation_points();
        let modes = opts.modes;
        let powers = (0..m)
            .map(|k| {
                let z = grid_point(k, m);
                let mut p = Vec::with_capacity(modes + 2);
                let mut acc = C64::new(1.0, 0.0);
                for _ in 0..modes + 2 {
                    p.push(acc);
                    acc *= z;
                }
                p
            })
            .collect();
        Self { eqs, constraint, layout: Layout { d: eqs.n() + 1, modes }, m, powers, weight: (m as f64).sqrt() }
    }

    fn constraint_rows(&self) -> usize {
        let d = self.layout.d;
        // f(1), g(1) and the pinning, two real rows per complex equation
        2 * d + 2 * d + 2 * d
    }

    fn rows(&self) -> usize {
        self.m * 2 * self.layout.d + self.constraint_rows()
    }

    fn boundary(&self, x: &DVector<f64>) -> (Vec<Vec<C64>>, Vec<Vec<C64>>, Vec<Vec<C64>>, Vec<Vec<C64>>) {
        let (f, g) = self.layout.unpack(x);
        let d = self.layout.d;
        let fs = synthesize(&f, 0, self.m, d);
        let gs = synthesize(&g, 0, self.m, d);
        (f, g, fs, gs)
    }

    fn constraint_values(&self, f: &[Vec<C64>], g: &[Vec<C64>]) -> Vec<C64> {
        let d = self.layout.d;
        let mut out = Vec::with_capacity(3 * d);
        for l in 0..d {
            out.push(f.iter().map(|r| r[l]).sum());
        }
        for l in 0..d {
            let s: C64 = g.iter().map(|r| r[l]).sum();
            out.push(if l == 0 { s - 1.0 } else { s });
        }
        match &self.constraint.pinning {
            Pinning::Center { z } => {
                for l in 0..d {
                    out.push(f[0][l] - z.coords()[l]);
                }
            }
            Pinning::Jet { w_alpha, s0 } => {
                let df: Vec<C64> = (0..d).map(|l| f.iter().enumerate().map(|(j, r)| r[l] * j as f64).sum()).collect();
                let dg0: C64 = g.iter().enumerate().map(|(k, r)| r[0] * k as f64).sum();
                out.push(df[0] * dg0 - s0);
                for l in 1..d {
                    out.push(df[l] - w_alpha[l - 1]);
                }
            }
        }
        out
    }

    fn evaluate(&self, x: &DVector<f64>) -> Evaluation {
        let (f, g, fs, gs) = self.boundary(x);
        let d = self.layout.d;
        let mut residual = DVector::zeros(self.rows());
        let mut boundary = 0.0f64;
        for k in 0..self.m {
            let der = self.eqs.calculus().eval(&fs[k]);
            let e = residual_from(&der, grid_point(k, self.m), &gs[k]);
            for (i, v) in e.iter().enumerate() {
                residual[k * 2 * d + i] = *v;
                boundary = boundary.max(v.abs());
            }
        }
        let base = self.m * 2 * d;
        let mut constraint = 0.0f64;
        for (q, c) in self.constraint_values(&f, &g).iter().enumerate() {
            residual[base + 2 * q] = self.weight * c.re;
            residual[base + 2 * q + 1] = self.weight * c.im;
            constraint = constraint.max(c.norm());
        }
        Evaluation { residual, boundary, constraint }
    }

    /// The Jacobian and, per collocation point, the holomorphic partials it was built from.
    fn jacobian(&self, x: &DVector<f64>) -> (DMatrix<f64>, Vec<DMatrix<C64>>) {
        let (f, g, fs, gs) = self.boundary(x);
        let d = self.layout.d;
        let modes = self.layout.modes;
        let mut jac = DMatrix::zeros(self.rows(), self.layout.len());
        let mut partials = Vec::with_capacity(self.m);
        for k in 0..self.m {
            let zeta = grid_point(k, self.m);
            let h = holomorphic_partials(&self.eqs.calculus().eval(&fs[k]), zeta, &gs[k]);
            let pw = &self.powers[k];
            for i in 0..2 * d {
                let row = k * 2 * d + i;
                for l in 0..d {
                    let hz = h[(i, l)] * 2.0;
                    let hw = h[(i, d + l)] * 2.0;
                    for j in 0..=modes {
                        let v = hz * pw[j];
                        let col = self.layout.f_col(j, l);
                        jac[(row, col)] = v.re;
                        jac[(row, col + 1)] = -v.im;
                    }
                    for j in 0..=modes + 1 {
                        let v = hw * pw[j];
                        let col = self.layout.g_col(j, l);
                        jac[(row, col)] = v.re;
                        jac[(row, col + 1)] = -v.im;
                    }
                }
            }
            partials.push(h);
        }
        let base = self.m * 2 * d;
        let wgt = C64::new(self.weight, 0.0);
        for l in 0..d {
            for j in 0..=modes {
                add_complex(&mut jac, base + 2 * l, self.layout.f_col(j, l), wgt);
            }
            for k in 0..=modes + 1 {
                add_complex(&mut jac, base + 2 * (d + l), self.layout.g_col(k, l), wgt);
            }
        }
        let pin = base + 4 * d;
        match &self.constraint.pinning {
            Pinning::Center { .. } => {
                for l in 0..d {
                    add_complex(&mut jac, pin + 2 * l, self.layout.f_col(0, l), wgt);
                }
            }
            Pinning::Jet { .. } => {
                let df0: C64 = f.iter().enumerate().map(|(j, r)| r[0] * j as f64).sum();
                let dg0: C64 = g.iter().enumerate().map(|(k, r)| r[0] * k as f64).sum();
                for j in 1..=modes {
                    add_complex(&mut jac, pin, self.layout.f_col(j, 0), wgt * dg0 * j as f64);
                }
                for k in 1..=modes + 1 {
                    add_complex(&mut jac, pin, self.layout.g_col(k, 0), wgt * df0 * k as f64);
                }
                for l in 1..d {
                    for j in 1..=modes {
                        add_complex(&mut jac, pin + 2 * l, self.layout.f_col(j, l), wgt * j as f64);
                    }
                }
            }
        }
        (jac, partials)
    }

    /// `J^T J` without the dense product.
    ///
    /// Every collocation column is `Re(c_m zeta_m^j)` with `c = 2H` or `2iH`, so a product of two
    /// columns sums to `Re(c c' zeta^(j+k)) / 2 + Re(c conj(c') zeta^(j-k)) / 2`; both sums over the
    /// grid are one inverse FFT per pair of blocks. The few constraint rows are added densely.
    fn normal_matrix(&self, jac: &DMatrix<f64>, partials: &[DMatrix<C64>]) -> DMatrix<f64> {
        let d = self.layout.d;
        let blocks = 2 * d;
        let m = self.m;
        let fft = FftPlanner::<f64>::new().plan_fft_inverse(m);
        let zero = C64::new(0.0, 0.0);
        let mut sums = vec![(Vec::new(), Vec::new()); blocks * blocks];
        for b in 0..blocks {
            for c in 0..blocks {
                let mut same = vec![zero; m];
                let mut mixed = vec![zero; m];
                for (k, h) in partials.iter().enumerate() {
                    for i in 0..blocks {
                        let (x, y) = (h[(i, b)] * 2.0, h[(i, c)] * 2.0);
                        same[k] += x * y;
                        mixed[k] += x * y.conj();
                    }
                }
                fft.process(&mut same);
                fft.process(&mut mixed);
                sums[b * blocks + c] = (same, mixed);
            }
        }
        let rot = |z: C64, k: usize| match k % 4 {
            0 => z,
            1 => C64::new(-z.im, z.re),
            2 => -z,
            _ => C64::new(z.im, -z.re),
        };
        let modes = self.layout.modes;
        let columns = |b: usize| -> Vec<(usize, usize)> {
            if b < d {
                (0..=modes).map(|j| (j, self.layout.f_col(j, b))).collect()
            } else {
                (0..=modes + 1).map(|j| (j, self.layout.g_col(j, b - d))).collect()
            }
        };
        let mut out = DMatrix::zeros(self.layout.len(), self.layout.len());
        for b in 0..blocks {
            let cb = columns(b);
            for c in 0..blocks {
                let cc = columns(c);
                let (same, mixed) = &sums[b * blocks + c];
                for &(j, col) in &cb {
                    for &(k, row) in &cc {
                        let s = same[(j + k) % m];
                        let t = mixed[(j + m - k % m) % m];
                        for p in 0..2 {
                            for q in 0..2 {
                                // i^p from the first column, conj(i^q) = i^(3q) from the second
                                let v = 0.5 * (rot(s, p + q).re + rot(t, p + 3 * q).re);
                                out[(col + p, row + q)] = v;
                            }
                        }
                    }
                }
            }
        }
        let base = m * blocks;
        let cons = jac.rows(base, jac.nrows() - base);
        out += cons.transpose() * cons;
        out
    }
}

/// Sup of the fibration equations along the boundary of `d` on an `m`-point grid.
pub fn boundary_residual(eqs: &FibrationEquations, d: &LiftedDisc, m: usize) -> Result<f64> {
    let fine = if d.samples() == m { d.clone() } else { d.with_samples(m)? };
    Ok((0..m)
        .map(|k| eqs.residual(fine.zeta(k), &fine.f_samples()[k], &fine.g_samples()[k]).iter().fold(0.0f64, |a, r| a.max(r.abs())))
        .fold(0.0, f64::max))
}

/// Three steps that together gained less than 10% near a solution.
fn stalled(history: &[f64]) -> bool {
    let k = history.len();
    k >= 4 && history[k - 1] < STALL_RESIDUAL && history[k - 1] > 0.9 * history[k - 4]
}

/// A stalled solve counts as under-resolved rather than divergent once it is this close.
const STALL_RESIDUAL: f64 = 1e-6;

/// Solves for the disc attached to `surface` satisfying `constraint`, starting at `guess`.
///
/// With `opts.max_modes` set, under-resolved attempts are repeated with doubled modes.
pub fn solve_disc(surface: &NormalFormSurface, constraint: &DiscConstraint, guess: &LiftedDisc, opts: &SolveOptions) -> Result<(LiftedDisc, SolveReport)> {
    let mut current = *opts;
    if let Some(max) = opts.max_modes {
        // keep the resolution an earlier refined solve already needed
        current.modes = opts.modes.max(guess.modes().min(max));
    }
    loop {
        match solve_fixed(surface, constraint, guess, &current) {
            Err(Error::UnderResolved(msg)) => match opts.max_modes {
                Some(max) if 2 * current.modes <= max => {
                    log::debug!("{msg}; retrying with {} modes", 2 * current.modes);
                    current.modes *= 2;
                    current.collocation = current.collocation.map(|m| 2 * m);
                }
                _ => return Err(Error::UnderResolved(msg)),
            },
            other => return other,
        }
    }
}

fn solve_fixed(surface: &NormalFormSurface, constraint: &DiscConstraint, guess: &LiftedDisc, opts: &SolveOptions) -> Result<(LiftedDisc, SolveReport)> {
    let n = surface.n();
    if guess.n() != n {
        return Err(Error::Dimension { expected: n, got: guess.n() });
    }
    match &constraint.pinning {
        Pinning::Center { z } if z.n() != n => return Err(Error::Dimension { expected: n, got: z.n() }),
        Pinning::Jet { w_alpha, .. } if w_alpha.len() != n => return Err(Error::Dimension { expected: n, got: w_alpha.len() }),
        _ => {}
    }
    let eqs = FibrationEquations::new(surface);
    let sys = System::new(&eqs, constraint, opts);
    let guess = guess.with_modes(opts.modes)?;
    let mut x = sys.layout.pack(&guess);
    let mut ev = sys.evaluate(&x);
    let mut history = Vec::new();
    let mut lambda = opts.lambda0;
    let mut iterations = 0;
    let mut converged = false;
    loop {
        history.push(ev.boundary.max(ev.constraint));
        if ev.boundary <= opts.tol && ev.constraint <= opts.tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter || stalled(&history) {
            break;
        }
        iterations += 1;
        let (jac, partials) = sys.jacobian(&x);
        let jtj = sys.normal_matrix(&jac, &partials);
        let grad = jac.tr_mul(&ev.residual);
        let rnorm = ev.residual.norm();
        let mut accepted = false;
        for _ in 0..30 {
            let mu = (lambda * rnorm).max(1e-300);
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += mu;
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let trial = &x - chol.solve(&grad);
            let trial_ev = sys.evaluate(&trial);
            if trial_ev.residual.norm() < rnorm {
                x = trial;
                ev = trial_ev;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    let (f, g) = sys.layout.unpack(&x);
    let samples = opts.output_samples.max((4 * (opts.modes + 2)).next_power_of_two());
    let disc = LiftedDisc::new(f, g, samples)?;
    let tail = disc.tail_estimate();
    if !converged {
        let last = history.last().copied().unwrap_or(f64::INFINITY);
        // stalling near a solution with a heavy tail is the truncation floor, not divergence
        if last < STALL_RESIDUAL && tail > opts.tol {
            return Err(Error::UnderResolved(format!("residual stalled at {last:.3e} with Fourier tail {tail:.3e} at {} modes", opts.modes)));
        }
        return Err(Error::Divergence { history });
    }
    if tail > opts.tail_tol {
        return Err(Error::UnderResolved(format!("Fourier tail {tail:.3e} exceeds {:.1e}; raise the number of modes", opts.tail_tol)));
    }
    let report = SolveReport {
        converged,
        iterations,
        boundary_residual: ev.boundary,
        constraint_residual: ev.constraint,
        tail,
        verification_residual: boundary_residual(&eqs, &disc, 4 * sys.m)?,
        distance_from_guess: disc.distance(&guess),
        history,
    };
    Ok((disc, report))
}

/// Closed-form star disc of the quadric `Q^A` underlying `surface` satisfying `constraint`.
pub fn quadric_seed(surface: &NormalFormSurface, constraint: &DiscConstraint, opts: &SolveOptions) -> Result<LiftedDisc> {
    let a = surface.form();
    let params = match &constraint.pinning {
        Pinning::Center { z } => invert_center(z, a)?,
        Pinning::Jet { w_alpha, s0 } => invert_jet(w_alpha, *s0, a)?,
    };
    build_disc_star(&params, a, ClosedFormOptions { modes: opts.modes, samples: opts.output_samples })
}

/// Solves from the quadric seed, falling back to continuation if the direct solve fails.
pub fn solve_from_quadric(surface: &NormalFormSurface, constraint: &DiscConstraint, opts: &SolveOptions) -> Result<(LiftedDisc, SolveReport)> {
    let seed = quadric_seed(surface, constraint, opts)?;
    if surface.is_quadric() {
        return solve_disc(surface, constraint, &seed, opts);
    }
    match solve_disc(surface, constraint, &seed, opts) {
        Err(Error::Divergence { .. }) | Err(Error::UnderResolved(_)) => {
            let path = |s: f64| surface.interpolate_from_quadric(s);
            let (disc, mut reports) = continuation_solve(&path, constraint, 10, opts)?;
            Ok((disc, reports.pop().map(|(_, r)| r).expect("continuation reaches tau = 1")))
        }
        other => other,
    }
}

pub const MAX_REFINEMENTS: usize = 10;
pub const MIN_STEP: f64 = 1e-4;

/// Follows `tau -> surface_path(tau)` from the quadric at `tau = 0` to `tau = 1`.
pub fn continuation_solve(
    surface_path: &dyn Fn(f64) -> NormalFormSurface,
    constraint: &DiscConstraint,
    steps: usize,
    opts: &SolveOptions,
) -> Result<(LiftedDisc, Vec<(f64, SolveReport)>)> {
    let start = surface_path(0.0);
    if !start.is_quadric() {
        return Err(Error::InvalidParameters("continuation path must start at the quadric".into()));
    }
    let seed = quadric_seed(&start, constraint, opts)?;
    let (mut disc, report) = solve_disc(&start, constraint, &seed, opts)?;
    let mut reports = vec![(0.0, report)];
    let mut tau = 0.0;
    let mut step = 1.0 / steps.max(1) as f64;
    let mut refinements = 0;
    while tau < 1.0 {
        let next = (tau + step).min(1.0);
        match solve_disc(&surface_path(next), constraint, &disc, opts) {
            Ok((d, rep)) => {
                disc = d;
                tau = next;
                reports.push((tau, rep));
                refinements = 0;
            }
            Err(Error::Divergence { .. }) | Err(Error::UnderResolved(_)) => {
                step /= 2.0;
                refinements += 1;
                log::debug!("continuation step refined to {step:.3e} at tau = {tau}");
                if refinements > MAX_REFINEMENTS || step < MIN_STEP {
                    return Err(Error::ContinuationFailure { last_tau: tau });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok((disc, reports))
}

/// Center-pinned solves over a grid of centers, each seeded by its nearest solved neighbor.
///
/// Points are processed in order of distance from the base disc's center; errors are per point.
pub fn family_scan(
    surface: &NormalFormSurface,
    base: &LiftedDisc,
    centers: &[ComplexPoint],
    opts: &SolveOptions,
) -> Vec<Result<(LiftedDisc, SolveReport)>> {
    let origin = base.center();
    let mut order: Vec<usize> = (0..centers.len()).collect();
    order.sort_by(|&a, &b| centers[a].distance(&origin).total_cmp(&centers[b].distance(&origin)));
    let mut solved: Vec<(ComplexPoint, LiftedDisc)> = vec![(origin, base.clone())];
    let mut out: Vec<Option<Result<(LiftedDisc, SolveReport)>>> = vec![None; centers.len()];
    for idx in order {
        let z = &centers[idx];
        let q = surface.form().quad(z.alpha());
        let scale = z.alpha().iter().map(|c| c.norm_sqr()).sum::<f64>();
        let result = if q.abs() <= 1e-12 * scale.max(1e-300) {
            Err(Error::IsotropicDirection(q))
        } else {
            let (_, seed) = solved
                .iter()
                .min_by(|a, b| a.0.distance(z).total_cmp(&b.0.distance(z)))
                .expect("base disc is always present");
            solve_disc(surface, &DiscConstraint::center(z.clone()), seed, opts)
        };
        if let Ok((d, _)) = &result {
            solved.push((z.clone(), d.clone()));
        }
        out[idx] = Some(result);
    }
    out.into_iter().map(|r| r.expect("every index visited")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::types::HermitianForm;
    use crate::disc::DefiningPolynomial;
    use crate::quadric::{center_of_star, StarDiscParams};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn perturbed(coeff: f64) -> NormalFormSurface {
        let a = HermitianForm::identity(1);
        let rho = DefiningPolynomial::quadric(&a).add(&DefiningPolynomial::from_terms(1, [(vec![0, 1, 1, 0], coeff)]).unwrap());
        NormalFormSurface::from_defining(&rho).unwrap()
    }

    fn noisy(d: &LiftedDisc, size: f64) -> LiftedDisc {
        let f = d.f_coeffs().iter().enumerate().map(|(j, r)| r.iter().enumerate().map(|(l, x)| x + c(size * ((j + l) as f64).sin(), size * ((3 * j + l) as f64).cos()) / (1.0 + j as f64)).collect()).collect();
        let g = d.g_coeffs().iter().enumerate().map(|(j, r)| r.iter().enumerate().map(|(l, x)| x + c(size * ((2 * j + l) as f64).cos(), -size * ((j + 5 * l) as f64).sin()) / (1.0 + j as f64)).collect()).collect();
        LiftedDisc::new(f, g, d.samples()).unwrap()
    }

    #[test]
    fn recovers_closed_form_on_quadric() {
        let a = HermitianForm::identity(1);
        let s = NormalFormSurface::quadric(a.clone());
        let p = StarDiscParams { a: c(0.0, 0.0), v: vec![c(1.0, 0.0)] };
        let exact = build_disc_star(&p, &a, ClosedFormOptions::default()).unwrap();
        let guess = noisy(&exact, 1e-2);
        let cons = DiscConstraint::center(center_of_star(&p, &a));
        let (d, rep) = solve_disc(&s, &cons, &guess, &SolveOptions::default()).unwrap();
        assert!(rep.converged);
        assert!(d.distance(&exact) < 1e-8, "distance {}", d.distance(&exact));
        let cmax = rep.contraction_constant(3, 1e-13).unwrap();
        assert!(cmax < 1e3, "history {:?}", rep.history);
    }

    #[test]
    fn perturbed_center_and_jet_agree() {
        let s = perturbed(0.05);
        let z = ComplexPoint::from_parts(c(2.0, 0.0), &[c(1.0, 0.0)]);
        let (d, rep) = solve_from_quadric(&s, &DiscConstraint::center(z), &SolveOptions::default()).unwrap();
        assert!(rep.boundary_residual <= 1e-9 && rep.verification_residual <= 1e-9, "{rep:?}");
        let (d2, _) = solve_from_quadric(&s, &DiscConstraint::jet_of(&d), &SolveOptions::default()).unwrap();
        assert!(d.distance(&d2) < 1e-8);
    }

    #[test]
    fn continuation_on_constant_path_is_closed_form() {
        let a = HermitianForm::identity(1);
        let q = NormalFormSurface::quadric(a.clone());
        let z = ComplexPoint::from_parts(c(2.0, 0.0), &[c(1.0, 0.0)]);
        let path = |_: f64| q.clone();
        let (d, reps) = continuation_solve(&path, &DiscConstraint::center(z.clone()), 4, &SolveOptions::default()).unwrap();
        assert_eq!(reps.len(), 5);
        let exact = build_disc_star(&invert_center(&z, &a).unwrap(), &a, ClosedFormOptions::default()).unwrap();
        assert!(d.distance(&exact) < 1e-10);
    }

    #[test]
    fn isotropic_grid_point_fails_alone() {
        let a = HermitianForm::diagonal(&[1.0, -1.0]).unwrap();
        let s = NormalFormSurface::quadric(a.clone());
        let p = StarDiscParams { a: c(0.0, 0.0), v: vec![c(1.0, 0.0), c(0.2, 0.0)] };
        let base = build_disc_star(&p, &a, ClosedFormOptions::default()).unwrap();
        let centers = vec![center_of_star(&p, &a), ComplexPoint::from_parts(c(2.0, 0.0), &[c(1.0, 0.0), c(1.0, 0.0)])];
        let out = family_scan(&s, &base, &centers, &SolveOptions::default());
        assert!(out[0].is_ok());
        assert!(matches!(out[1], Err(Error::IsotropicDirection(_))));
    }

    fn with_term(exps: Vec<u32>, coeff: f64) -> NormalFormSurface {
        let a = HermitianForm::identity(1);
        let rho = DefiningPolynomial::quadric(&a).add(&DefiningPolynomial::from_terms(1, [(exps, coeff)]).unwrap());
        NormalFormSurface::from_defining(&rho).unwrap()
    }

    #[test]
    fn continuation_reaches_quartic_perturbation() {
        let s = with_term(vec![0, 1, 2, 0], 0.1);
        let z = ComplexPoint::from_parts(c(2.0, 0.0), &[c(1.0, 0.0)]);
        let path = |t: f64| s.interpolate_from_quadric(t);
        let (_, reps) = continuation_solve(&path, &DiscConstraint::center(z), 10, &SolveOptions::default()).unwrap();
        let (tau, last) = reps.last().unwrap();
        assert_eq!(*tau, 1.0);
        assert!(last.verification_residual <= 1e-9);
    }

    #[test]
    fn continuation_fails_for_large_perturbation() {
        let s = with_term(vec![0, 1, 1, 0], 5.0);
        let z = ComplexPoint::from_parts(c(2.0, 0.0), &[c(1.0, 0.0)]);
        let path = |t: f64| s.interpolate_from_quadric(t);
        match continuation_solve(&path, &DiscConstraint::center(z), 10, &SolveOptions::default()) {
            Err(Error::ContinuationFailure { last_tau }) => assert!(last_tau < 1.0),
            other => panic!("expected continuation failure, got {:?}", other.map(|(_, r)| r.last().map(|x| x.0))),
        }
    }

    #[test]
    fn structured_normal_matrix_matches_dense() {
        let s = with_term(vec![0, 1, 2, 0], 0.3);
        let a = HermitianForm::identity(1);
        let p = StarDiscParams { a: c(0.2, -0.1), v: vec![c(0.9, 0.2)] };
        let opts = SolveOptions { modes: 12, ..SolveOptions::default() };
        let d = noisy(&build_disc_star(&p, &a, ClosedFormOptions { modes: 12, samples: 64 }).unwrap(), 1e-2).with_modes(12).unwrap();
        let eqs = FibrationEquations::new(&s);
        for cons in [DiscConstraint::center(center_of_star(&p, &a)), DiscConstraint::jet(vec![c(0.3, 0.1)], c(-1.0, 0.5))] {
            let sys = System::new(&eqs, &cons, &opts);
            let x = sys.layout.pack(&d);
            let (jac, partials) = sys.jacobian(&x);
            let dense = jac.tr_mul(&jac);
            let fast = sys.normal_matrix(&jac, &partials);
            let scale = dense.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!((dense - fast).iter().all(|v| v.abs() < 1e-12 * scale));
        }
    }
}
