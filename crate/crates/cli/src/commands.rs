use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use stadisc::acceptance;
use stadisc::conormal::{assemble_g, matrix_b, maslov_index, FibrationEquations};
use stadisc::fixtures::Fixtures;
use stadisc::jetdet::reconstruct_polymap;
use stadisc::quadric::{build_disc_full, build_disc_star, center_of_star, ClosedFormOptions, FullDiscParams, StarDiscParams};
use stadisc::scaling::{loglog_slope, pushforward_decay_probe, to_normal_form, DecayOptions};
use stadisc::solver::{boundary_residual, family_scan, solve_disc, solve_from_quadric, DiscConstraint, SolveOptions};
use stadisc::{
    ComplexPoint, DefiningPolynomial, DiscJson, LiftedDisc, NormalFormSurface, PolyMap, PolyMapJson, C64, DEFAULT_MODES,
    DEFAULT_SAMPLES,
};

use crate::manifest::{CliError, Run};
use crate::parse;

type Outcome = Result<Value, CliError>;

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Closed-form discs, numerical solves and family scans
    #[command(subcommand)]
    Disc(DiscCommand),
    /// Maslov index and conditioning of the fibration along a disc
    Indices(IndicesArgs),
    /// Normal form of a polynomial hypersurface at one of its points
    Normalform(NormalFormArgs),
    /// Anisotropic dilation of a surface in normal form
    Dilate(DilateArgs),
    /// Holder norm of the dilated pushforward of a disc
    Decay(DecayArgs),
    /// Reconstruct a map from its 2-jet through stationary discs
    Jetdet(JetdetArgs),
    /// Run the acceptance suite
    Selftest(SelftestArgs),
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscCommand {
    /// Stationary disc of a hyperquadric from its parameters
    Quadric(QuadricArgs),
    /// Disc attached to a perturbed surface, pinned by its center or boundary jet
    Solve(SolveArgs),
    /// Discs through random centers around a base disc
    Scan(ScanArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Disc(DiscCommand::Quadric(_)) => "disc-quadric",
            Command::Disc(DiscCommand::Solve(_)) => "disc-solve",
            Command::Disc(DiscCommand::Scan(_)) => "disc-scan",
            Command::Indices(_) => "indices",
            Command::Normalform(_) => "normalform",
            Command::Dilate(_) => "dilate",
            Command::Decay(_) => "decay",
            Command::Jetdet(_) => "jetdet",
            Command::Selftest(_) => "selftest",
        }
    }

    pub fn run(&self, run: &mut Run, seed: u64) -> Outcome {
        match self {
            Command::Disc(DiscCommand::Quadric(a)) => disc_quadric(a, run),
            Command::Disc(DiscCommand::Solve(a)) => disc_solve(a, run),
            Command::Disc(DiscCommand::Scan(a)) => disc_scan(a, run, seed),
            Command::Indices(a) => indices(a, run),
            Command::Normalform(a) => normalform(a, run),
            Command::Dilate(a) => dilate(a, run),
            Command::Decay(a) => decay(a, run),
            Command::Jetdet(a) => jetdet(a, run, seed),
            Command::Selftest(a) => selftest(a, run, seed),
        }
    }
}

/// Solver flags shared by the commands that solve for discs.
#[derive(Debug, Args, Serialize)]
pub struct SolverArgs {
    #[arg(long, default_value_t = DEFAULT_MODES)]
    pub modes: usize,
    /// Collocation points (default 4 * modes)
    #[arg(long)]
    pub collocation: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    /// Double the modes up to this many when a solve is under-resolved
    #[arg(long)]
    pub max_modes: Option<usize>,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            modes: self.modes,
            collocation: self.collocation,
            tol: self.tol,
            max_iter: self.max_iter,
            max_modes: self.max_modes,
            ..SolveOptions::default()
        }
    }
}

fn c_json(c: C64) -> Value {
    json!([c.re, c.im])
}

fn point_json(z: &[C64]) -> Value {
    Value::Array(z.iter().map(|&c| c_json(c)).collect())
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn load_surface(run: &mut Run, path: &std::path::Path) -> Result<NormalFormSurface, CliError> {
    let rho: DefiningPolynomial = run.read_json(path)?;
    Ok(NormalFormSurface::from_defining(&rho)?)
}

fn load_disc(run: &mut Run, path: &std::path::Path) -> Result<LiftedDisc, CliError> {
    let j: DiscJson = run.read_json(path)?;
    Ok(LiftedDisc::from_json(&j)?)
}

fn load_map(run: &mut Run, path: &std::path::Path) -> Result<PolyMap, CliError> {
    let j: PolyMapJson = run.read_json(path)?;
    Ok(PolyMap::from_json(&j)?)
}

/// Largest `|r|` over the boundary samples of `d`.
fn gluing(surface: &NormalFormSurface, d: &LiftedDisc) -> f64 {
    let calc = surface.calculus();
    d.f_samples().iter().map(|f| calc.value(f).abs()).fold(0.0, f64::max)
}

fn record_solve(run: &mut Run, surface: &NormalFormSurface, d: &LiftedDisc, rep: &stadisc::solver::SolveReport) {
    run.residual("boundary_residual", rep.boundary_residual);
    run.residual("constraint_residual", rep.constraint_residual);
    run.residual("verification_residual", rep.verification_residual);
    run.residual("tail", rep.tail);
    run.residual("gluing", gluing(surface, d));
}

#[derive(Debug, Args, Serialize)]
pub struct QuadricArgs {
    /// Hermitian form: `identity`, `diag:l1,l2,..`, or a JSON file of rows of [re, im]
    #[arg(long = "A", value_name = "FORM", default_value = "identity")]
    pub form: String,
    /// Disc parameter `a` as `re` or `re,im`
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub a: String,
    /// Direction `v`, components separated by `;`
    #[arg(long, allow_hyphen_values = true)]
    pub v: String,
    /// Offset `w` of the general family; omit for the star-normalized disc
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<String>,
    #[arg(long, requires = "w", allow_hyphen_values = true)]
    pub y0: Option<f64>,
    /// Lift scale of the general family
    #[arg(long, requires = "w", allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MODES)]
    pub modes: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Boundary samples as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Also write the quadric's defining polynomial
    #[arg(long)]
    pub surface_out: Option<PathBuf>,
}

fn disc_quadric(args: &QuadricArgs, run: &mut Run) -> Outcome {
    let a = parse::complex(&args.a)?;
    let v = parse::complex_vec(&args.v)?;
    let form = parse::form(&args.form, v.len(), run)?;
    let opts = ClosedFormOptions { modes: args.modes, samples: args.samples };
    let (d, center) = match &args.w {
        Some(w) => {
            let p = FullDiscParams { a, v, w: parse::complex_vec(w)?, y0: args.y0.unwrap_or(0.0), b: args.b.unwrap_or(1.0) };
            let d = build_disc_full(&p, &form, opts)?;
            let z = d.center();
            (d, z)
        }
        None => {
            let p = StarDiscParams { a, v };
            (build_disc_star(&p, &form, opts)?, center_of_star(&p, &form))
        }
    };
    let surface = NormalFormSurface::quadric(form);
    let eqs = FibrationEquations::new(&surface);
    let glue = gluing(&surface, &d);
    let fib = boundary_residual(&eqs, &d, d.samples())?;
    run.residual("gluing", glue);
    run.residual("fibration", fib);
    run.write_json(&args.out, &d.to_json())?;
    if let Some(path) = &args.csv {
        write_boundary_csv(run, path, &d)?;
    }
    if let Some(path) = &args.surface_out {
        run.write_json(path, &surface.defining_polynomial())?;
    }
    Ok(json!({ "center": point_json(center.coords()), "modes": d.modes(), "gluing": glue, "fibration": fib }))
}

fn write_boundary_csv(run: &mut Run, path: &std::path::Path, d: &LiftedDisc) -> Result<(), CliError> {
    let (header, rows) = d.boundary_table();
    let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|&x| fmt(x)).collect()).collect();
    run.write_csv(path, &header, &rows)
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    /// Surface in normal form, as a defining polynomial JSON
    #[arg(long)]
    pub surface: PathBuf,
    /// Pin the disc center: components separated by `;`
    #[arg(long, allow_hyphen_values = true, required_unless_present = "jet", conflicts_with = "jet")]
    pub center: Option<String>,
    /// Pin the boundary jet: tangential components of f'(1)
    #[arg(long, allow_hyphen_values = true, requires = "s0")]
    pub jet: Option<String>,
    /// Product f0'(1) g0'(1) for jet pinning
    #[arg(long, allow_hyphen_values = true, requires = "jet")]
    pub s0: Option<String>,
    /// Initial disc; defaults to the quadric disc with the same pinning
    #[arg(long)]
    pub guess: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn disc_solve(args: &SolveArgs, run: &mut Run) -> Outcome {
    let surface = load_surface(run, &args.surface)?;
    let constraint = match (&args.center, &args.jet, &args.s0) {
        (Some(z), _, _) => DiscConstraint::center(parse::point(z)?),
        (None, Some(w), Some(s0)) => DiscConstraint::jet(parse::complex_vec(w)?, parse::complex(s0)?),
        _ => return Err(CliError::Usage("give --center or --jet with --s0".into())),
    };
    let opts = args.solver.options();
    let result = match &args.guess {
        Some(path) => {
            let guess = load_disc(run, path)?;
            solve_disc(&surface, &constraint, &guess, &opts)
        }
        None => solve_from_quadric(&surface, &constraint, &opts),
    };
    let (d, rep) = result.inspect_err(|e| {
        if let stadisc::Error::Divergence { history } = e {
            run.residual("last_residual", history.last().copied().unwrap_or(f64::NAN));
        }
    })?;
    record_solve(run, &surface, &d, &rep);
    run.write_json(&args.out, &d.to_json())?;
    if let Some(path) = &args.report {
        run.write_json(path, &rep)?;
    }
    if let Some(path) = &args.csv {
        write_boundary_csv(run, path, &d)?;
    }
    Ok(json!({
        "center": point_json(d.center().coords()),
        "modes": d.modes(),
        "iterations": rep.iterations,
        "boundary_residual": rep.boundary_residual,
        "tail": rep.tail,
    }))
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long)]
    pub surface: PathBuf,
    /// Parameter `a` of the base star disc
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub a: String,
    /// Direction `v` of the base star disc
    #[arg(long, allow_hyphen_values = true)]
    pub v: String,
    /// Centers are drawn uniformly within this distance of the base center, per coordinate
    #[arg(long, default_value_t = 0.05)]
    pub radius: f64,
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// One CSV row per center
    #[arg(long)]
    pub out: PathBuf,
}

fn disc_scan(args: &ScanArgs, run: &mut Run, seed: u64) -> Outcome {
    let surface = load_surface(run, &args.surface)?;
    let p = StarDiscParams { a: parse::complex(&args.a)?, v: parse::complex_vec(&args.v)? };
    p.validate(surface.n())?;
    let opts = args.solver.options();
    let origin = center_of_star(&p, surface.form());
    let (base, _) = solve_from_quadric(&surface, &DiscConstraint::center(origin.clone()), &opts)?;
    let mut fx = Fixtures::new(seed);
    let centers: Vec<ComplexPoint> = (0..args.count)
        .map(|_| ComplexPoint::new(origin.coords().iter().map(|&c| c + fx.complex_in_disc(args.radius)).collect()).expect("nonempty"))
        .collect();
    let results = family_scan(&surface, &base, &centers, &opts);

    let dim = surface.n() + 1;
    let mut header = vec!["index".to_string()];
    for k in 0..dim {
        header.push(format!("z{k}_re"));
        header.push(format!("z{k}_im"));
    }
    header.extend(["status", "boundary_residual", "tail", "iterations", "modes"].map(String::from));
    let mut rows = Vec::new();
    let (mut solved, mut worst) = (0usize, 0.0f64);
    for (i, (z, r)) in centers.iter().zip(&results).enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(z.coords().iter().flat_map(|c| [fmt(c.re), fmt(c.im)]));
        match r {
            Ok((d, rep)) => {
                solved += 1;
                worst = worst.max(rep.boundary_residual);
                row.extend(["ok".into(), fmt(rep.boundary_residual), fmt(rep.tail), rep.iterations.to_string(), d.modes().to_string()]);
            }
            Err(e) => row.extend([e.to_string(), String::new(), String::new(), String::new(), String::new()]),
        }
        rows.push(row);
    }
    run.write_csv(&args.out, &header, &rows)?;
    run.residual("max_boundary_residual", worst);
    run.residual("solved", solved as f64);
    if solved < centers.len() {
        return Err(CliError::Numerical(format!("{} of {} centers failed; see {}", centers.len() - solved, centers.len(), args.out.display())));
    }
    Ok(json!({ "solved": solved, "max_boundary_residual": worst }))
}

#[derive(Debug, Args, Serialize)]
pub struct IndicesArgs {
    #[arg(long)]
    pub surface: PathBuf,
    #[arg(long)]
    pub disc: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Sample count is doubled (up to this many times) when the winding of `det B` is under-resolved.
const MAX_WINDING_DOUBLINGS: usize = 6;

fn indices(args: &IndicesArgs, run: &mut Run) -> Outcome {
    let surface = load_surface(run, &args.surface)?;
    let mut d = load_disc(run, &args.disc)?;
    let eqs = FibrationEquations::new(&surface);
    let mut doublings = 0;
    let (maslov, b) = loop {
        let b = matrix_b(&assemble_g(&eqs, &d)?)?;
        match maslov_index(&b) {
            Ok(m) => break (m, b),
            Err(stadisc::Error::UnderResolved(_)) if doublings < MAX_WINDING_DOUBLINGS => {
                d = d.with_samples(2 * d.samples())?;
                doublings += 1;
            }
            Err(e) => return Err(e.into()),
        }
    };
    let min_condition = b.condition.iter().copied().fold(f64::INFINITY, f64::min);
    let max_condition = b.max_condition();
    run.residual("fibration", boundary_residual(&eqs, &d, d.samples())?);
    run.residual("max_condition", max_condition);
    let out = json!({
        "maslov": maslov,
        "det_winding_samples": b.len(),
        "min_condition": min_condition,
        "max_condition": max_condition,
    });
    if let Some(path) = &args.out {
        run.write_json(path, &out)?;
    }
    Ok(out)
}

#[derive(Debug, Args, Serialize)]
pub struct NormalFormArgs {
    /// Defining polynomial JSON
    #[arg(long)]
    pub rho: PathBuf,
    /// Base point on the surface (default: the origin)
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Coordinate change and truncation data
    #[arg(long)]
    pub record: Option<PathBuf>,
}

fn normalform(args: &NormalFormArgs, run: &mut Run) -> Outcome {
    let rho: DefiningPolynomial = run.read_json(&args.rho)?;
    let p = match &args.point {
        Some(s) => parse::point(s)?,
        None => ComplexPoint::zero(rho.n()),
    };
    let (surface, record) = to_normal_form(&rho, &p)?;
    run.residual("rho_at_point", rho.eval(&p).abs());
    run.residual("truncation_residual", record.truncation_residual);
    run.write_json(&args.out, &surface.defining_polynomial())?;
    if let Some(path) = &args.record {
        let rec = json!({
            "pivot": record.pivot,
            "truncation_residual": record.truncation_residual,
            "phi": record.phi.to_json(),
            "phi_inv": record.phi_inv.to_json(),
        });
        run.write_json(path, &rec)?;
    }
    let (pos, neg) = surface.form().signature();
    Ok(json!({ "signature": [pos, neg], "b0": surface.b0(), "pivot": record.pivot, "truncation_residual": record.truncation_residual }))
}

#[derive(Debug, Args, Serialize)]
pub struct DilateArgs {
    #[arg(long)]
    pub surface: PathBuf,
    /// Dilation factor in (0, 1]
    #[arg(long)]
    pub t: f64,
    #[arg(long)]
    pub out: PathBuf,
}

fn dilate(args: &DilateArgs, run: &mut Run) -> Outcome {
    let surface = load_surface(run, &args.surface)?;
    let dilated = stadisc::scaling::dilate_defining(&surface, args.t)?;
    let rho = dilated.defining_polynomial();
    let higher = dilated.higher().terms().map(|(_, c)| c.abs()).fold(0.0, f64::max);
    run.residual("max_higher_coefficient", higher);
    run.write_json(&args.out, &rho)?;
    Ok(json!({ "t": args.t, "terms": rho.len(), "max_higher_coefficient": higher }))
}

#[derive(Debug, Args, Serialize)]
pub struct DecayArgs {
    /// Polynomial map JSON, tangent to the identity to second order at 0
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub disc: PathBuf,
    /// Dilation factors, comma separated
    #[arg(long, default_value = "1,0.5,0.25,0.125,0.0625")]
    pub ts: String,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
    #[arg(long)]
    pub out: PathBuf,
}

fn decay(args: &DecayArgs, run: &mut Run) -> Outcome {
    let map = load_map(run, &args.map)?;
    let d = load_disc(run, &args.disc)?;
    let ts = parse::reals(&args.ts)?;
    let samples = pushforward_decay_probe(&map, &d, &ts, DecayOptions { eps: args.eps, radius: args.radius })?;
    let rows: Vec<Vec<String>> = samples.iter().map(|s| vec![fmt(s.t), fmt(s.norm), fmt(s.leakage)]).collect();
    run.write_csv(&args.out, &["t", "norm", "leakage"].map(String::from), &rows)?;
    let positive: Vec<_> = samples.iter().filter(|s| s.norm > 0.0).collect();
    let slope = if positive.len() >= 2 {
        loglog_slope(&positive.iter().map(|s| s.t).collect::<Vec<_>>(), &positive.iter().map(|s| s.norm).collect::<Vec<_>>())
    } else {
        f64::NAN
    };
    let leakage = samples.iter().map(|s| s.leakage).fold(0.0, f64::max);
    run.residual("max_leakage", leakage);
    run.residual("slope", slope);
    Ok(json!({ "slope": slope, "max_leakage": leakage }))
}

#[derive(Debug, Args, Serialize)]
pub struct JetdetArgs {
    /// Source surface in normal form
    #[arg(long)]
    pub surface: PathBuf,
    /// Target surface (default: the source)
    #[arg(long)]
    pub target: Option<PathBuf>,
    #[arg(long)]
    pub map: PathBuf,
    /// JSON array of points, each an array of [re, im]
    #[arg(long, required_unless_present = "grid", conflicts_with = "grid")]
    pub points: Option<PathBuf>,
    /// Number of random centers of star discs with |a| <= 0.3
    #[arg(long)]
    pub grid: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

fn jetdet(args: &JetdetArgs, run: &mut Run, seed: u64) -> Outcome {
    let source = load_surface(run, &args.surface)?;
    let target = match &args.target {
        Some(path) => load_surface(run, path)?,
        None => source.clone(),
    };
    let map = load_map(run, &args.map)?;
    let points: Vec<ComplexPoint> = match (&args.points, args.grid) {
        (Some(path), _) => run.read_json(path)?,
        (None, Some(k)) => {
            let mut fx = Fixtures::new(seed);
            (0..k).map(|_| fx.admissible_center(source.form(), 0.3).1).collect()
        }
        _ => return Err(CliError::Usage("give --points or --grid".into())),
    };
    let opts = args.solver.options();
    let dim = source.n() + 1;
    let mut header = Vec::new();
    for name in ["point", "reconstructed", "direct"] {
        for k in 0..dim {
            header.push(format!("{name}_z{k}_re"));
            header.push(format!("{name}_z{k}_im"));
        }
    }
    header.extend(["gap", "status"].map(String::from));
    let (mut worst, mut failed) = (0.0f64, 0usize);
    let mut rows = Vec::new();
    for z in &points {
        if z.n() != source.n() {
            return Err(CliError::Usage(format!("point has {} coordinates, surface needs {dim}", z.n() + 1)));
        }
        let direct = map.eval(z.coords());
        let mut row: Vec<String> = z.coords().iter().flat_map(|c| [fmt(c.re), fmt(c.im)]).collect();
        match reconstruct_polymap(&map, &source, &target, std::slice::from_ref(z), &opts) {
            Ok(rec) => {
                let gap = rec[0].coords().iter().zip(&direct).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                worst = worst.max(gap);
                row.extend(rec[0].coords().iter().flat_map(|c| [fmt(c.re), fmt(c.im)]));
                row.extend(direct.iter().flat_map(|c| [fmt(c.re), fmt(c.im)]));
                row.extend([fmt(gap), "ok".into()]);
            }
            Err(e) => {
                failed += 1;
                row.extend((0..2 * dim).map(|_| String::new()));
                row.extend(direct.iter().flat_map(|c| [fmt(c.re), fmt(c.im)]));
                row.extend([String::new(), e.to_string()]);
            }
        }
        rows.push(row);
    }
    run.write_csv(&args.out, &header, &rows)?;
    run.residual("max_gap", worst);
    run.residual("failed", failed as f64);
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} of {} points failed; see {}", points.len(), args.out.display())));
    }
    Ok(json!({ "points": points.len(), "max_gap": worst }))
}

#[derive(Debug, Args, Serialize)]
pub struct SelftestArgs {
    /// Run only these criteria, comma separated
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u32>,
}

fn selftest(args: &SelftestArgs, run: &mut Run, seed: u64) -> Outcome {
    let ids: Vec<u32> = if args.only.is_empty() { (1..=acceptance::TITLES.len() as u32).collect() } else { args.only.clone() };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i as usize > acceptance::TITLES.len()) {
        return Err(CliError::Usage(format!("no criterion {bad}")));
    }
    let mut failed = Vec::new();
    for &id in &ids {
        let o = acceptance::run(id, seed);
        println!("{o}");
        run.residual(&format!("c{id:02}_passed"), if o.passed { 1.0 } else { 0.0 });
        if !o.passed {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        return Err(CliError::Numerical(format!("criteria {failed:?} failed")));
    }
    Ok(json!({ "passed": ids.len() }))
}
