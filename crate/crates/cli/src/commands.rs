use std::f64::consts::PI;
use std::path::Path;

use annulus_gas::asymptotics::{eval_limit_kernel, limit_mass};
use annulus_gas::oracle::{brute_force_correlation, duality_check, mc_correlation, DualityMethod};
use annulus_gas::orthopoly::circle_orthogonality_check;
use annulus_gas::sampler::{mcmc_configurations, RadialSampler};
use annulus_gas::scaling::{convergence_ladder, universality_probe, ErrorReport, ScaledGrid};
use annulus_gas::{
    Complex64, EnsembleSpec, FormulaId, FrameKind, KernelEvaluator, PolynomialFamily,
    RadialProfile, ScalingFrame,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::*;
use crate::dto::SpecDto;
use crate::output::{emit, emit_json, Cell, Manifest, Table};
use crate::CliError;

pub fn dispatch(command: Command, argv: &[String]) -> Result<(), CliError> {
    match command {
        Command::Density(a) => density(a, argv),
        Command::Kernel(a) => kernel(a, argv),
        Command::Correlate(a) => correlate(a, argv),
        Command::Limits(a) => limits(a, argv),
        Command::Converge(a) => converge(a, argv),
        Command::Check(a) => check(a, argv),
        Command::Sample(a) => sample(a, argv),
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn load(path: &Path, manifest: &mut Manifest) -> Result<EnsembleSpec, CliError> {
    let dto = SpecDto::read(path)?;
    let spec = dto.to_spec()?;
    manifest.spec = Some(dto);
    Ok(spec)
}

/// Radius at fraction `s` of the annulus; unbounded annuli use `[R, r_max]`.
fn radius_at(spec: &EnsembleSpec, s: f64, r_max: Option<f64>) -> f64 {
    let g = spec.geometry();
    let lo = g.inner_radius();
    let hi = if g.outer_radius().is_finite() { g.outer_radius() } else { r_max.unwrap_or(2.0 * lo) };
    lo + s * (hi - lo)
}

fn default_points(spec: &EnsembleSpec) -> Vec<Complex64> {
    vec![
        Complex64::from_polar(radius_at(spec, 0.35, None), 0.3),
        Complex64::from_polar(radius_at(spec, 0.7, None), 2.1),
    ]
}

fn density(a: DensityArgs, argv: &[String]) -> Result<(), CliError> {
    let mut m = Manifest::new("density", argv);
    let spec = load(&a.io.spec, &mut m)?;
    let kev = KernelEvaluator::build(&spec)?;
    let points = match (a.points, a.grid) {
        (Some(p), _) => p.0,
        (None, Some((nr, nt))) => {
            if let Some(r) = a.r_max {
                if !(r > spec.geometry().inner_radius()) || !r.is_finite() {
                    return Err(invalid(format!("--r-max must be finite and above the inner radius, got {r}")));
                }
            }
            m.param("grid", [nr, nt]).param("r_max", a.r_max);
            (0..nr)
                .flat_map(|i| {
                    let r = radius_at(&spec, (i as f64 + 0.5) / nr as f64, a.r_max);
                    (0..nt).map(move |j| Complex64::from_polar(r, 2.0 * PI * j as f64 / nt as f64))
                })
                .collect()
        }
        (None, None) => return Err(invalid("density needs --points or --grid")),
    };
    let values = points
        .par_iter()
        .map(|z| kev.density(*z))
        .collect::<Result<Vec<f64>, _>>()?;
    let mut t = Table::new(&["re_z1", "im_z1", "re_K", "im_K"]);
    for (z, k) in points.iter().zip(&values) {
        t.push(vec![z.re.into(), z.im.into(), (*k).into(), 0.0.into()]);
    }
    emit(&t, a.io.out.as_deref(), m)
}

fn kernel(a: KernelArgs, argv: &[String]) -> Result<(), CliError> {
    let mut m = Manifest::new("kernel", argv);
    let spec = load(&a.io.spec, &mut m)?;
    let kev = KernelEvaluator::build(&spec)?;
    let first = a.points.0;
    let pairs: Vec<(Complex64, Complex64)> = match a.points2 {
        Some(second) => {
            if second.0.len() != first.len() {
                return Err(invalid(format!(
                    "--points has {} entries but --points2 has {}",
                    first.len(),
                    second.0.len()
                )));
            }
            first.iter().copied().zip(second.0).collect()
        }
        None => first.iter().flat_map(|z1| first.iter().map(move |z2| (*z1, *z2))).collect(),
    };
    let values = pairs
        .par_iter()
        .map(|&(z1, z2)| {
            let k = kev.eval(z1, z2)?;
            let parts = if a.split { Some(kev.eval_split(z1, z2)?) } else { None };
            Ok((k, parts))
        })
        .collect::<Result<Vec<_>, annulus_gas::Error>>()?;
    let mut header = vec!["re_z1", "im_z1", "re_z2", "im_z2", "re_K", "im_K"];
    if a.split {
        header.extend(["re_K1", "im_K1", "re_K2", "im_K2"]);
    }
    let mut t = Table::new(&header);
    for ((z1, z2), (k, parts)) in pairs.iter().zip(values) {
        let mut row: Vec<Cell> = vec![z1.re.into(), z1.im.into(), z2.re.into(), z2.im.into(), k.re.into(), k.im.into()];
        if let Some((k1, k2)) = parts {
            row.extend([k1.re.into(), k1.im.into(), k2.re.into(), k2.im.into()]);
        }
        t.push(row);
    }
    m.param("split", a.split);
    emit(&t, a.io.out.as_deref(), m)
}

fn resolve(method: Method, spec: &EnsembleSpec) -> Method {
    match method {
        Method::Auto if spec.beta() == 2.0 => Method::Determinantal,
        Method::Auto if spec.n() <= 3 => Method::BruteForce,
        Method::Auto => Method::MonteCarlo,
        other => other,
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Auto => "auto",
        Method::Determinantal => "determinantal",
        Method::BruteForce => "brute_force",
        Method::MonteCarlo => "monte_carlo",
    }
}

fn correlate(a: CorrelateArgs, argv: &[String]) -> Result<(), CliError> {
    let mut m = Manifest::new("correlate", argv);
    let spec = load(&a.io.spec, &mut m)?;
    let pts = a.points.0;
    let method = resolve(a.method.method, &spec);
    let (value, stderr, condition) = match method {
        Method::Determinantal => {
            let r = KernelEvaluator::build(&spec)?.correlation(&pts)?;
            (r.value, 0.0, r.condition)
        }
        Method::BruteForce => {
            m.tol("quadrature_rel", a.method.quad_tol);
            (brute_force_correlation(&spec, &pts, a.method.quad_tol)?, 0.0, f64::NAN)
        }
        _ => {
            m.seed = Some(a.method.seed);
            m.param("samples", a.method.samples);
            let r = mc_correlation(&spec, &pts, a.method.samples, a.method.seed)?;
            (r.value, r.stderr, f64::NAN)
        }
    };
    let mut t = Table::new(&["k", "method", "value", "stderr", "condition"]);
    t.push(vec![pts.len().into(), method_name(method).into(), value.into(), stderr.into(), condition.into()]);
    m.param("points", pts.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>());
    emit(&t, a.io.out.as_deref(), m)
}

fn formula(name: &str) -> Result<FormulaId, CliError> {
    FormulaId::from_name(name).ok_or_else(|| {
        let names: Vec<&str> = FormulaId::ALL.iter().map(|f| f.name()).collect();
        invalid(format!("unknown formula {name:?}; known: {}", names.join(", ")))
    })
}

fn build_frame(id: FormulaId, a: &FrameArgs) -> Result<ScalingFrame, CliError> {
    let kind = match &a.frame {
        Some(s) => FrameKind::from_name(s).ok_or_else(|| invalid(format!("unknown frame {s:?}")))?,
        None => id.frames()[0],
    };
    if !id.accepts(kind) {
        return Err(invalid(format!("{} is not defined in a {} frame", id.name(), kind.name())));
    }
    let f = match kind {
        FrameKind::DiscEdge => ScalingFrame::disc_edge(a.n, a.v, a.gamma)?,
        FrameKind::ExteriorEdge => ScalingFrame::exterior_edge(a.n, a.v, a.gamma)?,
        FrameKind::ThinAnnulus => ScalingFrame::thin_annulus(a.n, a.v, a.gamma, a.t_width)?,
        FrameKind::NearUnitCircleOuter => {
            ScalingFrame::near_circle_outer(a.n, a.gamma, a.u.unwrap_or(2.0), a.t_width)?
        }
        FrameKind::NearUnitCircleInner => {
            ScalingFrame::near_circle_inner(a.n, a.gamma, a.u.unwrap_or(-1.0), a.t_width)?
        }
    };
    Ok(f.with_m(a.m).with_psi(a.psi).with_mu(a.mu)?)
}

fn frame_json(f: &ScalingFrame) -> Value {
    json!({
        "kind": f.kind.name(),
        "n": f.n,
        "v": f.v,
        "gamma": f.gamma,
        "mu": f.mu,
        "t_width": f.t_width,
        "u": f.u,
        "psi": f.psi,
        "m": f.m,
    })
}

pub fn catalog() -> Value {
    Value::Array(
        FormulaId::ALL
            .iter()
            .map(|f| {
                json!({
                    "id": f.name(),
                    "label": f.label(),
                    "domain": f.domain(),
                    "frames": f.frames().iter().map(|k| k.name()).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

fn limits(a: LimitsArgs, argv: &[String]) -> Result<(), CliError> {
    if a.catalog {
        return emit_json(&catalog(), a.out.as_deref());
    }
    let id = formula(a.id.as_deref().unwrap_or_default())?;
    let frame = build_frame(id, &a.frame)?;
    let (t1, t2) = (a.t1.unwrap_or(a.t), a.t2.unwrap_or(a.t));
    let (phi1, phi2) = (a.phi1.unwrap_or(a.phi), a.phi2.unwrap_or(0.0));
    let k = eval_limit_kernel(id, &frame, t1, phi1, t2, phi2)?;
    let mut t = Table::new(&["id", "frame", "t1", "phi1", "t2", "phi2", "re_K", "im_K"]);
    t.push(vec![id.name().into(), frame.kind.name().into(), t1.into(), phi1.into(), t2.into(), phi2.into(), k.re.into(), k.im.into()]);
    let mut m = Manifest::new("limits", argv);
    m.param("formula", id.name()).param("frame", frame_json(&frame));
    if let Ok(mass) = limit_mass(id, &frame) {
        m.summary("limit_mass", mass);
    }
    emit(&t, a.out.as_deref(), m)
}

fn converge(a: ConvergeArgs, argv: &[String]) -> Result<(), CliError> {
    let mut m = Manifest::new("converge", argv);
    let id = formula(&a.id)?;
    let frame = build_frame(id, &a.frame)?;
    let profile = match (&a.profile, &a.spec) {
        (Some(p), _) => p.clone(),
        (None, Some(path)) => load(path, &mut m)?.profile().clone(),
        (None, None) => RadialProfile::Flat,
    };
    let reports = a
        .ns
        .0
        .par_iter()
        .map(|&n| -> Result<ErrorReport, annulus_gas::Error> {
            match &a.against {
                None => Ok(convergence_ladder(id, &frame, &profile, &[n])?.remove(0)),
                Some(other) => {
                    let f = frame.with_n(n)?;
                    universality_probe(&f, (&profile, other), n, &ScaledGrid::default_for(id, &f))
                }
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&[
        "n", "t1", "t2", "phi1", "phi2", "absK_fin", "absK_lim", "rel_dev", "det2_fin", "det2_lim", "det2_dev",
    ]);
    for r in &reports {
        for row in &r.rows {
            let p = row.pair;
            t.push(vec![
                r.n.into(),
                p.t1.into(),
                p.t2.into(),
                p.phi1.into(),
                p.phi2.into(),
                row.abs_k_fin.into(),
                row.abs_k_lim.into(),
                row.rel_dev.into(),
                row.det2_fin.into(),
                row.det2_lim.into(),
                row.det2_dev.into(),
            ]);
        }
    }
    let ladder: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "n": r.n,
                "sup": r.sup,
                "mean": r.mean,
                "realized_gamma": r.realized_gamma,
                "realized_mu": r.realized_mu,
            })
        })
        .collect();
    m.param("formula", id.name())
        .param("frame", frame_json(&frame))
        .param("ns", &a.ns.0)
        .param("profile", crate::dto::ProfileDto::from_profile(&profile))
        .param("against", a.against.as_ref().map(crate::dto::ProfileDto::from_profile));
    m.summary("ladder", ladder);
    if let Some(r) = reports.first() {
        m.summary("grid", &r.grid);
    }
    emit(&t, a.out.as_deref(), m)
}

struct CheckRow {
    item: String,
    value: f64,
    reference: f64,
    deviation: f64,
    tolerance: f64,
}

impl CheckRow {
    fn pass(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

fn check(a: CheckArgs, argv: &[String]) -> Result<(), CliError> {
    let mut m = Manifest::new("check", argv);
    let spec = load(&a.io.spec, &mut m)?;
    let points = a.points.map(|p| p.0).unwrap_or_else(|| default_points(&spec));
    let kind = a.kind;
    let rows = match kind {
        CheckKind::Orthogonality => check_orthogonality(&spec, a.tol.unwrap_or(1e-10), &mut m)?,
        CheckKind::Mass => {
            let tol = a.tol.unwrap_or(1e-8);
            let quad = 1e-11;
            m.tol("quadrature_rel", quad);
            let mass = KernelEvaluator::build(&spec)?.total_mass(quad)?;
            let n = spec.n() as f64;
            m.summary("mass", mass);
            vec![CheckRow { item: "mass".into(), value: mass, reference: n, deviation: (mass - n).abs() / n, tolerance: tol }]
        }
        CheckKind::Reproducing => {
            let tol = a.tol.unwrap_or(1e-7);
            let quad = 1e-10;
            m.tol("quadrature_rel", quad);
            let kev = KernelEvaluator::build(&spec)?;
            let mut rows = Vec::new();
            for (i, z1) in points.iter().enumerate() {
                for z2 in &points[i..] {
                    let d = kev.reproducing_defect(*z1, *z2, quad)?;
                    rows.push(CheckRow { item: pair_label(*z1, *z2), value: d, reference: 0.0, deviation: d, tolerance: tol });
                }
            }
            rows
        }
        CheckKind::Duality => {
            let method = resolve(a.method.method, &spec);
            let dm = match method {
                Method::Determinantal => DualityMethod::Determinantal,
                Method::BruteForce => {
                    m.tol("quadrature_rel", a.method.quad_tol);
                    DualityMethod::BruteForce { rel_tol: a.method.quad_tol }
                }
                _ => {
                    m.seed = Some(a.method.seed);
                    m.param("samples", a.method.samples);
                    DualityMethod::MonteCarlo { samples: a.method.samples, seed: a.method.seed }
                }
            };
            m.param("method", method_name(method));
            let r = duality_check(&spec, &points, dm)?;
            // Monte Carlo residuals are judged in units of their standard error.
            let tolerance = match r.stderr {
                Some(se) => a.tol.unwrap_or(3.0) * se,
                None => a.tol.unwrap_or(if method == Method::Determinantal { 1e-8 } else { 1e-6 }),
            };
            m.summary("direct", r.direct).summary("stderr", r.stderr);
            vec![CheckRow { item: "duality".into(), value: r.residual, reference: 0.0, deviation: r.residual, tolerance }]
        }
        CheckKind::Split => {
            let tol = a.tol.unwrap_or(1e-12);
            let kev = KernelEvaluator::build(&spec)?;
            let mut rows = Vec::new();
            for z1 in &points {
                for z2 in &points {
                    let (k1, k2) = kev.eval_split(*z1, *z2)?;
                    let k = kev.eval(*z1, *z2)?;
                    let dev = (k1 + k2 - k).norm() / k.norm().max(f64::MIN_POSITIVE);
                    rows.push(CheckRow { item: pair_label(*z1, *z2), value: (k1 + k2).norm(), reference: k.norm(), deviation: dev, tolerance: tol });
                }
            }
            rows
        }
    };
    let mut t = Table::new(&["kind", "item", "value", "reference", "deviation", "tolerance", "pass"]);
    let name = kind_name(kind);
    for r in &rows {
        t.push(vec![name.into(), r.item.as_str().into(), r.value.into(), r.reference.into(), r.deviation.into(), r.tolerance.into(), r.pass().into()]);
    }
    let worst = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let passed = rows.iter().all(CheckRow::pass);
    m.param("kind", name);
    if !matches!(kind, CheckKind::Orthogonality | CheckKind::Mass) {
        m.param("points", points.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>());
    }
    m.summary("worst_deviation", worst).summary("passed", passed);
    emit(&t, a.io.out.as_deref(), m)?;
    if passed {
        Ok(())
    } else {
        let bad = rows.iter().find(|r| !r.pass()).expect("a failing row");
        Err(CliError::Numerical(format!(
            "{name} check failed at {}: deviation {:e} exceeds {:e}",
            bad.item, bad.deviation, bad.tolerance
        )))
    }
}

fn kind_name(k: CheckKind) -> &'static str {
    match k {
        CheckKind::Orthogonality => "orthogonality",
        CheckKind::Mass => "mass",
        CheckKind::Reproducing => "reproducing",
        CheckKind::Duality => "duality",
        CheckKind::Split => "split",
    }
}

fn pair_label(z1: Complex64, z2: Complex64) -> String {
    format!("({} {}) ({} {})", z1.re, z1.im, z2.re, z2.im)
}

/// Angular orthogonality of the family on five circles inside the annulus:
/// off-diagonal moments relative to the diagonal ones, and diagonal moments
/// against their closed forms.
fn check_orthogonality(spec: &EnsembleSpec, tol: f64, m: &mut Manifest) -> Result<Vec<CheckRow>, CliError> {
    let angular = 1e-13;
    m.tol("angular_rel", angular);
    let fam = PolynomialFamily::for_spec(spec);
    let n = spec.n();
    let radii: Vec<f64> = [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|s| radius_at(spec, *s, None)).collect();
    let per_radius = radii
        .par_iter()
        .map(|&r| -> Result<[CheckRow; 2], annulus_gas::Error> {
            let mut diag = Vec::with_capacity(n);
            let mut diag_dev: f64 = 0.0;
            for j in 0..n {
                let v = circle_orthogonality_check(&fam, r, j, j, angular)?.re;
                let c = fam.circle_norm(j, r)?;
                diag_dev = diag_dev.max((v - c).abs() / c);
                diag.push(v);
            }
            let mut off: f64 = 0.0;
            for j in 0..n {
                for l in j + 1..n {
                    let v = circle_orthogonality_check(&fam, r, j, l, angular)?;
                    off = off.max(v.norm() / (diag[j] * diag[l]).sqrt());
                }
            }
            Ok([
                CheckRow { item: format!("r={r} diagonal"), value: diag_dev, reference: 0.0, deviation: diag_dev, tolerance: tol },
                CheckRow { item: format!("r={r} off-diagonal"), value: off, reference: 0.0, deviation: off, tolerance: tol },
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(per_radius.into_iter().flatten().collect())
}

fn sample(a: SampleArgs, argv: &[String]) -> Result<(), CliError> {
    let mut m = Manifest::new("sample", argv);
    let spec = load(&a.io.spec, &mut m)?;
    if a.count == 0 {
        return Err(invalid("--count must be positive"));
    }
    m.seed = Some(a.seed);
    m.param("count", a.count);
    let t = match a.mode {
        SampleMode::Radial => {
            m.param("mode", "radial");
            let sampler = RadialSampler::build(&spec)?;
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mut t = Table::new(&["config_index", "particle_index", "modulus"]);
            for c in 0..a.count {
                for (j, r) in sampler.sample(&mut rng).into_iter().enumerate() {
                    t.push(vec![c.into(), j.into(), r.into()]);
                }
            }
            t
        }
        SampleMode::Mcmc => {
            m.param("mode", "mcmc").param("thin_sweeps", a.thin.unwrap_or(spec.n()));
            let mut t = Table::new(&["config_index", "particle_index", "re", "im"]);
            for (c, cfg) in mcmc_configurations(&spec, a.count, a.thin, a.seed)?.iter().enumerate() {
                for (j, z) in cfg.points().iter().enumerate() {
                    t.push(vec![c.into(), j.into(), z.re.into(), z.im.into()]);
                }
            }
            t
        }
    };
    emit(&t, a.io.out.as_deref(), m)
}
