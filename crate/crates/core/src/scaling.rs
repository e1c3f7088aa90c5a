//! Scaled coordinates, matched finite-N ensembles and gauge-invariant
//! comparisons between finite-N kernels and limit kernels.

use core::f64::consts::PI;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use crate::asymptotics::{eval_limit_kernel, FormulaId, FrameKind, ScalingFrame};
use crate::gas::{AnnulusGeometry, ChargeConfiguration, EnsembleSpec, FamilySelector, RadialProfile};
use crate::kernel::KernelEvaluator;
use crate::{Error, Result};

const T_SLACK: f64 = 1e-12;
/// Scaled depth used for the `t` grid of edge frames, which have no width.
pub const EDGE_GRID_DEPTH: f64 = 4.0;
/// Below this fraction of the grid scale, deviations are absolute.
const FLOOR: f64 = 1e-3;

/// Physical point for scaled coordinates measured from the outer edge (or
/// from the edge of an edge frame).
pub fn scaled_point(frame: &ScalingFrame, t: f64, phi: f64) -> Result<Complex64> {
    scaled_point_from(frame, t, phi, false)
}

/// Like [`scaled_point`] but in the coordinates expected by formula `id`
/// (inner-edge distance for inner-edge kernels, raw polar coordinates for
/// bulk kernels).
pub fn scaled_point_for(id: FormulaId, frame: &ScalingFrame, t: f64, phi: f64) -> Result<Complex64> {
    if matches!(id, FormulaId::DiscBulk | FormulaId::ExteriorBulk) {
        return Ok(Complex64::from_polar(t, phi));
    }
    scaled_point_from(frame, t, phi, id.uses_inner_distance() && frame.kind == FrameKind::ThinAnnulus)
}

fn scaled_point_from(frame: &ScalingFrame, t: f64, phi: f64, from_inner: bool) -> Result<Complex64> {
    let f = frame.validated()?;
    let nf = f.n as f64;
    if !t.is_finite() || !phi.is_finite() || t < -T_SLACK {
        return Err(Error::ParameterOutOfRange(format!(
            "scaled coordinates must be finite with t >= 0, got t = {t}, phi = {phi}"
        )));
    }
    let bounded = matches!(
        f.kind,
        FrameKind::ThinAnnulus | FrameKind::NearUnitCircleOuter | FrameKind::NearUnitCircleInner
    );
    if bounded && t > f.t_width * (1.0 + T_SLACK) + T_SLACK {
        return Err(Error::ParameterOutOfRange(format!(
            "t = {t} exceeds the annulus width T = {}",
            f.t_width
        )));
    }
    let r = match f.kind {
        FrameKind::DiscEdge => f.v * (1.0 - t / nf),
        FrameKind::ExteriorEdge => f.v * (1.0 + t / nf),
        FrameKind::ThinAnnulus if from_inner => f.inner_radius() * (1.0 + t / nf),
        FrameKind::ThinAnnulus => f.v * (1.0 - t / nf),
        FrameKind::NearUnitCircleOuter | FrameKind::NearUnitCircleInner => 1.0 + (f.u - t) / nf,
    };
    if !(r >= 0.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "scaled depth t = {t} lies beyond the centre for N = {}",
            f.n
        )));
    }
    Ok(Complex64::from_polar(r, f.psi + phi / nf))
}

/// Integer charge counts realized at `frame.n`: `Γ = ⌊γN⌋` and `M` from
/// `frame.m` when nonzero, else `⌊μN⌋`.
pub fn realized_charges(frame: &ScalingFrame) -> (f64, u32) {
    let nf = frame.n as f64;
    let gamma = (frame.gamma * nf + 1e-9).floor();
    let m = if frame.m > 0 {
        frame.m
    } else {
        (frame.mu * nf + 1e-9).floor().max(0.0) as u32
    };
    (gamma, m)
}

/// Copy of `frame` whose rates are the realized `Γ/N` and `M/N`, so limit
/// formulas carry no rounding bias.
pub fn realized_frame(frame: &ScalingFrame) -> ScalingFrame {
    let nf = frame.n as f64;
    let (gamma, m) = realized_charges(frame);
    let mut f = *frame;
    f.gamma = gamma / nf;
    if frame.m == 0 && frame.mu > 0.0 {
        f.mu = m as f64 / nf;
    }
    f
}

/// The finite-N ensemble whose `N → ∞` limit is the frame's regime.
pub fn matched_spec(frame: &ScalingFrame, profile: &RadialProfile) -> Result<EnsembleSpec> {
    let f = frame.validated()?;
    let (gamma, m) = realized_charges(&f);
    let (r_in, r_out) = (f.inner_radius(), f.outer_radius());
    let geometry = match f.kind {
        FrameKind::DiscEdge => AnnulusGeometry::disc(r_out)?,
        FrameKind::ExteriorEdge => AnnulusGeometry::exterior_disc(r_in)?,
        _ => AnnulusGeometry::new(r_in, r_out)?,
    };
    let family = if m == 0 {
        FamilySelector::ClassI
    } else if r_in > 1.0 {
        FamilySelector::ClassIIExteriorTypeA
    } else if r_out < 1.0 && r_in > 0.0 {
        FamilySelector::ClassIIInteriorTypeB
    } else {
        return Err(Error::GeometryViolation(format!(
            "M = {m} negative charges need the annulus strictly outside or inside the unit circle, got [{r_in}, {r_out}]"
        )));
    };
    EnsembleSpec::build(
        f.n,
        2.0,
        geometry,
        profile.clone(),
        ChargeConfiguration::new(gamma, m),
        family,
    )
}

/// One pair of scaled points `(t₁, φ₁)`, `(t₂, φ₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPair {
    pub t1: f64,
    pub phi1: f64,
    pub t2: f64,
    pub phi2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledGrid {
    pub pairs: Vec<ScaledPair>,
    pub description: String,
}

impl ScaledGrid {
    /// `t` at Chebyshev nodes of `(0, t_max)`, `φ` equispaced on
    /// `[phi_lo, phi_hi]`; pair `(i, j)` joins `(t_i, φ_j)` to
    /// `(t_{(i+j) mod k}, φ_mid)`.
    pub fn chebyshev(t_max: f64, phi_lo: f64, phi_hi: f64, k: usize) -> Self {
        let kf = k as f64;
        let ts: Vec<f64> = (0..k)
            .map(|i| 0.5 * t_max * (1.0 - ((2.0 * i as f64 + 1.0) * PI / (2.0 * kf)).cos()))
            .collect();
        let phis: Vec<f64> = (0..k)
            .map(|j| if k == 1 { phi_lo } else { phi_lo + (phi_hi - phi_lo) * j as f64 / (kf - 1.0) })
            .collect();
        let phi_mid = 0.5 * (phi_lo + phi_hi);
        let mut pairs = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                pairs.push(ScaledPair {
                    t1: ts[i],
                    phi1: phis[j],
                    t2: ts[(i + j) % k],
                    phi2: phi_mid,
                });
            }
        }
        ScaledGrid {
            pairs,
            description: format!(
                "{k}x{k}: t at Chebyshev nodes of (0, {t_max}), phi equispaced on [{phi_lo}, {phi_hi}]"
            ),
        }
    }

    /// The default 8×8 grid in the legal domain of `id` for `frame`.
    pub fn default_for(id: FormulaId, frame: &ScalingFrame) -> Self {
        let t_max = match frame.kind {
            FrameKind::DiscEdge | FrameKind::ExteriorEdge => EDGE_GRID_DEPTH,
            _ => frame.t_width,
        };
        let large_m = frame.mu > 0.0
            && matches!(
                frame.kind,
                FrameKind::NearUnitCircleOuter | FrameKind::NearUnitCircleInner
            )
            && !matches!(
                id,
                FormulaId::MLargeK1MuSmall | FormulaId::MLargeK2MuSmall | FormulaId::MLargeUniversal
            );
        if large_m {
            Self::chebyshev(t_max, 0.0, 2.0 * PI / frame.mu, 8)
        } else {
            Self::chebyshev(t_max, -PI, PI, 8)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub pair: ScaledPair,
    pub abs_k_fin: f64,
    pub abs_k_lim: f64,
    pub rel_dev: f64,
    pub det2_fin: f64,
    pub det2_lim: f64,
    pub det2_dev: f64,
}

/// Gauge-invariant comparison of a kernel against a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub n: usize,
    pub formula: String,
    pub grid: String,
    pub realized_gamma: f64,
    pub realized_mu: f64,
    pub rows: Vec<ReportRow>,
    pub sup: f64,
    pub mean: f64,
}

/// Kernel values needed per pair: `K(z₁,z₁)`, `K(z₂,z₂)`, `K(z₁,z₂)`.
type Triple = (f64, f64, Complex64);

fn deviation(a: f64, reference: f64, scale: f64) -> f64 {
    let d = (a - reference).abs();
    if reference.abs() > FLOOR * scale {
        d / reference.abs()
    } else {
        d / scale
    }
}

fn build_report(
    n: usize,
    formula: String,
    grid: &ScaledGrid,
    realized: &ScalingFrame,
    fin: &[Triple],
    reference: &[Triple],
) -> ErrorReport {
    let scale = reference
        .iter()
        .map(|r| r.0.abs().max(r.1.abs()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut rows = Vec::with_capacity(fin.len());
    for ((p, a), b) in grid.pairs.iter().zip(fin).zip(reference) {
        let det_a = a.0 * a.1 - a.2.norm_sqr();
        let det_b = b.0 * b.1 - b.2.norm_sqr();
        let rel_dev = deviation(a.2.norm(), b.2.norm(), scale);
        let det2_dev = deviation(det_a, det_b, scale * scale);
        rows.push(ReportRow {
            pair: *p,
            abs_k_fin: a.2.norm(),
            abs_k_lim: b.2.norm(),
            rel_dev,
            det2_fin: det_a,
            det2_lim: det_b,
            det2_dev,
        });
    }
    let sup = rows.iter().map(|r| r.rel_dev.max(r.det2_dev)).fold(0.0, f64::max);
    let mean = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|r| r.rel_dev.max(r.det2_dev)).sum::<f64>() / rows.len() as f64
    };
    ErrorReport {
        n,
        formula,
        grid: grid.description.clone(),
        realized_gamma: realized.gamma,
        realized_mu: realized.mu,
        rows,
        sup,
        mean,
    }
}

fn finite_triples(
    kev: &KernelEvaluator,
    id: FormulaId,
    frame: &ScalingFrame,
    grid: &ScaledGrid,
) -> Result<Vec<Triple>> {
    grid.pairs
        .iter()
        .map(|p| {
            let z1 = scaled_point_for(id, frame, p.t1, p.phi1)?;
            let z2 = scaled_point_for(id, frame, p.t2, p.phi2)?;
            let b1 = kev.basis(z1)?;
            let b2 = kev.basis(z2)?;
            Ok((
                kev.eval_basis(&b1, &b1).re,
                kev.eval_basis(&b2, &b2).re,
                kev.eval_basis(&b1, &b2),
            ))
        })
        .collect()
}

fn limit_triples(id: FormulaId, frame: &ScalingFrame, grid: &ScaledGrid) -> Result<Vec<Triple>> {
    grid.pairs
        .iter()
        .map(|p| {
            Ok((
                eval_limit_kernel(id, frame, p.t1, p.phi1, p.t1, p.phi1)?.re,
                eval_limit_kernel(id, frame, p.t2, p.phi2, p.t2, p.phi2)?.re,
                eval_limit_kernel(id, frame, p.t1, p.phi1, p.t2, p.phi2)?,
            ))
        })
        .collect()
}

/// Compare the finite-N kernel `kev` with limit kernel `id` on `grid`. The
/// limit is evaluated at the rates realized by `kev`'s ensemble.
pub fn compare(
    kev: &KernelEvaluator,
    id: FormulaId,
    frame: &ScalingFrame,
    grid: &ScaledGrid,
) -> Result<ErrorReport> {
    let spec = kev.spec();
    let mut realized = frame.with_n(spec.n())?;
    let nf = spec.n() as f64;
    realized.gamma = spec.gamma() / nf;
    if realized.m == 0 && realized.mu > 0.0 {
        realized.mu = spec.m() as f64 / nf;
    }
    let realized = realized.validated()?;
    let fin = finite_triples(kev, id, &realized, grid)?;
    let lim = limit_triples(id, &realized, grid)?;
    Ok(build_report(spec.n(), id.name().into(), grid, &realized, &fin, &lim))
}

/// Same as [`compare`] for an arbitrary finite kernel `kernel(z₁, z₂)`,
/// with `frame` taken as the realized frame.
pub fn compare_with<K>(
    mut kernel: K,
    id: FormulaId,
    frame: &ScalingFrame,
    grid: &ScaledGrid,
) -> Result<ErrorReport>
where
    K: FnMut(Complex64, Complex64) -> Result<Complex64>,
{
    let frame = frame.validated()?;
    let fin = grid
        .pairs
        .iter()
        .map(|p| {
            let z1 = scaled_point_for(id, &frame, p.t1, p.phi1)?;
            let z2 = scaled_point_for(id, &frame, p.t2, p.phi2)?;
            Ok((kernel(z1, z1)?.re, kernel(z2, z2)?.re, kernel(z1, z2)?))
        })
        .collect::<Result<Vec<Triple>>>()?;
    let lim = limit_triples(id, &frame, grid)?;
    Ok(build_report(frame.n, id.name().into(), grid, &frame, &fin, &lim))
}

/// Build the matched ensemble for `frame` at each `N` in `ns` and compare
/// it with `id` on the default grid.
pub fn convergence_ladder(
    id: FormulaId,
    frame: &ScalingFrame,
    profile: &RadialProfile,
    ns: &[usize],
) -> Result<Vec<ErrorReport>> {
    ns.iter()
        .map(|&n| {
            let f = frame.with_n(n)?;
            let kev = KernelEvaluator::build(&matched_spec(&f, profile)?)?;
            compare(&kev, id, &f, &ScaledGrid::default_for(id, &f))
        })
        .collect()
}

/// Sup deviation between the finite-N kernels of two profiles on a shared
/// scaled grid (the first profile is the reference).
pub fn universality_probe(
    frame: &ScalingFrame,
    profiles: (&RadialProfile, &RadialProfile),
    n: usize,
    grid: &ScaledGrid,
) -> Result<ErrorReport> {
    let f = frame.with_n(n)?;
    let ka = KernelEvaluator::build(&matched_spec(&f, profiles.0)?)?;
    let kb = KernelEvaluator::build(&matched_spec(&f, profiles.1)?)?;
    let id = FormulaId::ThinAnnulusUniversal;
    let a = finite_triples(&ka, id, &f, grid)?;
    let b = finite_triples(&kb, id, &f, grid)?;
    Ok(build_report(n, "profile_pair".into(), grid, &realized_frame(&f), &b, &a))
}
