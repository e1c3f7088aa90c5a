//! Ground truth that does not rely on the determinantal structure: tensor
//! quadrature of the Gibbs measure for tiny `N`, Metropolis Monte Carlo for
//! any `N` and `β`, and the inversion duality check.

use core::f64::consts::PI;

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use crate::gas::{AnnulusGeometry, ChargeConfiguration, EnsembleSpec, FamilySelector};
use crate::kernel::KernelEvaluator;
use crate::logspace::{log_sum_exp, wrap_angle};
use crate::metropolis::Chain;
use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

/// Monte Carlo estimate with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
    /// The same estimate with the density bin halved in size.
    pub half_bin_value: f64,
    /// Metropolis acceptance rate after burn-in.
    pub acceptance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    /// Bin half-size as a fraction of the annulus width (or of `R` for an
    /// exterior disc).
    pub bin_fraction: f64,
    pub batches: usize,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            bin_fraction: 0.05,
            batches: 50,
        }
    }
}

/// Product rule for one particle: Gauss–Legendre in a radial variable times
/// the trapezoid rule in angle. `ln_w` holds `ln(weight · jacobian · w(z))`.
struct TensorRule {
    nodes: Vec<Complex64>,
    ln_w: Vec<f64>,
}

fn tensor_rule(spec: &EnsembleSpec, n_r: usize, n_theta: usize) -> TensorRule {
    let g = spec.geometry();
    let (r_in, r_out) = (g.inner_radius(), g.outer_radius());
    let (xs, ws) = gauss_legendre(n_r);
    let d_theta = 2.0 * PI / n_theta as f64;
    let mut nodes = Vec::with_capacity(n_r * n_theta);
    let mut ln_w = Vec::with_capacity(n_r * n_theta);
    for (x, w) in xs.iter().zip(&ws) {
        let s = 0.5 * (x + 1.0);
        // (radius, dr/dx)
        let (r, jac) = if r_out.is_infinite() {
            (r_in / s, 0.5 * r_in / (s * s))
        } else if r_in == 0.0 {
            (r_out * s * s, r_out * s)
        } else {
            (r_in + (r_out - r_in) * s, 0.5 * (r_out - r_in))
        };
        let base = (w * jac * r * d_theta).ln();
        for k in 0..n_theta {
            let z = Complex64::from_polar(r, d_theta * (k as f64 + 0.5));
            let lw = spec.ln_weight(z);
            if lw.is_finite() {
                nodes.push(z);
                ln_w.push(base + lw);
            }
        }
    }
    TensorRule { nodes, ln_w }
}

/// `ln ∫ Π_i e^{ln_w(x_i)} Π_{i<j} |x_i − x_j|^β` over `m ≤ 3` particles on
/// the nodes of one rule.
fn ln_symmetric_sum(nodes: &[Complex64], ln_w: &[f64], m: usize, beta: f64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let shift = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = ln_w.iter().map(|l| (l - shift).exp()).collect();
    let p = nodes.len();
    let pair = |i: usize, j: usize| (nodes[i] - nodes[j]).norm().powf(beta);
    let s = match m {
        1 => w.iter().sum::<f64>(),
        2 => {
            let mut s = 0.0;
            for i in 0..p {
                let mut row = 0.0;
                for j in 0..i {
                    row += w[j] * pair(i, j);
                }
                s += w[i] * row;
            }
            2.0 * s
        }
        _ => {
            let mut d = alloc::vec![0.0; p * p];
            for i in 0..p {
                for j in 0..i {
                    let v = pair(i, j);
                    d[i * p + j] = v;
                    d[j * p + i] = v;
                }
            }
            let mut s = 0.0;
            for i in 0..p {
                for j in 0..i {
                    let wij = w[i] * w[j] * d[i * p + j];
                    if wij == 0.0 {
                        continue;
                    }
                    let (di, dj) = (&d[i * p..i * p + j], &d[j * p..j * p + j]);
                    let mut inner = 0.0;
                    for k in 0..j {
                        inner += w[k] * di[k] * dj[k];
                    }
                    s += wij * inner;
                }
            }
            6.0 * s
        }
    };
    s.ln() + m as f64 * shift
}

/// Refinement ladder of `(n_r, n_θ)` with the largest node count allowed
/// for `m` simultaneously integrated particles.
fn rule_ladder(m: usize) -> impl Iterator<Item = (usize, usize)> {
    let cap = match m {
        0 | 1 => 200_000,
        2 => 13_000,
        _ => 1_500,
    };
    (0..12)
        .map(|l| {
            let f = 1.5f64.powi(l);
            ((8.0 * f).round() as usize, (16.0 * f).round() as usize)
        })
        .take_while(move |(a, b)| a * b <= cap)
}

fn ln_correlation_on_rule(spec: &EnsembleSpec, rule: &TensorRule, points: &[Complex64]) -> f64 {
    let n = spec.n();
    let k = points.len();
    let beta = spec.beta();
    let ln_z = ln_symmetric_sum(&rule.nodes, &rule.ln_w, n, beta);
    let mut ln_a: f64 = points.iter().map(|z| spec.ln_weight(*z)).sum();
    for i in 0..k {
        for j in 0..i {
            ln_a += beta * (points[i] - points[j]).norm().ln();
        }
    }
    let ln_w: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.ln_w)
        .map(|(x, lw)| lw + beta * points.iter().map(|z| (z - x).norm().ln()).sum::<f64>())
        .collect();
    let ln_j = ln_symmetric_sum(&rule.nodes, &ln_w, n - k, beta);
    let ln_falling: f64 = ((n - k + 1)..=n).map(|j| (j as f64).ln()).sum();
    ln_falling + ln_a + ln_j - ln_z
}

fn check_brute_force_size(spec: &EnsembleSpec, k: usize) -> Result<()> {
    let n = spec.n();
    if n > 3 || k > n || n - k > 2 {
        return Err(Error::TooLarge(format!(
            "brute-force quadrature needs N <= 3 and N - k <= 2, got N = {n}, k = {k}"
        )));
    }
    Ok(())
}

/// `ln Z_N` of the Gibbs measure by tensor quadrature (`N ≤ 3`).
pub fn ln_partition_function(spec: &EnsembleSpec, rel_tol: f64) -> Result<f64> {
    if spec.n() > 3 {
        return Err(Error::TooLarge(format!(
            "brute-force quadrature needs N <= 3, got N = {}",
            spec.n()
        )));
    }
    converge_ln(spec, rel_tol, |rule| {
        ln_symmetric_sum(&rule.nodes, &rule.ln_w, spec.n(), spec.beta())
    })
}

/// Refine the tensor rule until a logarithmic quantity changes by less than
/// `rel_tol` (a relative change of the underlying value).
fn converge_ln<F: FnMut(&TensorRule) -> f64>(spec: &EnsembleSpec, rel_tol: f64, mut value: F) -> Result<f64> {
    let mut prev: Option<f64> = None;
    let mut last_diff = f64::INFINITY;
    for (n_r, n_theta) in rule_ladder(spec.n()) {
        let v = value(&tensor_rule(spec, n_r, n_theta));
        if let Some(p) = prev {
            last_diff = (v - p).abs();
            if last_diff <= rel_tol {
                return Ok(v);
            }
        }
        prev = Some(v);
    }
    Err(Error::QuadratureNonConvergence(format!(
        "tensor quadrature for N = {} stalled at relative change {last_diff:.3e}",
        spec.n()
    )))
}

/// `ρ_k(z₁..z_k)` by direct quadrature of the Gibbs measure at the spec's
/// `β`, including `N!/(N−k)!` and the partition function.
pub fn brute_force_correlation(spec: &EnsembleSpec, points: &[Complex64], rel_tol: f64) -> Result<f64> {
    check_brute_force_size(spec, points.len())?;
    if points.iter().any(|z| !spec.contains(*z)) {
        return Ok(0.0);
    }
    if points.is_empty() {
        return Ok(1.0);
    }
    // The work is dominated by Z_N, which integrates all N particles.
    let ln_rho = converge_ln(spec, rel_tol, |rule| ln_correlation_on_rule(spec, rule, points))?;
    Ok(ln_rho.exp())
}

#[derive(Debug, Clone, Copy)]
enum Bin {
    Disc { center: Complex64, h: f64 },
    Sector { r_lo: f64, r_hi: f64, theta: f64, half_width: f64 },
}

impl Bin {
    fn new(spec: &EnsembleSpec, z: Complex64, h: f64) -> Self {
        let g = spec.geometry();
        let (r_in, r_out) = (g.inner_radius(), g.outer_radius());
        let r0 = z.norm();
        if r0 < 2.0 * h && r_in == 0.0 && r0 + h <= r_out {
            return Bin::Disc { center: z, h };
        }
        Bin::Sector {
            r_lo: (r0 - h).max(r_in),
            r_hi: (r0 + h).min(r_out),
            theta: z.im.atan2(z.re),
            half_width: (h / r0.max(h)).min(PI),
        }
    }

    fn contains(&self, z: Complex64) -> bool {
        match *self {
            Bin::Disc { center, h } => (z - center).norm() < h,
            Bin::Sector { r_lo, r_hi, theta, half_width } => {
                let r = z.norm();
                r >= r_lo && r < r_hi && wrap_angle(z.im.atan2(z.re) - theta).abs() < half_width
            }
        }
    }

    fn area(&self) -> f64 {
        match *self {
            Bin::Disc { h, .. } => PI * h * h,
            Bin::Sector { r_lo, r_hi, half_width, .. } => half_width * (r_hi * r_hi - r_lo * r_lo),
        }
    }
}

fn bin_length(spec: &EnsembleSpec) -> f64 {
    let g = spec.geometry();
    if g.outer_radius().is_finite() {
        g.outer_radius() - g.inner_radius()
    } else {
        g.inner_radius()
    }
}

/// Monte Carlo estimate of `ρ_k` (`k ≤ 2`) from a Metropolis chain with
/// default options.
pub fn mc_correlation(
    spec: &EnsembleSpec,
    points: &[Complex64],
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    mc_correlation_with(spec, points, n_samples, seed, McOptions::default())
}

/// One-point densities are binned on an annular sector around the point.
/// Two-point densities bin the second point and use the exact conditional
/// density of the first given all other particles, normalized by tensor
/// quadrature.
pub fn mc_correlation_with(
    spec: &EnsembleSpec,
    points: &[Complex64],
    n_samples: usize,
    seed: u64,
    opts: McOptions,
) -> Result<McEstimate> {
    let k = points.len();
    if k == 0 || k > 2 || k > spec.n() {
        return Err(Error::TooLarge(format!(
            "Monte Carlo correlations support k in 1..=min(2, N), got k = {k}"
        )));
    }
    if n_samples == 0 || opts.batches == 0 || !(opts.bin_fraction > 0.0) {
        return Err(Error::InvalidParameter(
            "need at least one sample, one batch and a positive bin size".into(),
        ));
    }
    if points.iter().any(|z| !spec.contains(*z)) {
        return Ok(McEstimate {
            value: 0.0,
            stderr: 0.0,
            samples: n_samples,
            seed,
            half_bin_value: 0.0,
            acceptance: 0.0,
        });
    }
    let beta = spec.beta();
    let h = opts.bin_fraction * bin_length(spec);
    let target = points[k - 1];
    let bins = [Bin::new(spec, target, h), Bin::new(spec, target, 0.5 * h)];
    let areas = [bins[0].area(), bins[1].area()];
    let rule = if k == 2 { Some(tensor_rule(spec, 32, 64)) } else { None };
    let ln_w1 = spec.ln_weight(points[0]);

    // Conditional density of particle `j` at `points[0]` given the others.
    let conditional = |pts: &[Complex64], j: usize| -> f64 {
        let rule = rule.as_ref().expect("rule built for k = 2");
        let mut terms = Vec::with_capacity(rule.nodes.len());
        for (y, lw) in rule.nodes.iter().zip(&rule.ln_w) {
            let mut t = *lw;
            for (m, x) in pts.iter().enumerate() {
                if m != j {
                    t += beta * (y - x).norm().ln();
                }
            }
            terms.push(t);
        }
        let ln_c = log_sum_exp(&terms);
        let mut ln_num = ln_w1;
        for (m, x) in pts.iter().enumerate() {
            if m != j {
                ln_num += beta * (points[0] - x).norm().ln();
            }
        }
        (ln_num - ln_c).exp()
    };

    let mut chain = Chain::new(spec, seed)?;
    chain.burn_in((n_samples / 10).max(1));
    let batches = opts.batches.min(n_samples);
    let per_batch = n_samples / batches;
    let used = per_batch * batches;
    let mut batch_means = Vec::with_capacity(batches);
    let mut totals = [0.0; 2];
    for _ in 0..batches {
        let mut batch_sum = 0.0;
        for _ in 0..per_batch {
            chain.sweep();
            let pts = chain.points();
            let mut est = [0.0; 2];
            for (l, x) in pts.iter().enumerate() {
                for b in 0..2 {
                    if !bins[b].contains(*x) {
                        continue;
                    }
                    let hit = if k == 1 {
                        1.0
                    } else {
                        (0..pts.len()).filter(|&j| j != l).map(|j| conditional(pts, j)).sum()
                    };
                    est[b] += hit / areas[b];
                }
            }
            batch_sum += est[0];
            totals[0] += est[0];
            totals[1] += est[1];
        }
        batch_means.push(batch_sum / per_batch as f64);
    }
    let value = totals[0] / used as f64;
    let bf = batches as f64;
    let var = if batches > 1 {
        batch_means.iter().map(|m| (m - value).powi(2)).sum::<f64>() / (bf - 1.0)
    } else {
        0.0
    };
    // A chain with no hits still carries the resolution of a single hit.
    let stderr = (var / bf).sqrt().max(1.0 / (used as f64 * areas[0]));
    Ok(McEstimate {
        value,
        stderr,
        samples: used,
        seed,
        half_bin_value: totals[1] / used as f64,
        acceptance: chain.acceptance(),
    })
}

/// The ensemble obtained by inversion `z ↦ 1/z`: annulus `[1/v, 1/R]`,
/// profile `g(1/r)`, `Γ̃ = −Γ + M − N + 1 − 4/β` and the polynomial family
/// of the other side of the unit circle.
pub fn dual_spec(spec: &EnsembleSpec) -> Result<EnsembleSpec> {
    let g = spec.geometry();
    let (r_in, r_out) = (g.inner_radius(), g.outer_radius());
    let geometry = if r_in == 0.0 {
        AnnulusGeometry::exterior_disc(1.0 / r_out)?
    } else if r_out.is_infinite() {
        AnnulusGeometry::disc(1.0 / r_in)?
    } else {
        AnnulusGeometry::new(1.0 / r_out, 1.0 / r_in)?
    };
    let beta = spec.beta();
    let m = spec.m();
    let gamma = -spec.gamma() + m as f64 - spec.n() as f64 + 1.0 - 4.0 / beta;
    let family = match spec.family() {
        FamilySelector::ClassI => FamilySelector::ClassI,
        FamilySelector::ClassIIExteriorTypeA => FamilySelector::ClassIIInteriorTypeB,
        FamilySelector::ClassIIInteriorTypeB => FamilySelector::ClassIIExteriorTypeA,
    };
    EnsembleSpec::build(
        spec.n(),
        beta,
        geometry,
        spec.profile().inverted(),
        ChargeConfiguration::new(gamma, m),
        family,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DualityMethod {
    /// Kernel determinants (β = 2 only).
    Determinantal,
    BruteForce { rel_tol: f64 },
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityResidual {
    /// `|ρ(z) − Π|z̃_j|⁴ ρ̃(z̃)| / ρ(z)`
    pub residual: f64,
    /// Propagated standard error (Monte Carlo only).
    pub stderr: Option<f64>,
    pub direct: f64,
    pub dual: f64,
}

/// Compare `ρ` at `points` with the dual ensemble's correlation at the
/// inverted points, transported by the Jacobian `Π|z̃_j|⁴`.
pub fn duality_check(
    spec: &EnsembleSpec,
    points: &[Complex64],
    method: DualityMethod,
) -> Result<DualityResidual> {
    if points.iter().any(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::ParameterOutOfRange(
            "the origin has no image under inversion".into(),
        ));
    }
    let dual = dual_spec(spec)?;
    let inverted: Vec<Complex64> = points.iter().map(|z| 1.0 / z).collect();
    let jac: f64 = inverted.iter().map(|z| z.norm().powi(4)).product();
    let (rho, rho_dual, errs) = match method {
        DualityMethod::Determinantal => {
            let a = KernelEvaluator::build(spec)?.correlation(points)?.value;
            let b = KernelEvaluator::build(&dual)?.correlation(&inverted)?.value;
            (a, b, None)
        }
        DualityMethod::BruteForce { rel_tol } => (
            brute_force_correlation(spec, points, rel_tol)?,
            brute_force_correlation(&dual, &inverted, rel_tol)?,
            None,
        ),
        DualityMethod::MonteCarlo { samples, seed } => {
            let a = mc_correlation(spec, points, samples, seed)?;
            let b = mc_correlation(&dual, &inverted, samples, seed.wrapping_add(1))?;
            (a.value, b.value, Some((a.stderr, b.stderr)))
        }
    };
    if !(rho > 0.0) {
        return Err(Error::NonpositiveResult { value: rho });
    }
    let residual = (rho - jac * rho_dual).abs() / rho;
    let stderr = errs.map(|(a, b)| (a * a + (jac * b).powi(2)).sqrt() / rho);
    Ok(DualityResidual {
        residual,
        stderr,
        direct: rho,
        dual: rho_dual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::RadialProfile;

    fn disc(n: usize, beta: f64) -> EnsembleSpec {
        EnsembleSpec::build(
            n,
            beta,
            AnnulusGeometry::disc(1.0).unwrap(),
            RadialProfile::Flat,
            ChargeConfiguration::new(0.0, 0),
            FamilySelector::ClassI,
        )
        .unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_particle_density() {
        let rho = brute_force_correlation(&disc(1, 2.0), &[c(0.3, 0.1)], 1e-10).unwrap();
        assert!((rho - 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn two_particle_pair_density() {
        let rho = brute_force_correlation(&disc(2, 2.0), &[c(0.0, 0.0), c(0.5, 0.0)], 1e-10).unwrap();
        assert!((rho - 0.5 / (PI * PI)).abs() < 1e-12);
    }

    #[test]
    fn three_particle_density_matches_kernel() {
        let spec = disc(3, 2.0);
        let z = c(0.4, -0.2);
        let bf = brute_force_correlation(&spec, &[z], 1e-9).unwrap();
        let det = KernelEvaluator::build(&spec).unwrap().density(z).unwrap();
        assert!((bf - det).abs() < 1e-8 * det, "{bf} vs {det}");
    }

    #[test]
    fn size_limits() {
        assert!(matches!(
            brute_force_correlation(&disc(4, 2.0), &[c(0.1, 0.0)], 1e-8),
            Err(Error::TooLarge(_))
        ));
        assert!(matches!(
            brute_force_correlation(&disc(3, 2.0), &[], 1e-8),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn inversion_of_single_particle() {
        let spec = EnsembleSpec::build(
            1,
            2.0,
            AnnulusGeometry::new(1.0, 2.0).unwrap(),
            RadialProfile::Flat,
            ChargeConfiguration::new(0.0, 0),
            FamilySelector::ClassI,
        )
        .unwrap();
        let r = duality_check(&spec, &[c(1.5, 0.0)], DualityMethod::Determinantal).unwrap();
        assert!((r.direct - 1.0 / (3.0 * PI)).abs() < 1e-12);
        assert!(r.residual < 1e-10);
        let d = dual_spec(&spec).unwrap();
        assert_eq!(d.gamma(), -2.0);
    }

    #[test]
    fn mc_single_particle_at_origin() {
        let est = mc_correlation(&disc(1, 2.0), &[c(0.0, 0.0)], 200_000, 3).unwrap();
        assert!((est.value - 1.0 / PI).abs() < 3.0 * est.stderr, "{est:?}");
        let again = mc_correlation(&disc(1, 2.0), &[c(0.0, 0.0)], 200_000, 3).unwrap();
        assert_eq!(est, again);
    }
}
