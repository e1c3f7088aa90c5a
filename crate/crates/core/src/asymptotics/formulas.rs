use core::f64::consts::PI;

use alloc::format;
use num_complex::Complex64;
use num_traits::Float;

use super::cint::{
    c_integral, inner_t_integral, x_exp_integral, CIntegralKind, CParams, InnerIntegralKind,
};
use super::{FormulaId, FrameKind, ScalingFrame};
use crate::logspace::phase_quotient;
use crate::{Error, Result};

const EDGE_SLACK: f64 = 1e-12;

fn out_of_range(msg: alloc::string::String) -> Error {
    Error::ParameterOutOfRange(msg)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Point {
    t1: f64,
    phi1: f64,
    t2: f64,
    phi2: f64,
}

impl Point {
    fn t_sum(&self) -> f64 {
        self.t1 + self.t2
    }

    fn phi(&self) -> f64 {
        self.phi1 - self.phi2
    }

    /// `s_j = u - t_j + iφ_j`
    fn s(&self, u: f64) -> (Complex64, Complex64) {
        (c(u - self.t1, self.phi1), c(u - self.t2, self.phi2))
    }
}

fn edge_prefactor(f: &ScalingFrame) -> f64 {
    let n = f.n as f64;
    match f.kind {
        FrameKind::NearUnitCircleOuter | FrameKind::NearUnitCircleInner => n * n / PI,
        _ => n * n / (PI * f.v * f.v),
    }
}

fn check_t_nonnegative(p: &Point) -> Result<()> {
    if p.t1 < -EDGE_SLACK || p.t2 < -EDGE_SLACK {
        return Err(out_of_range(format!(
            "scaled distances must be >= 0, got {} and {}",
            p.t1, p.t2
        )));
    }
    Ok(())
}

fn check_t_in_width(p: &Point, t_width: f64) -> Result<()> {
    check_t_nonnegative(p)?;
    let hi = t_width * (1.0 + EDGE_SLACK) + EDGE_SLACK;
    if p.t1 > hi || p.t2 > hi {
        return Err(out_of_range(format!(
            "scaled distances must be <= T = {t_width}, got {} and {}",
            p.t1, p.t2
        )));
    }
    Ok(())
}

fn check_phi_window(p: &Point, mu: f64) -> Result<()> {
    let lim = 2.0 * PI / mu * (1.0 + EDGE_SLACK);
    if p.phi1.abs() > lim || p.phi2.abs() > lim {
        return Err(out_of_range(format!(
            "scaled angles must lie in [-2pi/mu, 2pi/mu] = [-{lim}, {lim}]"
        )));
    }
    Ok(())
}

fn check_gamma(id: FormulaId, gamma: f64, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(out_of_range(format!(
            "{} is not defined for gamma = {gamma}",
            id.name()
        )))
    }
}

fn check_mu(id: FormulaId, mu: f64, large: bool) -> Result<()> {
    let ok = if large { mu >= 1.0 } else { mu > 0.0 && mu <= 1.0 };
    if ok {
        Ok(())
    } else {
        Err(out_of_range(format!(
            "{} needs {}, got mu = {mu}",
            id.name(),
            if large { "mu >= 1" } else { "0 < mu <= 1" }
        )))
    }
}

/// `e^{iMψ} = 1` within round-off.
fn psi_is_resonant(f: &ScalingFrame) -> bool {
    (Complex64::from_polar(1.0, f.m as f64 * f.psi) - 1.0).norm() < 1e-9
}

fn params(f: &ScalingFrame, gamma: f64) -> CParams {
    CParams {
        gamma,
        mu: f.mu,
        t_width: f.t_width,
        u: f.u,
    }
}

/// `U = ∫_lo^hi (c+γ) e^{-(c+γ)S} e^{icφ} / (1 - e^{-2(c+γ)T}) dc`
fn universal(f: &ScalingFrame, gamma: f64, p: &Point, lo: f64, hi: f64) -> Result<Complex64> {
    c_integral(CIntegralKind::Universal, &params(f, gamma), p.t_sum(), p.phi(), lo, hi)
}

/// `e^{-γS} / ∫₀^T e^{-2γt} q(t) dt` evaluated without overflow.
fn fixed_m_ratio(kind: InnerIntegralKind, gamma: f64, f: &ScalingFrame, t_sum: f64) -> Result<f64> {
    let (shift, j) = inner_t_integral(kind, gamma, 0.0, f.u, f.t_width)?;
    Ok((-gamma * t_sum - shift).exp() / j)
}

/// `∫₀^1 (c+γ) e^{-(c+γ)S} e^{icφ} dc` over the part of `[0, 1]` where
/// `c + γ` lies in `[x_lo, x_hi]`, via the closed form in `x = c + γ`.
fn edge_integral(gamma: f64, p: &Point, x_lo: f64, x_hi: f64) -> Complex64 {
    let phi = p.phi();
    let tau = c(p.t_sum(), -phi);
    Complex64::from_polar(1.0, -gamma * phi) * x_exp_integral(tau, x_lo, x_hi)
}

/// `-∫ (c+γ) e^{(c+γ)S} e^{icφ} dc` with `S` measured from the inner edge.
fn inner_edge_integral(gamma: f64, p: &Point, x_lo: f64, x_hi: f64) -> Complex64 {
    let phi = p.phi();
    let tau = c(-p.t_sum(), -phi);
    -Complex64::from_polar(1.0, -gamma * phi) * x_exp_integral(tau, x_lo, x_hi)
}

fn one_minus_exp(z: Complex64) -> Complex64 {
    -crate::logspace::expm1_complex(z)
}

/// Evaluate limit kernel `id` at the scaled points `(t₁, φ₁)`, `(t₂, φ₂)`.
pub fn eval_limit_kernel(
    id: FormulaId,
    frame: &ScalingFrame,
    t1: f64,
    phi1: f64,
    t2: f64,
    phi2: f64,
) -> Result<Complex64> {
    let f = frame.validated()?;
    if !id.accepts(f.kind) {
        return Err(Error::FrameMismatch {
            formula: id.name(),
            frame: f.kind.name(),
        });
    }
    if ![t1, phi1, t2, phi2].iter().all(|x| x.is_finite()) {
        return Err(out_of_range("scaled coordinates must be finite".into()));
    }
    let p = Point { t1, phi1, t2, phi2 };
    let nf = f.n as f64;
    let n2 = nf * nf;
    let pre = edge_prefactor(&f);
    let gamma = f.gamma;
    let mu = f.mu;
    let t_width = f.t_width;
    let u = f.u;
    let phi = p.phi();

    use FormulaId as F;
    let value = match id {
        F::DiscEdgeKappa | F::Kappa1 => {
            check_gamma(id, gamma, gamma >= 0.0)?;
            check_t_nonnegative(&p)?;
            pre * edge_integral(gamma, &p, gamma, 1.0 + gamma)
        }
        F::Kappa2 => {
            check_gamma(id, gamma, gamma > -1.0 && gamma < 0.0)?;
            check_t_nonnegative(&p)?;
            pre * edge_integral(gamma, &p, 0.0, 1.0 + gamma)
        }
        F::Kappa2Tilde => {
            check_gamma(id, gamma, gamma > -1.0 && gamma < 0.0)?;
            check_t_nonnegative(&p)?;
            pre * inner_edge_integral(gamma, &p, gamma, 0.0)
        }
        F::Kappa3 | F::ExteriorEdgeKappaTilde => {
            check_gamma(id, gamma, gamma <= -1.0)?;
            check_t_nonnegative(&p)?;
            pre * inner_edge_integral(gamma, &p, gamma, 1.0 + gamma)
        }
        F::DiscBulk => {
            check_t_nonnegative(&p)?;
            let big_gamma = gamma * nf;
            let zeta = Complex64::from_polar(t1 * t2 / (f.v * f.v), phi);
            if zeta.norm() >= 1.0 {
                return Err(out_of_range(format!(
                    "disc bulk kernel needs |z1 z2| < v^2, got |zeta| = {}",
                    zeta.norm()
                )));
            }
            let one_m = 1.0 - zeta;
            let modulus = if big_gamma == 0.0 { 1.0 } else { zeta.norm().powf(big_gamma) };
            (1.0 / one_m + big_gamma) * modulus / (PI * f.v * f.v * one_m)
        }
        F::ExteriorBulk => {
            check_t_nonnegative(&p)?;
            let dual_gamma = -nf - gamma * nf;
            let eta = Complex64::from_polar(t1 * t2 / (f.v * f.v), phi);
            if eta.norm() <= 1.0 {
                return Err(out_of_range(format!(
                    "exterior bulk kernel needs |z1 z2| > R^2, got |eta| = {}",
                    eta.norm()
                )));
            }
            let m1 = eta - 1.0;
            let modulus = eta.norm().powf(-dual_gamma);
            let phase = Complex64::from_polar(1.0, wrap_n_phase(f.n, phi));
            (1.0 / m1 + dual_gamma) * phase * modulus / (PI * f.v * f.v * m1)
        }
        F::ThinAnnulusUniversal | F::UniversalMFixed | F::InteriorUniversal => {
            check_t_in_width(&p, t_width)?;
            pre * universal(&f, gamma, &p, 0.0, 1.0)?
        }
        F::SineKernel => pre / (2.0 * t_width) * phase_quotient(1.0, 0.0, phi),
        F::NonUniversalMFixed | F::MLargeK1MuSmall | F::MLargeK2MuSmall
        | F::NonUniversalMFixedK1 | F::NonUniversalMFixedK2 => {
            check_t_in_width(&p, t_width)?;
            let resonant = psi_is_resonant(&f);
            if id == F::NonUniversalMFixed && !resonant {
                return Err(out_of_range(format!(
                    "{} needs e^(iM psi) = 1 (M = {}, psi = {})",
                    id.name(),
                    f.m,
                    f.psi
                )));
            }
            let (s1, s2) = p.s(u);
            let ss = s1.norm() * s2.norm();
            let want_k1 = !matches!(id, F::MLargeK2MuSmall | F::NonUniversalMFixedK2);
            let want_k2 = !matches!(id, F::MLargeK1MuSmall | F::NonUniversalMFixedK1);
            let mut total = c(0.0, 0.0);
            if want_k1 {
                let ratio = fixed_m_ratio(InnerIntegralKind::OuterFixed, gamma, &f, p.t_sum())?;
                let resonant_branch = resonant || id == F::MLargeK1MuSmall;
                total += if resonant_branch {
                    c(n2 * ratio / (PI * ss), 0.0)
                } else {
                    let mf = f.m as f64;
                    c(mf * mf * ratio / (2.0 * PI * (1.0 - (mf * f.psi).cos())), 0.0)
                };
            }
            if want_k2 {
                let uu = universal(&f, gamma, &p, 0.0, 1.0)?;
                let resonant_branch = resonant || id == F::MLargeK2MuSmall;
                total += if resonant_branch {
                    s1 * s2.conj() * uu * (n2 / (PI * ss))
                } else {
                    uu * (n2 / PI)
                };
            }
            total
        }
        F::OneDimMFixed => {
            let s1 = c(u, phi1);
            let s2 = c(u, phi2);
            let ss = s1.norm() * s2.norm();
            (u + s1 * s2.conj() * 0.5 * phase_quotient(1.0, 0.0, phi)) * (n2 / (PI * t_width * ss))
        }
        F::MLargeUniversal | F::MLargeK1 | F::MLargeK2 => {
            check_mu(id, mu, false)?;
            check_t_in_width(&p, t_width)?;
            let shifted = gamma - mu;
            let near = f.kind == FrameKind::NearUnitCircleOuter;
            if near && id != F::MLargeUniversal {
                check_phi_window(&p, mu)?;
            }
            match (id, near) {
                (F::MLargeUniversal, _) => pre * universal(&f, shifted, &p, 0.0, 1.0)?,
                (F::MLargeK1, false) => pre * universal(&f, shifted, &p, 0.0, mu)?,
                (F::MLargeK2, false) => pre * universal(&f, shifted, &p, mu, 1.0)?,
                (F::MLargeK1, true) => {
                    let (s1, s2) = p.s(u);
                    let den = one_minus_exp(-s1 * mu).norm() * one_minus_exp(-s2 * mu).norm();
                    let integral = c_integral(
                        CIntegralKind::OuterCharge,
                        &params(&f, shifted),
                        p.t_sum(),
                        phi,
                        0.0,
                        mu,
                    )?;
                    integral * (n2 / (2.0 * PI * den))
                }
                _ => {
                    let (s1, s2) = p.s(u);
                    let a1 = one_minus_exp(-s1 * mu);
                    let a2 = one_minus_exp(-s2.conj() * mu);
                    let den = a1.norm() * a2.norm();
                    a1 * a2 * universal(&f, shifted, &p, mu, 1.0)? * (n2 / (PI * den))
                }
            }
        }
        F::MLargeK1ULarge | F::MLargeK2ULarge => {
            check_mu(id, mu, false)?;
            check_t_in_width(&p, t_width)?;
            let (lo, hi) = if id == F::MLargeK1ULarge { (0.0, mu) } else { (mu, 1.0) };
            pre * universal(&f, gamma - mu, &p, lo, hi)?
        }
        F::MLargeK1TSmall | F::MLargeK2TSmall | F::VeryLargeMTSmall => {
            check_mu(id, mu, id == F::VeryLargeMTSmall)?;
            check_phi_window(&p, mu)?;
            let b1 = one_minus_exp(-c(u, phi1) * mu);
            let b2 = one_minus_exp(-c(u, phi2) * mu);
            let den = b1.norm() * b2.norm();
            let base = n2 / (2.0 * PI * t_width * den);
            let charge = -(-2.0 * mu * u).exp_m1();
            match id {
                F::MLargeK1TSmall => phase_quotient(mu, 0.0, phi) * (base * charge),
                F::MLargeK2TSmall => b1 * b2.conj() * phase_quotient(1.0, mu, phi) * base,
                _ => phase_quotient(1.0, 0.0, phi) * (base * charge),
            }
        }
        F::VeryLargeM => {
            check_mu(id, mu, true)?;
            check_t_in_width(&p, t_width)?;
            check_phi_window(&p, mu)?;
            let (s1, s2) = p.s(u);
            let den = one_minus_exp(-s1 * mu).norm() * one_minus_exp(-s2 * mu).norm();
            let integral = c_integral(
                CIntegralKind::OuterCharge,
                &params(&f, gamma - mu),
                p.t_sum(),
                phi,
                0.0,
                1.0,
            )?;
            integral * (n2 / (2.0 * PI * den))
        }
        F::InteriorNonUniversalMFixed => {
            check_t_in_width(&p, t_width)?;
            if !psi_is_resonant(&f) {
                return Err(out_of_range(format!(
                    "{} needs e^(iM psi) = 1 (M = {}, psi = {})",
                    id.name(),
                    f.m,
                    f.psi
                )));
            }
            let (s1, s2) = p.s(u);
            let ss = s1.norm() * s2.norm();
            let ratio =
                fixed_m_ratio(InnerIntegralKind::InnerFixed, 1.0 + gamma, &f, p.t_sum())?;
            let uu = universal(&f, gamma, &p, 0.0, 1.0)?;
            (Complex64::from_polar(ratio, phi) + s1 * s2.conj() * uu) * (n2 / (PI * ss))
        }
        F::InteriorMLargeK1 | F::InteriorMLargeK2 => {
            check_mu(id, mu, false)?;
            check_t_in_width(&p, t_width)?;
            check_phi_window(&p, mu)?;
            let (s1, s2) = p.s(u);
            let a1 = one_minus_exp(s1 * mu);
            let a2 = one_minus_exp(s2.conj() * mu);
            let den = a1.norm() * a2.norm();
            if id == F::InteriorMLargeK1 {
                a1 * a2 * universal(&f, gamma, &p, 0.0, 1.0 - mu)? * (n2 / (PI * den))
            } else {
                let integral = c_integral(
                    CIntegralKind::InnerCharge,
                    &params(&f, gamma),
                    p.t_sum(),
                    phi,
                    1.0 - mu,
                    1.0,
                )?;
                integral * (n2 / (2.0 * PI * den))
            }
        }
        F::InteriorVeryLargeM => {
            check_mu(id, mu, true)?;
            check_t_in_width(&p, t_width)?;
            check_phi_window(&p, mu)?;
            let (s1, s2) = p.s(u);
            let den = one_minus_exp(-s1 * mu).norm() * one_minus_exp(-s2 * mu).norm();
            let integral = c_integral(
                CIntegralKind::InnerVeryLarge,
                &params(&f, gamma - mu),
                p.t_sum(),
                phi,
                0.0,
                1.0,
            )?;
            integral * (n2 / (2.0 * PI * den))
        }
    };
    Ok(value)
}

/// `N(θ₁ - θ₂)` reduced mod 2π before it reaches `sin`/`cos`.
fn wrap_n_phase(n: usize, phi: f64) -> f64 {
    crate::logspace::wrap_angle(n as f64 * crate::logspace::wrap_angle(phi))
}

/// The `T → 0` one-dimensional limit of `id` on the circle. Accepts either a
/// one-dimensional formula or the kernel it is the limit of.
pub fn one_dim_limit(id: FormulaId, frame: &ScalingFrame, phi1: f64, phi2: f64) -> Result<Complex64> {
    use FormulaId as F;
    let target = match id {
        F::SineKernel | F::ThinAnnulusUniversal => F::SineKernel,
        F::OneDimMFixed | F::NonUniversalMFixed => F::OneDimMFixed,
        F::MLargeK1TSmall | F::MLargeK1 => F::MLargeK1TSmall,
        F::MLargeK2TSmall | F::MLargeK2 => F::MLargeK2TSmall,
        F::VeryLargeMTSmall | F::VeryLargeM => F::VeryLargeMTSmall,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "{} has no one-dimensional limit in the catalog",
                id.name()
            )))
        }
    };
    eval_limit_kernel(target, frame, 0.0, phi1, 0.0, phi2)
}
