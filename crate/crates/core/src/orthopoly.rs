//! Polynomial families orthogonal with respect to the β = 2 weights, their
//! circle norms and their squared norms `h_n` over the annulus.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::gas::{EnsembleSpec, FamilySelector};
use crate::logspace::{ln_expm1, ln_one_minus_exp_neg, power_minus_one, LogPolar};
use crate::quadrature::{integrate, periodic_trapezoid, Tolerance};
use crate::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolynomialFamily {
    /// `p_n(z) = z^n`.
    Monomial,
    /// `z^n` for `n < M`, `z^{n−M}(z^M − 1)` for `n ≥ M`.
    TypeA { m: u32 },
    /// `z^n(1 − z^M)` for `n < N − M`, `z^n` for `N − M ≤ n < N`.
    TypeB { m: u32, n: usize },
}

impl PolynomialFamily {
    pub fn for_spec(spec: &EnsembleSpec) -> Self {
        match spec.family() {
            FamilySelector::ClassI => PolynomialFamily::Monomial,
            FamilySelector::ClassIIExteriorTypeA => PolynomialFamily::TypeA { m: spec.m() },
            FamilySelector::ClassIIInteriorTypeB => PolynomialFamily::TypeB {
                m: spec.m(),
                n: spec.n(),
            },
        }
    }

    /// Index where the two branches of a class II family meet; `None` when
    /// the family has a single branch for the given `N`.
    pub fn split_index(&self, n_particles: usize) -> Option<usize> {
        match *self {
            PolynomialFamily::Monomial => None,
            PolynomialFamily::TypeA { m } => ((m as usize) < n_particles).then_some(m as usize),
            PolynomialFamily::TypeB { m, n } => ((m as usize) < n).then(|| n - m as usize),
        }
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if let PolynomialFamily::TypeB { n: len, .. } = *self {
            if n >= len {
                return Err(Error::IndexOutOfRange { index: n, len });
            }
        }
        Ok(())
    }

    /// `p_n(z)` in log-polar form from `ln|z|` and `arg z`.
    pub fn ln_eval(&self, n: usize, ln_r: f64, theta: f64) -> Result<LogPolar> {
        self.check_index(n)?;
        let mono = |k: usize| LogPolar::new(crate::logspace::scaled_ln(k as f64, ln_r), k as f64 * theta);
        Ok(match *self {
            PolynomialFamily::Monomial => mono(n),
            PolynomialFamily::TypeA { m } => {
                let m_us = m as usize;
                if n < m_us {
                    mono(n)
                } else {
                    mono(n - m_us).mul(power_minus_one(ln_r, theta, m))
                }
            }
            PolynomialFamily::TypeB { m, n: len } => {
                let m_us = m as usize;
                if m_us < len && n < len - m_us {
                    mono(n).mul(power_minus_one(ln_r, theta, m).neg())
                } else {
                    mono(n)
                }
            }
        })
    }

    pub fn eval(&self, n: usize, z: Complex64) -> Result<Complex64> {
        self.check_index(n)?;
        let zn = z.powu(n as u32);
        Ok(match *self {
            PolynomialFamily::Monomial => zn,
            PolynomialFamily::TypeA { m } => {
                if n < m as usize {
                    zn
                } else {
                    z.powu((n - m as usize) as u32) * (z.powu(m) - 1.0)
                }
            }
            PolynomialFamily::TypeB { m, n: len } => {
                if (m as usize) < len && n < len - m as usize {
                    zn * (1.0 - z.powu(m))
                } else {
                    zn
                }
            }
        })
    }

    /// `|D(z)|²` for the family's charge factor (1 for monomials). Type A
    /// uses `D = 1/(1 − z^{−M})`; Type B uses the same expression.
    fn ln_d_squared(&self, ln_r: f64, theta: f64) -> f64 {
        let m = match *self {
            PolynomialFamily::Monomial => return 0.0,
            PolynomialFamily::TypeA { m } | PolynomialFamily::TypeB { m, .. } => m,
        };
        // |1 − z^{−M}| = |z^M − 1| / r^M
        2.0 * (m as f64 * ln_r - power_minus_one(ln_r, theta, m).ln_mod)
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        let ok = match self {
            PolynomialFamily::Monomial => r > 0.0,
            PolynomialFamily::TypeA { .. } => r > 1.0,
            PolynomialFamily::TypeB { .. } => r > 0.0 && r < 1.0,
        };
        if ok && r.is_finite() {
            Ok(())
        } else {
            Err(Error::RadiusOutOfRange { radius: r })
        }
    }

    /// Closed-form circle norm `∫₀^{2π} |D|² |p_n|² dθ` in log form.
    pub fn ln_circle_norm(&self, n: usize, r: f64) -> Result<f64> {
        self.check_index(n)?;
        self.check_radius(r)?;
        let ln_r = r.ln();
        let base = LN_2PI + 2.0 * n as f64 * ln_r;
        Ok(match *self {
            PolynomialFamily::Monomial => base,
            PolynomialFamily::TypeA { m } => {
                if n < m as usize {
                    // 2π r^{2n} / (1 − r^{−2M})
                    base - ln_one_minus_exp_neg(2.0 * m as f64 * ln_r)
                } else {
                    base
                }
            }
            PolynomialFamily::TypeB { m, n: len } => {
                if (m as usize) < len && n < len - m as usize {
                    base + 2.0 * m as f64 * ln_r
                } else {
                    // 2π r^{2n} / (r^{−2M} − 1)
                    base - ln_expm1(-2.0 * m as f64 * ln_r)
                }
            }
        })
    }

    pub fn circle_norm(&self, n: usize, r: f64) -> Result<f64> {
        Ok(self.ln_circle_norm(n, r)?.exp())
    }
}

/// `I_{mn} = ∫₀^{2π} |D(z)|² conj(p_m(z)) p_n(z) dθ` on `|z| = r` by the
/// periodic trapezoid rule.
pub fn circle_orthogonality_check(
    family: &PolynomialFamily,
    r: f64,
    m: usize,
    n: usize,
    angular_tol: f64,
) -> Result<Complex64> {
    family.check_radius(r)?;
    family.check_index(m)?;
    family.check_index(n)?;
    let ln_r = r.ln();
    let charges = match *family {
        PolynomialFamily::Monomial => 0,
        PolynomialFamily::TypeA { m } | PolynomialFamily::TypeB { m, .. } => m as usize,
    };
    let min_nodes = 4 * (m + n + charges) + 32;
    periodic_trapezoid(
        |th| {
            let pm = family.ln_eval(m, ln_r, th).unwrap_or(LogPolar::ZERO);
            let pn = family.ln_eval(n, ln_r, th).unwrap_or(LogPolar::ZERO);
            let d2 = family.ln_d_squared(ln_r, th);
            LogPolar::new(pm.ln_mod + pn.ln_mod + d2, pn.arg - pm.arg).to_complex()
        },
        min_nodes,
        angular_tol,
        1 << 20,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    ClosedForm,
    Quadrature,
}

impl NormMethod {
    pub fn name(self) -> &'static str {
        match self {
            NormMethod::ClosedForm => "closed-form",
            NormMethod::Quadrature => "quadrature",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormValue {
    pub h: f64,
    pub ln_h: f64,
}

impl NormValue {
    fn from_ln(ln_h: f64) -> Self {
        NormValue {
            h: ln_h.exp(),
            ln_h,
        }
    }
}

/// Squared norms `h_0 … h_{N−1}`, kept in log form.
#[derive(Debug, Clone, PartialEq)]
pub struct NormTable {
    ln_h: Vec<f64>,
    methods: Vec<NormMethod>,
}

impl NormTable {
    /// Closed forms where they exist, quadrature at `rel_tol` otherwise.
    pub fn build(spec: &EnsembleSpec, rel_tol: f64) -> Result<Self> {
        let mut ln_h = Vec::with_capacity(spec.n());
        let mut methods = Vec::with_capacity(spec.n());
        for n in 0..spec.n() {
            match ln_norm_closed(spec, n) {
                Ok(v) => {
                    ln_h.push(v);
                    methods.push(NormMethod::ClosedForm);
                }
                Err(Error::NoClosedForm(_)) => {
                    ln_h.push(norm_quadrature(spec, n, rel_tol)?.ln_h);
                    methods.push(NormMethod::Quadrature);
                }
                Err(e) => return Err(e),
            }
        }
        Ok(NormTable { ln_h, methods })
    }

    pub fn len(&self) -> usize {
        self.ln_h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_h.is_empty()
    }

    pub fn h(&self, n: usize) -> f64 {
        self.ln_h[n].exp()
    }

    pub fn ln_h(&self, n: usize) -> f64 {
        self.ln_h[n]
    }

    pub fn method(&self, n: usize) -> NormMethod {
        self.methods[n]
    }
}

fn require_beta_two(spec: &EnsembleSpec) -> Result<()> {
    if spec.beta() != 2.0 {
        return Err(Error::BetaMismatch { beta: spec.beta() });
    }
    Ok(())
}

/// Exponent `k` such that the circle norm of `p_n` is `2π r^k`, when it is a
/// pure power; this is also the exponent entering the closed-form radial
/// integral (together with the `−2M` of the class II weight).
fn pure_power_exponent(family: &PolynomialFamily, n: usize) -> Option<f64> {
    let nf = n as f64;
    match *family {
        PolynomialFamily::Monomial => Some(2.0 * nf),
        PolynomialFamily::TypeA { m } => (n >= m as usize).then_some(2.0 * nf - 2.0 * m as f64),
        PolynomialFamily::TypeB { m, n: len } => {
            ((m as usize) < len && n < len - m as usize).then_some(2.0 * nf)
        }
    }
}

/// `ln ∫_R^v r^b dr`, with `R = 0` or `v = ∞` allowed when convergent.
fn ln_power_integral(b: f64, r_in: f64, r_out: f64) -> Result<f64> {
    let c = b + 1.0;
    if c == 0.0 {
        if r_in == 0.0 || r_out.is_infinite() {
            return Err(Error::InvalidParameter("divergent radial integral".into()));
        }
        return Ok((r_out.ln() - r_in.ln()).ln());
    }
    if c > 0.0 {
        if r_out.is_infinite() {
            return Err(Error::InvalidParameter("divergent radial integral at infinity".into()));
        }
        let lv = r_out.ln();
        if r_in == 0.0 {
            return Ok(c * lv - c.ln());
        }
        Ok(c * lv + (-(c * (r_in.ln() - lv)).exp_m1()).ln() - c.ln())
    } else {
        if r_in == 0.0 {
            return Err(Error::InvalidParameter("divergent radial integral at the origin".into()));
        }
        let lr = r_in.ln();
        if r_out.is_infinite() {
            return Ok(c * lr - (-c).ln());
        }
        Ok(c * lr + (-(c * (r_out.ln() - lr)).exp_m1()).ln() - (-c).ln())
    }
}

/// `ln h_n` from the closed-form radial antiderivative.
pub fn ln_norm_closed(spec: &EnsembleSpec, n: usize) -> Result<f64> {
    require_beta_two(spec)?;
    let family = PolynomialFamily::for_spec(spec);
    family.check_index(n)?;
    let alpha = spec.profile().power_exponent().ok_or_else(|| {
        Error::NoClosedForm("tabulated profiles have no closed-form norms".into())
    })?;
    let k = pure_power_exponent(&family, n).ok_or_else(|| {
        Error::NoClosedForm(format!(
            "norm of p_{n} involves the charge factor and has no elementary antiderivative"
        ))
    })?;
    let b = 2.0 * spec.gamma() + 1.0 + alpha + k;
    let g = spec.geometry();
    Ok(ln_power_integral(b, g.inner_radius(), g.outer_radius())? + LN_2PI)
}

pub fn norm_closed(spec: &EnsembleSpec, n: usize) -> Result<f64> {
    Ok(ln_norm_closed(spec, n)?.exp())
}

/// `ln` of the radial integrand of `h_n`: `ln g + (2Γ − 2M + 1) ln r + ln c_n(r)`
/// where `c_n` is the circle norm.
fn ln_radial_integrand(spec: &EnsembleSpec, family: &PolynomialFamily, n: usize, r: f64) -> f64 {
    let lg = match spec.profile().ln_eval(r) {
        Ok(v) => v,
        Err(_) => return f64::NEG_INFINITY,
    };
    let ln_r = r.ln();
    let ex = 2.0 * (spec.gamma() - spec.m() as f64) + 1.0;
    let lc = match *family {
        PolynomialFamily::Monomial => LN_2PI + crate::logspace::scaled_ln(2.0 * n as f64, ln_r),
        _ => match family.ln_circle_norm(n, r) {
            Ok(v) => v,
            Err(_) => return f64::NEG_INFINITY,
        },
    };
    let v = lg + crate::logspace::scaled_ln(ex, ln_r) + lc;
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// `h_n` by adaptive quadrature of the radial integral, scaled by the
/// largest sampled integrand value so that large `n` cannot overflow.
pub fn norm_quadrature(spec: &EnsembleSpec, n: usize, rel_tol: f64) -> Result<NormValue> {
    require_beta_two(spec)?;
    if !(rel_tol >= 1e-14) {
        return Err(Error::InvalidParameter(format!(
            "relative tolerance must be at least 1e-14, got {rel_tol}"
        )));
    }
    let family = PolynomialFamily::for_spec(spec);
    family.check_index(n)?;
    let g = spec.geometry();
    let (r_in, r_out) = (g.inner_radius(), g.outer_radius());
    // Work in a variable s on [0, 1]: r = R + s (v − R), or r = R / s when
    // the annulus is unbounded.
    let infinite = r_out.is_infinite();
    let ln_f = |s: f64| -> f64 {
        if infinite {
            if s <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let r = r_in / s;
            ln_radial_integrand(spec, &family, n, r) + r_in.ln() - 2.0 * s.ln()
        } else {
            let r = r_in + s * (r_out - r_in);
            if r <= 0.0 {
                return f64::NEG_INFINITY;
            }
            ln_radial_integrand(spec, &family, n, r) + (r_out - r_in).ln()
        }
    };
    let mut shift = f64::NEG_INFINITY;
    for j in 0..=128 {
        let s = (j as f64 / 128.0).clamp(1e-9, 1.0);
        let v = ln_f(s);
        if v.is_finite() && v > shift {
            shift = v;
        }
    }
    if !shift.is_finite() {
        return Err(Error::NonpositiveResult { value: 0.0 });
    }
    let res = integrate(
        |s| {
            let v = ln_f(s) - shift;
            if v == f64::NEG_INFINITY {
                0.0
            } else {
                v.exp()
            }
        },
        0.0,
        1.0,
        Tolerance::rel(rel_tol),
    )?;
    if !(res.value > 0.0) || !res.value.is_finite() {
        return Err(Error::NonpositiveResult { value: res.value });
    }
    Ok(NormValue::from_ln(res.value.ln() + shift))
}
