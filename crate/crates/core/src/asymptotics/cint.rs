//! One-dimensional integrals over the continuous level index `c` that make up
//! every thin-annulus and near-circle limit kernel.

use num_complex::Complex64;
use num_traits::Float;

use crate::quadrature::{integrate, integrate_complex, Tolerance};
use crate::{Error, Result};

const OUTER_TOL: f64 = 1e-13;
const INNER_TOL: f64 = 1e-14;

/// Shape of the `c` integrand. In every case `a = c + gamma` with the
/// effective shift `gamma` from [`CParams`] and `S = t₁ + t₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CIntegralKind {
    /// `a e^{-aS} e^{icφ} / (1 - e^{-2aT})`; `T = ∞` is allowed.
    Universal,
    /// `e^{-aS} e^{icφ} / J(a)` with `J(a) = ∫₀^T e^{-2at} / (1 - e^{-2μ(u-t)}) dt`, `u > T`.
    OuterCharge,
    /// `e^{-aS} e^{icφ} / J(a)` with `J(a) = ∫₀^T e^{-2at} / (1 - e^{2μ(u-t)}) dt`, `u < 0`.
    InnerCharge,
    /// `e^{-aS} e^{icφ} / J(a)` with `J(a) = ∫₀^T e^{-2at} / (e^{-2μ(u-t)} - 1) dt`, `u < 0`.
    InnerVeryLarge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CParams {
    /// Effective shift added to `c`.
    pub gamma: f64,
    pub mu: f64,
    pub t_width: f64,
    pub u: f64,
}

/// The `t` integrals appearing in the denominators of non-universal kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerIntegralKind {
    /// `1 / (1 - e^{-2μ(u-t)})`
    Outer,
    /// `1 / (1 - e^{2μ(u-t)})`
    Inner,
    /// `1 / (e^{-2μ(u-t)} - 1)`
    InnerVeryLarge,
    /// `1 / (u - t)`
    OuterFixed,
    /// `1 / (t - u)`
    InnerFixed,
}

/// `∫₀^T e^{-2at} q(t) dt` for the denominator `q` selected by `kind`,
/// returned as `(shift, scaled)` with the integral equal to
/// `e^{shift} · scaled`. The shift keeps large `|a|T` from overflowing.
pub fn inner_t_integral(
    kind: InnerIntegralKind,
    a: f64,
    mu: f64,
    u: f64,
    t_width: f64,
) -> Result<(f64, f64)> {
    let shift = if a < 0.0 { -2.0 * a * t_width } else { 0.0 };
    let q = |t: f64| -> f64 {
        let d = u - t;
        match kind {
            InnerIntegralKind::Outer => 1.0 / (-(-2.0 * mu * d).exp_m1()),
            InnerIntegralKind::Inner => 1.0 / (-(2.0 * mu * d).exp_m1()),
            InnerIntegralKind::InnerVeryLarge => 1.0 / (-2.0 * mu * d).exp_m1(),
            InnerIntegralKind::OuterFixed => 1.0 / d,
            InnerIntegralKind::InnerFixed => -1.0 / d,
        }
    };
    let r = integrate(
        |t| (-2.0 * a * t - shift).exp() * q(t),
        0.0,
        t_width,
        Tolerance::rel(INNER_TOL),
    )?;
    if !(r.value > 0.0) {
        return Err(Error::NonpositiveResult { value: r.value });
    }
    Ok((shift, r.value))
}

/// `a e^{-aS} / (1 - e^{-2aT})`, finite through `a = 0` (value `1/(2T)`) and
/// for `T = ∞`.
pub(crate) fn universal_weight(a: f64, s: f64, t_width: f64) -> f64 {
    if t_width.is_infinite() {
        return if a > 0.0 { a * (-a * s).exp() } else { 0.0 };
    }
    let y = 2.0 * a * t_width;
    if y.abs() < 1e-3 {
        let y2 = y * y;
        let series = 1.0 + 0.5 * y + y2 / 12.0 - y2 * y2 / 720.0;
        series / (2.0 * t_width) * (-a * s).exp()
    } else if y > 0.0 {
        a / (-(-y).exp_m1()) * (-a * s).exp()
    } else {
        a / y.exp_m1() * (a * (2.0 * t_width - s)).exp()
    }
}

/// `∫_lo^hi f(c) e^{icφ} dc` for the integrand shape `kind`, with
/// `S = t_sum`.
pub fn c_integral(
    kind: CIntegralKind,
    p: &CParams,
    t_sum: f64,
    phi: f64,
    lo: f64,
    hi: f64,
) -> Result<Complex64> {
    if hi < lo {
        return Err(Error::ParameterOutOfRange(alloc::format!(
            "c bounds reversed: [{lo}, {hi}]"
        )));
    }
    let inner = match kind {
        CIntegralKind::Universal => None,
        CIntegralKind::OuterCharge => Some(InnerIntegralKind::Outer),
        CIntegralKind::InnerCharge => Some(InnerIntegralKind::Inner),
        CIntegralKind::InnerVeryLarge => Some(InnerIntegralKind::InnerVeryLarge),
    };
    let mut failure = None;
    let r = integrate_complex(
        |c| {
            let a = c + p.gamma;
            let phase = Complex64::from_polar(1.0, c * phi);
            match inner {
                None => phase * universal_weight(a, t_sum, p.t_width),
                Some(k) => match inner_t_integral(k, a, p.mu, p.u, p.t_width) {
                    Ok((shift, j)) => phase * ((-a * t_sum - shift).exp() / j),
                    Err(e) => {
                        failure.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    }
                },
            }
        },
        lo,
        hi,
        Tolerance::rel(OUTER_TOL),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?.value)
}

/// `∫_lo^hi x e^{-xτ} dx` in closed form, switching to the Taylor series in
/// `τ` when the closed form would cancel.
pub(crate) fn x_exp_integral(tau: Complex64, lo: f64, hi: f64) -> Complex64 {
    let scale = lo.abs().max(hi.abs()).max(1.0);
    if tau.norm() * scale < 0.5 {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut coef = Complex64::new(1.0, 0.0);
        let mut plo = lo * lo;
        let mut phi = hi * hi;
        for k in 0..60 {
            let term = coef * ((phi - plo) / (k as f64 + 2.0));
            sum += term;
            if term.norm() <= 1e-18 * sum.norm() && k > 2 {
                break;
            }
            coef = coef * (-tau) / (k as f64 + 1.0);
            plo *= lo;
            phi *= hi;
        }
        sum
    } else {
        let anti = |x: f64| -> Complex64 {
            let e = (-tau * x).exp();
            if e.norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            -e * (x / tau + 1.0 / (tau * tau))
        };
        anti(hi) - anti(lo)
    }
}
