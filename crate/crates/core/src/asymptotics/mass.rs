use core::f64::consts::PI;

use alloc::format;

use super::{eval_limit_kernel, FormulaId, ScalingFrame};
use crate::quadrature::{integrate_to_infinity, Tolerance};
use crate::{Error, Result};

/// Integrated density of an edge limit kernel,
/// `∫ K(z, z) d²z ≈ (2πv²/N) ∫₀^∞ K(t, 0; t, 0) dt`.
///
/// Defined for the half-infinite edge kernels only.
pub fn limit_mass(id: FormulaId, frame: &ScalingFrame) -> Result<f64> {
    use FormulaId as F;
    if !matches!(
        id,
        F::DiscEdgeKappa | F::ExteriorEdgeKappaTilde | F::Kappa1 | F::Kappa2 | F::Kappa2Tilde | F::Kappa3
    ) {
        return Err(Error::InvalidParameter(format!(
            "{} has no finite limit mass",
            id.name()
        )));
    }
    let f = frame.validated()?;
    let mut failure = None;
    let integral = integrate_to_infinity(
        |t| match eval_limit_kernel(id, &f, t, 0.0, t, 0.0) {
            Ok(k) => k.re,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        Tolerance::rel(1e-12),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(2.0 * PI * f.v * f.v / f.n as f64 * integral?.value)
}
