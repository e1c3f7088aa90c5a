//! Determinant of a Hermitian positive semidefinite matrix through an
//! LDL^H factorization with symmetric diagonal pivoting.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianDet {
    pub det: f64,
    /// Ratio of the largest to the smallest pivot magnitude (infinite when a
    /// pivot vanishes).
    pub condition: f64,
}

/// `a` is row-major `k × k` and is assumed Hermitian; only the real parts of
/// the diagonal are read.
pub fn hermitian_det(a: &[Complex64], k: usize) -> Result<HermitianDet> {
    assert_eq!(a.len(), k * k, "matrix buffer has wrong size");
    if k == 0 {
        return Ok(HermitianDet {
            det: 1.0,
            condition: 1.0,
        });
    }
    let mut m: Vec<Complex64> = a.to_vec();
    let diag_product: f64 = (0..k).map(|i| a[i * k + i].re.abs()).product();
    let mut det = 1.0;
    let mut pmax: f64 = 0.0;
    let mut pmin = f64::INFINITY;
    let mut perm: Vec<usize> = (0..k).collect();
    for j in 0..k {
        let mut p = j;
        for i in j + 1..k {
            if m[perm[i] * k + perm[i]].re > m[perm[p] * k + perm[p]].re {
                p = i;
            }
        }
        perm.swap(j, p);
        let pj = perm[j];
        let d = m[pj * k + pj].re;
        det *= d;
        pmax = pmax.max(d.abs());
        pmin = pmin.min(d.abs());
        if d == 0.0 {
            det = 0.0;
            break;
        }
        for i in j + 1..k {
            let pi = perm[i];
            let l = m[pi * k + pj] / d;
            for c in j + 1..k {
                let pc = perm[c];
                let upd = l * m[pj * k + pc];
                m[pi * k + pc] -= upd;
            }
        }
    }
    if det < 0.0 {
        if det.abs() <= 1e-12 * diag_product {
            det = 0.0;
        } else {
            return Err(Error::NegativeDeterminant {
                value: det,
                scale: diag_product,
            });
        }
    }
    let condition = if pmin == 0.0 { f64::INFINITY } else { pmax / pmin };
    Ok(HermitianDet { det, condition })
}
