//! Dense complex linear algebra helpers shared by the operator and
//! compression modules.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// Dimension above which operator norms switch from dense SVD to power
/// iteration.
pub(crate) const DENSE_SVD_LIMIT: usize = 3000;

pub(crate) fn check_finite(m: &DMatrix<C64>) -> Result<()> {
    if m.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical("matrix contains non-finite entries".into()))
    }
}

/// Largest singular value of a dense complex matrix.
pub(crate) fn spectral_norm(m: &DMatrix<C64>) -> Result<f64> {
    check_finite(m)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    if m.nrows().max(m.ncols()) <= DENSE_SVD_LIMIT {
        let svd = m
            .clone()
            .try_svd(false, false, 1e-14, 100_000)
            .ok_or_else(|| Error::Numerical("singular value iteration failed".into()))?;
        Ok(svd.singular_values.iter().cloned().fold(0.0, f64::max))
    } else {
        power_sigma_max(m)
    }
}

/// Power iteration on m^H m, returning sqrt of the dominant eigenvalue.
/// Relative tolerance 1e-10 on the Rayleigh quotient, iteration cap 1e5.
pub(crate) fn power_sigma_max(m: &DMatrix<C64>) -> Result<f64> {
    check_finite(m)?;
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return Ok(0.0);
    }
    // deterministic, generic start vector
    let mut v = nalgebra::DVector::<C64>::from_fn(n, |i, _| {
        C64::new(1.0 + (i as f64 % 7.0) * 0.1, 0.3 + (i as f64 % 3.0) * 0.05)
    });
    v /= C64::new(v.norm(), 0.0);
    let mut lambda = 0.0f64;
    for _ in 0..100_000 {
        let w = m * &v;
        let u = m.adjoint() * w;
        let new_lambda = u.norm();
        if new_lambda == 0.0 {
            return Ok(0.0);
        }
        v = u / C64::new(new_lambda, 0.0);
        if (new_lambda - lambda).abs() <= 1e-10 * new_lambda {
            return Ok(new_lambda.sqrt());
        }
        lambda = new_lambda;
    }
    Err(Error::Numerical("power iteration did not converge within 1e5 steps".into()))
}

/// Eigenvalue range of a Hermitian matrix.
pub(crate) fn hermitian_eigen_range(m: &DMatrix<C64>) -> Result<(f64, f64)> {
    check_finite(m)?;
    if m.nrows() == 0 {
        return Ok((0.0, 0.0));
    }
    let eig = m.clone().symmetric_eigen();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &l in eig.eigenvalues.iter() {
        lo = lo.min(l);
        hi = hi.max(l);
    }
    Ok((lo, hi))
}
