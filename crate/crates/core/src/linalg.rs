//! Dense solves for the normal equations.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};

/// Solves `A·x = b` for Hermitian positive-definite `A`.
///
/// Tries a Cholesky factorization first. If that fails (numerically
/// indefinite at tiny noise levels), a diagonal jitter of `1e−12·tr(A)/n`
/// is added and Cholesky is retried, then LU with partial pivoting.
pub fn solve_hpd<T>(a: &DMatrix<T>, b: &DVector<T>) -> Result<DVector<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.ncols(),
        });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    if b.iter().all(|x| x.modulus() == 0.0) {
        return Ok(DVector::zeros(n));
    }
    if let Some(ch) = a.clone().cholesky() {
        let x = ch.solve(b);
        if all_finite(&x) {
            return Ok(x);
        }
    }
    let trace: f64 = (0..n).map(|i| a[(i, i)].real()).sum();
    let jitter = 1e-12 * trace.abs().max(f64::MIN_POSITIVE) / n as f64;
    let mut aj = a.clone();
    for i in 0..n {
        aj[(i, i)] += T::from_real(jitter);
    }
    if let Some(ch) = aj.clone().cholesky() {
        let x = ch.solve(b);
        if all_finite(&x) {
            log::debug!("cholesky needed jitter {jitter:e}");
            return Ok(x);
        }
    }
    if let Some(x) = aj.lu().solve(b) {
        if all_finite(&x) {
            log::debug!("fell back to pivoted LU with jitter {jitter:e}");
            return Ok(x);
        }
    }
    Err(Error::Singular(format!(
        "{n}x{n} system is not positive definite (trace {trace:e})"
    )))
}

fn all_finite<T: ComplexField<RealField = f64> + Copy>(x: &DVector<T>) -> bool {
    x.iter().all(|v| v.real().is_finite() && v.imaginary().is_finite())
}
