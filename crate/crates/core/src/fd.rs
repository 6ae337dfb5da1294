//! Central finite differences with one Richardson extrapolation step.
//!
//! `D(h) = (f(x+h) − f(x−h)) / 2h` has an even error expansion, so
//! `(4 D(h/2) − D(h)) / 3` is fourth-order accurate.

use crate::jet::Scalar;
use crate::linalg::CMat;

/// Derivative of a matrix-valued function along coordinate `k`.
pub fn richardson_matrix<E>(
    f: &mut impl FnMut(&[Scalar]) -> Result<CMat, E>,
    at: &[Scalar],
    k: usize,
    h: f64,
) -> Result<CMat, E> {
    let mut central = |step: f64| -> Result<CMat, E> {
        let mut plus = at.to_vec();
        let mut minus = at.to_vec();
        plus[k] += step;
        minus[k] -= step;
        Ok((f(&plus)? - f(&minus)?) / Scalar::new(2.0 * step, 0.0))
    };
    let coarse = central(h)?;
    let fine = central(h / 2.0)?;
    Ok((fine * Scalar::new(4.0, 0.0) - coarse) / Scalar::new(3.0, 0.0))
}

/// Scalar version of [`richardson_matrix`].
pub fn richardson_scalar<E>(
    f: &mut impl FnMut(&[Scalar]) -> Result<Scalar, E>,
    at: &[Scalar],
    k: usize,
    h: f64,
) -> Result<Scalar, E> {
    let mut wrapped = |x: &[Scalar]| -> Result<CMat, E> { Ok(CMat::from_element(1, 1, f(x)?)) };
    Ok(richardson_matrix(&mut wrapped, at, k, h)?[(0, 0)])
}

/// Derivative of a univariate real function, Richardson-extrapolated.
pub fn richardson_real(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |s: f64| (f(x + s) - f(x - s)) / (2.0 * s);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_is_exact_after_extrapolation() {
        let mut f = |x: &[Scalar]| -> Result<Scalar, ()> { Ok(x[0].powi(3) + x[1] * x[0]) };
        let p = [Scalar::new(1.5, 0.0), Scalar::new(2.0, 0.0)];
        let d = richardson_scalar(&mut f, &p, 0, 1e-2).unwrap();
        assert!((d - Scalar::new(3.0 * 2.25 + 2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn real_sine() {
        let d = richardson_real(f64::sin, 0.3, 1e-3);
        assert!((d - 0.3f64.cos()).abs() < 1e-12);
    }
}
