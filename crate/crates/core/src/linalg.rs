//! Small dense complex matrix helpers on top of nalgebra.

use nalgebra::DMatrix;

use crate::jet::Scalar;

pub type CMat = DMatrix<Scalar>;

pub fn c(re: f64) -> Scalar {
    Scalar::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Matrix unit `E_ii`.
pub fn unit(n: usize, i: usize) -> CMat {
    let mut e = CMat::zeros(n, n);
    e[(i, i)] = c(1.0);
    e
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn inverse(a: &CMat) -> Option<CMat> {
    a.clone().try_inverse()
}

/// Largest entry modulus.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b))
}

pub fn trace(a: &CMat) -> Scalar {
    a.diagonal().iter().sum()
}

/// Eigenvalues through the complex Schur decomposition.
pub fn eigenvalues(a: &CMat) -> Option<Vec<Scalar>> {
    a.clone().schur().eigenvalues().map(|v| v.iter().copied().collect())
}

/// Eigen-decomposition `a = P diag(λ) P⁻¹` for a matrix with distinct
/// eigenvalues. Eigenvectors are taken from the null space of `a − λ`
/// via the right singular vector of the smallest singular value.
pub fn diagonalize(a: &CMat, min_gap: f64) -> Result<(Vec<Scalar>, CMat), String> {
    let n = a.nrows();
    let mut lambda = eigenvalues(a).ok_or("eigenvalue iteration did not converge")?;
    lambda.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    for i in 0..n {
        for j in 0..i {
            if (lambda[i] - lambda[j]).norm() < min_gap {
                return Err(format!("eigenvalues {} and {} collide", lambda[i], lambda[j]));
            }
        }
    }
    let mut p = CMat::zeros(n, n);
    for (k, &l) in lambda.iter().enumerate() {
        let shifted = a - CMat::identity(n, n) * l;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.ok_or("singular value decomposition failed")?;
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .expect("non-empty");
        for r in 0..n {
            p[(r, k)] = vt[(imin, r)].conj();
        }
    }
    Ok((lambda, p))
}

/// Principal square root with its sign flipped to lie closest to `near`.
pub fn sqrt_near(z: Scalar, near: Option<Scalar>) -> (Scalar, i8) {
    let r = z.sqrt();
    match near {
        Some(w) if (r - w).norm() > (r + w).norm() => (-r, -1),
        _ => (r, 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonalize_reconstructs() {
        let a = CMat::from_row_slice(3, 3, &[c(2.0), c(1.0), c(0.0), c(0.0), c(-1.0), c(3.0), c(1.0), c(0.0), c(0.5)]);
        let (l, p) = diagonalize(&a, 1e-8).unwrap();
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(l));
        let back = &p * d * inverse(&p).unwrap();
        assert!(max_abs_diff(&back, &a) < 1e-12);
    }

    #[test]
    fn eigenvalues_of_companion() {
        // z^3 - 2
        let a = CMat::from_row_slice(3, 3, &[c(0.0), c(0.0), c(2.0), c(1.0), c(0.0), c(0.0), c(0.0), c(1.0), c(0.0)]);
        for z in eigenvalues(&a).unwrap() {
            assert!((z.powi(3) - c(2.0)).norm() < 1e-12);
        }
    }
}
