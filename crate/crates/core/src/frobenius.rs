//! The three defining conditions of a Frobenius prepotential: associativity
//! of the structure constants, normalization against the flat metric, and
//! quasi-homogeneity under the Euler field.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::expr::Expr;
use crate::jet::{JetError, MultiIndex, Scalar};

/// Flat metrics whose condition number exceeds this are rejected.
pub const MAX_METRIC_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WdvvError {
    #[error("metric must be square and symmetric")]
    NotSymmetric,
    #[error("metric is degenerate (condition number {0:e})")]
    Degenerate(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("Euler data inconsistent: {0}")]
    Euler(String),
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatMetric {
    eta: DMatrix<f64>,
    eta_inv: DMatrix<f64>,
}

impl FlatMetric {
    pub fn new(eta: DMatrix<f64>) -> Result<Self, WdvvError> {
        if !eta.is_square() || (&eta - eta.transpose()).amax() > 1e-14 * eta.amax().max(1.0) {
            return Err(WdvvError::NotSymmetric);
        }
        let sv = eta.clone().singular_values();
        let cond = sv.max() / sv.min();
        if !cond.is_finite() || cond > MAX_METRIC_CONDITION {
            return Err(WdvvError::Degenerate(cond));
        }
        let eta_inv = eta.clone().try_inverse().ok_or(WdvvError::Degenerate(f64::INFINITY))?;
        Ok(FlatMetric { eta, eta_inv })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, WdvvError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(WdvvError::NotSymmetric);
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// `[[0,1],[1,0]]`, the two-dimensional metric used by the N=2 family.
    pub fn antidiagonal2() -> Self {
        Self::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("antidiagonal metric is regular")
    }

    /// `[[1,0,0],[0,0,1],[0,1,0]]`, the metric of the n=m=1 rational model.
    pub fn rational_n3() -> Self {
        Self::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]])
            .expect("metric is regular")
    }

    pub fn n(&self) -> usize {
        self.eta.nrows()
    }

    pub fn eta(&self) -> &DMatrix<f64> {
        &self.eta
    }

    pub fn eta_inv(&self) -> &DMatrix<f64> {
        &self.eta_inv
    }
}

/// Degrees and shifts of the Euler field `E = Σ (d_α x_α + r_α) ∂_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerData {
    pub d: Vec<f64>,
    pub r: Vec<f64>,
    pub d_f: f64,
    pub mu: Option<Vec<f64>>,
}

impl EulerData {
    pub fn new(d: Vec<f64>, r: Vec<f64>, d_f: f64) -> Result<Self, WdvvError> {
        let e = EulerData { d, r, d_f, mu: None };
        e.validate()?;
        Ok(e)
    }

    /// Euler data with `d_α = 1 + μ₁ − μ_α` and no shifts.
    pub fn from_mu(mu: Vec<f64>, d_f: f64) -> Result<Self, WdvvError> {
        let d = mu.iter().map(|m| 1.0 + mu[0] - m).collect::<Vec<_>>();
        let r = vec![0.0; d.len()];
        let e = EulerData {
            d,
            r,
            d_f,
            mu: Some(mu),
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<(), WdvvError> {
        if self.d.len() != self.r.len() {
            return Err(WdvvError::Dimension(self.d.len(), self.r.len()));
        }
        if let Some((a, _)) = self.d.iter().zip(&self.r).enumerate().find(|(_, (d, r))| *d * *r != 0.0) {
            return Err(WdvvError::Euler(format!("d·r must vanish, slot {a}")));
        }
        if let Some(mu) = &self.mu {
            if mu.len() != self.d.len() {
                return Err(WdvvError::Dimension(mu.len(), self.d.len()));
            }
            for (a, m) in mu.iter().enumerate() {
                if (self.d[a] - (1.0 + mu[0] - m)).abs() > 1e-12 {
                    return Err(WdvvError::Euler(format!("d_{a} ≠ 1 + μ₁ − μ_{a}")));
                }
            }
        }
        Ok(())
    }
}

/// Third derivatives `c_{αβγ}` of a prepotential at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTensor {
    n: usize,
    c: Vec<Scalar>,
}

impl StructureTensor {
    pub fn zeros(n: usize) -> Self {
        StructureTensor {
            n,
            c: vec![Scalar::new(0.0, 0.0); n * n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> Scalar) -> Self {
        let mut t = Self::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for g in 0..n {
                    t.c[(a * n + b) * n + g] = f(a, b, g);
                }
            }
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize, g: usize) -> Scalar {
        self.c[(a * self.n + b) * self.n + g]
    }

    pub fn set(&mut self, a: usize, b: usize, g: usize, v: Scalar) {
        self.c[(a * self.n + b) * self.n + g] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        StructureTensor {
            n: self.n,
            c: self.c.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &StructureTensor) -> f64 {
        self.c
            .iter()
            .zip(&other.c)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation from total symmetry, relative to the largest entry.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for g in 0..n {
                    let v = self.get(a, b, g);
                    for w in [
                        self.get(a, g, b),
                        self.get(b, a, g),
                        self.get(b, g, a),
                        self.get(g, a, b),
                        self.get(g, b, a),
                    ] {
                        worst = worst.max((v - w).norm());
                    }
                }
            }
        }
        worst / self.max_abs().max(f64::MIN_POSITIVE)
    }
}

/// Absolute residual together with the same value divided by the scale of
/// the tested object, so that rescaling a point cannot hide a failure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub abs: f64,
    pub rel: f64,
}

impl Residual {
    pub fn new(abs: f64, scale: f64) -> Self {
        Residual {
            abs,
            rel: abs / scale.max(f64::MIN_POSITIVE),
        }
    }
}

pub fn third_tensor(f: &Expr, point: &[Scalar]) -> Result<StructureTensor, WdvvError> {
    let n = point.len();
    let jet = f.eval(point, 3)?;
    let mut err = None;
    let t = StructureTensor::from_fn(n, |a, b, g| match jet.partial(&MultiIndex::from_slots(n, &[a, b, g])) {
        Ok(v) => v,
        Err(e) => {
            err = Some(e);
            Scalar::new(f64::NAN, 0.0)
        }
    });
    match err {
        Some(e) => Err(e.into()),
        None => Ok(t),
    }
}

fn check_dims(c: &StructureTensor, eta: &FlatMetric) -> Result<usize, WdvvError> {
    if c.n() != eta.n() {
        return Err(WdvvError::Dimension(c.n(), eta.n()));
    }
    Ok(c.n())
}

pub fn associativity_residual(c: &StructureTensor, eta: &FlatMetric) -> Result<f64, WdvvError> {
    let n = check_dims(c, eta)?;
    let ei = eta.eta_inv();
    // raise one index: c_{αβ}^{γ} = c_{αβδ} η^{δγ}
    let raised = StructureTensor::from_fn(n, |a, b, g| (0..n).map(|d| c.get(a, b, d) * ei[(d, g)]).sum());
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for w in 0..n {
                for r in 0..n {
                    let lhs: Scalar = (0..n).map(|g| raised.get(a, b, g) * c.get(g, w, r)).sum();
                    let rhs: Scalar = (0..n).map(|g| raised.get(a, w, g) * c.get(g, b, r)).sum();
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// Associativity residual with its relative companion.
pub fn associativity(c: &StructureTensor, eta: &FlatMetric) -> Result<Residual, WdvvError> {
    let abs = associativity_residual(c, eta)?;
    Ok(Residual::new(abs, c.max_abs().powi(2)))
}

/// `max |c_{uαβ} − η_{αβ}|` with the unit coordinate `u`.
pub fn normalization_residual_at(c: &StructureTensor, eta: &FlatMetric, unit: usize) -> Result<f64, WdvvError> {
    let n = check_dims(c, eta)?;
    if unit >= n {
        return Err(WdvvError::Dimension(unit, n));
    }
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            worst = worst.max((c.get(unit, a, b) - eta.eta()[(a, b)]).norm());
        }
    }
    Ok(worst)
}

/// Normalization against the first coordinate as the unit direction.
pub fn normalization_residual(c: &StructureTensor, eta: &FlatMetric) -> Result<f64, WdvvError> {
    normalization_residual_at(c, eta, 0)
}

/// Max over third partials of `G = Σ (d_α x_α + r_α) ∂_α F − d_F F`.
/// Any quadratic remainder in `G` is invisible here by construction.
pub fn quasi_homogeneity_residual(f: &Expr, e: &EulerData, point: &[Scalar]) -> Result<f64, WdvvError> {
    e.validate()?;
    let n = point.len();
    if e.d.len() != n {
        return Err(WdvvError::Dimension(e.d.len(), n));
    }
    let f4 = f.eval(point, 4)?;
    let space3 = f4.space().lower().expect("order 4 has a lower space").clone();
    let coords = space3.vars(point)?;
    let mut g = f4.truncate(&space3)? * (-e.d_f);
    for a in 0..n {
        let weight = (&coords[a] * e.d[a]).add_scalar(Scalar::new(e.r[a], 0.0));
        g = g + weight * f4.derivative(a)?;
    }
    let mut worst: f64 = 0.0;
    for idx in space3.indices().iter().filter(|m| m.degree() == 3) {
        worst = worst.max(g.partial(idx)?.norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::library;

    fn pt(xs: &[f64]) -> Vec<Scalar> {
        xs.iter().map(|&x| Scalar::new(x, 0.0)).collect()
    }

    fn near(a: Scalar, b: f64) -> bool {
        (a - Scalar::new(b, 0.0)).norm() < 1e-12
    }

    #[test]
    fn rational_tensor_values() {
        let c = third_tensor(&library::rational_n3(), &pt(&[1.0, 2.0, 3.0])).unwrap();
        assert!(near(c.get(1, 1, 1), 0.5));
        assert!(near(c.get(0, 1, 2), 1.0));
        assert!(near(c.get(1, 2, 2), 3.0));
        assert!(near(c.get(2, 2, 2), 2.0));
        assert!(near(c.get(0, 0, 0), 1.0));
        assert!(c.symmetry_defect() < 1e-12);
    }

    #[test]
    fn quadratic_has_zero_tensor() {
        let c = third_tensor(&library::sum_of_squares(3), &pt(&[0.3, -1.0, 2.0])).unwrap();
        assert_eq!(c.max_abs(), 0.0);
    }

    #[test]
    fn two_dimensional_associativity_is_automatic() {
        // any symmetric tensor with a unit direction (c_{1αβ} = η_{αβ}), any η
        let eta = FlatMetric::from_rows(&[&[2.0, 0.5], &[0.5, -1.0]]).unwrap();
        for free in [-3.0, 0.0, 0.7, 11.0] {
            let c = StructureTensor::from_fn(2, |a, b, g| {
                let mut s = [a, b, g];
                s.sort();
                match s {
                    [0, x, y] => Scalar::new(eta.eta()[(x, y)], 0.0),
                    _ => Scalar::new(free, 0.0),
                }
            });
            assert!(associativity_residual(&c, &eta).unwrap() < 1e-12);
        }
    }

    #[test]
    fn perturbed_tensor_breaks_associativity() {
        let mut c = third_tensor(&library::rational_n3(), &pt(&[1.0, 2.0, 3.0])).unwrap();
        let eta = FlatMetric::rational_n3();
        assert!(associativity_residual(&c, &eta).unwrap() < 1e-12);
        c.set(1, 1, 1, c.get(1, 1, 1) + 0.1);
        assert!(associativity_residual(&c, &eta).unwrap() > 1e-3);
    }

    #[test]
    fn normalization_examples() {
        let c = third_tensor(&library::rational_n3(), &pt(&[1.0, 2.0, 3.0])).unwrap();
        assert!(normalization_residual(&c, &FlatMetric::rational_n3()).unwrap() < 1e-12);
        let eye = FlatMetric::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert_eq!(normalization_residual(&StructureTensor::zeros(2), &eye).unwrap(), 1.0);
    }

    #[test]
    fn quasi_homogeneity_examples() {
        let e = EulerData::new(vec![1.0, 1.5, 0.5], vec![0.0; 3], 3.0).unwrap();
        let r = quasi_homogeneity_residual(&library::rational_n3(), &e, &pt(&[1.0, 2.0, 3.0])).unwrap();
        assert!(r < 1e-10);
        let e2 = EulerData::new(vec![1.0; 3], vec![0.0; 3], 2.0).unwrap();
        let r2 = quasi_homogeneity_residual(&library::sum_of_squares(3), &e2, &pt(&[0.4, 1.0, 2.0])).unwrap();
        assert_eq!(r2, 0.0);
    }

    #[test]
    fn degenerate_metric_rejected() {
        assert!(matches!(
            FlatMetric::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]),
            Err(WdvvError::Degenerate(_))
        ));
        assert!(matches!(
            FlatMetric::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]),
            Err(WdvvError::NotSymmetric)
        ));
    }

    #[test]
    fn euler_shift_must_pair_with_zero_degree() {
        assert!(EulerData::new(vec![1.0, 1.0], vec![0.0, 0.5], 2.0).is_err());
        assert!(EulerData::new(vec![1.0, 0.0], vec![0.0, 0.5], 2.0).is_ok());
        let e = EulerData::from_mu(vec![0.3, -0.3], 3.6).unwrap();
        assert!((e.d[1] - 1.6).abs() < 1e-15);
    }
}
