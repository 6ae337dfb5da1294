//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients `∂^k f / k!` of a scalar function
//! at an expansion point, for every multi-index of total degree up to the
//! jet order. Coefficients are complex; real problems simply carry zero
//! imaginary parts. Storage is dense, indexed by a graded enumeration of the
//! multi-indices, so a jet of lower order is always a prefix of a jet of
//! higher order in the same number of variables.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

pub type Scalar = Complex64;

/// Distance (relative to `max(1, |z|)`) below which an argument is treated
/// as lying on the principal branch cut of `log` and of non-integer powers.
pub const BRANCH_CUT_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("variable index {index} out of range for {nvars} variable(s)")]
    IndexOutOfRange { index: usize, nvars: usize },
    #[error("jets of shape {left} and {right} cannot be combined")]
    ShapeMismatch { left: String, right: String },
    #[error("division by a jet whose value is zero")]
    DivisionByZero,
    #[error("{op} is not defined at {value} on the principal branch")]
    Domain { op: &'static str, value: Scalar },
    #[error("multi-index of degree {degree} exceeds jet order {order}")]
    OrderExceeded { degree: usize, order: usize },
    #[error("multi-index has {got} entries, expected {expected}")]
    ArityMismatch { got: usize, expected: usize },
    #[error("at `{path}`: {source}")]
    AtNode {
        path: String,
        #[source]
        source: Box<JetError>,
    },
}

impl JetError {
    /// The innermost error, stripped of expression-path context.
    pub fn root(&self) -> &JetError {
        match self {
            JetError::AtNode { source, .. } => source.root(),
            other => other,
        }
    }
}

/// Exponents of a monomial, one entry per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn new(exponents: &[usize]) -> Self {
        MultiIndex(exponents.iter().map(|&e| e as u8).collect())
    }

    pub fn zero(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    pub fn unit(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        MultiIndex(e)
    }

    /// Multi-index of a mixed partial given as a list of variable slots,
    /// e.g. `[0, 1, 1]` for ∂³/∂x₀∂x₁².
    pub fn from_slots(nvars: usize, slots: &[usize]) -> Self {
        let mut e = vec![0u8; nvars];
        for &s in slots {
            e[s] += 1;
        }
        MultiIndex(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn exponents(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&e| e as usize)
    }

    /// Product of the factorials of the exponents.
    pub fn factorial_product(&self) -> f64 {
        self.0
            .iter()
            .map(|&e| (1..=e as u32).map(f64::from).product::<f64>())
            .product()
    }

    fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

struct Layout {
    nvars: usize,
    order: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    /// `(i, j, k)` with `indices[i] + indices[j] == indices[k]`.
    products: Vec<(u32, u32, u32)>,
    lower: Option<JetSpace>,
}

/// Shape shared by all jets in the same number of variables and order.
#[derive(Clone)]
pub struct JetSpace(Arc<Layout>);

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetSpace(nvars={}, order={})", self.nvars(), self.order())
    }
}

fn compositions(total: usize, parts: usize, prefix: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
    if parts == 0 {
        if total == 0 {
            out.push(MultiIndex(prefix.clone()));
        }
        return;
    }
    if parts == 1 {
        prefix.push(total as u8);
        out.push(MultiIndex(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first as u8);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

impl JetSpace {
    pub fn new(nvars: usize, order: usize) -> Self {
        let lower = (order > 0).then(|| JetSpace::new(nvars, order - 1));
        let mut indices = Vec::new();
        for degree in 0..=order {
            compositions(degree, nvars, &mut Vec::new(), &mut indices);
            if nvars == 0 {
                break;
            }
        }
        let lookup: HashMap<_, _> = indices
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let mut products = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                if a.degree() + b.degree() <= order {
                    let k = lookup[&a.plus(b)];
                    products.push((i as u32, j as u32, k as u32));
                }
            }
        }
        JetSpace(Arc::new(Layout {
            nvars,
            order,
            indices,
            lookup,
            products,
            lower,
        }))
    }

    pub fn nvars(&self) -> usize {
        self.0.nvars
    }

    pub fn order(&self) -> usize {
        self.0.order
    }

    pub fn len(&self) -> usize {
        self.0.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.0.indices
    }

    pub fn position(&self, idx: &MultiIndex) -> Option<usize> {
        self.0.lookup.get(idx).copied()
    }

    /// The space one order lower, if any.
    pub fn lower(&self) -> Option<&JetSpace> {
        self.0.lower.as_ref()
    }

    pub fn compatible(&self, other: &JetSpace) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.nvars() == other.nvars() && self.order() == other.order())
    }

    pub fn constant(&self, value: Scalar) -> Jet {
        let mut coeffs = vec![Scalar::new(0.0, 0.0); self.len()];
        coeffs[0] = value;
        Jet {
            space: self.clone(),
            coeffs,
        }
    }

    pub fn real(&self, value: f64) -> Jet {
        self.constant(Scalar::new(value, 0.0))
    }

    pub fn zero(&self) -> Jet {
        self.real(0.0)
    }

    /// Jet of the coordinate function `x_index` expanded at `value`.
    pub fn var(&self, index: usize, value: Scalar) -> Result<Jet, JetError> {
        if index >= self.nvars() {
            return Err(JetError::IndexOutOfRange {
                index,
                nvars: self.nvars(),
            });
        }
        let mut jet = self.constant(value);
        if self.order() > 0 {
            let pos = self.0.lookup[&MultiIndex::unit(self.nvars(), index)];
            jet.coeffs[pos] = Scalar::new(1.0, 0.0);
        }
        Ok(jet)
    }

    /// Coordinate jets for every variable at `point`.
    pub fn vars(&self, point: &[Scalar]) -> Result<Vec<Jet>, JetError> {
        if point.len() != self.nvars() {
            return Err(JetError::ArityMismatch {
                got: point.len(),
                expected: self.nvars(),
            });
        }
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| self.var(i, v))
            .collect()
    }

    pub fn from_coeffs(&self, coeffs: Vec<Scalar>) -> Jet {
        assert_eq!(coeffs.len(), self.len(), "coefficient count must match the space");
        Jet {
            space: self.clone(),
            coeffs,
        }
    }
}

/// Jet of the coordinate `x_index` at `value` in a fresh space.
pub fn jet_var(index: usize, value: Scalar, nvars: usize, order: usize) -> Result<Jet, JetError> {
    JetSpace::new(nvars, order).var(index, value)
}

fn on_branch_cut(z: Scalar) -> bool {
    z.re <= 0.0 && z.im.abs() <= BRANCH_CUT_GUARD * z.norm().max(1.0)
}

#[derive(Clone)]
pub struct Jet {
    space: JetSpace,
    coeffs: Vec<Scalar>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for (m, c) in self.space.indices().iter().zip(&self.coeffs) {
            if c.norm() != 0.0 {
                map.entry(&m.to_string(), c);
            }
        }
        map.finish()
    }
}

impl Jet {
    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.space.order()
    }

    pub fn nvars(&self) -> usize {
        self.space.nvars()
    }

    pub fn value(&self) -> Scalar {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// Taylor coefficient (not the derivative) of a multi-index.
    pub fn coeff(&self, idx: &MultiIndex) -> Result<Scalar, JetError> {
        if idx.nvars() != self.nvars() {
            return Err(JetError::ArityMismatch {
                got: idx.nvars(),
                expected: self.nvars(),
            });
        }
        match self.space.position(idx) {
            Some(p) => Ok(self.coeffs[p]),
            None => Err(JetError::OrderExceeded {
                degree: idx.degree(),
                order: self.order(),
            }),
        }
    }

    /// The partial derivative `∂^|idx| f` at the expansion point.
    pub fn partial(&self, idx: &MultiIndex) -> Result<Scalar, JetError> {
        Ok(self.coeff(idx)? * idx.factorial_product())
    }

    /// Partial derivative addressed by variable slots, e.g. `&[0, 2, 2]`.
    pub fn partial_slots(&self, slots: &[usize]) -> Result<Scalar, JetError> {
        if let Some(&bad) = slots.iter().find(|&&s| s >= self.nvars()) {
            return Err(JetError::IndexOutOfRange {
                index: bad,
                nvars: self.nvars(),
            });
        }
        self.partial(&MultiIndex::from_slots(self.nvars(), slots))
    }

    pub fn gradient(&self) -> Result<Vec<Scalar>, JetError> {
        (0..self.nvars())
            .map(|i| self.partial(&MultiIndex::unit(self.nvars(), i)))
            .collect()
    }

    fn check(&self, other: &Jet) -> Result<(), JetError> {
        if self.space.compatible(&other.space) {
            Ok(())
        } else {
            Err(JetError::ShapeMismatch {
                left: format!("{:?}", self.space),
                right: format!("{:?}", other.space),
            })
        }
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        let mut out = vec![Scalar::new(0.0, 0.0); self.coeffs.len()];
        for &(i, j, k) in &self.space.0.products {
            out[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Ok(Jet {
            space: self.space.clone(),
            coeffs: out,
        })
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        self.try_mul(&other.recip()?)
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(Scalar, Scalar) -> Scalar) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: Scalar) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    pub fn add_scalar(&self, c: Scalar) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// `Σ_k series[k] (self − self₀)^k`, truncated at the jet order.
    pub fn compose(&self, series: &[Scalar]) -> Jet {
        let mut delta = self.clone();
        delta.coeffs[0] = Scalar::new(0.0, 0.0);
        let top = self.order().min(series.len().saturating_sub(1));
        let mut acc = self.space.constant(series.get(top).copied().unwrap_or_default());
        for k in (0..top).rev() {
            acc = (&acc * &delta).add_scalar(series[k]);
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let a0 = self.value();
        if a0.norm() == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let inv = a0.inv();
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut term = inv;
        for _ in 0..=self.order() {
            series.push(term);
            term *= -inv;
        }
        Ok(self.compose(&series))
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut fact = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                fact *= k as f64;
            }
            series.push(e / fact);
        }
        self.compose(&series)
    }

    /// Principal-branch logarithm.
    pub fn ln(&self) -> Result<Jet, JetError> {
        let a0 = self.value();
        if on_branch_cut(a0) {
            return Err(JetError::Domain { op: "log", value: a0 });
        }
        let inv = a0.inv();
        let mut series = vec![a0.ln()];
        let mut p = inv;
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(p * (sign / k as f64));
            p *= inv;
        }
        Ok(self.compose(&series))
    }

    pub fn powi(&self, k: i32) -> Result<Jet, JetError> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = self.space.real(1.0);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// Real power on the principal branch; integer exponents are exact
    /// products and carry no branch restriction.
    pub fn powf(&self, r: f64) -> Result<Jet, JetError> {
        if r.fract() == 0.0 && r.abs() <= 64.0 {
            return self.powi(r as i32);
        }
        let a0 = self.value();
        if on_branch_cut(a0) {
            return Err(JetError::Domain { op: "pow", value: a0 });
        }
        let inv = a0.inv();
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut term = a0.powf(r);
        for k in 0..=self.order() {
            series.push(term);
            term = term * inv * ((r - k as f64) / (k as f64 + 1.0));
        }
        Ok(self.compose(&series))
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        self.powf(0.5)
    }

    /// `∂f/∂x_var` as a jet one order lower.
    pub fn derivative(&self, var: usize) -> Result<Jet, JetError> {
        if var >= self.nvars() {
            return Err(JetError::IndexOutOfRange {
                index: var,
                nvars: self.nvars(),
            });
        }
        let lower = self.space.lower().ok_or(JetError::OrderExceeded {
            degree: 1,
            order: 0,
        })?;
        let unit = MultiIndex::unit(self.nvars(), var);
        let coeffs = lower
            .indices()
            .iter()
            .map(|m| {
                let up = m.plus(&unit);
                let factor = f64::from(up.0[var]);
                self.coeffs[self.space.0.lookup[&up]] * factor
            })
            .collect();
        Ok(Jet {
            space: lower.clone(),
            coeffs,
        })
    }

    /// Drop every coefficient above the order of `target`.
    pub fn truncate(&self, target: &JetSpace) -> Result<Jet, JetError> {
        if target.nvars() != self.nvars() || target.order() > self.order() {
            return Err(JetError::ShapeMismatch {
                left: format!("{:?}", self.space),
                right: format!("{target:?}"),
            });
        }
        Ok(Jet {
            space: target.clone(),
            coeffs: self.coeffs[..target.len()].to_vec(),
        })
    }

    /// Largest coefficient-wise distance to another jet of the same shape.
    pub fn max_abs_diff(&self, other: &Jet) -> Result<f64, JetError> {
        self.check(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                self.$checked(rhs).expect("jet shapes must agree")
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$checked(&rhs).expect("jet shapes must agree")
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$checked(rhs).expect("jet shapes must agree")
            }
        }
    };
}

jet_binop!(Add, add, try_add);
jet_binop!(Sub, sub, try_sub);
jet_binop!(Mul, mul, try_mul);

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(Scalar::new(-1.0, 0.0))
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

impl Mul<Scalar> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: Scalar) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(Scalar::new(rhs, 0.0))
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(Scalar::new(rhs, 0.0))
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_scalar(Scalar::new(rhs, 0.0))
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_scalar(Scalar::new(rhs, 0.0))
    }
}

/// Binary arithmetic selector used by [`jet_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn jet_arith(op: ArithOp, a: &Jet, b: &Jet) -> Result<Jet, JetError> {
    match op {
        ArithOp::Add => a.try_add(b),
        ArithOp::Sub => a.try_sub(b),
        ArithOp::Mul => a.try_mul(b),
        ArithOp::Div => a.try_div(b),
    }
}

/// Unary function selector used by [`jet_unary`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnaryOp {
    Log,
    Exp,
    Pow(f64),
}

pub fn jet_unary(op: UnaryOp, a: &Jet) -> Result<Jet, JetError> {
    match op {
        UnaryOp::Log => a.ln(),
        UnaryOp::Exp => Ok(a.exp()),
        UnaryOp::Pow(r) => a.powf(r),
    }
}

pub fn partial(j: &Jet, idx: &MultiIndex) -> Result<Scalar, JetError> {
    j.partial(idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Scalar {
        Scalar::new(x, 0.0)
    }

    fn close(a: Scalar, b: f64) -> bool {
        (a - c(b)).norm() < 1e-14
    }

    #[test]
    fn coordinate_jet() {
        let j = jet_var(0, c(2.0), 2, 2).unwrap();
        assert_eq!(j.coeff(&MultiIndex::new(&[0, 0])).unwrap(), c(2.0));
        assert_eq!(j.coeff(&MultiIndex::new(&[1, 0])).unwrap(), c(1.0));
        for m in j.space().indices().iter().skip(1) {
            if m != &MultiIndex::new(&[1, 0]) {
                assert_eq!(j.coeff(m).unwrap(), c(0.0));
            }
        }
        let j = jet_var(0, c(-1.5), 3, 3).unwrap();
        assert_eq!(j.value(), c(-1.5));
        assert_eq!(j.gradient().unwrap(), vec![c(1.0), c(0.0), c(0.0)]);
    }

    #[test]
    fn coordinate_index_out_of_range() {
        assert!(matches!(
            jet_var(1, c(0.0), 1, 2),
            Err(JetError::IndexOutOfRange { index: 1, nvars: 1 })
        ));
    }

    #[test]
    fn graded_layout_is_prefix_closed() {
        let hi = JetSpace::new(3, 4);
        let lo = JetSpace::new(3, 2);
        assert_eq!(&hi.indices()[..lo.len()], lo.indices());
        assert_eq!(hi.len(), 35);
    }

    #[test]
    fn binomial_square() {
        let one_plus_x = jet_var(0, c(0.0), 1, 2).unwrap() + 1.0;
        let sq = &one_plus_x * &one_plus_x;
        let coeffs: Vec<_> = sq.coeffs().to_vec();
        assert_eq!(coeffs, vec![c(1.0), c(2.0), c(1.0)]);
    }

    #[test]
    fn geometric_series() {
        let space = JetSpace::new(1, 2);
        let q = jet_arith(ArithOp::Div, &space.real(1.0), &(space.var(0, c(0.0)).unwrap() + 1.0)).unwrap();
        assert!(close(q.coeffs()[0], 1.0) && close(q.coeffs()[1], -1.0) && close(q.coeffs()[2], 1.0));
    }

    #[test]
    fn division_by_zero_value() {
        let space = JetSpace::new(1, 2);
        let x = space.var(0, c(0.0)).unwrap();
        assert_eq!(space.real(1.0).try_div(&x).unwrap_err(), JetError::DivisionByZero);
    }

    #[test]
    fn shape_mismatch() {
        let a = jet_var(0, c(1.0), 2, 2).unwrap();
        let b = jet_var(0, c(1.0), 2, 3).unwrap();
        assert!(matches!(a.try_add(&b), Err(JetError::ShapeMismatch { .. })));
    }

    #[test]
    fn mercator_series() {
        let x = jet_var(0, c(0.0), 1, 3).unwrap();
        let l = jet_unary(UnaryOp::Log, &(x + 1.0)).unwrap();
        let k = l.coeffs();
        assert!(close(k[0], 0.0) && close(k[1], 1.0) && close(k[2], -0.5) && close(k[3], 1.0 / 3.0));
    }

    #[test]
    fn integer_power_matches_product() {
        let x = jet_var(0, c(0.0), 1, 2).unwrap() + 1.0;
        let p = jet_unary(UnaryOp::Pow(2.0), &x).unwrap();
        assert_eq!(p.coeffs(), (&x * &x).coeffs());
        // integer powers are fine at zero
        let z = jet_var(0, c(0.0), 1, 3).unwrap();
        let cube = z.powf(3.0).unwrap();
        assert_eq!(cube.coeffs()[3], c(1.0));
    }

    #[test]
    fn log_domain() {
        let x = jet_var(0, c(-1.0), 1, 2).unwrap();
        assert!(matches!(x.ln(), Err(JetError::Domain { op: "log", .. })));
        assert!(matches!(x.powf(0.5), Err(JetError::Domain { op: "pow", .. })));
        // just off the cut is fine
        let y = jet_var(0, Scalar::new(-1.0, 1e-6), 1, 2).unwrap();
        assert!(y.ln().is_ok());
    }

    #[test]
    fn partials() {
        let x = jet_var(0, c(1.0), 1, 2).unwrap();
        let sq = &x * &x;
        assert_eq!(partial(&sq, &MultiIndex::new(&[2])).unwrap(), c(2.0));
        assert_eq!(partial(&sq, &MultiIndex::new(&[0])).unwrap(), c(1.0));
        assert!(matches!(
            sq.partial(&MultiIndex::new(&[3])),
            Err(JetError::OrderExceeded { degree: 3, order: 2 })
        ));
        // x^3 y at (1,1): d^3/dx^2 dy = 6x = 6
        let space = JetSpace::new(2, 4);
        let v = space.vars(&[c(1.0), c(1.0)]).unwrap();
        let f = &(&(&v[0] * &v[0]) * &v[0]) * &v[1];
        assert!(close(f.partial(&MultiIndex::new(&[2, 1])).unwrap(), 6.0));
    }

    #[test]
    fn derivative_lowers_order() {
        let space = JetSpace::new(2, 3);
        let v = space.vars(&[c(2.0), c(3.0)]).unwrap();
        let f = &(&v[0] * &v[0]) * &v[1];
        let fx = f.derivative(0).unwrap();
        assert_eq!(fx.order(), 2);
        assert!(close(fx.value(), 12.0));
        assert!(close(fx.partial_slots(&[0]).unwrap(), 6.0));
        assert!(close(fx.partial_slots(&[0, 1]).unwrap(), 2.0));
    }
}
