//! Closed-form expression trees evaluated over jets.
//!
//! An [`Expr`] is built with ordinary operators and a handful of
//! constructors, then evaluated either to a [`Jet`] (for derivatives) or to
//! a plain scalar by an independent recursive evaluator that never touches
//! jet code.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::jet::{Jet, JetError, JetSpace, Scalar, BRANCH_CUT_GUARD};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(usize),
    Const(Scalar),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, f64),
    Log(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn var(index: usize) -> Expr {
        Expr::Var(index)
    }

    pub fn real(value: f64) -> Expr {
        Expr::Const(Scalar::new(value, 0.0))
    }

    pub fn constant(value: Scalar) -> Expr {
        Expr::Const(value)
    }

    pub fn powf(self, r: f64) -> Expr {
        Expr::Pow(Box::new(self), r)
    }

    pub fn ln(self) -> Expr {
        Expr::Log(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    /// Number of variables referenced (highest index plus one).
    pub fn nvars(&self) -> usize {
        match self {
            Expr::Var(i) => i + 1,
            Expr::Const(_) => 0,
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().map(Expr::nvars).max().unwrap_or(0),
            Expr::Pow(e, _) | Expr::Log(e) | Expr::Exp(e) => e.nvars(),
        }
    }

    /// Evaluate to a jet of the given order at `point`.
    pub fn eval(&self, point: &[Scalar], order: usize) -> Result<Jet, JetError> {
        let space = JetSpace::new(point.len(), order);
        let vars = space.vars(point)?;
        self.eval_jets(&space, &vars)
    }

    /// Evaluate with caller-supplied jets substituted for the variables.
    /// This is how an expression is composed with a change of coordinates.
    pub fn eval_jets(&self, space: &JetSpace, vars: &[Jet]) -> Result<Jet, JetError> {
        match self {
            Expr::Var(i) => vars.get(*i).cloned().ok_or(JetError::IndexOutOfRange {
                index: *i,
                nvars: vars.len(),
            }),
            Expr::Const(c) => Ok(space.constant(*c)),
            Expr::Add(xs) => {
                let mut acc = space.zero();
                for (k, x) in xs.iter().enumerate() {
                    let term = x.eval_jets(space, vars).map_err(|e| at(e, "add", k))?;
                    acc = acc.try_add(&term)?;
                }
                Ok(acc)
            }
            Expr::Mul(xs) => {
                let mut acc = space.real(1.0);
                for (k, x) in xs.iter().enumerate() {
                    let term = x.eval_jets(space, vars).map_err(|e| at(e, "mul", k))?;
                    acc = acc.try_mul(&term)?;
                }
                Ok(acc)
            }
            Expr::Pow(x, r) => {
                let base = x.eval_jets(space, vars).map_err(|e| at(e, "pow", 0))?;
                base.powf(*r).map_err(|e| e.at_label("pow"))
            }
            Expr::Log(x) => {
                let arg = x.eval_jets(space, vars).map_err(|e| at(e, "log", 0))?;
                arg.ln().map_err(|e| e.at_label("log"))
            }
            Expr::Exp(x) => {
                let arg = x.eval_jets(space, vars).map_err(|e| at(e, "exp", 0))?;
                Ok(arg.exp())
            }
        }
    }

    /// Plain scalar evaluation, sharing no code with the jet path.
    pub fn eval_scalar(&self, point: &[Scalar]) -> Result<Scalar, JetError> {
        match self {
            Expr::Var(i) => point.get(*i).copied().ok_or(JetError::IndexOutOfRange {
                index: *i,
                nvars: point.len(),
            }),
            Expr::Const(c) => Ok(*c),
            Expr::Add(xs) => xs
                .iter()
                .enumerate()
                .try_fold(Scalar::new(0.0, 0.0), |acc, (k, x)| {
                    Ok(acc + x.eval_scalar(point).map_err(|e| at(e, "add", k))?)
                }),
            Expr::Mul(xs) => xs
                .iter()
                .enumerate()
                .try_fold(Scalar::new(1.0, 0.0), |acc, (k, x)| {
                    Ok(acc * x.eval_scalar(point).map_err(|e| at(e, "mul", k))?)
                }),
            Expr::Pow(x, r) => {
                let b = x.eval_scalar(point).map_err(|e| at(e, "pow", 0))?;
                if r.fract() == 0.0 {
                    if *r < 0.0 && b.norm() == 0.0 {
                        return Err(JetError::DivisionByZero.at_label("pow"));
                    }
                    Ok(b.powi(*r as i32))
                } else if cut(b) {
                    Err(JetError::Domain { op: "pow", value: b }.at_label("pow"))
                } else {
                    Ok(b.powf(*r))
                }
            }
            Expr::Log(x) => {
                let a = x.eval_scalar(point).map_err(|e| at(e, "log", 0))?;
                if cut(a) {
                    Err(JetError::Domain { op: "log", value: a }.at_label("log"))
                } else {
                    Ok(a.ln())
                }
            }
            Expr::Exp(x) => Ok(x.eval_scalar(point).map_err(|e| at(e, "exp", 0))?.exp()),
        }
    }
}

fn cut(z: Scalar) -> bool {
    z.re <= 0.0 && z.im.abs() <= BRANCH_CUT_GUARD * z.norm().max(1.0)
}

fn at(e: JetError, op: &str, k: usize) -> JetError {
    e.at_label(&format!("{op}[{k}]"))
}

impl JetError {
    /// Prefix an expression-path segment to the error context.
    pub fn at_label(self, label: &str) -> JetError {
        match self {
            JetError::AtNode { path, source } => JetError::AtNode {
                path: format!("{label}/{path}"),
                source,
            },
            other => JetError::AtNode {
                path: label.to_string(),
                source: Box::new(other),
            },
        }
    }
}

/// Evaluate `e` to a jet of `order` at `point`.
pub fn eval_expr(e: &Expr, point: &[Scalar], order: usize) -> Result<Jet, JetError> {
    e.eval(point, order)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[Expr], sep: &str| -> fmt::Result {
            write!(f, "(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        };
        match self {
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Const(c) if c.im == 0.0 => write!(f, "{}", c.re),
            Expr::Const(c) => write!(f, "({c})"),
            Expr::Add(xs) => join(f, xs, "+"),
            Expr::Mul(xs) => join(f, xs, "*"),
            Expr::Pow(x, r) => write!(f, "{x}^{r}"),
            Expr::Log(x) => write!(f, "log{x}"),
            Expr::Exp(x) => write!(f, "exp{x}"),
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match self {
            Expr::Add(mut xs) => {
                xs.push(rhs);
                Expr::Add(xs)
            }
            lhs => Expr::Add(vec![lhs, rhs]),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match self {
            Expr::Mul(mut xs) => {
                xs.push(rhs);
                Expr::Mul(xs)
            }
            lhs => Expr::Mul(vec![lhs, rhs]),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::real(-1.0) * self
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self + (-rhs)
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        self * rhs.powf(-1.0)
    }
}

impl Add<f64> for Expr {
    type Output = Expr;
    fn add(self, rhs: f64) -> Expr {
        self + Expr::real(rhs)
    }
}

impl Sub<f64> for Expr {
    type Output = Expr;
    fn sub(self, rhs: f64) -> Expr {
        self + Expr::real(-rhs)
    }
}

impl Mul<f64> for Expr {
    type Output = Expr;
    fn mul(self, rhs: f64) -> Expr {
        Expr::real(rhs) * self
    }
}

impl Mul<Expr> for f64 {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::real(self) * rhs
    }
}

/// Ready-made prepotentials used across the toolkit and its examples.
pub mod library {
    use super::Expr;

    /// The three-dimensional rational-model prepotential
    /// `x₂x₃³/6 + x₁³/6 + x₁x₂x₃ + ½x₂²(log x₂ − 3/2)`
    /// in variables `(x₁, x₂, x₃) = (Var(0), Var(1), Var(2))`.
    pub fn rational_n3() -> Expr {
        let (x1, x2, x3) = (Expr::var(0), Expr::var(1), Expr::var(2));
        (1.0 / 6.0) * x2.clone() * x3.clone().powf(3.0)
            + (1.0 / 6.0) * x1.clone().powf(3.0)
            + x1 * x2.clone() * x3
            + 0.5 * x2.clone().powf(2.0) * (x2.ln() - 1.5)
    }

    /// `Σ x_α²` in `n` variables.
    pub fn sum_of_squares(n: usize) -> Expr {
        Expr::Add((0..n).map(|i| Expr::var(i).powf(2.0)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::MultiIndex;

    fn c(x: f64) -> Scalar {
        Scalar::new(x, 0.0)
    }

    #[test]
    fn product_gradient() {
        let e = Expr::var(0) * Expr::var(1);
        let j = eval_expr(&e, &[c(2.0), c(3.0)], 1).unwrap();
        assert_eq!(j.value(), c(6.0));
        assert_eq!(j.gradient().unwrap(), vec![c(3.0), c(2.0)]);
    }

    #[test]
    fn rational_prepotential_value() {
        let f = library::rational_n3();
        let p = [c(1.0), c(1.0), c(1.0)];
        let jet = eval_expr(&f, &p, 0).unwrap().value();
        let scalar = f.eval_scalar(&p).unwrap();
        assert!((jet - c(7.0 / 12.0)).norm() < 1e-15);
        assert!((scalar - c(7.0 / 12.0)).norm() < 1e-15);
    }

    #[test]
    fn log_of_negative_reports_path() {
        let e = Expr::real(1.0) + Expr::var(0).ln();
        let err = eval_expr(&e, &[c(-1.0)], 2).unwrap_err();
        match &err {
            JetError::AtNode { path, .. } => assert_eq!(path, "add[1]/log"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(err.root(), JetError::Domain { op: "log", .. }));
        assert!(matches!(
            e.eval_scalar(&[c(-1.0)]).unwrap_err().root(),
            JetError::Domain { .. }
        ));
    }

    #[test]
    fn third_partial_from_expression() {
        let e = Expr::var(0).powf(3.0) * Expr::var(1);
        let j = eval_expr(&e, &[c(1.0), c(1.0)], 4).unwrap();
        assert!((j.partial(&MultiIndex::new(&[2, 1])).unwrap() - c(6.0)).norm() < 1e-14);
    }

    #[test]
    fn nvars_counts_highest_index() {
        assert_eq!(library::rational_n3().nvars(), 3);
        assert_eq!(Expr::real(2.0).nvars(), 0);
    }
}
