//! Rational Landau–Ginzburg potentials
//!
//! ```text
//! W(z) = z^{n+1}/(n+1) + a_{n−1} z^{n−1} + … + a₀ + Σ_{k=1}^{m} v_k / (k (z − v_{m+1})^k)
//! ```
//!
//! together with their residue metric, structure constants, canonical
//! coordinates (critical values), Lamé and rotation coefficients.
//!
//! Coordinates are ordered as `X = [a₀, …, a_{n−1}, x₁, …, x_{m+1}]` with the
//! pole coefficients `v` obtained from `x` by [`flat_to_v`]. The unit
//! direction is always `X₀ = a₀`. For `n = 1` (any `m`) and for the pure
//! polynomial `m = 0, n = 2` these coordinates are flat; for other `(n, m)`
//! the `a` block is the raw coefficient chart and everything below still
//! holds as statements about canonical coordinates.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde_json::{json, Value};
use thiserror::Error;

use crate::expr::Expr;
use crate::fd::richardson_matrix;
use crate::frobenius::{FlatMetric, StructureTensor};
use crate::jet::{Jet, JetError, JetSpace, Scalar};
use crate::linalg::{self, c, CMat};

/// Normalized discriminant below which critical points count as colliding.
pub const DISCRIMINANT_THRESHOLD: f64 = 1e-10;
/// Largest acceptable `|W′(α)|` after Newton polishing.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-9;
/// `|W″(α)|` (relative to the root scale) below which residues are refused.
pub const NEAR_DEGENERATE_W2: f64 = 1e-10;
/// Largest acceptable deviation of `∂x/∂u · ∂u/∂x` from the identity.
pub const JACOBIAN_PAIR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LgError {
    #[error("W has a pole at z = {0}")]
    Pole(Scalar),
    #[error("critical points are degenerate (normalized discriminant {0:e})")]
    Degenerate(f64),
    #[error("critical point residual {0:e} exceeds tolerance after polishing")]
    RootResidual(f64),
    #[error("invalid potential: {0}")]
    Invalid(String),
    #[error("chart: {0}")]
    Chart(String),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Ordered index tuples `(α₁, …, α_k)`, `α ∈ 1..=m`, summing to `(k−1)m + k`.
fn v_tuples(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(m: usize, left: usize, target: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            if target == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for a in 1..=m.min(target) {
            if target - a < left - 1 {
                break;
            }
            prefix.push(a);
            go(m, left - 1, target - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(m, k, (k - 1) * m + k, &mut Vec::new(), &mut out);
    out
}

fn flat_to_v_jets(x: &[Jet]) -> Vec<Jet> {
    let m = x.len() - 1;
    let mut v: Vec<Jet> = (1..=m)
        .map(|k| {
            let mut acc = x[0].space().zero();
            for t in v_tuples(m, k) {
                let mut term = x[0].space().real(1.0);
                for a in t {
                    term = &term * &x[a - 1];
                }
                acc = acc + term;
            }
            acc
        })
        .collect();
    v.push(x[m].clone());
    v
}

/// Pole coefficients `v₁ … v_{m+1}` from the pole-block coordinates
/// `x₁ … x_{m+1}`.
pub fn flat_to_v(x: &[Scalar]) -> Vec<Scalar> {
    if x.is_empty() {
        return Vec::new();
    }
    let space = JetSpace::new(0, 0);
    let jets: Vec<Jet> = x.iter().map(|&xi| space.constant(xi)).collect();
    flat_to_v_jets(&jets).iter().map(Jet::value).collect()
}

/// Coefficients of W with a common jet space (possibly order 0).
#[derive(Clone)]
struct Coeffs {
    n: usize,
    m: usize,
    a: Vec<Jet>,
    v: Vec<Jet>,
}

impl Coeffs {
    fn space(&self) -> &JetSpace {
        self.a[0].space()
    }

    fn pole_base(&self, z: &Jet) -> Result<Option<(Jet, Jet)>, LgError> {
        if self.m == 0 {
            return Ok(None);
        }
        let d = z - &self.v[self.m];
        if d.value().norm() <= 1e-14 * z.value().norm().max(1.0) {
            return Err(LgError::Pole(z.value()));
        }
        let inv = d.recip()?;
        Ok(Some((d, inv)))
    }

    fn pow(z: &Jet, k: usize) -> Jet {
        let mut acc = z.space().real(1.0);
        for _ in 0..k {
            acc = &acc * z;
        }
        acc
    }

    fn w(&self, z: &Jet) -> Result<Jet, LgError> {
        let mut acc = Self::pow(z, self.n + 1) * (1.0 / (self.n + 1) as f64);
        for (k, ak) in self.a.iter().enumerate() {
            acc = acc + ak * &Self::pow(z, k);
        }
        if let Some((_, inv)) = self.pole_base(z)? {
            for k in 1..=self.m {
                acc = acc + (&self.v[k - 1] * &Self::pow(&inv, k)) * (1.0 / k as f64);
            }
        }
        Ok(acc)
    }

    fn w1(&self, z: &Jet) -> Result<Jet, LgError> {
        let mut acc = Self::pow(z, self.n);
        for (k, ak) in self.a.iter().enumerate().skip(1) {
            acc = acc + (ak * &Self::pow(z, k - 1)) * k as f64;
        }
        if let Some((_, inv)) = self.pole_base(z)? {
            for k in 1..=self.m {
                acc = acc - &self.v[k - 1] * &Self::pow(&inv, k + 1);
            }
        }
        Ok(acc)
    }

    fn w2(&self, z: &Jet) -> Result<Jet, LgError> {
        let mut acc = Self::pow(z, self.n - 1) * self.n as f64;
        for (k, ak) in self.a.iter().enumerate().skip(2) {
            acc = acc + (ak * &Self::pow(z, k - 2)) * (k * (k - 1)) as f64;
        }
        if let Some((_, inv)) = self.pole_base(z)? {
            for k in 1..=self.m {
                acc = acc + (&self.v[k - 1] * &Self::pow(&inv, k + 2)) * (k + 1) as f64;
            }
        }
        Ok(acc)
    }
}

/// A rational potential with concrete complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalPotential {
    pub n: usize,
    pub m: usize,
    /// `a₀ … a_{n−1}`.
    pub a: Vec<Scalar>,
    /// `v₁ … v_{m+1}`; empty when `m = 0`.
    pub v: Vec<Scalar>,
}

impl RationalPotential {
    pub fn new(n: usize, m: usize, a: Vec<Scalar>, v: Vec<Scalar>) -> Result<Self, LgError> {
        if n == 0 {
            return Err(LgError::Invalid("n must be at least 1".into()));
        }
        if a.len() != n {
            return Err(LgError::Invalid(format!("expected {n} polynomial coefficients, got {}", a.len())));
        }
        let expected_v = if m == 0 { 0 } else { m + 1 };
        if v.len() != expected_v {
            return Err(LgError::Invalid(format!("expected {expected_v} pole coefficients, got {}", v.len())));
        }
        if m >= 1 && v[m - 1].norm() == 0.0 {
            return Err(LgError::Invalid("leading pole coefficient v_m vanishes".into()));
        }
        Ok(RationalPotential { n, m, a, v })
    }

    fn coeffs(&self) -> Coeffs {
        let space = JetSpace::new(0, 0);
        self.coeffs_in(&space)
    }

    fn coeffs_in(&self, space: &JetSpace) -> Coeffs {
        Coeffs {
            n: self.n,
            m: self.m,
            a: self.a.iter().map(|&x| space.constant(x)).collect(),
            v: self.v.iter().map(|&x| space.constant(x)).collect(),
        }
    }

    /// `W(z)` at a scalar point.
    pub fn eval_w(&self, z: Scalar) -> Result<Scalar, LgError> {
        let co = self.coeffs();
        Ok(co.w(&co.space().constant(z))?.value())
    }

    /// `W(z)` for a jet argument; coefficients are held constant.
    pub fn eval_w_jet(&self, z: &Jet) -> Result<Jet, LgError> {
        self.coeffs_in(z.space()).w(z)
    }

    pub fn w_prime(&self, z: Scalar) -> Result<Scalar, LgError> {
        let co = self.coeffs();
        Ok(co.w1(&co.space().constant(z))?.value())
    }

    pub fn w_second(&self, z: Scalar) -> Result<Scalar, LgError> {
        let co = self.coeffs();
        Ok(co.w2(&co.space().constant(z))?.value())
    }

    /// Monic numerator `W′(z)(z − v_{m+1})^{m+1}`, ascending coefficients.
    pub fn numerator(&self) -> Vec<Scalar> {
        fn mul(p: &[Scalar], q: &[Scalar]) -> Vec<Scalar> {
            let mut out = vec![c(0.0); p.len() + q.len() - 1];
            for (i, a) in p.iter().enumerate() {
                for (j, b) in q.iter().enumerate() {
                    out[i + j] += a * b;
                }
            }
            out
        }
        let mut poly = vec![c(0.0); self.n + 1];
        poly[self.n] = c(1.0);
        for k in 1..self.n {
            poly[k - 1] += self.a[k] * k as f64;
        }
        if self.m == 0 {
            return poly;
        }
        let pole = self.v[self.m];
        let lin = [-pole, c(1.0)];
        let mut powers = vec![vec![c(1.0)]];
        for _ in 0..=self.m {
            let next = mul(powers.last().expect("non-empty"), &lin);
            powers.push(next);
        }
        let mut out = mul(&poly, &powers[self.m + 1]);
        for k in 1..=self.m {
            for (i, coef) in powers[self.m - k].iter().enumerate() {
                out[i] -= self.v[k - 1] * coef;
            }
        }
        out
    }

    /// Number of critical points: `n + m + 1`, or `n` without poles.
    pub fn dim(&self) -> usize {
        if self.m == 0 {
            self.n
        } else {
            self.n + self.m + 1
        }
    }

    /// Critical points sorted lexicographically by (real, imaginary) part.
    pub fn critical_points(&self) -> Result<Vec<Scalar>, LgError> {
        let p = self.numerator();
        let deg = p.len() - 1;
        let mut comp = CMat::zeros(deg, deg);
        for i in 1..deg {
            comp[(i, i - 1)] = c(1.0);
        }
        for i in 0..deg {
            comp[(i, deg - 1)] = -p[i];
        }
        let mut roots = linalg::eigenvalues(&comp).ok_or_else(|| LgError::Chart("companion eigenvalues failed".into()))?;
        let eval = |z: Scalar| -> (Scalar, Scalar) {
            let mut f = c(0.0);
            let mut d = c(0.0);
            for coef in p.iter().rev() {
                d = d * z + f;
                f = f * z + coef;
            }
            (f, d)
        };
        for r in roots.iter_mut() {
            for _ in 0..8 {
                let (f, d) = eval(*r);
                if d.norm() == 0.0 {
                    break;
                }
                let step = f / d;
                *r -= step;
                if step.norm() <= 1e-16 * r.norm().max(1.0) {
                    break;
                }
            }
        }
        let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let mut disc = 1.0;
        for i in 0..deg {
            for j in 0..i {
                disc *= ((roots[i] - roots[j]).norm() / scale).powi(2);
            }
        }
        if disc < DISCRIMINANT_THRESHOLD {
            return Err(LgError::Degenerate(disc));
        }
        for &r in &roots {
            let res = self.w_prime(r)?.norm();
            if res > ROOT_RESIDUAL_TOL * scale.powi(self.n as i32) {
                return Err(LgError::RootResidual(res));
            }
        }
        roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        Ok(roots)
    }

    /// Critical values `u_i = W(α_i)` in critical-point order.
    pub fn canonical_coords(&self) -> Result<Vec<Scalar>, LgError> {
        self.critical_points()?.into_iter().map(|a| self.eval_w(a)).collect()
    }

    /// `(α_i − v_{m+1})^{m+1} / Π_{j≠i}(α_i − α_j)`.
    pub fn lame_coeffs(&self, alpha: &[Scalar]) -> Vec<Scalar> {
        alpha
            .iter()
            .enumerate()
            .map(|(i, &ai)| {
                let num = if self.m == 0 {
                    c(1.0)
                } else {
                    (ai - self.v[self.m]).powi(self.m as i32 + 1)
                };
                let den: Scalar = alpha
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &aj)| ai - aj)
                    .product();
                num / den
            })
            .collect()
    }
}

/// Residue pairing `Σ_i t₁(α_i) t₂(α_i) / W″(α_i)` of two tangent
/// functions of `z` (expressions in `Var(0)`).
pub fn residue_pairing(p: &RationalPotential, t1: &Expr, t2: &Expr) -> Result<Scalar, LgError> {
    let alpha = p.critical_points()?;
    let scale = alpha.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut acc = c(0.0);
    for a in alpha {
        let w2 = p.w_second(a)?;
        if w2.norm() < NEAR_DEGENERATE_W2 * scale {
            return Err(LgError::Degenerate(w2.norm()));
        }
        acc += t1.eval_scalar(&[a])? * t2.eval_scalar(&[a])? / w2;
    }
    Ok(acc)
}

/// A family of rational potentials of fixed shape `(n, m)`, parametrized by
/// the coordinates `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LgModel {
    pub n: usize,
    pub m: usize,
}

impl LgModel {
    pub fn new(n: usize, m: usize) -> Result<Self, LgError> {
        if n == 0 {
            return Err(LgError::Invalid("n must be at least 1".into()));
        }
        Ok(LgModel { n, m })
    }

    /// The n = m = 1 model `W = z²/2 + x₁ + x₂/(z − x₃)`.
    pub fn n3() -> Self {
        LgModel { n: 1, m: 1 }
    }

    pub fn dim(&self) -> usize {
        if self.m == 0 {
            self.n
        } else {
            self.n + self.m + 1
        }
    }

    /// Position of `a_{n−1}` in `X`.
    pub fn top_a_index(&self) -> usize {
        self.n - 1
    }

    fn check_len(&self, x: &[Scalar]) -> Result<(), LgError> {
        if x.len() != self.dim() {
            return Err(LgError::Invalid(format!("expected {} coordinates, got {}", self.dim(), x.len())));
        }
        Ok(())
    }

    pub fn potential(&self, x: &[Scalar]) -> Result<RationalPotential, LgError> {
        self.check_len(x)?;
        let a = x[..self.n].to_vec();
        let v = if self.m == 0 { Vec::new() } else { flat_to_v(&x[self.n..]) };
        RationalPotential::new(self.n, self.m, a, v)
    }

    fn coeff_jets(&self, x: &[Scalar], order: usize) -> Result<Coeffs, LgError> {
        self.check_len(x)?;
        let space = JetSpace::new(self.dim(), order);
        let vars = space.vars(x)?;
        let a = vars[..self.n].to_vec();
        let v = if self.m == 0 { Vec::new() } else { flat_to_v_jets(&vars[self.n..]) };
        Ok(Coeffs { n: self.n, m: self.m, a, v })
    }

    /// `∂W/∂X_α` at fixed `z`.
    pub fn tangents_at(&self, x: &[Scalar], z: Scalar) -> Result<Vec<Scalar>, LgError> {
        let co = self.coeff_jets(x, 1)?;
        let zj = co.space().constant(z);
        Ok(co.w(&zj)?.gradient()?)
    }

    /// The tangent functions `z ↦ ∂W/∂X_α(z)` as expressions in `Var(0)`.
    pub fn flat_tangent_exprs(&self, x: &[Scalar]) -> Result<Vec<Expr>, LgError> {
        let p = self.potential(x)?;
        let z = Expr::var(0);
        let mut out: Vec<Expr> = (0..self.n)
            .map(|k| if k == 0 { Expr::real(1.0) } else { z.clone().powf(k as f64) })
            .collect();
        if self.m == 0 {
            return Ok(out);
        }
        let co = self.coeff_jets(x, 1)?;
        let dv: Vec<Vec<Scalar>> = co.v.iter().map(|vk| vk.gradient()).collect::<Result<_, _>>()?;
        let d = z - Expr::constant(p.v[self.m]);
        for beta in 0..=self.m {
            let slot = self.n + beta;
            let mut terms = Vec::new();
            for k in 1..=self.m {
                let coef = dv[k - 1][slot];
                if coef.norm() != 0.0 {
                    terms.push(Expr::constant(coef / k as f64) * d.clone().powf(-(k as f64)));
                }
            }
            if beta == self.m {
                for k in 1..=self.m {
                    terms.push(Expr::constant(p.v[k - 1]) * d.clone().powf(-(k as f64) - 1.0));
                }
            }
            out.push(if terms.is_empty() { Expr::real(0.0) } else { Expr::Add(terms) });
        }
        Ok(out)
    }

    /// Residue metric over the coordinate frame.
    pub fn metric(&self, x: &[Scalar]) -> Result<CMat, LgError> {
        let p = self.potential(x)?;
        let alpha = p.critical_points()?;
        let n = self.dim();
        let mut g = CMat::zeros(n, n);
        for a in alpha {
            let t = self.tangents_at(x, a)?;
            let w2 = p.w_second(a)?;
            for i in 0..n {
                for j in 0..n {
                    g[(i, j)] += t[i] * t[j] / w2;
                }
            }
        }
        Ok(g)
    }

    /// `c_{αβγ} = Σ_i (∂_αW ∂_βW ∂_γW / W″)(α_i)`.
    pub fn structure_tensor(&self, x: &[Scalar]) -> Result<StructureTensor, LgError> {
        let p = self.potential(x)?;
        let alpha = p.critical_points()?;
        let scale = alpha.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let n = self.dim();
        let mut data = Vec::new();
        for a in alpha {
            let w2 = p.w_second(a)?;
            if w2.norm() < NEAR_DEGENERATE_W2 * scale {
                return Err(LgError::Degenerate(w2.norm()));
            }
            data.push((self.tangents_at(x, a)?, w2));
        }
        Ok(StructureTensor::from_fn(n, |i, j, k| {
            data.iter().map(|(t, w2)| t[i] * t[j] * t[k] / w2).sum()
        }))
    }

    pub fn chart(&self, x: &[Scalar]) -> Result<CanonicalChart, LgError> {
        self.chart_near(x, None)
    }

    /// Chart whose critical points are matched to `reference` by nearest
    /// neighbour and whose square roots `h_i` continue the reference signs.
    pub fn chart_near(&self, x: &[Scalar], reference: Option<&CanonicalChart>) -> Result<CanonicalChart, LgError> {
        let p = self.potential(x)?;
        let mut alpha = p.critical_points()?;
        if let Some(r) = reference {
            alpha = match_roots(&r.alpha, &alpha);
        }
        let co = self.coeff_jets(x, 1)?;
        let n = self.dim();
        let mut du_dx = CMat::zeros(n, n);
        let mut dh_dx = CMat::zeros(n, n);
        let mut u = Vec::with_capacity(n);
        let mut h_sq = Vec::with_capacity(n);
        for (i, &a) in alpha.iter().enumerate() {
            let mut z = co.space().constant(a);
            for _ in 0..3 {
                z = &z - &co.w1(&z)?.try_div(&co.w2(&z)?)?;
            }
            let ui = co.w(&z)?;
            let hi = co.w2(&z)?.recip()?;
            for (k, g) in ui.gradient()?.into_iter().enumerate() {
                du_dx[(i, k)] = g;
            }
            for (k, g) in hi.gradient()?.into_iter().enumerate() {
                dh_dx[(i, k)] = g;
            }
            u.push(ui.value());
            h_sq.push(hi.value());
        }
        let dx_du = linalg::inverse(&du_dx).ok_or_else(|| LgError::Chart("singular Jacobian ∂u/∂x".into()))?;
        let pair = linalg::max_abs_diff(&(&dx_du * &du_dx), &linalg::identity(n));
        if pair > JACOBIAN_PAIR_TOL {
            return Err(LgError::Chart(format!("Jacobian pair deviates from identity by {pair:e}")));
        }
        let mut h = Vec::with_capacity(n);
        let mut signs = Vec::with_capacity(n);
        for (i, &hs) in h_sq.iter().enumerate() {
            let (root, sign) = linalg::sqrt_near(hs, reference.map(|r| r.h[i]));
            h.push(root);
            signs.push(sign);
        }
        // ∂h_i²/∂u_j = Σ_α (∂h_i²/∂x_α)(∂x_α/∂u_j)
        let dh_du = &dh_dx * &dx_du;
        let beta = CMat::from_fn(n, n, |i, j| {
            if i == j {
                c(0.0)
            } else {
                dh_du[(i, j)] / (h[i] * h[j] * 2.0)
            }
        });
        Ok(CanonicalChart {
            model: *self,
            flat_point: x.to_vec(),
            potential: p,
            alpha,
            u,
            h_sq,
            h,
            branch_signs: signs,
            beta,
            du_dx,
            dx_du,
            dh_sq_du: dh_du,
        })
    }

    /// Chart at the point whose canonical coordinates are `target`, found by
    /// Newton iteration from `base` with the exact Jacobian.
    pub fn chart_at_u(&self, base: &CanonicalChart, target: &[Scalar]) -> Result<CanonicalChart, LgError> {
        let mut chart = base.clone();
        let scale = target.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let mut last = f64::INFINITY;
        for _ in 0..50 {
            let du: Vec<Scalar> = chart.u.iter().zip(target).map(|(a, b)| a - b).collect();
            let err = du.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if err <= 4.0 * f64::EPSILON * scale || (err >= last && err < 1e-12 * scale) {
                return Ok(chart);
            }
            last = err;
            let dv = nalgebra::DVector::from_vec(du);
            let dx = &chart.dx_du * dv;
            let x: Vec<Scalar> = chart.flat_point.iter().zip(dx.iter()).map(|(a, d)| a - d).collect();
            chart = self.chart_near(&x, Some(&chart))?;
        }
        Err(LgError::Chart("local inversion u → x did not converge".into()))
    }
}

/// Reorder `new` to follow `reference` (greedy nearest pairs).
fn match_roots(reference: &[Scalar], new: &[Scalar]) -> Vec<Scalar> {
    let mut pairs = Vec::new();
    for (i, r) in reference.iter().enumerate() {
        for (j, z) in new.iter().enumerate() {
            pairs.push(((r - z).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = vec![None; reference.len()];
    let mut used = BTreeSet::new();
    for (_, i, j) in pairs {
        if out[i].is_none() && !used.contains(&j) {
            out[i] = Some(new[j]);
            used.insert(j);
        }
    }
    out.into_iter().map(|z| z.expect("square matching")).collect()
}

/// Canonical-coordinate data at one point of an [`LgModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalChart {
    pub model: LgModel,
    pub flat_point: Vec<Scalar>,
    pub potential: RationalPotential,
    pub alpha: Vec<Scalar>,
    pub u: Vec<Scalar>,
    pub h_sq: Vec<Scalar>,
    /// Chosen square roots of `h_sq`.
    pub h: Vec<Scalar>,
    /// `+1` where `h` is the principal root, `−1` where it was flipped.
    pub branch_signs: Vec<i8>,
    /// Rotation coefficients `β_ij = ∂_j h_i² / (2 h_i h_j)`.
    pub beta: CMat,
    /// `∂u_i/∂x_α`, rows `i`.
    pub du_dx: CMat,
    /// `∂x_α/∂u_i`, rows `α`.
    pub dx_du: CMat,
    /// `∂h_i²/∂u_j`.
    pub dh_sq_du: CMat,
}

impl CanonicalChart {
    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn beta_asymmetry(&self) -> f64 {
        linalg::max_abs_diff(&self.beta, &self.beta.transpose())
    }

    /// `V_ij = (u_j − u_i) β_ij`.
    pub fn v_matrix(&self) -> CMat {
        CMat::from_fn(self.dim(), self.dim(), |i, j| (self.u[j] - self.u[i]) * self.beta[(i, j)])
    }

    /// `(V_j)_kl = (δ_lj − δ_kj) β_kl` for each `j`.
    pub fn v_j(&self) -> Vec<CMat> {
        let n = self.dim();
        (0..n)
            .map(|j| {
                CMat::from_fn(n, n, |k, l| {
                    let w = f64::from(u8::from(l == j)) - f64::from(u8::from(k == j));
                    self.beta[(k, l)] * w
                })
            })
            .collect()
    }

    /// `m_{iα} = h_i ∂u_i/∂x_α`, so that `Σ_i m_{iα} m_{iβ} = η_{αβ}` and
    /// the unit column is `m_{i1} = h_i`.
    pub fn m_matrix(&self) -> CMat {
        CMat::from_fn(self.dim(), self.dim(), |i, a| self.h[i] * self.du_dx[(i, a)])
    }

    /// JSON record with complex numbers as `[re, im]` pairs.
    pub fn to_json(&self) -> Value {
        let z = |w: &Scalar| json!([w.re, w.im]);
        let zs = |v: &[Scalar]| Value::Array(v.iter().map(z).collect());
        let beta: Vec<Value> = (0..self.dim())
            .map(|i| Value::Array((0..self.dim()).map(|j| z(&self.beta[(i, j)])).collect()))
            .collect();
        json!({
            "n": self.model.n,
            "m": self.model.m,
            "flat_point": zs(&self.flat_point),
            "alpha": zs(&self.alpha),
            "u": zs(&self.u),
            "h_sq": zs(&self.h_sq),
            "beta": beta,
            "branch_signs": self.branch_signs,
        })
    }
}

/// The two matrix-valued results of [`v_matrices`].
pub fn v_matrices(chart: &CanonicalChart) -> (Vec<CMat>, CMat) {
    (chart.v_j(), chart.v_matrix())
}

/// Residuals of the three Darboux–Egoroff equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarbouxEgoroff {
    /// `∂_k β_ij − β_ik β_kj`, distinct `i, j, k`.
    pub compatibility: f64,
    /// `Σ_k ∂_k β_ij`.
    pub translation: f64,
    /// `Σ_k u_k ∂_k β_ij + β_ij`.
    pub conformal: f64,
}

impl DarbouxEgoroff {
    pub fn max(&self) -> f64 {
        self.compatibility.max(self.translation).max(self.conformal)
    }
}

/// Darboux–Egoroff residuals of an arbitrary β field given as a function
/// of `u`, with Richardson central differences of step `h`.
pub fn darboux_egoroff_residual<E>(
    field: &mut impl FnMut(&[Scalar]) -> Result<CMat, E>,
    u: &[Scalar],
    h: f64,
) -> Result<DarbouxEgoroff, E> {
    let n = u.len();
    let beta = field(u)?;
    let d: Vec<CMat> = (0..n)
        .map(|k| richardson_matrix(field, u, k, h))
        .collect::<Result<_, _>>()?;
    let mut out = DarbouxEgoroff {
        compatibility: 0.0,
        translation: 0.0,
        conformal: 0.0,
    };
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for k in (0..n).filter(|&k| k != i && k != j) {
                let r = d[k][(i, j)] - beta[(i, k)] * beta[(k, j)];
                out.compatibility = out.compatibility.max(r.norm());
            }
            let s: Scalar = (0..n).map(|k| d[k][(i, j)]).sum();
            out.translation = out.translation.max(s.norm());
            let e: Scalar = (0..n).map(|k| u[k] * d[k][(i, j)]).sum::<Scalar>() + beta[(i, j)];
            out.conformal = out.conformal.max(e.norm());
        }
    }
    Ok(out)
}

/// Finite-difference step in `u` scaled by the coordinate magnitude, and
/// refused when it is not small against the gaps between the `u_i`.
pub fn u_step(chart: &CanonicalChart, rel_step: f64) -> Result<f64, LgError> {
    let scale = chart.u.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let h = rel_step * scale;
    let mut gap = f64::INFINITY;
    for i in 0..chart.dim() {
        for j in 0..i {
            gap = gap.min((chart.u[i] - chart.u[j]).norm());
        }
    }
    if h > 0.05 * gap {
        return Err(LgError::Chart(format!("step {h:e} too large for canonical gap {gap:e}")));
    }
    Ok(h)
}

/// Darboux–Egoroff residuals of a model's β field around `chart`.
pub fn model_darboux_egoroff(model: &LgModel, chart: &CanonicalChart, rel_step: f64) -> Result<DarbouxEgoroff, LgError> {
    let h = u_step(chart, rel_step)?;
    let mut field = |u: &[Scalar]| model.chart_at_u(chart, u).map(|c| c.beta);
    darboux_egoroff_residual(&mut field, &chart.u, h)
}

/// `max_j |∂_j V − [V_j, V]|` with ∂_j by finite differences.
pub fn pjv_residual(model: &LgModel, chart: &CanonicalChart, rel_step: f64) -> Result<f64, LgError> {
    let h = u_step(chart, rel_step)?;
    let mut field = |u: &[Scalar]| model.chart_at_u(chart, u).map(|c| c.v_matrix());
    let v = chart.v_matrix();
    let vj = chart.v_j();
    let mut worst: f64 = 0.0;
    for j in 0..chart.dim() {
        let d = richardson_matrix(&mut field, &chart.u, j, h)?;
        worst = worst.max(linalg::max_abs_diff(&d, &linalg::commutator(&vj[j], &v)));
    }
    Ok(worst)
}

/// Lamé coefficients against `∂a_{n−1}/∂u_i` computed by finite
/// differences through the local inverse `x(u)`. Returns the largest
/// relative difference.
pub fn lame_fd_check(model: &LgModel, chart: &CanonicalChart, rel_step: f64) -> Result<f64, LgError> {
    let h = u_step(chart, rel_step)?;
    let top = model.top_a_index();
    let mut field = |u: &[Scalar]| {
        model
            .chart_at_u(chart, u)
            .map(|c| CMat::from_element(1, 1, c.flat_point[top]))
    };
    let mut worst: f64 = 0.0;
    for i in 0..chart.dim() {
        let d = richardson_matrix(&mut field, &chart.u, i, h)?[(0, 0)];
        worst = worst.max((d - chart.h_sq[i]).norm() / chart.h_sq[i].norm());
    }
    Ok(worst)
}

/// Idempotent and tensor reconstruction residuals from the m-matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdempotentCheck {
    /// `max |C_i C_j − δ_ij C_i|`.
    pub idempotent: f64,
    /// `|Σ C_i − Id|`.
    pub partition: f64,
    /// `Σ_j m m m / m_{j1}` against the residue tensor.
    pub tensor: f64,
    /// `Σ_i m_{iα} m_{iβ}` against η.
    pub orthogonality: f64,
}

pub fn idempotent_check(chart: &CanonicalChart, eta: &FlatMetric) -> Result<IdempotentCheck, LgError> {
    let n = chart.dim();
    if eta.n() != n {
        return Err(LgError::Invalid(format!("metric has dimension {}, chart {}", eta.n(), n)));
    }
    let m = chart.m_matrix();
    let minv = linalg::inverse(&m).ok_or_else(|| LgError::Chart("singular m-matrix".into()))?;
    let cs: Vec<CMat> = (0..n).map(|j| &minv * linalg::unit(n, j) * &m).collect();
    let mut idem: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { cs[i].clone() } else { CMat::zeros(n, n) };
            idem = idem.max(linalg::max_abs_diff(&(&cs[i] * &cs[j]), &target));
        }
    }
    let sum = cs.iter().fold(CMat::zeros(n, n), |acc, x| acc + x);
    let partition = linalg::max_abs_diff(&sum, &linalg::identity(n));
    let rebuilt = StructureTensor::from_fn(n, |a, b, g| (0..n).map(|j| m[(j, a)] * m[(j, b)] * m[(j, g)] / m[(j, 0)]).sum());
    let residue = chart.model.structure_tensor(&chart.flat_point)?;
    let eta_c = eta.eta().map(c);
    let ortho = linalg::max_abs_diff(&(m.transpose() * &m), &eta_c);
    Ok(IdempotentCheck {
        idempotent: idem,
        partition,
        tensor: rebuilt.max_abs_diff(&residue),
        orthogonality: ortho,
    })
}

/// The identity and Euler vector fields acting on the coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldCheck {
    /// `max_α |Σ_i ∂x_α/∂u_i − δ_{α0}|`.
    pub identity: f64,
    /// `max_α |Σ_i u_i ∂x_α/∂u_i − (1 + μ₀ − μ_α) x_α|`.
    pub euler: f64,
    /// Diagonal of `M⁻¹ V M`.
    pub mu: Vec<Scalar>,
    /// Largest off-diagonal entry of `M⁻¹ V M`.
    pub mu_offdiag: f64,
}

pub fn vector_field_check(chart: &CanonicalChart) -> Result<VectorFieldCheck, LgError> {
    let n = chart.dim();
    let m = chart.m_matrix();
    let minv = linalg::inverse(&m).ok_or_else(|| LgError::Chart("singular m-matrix".into()))?;
    let mu_mat = &minv * chart.v_matrix() * &m;
    let mu: Vec<Scalar> = (0..n).map(|a| mu_mat[(a, a)]).collect();
    let mut offdiag: f64 = 0.0;
    for a in 0..n {
        for b in (0..n).filter(|&b| b != a) {
            offdiag = offdiag.max(mu_mat[(a, b)].norm());
        }
    }
    let mut identity: f64 = 0.0;
    let mut euler: f64 = 0.0;
    for a in 0..n {
        let i_val: Scalar = (0..n).map(|i| chart.dx_du[(a, i)]).sum();
        identity = identity.max((i_val - c(if a == 0 { 1.0 } else { 0.0 })).norm());
        let e_val: Scalar = (0..n).map(|i| chart.u[i] * chart.dx_du[(a, i)]).sum();
        let predicted = (c(1.0) + mu[0] - mu[a]) * chart.flat_point[a];
        euler = euler.max((e_val - predicted).norm());
    }
    Ok(VectorFieldCheck {
        identity,
        euler,
        mu,
        mu_offdiag: offdiag,
    })
}

/// Comparisons against the closed forms of the n = m = 1 model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormN3 {
    /// `h_i² = (α_i − x₃)/(3α_i − x₃)`.
    pub lame: f64,
    /// Jacobian entries against their closed forms.
    pub jacobian: f64,
    /// `β_ij` against the closed form, up to the overall sign of each entry.
    pub beta: f64,
    /// `β_ij²` against `−(α_i−α_j)^{−2}(4x₃−3α_k)^{−2} ∂x₁/∂u_k`.
    pub beta_sq: f64,
    /// `ω_k² + ¼ h_k²` with `ω_k = (u_j − u_i) β_ij`, cyclic.
    pub omega: f64,
}

pub fn closed_form_n3(chart: &CanonicalChart) -> Result<ClosedFormN3, LgError> {
    if chart.model != LgModel::n3() {
        return Err(LgError::Invalid("closed forms exist only for n = m = 1".into()));
    }
    let x3 = chart.flat_point[2];
    let al = &chart.alpha;
    let mut out = ClosedFormN3 {
        lame: 0.0,
        jacobian: 0.0,
        beta: 0.0,
        beta_sq: 0.0,
        omega: 0.0,
    };
    for i in 0..3 {
        let a = al[i];
        let hs = (a - x3) / (a * 3.0 - x3);
        out.lame = out.lame.max((chart.h_sq[i] - hs).norm());
        let du = [c(1.0), c(1.0) / (a - x3), a];
        let dx = [hs, a * (a - x3) / (a * 3.0 - x3), c(1.0) / (a * 3.0 - x3)];
        for k in 0..3 {
            out.jacobian = out.jacobian.max((chart.du_dx[(i, k)] - du[k]).norm());
            out.jacobian = out.jacobian.max((chart.dx_du[(k, i)] - dx[k]).norm());
        }
    }
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let p = |a: Scalar| (a - x3) * (a * 3.0 - x3);
        let closed = -(al[k] - x3) * (al[k] * 3.0 - x3) / ((al[i] * 3.0 - x3) * (al[j] * 3.0 - x3)) / (p(al[i]) * p(al[j])).sqrt();
        let b = chart.beta[(i, j)];
        out.beta = out.beta.max((b - closed).norm().min((b + closed).norm()));
        let dx1_duk = (al[k] - x3) / (al[k] * 3.0 - x3);
        let sq = -dx1_duk / ((al[i] - al[j]).powi(2) * (x3 * 4.0 - al[k] * 3.0).powi(2));
        out.beta_sq = out.beta_sq.max((b * b - sq).norm());
        let omega = (chart.u[j] - chart.u[i]) * b;
        out.omega = out.omega.max((omega * omega + chart.h_sq[k] * 0.25).norm());
    }
    Ok(out)
}

/// Flat-frame metric residue pairing over a set of points: returns the
/// largest entrywise spread and the first metric seen.
pub fn metric_constancy(model: &LgModel, points: &[Vec<Scalar>]) -> Result<(f64, CMat), LgError> {
    let first = model.metric(&points[0])?;
    let mut spread: f64 = 0.0;
    for p in &points[1..] {
        spread = spread.max(linalg::max_abs_diff(&model.metric(p)?, &first));
    }
    Ok((spread, first))
}

/// Metric of the n = m = 1 model as a real matrix (imaginary parts dropped
/// after checking they vanish).
pub fn real_part(m: &CMat) -> DMatrix<f64> {
    m.map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(xs: &[f64]) -> Vec<Scalar> {
        xs.iter().map(|&x| c(x)).collect()
    }

    #[test]
    fn v_from_flat_coordinates() {
        let v = flat_to_v(&pt(&[2.0, 5.0]));
        assert_eq!(v, pt(&[2.0, 5.0]));
        let v = flat_to_v(&pt(&[2.0, 3.0, 7.0]));
        assert_eq!(v, pt(&[2.0, 9.0, 7.0]));
        let v = flat_to_v(&pt(&[2.0, 3.0, 5.0, 11.0]));
        assert_eq!(v[1], c(2.0 * 3.0 * 5.0));
        assert_eq!(v[2], c(125.0));
        assert_eq!(v[3], c(11.0));
    }

    #[test]
    fn tuple_enumeration_matches_brute_force() {
        for m in 1usize..=4 {
            for k in 1..=m {
                let target = (k - 1) * m + k;
                let mut brute = 0;
                let total = m.pow(k as u32);
                for code in 0..total {
                    let mut c = code;
                    let mut s = 0;
                    for _ in 0..k {
                        s += c % m + 1;
                        c /= m;
                    }
                    if s == target {
                        brute += 1;
                    }
                }
                assert_eq!(v_tuples(m, k).len(), brute, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn evaluate_w() {
        let p = LgModel::n3().potential(&pt(&[0.0, 1.0, 0.0])).unwrap();
        assert!((p.eval_w(c(1.0)).unwrap() - c(1.5)).norm() < 1e-15);
        assert!(matches!(p.eval_w(c(0.0)), Err(LgError::Pole(_))));
        let q = LgModel::new(2, 0).unwrap().potential(&pt(&[0.5, -1.0])).unwrap();
        let z = c(1.3);
        let expect = z.powi(3) / 3.0 - z + 0.5;
        assert!((q.eval_w(z).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn cube_roots_of_unity() {
        let p = LgModel::n3().potential(&pt(&[0.0, 1.0, 0.0])).unwrap();
        let a = p.critical_points().unwrap();
        assert_eq!(a.len(), 3);
        for z in &a {
            assert!((z.powi(3) - c(1.0)).norm() < 1e-13);
        }
        assert!(a[0].re < a[2].re);
    }

    #[test]
    fn double_root_is_rejected() {
        let w = 3.0f64;
        let x2 = 4.0 * (w * w - 1.0).powi(2) / (w * w + 3.0).powi(3);
        let p = LgModel::n3().potential(&pt(&[0.0, x2, 1.0])).unwrap();
        assert!(matches!(p.critical_points(), Err(LgError::Degenerate(_))));
    }

    #[test]
    fn polynomial_roots() {
        let p = LgModel::new(2, 0).unwrap().potential(&pt(&[0.0, -1.0])).unwrap();
        let a = p.critical_points().unwrap();
        assert!((a[0] - c(-1.0)).norm() < 1e-14 && (a[1] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn canonical_sum_rules() {
        let model = LgModel::n3();
        let x = pt(&[0.7, 1.3, 0.0]);
        let p = model.potential(&x).unwrap();
        let alpha = p.critical_points().unwrap();
        let u = p.canonical_coords().unwrap();
        for (a, ui) in alpha.iter().zip(&u) {
            assert!((ui - (c(0.7) + a * a * 1.5)).norm() < 1e-13);
        }
        let s: Scalar = u.iter().sum();
        assert!((s - c(2.1)).norm() < 1e-13);
        let y = pt(&[0.3, 1.1, 0.8]);
        let s2: Scalar = model.potential(&y).unwrap().canonical_coords().unwrap().iter().sum();
        assert!((s2 - c(0.9 + 0.64)).norm() < 1e-13);
    }

    #[test]
    fn residue_metric_of_rational_model() {
        let model = LgModel::n3();
        let x = pt(&[0.4, 1.7, 0.9]);
        let g = model.metric(&x).unwrap();
        let eta = FlatMetric::rational_n3().eta().map(c);
        assert!(linalg::max_abs_diff(&g, &eta) < 1e-12);
        let p = model.potential(&x).unwrap();
        let t = model.flat_tangent_exprs(&x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let r = residue_pairing(&p, &t[i], &t[j]).unwrap();
                assert!((r - eta[(i, j)]).norm() < 1e-12);
            }
        }
        let two = Expr::real(2.0) * t[1].clone();
        let lhs = residue_pairing(&p, &two, &t[2]).unwrap();
        assert!((lhs - residue_pairing(&p, &t[1], &t[2]).unwrap() * 2.0).norm() < 1e-13);
    }

    #[test]
    fn canonical_frame_is_orthogonal() {
        let model = LgModel::n3();
        let x = pt(&[0.4, 1.7, 0.9]);
        let chart = model.chart(&x).unwrap();
        let p = model.potential(&x).unwrap();
        let t = model.flat_tangent_exprs(&x).unwrap();
        let canon: Vec<Expr> = (0..3)
            .map(|i| Expr::Add((0..3).map(|a| Expr::constant(chart.dx_du[(a, i)]) * t[a].clone()).collect()))
            .collect();
        for i in 0..3 {
            for j in 0..3 {
                let g = residue_pairing(&p, &canon[i], &canon[j]).unwrap();
                let expect = if i == j { chart.h_sq[i] } else { c(0.0) };
                assert!((g - expect).norm() < 1e-11, "{i}{j} {g}");
            }
        }
    }

    #[test]
    fn residue_tensor_values() {
        let x = pt(&[1.0, 2.0, 3.0]);
        let t = LgModel::n3().structure_tensor(&x).unwrap();
        let expect = [((0, 0, 0), 1.0), ((0, 1, 2), 1.0), ((1, 1, 1), 0.5), ((1, 2, 2), 3.0), ((2, 2, 2), 2.0)];
        for ((a, b, g), v) in expect {
            assert!((t.get(a, b, g) - c(v)).norm() < 1e-10);
        }
        assert!(t.symmetry_defect() < 1e-12);
        let f = crate::frobenius::third_tensor(&crate::expr::library::rational_n3(), &x).unwrap();
        assert!(t.max_abs_diff(&f) < 1e-10);
    }

    #[test]
    fn lame_coefficients() {
        let model = LgModel::n3();
        let chart = model.chart(&pt(&[0.2, 1.0, 0.0])).unwrap();
        let s: Scalar = chart.h_sq.iter().sum();
        for h in &chart.h_sq {
            assert!((h - c(1.0 / 3.0)).norm() < 1e-13);
        }
        assert!((s - c(1.0)).norm() < 1e-13);
        let chart = model.chart(&pt(&[0.2, 1.3, 0.7])).unwrap();
        let closed = chart.potential.lame_coeffs(&chart.alpha);
        for (a, b) in closed.iter().zip(&chart.h_sq) {
            assert!((a - b).norm() < 1e-12);
        }
        let cf = closed_form_n3(&chart).unwrap();
        assert!(cf.lame < 1e-12 && cf.jacobian < 1e-11, "{cf:?}");
        assert!(lame_fd_check(&model, &chart, 1e-4).unwrap() < 1e-6);
    }

    #[test]
    fn rotation_coefficients() {
        let chart = LgModel::n3().chart(&pt(&[0.2, 1.3, 0.7])).unwrap();
        assert!(chart.beta_asymmetry() < 1e-8);
        let cf = closed_form_n3(&chart).unwrap();
        assert!(cf.beta < 1e-10 && cf.beta_sq < 1e-10 && cf.omega < 1e-10, "{cf:?}");
    }

    #[test]
    fn darboux_egoroff_on_rational_model() {
        let model = LgModel::n3();
        let chart = model.chart(&pt(&[0.3, 1.2, 0.8])).unwrap();
        let r = model_darboux_egoroff(&model, &chart, 1e-4).unwrap();
        assert!(r.max() < 1e-5, "{r:?}");
    }

    #[test]
    fn constant_beta_field() {
        let b = CMat::from_fn(3, 3, |i, j| if i == j { c(0.0) } else { c(0.5 + (i + j) as f64) });
        let mut field = |_: &[Scalar]| -> Result<CMat, ()> { Ok(b.clone()) };
        let r = darboux_egoroff_residual(&mut field, &pt(&[0.0, 1.0, 2.0]), 1e-3).unwrap();
        let mut expect: f64 = 0.0;
        for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0), (1, 0, 2), (2, 0, 1), (2, 1, 0)] {
            expect = expect.max((b[(i, k)] * b[(k, j)]).norm());
        }
        assert!((r.compatibility - expect).abs() < 1e-12);
        assert_eq!(r.translation, 0.0);
    }

    #[test]
    fn beta_scales_inversely_with_u() {
        let model = LgModel::n3();
        let x = pt(&[0.3, 1.2, 0.8]);
        let lam = 2.0f64;
        let xs = vec![x[0] * lam, x[1] * lam.powf(1.5), x[2] * lam.powf(0.5)];
        let a = model.chart(&x).unwrap();
        let b = model.chart_near(&xs, Some(&a)).unwrap();
        for (ua, ub) in a.u.iter().zip(&b.u) {
            assert!((ub - ua * lam).norm() < 1e-12);
        }
        for i in 0..3 {
            for j in 0..3 {
                let diff = (b.beta[(i, j)] * lam - a.beta[(i, j)]).norm();
                let flipped = (b.beta[(i, j)] * lam + a.beta[(i, j)]).norm();
                assert!(diff.min(flipped) < 1e-11);
            }
        }
    }

    #[test]
    fn v_matrix_identities() {
        let model = LgModel::n3();
        let chart = model.chart(&pt(&[0.3, 1.2, 0.8])).unwrap();
        let (vj, v) = v_matrices(&chart);
        let sum = vj.iter().fold(CMat::zeros(3, 3), |a, b| a + b);
        assert!(linalg::max_abs(&sum) < 1e-14);
        let weighted = vj.iter().zip(&chart.u).fold(CMat::zeros(3, 3), |a, (b, u)| a + b * *u);
        assert!(linalg::max_abs_diff(&weighted, &v) < 1e-12);
        assert!(linalg::max_abs_diff(&v, &-v.transpose()) < 1e-8);
        let omega_sq = v[(1, 2)].powi(2) + v[(2, 0)].powi(2) + v[(0, 1)].powi(2);
        assert!((omega_sq + c(0.25)).norm() < 1e-10);
        assert!(pjv_residual(&model, &chart, 1e-4).unwrap() < 1e-5);
    }

    #[test]
    fn idempotents_and_vector_fields() {
        let model = LgModel::n3();
        let chart = model.chart(&pt(&[0.3, 1.2, 0.8])).unwrap();
        let r = idempotent_check(&chart, &FlatMetric::rational_n3()).unwrap();
        assert!(r.idempotent < 1e-9 && r.partition < 1e-10 && r.tensor < 1e-8 && r.orthogonality < 1e-8, "{r:?}");
        let v = vector_field_check(&chart).unwrap();
        assert!(v.identity < 1e-10 && v.euler < 1e-9 && v.mu_offdiag < 1e-9, "{v:?}");
        let half_sum: Scalar = v.mu.iter().map(|m| m * m).sum::<Scalar>() * 0.5;
        assert!((half_sum - c(0.25)).norm() < 1e-9);
    }

    #[test]
    fn chart_json_shape() {
        let chart = LgModel::n3().chart(&pt(&[0.3, 1.2, 0.8])).unwrap();
        let j = chart.to_json();
        for key in ["n", "m", "flat_point", "alpha", "u", "h_sq", "beta", "branch_signs"] {
            assert!(j.get(key).is_some(), "{key}");
        }
        assert_eq!(j["alpha"][0].as_array().unwrap().len(), 2);
    }

    #[test]
    fn polynomial_case_chart() {
        let model = LgModel::new(2, 0).unwrap();
        let x = pt(&[0.4, -1.3]);
        let chart = model.chart(&x).unwrap();
        let g = model.metric(&x).unwrap();
        assert!(linalg::max_abs_diff(&g, &FlatMetric::antidiagonal2().eta().map(c)) < 1e-12);
        let closed = chart.potential.lame_coeffs(&chart.alpha);
        for i in 0..2 {
            assert!((closed[i] - chart.h_sq[i]).norm() < 1e-12);
            assert!((chart.dx_du[(1, i)] - chart.h_sq[i]).norm() < 1e-12);
        }
        let v = vector_field_check(&chart).unwrap();
        assert!(v.identity < 1e-12 && v.euler < 1e-10, "{v:?}");
    }

    #[test]
    fn general_shape_runs() {
        let model = LgModel::new(1, 2).unwrap();
        let x = pt(&[0.2, 0.9, 0.7, 0.3]);
        let g1 = model.metric(&x).unwrap();
        let g2 = model.metric(&pt(&[-0.4, 1.3, 0.5, -0.2])).unwrap();
        assert!(linalg::max_abs_diff(&g1, &g2) < 1e-9);
        let chart = model.chart(&x).unwrap();
        assert!(chart.beta_asymmetry() < 1e-8);
        let r = model_darboux_egoroff(&model, &chart, 1e-4).unwrap();
        assert!(r.max() < 1e-5, "{r:?}");
    }
}
