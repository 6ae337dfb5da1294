//! The two-dimensional family labelled by a real parameter `R`.
//!
//! With `τ₀ = u₁ − u₂`, the dressing data are `V = Rσ₂`, `μ = diag(R, −R)`
//! and `𝒰 = ½[[u₁+u₂, τ₀^{1−2R}], [τ₀^{1+2R}, u₁+u₂]]`. The matrices `Ξ^(n)`
//! obey `(n − ad_μ) Ξ^(n) = 𝒰 Ξ^(n−1)` and the prepotential is
//! `F = ½(−Ξ^(3)₂₁ + x¹Ξ^(2)₂₁ + x²Ξ^(2)₂₂)`.
//!
//! Two independent routes produce `Ξ`:
//!
//! * **algebraic**: divide entrywise by `n − μ_α + μ_β`. This is exact
//!   whenever no divisor vanishes for the orders involved.
//! * **flow**: integrate `∂_σ Ξ^(n) = ½ Ξ^(n−1)` and
//!   `∂_τ Ξ^(n) = ½ [[0, τ^{−2R}], [τ^{2R}, 0]] Ξ^(n−1)` in closed form on
//!   the class of sums `c σ^a τ^p (log τ)^k`, where `σ = u₁+u₂`, `τ = τ₀`.
//!   This works for every `R`, including the resonant values where the
//!   algebraic divisor vanishes and logarithms appear.
//!
//! Both routes are then evaluated on jets in the flat coordinates
//! `x¹ = σ/2`, `x² = Ξ^(1)₂₁`.

use thiserror::Error;

use crate::expr::Expr;
use crate::frobenius::EulerData;
use crate::jet::{Jet, JetError, JetSpace, MultiIndex, Scalar};
use crate::linalg::{c, CMat};

/// `|n − μ_α + μ_β|` below this is a resonance.
pub const RESONANCE_TOL: f64 = 1e-9;
/// Distance from a special `R` within which the special closed form is used.
pub const SPECIAL_R_TOL: f64 = 1e-9;
/// Distance from a special `R` that triggers a near-resonance warning.
pub const NEAR_SPECIAL_WARN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum N2Error {
    #[error("canonical coordinates coincide (u₁ = u₂)")]
    Coincident,
    #[error("τ₀ = {0} is not a positive real; enable complex mode to continue")]
    ComplexTau(Scalar),
    #[error("R = {0} has no flat coordinate x² for τ₀ = {1}")]
    FlatDomain(f64, Scalar),
    #[error("x² = {x2} lies outside the real domain for R = {r} (need sign(x²) = sign(1+2R))")]
    Domain { r: f64, x2: f64 },
    #[error("entry ({row},{col}) of Ξ^({n}) is resonant")]
    Resonant { n: usize, row: usize, col: usize },
    #[error("the generic closed form is singular at R = {0}")]
    SpecialValue(f64),
    #[error("flow integration left a τ-dependent remainder of size {0:e}")]
    Inconsistent(f64),
    #[error("series of order {0} is too short, order 3 is needed")]
    TooShort(usize),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// The three values of `R` where the generic formulas break down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialR {
    Half,
    MinusHalf,
    MinusThreeHalves,
}

impl SpecialR {
    pub fn value(self) -> f64 {
        match self {
            SpecialR::Half => 0.5,
            SpecialR::MinusHalf => -0.5,
            SpecialR::MinusThreeHalves => -1.5,
        }
    }
}

pub fn classify_r(r: f64) -> Option<SpecialR> {
    [SpecialR::Half, SpecialR::MinusHalf, SpecialR::MinusThreeHalves]
        .into_iter()
        .find(|s| (r - s.value()).abs() < SPECIAL_R_TOL)
}

/// True when `R` is close to, but not dispatched as, a special value.
pub fn near_special(r: f64) -> bool {
    [0.5, -0.5, -1.5]
        .iter()
        .any(|s| (r - s).abs() < NEAR_SPECIAL_WARN && (r - s).abs() >= SPECIAL_R_TOL)
}

/// Parameters of one point of the N=2 family.
#[derive(Debug, Clone, PartialEq)]
pub struct N2Config {
    pub r: f64,
    pub u: [Scalar; 2],
    /// Allow `τ₀` off the positive real axis (principal branches).
    pub complex_tau: bool,
}

impl N2Config {
    pub fn new(r: f64, u1: f64, u2: f64) -> Result<Self, N2Error> {
        let cfg = N2Config {
            r,
            u: [c(u1), c(u2)],
            complex_tau: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn complex(r: f64, u1: Scalar, u2: Scalar) -> Result<Self, N2Error> {
        let cfg = N2Config {
            r,
            u: [u1, u2],
            complex_tau: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn tau0(&self) -> Scalar {
        self.u[0] - self.u[1]
    }

    fn validate(&self) -> Result<(), N2Error> {
        let t = self.tau0();
        if t.norm() == 0.0 {
            return Err(N2Error::Coincident);
        }
        if !self.complex_tau && (t.im != 0.0 || t.re <= 0.0) {
            return Err(N2Error::ComplexTau(t));
        }
        Ok(())
    }

    /// `τ₀^p` on the principal branch.
    fn tau_pow(&self, p: f64) -> Scalar {
        (self.tau0().ln() * p).exp()
    }
}

/// `𝒰 = ½[[u₁+u₂, τ₀^{1−2R}], [τ₀^{1+2R}, u₁+u₂]]`.
pub fn calu_n2(cfg: &N2Config) -> Result<CMat, N2Error> {
    cfg.validate()?;
    let s = cfg.u[0] + cfg.u[1];
    Ok(CMat::from_row_slice(
        2,
        2,
        &[s * 0.5, cfg.tau_pow(1.0 - 2.0 * cfg.r) * 0.5, cfg.tau_pow(1.0 + 2.0 * cfg.r) * 0.5, s * 0.5],
    ))
}

/// Flat coordinates `(x¹, x²)` of a point of the family.
pub fn flat_coords_n2(cfg: &N2Config) -> Result<(Scalar, Scalar), N2Error> {
    cfg.validate()?;
    let x1 = (cfg.u[0] + cfg.u[1]) * 0.5;
    let t = cfg.tau0();
    let x2 = match classify_r(cfg.r) {
        Some(SpecialR::MinusHalf) => {
            if t.im != 0.0 || t.re <= 0.0 {
                return Err(N2Error::FlatDomain(cfg.r, t));
            }
            t.ln() * 0.5
        }
        Some(SpecialR::Half) => t * t * 0.25,
        _ => cfg.tau_pow(1.0 + 2.0 * cfg.r) / (2.0 * (1.0 + 2.0 * cfg.r)),
    };
    Ok((x1, x2))
}

/// `μ = diag(R, −R)`.
pub fn mu_n2(r: f64) -> [f64; 2] {
    [r, -r]
}

/// One algebraic step: `X_{αβ} = (𝒰·prev)_{αβ} / (n − μ_α + μ_β)`.
pub fn xi_step(n: usize, prev: &CMat, mu: &[f64], calu: &CMat) -> Result<CMat, N2Error> {
    if n == 0 {
        return Err(N2Error::TooShort(0));
    }
    let rhs = calu * prev;
    let dim = prev.nrows();
    let mut out = CMat::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            let d = n as f64 - mu[a] + mu[b];
            if d.abs() < RESONANCE_TOL {
                return Err(N2Error::Resonant { n, row: a, col: b });
            }
            out[(a, b)] = rhs[(a, b)] / d;
        }
    }
    Ok(out)
}

/// First resonant `(n, α, β)` with `n ≤ order`, if any.
pub fn first_resonance(r: f64, order: usize) -> Option<(usize, usize, usize)> {
    let mu = mu_n2(r);
    for n in 1..=order {
        for a in 0..2 {
            for b in 0..2 {
                if (n as f64 - mu[a] + mu[b]).abs() < RESONANCE_TOL {
                    return Some((n, a, b));
                }
            }
        }
    }
    None
}

/// A term `coef · σ^a · τ^p · (log τ)^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowTerm {
    pub coef: Scalar,
    pub a: u32,
    pub p: f64,
    pub k: u32,
}

/// A finite sum of [`FlowTerm`]s.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlowFn {
    pub terms: Vec<FlowTerm>,
}

const P_MATCH: f64 = 1e-12;

impl FlowFn {
    pub fn constant(v: Scalar) -> Self {
        FlowFn {
            terms: vec![FlowTerm { coef: v, a: 0, p: 0.0, k: 0 }],
        }
        .simplified()
    }

    fn simplified(mut self) -> Self {
        let mut out: Vec<FlowTerm> = Vec::new();
        for t in self.terms.drain(..) {
            match out.iter_mut().find(|o| o.a == t.a && o.k == t.k && (o.p - t.p).abs() < P_MATCH) {
                Some(o) => o.coef += t.coef,
                None => out.push(t),
            }
        }
        out.retain(|t| t.coef.norm() != 0.0);
        out.sort_by(|x, y| x.a.cmp(&y.a).then(x.k.cmp(&y.k)).then(x.p.total_cmp(&y.p)));
        FlowFn { terms: out }
    }

    pub fn add(&self, other: &FlowFn) -> FlowFn {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        FlowFn { terms }.simplified()
    }

    pub fn scale(&self, s: Scalar) -> FlowFn {
        FlowFn {
            terms: self.terms.iter().map(|t| FlowTerm { coef: t.coef * s, ..*t }).collect(),
        }
        .simplified()
    }

    /// Multiply by `τ^q`.
    pub fn tau_shift(&self, q: f64) -> FlowFn {
        FlowFn {
            terms: self.terms.iter().map(|t| FlowTerm { p: t.p + q, ..*t }).collect(),
        }
    }

    pub fn d_sigma(&self) -> FlowFn {
        FlowFn {
            terms: self
                .terms
                .iter()
                .filter(|t| t.a > 0)
                .map(|t| FlowTerm {
                    coef: t.coef * f64::from(t.a),
                    a: t.a - 1,
                    ..*t
                })
                .collect(),
        }
        .simplified()
    }

    /// Antiderivative in `τ` with zero integration constant.
    pub fn int_tau(&self) -> FlowFn {
        let mut out = Vec::new();
        for t in &self.terms {
            if (t.p + 1.0).abs() < RESONANCE_TOL {
                out.push(FlowTerm {
                    coef: t.coef / f64::from(t.k + 1),
                    a: t.a,
                    p: 0.0,
                    k: t.k + 1,
                });
            } else {
                // ∫ τ^p L^k = τ^{p+1} Σ_j (−1)^j k!/(k−j)! L^{k−j} / (p+1)^{j+1}
                let q = t.p + 1.0;
                let mut falling = 1.0;
                for j in 0..=t.k {
                    if j > 0 {
                        falling *= f64::from(t.k - j + 1);
                    }
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    out.push(FlowTerm {
                        coef: t.coef * (sign * falling / q.powi(j as i32 + 1)),
                        a: t.a,
                        p: q,
                        k: t.k - j,
                    });
                }
            }
        }
        FlowFn { terms: out }.simplified()
    }

    /// Antiderivative in `σ` of the τ-free part. Returns the result and the
    /// size of the τ-dependent remainder that was dropped.
    pub fn int_sigma_tau_free(&self) -> (FlowFn, f64) {
        let mut out = Vec::new();
        let mut dropped: f64 = 0.0;
        for t in &self.terms {
            if t.p.abs() < P_MATCH && t.k == 0 {
                out.push(FlowTerm {
                    coef: t.coef / f64::from(t.a + 1),
                    a: t.a + 1,
                    p: 0.0,
                    k: 0,
                });
            } else {
                dropped = dropped.max(t.coef.norm());
            }
        }
        (FlowFn { terms: out }.simplified(), dropped)
    }

    /// Evaluate with jets for `σ` and `log τ`.
    pub fn eval(&self, sigma: &Jet, log_tau: &Jet) -> Jet {
        let space = sigma.space();
        let mut acc = space.zero();
        for t in &self.terms {
            let mut term = space.constant(t.coef);
            for _ in 0..t.a {
                term = &term * sigma;
            }
            if t.p != 0.0 {
                term = &term * &(log_tau * t.p).exp();
            }
            for _ in 0..t.k {
                term = &term * log_tau;
            }
            acc = acc + term;
        }
        acc
    }
}

type FlowMat = [[FlowFn; 2]; 2];

fn flow_identity() -> FlowMat {
    [
        [FlowFn::constant(c(1.0)), FlowFn::default()],
        [FlowFn::default(), FlowFn::constant(c(1.0))],
    ]
}

/// One flow step: `Ξ^(n)` from `Ξ^(n−1)`.
fn flow_step(r: f64, prev: &FlowMat) -> Result<FlowMat, N2Error> {
    let mut out = flow_identity();
    for col in 0..2 {
        // ½ [[0, τ^{−2R}], [τ^{2R}, 0]] · prev
        let top = prev[1][col].tau_shift(-2.0 * r).scale(c(0.5));
        let bottom = prev[0][col].tau_shift(2.0 * r).scale(c(0.5));
        for (row, rhs) in [(0, top), (1, bottom)] {
            let t = rhs.int_tau();
            let d = prev[row][col].scale(c(0.5)).add(&t.d_sigma().scale(c(-1.0)));
            let (g, dropped) = d.int_sigma_tau_free();
            let scale = prev[row][col].terms.iter().map(|x| x.coef.norm()).fold(1.0, f64::max);
            if dropped > 1e-12 * scale {
                return Err(N2Error::Inconsistent(dropped));
            }
            out[row][col] = t.add(&g);
        }
    }
    Ok(out)
}

/// Which construction produced a [`XiSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiRoute {
    Algebraic,
    Flow,
}

type JetMat = [[Jet; 2]; 2];

fn jet_mat_mul(a: &JetMat, b: &JetMat) -> JetMat {
    let e = |i: usize, j: usize| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// Jets of `σ = 2x¹` and `log τ` in the flat coordinates, plus the
/// coordinate jets themselves.
struct FlatJets {
    sigma: Jet,
    log_tau: Jet,
}

fn flat_jets(r: f64, x1: Scalar, x2: Scalar, order: usize, complex: bool) -> Result<FlatJets, N2Error> {
    let space = JetSpace::new(2, order);
    let x = space.vars(&[x1, x2])?;
    let sigma = &x[0] * 2.0;
    let log_tau = if classify_r(r) == Some(SpecialR::MinusHalf) {
        &x[1] * 2.0
    } else {
        let k = 1.0 + 2.0 * r;
        let base = &x[1] * (2.0 * k);
        let b0 = base.value();
        let on_negative_axis = b0.im.abs() <= 1e-12 * b0.norm() && b0.re < 0.0;
        let log = if on_negative_axis {
            if !complex {
                return Err(N2Error::Domain { r, x2: x2.re });
            }
            // log(b) = ln|b| + iπ on the negative real axis
            (-&base).ln()?.add_scalar(Scalar::new(0.0, std::f64::consts::PI))
        } else {
            base.ln()?
        };
        log * (1.0 / k)
    };
    Ok(FlatJets { sigma, log_tau })
}

/// The matrices `Ξ^(1) … Ξ^(order)` at one point of the family.
#[derive(Debug, Clone)]
pub struct XiSeries {
    pub order: usize,
    pub r: f64,
    pub route: XiRoute,
    pub mu: [f64; 2],
    /// `𝒰` at the point.
    pub calu: CMat,
    /// Values of `Ξ^(n)` at the point, `n = 1 … order`.
    pub terms: Vec<CMat>,
    /// Flat coordinates of the point.
    pub x: (Scalar, Scalar),
    jets: Vec<JetMat>,
    calu_jet: JetMat,
}

impl XiSeries {
    /// Build with the algebraic route when it is free of resonances up to
    /// `order`, otherwise by flow integration.
    pub fn build(cfg: &N2Config, order: usize) -> Result<Self, N2Error> {
        let route = if first_resonance(cfg.r, order).is_some() {
            XiRoute::Flow
        } else {
            XiRoute::Algebraic
        };
        Self::build_with(cfg, order, route)
    }

    /// Build at the point with flat coordinates `(x¹, x²)` directly.
    pub fn at_flat(r: f64, x1: Scalar, x2: Scalar, order: usize, route: XiRoute, complex: bool) -> Result<Self, N2Error> {
        let fj = flat_jets(r, x1, x2, order.max(3), complex)?;
        let half = 0.5;
        let tau_p = |p: f64| (&fj.log_tau * p).exp();
        let calu_jet: JetMat = [
            [&fj.sigma * half, tau_p(1.0 - 2.0 * r) * half],
            [tau_p(1.0 + 2.0 * r) * half, &fj.sigma * half],
        ];
        let mu = mu_n2(r);
        let space = fj.sigma.space().clone();
        let mut jets = Vec::with_capacity(order);
        match route {
            XiRoute::Algebraic => {
                let mut prev: JetMat = [[space.real(1.0), space.zero()], [space.zero(), space.real(1.0)]];
                for n in 1..=order {
                    let rhs = jet_mat_mul(&calu_jet, &prev);
                    let mut next = prev.clone();
                    for a in 0..2 {
                        for b in 0..2 {
                            let d = n as f64 - mu[a] + mu[b];
                            if d.abs() < RESONANCE_TOL {
                                return Err(N2Error::Resonant { n, row: a, col: b });
                            }
                            next[a][b] = &rhs[a][b] * (1.0 / d);
                        }
                    }
                    jets.push(next.clone());
                    prev = next;
                }
            }
            XiRoute::Flow => {
                let mut prev = flow_identity();
                for _ in 1..=order {
                    let next = flow_step(r, &prev)?;
                    let ev = |f: &FlowFn| f.eval(&fj.sigma, &fj.log_tau);
                    jets.push([[ev(&next[0][0]), ev(&next[0][1])], [ev(&next[1][0]), ev(&next[1][1])]]);
                    prev = next;
                }
            }
        }
        let value = |m: &JetMat| CMat::from_row_slice(2, 2, &[m[0][0].value(), m[0][1].value(), m[1][0].value(), m[1][1].value()]);
        Ok(XiSeries {
            order,
            r,
            route,
            mu,
            calu: value(&calu_jet),
            terms: jets.iter().map(value).collect(),
            x: (x1, x2),
            jets,
            calu_jet,
        })
    }

    pub fn build_with(cfg: &N2Config, order: usize, route: XiRoute) -> Result<Self, N2Error> {
        let (x1, x2) = flat_coords_n2(cfg)?;
        Self::at_flat(cfg.r, x1, x2, order, route, cfg.complex_tau)
    }

    /// Jet (order ≥ 3, in `x¹, x²`) of entry `(row, col)` of `Ξ^(n)`.
    pub fn entry_jet(&self, n: usize, row: usize, col: usize) -> Option<&Jet> {
        self.jets.get(n.checked_sub(1)?).map(|m| &m[row][col])
    }

    /// `max |(n − ad_μ)Ξ^(n) − 𝒰 Ξ^(n−1)|` over non-resonant entries,
    /// including all jet coefficients.
    pub fn recursion_residual(&self) -> f64 {
        let space = self.jets[0][0][0].space().clone();
        let mut prev: JetMat = [[space.real(1.0), space.zero()], [space.zero(), space.real(1.0)]];
        let mut worst: f64 = 0.0;
        for (idx, cur) in self.jets.iter().enumerate() {
            let n = (idx + 1) as f64;
            let rhs = jet_mat_mul(&self.calu_jet, &prev);
            for a in 0..2 {
                for b in 0..2 {
                    let d = n - self.mu[a] + self.mu[b];
                    if d.abs() < RESONANCE_TOL {
                        continue;
                    }
                    let lhs = &cur[a][b] * d;
                    worst = worst.max(lhs.max_abs_diff(&rhs[a][b]).unwrap_or(f64::INFINITY));
                }
            }
            prev = cur.clone();
        }
        worst
    }
    /// `max |E(Ξ^(n)) − 𝒰 Ξ^(n−1)|` with `E = Σ_α 𝒰^α₁ ∂/∂x^α`, over all
    /// entries and every jet coefficient that survives one derivative.
    ///
    /// Unlike [`XiSeries::recursion_residual`] this also holds once a
    /// logarithm of `τ` has entered the series.
    pub fn euler_residual(&self) -> Result<f64, N2Error> {
        let space = self.jets[0][0][0].space().clone();
        let mut prev: JetMat = [[space.real(1.0), space.zero()], [space.zero(), space.real(1.0)]];
        let mut worst: f64 = 0.0;
        for cur in &self.jets {
            let rhs = jet_mat_mul(&self.calu_jet, &prev);
            for a in 0..2 {
                for b in 0..2 {
                    let d0 = cur[a][b].derivative(0)?;
                    let lower = d0.space().clone();
                    let e = d0.try_mul(&self.calu_jet[0][0].truncate(&lower)?)?.try_add(
                        &cur[a][b].derivative(1)?.try_mul(&self.calu_jet[1][0].truncate(&lower)?)?,
                    )?;
                    worst = worst.max(e.max_abs_diff(&rhs[a][b].truncate(&lower)?)?);
                }
            }
            prev = cur.clone();
        }
        Ok(worst)
    }
}

/// `F = ½(−Ξ^(3)₂₁ + x¹Ξ^(2)₂₁ + x²Ξ^(2)₂₂)` as a jet in `(x¹, x²)`.
pub fn prepotential_from_xi(xi: &XiSeries) -> Result<Jet, N2Error> {
    if xi.order < 3 {
        return Err(N2Error::TooShort(xi.order));
    }
    let space = xi.jets[0][0][0].space();
    let x = space.vars(&[xi.x.0, xi.x.1])?;
    let f = &(&x[0] * &xi.jets[1][1][0]) + &(&x[1] * &xi.jets[1][1][1]);
    Ok((f - &xi.jets[2][1][0]) * 0.5)
}

/// Third derivatives `[F₁₁₁, F₁₁₂, F₁₂₂, F₂₂₂]` of a jet in two variables.
pub fn third_derivatives(f: &Jet) -> Result<[Scalar; 4], JetError> {
    Ok([
        f.partial(&MultiIndex::new(&[3, 0]))?,
        f.partial(&MultiIndex::new(&[2, 1]))?,
        f.partial(&MultiIndex::new(&[1, 2]))?,
        f.partial(&MultiIndex::new(&[0, 3]))?,
    ])
}

/// The generic closed-form prepotential, refused at special `R`.
pub fn f_closed_generic(r: f64) -> Result<Expr, N2Error> {
    if classify_r(r).is_some() {
        return Err(N2Error::SpecialValue(r));
    }
    let (x1, x2) = (Expr::var(0), Expr::var(1));
    let k = 1.0 + 2.0 * r;
    let e = (3.0 + 2.0 * r) / k;
    let denom = 16.0 * (3.0 + 2.0 * r) * (1.0 - 2.0 * r);
    Ok(0.5 * x1.powf(2.0) * x2.clone() + (1.0 / denom) * (Expr::real(2.0 * k) * x2).powf(e))
}

/// Closed-form prepotential in `(x¹, x²) = (Var(0), Var(1))`, dispatching
/// to the special forms at `R ∈ {½, −½, −3/2}`.
pub fn f_closed(r: f64) -> Result<Expr, N2Error> {
    let (x1, x2) = (Expr::var(0), Expr::var(1));
    let cubic = 0.5 * x1.powf(2.0) * x2.clone();
    Ok(match classify_r(r) {
        None => return f_closed_generic(r),
        Some(SpecialR::Half) => cubic + 0.125 * x2.clone().powf(2.0) * (x2.ln() - 1.5),
        Some(SpecialR::MinusHalf) => cubic + (1.0 / 64.0) * (4.0 * x2).exp(),
        Some(SpecialR::MinusThreeHalves) => cubic - (1.0 / 128.0) * x2.ln(),
    })
}

/// Euler data `E = x¹∂₁ + (1+2R)x²∂₂`, `d_F = 3 + 2R`; at `R = −½` the
/// second degree vanishes and is replaced by the shift `½∂₂`.
pub fn euler_n2(r: f64) -> EulerData {
    let mu = mu_n2(r);
    let (d, shift, d_f) = match classify_r(r) {
        Some(SpecialR::MinusHalf) => (vec![1.0, 0.0], vec![0.0, 0.5], 2.0),
        _ => (vec![1.0, 1.0 + 2.0 * r], vec![0.0, 0.0], 3.0 + 2.0 * r),
    };
    EulerData {
        d,
        r: shift,
        d_f,
        mu: Some(mu.to_vec()),
    }
}

/// A point in the real domain of the closed form for `R`, scaled from a
/// positive sample `(s1, s2)`: `x² → sign(1+2R)·s2` for generic `R`.
pub fn domain_point(r: f64, s1: f64, s2: f64) -> (f64, f64) {
    match classify_r(r) {
        Some(SpecialR::MinusHalf) => (s1, s2 - 1.0),
        Some(SpecialR::MinusThreeHalves) | Some(SpecialR::Half) => (s1, s2),
        None => (s1, if 1.0 + 2.0 * r > 0.0 { s2 } else { -s2 }),
    }
}

/// Whether `R` needs complex `τ₀` for positive `x²`.
pub fn needs_complex_tau(r: f64) -> bool {
    classify_r(r) == Some(SpecialR::MinusThreeHalves)
}

/// Largest difference between the third derivatives of the recursion
/// prepotential and the closed form at `(x¹, x²)`.
pub fn recursion_vs_closed(r: f64, x1: f64, x2: f64, route: XiRoute) -> Result<f64, N2Error> {
    let xi = XiSeries::at_flat(r, c(x1), c(x2), 3, route, needs_complex_tau(r))?;
    let f_rec = prepotential_from_xi(&xi)?;
    let f_cl = f_closed(r)?.eval(&[c(x1), c(x2)], 3)?;
    let a = third_derivatives(&f_rec)?;
    let b = third_derivatives(&f_cl)?;
    Ok(a.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max))
}

/// Route used by default for `R` at order 3.
pub fn default_route(r: f64) -> XiRoute {
    if first_resonance(r, 3).is_some() {
        XiRoute::Flow
    } else {
        XiRoute::Algebraic
    }
}
