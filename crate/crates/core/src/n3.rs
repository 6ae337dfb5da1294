//! The three-dimensional model: Euler top, the Hitchin algebraic branch,
//! Painlevé VI, the Lamé chain and the tau function.
//!
//! Along the branch everything is a rational function of one parameter
//! `ω` (or `x = (ω−3)/(ω+3)`), so derivatives with respect to `s` come from
//! univariate jets and the chain rule through `s(ω)`.
//!
//! Labelling: the roots `a₁, a₂, a₃` are numbered as in their closed form.
//! The canonical numbering that makes the Euler-top and Lamé formulas
//! consistent takes them in the order `(a₁, a₃, a₂)`; see
//! [`CANONICAL_ORDER`].

use std::io::Write;

use thiserror::Error;

use crate::expr::Expr;
use crate::jet::{Jet, JetError, JetSpace, MultiIndex, Scalar};
use crate::lg::{CanonicalChart, LgError, LgModel};
use crate::linalg::c;
use crate::ode::{integrate, OdeError, OdeOptions, Trajectory};

/// `R²` of the rational model.
pub const R_SQ: f64 = 0.25;
/// Distance from `s ∈ {0, 1}` treated as singular.
pub const SINGULAR_S_MARGIN: f64 = 1e-6;
/// Distance from an excluded `ω` treated as singular.
pub const EXCLUDED_MARGIN: f64 = 1e-9;
/// Relative tolerance for accepting a square-root sign assignment.
pub const SIGN_MATCH_TOL: f64 = 1e-6;

/// Position `k` of the canonical numbering holds the root `a_{CANONICAL_ORDER[k]}`.
pub const CANONICAL_ORDER: [usize; 3] = [0, 2, 1];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum N3Error {
    #[error("s = {0} is a singular point of the Euler top")]
    SingularS(Scalar),
    #[error("ω = {0} is an excluded parameter value")]
    Excluded(Scalar),
    #[error("ds/dx vanishes at x = {0} (branch point)")]
    BranchPoint(Scalar),
    #[error("no square-root sign assignment satisfies {0}")]
    BranchInconsistent(&'static str),
    #[error("{0} lies outside the principal-branch domain")]
    Domain(String),
    #[error("Newton continuation of ω(s) failed near s = {0}")]
    Continuation(Scalar),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Chart(#[from] LgError),
}

// ---------------------------------------------------------------- Euler top

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerTopState {
    pub s: Scalar,
    pub omega: [Scalar; 3],
}

fn check_s(s: Scalar) -> Result<(), N3Error> {
    if s.norm() < SINGULAR_S_MARGIN || (s - 1.0).norm() < SINGULAR_S_MARGIN {
        return Err(N3Error::SingularS(s));
    }
    Ok(())
}

/// `(ω₂ω₃/s, ω₁ω₃/(s(s−1)), ω₁ω₂/(1−s))`.
pub fn euler_top_rhs(state: &EulerTopState) -> Result<[Scalar; 3], N3Error> {
    check_s(state.s)?;
    let [w1, w2, w3] = state.omega;
    let s = state.s;
    Ok([w2 * w3 / s, w1 * w3 / (s * (s - 1.0)), w1 * w2 / (c(1.0) - s)])
}

pub fn casimir(omega: &[Scalar; 3]) -> Scalar {
    omega.iter().map(|w| w * w).sum()
}

/// An integrated Euler-top solution along a path `s(t)`.
#[derive(Debug, Clone)]
pub struct TopTrajectory {
    pub traj: Trajectory,
    /// `s` at each accepted node.
    pub s: Vec<Scalar>,
    /// `max |Σω²(t) − Σω²(t₀)|` over the nodes.
    pub casimir_drift: f64,
}

impl TopTrajectory {
    pub fn omega(&self, node: usize) -> [Scalar; 3] {
        let y = &self.traj.y[node];
        [y[0], y[1], y[2]]
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// CSV with columns `s_re, s_im`, real and imaginary parts of each
    /// `ω_k`, then the Casimir.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "s_re", "s_im", "w1_re", "w1_im", "w2_re", "w2_im", "w3_re", "w3_im", "casimir_re", "casimir_im",
        ])?;
        for k in 0..self.len() {
            let om = self.omega(k);
            let cas = casimir(&om);
            let vals = [self.s[k], om[0], om[1], om[2], cas];
            let row: Vec<String> = vals.iter().flat_map(|z| [format!("{:.17e}", z.re), format!("{:.17e}", z.im)]).collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integrate along `t ↦ s(t)` with `path(t) = (s, ds/dt)`.
pub fn integrate_top_path(
    omega0: [Scalar; 3],
    path: impl Fn(f64) -> (Scalar, Scalar),
    t0: f64,
    t1: f64,
    opts: &OdeOptions,
) -> Result<TopTrajectory, N3Error> {
    let rhs = |t: f64, y: &[Scalar]| -> Result<Vec<Scalar>, String> {
        let (s, ds) = path(t);
        let d = euler_top_rhs(&EulerTopState { s, omega: [y[0], y[1], y[2]] }).map_err(|e| e.to_string())?;
        Ok(d.iter().map(|v| v * ds).collect())
    };
    let traj = integrate(rhs, t0, &omega0, t1, opts)?;
    let s: Vec<Scalar> = traj.t.iter().map(|&t| path(t).0).collect();
    let c0 = casimir(&omega0);
    let casimir_drift = traj
        .y
        .iter()
        .map(|y| (casimir(&[y[0], y[1], y[2]]) - c0).norm())
        .fold(0.0, f64::max);
    Ok(TopTrajectory { traj, s, casimir_drift })
}

/// Distance from the point `p` to the segment `[a, b]`.
fn segment_distance(a: Scalar, b: Scalar, p: Scalar) -> f64 {
    let d = b - a;
    if d.norm() == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * d.conj()).re / d.norm_sqr();
    (a + d * t.clamp(0.0, 1.0) - p).norm()
}

/// Integrate along the straight segment from `initial.s` to `s_end`.
pub fn integrate_top(initial: &EulerTopState, s_end: Scalar, rtol: f64) -> Result<TopTrajectory, N3Error> {
    for p in [c(0.0), c(1.0)] {
        if segment_distance(initial.s, s_end, p) < SINGULAR_S_MARGIN {
            return Err(N3Error::SingularS(p));
        }
    }
    let s0 = initial.s;
    let ds = s_end - s0;
    integrate_top_path(initial.omega, |t| (s0 + ds * t, ds), 0.0, 1.0, &OdeOptions::with_rtol(rtol))
}

// ---------------------------------------------------------- Hitchin branch

/// The branch parameter `ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitchinParam {
    w: Scalar,
}

impl HitchinParam {
    pub fn new(w: Scalar) -> Result<Self, N3Error> {
        for bad in [1.0, -1.0, 3.0, -3.0, 0.0] {
            if (w - bad).norm() < EXCLUDED_MARGIN {
                return Err(N3Error::Excluded(w));
            }
        }
        if !w.re.is_finite() || !w.im.is_finite() {
            return Err(N3Error::Excluded(w));
        }
        Ok(HitchinParam { w })
    }

    /// Purely imaginary `ω = i t`.
    pub fn imaginary(t: f64) -> Result<Self, N3Error> {
        Self::new(Scalar::new(0.0, t))
    }

    /// From `x = (ω−3)/(ω+3)`, i.e. `ω = 3(1+x)/(1−x)`.
    pub fn from_x(x: Scalar) -> Result<Self, N3Error> {
        if (x - 1.0).norm() < EXCLUDED_MARGIN {
            return Err(N3Error::Excluded(x));
        }
        Self::new((x + 1.0) * 3.0 / (c(1.0) - x))
    }

    pub fn w(&self) -> Scalar {
        self.w
    }

    pub fn x(&self) -> Scalar {
        (self.w - 3.0) / (self.w + 3.0)
    }
}

fn uni(value: Scalar, order: usize) -> Jet {
    JetSpace::new(1, order).var(0, value).expect("one variable")
}

fn d1(j: &Jet) -> Scalar {
    j.coeffs()[1]
}

fn d2(j: &Jet) -> Scalar {
    j.coeffs()[2] * 2.0
}

/// Closed forms along the branch as functions of a jet in `ω`.
mod param {
    use super::*;

    pub fn s(w: &Jet) -> Result<Jet, JetError> {
        let num = (w + -3.0).powi(3)? * (w + 1.0);
        let den = (w + 3.0).powi(3)? * (w + -1.0);
        num.try_div(&den)
    }

    pub fn y(w: &Jet) -> Result<Jet, JetError> {
        let num = (w + -3.0).powi(2)? * (w + 1.0);
        let den = (w + 3.0) * (w.powi(2)? + 3.0);
        num.try_div(&den)
    }

    pub fn roots(w: &Jet) -> Result<[Jet; 3], JetError> {
        let d = w.powi(2)? + 3.0;
        let one = w.space().real(4.0);
        Ok([
            one.try_div(&d)?,
            (w + 1.0).powi(2)?.try_div(&d)?,
            (w + -1.0).powi(2)?.try_div(&d)?,
        ])
    }

    pub fn omega_sq(w: &Jet) -> Result<[Jet; 3], JetError> {
        let w2 = w.powi(2)?;
        Ok([
            ((&w2 + -1.0) * -0.25).try_div(&(&w2 + -9.0))?,
            ((w + 1.0) * 0.25).try_div(&(w * &(w + -3.0)))?,
            ((w + -1.0) * -0.25).try_div(&(w * &(w + 3.0)))?,
        ])
    }

    pub fn q(w: &Jet) -> Result<Jet, JetError> {
        let w2 = w.powi(2)?;
        ((&w2 + -1.0).powi(2)? * 4.0).try_div(&(&w2 + 3.0).powi(3)?)
    }

    /// `h² = (a−1)/(3a−1)`.
    pub fn lame(a: &Jet) -> Result<Jet, JetError> {
        (a + -1.0).try_div(&(a * 3.0 + -1.0))
    }
}

/// Branch data at one value of `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct HitchinRecord {
    pub w: Scalar,
    pub s: Scalar,
    /// Roots of `a(a−1)² = q`, numbered as in their closed form.
    pub a: [Scalar; 3],
    /// `ω_k²` in canonical numbering.
    pub omega_sq: [Scalar; 3],
    pub y: Scalar,
    pub q: Scalar,
    /// Flat coordinates `(0, q x₃³, x₃)` of the point on the branch.
    pub flat_point: [Scalar; 3],
    /// `W(x₃ a_i)` at that point, numbered like `a`.
    pub u: [Scalar; 3],
    /// `u₂ − u₃ = 8x₃²ω³/(ω²+3)²` in the numbering of `a`.
    pub u23_closed: Scalar,
}

pub fn hitchin_branch(p: &HitchinParam, x3: Scalar) -> Result<HitchinRecord, N3Error> {
    let w = uni(p.w, 0);
    let val = |j: Jet| j.value();
    let a = param::roots(&w)?.map(val);
    let q = param::q(&w)?.value();
    let x2 = q * x3.powi(3);
    let u = a.map(|ai| {
        let z = ai * x3;
        z * z * 0.5 + x2 / (z - x3)
    });
    let wv = p.w;
    Ok(HitchinRecord {
        w: wv,
        s: param::s(&w)?.value(),
        a,
        omega_sq: param::omega_sq(&w)?.map(val),
        y: param::y(&w)?.value(),
        q,
        flat_point: [c(0.0), x2, x3],
        u,
        u23_closed: x3 * x3 * wv.powi(3) * 8.0 / (wv * wv + 3.0).powi(2),
    })
}

/// `max_i |a_i(a_i−1)² − q|`.
pub fn root_residual(rec: &HitchinRecord) -> f64 {
    rec.a.iter().map(|a| (a * (a - 1.0).powi(2) - rec.q).norm()).fold(0.0, f64::max)
}

/// `s` recomputed from the canonical coordinates,
/// `(u(a₃) − u(a₁)) / (u(a₂) − u(a₁))`.
pub fn s_from_u(rec: &HitchinRecord) -> Scalar {
    let [u1, u2, u3] = rec.u;
    (u3 - u1) / (u2 - u1)
}

/// Square roots `ω_k` of the branch values that jointly satisfy the Euler
/// top. The sign pattern is the first of the eight that works.
pub fn branch_omegas(p: &HitchinParam) -> Result<([Scalar; 3], [i8; 3]), N3Error> {
    let w = uni(p.w, 1);
    let s = param::s(&w)?;
    let ds = d1(&s);
    let sq = param::omega_sq(&w)?;
    let roots = sq.clone().map(|j| j.value().sqrt());
    let dsq: Vec<Scalar> = sq.iter().map(|j| d1(j) / ds).collect();
    let signs = [1i8, -1];
    for s1 in signs {
        for s2 in signs {
            for s3 in signs {
                let om = [roots[0] * f64::from(s1), roots[1] * f64::from(s2), roots[2] * f64::from(s3)];
                let rhs = euler_top_rhs(&EulerTopState { s: s.value(), omega: om })?;
                let scale = rhs.iter().map(|z| z.norm()).fold(1e-300, f64::max);
                let worst = (0..3).map(|k| (om[k] * rhs[k] * 2.0 - dsq[k]).norm()).fold(0.0, f64::max);
                if worst < SIGN_MATCH_TOL * scale * roots.iter().map(|r| r.norm()).fold(1.0, f64::max) {
                    return Ok((om, [s1, s2, s3]));
                }
            }
        }
    }
    Err(N3Error::BranchInconsistent("the Euler top equations"))
}

/// Continue `ω(s)` along the nodes by Newton iteration from `w0`, splitting
/// long hops into short ones so the iteration stays on the same sheet.
pub fn track_branch(s_nodes: &[Scalar], w0: Scalar) -> Result<Vec<Scalar>, N3Error> {
    let mut out = Vec::with_capacity(s_nodes.len());
    let mut w = w0;
    let mut s_prev = param::s(&uni(w0, 0))?.value();
    for &target in s_nodes {
        let hops = ((target - s_prev).norm() / 0.02).ceil().max(1.0) as usize;
        for h in 1..=hops {
            let goal = s_prev + (target - s_prev) * (h as f64 / hops as f64);
            let mut converged = false;
            for _ in 0..60 {
                let j = param::s(&uni(w, 1))?;
                let step = (j.value() - goal) / d1(&j);
                w -= step;
                if step.norm() <= 1e-15 * w.norm().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged && (param::s(&uni(w, 0))?.value() - goal).norm() > 1e-12 * goal.norm().max(1.0) {
                return Err(N3Error::Continuation(goal));
            }
        }
        s_prev = target;
        out.push(w);
    }
    Ok(out)
}

/// `max |ω_k²(node) − ω_k²(ω(s_node))|` along a trajectory started at `w0`.
pub fn branch_deviation(top: &TopTrajectory, w0: Scalar) -> Result<f64, N3Error> {
    let ws = track_branch(&top.s, w0)?;
    let mut worst: f64 = 0.0;
    for (k, w) in ws.iter().enumerate() {
        let sq = param::omega_sq(&uni(*w, 0))?;
        let om = top.omega(k);
        for i in 0..3 {
            worst = worst.max((om[i] * om[i] - sq[i].value()).norm());
        }
    }
    Ok(worst)
}

/// Integrate the top along the imaginary `ω` arc `ω = i t`, `t` from
/// `t0` to `t0 + span`, starting on the branch.
pub fn imaginary_arc(t0: f64, span: f64, rtol: f64) -> Result<TopTrajectory, N3Error> {
    let t1 = t0 + span;
    if t0 * t1 <= 0.0 || t0.abs().min(t1.abs()) < 0.05 {
        return Err(N3Error::Excluded(Scalar::new(0.0, t0.min(t1))));
    }
    let p = HitchinParam::imaginary(t0)?;
    let (om, _) = branch_omegas(&p)?;
    let path = |t: f64| {
        let j = param::s(&uni(Scalar::new(0.0, t), 1)).expect("arc avoids the poles of s");
        (j.value(), d1(&j) * Scalar::new(0.0, 1.0))
    };
    integrate_top_path(om, path, t0, t1, &OdeOptions::with_rtol(rtol))
}

// -------------------------------------------------------------- Painlevé VI

/// `y(x)` and `s(x)` from the Poncelet form, as jets in `x`.
fn poncelet(x: &Jet, y_scale: f64) -> Result<(Jet, Jet), JetError> {
    let x2 = x.powi(2)?;
    let y = (&x2 * &(x + 2.0)).try_div(&(&x2 + x + 1.0))? * y_scale;
    let s = (x.powi(3)? * (x + 2.0)).try_div(&(x * 2.0 + 1.0))?;
    Ok((y, s))
}

/// `y`, `dy/ds`, `d²y/ds²` and `s` at a branch point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub s: Scalar,
    pub y: Scalar,
    pub dy: Scalar,
    pub ddy: Scalar,
}

fn curve_point(p: &HitchinParam, y_scale: f64) -> Result<CurvePoint, N3Error> {
    let x = p.x();
    let (y, s) = poncelet(&uni(x, 2), y_scale)?;
    let (s1, s2) = (d1(&s), d2(&s));
    if s1.norm() < 1e-12 * s.value().norm().max(1.0) {
        return Err(N3Error::BranchPoint(x));
    }
    let (y1, y2) = (d1(&y), d2(&y));
    Ok(CurvePoint {
        s: s.value(),
        y: y.value(),
        dy: y1 / s1,
        ddy: (y2 * s1 - y1 * s2) / s1.powi(3),
    })
}

/// Right side of the Painlevé VI equation with the constants of the model.
pub fn painleve6_rhs(y: Scalar, dy: Scalar, s: Scalar) -> Scalar {
    let one = c(1.0);
    let a = (one / y + one / (y - 1.0) + one / (y - s)) * 0.5 * dy * dy;
    let b = (one / s + one / (s - 1.0) + one / (y - s)) * dy;
    let bracket = c(0.125) - s / (y * y * 8.0) + (s - 1.0) / ((y - 1.0).powi(2) * 8.0) + s * (s - 1.0) * 3.0 / ((y - s).powi(2) * 8.0);
    a - b + y * (y - 1.0) * (y - s) / (s * s * (s - 1.0).powi(2)) * bracket
}

/// Outcome of [`painleve6_residual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PainleveCheck {
    /// `|y″ − PVI(y, y′, s)|`.
    pub residual: f64,
    /// Distance between `dy/ds` from jets and a finite-difference
    /// recomputation in `x`, relative to `max(1, |dy/ds|)`.
    pub fd_slope: f64,
}

pub fn painleve6_residual(p: &HitchinParam) -> Result<PainleveCheck, N3Error> {
    painleve6_residual_scaled(p, 1.0)
}

/// As [`painleve6_residual`], with the curve `y(x)` multiplied by `y_scale`.
pub fn painleve6_residual_scaled(p: &HitchinParam, y_scale: f64) -> Result<PainleveCheck, N3Error> {
    let cp = curve_point(p, y_scale)?;
    let residual = (cp.ddy - painleve6_rhs(cp.y, cp.dy, cp.s)).norm();
    let x = p.x();
    // keep the stencil well inside the disc where s(x) stays invertible
    let (s1, s2) = {
        let (_, s) = poncelet(&uni(x, 2), y_scale)?;
        (d1(&s).norm(), d2(&s).norm())
    };
    let radius = if s2 > 0.0 { s1 / s2 } else { 1.0 };
    let h = 1e-3 * x.norm().max(1.0) * radius.min(1.0);
    let ys = |t: f64| -> Result<(Scalar, Scalar), JetError> {
        let (y, s) = poncelet(&uni(x + t, 0), y_scale)?;
        Ok((y.value(), s.value()))
    };
    let central = |step: f64| -> Result<(Scalar, Scalar), JetError> {
        let (yp, sp) = ys(step)?;
        let (ym, sm) = ys(-step)?;
        Ok((yp - ym, sp - sm))
    };
    let (dy_h, ds_h) = central(h)?;
    let (dy_h2, ds_h2) = central(h / 2.0)?;
    // Richardson on numerator and denominator separately (both scale as 2h)
    let dy = (dy_h2 * 8.0 - dy_h) / 3.0;
    let ds = (ds_h2 * 8.0 - ds_h) / 3.0;
    Ok(PainleveCheck {
        residual,
        fd_slope: (dy / ds - cp.dy).norm() / cp.dy.norm().max(1.0),
    })
}

/// The three right sides of the relations linking `ω_k²` to `(y, s, v)`.
pub fn omtoy_rhs(y: Scalar, s: Scalar, v: Scalar) -> [Scalar; 3] {
    let one = c(1.0);
    let fa = v - one / ((y - s) * 2.0);
    let fb = v - one / ((y - 1.0) * 2.0);
    let fc = v - one / (y * 2.0);
    [
        -(y - s) * y * y * (y - 1.0) / s * fa * fb,
        (y - s).powi(2) * y * (y - 1.0) / (s * (one - s)) * fb * fc,
        -(y - s) * y * (y - 1.0).powi(2) / (one - s) * fc * fa,
    ]
}

/// The auxiliary variable `v` defined from `dy/ds`.
pub fn auxiliary_v(y: Scalar, dy: Scalar, s: Scalar) -> Scalar {
    let one = c(1.0);
    let t = dy * s * (s - 1.0) / (y * (y - 1.0) * (y - s));
    (t + one / (y * 2.0) + one / ((y - 1.0) * 2.0) - one / ((y - s) * 2.0)) * 0.5
}

/// `max_k |ω_k²(relations) − ω_k²(closed form)|`.
pub fn hitchin_relations_residual(p: &HitchinParam) -> Result<f64, N3Error> {
    hitchin_relations_residual_scaled(p, 1.0)
}

pub fn hitchin_relations_residual_scaled(p: &HitchinParam, y_scale: f64) -> Result<f64, N3Error> {
    let cp = curve_point(p, y_scale)?;
    let v = auxiliary_v(cp.y, cp.dy, cp.s);
    let lhs = omtoy_rhs(cp.y, cp.s, v);
    let closed = param::omega_sq(&uni(p.w, 0))?;
    Ok((0..3).map(|k| (lhs[k] - closed[k].value()).norm()).fold(0.0, f64::max))
}

// --------------------------------------------------------------- Lamé chain

/// Outcome of [`lame_ode_residual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LameCheck {
    /// Mutual disagreement of `s dh₁²/ds`, `(s−1)s dh₂²/ds`, `(1−s) dh₃²/ds`.
    pub lhs_spread: f64,
    /// `|s dh₁²/ds + 2iR h₁h₂h₃|` with the best sign assignment.
    pub rhs_residual: f64,
    /// `max |ω_i² + R² h_i²|`.
    pub omega_h: f64,
    /// Signs applied to the principal roots of `h_i²`.
    pub signs: [i8; 3],
}

/// Lamé-chain check at a branch point, in canonical numbering. `R = ½`
/// with `η₁₁ = 1`.
pub fn lame_ode_residual(p: &HitchinParam) -> Result<LameCheck, N3Error> {
    let w = uni(p.w, 1);
    let s = param::s(&w)?;
    let ds = d1(&s);
    let sv = s.value();
    let roots = param::roots(&w)?;
    let h_sq: Vec<Jet> = CANONICAL_ORDER
        .iter()
        .map(|&k| param::lame(&roots[k]))
        .collect::<Result<_, _>>()?;
    let deriv: Vec<Scalar> = h_sq.iter().map(|j| d1(j) / ds).collect();
    let lhs = [sv * deriv[0], (sv - 1.0) * sv * deriv[1], (c(1.0) - sv) * deriv[2]];
    let lhs_spread = (lhs[0] - lhs[1]).norm().max((lhs[1] - lhs[2]).norm()).max((lhs[0] - lhs[2]).norm());
    let om = param::omega_sq(&uni(p.w, 0))?;
    let omega_h = (0..3)
        .map(|i| (om[i].value() + h_sq[i].value() * R_SQ).norm())
        .fold(0.0, f64::max);
    let h: Vec<Scalar> = h_sq.iter().map(|j| j.value().sqrt()).collect();
    let r = R_SQ.sqrt();
    let mut best = (f64::INFINITY, [1i8; 3]);
    for s1 in [1i8, -1] {
        for s2 in [1i8, -1] {
            for s3 in [1i8, -1] {
                let prod = h[0] * h[1] * h[2] * f64::from(s1 * s2 * s3);
                let rhs = Scalar::new(0.0, -2.0 * r) * prod;
                let d = (lhs[0] - rhs).norm();
                if d < best.0 {
                    best = (d, [s1, s2, s3]);
                }
            }
        }
    }
    if best.0 > SIGN_MATCH_TOL * lhs[0].norm().max(1.0) {
        return Err(N3Error::BranchInconsistent("the Lamé chain"));
    }
    Ok(LameCheck {
        lhs_spread,
        rhs_residual: best.0,
        omega_h,
        signs: best.1,
    })
}

// ------------------------------------------------------------ tau function

/// `log τ = ¼ log x₃² + (1/24) log(q³(27q − 4))` with `q = x₂/x₃³`, as an
/// expression in `(x₁, x₂, x₃)`.
pub fn log_tau_expr() -> Expr {
    let q = Expr::var(1) * Expr::var(2).powf(-3.0);
    0.25 * Expr::var(2).powf(2.0).ln() + (1.0 / 24.0) * (q.clone().powf(3.0) * (27.0 * q - 4.0)).ln()
}

/// `log τ` at `(x₂, x₃)` on the principal branch.
pub fn tau_n3(x2: Scalar, x3: Scalar) -> Result<Scalar, N3Error> {
    log_tau_expr()
        .eval_scalar(&[c(0.0), x2, x3])
        .map_err(|e| N3Error::Domain(format!("(x₂, x₃) = ({x2}, {x3}): {e}")))
}

/// The two jet identities for `log τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauJetCheck {
    /// `|(3/2 x₂∂₂ + ½x₃∂₃) log τ − ¼|`.
    pub euler: f64,
    /// `|x₃∂₃ log τ − ⅛/(1 − 27q/4)|`.
    pub x3_derivative: f64,
}

pub fn tau_jet_check(x2: Scalar, x3: Scalar) -> Result<TauJetCheck, N3Error> {
    let j = log_tau_expr().eval(&[c(0.0), x2, x3], 1)?;
    let g = j.gradient()?;
    let q = x2 / x3.powi(3);
    let e = g[1] * x2 * 1.5 + g[2] * x3 * 0.5;
    Ok(TauJetCheck {
        euler: (e - 0.25).norm(),
        x3_derivative: (g[2] * x3 - c(0.125) / (c(1.0) - q * 6.75)).norm(),
    })
}

/// `log((ω−1)⁶(ω+1)⁶(ω−3)²(ω+3)²ω⁻¹⁶) / 24`.
pub fn ltresom_omega_part(w: Scalar) -> Scalar {
    let p = (w - 1.0).powi(6) * (w + 1.0).powi(6) * (w - 3.0).powi(2) * (w + 3.0).powi(2) * w.powi(-16);
    p.ln() / 24.0
}

/// Outcome of [`ltresom_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtresomCheck {
    /// Constant offset found at the first sample.
    pub constant: Scalar,
    /// Largest deviation from it over the remaining samples.
    pub spread: f64,
}

fn wrap_pi(x: f64) -> f64 {
    let t = std::f64::consts::TAU;
    x - t * (x / t).round()
}

/// `log τ − ¼ log(u₂−u₃)` against the closed `ω` expression along the
/// branch. The two sides are logarithms of the 24th power of the same
/// function, so their difference is compared modulo `2πi/24`.
pub fn ltresom_check(ws: &[Scalar], x3: f64) -> Result<LtresomCheck, N3Error> {
    let mut diffs = Vec::with_capacity(ws.len());
    for &w in ws {
        let rec = hitchin_branch(&HitchinParam::new(w)?, c(x3))?;
        let lt = tau_n3(rec.flat_point[1], rec.flat_point[2])?;
        let d = lt - (rec.u[1] - rec.u[2]).ln() * 0.25 - ltresom_omega_part(w);
        diffs.push(d * 24.0);
    }
    let first = diffs[0];
    let spread = diffs
        .iter()
        .map(|d| {
            let e = d - first;
            Scalar::new(e.re, wrap_pi(e.im)).norm() / 24.0
        })
        .fold(0.0, f64::max);
    Ok(LtresomCheck {
        constant: first / 24.0,
        spread,
    })
}

/// Tau-function identities at a chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct TauCrossCheck {
    /// `∂_j log τ` pulled back through the chart.
    pub dlog_tau: Vec<Scalar>,
    /// `max_j |∂_j log τ − Σ_i β_ij²(u_i − u_j)|`, relative to the largest side.
    pub derivative: f64,
    /// `|Σ_j ∂_j log τ|`.
    pub identity: f64,
    /// `|Σ_j u_j ∂_j log τ − ¼|`.
    pub euler: f64,
    /// Difference between the canonical and flat versions of `E(log τ)`.
    pub euler_coordinates: f64,
}

pub fn tau_cross_check_chart(chart: &CanonicalChart) -> Result<TauCrossCheck, N3Error> {
    let x = &chart.flat_point;
    let j = log_tau_expr().eval(x, 1)?;
    let g = j.gradient()?;
    let n = chart.dim();
    let dlog: Vec<Scalar> = (0..n).map(|jj| (0..n).map(|a| chart.dx_du[(a, jj)] * g[a]).sum()).collect();
    let mut worst: f64 = 0.0;
    for jj in 0..n {
        let other: Scalar = (0..n)
            .filter(|&i| i != jj)
            .map(|i| chart.beta[(i, jj)].powi(2) * (chart.u[i] - chart.u[jj]))
            .sum();
        let scale = dlog[jj].norm().max(other.norm()).max(1e-300);
        worst = worst.max((dlog[jj] - other).norm() / scale);
    }
    let e_can: Scalar = (0..n).map(|k| chart.u[k] * dlog[k]).sum();
    let e_flat = g[1] * x[1] * 1.5 + g[2] * x[2] * 0.5;
    Ok(TauCrossCheck {
        derivative: worst,
        identity: dlog.iter().sum::<Scalar>().norm(),
        euler: (e_can - 0.25).norm(),
        euler_coordinates: (e_can - e_flat).norm(),
        dlog_tau: dlog,
    })
}

pub fn tau_cross_check(x1: f64, x2: f64, x3: f64) -> Result<TauCrossCheck, N3Error> {
    let chart = LgModel::n3().chart(&[c(x1), c(x2), c(x3)])?;
    tau_cross_check_chart(&chart)
}

/// `Σω_k` and `Σω_k²` with `ω_k = (u_j − u_i)β_ij`, `i, j, k` cyclic.
pub fn omega_sums(chart: &CanonicalChart) -> (Scalar, Scalar) {
    let mut sum = c(0.0);
    let mut sum_sq = c(0.0);
    for (i, j) in [(1, 2), (2, 0), (0, 1)] {
        let w = (chart.u[j] - chart.u[i]) * chart.beta[(i, j)];
        sum += w;
        sum_sq += w * w;
    }
    (sum, sum_sq)
}

/// Third derivative helper used by callers that want `∂³ log τ`.
pub fn log_tau_partial(x2: Scalar, x3: Scalar, idx: [usize; 3]) -> Result<Scalar, N3Error> {
    let order = idx.iter().sum();
    Ok(log_tau_expr().eval(&[c(0.0), x2, x3], order)?.partial(&MultiIndex::new(&idx))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn imag(t: f64) -> HitchinParam {
        HitchinParam::imaginary(t).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let z = euler_top_rhs(&EulerTopState { s: c(2.0), omega: [c(0.0); 3] }).unwrap();
        assert!(z.iter().all(|v| v.norm() == 0.0));
        let d = euler_top_rhs(&EulerTopState { s: c(2.0), omega: [c(0.0), c(3.0), c(5.0)] }).unwrap();
        assert!((d[0] - 7.5).norm() < 1e-15 && d[1].norm() == 0.0 && d[2].norm() == 0.0);
        assert!(euler_top_rhs(&EulerTopState { s: c(1.0), omega: [c(1.0); 3] }).is_err());
        // the Casimir is conserved by the vector field
        let om = [Scalar::new(0.3, 0.1), c(-1.2), Scalar::new(0.0, 0.7)];
        let st = EulerTopState { s: Scalar::new(2.5, 0.4), omega: om };
        let d = euler_top_rhs(&st).unwrap();
        let dc: Scalar = (0..3).map(|k| om[k] * d[k] * 2.0).sum();
        assert!(dc.norm() < 1e-15);
    }

    #[test]
    fn branch_record_identities() {
        for t in [0.4, 1.1, 2.5, 4.0] {
            let rec = hitchin_branch(&imag(t), c(0.8)).unwrap();
            assert!(root_residual(&rec) < 1e-12);
            assert!((rec.omega_sq.iter().sum::<Scalar>() + 0.25).norm() < 1e-12);
            assert!((rec.u[1] - rec.u[2] - rec.u23_closed).norm() < 1e-12);
            assert!((s_from_u(&rec) - rec.s).norm() < 1e-12);
        }
        for w in [1.0, -1.0, 3.0, 0.0] {
            assert!(HitchinParam::new(c(w)).is_err());
        }
    }

    #[test]
    fn omega_sign_swaps_roots() {
        let w = Scalar::new(0.2, 1.3);
        let a = hitchin_branch(&HitchinParam::new(w).unwrap(), c(1.0)).unwrap().a;
        let b = hitchin_branch(&HitchinParam::new(-w).unwrap(), c(1.0)).unwrap().a;
        assert_eq!(a[1], b[2]);
        assert_eq!(a[2], b[1]);
    }

    #[test]
    fn painleve_on_the_branch() {
        for t in [0.3, 0.9, 2.2, 3.7] {
            let r = painleve6_residual(&imag(t)).unwrap();
            assert!(r.residual < 1e-8, "t={t}: {r:?}");
            assert!(r.fd_slope < 1e-6, "t={t}: {r:?}");
            assert!(hitchin_relations_residual(&imag(t)).unwrap() < 1e-8);
        }
        let bad = painleve6_residual_scaled(&imag(0.9), 1.0 + 1e-3).unwrap();
        assert!(bad.residual > 1e-5);
    }

    #[test]
    fn poncelet_matches_omega_form() {
        let p = imag(1.4);
        let (y, s) = poncelet(&uni(p.x(), 0), 1.0).unwrap();
        let rec = hitchin_branch(&p, c(1.0)).unwrap();
        assert!((y.value() - rec.y).norm() < 1e-13);
        assert!((s.value() - rec.s).norm() < 1e-13);
    }

    #[test]
    fn relation_factors_vanish() {
        let (y, s) = (Scalar::new(0.3, 0.2), Scalar::new(-0.4, 0.9));
        let at = |v: Scalar| omtoy_rhs(y, s, v);
        let z = at(c(1.0) / (y * 2.0));
        assert!(z[1].norm() < 1e-14 && z[2].norm() < 1e-14 && z[0].norm() > 1e-3);
        let z = at(c(1.0) / ((y - s) * 2.0));
        assert!(z[0].norm() < 1e-14 && z[2].norm() < 1e-14);
        let z = at(c(1.0) / ((y - 1.0) * 2.0));
        assert!(z[0].norm() < 1e-14 && z[1].norm() < 1e-14);
    }

    #[test]
    fn lame_chain() {
        for t in [0.5, 1.2, 3.0] {
            let r = lame_ode_residual(&imag(t)).unwrap();
            assert!(r.lhs_spread < 1e-8 && r.rhs_residual < 1e-8 && r.omega_h < 1e-12, "{r:?}");
        }
        let r = lame_ode_residual(&HitchinParam::new(c(-15.0)).unwrap()).unwrap();
        assert!(r.rhs_residual < 1e-8);
    }

    #[test]
    fn top_follows_branch_on_real_segment() {
        let w0 = track_branch(&[c(2.0)], c(-15.0)).unwrap()[0];
        let p = HitchinParam::new(w0).unwrap();
        let (om, _) = branch_omegas(&p).unwrap();
        let top = integrate_top(&EulerTopState { s: c(2.0), omega: om }, c(5.0), 1e-10).unwrap();
        assert!(top.casimir_drift < 1e-9, "{}", top.casimir_drift);
        assert!(branch_deviation(&top, w0).unwrap() < 1e-6);
        assert!(integrate_top(&EulerTopState { s: c(-1.0), omega: om }, c(2.0), 1e-10).is_err());
    }

    #[test]
    fn zero_data_stays_zero() {
        let top = integrate_top(&EulerTopState { s: c(2.0), omega: [c(0.0); 3] }, c(3.0), 1e-10).unwrap();
        assert!(top.traj.y.iter().all(|y| y.iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn imaginary_arc_stays_on_branch() {
        let top = imaginary_arc(0.8, 0.6, 1e-10).unwrap();
        assert!(top.casimir_drift < 1e-9);
        for k in 0..top.len() {
            let t = top.traj.t[k];
            let sq = param::omega_sq(&uni(Scalar::new(0.0, t), 0)).unwrap();
            let om = top.omega(k);
            for i in 0..3 {
                assert!((om[i] * om[i] - sq[i].value()).norm() < 1e-7);
            }
        }
        let mut buf = Vec::new();
        top.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("s_re,s_im,w1_re"));
        assert_eq!(text.lines().count(), top.len() + 1);
    }

    #[test]
    fn tau_identities() {
        let r = tau_jet_check(c(1.5), c(0.7)).unwrap();
        assert!(r.euler < 1e-10 && r.x3_derivative < 1e-10, "{r:?}");
        assert!(tau_n3(c(0.01), c(1.0)).is_err());
        let ws: Vec<Scalar> = [0.3, 0.7, 1.2, 2.5, 4.0].iter().map(|&t| Scalar::new(0.0, t)).collect();
        let r = ltresom_check(&ws, 0.8).unwrap();
        assert!(r.spread < 1e-8, "{r:?}");
    }

    #[test]
    fn tau_through_chart() {
        let r = tau_cross_check(1.0, 1.5, 0.7).unwrap();
        assert!(r.derivative < 1e-5, "{r:?}");
        assert!(r.identity < 1e-6 && r.euler < 1e-6 && r.euler_coordinates < 1e-5, "{r:?}");
    }

    #[test]
    fn omega_sums_on_chart() {
        let chart = LgModel::n3().chart(&[c(1.0), c(1.5), c(0.7)]).unwrap();
        let (_, sq) = omega_sums(&chart);
        assert!((sq + 0.25).norm() < 1e-10);
    }
}
