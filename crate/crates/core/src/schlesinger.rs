//! Schlesinger systems `S_i = M⁻¹ E_ii (V − α) M` built from dressing data.
//!
//! For two dimensions everything is explicit. In higher dimensions `M`
//! comes from a canonical chart, either directly from the chart frame or
//! as `M = M₀ S` with `M₀` transported by `∂_j M₀ = V_j M₀` along a
//! straight path in flat coordinates and `S` diagonalizing `V` at the base.

use thiserror::Error;

use crate::jet::Scalar;
use crate::lg::{CanonicalChart, LgError, LgModel};
use crate::linalg::{self, c, commutator, CMat};
use crate::ode::{integrate, OdeError, OdeOptions};

/// Smallest eigenvalue gap of `V` accepted when diagonalizing.
pub const EIGEN_GAP: f64 = 1e-8;
/// Finite-difference steps must stay below this fraction of `min |u_i − u_j|`.
pub const MAX_STEP_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchlesingerError {
    #[error("pole locations coincide")]
    Coincident,
    #[error("step {step:e} is too large for pole separation {gap:e}")]
    StepTooLarge { step: f64, gap: f64 },
    #[error("V is not diagonalizable with separated eigenvalues: {0}")]
    EigenCollision(String),
    #[error("the frame matrix M is singular")]
    Singular,
    #[error("path integration failed: {0}")]
    Path(#[from] OdeError),
    #[error(transparent)]
    Chart(#[from] LgError),
}

/// The residues `S_i` at the poles `u_i`, with the data they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SchlesingerSystem {
    pub u: Vec<Scalar>,
    pub s: Vec<CMat>,
    pub alpha_shift: f64,
    /// Frame matrix `M`.
    pub m: CMat,
    pub v: CMat,
    pub v_j: Vec<CMat>,
}

impl SchlesingerSystem {
    pub fn from_frame(u: Vec<Scalar>, m: CMat, v: CMat, v_j: Vec<CMat>, alpha_shift: f64) -> Result<Self, SchlesingerError> {
        let n = u.len();
        let minv = linalg::inverse(&m).ok_or(SchlesingerError::Singular)?;
        let shifted = &v - CMat::identity(n, n) * c(alpha_shift);
        let s = (0..n).map(|i| &minv * linalg::unit(n, i) * &shifted * &m).collect();
        Ok(SchlesingerSystem {
            u,
            s,
            alpha_shift,
            m,
            v,
            v_j,
        })
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// `S_∞ = Σ S_i = M⁻¹ V M − α`.
    pub fn s_infinity(&self) -> CMat {
        self.s.iter().fold(CMat::zeros(self.dim(), self.dim()), |acc, s| acc + s)
    }

    /// Eigenvalues of `S_∞ + α`, sorted by real part.
    pub fn mu(&self) -> Vec<Scalar> {
        let n = self.dim();
        let mut ev = linalg::eigenvalues(&(self.s_infinity() + CMat::identity(n, n) * c(self.alpha_shift))).unwrap_or_default();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        ev
    }
}

fn min_gap(u: &[Scalar]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..u.len() {
        for j in 0..i {
            g = g.min((u[i] - u[j]).norm());
        }
    }
    g
}

fn pauli2() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), Scalar::new(0.0, -1.0), Scalar::new(0.0, 1.0), c(0.0)])
}

/// `M₀ = exp(σ₂ R log τ₀) = cosh θ + σ₂ sinh θ`, `θ = R log τ₀`.
pub fn n2_m0(r: f64, tau0: Scalar) -> CMat {
    let theta = tau0.ln() * r;
    CMat::identity(2, 2) * theta.cosh() + pauli2() * theta.sinh()
}

/// Constant factor with `SᵀS` antidiagonal and `S⁻¹σ₂S = σ₃`.
pub fn n2_s() -> CMat {
    let k = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[c(-k), c(-k), Scalar::new(0.0, -k), Scalar::new(0.0, k)])
}

/// The explicit two-dimensional system at poles `u`.
pub fn n2_system(r: f64, alpha_shift: f64, u: [Scalar; 2]) -> Result<SchlesingerSystem, SchlesingerError> {
    let tau0 = u[0] - u[1];
    if tau0.norm() == 0.0 {
        return Err(SchlesingerError::Coincident);
    }
    let v = pauli2() * c(r);
    let v1 = pauli2() * (c(r) / tau0);
    let m = n2_m0(r, tau0) * n2_s();
    SchlesingerSystem::from_frame(u.to_vec(), m, v, vec![v1.clone(), -v1], alpha_shift)
}

/// The system whose frame is the chart's own `m`-matrix.
pub fn chart_frame_system(chart: &CanonicalChart, alpha_shift: f64) -> Result<SchlesingerSystem, SchlesingerError> {
    SchlesingerSystem::from_frame(chart.u.clone(), chart.m_matrix(), chart.v_matrix(), chart.v_j(), alpha_shift)
}

/// Systems around a base chart, with `M = M₀ S` and `M₀(base) = 1`.
#[derive(Debug, Clone)]
pub struct ChartFamily {
    pub model: LgModel,
    pub base: CanonicalChart,
    /// Eigenvectors of `V` at the base.
    pub diagonalizer: CMat,
    pub mu: Vec<Scalar>,
    pub alpha_shift: f64,
    pub opts: OdeOptions,
}

fn flatten(m: &CMat) -> Vec<Scalar> {
    m.iter().copied().collect()
}

impl ChartFamily {
    pub fn new(base: CanonicalChart, alpha_shift: f64) -> Result<Self, SchlesingerError> {
        let (mu, p) = linalg::diagonalize(&base.v_matrix(), EIGEN_GAP).map_err(SchlesingerError::EigenCollision)?;
        Ok(ChartFamily {
            model: base.model,
            base,
            diagonalizer: p,
            mu,
            alpha_shift,
            opts: OdeOptions::default(),
        })
    }

    /// Transport `M₀` along straight segments through `waypoints`, ending
    /// at the last one. Returns `M₀` and the chart at the end point.
    pub fn transport(&self, waypoints: &[Vec<Scalar>]) -> Result<(CMat, CanonicalChart), SchlesingerError> {
        let n = self.base.dim();
        let mut m0 = CMat::identity(n, n);
        let mut chart = self.base.clone();
        for target in waypoints {
            let start = chart.flat_point.clone();
            let dx: Vec<Scalar> = target.iter().zip(&start).map(|(a, b)| a - b).collect();
            let mut reference = chart.clone();
            let mut failure: Option<LgError> = None;
            let rhs = |t: f64, y: &[Scalar]| -> Result<Vec<Scalar>, String> {
                let x: Vec<Scalar> = start.iter().zip(&dx).map(|(s, d)| s + d * t).collect();
                let ch = match self.model.chart_near(&x, Some(&reference)) {
                    Ok(ch) => ch,
                    Err(e) => {
                        failure = Some(e.clone());
                        return Err(e.to_string());
                    }
                };
                let du: Vec<Scalar> = (0..n).map(|j| (0..n).map(|a| ch.du_dx[(j, a)] * dx[a]).sum()).collect();
                let vj = ch.v_j();
                let gen = (0..n).fold(CMat::zeros(n, n), |acc, j| acc + &vj[j] * du[j]);
                let cur = CMat::from_column_slice(n, n, y);
                reference = ch;
                Ok(flatten(&(gen * cur)))
            };
            let traj = integrate(rhs, 0.0, &flatten(&m0), 1.0, &self.opts);
            if let Some(e) = failure {
                return Err(e.into());
            }
            m0 = CMat::from_column_slice(n, n, traj?.last());
            chart = self.model.chart_near(target, Some(&chart))?;
        }
        Ok((m0, chart))
    }

    /// The system at flat point `x`, reached by a straight path.
    pub fn system_at_x(&self, x: &[Scalar]) -> Result<SchlesingerSystem, SchlesingerError> {
        self.system_via(&[x.to_vec()])
    }

    /// The system at the last waypoint, reached through the others.
    pub fn system_via(&self, waypoints: &[Vec<Scalar>]) -> Result<SchlesingerSystem, SchlesingerError> {
        let (m0, chart) = self.transport(waypoints)?;
        SchlesingerSystem::from_frame(chart.u.clone(), m0 * &self.diagonalizer, chart.v_matrix(), chart.v_j(), self.alpha_shift)
    }

    /// The system at canonical coordinates `u` near the base.
    pub fn system_at_u(&self, u: &[Scalar]) -> Result<SchlesingerSystem, SchlesingerError> {
        let chart = self.model.chart_at_u(&self.base, u)?;
        self.system_at_x(&chart.flat_point)
    }
}

/// Build the system at a chart point with `M₀ = 1` there.
pub fn system_from_chart(chart: &CanonicalChart, alpha_shift: f64) -> Result<SchlesingerSystem, SchlesingerError> {
    let fam = ChartFamily::new(chart.clone(), alpha_shift)?;
    SchlesingerSystem::from_frame(chart.u.clone(), fam.diagonalizer.clone(), chart.v_matrix(), chart.v_j(), alpha_shift)
}

/// Residual of the Schlesinger equations for a family `u ↦ system`, with
/// central differences of step `h` and one Richardson extrapolation.
pub fn schlesinger_residual<F>(family: &mut F, u: &[Scalar], h: f64) -> Result<f64, SchlesingerError>
where
    F: FnMut(&[Scalar]) -> Result<SchlesingerSystem, SchlesingerError>,
{
    let gap = min_gap(u);
    if gap == 0.0 {
        return Err(SchlesingerError::Coincident);
    }
    if h > MAX_STEP_FRACTION * gap {
        return Err(SchlesingerError::StepTooLarge { step: h, gap });
    }
    let n = u.len();
    let centre = family(u)?;
    let mut at = |j: usize, step: f64| -> Result<Vec<CMat>, SchlesingerError> {
        let mut p = u.to_vec();
        let mut m = u.to_vec();
        p[j] += step;
        m[j] -= step;
        let (sp, sm) = (family(&p)?, family(&m)?);
        Ok((0..n).map(|i| (&sp.s[i] - &sm.s[i]) / c(2.0 * step)).collect())
    };
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let coarse = at(j, h)?;
        let fine = at(j, h / 2.0)?;
        for i in 0..n {
            let d = (&fine[i] * c(4.0) - &coarse[i]) / c(3.0);
            let predicted = if i == j {
                (0..n)
                    .filter(|&k| k != i)
                    .fold(CMat::zeros(n, n), |acc, k| acc + commutator(&centre.s[i], &centre.s[k]) / (centre.u[i] - centre.u[k]))
            } else {
                commutator(&centre.s[i], &centre.s[j]) / (centre.u[j] - centre.u[i])
            };
            worst = worst.max(linalg::max_abs_diff(&d, &predicted));
        }
    }
    Ok(worst)
}

/// Both sides of the isomonodromic tau identity.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoTau {
    /// `Σ_{k≠j} tr(S_j S_k)/(u_j − u_k)`.
    pub lhs: Vec<Scalar>,
    /// `½ tr(V_j V)`.
    pub rhs: Vec<Scalar>,
    pub residual: f64,
}

pub fn iso_tau_residual(sys: &SchlesingerSystem) -> Result<IsoTau, SchlesingerError> {
    let n = sys.dim();
    if min_gap(&sys.u) == 0.0 {
        return Err(SchlesingerError::Coincident);
    }
    let lhs: Vec<Scalar> = (0..n)
        .map(|j| {
            (0..n)
                .filter(|&k| k != j)
                .map(|k| linalg::trace(&(&sys.s[j] * &sys.s[k])) / (sys.u[j] - sys.u[k]))
                .sum()
        })
        .collect();
    let rhs: Vec<Scalar> = (0..n).map(|j| linalg::trace(&(&sys.v_j[j] * &sys.v)) * 0.5).collect();
    let residual = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(IsoTau { lhs, rhs, residual })
}

/// Largest entrywise spread of `S_∞` over a set of systems.
pub fn s_infinity_spread(systems: &[SchlesingerSystem]) -> f64 {
    let first = systems[0].s_infinity();
    systems[1..]
        .iter()
        .map(|s| linalg::max_abs_diff(&s.s_infinity(), &first))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n2(r: f64, alpha: f64, u1: f64, u2: f64) -> SchlesingerSystem {
        n2_system(r, alpha, [c(u1), c(u2)]).unwrap()
    }

    #[test]
    fn n2_structure() {
        let sys = n2(0.7, 0.3, 2.0, 1.0);
        assert!((linalg::trace(&sys.s_infinity()) + 0.6).norm() < 1e-14);
        let mu = sys.mu();
        assert!((mu[0] + 0.7).norm() < 1e-12 && (mu[1] - 0.7).norm() < 1e-12);
        let s = n2_s();
        let eta = s.transpose() * &s;
        assert!(linalg::max_abs_diff(&eta, &CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])) < 1e-15);
        let zero_alpha = n2(0.7, 0.0, 2.0, 1.0);
        for s in &zero_alpha.s {
            assert!(s.determinant().norm() < 1e-14);
        }
        assert!(n2_system(1.0, 0.0, [c(1.0), c(1.0)]).is_err());
    }

    #[test]
    fn n2_residual_and_shift_invariance() {
        let mut fam = |u: &[Scalar]| n2_system(1.0, 0.0, [u[0], u[1]]);
        let r = schlesinger_residual(&mut fam, &[c(2.0), c(1.0)], 1e-3).unwrap();
        assert!(r < 1e-7, "{r}");
        let a = n2(1.0, 0.0, 2.0, 1.0);
        let b = n2(1.0, 0.0, 5.5, 4.5);
        for i in 0..2 {
            assert_eq!(a.s[i], b.s[i]);
        }
        assert!(matches!(schlesinger_residual(&mut fam, &[c(2.0), c(1.0)], 0.5), Err(SchlesingerError::StepTooLarge { .. })));
    }

    #[test]
    fn n2_residual_converges_at_high_order() {
        let mut fam = |u: &[Scalar]| n2_system(1.3, 0.0, [u[0], u[1]]);
        let u = [c(2.0), c(1.0)];
        let r1 = schlesinger_residual(&mut fam, &u, 0.08).unwrap();
        let r2 = schlesinger_residual(&mut fam, &u, 0.04).unwrap();
        assert!(r1 / r2 > 8.0, "{r1} {r2}");
    }

    #[test]
    fn commuting_mock_has_no_residual() {
        let mut fam = |u: &[Scalar]| -> Result<SchlesingerSystem, SchlesingerError> {
            Ok(SchlesingerSystem {
                u: u.to_vec(),
                s: (0..3).map(|i| linalg::unit(3, i) * c(i as f64 + 1.0)).collect(),
                alpha_shift: 0.0,
                m: CMat::identity(3, 3),
                v: CMat::zeros(3, 3),
                v_j: vec![CMat::zeros(3, 3); 3],
            })
        };
        let r = schlesinger_residual(&mut fam, &[c(0.0), c(1.0), c(3.0)], 1e-3).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn n2_iso_tau() {
        let a = iso_tau_residual(&n2(1.0, 0.0, 2.0, 1.0)).unwrap();
        assert!((a.lhs[0] - 1.0).norm() < 1e-12 && (a.rhs[0] - 1.0).norm() < 1e-12);
        assert!(a.residual < 1e-10);
        let b = iso_tau_residual(&n2(1.0, 0.7, 2.0, 1.0)).unwrap();
        assert!((a.residual - b.residual).abs() < 1e-10);
    }

    fn n3_family() -> ChartFamily {
        let base = LgModel::n3().chart(&[c(0.4), c(1.3), c(0.8)]).unwrap();
        ChartFamily::new(base, 0.0).unwrap()
    }

    #[test]
    fn n3_chart_system() {
        let fam = n3_family();
        let sys = system_from_chart(&fam.base, 0.0).unwrap();
        let mu = sys.mu();
        let half_sum: Scalar = mu.iter().map(|m| m * m).sum::<Scalar>() * 0.5;
        assert!((half_sum - 0.25).norm() < 1e-6, "{mu:?}");
        let tau = iso_tau_residual(&sys).unwrap();
        assert!(tau.residual < 1e-5, "{tau:?}");
        let direct = crate::n3::tau_cross_check_chart(&fam.base).unwrap();
        for j in 0..3 {
            assert!((tau.lhs[j] - direct.dlog_tau[j]).norm() < 1e-5);
        }
    }

    #[test]
    fn n3_transport() {
        let fam = n3_family();
        let offsets = [[0.0, 0.0, 0.0], [0.05, 0.0, 0.0], [0.0, 0.04, 0.0], [0.0, 0.0, 0.03], [0.02, -0.03, 0.02]];
        let systems: Vec<SchlesingerSystem> = offsets
            .iter()
            .map(|d| {
                let x: Vec<Scalar> = fam.base.flat_point.iter().zip(d).map(|(a, b)| a + b).collect();
                fam.system_at_x(&x).unwrap()
            })
            .collect();
        assert!(s_infinity_spread(&systems) < 1e-5);
        let target: Vec<Scalar> = fam.base.flat_point.iter().zip([0.03, 0.05, -0.02]).map(|(a, b)| a + b).collect();
        let via: Vec<Scalar> = fam.base.flat_point.iter().zip([0.06, 0.0, 0.01]).map(|(a, b)| a + b).collect();
        let (m_a, _) = fam.transport(std::slice::from_ref(&target)).unwrap();
        let (m_b, _) = fam.transport(&[via, target]).unwrap();
        assert!(linalg::max_abs_diff(&m_a, &m_b) < 1e-6);
    }

    #[test]
    fn n3_schlesinger_equations() {
        let fam = n3_family();
        let u = fam.base.u.clone();
        let mut by_transport = |p: &[Scalar]| fam.system_at_u(p);
        let r = schlesinger_residual(&mut by_transport, &u, 1e-3).unwrap();
        assert!(r < 1e-5, "{r}");
        let model = fam.model;
        let base = fam.base.clone();
        let mut by_frame = |p: &[Scalar]| chart_frame_system(&model.chart_at_u(&base, p)?, 0.0);
        let r = schlesinger_residual(&mut by_frame, &u, 1e-3).unwrap();
        assert!(r < 1e-5, "{r}");
    }
}
