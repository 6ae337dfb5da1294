//! Adaptive Dormand–Prince 5(4) integration of complex systems along a
//! real parameter, with cubic Hermite dense output.

use thiserror::Error;

use crate::jet::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size fell below {h_min:e} at t = {t}")]
    StepUnderflow { t: f64, h_min: f64 },
    #[error("exceeded {0} steps")]
    MaxSteps(usize),
    #[error("right-hand side failed at t = {t}: {message}")]
    Rhs { t: f64, message: String },
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("t = {t} lies outside the integrated interval [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen from the interval length when `None`.
    pub h0: Option<f64>,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h0: None,
            h_min: 1e-14,
            max_steps: 200_000,
        }
    }
}

impl OdeOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        OdeOptions {
            rtol,
            atol: rtol * 1e-2,
            ..Default::default()
        }
    }
}

/// Accepted nodes of an integration together with the derivative at each
/// node, which is all cubic Hermite interpolation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<Scalar>>,
    pub dy: Vec<Vec<Scalar>>,
    pub rejected: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last(&self) -> &[Scalar] {
        self.y.last().expect("trajectory has the initial node")
    }

    /// State at `t` by cubic Hermite interpolation between nodes.
    pub fn at(&self, t: f64) -> Result<Vec<Scalar>, OdeError> {
        let (t0, t1) = (self.t[0], *self.t.last().expect("non-empty"));
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        if t < lo - 1e-14 * lo.abs().max(1.0) || t > hi + 1e-14 * hi.abs().max(1.0) {
            return Err(OdeError::OutOfRange { t, lo, hi });
        }
        let forward = t1 >= t0;
        // nodes are monotone in the integration direction
        let k = self
            .t
            .partition_point(|&s| if forward { s < t } else { s > t })
            .clamp(1, self.t.len() - 1);
        let (a, b) = (self.t[k - 1], self.t[k]);
        let h = b - a;
        let th = (t - a) / h;
        let h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
        let h10 = th * (1.0 - th) * (1.0 - th);
        let h01 = th * th * (3.0 - 2.0 * th);
        let h11 = th * th * (th - 1.0);
        Ok((0..self.y[k].len())
            .map(|i| self.y[k - 1][i] * h00 + self.dy[k - 1][i] * (h10 * h) + self.y[k][i] * h01 + self.dy[k][i] * (h11 * h))
            .collect())
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn integrate<F>(mut f: F, t0: f64, y0: &[Scalar], t1: f64, opts: &OdeOptions) -> Result<Trajectory, OdeError>
where
    F: FnMut(f64, &[Scalar]) -> Result<Vec<Scalar>, String>,
{
    let dim = y0.len();
    let mut rhs = |t: f64, y: &[Scalar]| -> Result<Vec<Scalar>, OdeError> {
        let d = f(t, y).map_err(|message| OdeError::Rhs { t, message })?;
        if d.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(OdeError::NonFinite(t));
        }
        Ok(d)
    };
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut traj = Trajectory {
        t: vec![t0],
        y: vec![y0.to_vec()],
        dy: vec![rhs(t0, y0)?],
        rejected: 0,
    };
    if span == 0.0 {
        return Ok(traj);
    }
    let mut h = opts.h0.unwrap_or(span * 1e-3).min(span);
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<Scalar>> = vec![traj.dy[0].clone(); 7];
    let mut steps = 0;
    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(OdeError::MaxSteps(opts.max_steps));
        }
        if h < opts.h_min * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t, h_min: opts.h_min });
        }
        let last = (t1 - t).abs() <= h * (1.0 + 1e-12);
        let step = if last { t1 - t } else { dir * h };
        for s in 1..7 {
            let ys: Vec<Scalar> = (0..dim)
                .map(|i| y[i] + (0..s).map(|j| k[j][i] * (A[s][j] * step)).sum::<Scalar>())
                .collect();
            k[s] = rhs(t + C[s] * step, &ys)?;
        }
        let y_new: Vec<Scalar> = (0..dim)
            .map(|i| y[i] + (0..6).map(|j| k[j][i] * (A[6][j] * step)).sum::<Scalar>())
            .collect();
        let mut err: f64 = 0.0;
        for i in 0..dim {
            let e: Scalar = (0..7).map(|j| k[j][i] * (E[j] * step)).sum();
            let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            err += (e.norm() / sc).powi(2);
        }
        let err = (err / dim.max(1) as f64).sqrt();
        if !err.is_finite() {
            traj.rejected += 1;
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + step };
            y = y_new;
            // first-same-as-last: stage 7 is f at the new point
            k[0] = k[6].clone();
            traj.t.push(t);
            traj.y.push(y.clone());
            traj.dy.push(k[0].clone());
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = step.abs() * factor;
        } else {
            traj.rejected += 1;
            h = step.abs() * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn exponential_growth() {
        let tr = integrate(|_, y| Ok(vec![y[0]]), 0.0, &[c(1.0)], 1.0, &OdeOptions::default()).unwrap();
        assert!((tr.last()[0] - c(1f64.exp())).norm() < 1e-9);
        let mid = tr.at(0.5).unwrap()[0];
        assert!((mid - c(0.5f64.exp())).norm() < 1e-6);
    }

    #[test]
    fn rotation_conserves_modulus_backwards() {
        let i = Scalar::new(0.0, 1.0);
        let tr = integrate(|_, y| Ok(vec![y[0] * i]), 3.0, &[c(1.0)], -2.0, &OdeOptions::default()).unwrap();
        let expect = (i * -5.0).exp();
        assert!((tr.last()[0] - expect).norm() < 1e-8);
        assert!(tr.at(0.0).is_ok());
        assert!(tr.at(4.0).is_err());
    }

    #[test]
    fn rhs_errors_surface() {
        let r = integrate(|t, _| if t > 0.5 { Err("boom".into()) } else { Ok(vec![c(1.0)]) }, 0.0, &[c(0.0)], 1.0, &OdeOptions::default());
        assert!(matches!(r, Err(OdeError::Rhs { .. })));
    }
}
