//! Time evolution of the coefficient of statistical disturbance.
//!
//! With `θ_C′(t) = f(t)` and `λ_C(t) = cos θ_C(t)`, the coefficient obeys
//! the first-order equation `λ′ = ±f(t)√(1 − λ²)` and, for constant
//! `f = −E/h`, the harmonic oscillator equation `λ″ + ω²λ = 0` with
//! `ω = E/h`.

use std::f64::consts::TAU;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default fixed integration step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Half-width of the band `1 − |λ| < BAND` near the turning points in which
/// the direct solver integrates the regular pair `(λ, μ)` instead of the
/// singular scalar equation.
const BAND: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ThetaIntegration,
    DirectEabb,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ThetaIntegration => "theta-integration",
            Method::DirectEabb => "direct-eabb",
        }
    }
}

/// Samples of `λ_C(t)` and `θ_C(t)` (continuous branch) on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaTrajectory {
    pub grid: Vec<f64>,
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
    pub method: Method,
}

impl LambdaTrajectory {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `max |λ₁(t) − λ₂(t)|`; the grids must match.
    pub fn sup_distance(&self, other: &LambdaTrajectory) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidInput(
                "trajectories are sampled on different grids".into(),
            ));
        }
        Ok(self
            .lambda
            .iter()
            .zip(&other.lambda)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Rows `t,theta,lambda,method` after a header line.
    pub fn write_csv(&self, out: &mut impl Write, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "t,theta,lambda,method")?;
        }
        for k in 0..self.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{}",
                self.grid[k],
                self.theta[k],
                self.lambda[k],
                self.method.name()
            )?;
        }
        Ok(())
    }
}

fn sample(f: &dyn Fn(f64) -> f64, t: f64) -> Result<f64> {
    let v = f(t);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("f({t})")))
    }
}

fn substeps(from: f64, to: f64, step: f64) -> (usize, f64) {
    let n = ((to - from).abs() / step).ceil().max(1.0) as usize;
    (n, (to - from) / n as f64)
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "integration step must be positive, got {step}"
        )))
    }
}

/// Integrate `θ′ = f` from `t₀` to every grid point with fixed-step RK4
/// (composite Simpson for a right-hand side independent of `θ`), then
/// `λ = cos θ`.
pub fn solve_theta(
    f: &dyn Fn(f64) -> f64,
    theta0: f64,
    t0: f64,
    grid: &[f64],
    step: f64,
) -> Result<LambdaTrajectory> {
    check_step(step)?;
    let mut theta = Vec::with_capacity(grid.len());
    let mut t = t0;
    let mut th = theta0;
    for &target in grid {
        let (n, w) = substeps(t, target, step);
        if target != t {
            let mut acc = 0.0;
            let mut left = sample(f, t)?;
            for k in 0..n {
                let a = t + k as f64 * w;
                let mid = sample(f, a + 0.5 * w)?;
                let right = sample(f, if k + 1 == n { target } else { a + w })?;
                acc += w / 6.0 * (left + 4.0 * mid + right);
                left = right;
            }
            th += acc;
            t = target;
        }
        theta.push(th);
    }
    Ok(LambdaTrajectory {
        grid: grid.to_vec(),
        lambda: theta.iter().map(|th| th.cos()).collect(),
        theta,
        method: Method::ThetaIntegration,
    })
}

/// Direct state of the EABB integrator.
#[derive(Clone, Copy, Debug)]
struct Eabb {
    lambda: f64,
    /// `μ = s√(1 − λ²)`, carried only inside the turning-point band.
    mu: Option<f64>,
    sign: f64,
}

impl Eabb {
    fn in_band(lambda: f64) -> bool {
        1.0 - lambda.abs() < BAND
    }

    fn root(lambda: f64) -> f64 {
        (1.0 - lambda * lambda).max(0.0).sqrt()
    }

    fn step(&mut self, f: &dyn Fn(f64) -> f64, t: f64, w: f64) -> Result<()> {
        let (f0, fm, f1) = (sample(f, t)?, sample(f, t + 0.5 * w)?, sample(f, t + w)?);
        match self.mu {
            None => {
                let s = self.sign;
                let rhs = |fv: f64, l: f64| s * fv * Self::root(l);
                let l = self.lambda;
                let k1 = rhs(f0, l);
                let k2 = rhs(fm, l + 0.5 * w * k1);
                let k3 = rhs(fm, l + 0.5 * w * k2);
                let k4 = rhs(f1, l + w * k3);
                self.lambda = (l + w / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).clamp(-1.0, 1.0);
                if Self::in_band(self.lambda) {
                    self.mu = Some(self.sign * Self::root(self.lambda));
                }
            }
            Some(mu) => {
                let rhs = |fv: f64, l: f64, m: f64| (fv * m, -fv * l);
                let (l, m) = (self.lambda, mu);
                let k1 = rhs(f0, l, m);
                let k2 = rhs(fm, l + 0.5 * w * k1.0, m + 0.5 * w * k1.1);
                let k3 = rhs(fm, l + 0.5 * w * k2.0, m + 0.5 * w * k2.1);
                let k4 = rhs(f1, l + w * k3.0, m + w * k3.1);
                let nl = l + w / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
                let nm = m + w / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
                let norm = nl.hypot(nm);
                self.lambda = nl / norm;
                let nm = nm / norm;
                if nm != 0.0 && nm.signum() != self.sign {
                    log::trace!("turning point: branch flip near t = {}", t + w);
                    self.sign = nm.signum();
                }
                self.mu = if Self::in_band(self.lambda) {
                    Some(nm)
                } else {
                    None
                };
            }
        }
        Ok(())
    }

    /// Principal phase consistent with `λ = cos θ`, `θ′ = f` on the current
    /// branch: `sin θ` has the sign of `−s`.
    fn principal_theta(&self) -> f64 {
        let a = self.lambda.clamp(-1.0, 1.0).acos();
        if self.sign > 0.0 {
            -a
        } else {
            a
        }
    }
}

/// Integrate `λ′ = s f(t) √(1 − λ²)` directly from `λ(t₀) = λ₀`, starting on
/// the branch `s = sign_init`.
///
/// Away from `|λ| = 1` the scalar equation is stepped with RK4. Inside the
/// band `1 − |λ| < 0.05` the solver carries `μ = s√(1 − λ²)` and steps the
/// regular system `λ′ = fμ`, `μ′ = −fλ`, renormalizing `λ² + μ² = 1`; a sign
/// change of `μ` is a turning point and flips the branch.
pub fn solve_eabb(
    f: &dyn Fn(f64) -> f64,
    lambda0: f64,
    sign_init: f64,
    t0: f64,
    grid: &[f64],
    step: f64,
) -> Result<LambdaTrajectory> {
    check_step(step)?;
    if !lambda0.is_finite() {
        return Err(Error::NonFinite("λ₀".into()));
    }
    if lambda0.abs() > 1.0 {
        return Err(Error::HyperbolicInitialData(lambda0.abs()));
    }
    if sign_init.abs() != 1.0 {
        return Err(Error::InvalidInput(format!(
            "sign branch must be ±1, got {sign_init}"
        )));
    }
    let mut state = Eabb {
        lambda: lambda0,
        mu: Eabb::in_band(lambda0).then(|| sign_init * Eabb::root(lambda0)),
        sign: sign_init,
    };
    let mut lambda = Vec::with_capacity(grid.len());
    let mut theta: Vec<f64> = Vec::with_capacity(grid.len());
    let mut t = t0;
    for &target in grid {
        if target != t {
            let (n, w) = substeps(t, target, step);
            for k in 0..n {
                state.step(f, t + k as f64 * w, w)?;
            }
            t = target;
        }
        lambda.push(state.lambda);
        let principal = state.principal_theta();
        let th = match theta.last() {
            Some(&prev) => principal + TAU * ((prev - principal) / TAU).round(),
            None => principal,
        };
        theta.push(th);
    }
    Ok(LambdaTrajectory {
        grid: grid.to_vec(),
        lambda,
        theta,
        method: Method::DirectEabb,
    })
}

/// Uniform spacing of the grid, or an error naming the first deviation.
fn uniform_spacing(grid: &[f64]) -> Result<f64> {
    if grid.len() < 3 {
        return Err(Error::InvalidInput("need at least 3 grid points".into()));
    }
    let dt = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidInput("grid must be increasing".into()));
    }
    for (k, w) in grid.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt {
            return Err(Error::InvalidInput(format!(
                "non-uniform grid at index {k}"
            )));
        }
    }
    Ok(dt)
}

fn second_differences(traj: &LambdaTrajectory, dt: f64) -> Vec<f64> {
    traj.lambda
        .windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]) / (dt * dt))
        .collect()
}

/// `max |λ″ + ω²λ|` over interior points, with central second differences.
pub fn harmonic_residual(traj: &LambdaTrajectory, omega: f64) -> Result<f64> {
    let dt = uniform_spacing(&traj.grid)?;
    let w2 = omega * omega;
    Ok(second_differences(traj, dt)
        .iter()
        .zip(&traj.lambda[1..])
        .map(|(d2, l)| (d2 + w2 * l).abs())
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicFit {
    pub is_harmonic: bool,
    pub fitted_omega: f64,
    pub omega_squared: f64,
    pub residual: f64,
    /// `ω ≈ 0`: constant coefficient.
    pub degenerate: bool,
    /// `E = h ω` when harmonic.
    pub energy: Option<f64>,
}

/// Least-squares fit of `λ″ = −ω²λ` over interior points; harmonic when the
/// post-fit residual is at most `1e-3 · max|λ|`.
pub fn schroedinger_detector(traj: &LambdaTrajectory, h: f64) -> Result<HarmonicFit> {
    const MIN_POINTS: usize = 16;
    const DEGENERATE: f64 = 1e-9;
    if traj.len() < MIN_POINTS {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_POINTS} samples"
        )));
    }
    let dt = uniform_spacing(&traj.grid)?;
    let peak = traj.lambda.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    if peak == 0.0 {
        return Err(Error::IndeterminateFrequency);
    }
    let d2 = second_differences(traj, dt);
    let interior = &traj.lambda[1..traj.len() - 1];
    let num: f64 = d2.iter().zip(interior).map(|(d, l)| d * l).sum();
    let den: f64 = interior.iter().map(|l| l * l).sum();
    if den == 0.0 {
        return Err(Error::IndeterminateFrequency);
    }
    let omega_squared = -num / den;
    let residual = d2
        .iter()
        .zip(interior)
        .map(|(d, l)| (d + omega_squared * l).abs())
        .fold(0.0, f64::max);
    let is_harmonic = residual <= 1e-3 * peak && omega_squared >= -DEGENERATE;
    let fitted_omega = omega_squared.max(0.0).sqrt();
    Ok(HarmonicFit {
        is_harmonic,
        fitted_omega,
        omega_squared,
        residual,
        degenerate: omega_squared.abs() <= DEGENERATE,
        energy: is_harmonic.then_some(h * fitted_omega),
    })
}
