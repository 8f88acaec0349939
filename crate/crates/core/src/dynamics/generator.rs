use serde::Serialize;

use super::classify::{
    classify_continuity, classify_determinism, classify_time_shift_invariance, thin,
};
use super::law::PhaseLaw;
use super::propagator::propagator;
use crate::error::{Error, Result};
use crate::hilbert::ObservableOperator;
use crate::linalg::{self, Mat2, C64};
use crate::tolerance;

/// `E(t) = −h f(t)` for a deterministic law that is not time-shift invariant.
#[derive(Clone, Debug)]
pub struct TimeDependentGenerator {
    law: PhaseLaw,
    context: Option<String>,
    h: f64,
}

/// Step of the five-point stencil used when the law has no analytic rate.
const STENCIL_STEP: f64 = 1e-3;

impl TimeDependentGenerator {
    pub fn h(&self) -> f64 {
        self.h
    }

    /// `f(t) = ∂ξ(t, t₀)/∂t`, analytic when available.
    pub fn rate(&self, t: f64) -> Result<f64> {
        let ctx = self.context.as_deref();
        if let Some(f) = self.law.rate(t, t, ctx)? {
            return Ok(f);
        }
        let d = STENCIL_STEP;
        let xi = |s: f64| self.law.increment(s, t, ctx);
        Ok(
            (xi(t - 2.0 * d)? - 8.0 * xi(t - d)? + 8.0 * xi(t + d)? - xi(t + 2.0 * d)?)
                / (12.0 * d),
        )
    }

    pub fn energy(&self, t: f64) -> Result<f64> {
        Ok(-self.h * self.rate(t)?)
    }

    /// `Ĥ(t) = diag(0, E(t))` in a-coordinates.
    pub fn hamiltonian(&self, t: f64) -> Result<ObservableOperator> {
        Ok(ObservableOperator::hamiltonian(self.energy(t)?))
    }

    /// `exp(−(i/h) ∫_{t₀}^t Ĥ(s) ds)`; the generators commute, so no time
    /// ordering is needed. The integral uses composite Simpson with
    /// `2·intervals` panels.
    pub fn propagator(&self, t0: f64, t: f64, intervals: usize) -> Result<Mat2> {
        let n = 2 * intervals.max(1);
        let w = (t - t0) / n as f64;
        let mut sum = self.energy(t0)? + self.energy(t)?;
        for k in 1..n {
            let c = if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += c * self.energy(t0 + k as f64 * w)?;
        }
        let action = sum * w / 3.0;
        Ok(linalg::expm_hermitian(
            &Mat2::real_diag(0.0, action),
            1.0 / self.h,
        ))
    }
}

#[derive(Clone, Debug)]
pub enum Generator {
    /// `Ĥ = diag(0, E)`, `E = −h ξ(t, t₀)/(t − t₀)`.
    Constant {
        hamiltonian: ObservableOperator,
        energy: f64,
    },
    TimeDependent(TimeDependentGenerator),
}

impl Generator {
    /// `Ĥ(t)` (constant generators ignore `t`).
    pub fn hamiltonian_at(&self, t: f64) -> Result<ObservableOperator> {
        match self {
            Generator::Constant { hamiltonian, .. } => Ok(*hamiltonian),
            Generator::TimeDependent(g) => g.hamiltonian(t),
        }
    }

    /// Propagator re-exponentiated from the generator.
    pub fn propagator(&self, t0: f64, t: f64, h: f64) -> Result<Mat2> {
        match self {
            Generator::Constant { hamiltonian, .. } => {
                Ok(linalg::expm_hermitian(hamiltonian.matrix(), (t - t0) / h))
            }
            Generator::TimeDependent(g) => g.propagator(t0, t, 512),
        }
    }
}

/// Recover the generator of a deterministic, continuous law.
///
/// Time-shift invariant laws whose quotient `−h ξ(t, t₀)/(t − t₀)` is
/// constant over the grid give a constant Hamiltonian; other deterministic
/// laws give `E(t) = −h f(t)`.
pub fn extract_hamiltonian(
    law: &PhaseLaw,
    h: f64,
    grid: &[f64],
    context: Option<&str>,
) -> Result<Generator> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("h must be positive, got {h}")));
    }
    let det = classify_determinism(law, grid, context)?;
    if !det.holds {
        return Err(Error::NoGenerator(format!(
            "cocycle fails by {:e}; evolution is not deterministic",
            det.max_defect
        )));
    }
    if !classify_continuity(law, grid, context)?.continuous {
        return Err(Error::NoGenerator(
            "phase increment is not continuous".into(),
        ));
    }

    if classify_time_shift_invariance(law, grid, context)?.holds {
        let p = thin(grid);
        let mut quotients = Vec::new();
        for (k, &t0) in p.iter().enumerate() {
            for &t in &p[k + 1..] {
                quotients.push(-h * law.increment(t, t0, context)? / (t - t0));
            }
        }
        if let Some(&first) = quotients.first() {
            let spread = quotients
                .iter()
                .map(|q| (q - first).abs())
                .fold(0.0, f64::max);
            if spread <= tolerance::LAW {
                let energy = quotients.iter().sum::<f64>() / quotients.len() as f64;
                return Ok(Generator::Constant {
                    hamiltonian: ObservableOperator::hamiltonian(energy),
                    energy,
                });
            }
        }
    }
    Ok(Generator::TimeDependent(TimeDependentGenerator {
        law: law.clone(),
        context: context.map(str::to_string),
        h,
    }))
}

/// `max ‖Û(s+t) − Û(s)Û(t)‖` over grid offsets, with `Û(s) = Û(t₀+s, t₀)`.
pub fn group_law_defect(law: &PhaseLaw, grid: &[f64], context: Option<&str>) -> Result<f64> {
    let p = thin(grid);
    let t0 = p[0];
    let offsets: Vec<f64> = p.iter().map(|t| t - t0).collect();
    let u = |s: f64| propagator(law, t0, t0 + s, context).map(|u| u.matrix());
    let mut defect = 0.0f64;
    for &s in &offsets {
        let us = u(s)?;
        for &t in &offsets {
            let lhs = u(s + t)?;
            defect = defect.max((lhs - us * u(t)?).frobenius());
        }
    }
    Ok(defect)
}

/// `max ‖Û_generator(t, t₀) − Û_law(t, t₀)‖` over grid pairs.
pub fn reconstruction_defect(
    generator: &Generator,
    law: &PhaseLaw,
    grid: &[f64],
    h: f64,
    context: Option<&str>,
) -> Result<f64> {
    let p = thin(grid);
    let mut defect = 0.0f64;
    for (k, &t0) in p.iter().enumerate() {
        for &t in &p[k..] {
            let from_law = propagator(law, t0, t, context)?.matrix();
            defect = defect.max((generator.propagator(t0, t, h)? - from_law).frobenius());
        }
    }
    Ok(defect)
}

/// Finite-difference residual of `ih dÛ/dt = ĤÛ` at the grid points:
/// `max ‖ih (Û(t+δ) − Û(t−δ))/2δ − Ĥ(t)Û(t)‖` with `Û(t) = Û(t, t₀)`.
pub fn schroedinger_residual(
    generator: &Generator,
    law: &PhaseLaw,
    grid: &[f64],
    h: f64,
    step: f64,
    context: Option<&str>,
) -> Result<f64> {
    let p = thin(grid);
    let t0 = p[0];
    let u = |t: f64| propagator(law, t0, t, context).map(|u| u.matrix());
    let ih = C64::new(0.0, h);
    let mut residual = 0.0f64;
    for &t in &p {
        let derivative = (u(t + step)? - u(t - step)?).scale(ih / (2.0 * step));
        let rhs = *generator.hamiltonian_at(t)?.matrix() * u(t)?;
        residual = residual.max((derivative - rhs).frobenius());
    }
    Ok(residual)
}

/// Result of comparing a perturbed law against its unperturbed part on
/// `[t₀, t₀ + T]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproximationReport {
    /// `ε̂ = h · sup |ε f₁(s, t₀)|`, in energy units.
    pub epsilon_hat: f64,
    pub horizon: f64,
    /// `ε̂ T / h`.
    pub bound: f64,
    /// `max ‖Û_full − Û_approx‖` sampled on the horizon.
    pub observed: f64,
    pub reversible_approx: bool,
    pub linear_approx: bool,
}

/// Quantify how far a perturbed law is from its unperturbed part.
pub fn approximation_analysis(
    law: &PhaseLaw,
    h: f64,
    t0: f64,
    horizon: f64,
    context: Option<&str>,
) -> Result<ApproximationReport> {
    const SAMPLES: usize = 1000;
    let perturbation = law.perturbation().ok_or(Error::NoDecomposition)?;
    let approx = law.unperturbed();
    let mut sup = 0.0f64;
    let mut observed = 0.0f64;
    for k in 0..=SAMPLES {
        let t = t0 + horizon * k as f64 / SAMPLES as f64;
        sup = sup.max(perturbation.rate(t, t0).abs());
        let full = propagator(law, t0, t, context)?.matrix();
        let base = propagator(&approx, t0, t, context)?.matrix();
        observed = observed.max((full - base).frobenius());
    }
    let epsilon_hat = h * sup;
    let small = epsilon_hat * horizon < tolerance::APPROXIMATION_FRACTION * h;
    Ok(ApproximationReport {
        epsilon_hat,
        horizon,
        bound: epsilon_hat * horizon / h,
        observed,
        reversible_approx: small,
        linear_approx: small,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::classify::uniform_grid;
    use crate::dynamics::law::{Clock, Perturbation, Rate};

    fn grid() -> Vec<f64> {
        uniform_grid(0.0, 3.0, 0.05)
    }

    #[test]
    fn constant_generator() {
        let law = PhaseLaw::from_rate(Rate::Constant(-1.0));
        let Generator::Constant {
            energy,
            hamiltonian,
        } = extract_hamiltonian(&law, 1.0, &grid(), None).unwrap()
        else {
            panic!("expected constant generator");
        };
        assert!((energy - 1.0).abs() < 1e-9);
        assert!((*hamiltonian.matrix() - Mat2::real_diag(0.0, 1.0)).frobenius() < 1e-9);
    }

    #[test]
    fn zero_law_has_zero_hamiltonian() {
        let g = extract_hamiltonian(&PhaseLaw::zero(), 1.0, &grid(), None).unwrap();
        assert!(matches!(g, Generator::Constant { energy, .. } if energy == 0.0));
    }

    #[test]
    fn ramp_generator_pointwise() {
        let law = PhaseLaw::linear_ramp(1.5, 1.0);
        let Generator::TimeDependent(g) = extract_hamiltonian(&law, 1.0, &grid(), None).unwrap()
        else {
            panic!("expected time-dependent generator");
        };
        for t in grid() {
            assert!((g.energy(t).unwrap() - 1.5 * t).abs() < 1e-9);
        }
        let custom = PhaseLaw::from_fn(|t, t0| -0.75 * (t * t - t0 * t0));
        let Generator::TimeDependent(g) = extract_hamiltonian(&custom, 1.0, &grid(), None).unwrap()
        else {
            panic!("expected time-dependent generator");
        };
        for t in grid() {
            assert!((g.energy(t).unwrap() - 1.5 * t).abs() < 1e-9);
        }
    }

    #[test]
    fn non_deterministic_law_has_no_generator() {
        let law = PhaseLaw::from_fn(|t, t0| (t - t0).powi(2));
        assert!(matches!(
            extract_hamiltonian(&law, 1.0, &grid(), None),
            Err(Error::NoGenerator(_))
        ));
    }

    #[test]
    fn reconstruction_and_residuals() {
        for law in [
            PhaseLaw::schroedinger(1.3, 1.0),
            PhaseLaw::linear_ramp(0.8, 1.0),
        ] {
            let g = extract_hamiltonian(&law, 1.0, &grid(), None).unwrap();
            assert!(reconstruction_defect(&g, &law, &grid(), 1.0, None).unwrap() < 1e-9);
            assert!(schroedinger_residual(&g, &law, &grid(), 1.0, 1e-4, None).unwrap() < 1e-6);
        }
        assert!(
            group_law_defect(&PhaseLaw::schroedinger(1.0, 1.0), &grid(), None).unwrap() < 1e-10
        );
        assert!(group_law_defect(&PhaseLaw::linear_ramp(1.0, 1.0), &grid(), None).unwrap() > 1e-3);
    }

    #[test]
    fn approximation_thresholds() {
        let base = PhaseLaw::schroedinger(1.0, 1.0);
        assert_eq!(
            approximation_analysis(&base, 1.0, 0.0, 1.0, None),
            Err(Error::NoDecomposition)
        );
        let with = |eps: f64| {
            base.clone().with_perturbation(Perturbation {
                epsilon: eps,
                shape: Rate::Constant(1.0),
                clock: Clock::Absolute,
            })
        };
        let r = approximation_analysis(&with(0.0), 1.0, 0.0, 1.0, None).unwrap();
        assert!(r.reversible_approx && r.linear_approx && r.bound == 0.0);
        let r = approximation_analysis(&with(1e-6), 1.0, 0.0, 1.0, None).unwrap();
        assert!(r.reversible_approx && r.bound <= 1e-6 + 1e-18);
        assert!(r.observed <= r.bound * (1.0 + 1e-9));
        let r = approximation_analysis(&with(0.5), 1.0, 0.0, 1.0, None).unwrap();
        assert!(!r.reversible_approx && !r.linear_approx);
    }
}
