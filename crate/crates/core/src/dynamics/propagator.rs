use serde::Serialize;

use super::law::PhaseLaw;
use crate::error::{Error, Result};
use crate::hilbert::{QLState, ReferenceBasis};
use crate::linalg::{Mat2, C64, ONE};
use crate::tolerance;

/// `Û(t, t₀)`, diagonal in the a(t₀)-basis: `diag(1, e^{iξ_C(t,t₀)})`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Propagator {
    xi: f64,
    t0: f64,
    t: f64,
    context: Option<String>,
}

impl Propagator {
    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.t0, self.t)
    }

    pub fn context(&self) -> Option<&str> {
        self.context.as_deref()
    }

    /// Matrix in a-coordinates.
    pub fn matrix(&self) -> Mat2 {
        Mat2::diag(ONE, C64::from_polar(1.0, self.xi))
    }

    /// The same operator in b-coordinates, `V D V⁻¹` with `V` the a-basis
    /// columns. Unitary when the a-basis is orthonormal.
    pub fn in_b_coordinates(&self, basis: &ReferenceBasis) -> Mat2 {
        let v = basis.a_to_b();
        v * self.matrix() * v.adjoint()
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.matrix().unitarity_defect()
    }
}

/// Build `Û_C(t, t₀)` from a phase law.
pub fn propagator(law: &PhaseLaw, t0: f64, t: f64, context: Option<&str>) -> Result<Propagator> {
    let origin = law.increment(t0, t0, context)?;
    if origin.abs() > tolerance::STRUCTURAL {
        return Err(Error::InvalidInput(format!(
            "phase law has ξ(t₀, t₀) = {origin:e} at t₀ = {t0}"
        )));
    }
    Ok(Propagator {
        xi: law.increment(t, t0, context)?,
        t0,
        t,
        context: context.map(str::to_string),
    })
}

/// `φ(t) = Û_C(t, t₀) φ(t₀)`, i.e. `u₁e₁ + e^{iξ}u₂e₂` with b-probabilities
/// recomputed from Born's rule.
///
/// The state must have an orthonormal a-basis (double stochastic
/// transitions); otherwise the diagonal operator is not unitary in the
/// b-coordinates.
pub fn evolve(
    state: &QLState,
    law: &PhaseLaw,
    t0: f64,
    t: f64,
    context: Option<&str>,
) -> Result<QLState> {
    if !state.basis().orthonormal {
        return Err(Error::NonOrthonormalBasis(
            state.basis().orthonormality_defect(),
        ));
    }
    let u = propagator(law, t0, t, context)?;
    state.advanced(u.xi())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::dynamics::law::Rate;
    use crate::hilbert::{born_probability, represent, Observable};
    use crate::interference::{classify_context, ContextualData};

    fn ds_state() -> QLState {
        let data = ContextualData::new([0.3, 0.7], [0.5, 0.5], [[0.8, 0.2], [0.2, 0.8]]).unwrap();
        represent(&data, &classify_context(&data).unwrap()).unwrap()
    }

    #[test]
    fn zero_law_is_identity() {
        let u = propagator(&PhaseLaw::zero(), 0.3, 2.0, None).unwrap();
        assert_eq!(u.matrix(), Mat2::identity());
        let s = ds_state();
        let e = evolve(&s, &PhaseLaw::zero(), 0.0, 1.0, None).unwrap();
        assert!(crate::linalg::vec_distance(&s.amplitude(), &e.amplitude()) < 1e-15);
    }

    #[test]
    fn schroedinger_half_period() {
        let u = propagator(&PhaseLaw::schroedinger(1.0, 1.0), 0.0, PI, None).unwrap();
        let expected = Mat2::real_diag(1.0, -1.0);
        assert!((u.matrix() - expected).frobenius() < 1e-15);
    }

    #[test]
    fn ramp_increment() {
        let u = propagator(&PhaseLaw::linear_ramp(2.0, 1.0), 0.0, 1.0, None).unwrap();
        assert!((u.xi() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn evolution_conserves_a_probabilities() {
        let s = ds_state();
        let law = PhaseLaw::from_rate(Rate::Sinusoid {
            amplitude: 2.0,
            omega: 1.3,
            phase: 0.2,
        });
        for t in [0.1, 0.7, 3.0, 11.0] {
            let e = evolve(&s, &law, 0.0, t, None).unwrap();
            for y in 0..2 {
                let before = born_probability(&s, Observable::A, y).unwrap();
                let after = born_probability(&e, Observable::A, y).unwrap();
                assert!((before - after).abs() < 1e-12);
            }
            assert!(e.born_b_residual() < 1e-12);
        }
    }

    #[test]
    fn full_period_returns() {
        let s = ds_state();
        let e = evolve(&s, &PhaseLaw::schroedinger(1.0, 1.0), 0.0, 2.0 * PI, None).unwrap();
        assert!(crate::linalg::vec_distance(&s.amplitude(), &e.amplitude()) < 1e-12);
    }

    #[test]
    fn b_coordinate_operator_is_unitary() {
        let s = ds_state();
        let u = propagator(&PhaseLaw::schroedinger(0.7, 1.0), 0.0, 1.9, None).unwrap();
        let m = u.in_b_coordinates(s.basis());
        assert!(m.unitarity_defect() < 1e-12);
        let mapped = m.apply(&s.amplitude());
        let direct = evolve(&s, &PhaseLaw::schroedinger(0.7, 1.0), 0.0, 1.9, None).unwrap();
        assert!(crate::linalg::vec_distance(&mapped, &direct.amplitude()) < 1e-12);
    }

    #[test]
    fn non_double_stochastic_state_rejected() {
        let data = ContextualData::new([0.3, 0.7], [0.45, 0.55], [[0.2, 0.8], [0.6, 0.4]]).unwrap();
        let s = represent(&data, &classify_context(&data).unwrap()).unwrap();
        assert!(matches!(
            evolve(&s, &PhaseLaw::zero(), 0.0, 1.0, None),
            Err(Error::NonOrthonormalBasis(_))
        ));
    }
}
