//! Complex-amplitude representation of trigonometric contexts.
//!
//! A context with data `p_C^a, p_C^b, p(x/y)` and phases `θ_C(x)` is sent to
//! the wave function
//!
//! ```text
//! φ(x) = √(p_C^a(a₁) p(x/a₁)) + e^{iθ_C(x)} √(p_C^a(a₂) p(x/a₂))
//! ```
//!
//! which reproduces `p_C^b(x) = |φ(x)|²` in the canonical b-basis. The
//! a-basis `e₁ = (u₁₁, u₁₂)`, `e₂ = (e^{iθ₁}u₂₁, e^{iθ₂}u₂₂)` expands the same
//! vector as `φ = u₁ e₁ + u₂ e₂` and is orthonormal exactly when the
//! transition matrix is double stochastic and `θ₂ = θ₁ + π`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interference::{wrap_angle, ContextClass, ContextualData, InterferenceReport};
use crate::linalg::{self, inner, Mat2, Vec2, C64, ONE, ZERO};
use crate::tolerance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    A,
    B,
}

/// Canonical b-basis and the data-dependent a-basis.
///
/// `a[1]` is stored with its global phase `e^{iθ₁}` removed; that phase is
/// kept in [`ReferenceBasis::a_global_phase`]. Born probabilities do not
/// depend on it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReferenceBasis {
    pub b: [Vec2; 2],
    pub a: [Vec2; 2],
    pub a_global_phase: f64,
    pub orthonormal: bool,
}

impl ReferenceBasis {
    /// Largest deviation from orthonormality of the a-basis.
    pub fn orthonormality_defect(&self) -> f64 {
        let overlap = inner(&self.a[0], &self.a[1]).norm();
        let n0 = (linalg::norm_sqr(&self.a[0]).sqrt() - 1.0).abs();
        let n1 = (linalg::norm_sqr(&self.a[1]).sqrt() - 1.0).abs();
        overlap.max(n0).max(n1)
    }

    /// Matrix with the a-basis vectors as columns, mapping a-coordinates to
    /// b-coordinates.
    pub fn a_to_b(&self) -> Mat2 {
        Mat2::from_columns(&self.a[0], &self.a[1])
    }
}

/// Image of a context under the quantum-like representation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QLState {
    amplitude: Vec2,
    a_coordinates: Vec2,
    basis: ReferenceBasis,
    source: ContextualData,
    phases: [f64; 2],
    classification: ContextClass,
    phase_disagreement: Option<f64>,
    born_b_residual: f64,
}

impl QLState {
    /// `φ(b₁), φ(b₂)`.
    pub fn amplitude(&self) -> Vec2 {
        self.amplitude
    }

    /// Coefficients of `φ` in the stored a-basis: `(u₁, e^{iθ₁} u₂)`.
    pub fn a_coordinates(&self) -> Vec2 {
        self.a_coordinates
    }

    pub fn basis(&self) -> &ReferenceBasis {
        &self.basis
    }

    pub fn source(&self) -> &ContextualData {
        &self.source
    }

    /// `θ₁, θ₂` as used by the construction (θ₂ may be `θ₁ + π` rather than
    /// a principal arccos).
    pub fn phases(&self) -> [f64; 2] {
        self.phases
    }

    pub fn classification(&self) -> ContextClass {
        self.classification
    }

    /// `|cos(θ₁ + π) − λ(b₂)|` when the phase constraint overrode a
    /// disagreeing coefficient by more than [`tolerance::PHASE_CONSTRAINT`].
    pub fn phase_disagreement(&self) -> Option<f64> {
        self.phase_disagreement
    }

    /// `max_x ||φ(x)|² − p_C^b(x)|`.
    pub fn born_b_residual(&self) -> f64 {
        self.born_b_residual
    }

    /// `max_y ||(φ, e_y^a)|² − p_C^a(y)|`; meaningful when the a-basis is orthonormal.
    pub fn born_a_residual(&self) -> f64 {
        let p = self.source.p_a();
        (0..2)
            .map(|y| (inner(&self.amplitude, &self.basis.a[y]).norm_sqr() - p[y]).abs())
            .fold(0.0, f64::max)
    }

    /// `u₁ e₁ + u₂ e₂`, the basis expansion of the wave function. Equal to
    /// [`QLState::amplitude`] up to rounding.
    pub fn basis_expansion(&self) -> Vec2 {
        let c = self.a_coordinates;
        linalg::vec_add(
            &linalg::scale(c[0], &self.basis.a[0]),
            &linalg::scale(c[1], &self.basis.a[1]),
        )
    }

    /// Interference representation `v_j^b = u₁ u_{1j} + u₂ u_{2j} e^{iθ_j}`.
    pub fn interference_components(&self) -> Vec2 {
        let ua = self.source.u_a();
        let u = self.source.u_transition();
        [0, 1].map(|j| {
            C64::new(ua[0] * u[0][j], 0.0) + C64::from_polar(ua[1] * u[1][j], self.phases[j])
        })
    }

    /// Rebuild the state after a phase increment `ξ` applied to `e₂`:
    /// `φ' = u₁ e₁ + e^{iξ} u₂ e₂`, with `p_C^b` updated from Born's rule.
    pub(crate) fn advanced(&self, xi: f64) -> Result<QLState> {
        let rot = C64::from_polar(1.0, xi);
        let a_coordinates = [self.a_coordinates[0], rot * self.a_coordinates[1]];
        let amplitude = self.basis.a_to_b().apply(&a_coordinates);
        let p_b = amplitude.map(|z| z.norm_sqr());
        let sum = p_b[0] + p_b[1];
        let source = self.source.with_p_b([p_b[0] / sum, p_b[1] / sum])?;
        let phases = [
            wrap_angle(self.phases[0] + xi),
            wrap_angle(self.phases[1] + xi),
        ];
        let mut basis = self.basis;
        basis.a_global_phase = wrap_angle(basis.a_global_phase + xi);
        Ok(QLState {
            amplitude,
            a_coordinates,
            basis,
            source,
            phases,
            classification: self.classification,
            phase_disagreement: self.phase_disagreement,
            born_b_residual: 0.0,
        }
        .with_born_b_residual())
    }

    fn with_born_b_residual(mut self) -> Self {
        let p = self.source.p_b();
        self.born_b_residual = (0..2)
            .map(|x| (self.amplitude[x].norm_sqr() - p[x]).abs())
            .fold(0.0, f64::max);
        self
    }
}

/// Circular distance between two angles.
fn angle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

/// Construct the wave function and both reference bases of a representable
/// context.
///
/// When the transitions are double stochastic, `θ₂ := θ₁ + π` so that the
/// a-basis is orthonormal; a disagreement with the independently computed
/// `λ(b₂)` is recorded rather than corrected. Otherwise `θ₂` is the branch of
/// `±arccos λ(b₂)` closest to `θ₁ + π`.
pub fn represent(data: &ContextualData, report: &InterferenceReport) -> Result<QLState> {
    let phases0 = match report.phases {
        Some(p) if report.is_representable() => p,
        _ => return Err(Error::NotRepresentable(report.classification.name().into())),
    };
    let theta1 = phases0[0];
    let double_stochastic = is_double_stochastic(&data.transition())?;

    let (theta2, phase_disagreement) = if double_stochastic {
        let theta2 = wrap_angle(theta1 + PI);
        let gap = (theta2.cos() - report.lambda[1]).abs();
        if gap > tolerance::PHASE_CONSTRAINT {
            log::warn!(
                "phase constraint overrides λ(b₂) = {} (gap {gap:e})",
                report.lambda[1]
            );
        }
        (theta2, (gap > tolerance::PHASE_CONSTRAINT).then_some(gap))
    } else {
        let principal = phases0[1];
        let target = theta1 + PI;
        let theta2 = [principal, wrap_angle(TAU - principal)]
            .into_iter()
            .min_by(|a, b| angle_distance(*a, target).total_cmp(&angle_distance(*b, target)))
            .expect("two candidates");
        (theta2, None)
    };
    let phases = [theta1, theta2];

    let ua = data.u_a();
    let u = data.u_transition();
    let amplitude: Vec2 = [0, 1]
        .map(|x| C64::new(ua[0] * u[0][x], 0.0) + C64::from_polar(ua[1] * u[1][x], phases[x]));

    let relative = if double_stochastic {
        C64::new(-1.0, 0.0)
    } else {
        C64::from_polar(1.0, theta2 - theta1)
    };
    let e1 = [C64::new(u[0][0], 0.0), C64::new(u[0][1], 0.0)];
    let e2 = [C64::new(u[1][0], 0.0), relative * u[1][1]];
    let mut basis = ReferenceBasis {
        b: [[ONE, ZERO], [ZERO, ONE]],
        a: [e1, e2],
        a_global_phase: theta1,
        orthonormal: false,
    };
    basis.orthonormal = basis.orthonormality_defect() <= tolerance::ORTHONORMAL;

    let state = QLState {
        amplitude,
        a_coordinates: [C64::new(ua[0], 0.0), C64::from_polar(ua[1], theta1)],
        basis,
        source: *data,
        phases,
        classification: report.classification,
        phase_disagreement,
        born_b_residual: 0.0,
    }
    .with_born_b_residual();

    if state.classification == ContextClass::Trigonometric
        && state.born_b_residual > tolerance::STRUCTURAL
    {
        return Err(Error::InvalidInput(format!(
            "Born rule for b violated by {:e}; contextual data inconsistent",
            state.born_b_residual
        )));
    }
    Ok(state)
}

/// `|(φ, e)|²` against the requested basis vector.
pub fn born_probability(state: &QLState, observable: Observable, index: usize) -> Result<f64> {
    if index > 1 {
        return Err(Error::InvalidInput(format!(
            "value index {index} out of range"
        )));
    }
    let e = match observable {
        Observable::B => &state.basis.b[index],
        Observable::A if state.basis.orthonormal => &state.basis.a[index],
        Observable::A => return Err(Error::BornRuleUnavailable),
    };
    Ok(inner(&state.amplitude, e).norm_sqr())
}

/// Both column sums of a row-stochastic 2×2 matrix equal 1.
pub fn is_double_stochastic(transition: &[[f64; 2]; 2]) -> Result<bool> {
    for (i, row) in transition.iter().enumerate() {
        if row
            .iter()
            .any(|p| !p.is_finite() || *p < -tolerance::PROBABILITY)
            || (row[0] + row[1] - 1.0).abs() > tolerance::PROBABILITY
        {
            return Err(Error::InvalidInput(format!(
                "row {i} of the transition matrix is not stochastic: {row:?}"
            )));
        }
    }
    Ok((0..2).all(|j| (transition[0][j] + transition[1][j] - 1.0).abs() <= tolerance::PROBABILITY))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TheoremCheck {
    /// a-basis orthonormal and Born's rule reproduces `p_C^a`.
    pub both_born_rules_hold: bool,
    pub double_stochastic: bool,
}

impl TheoremCheck {
    pub fn agrees(&self) -> bool {
        self.both_born_rules_hold == self.double_stochastic
    }
}

/// Evaluate both sides of the equivalence "Born's rule holds for both
/// reference variables ⟺ transitions are double stochastic" independently.
pub fn theorem_check(data: &ContextualData, report: &InterferenceReport) -> Result<TheoremCheck> {
    let state = represent(data, report)?;
    let both_born_rules_hold =
        state.basis.orthonormal && state.born_a_residual() <= tolerance::ORTHONORMAL;
    let t = data.transition();
    let double_stochastic =
        (0..2).all(|j| (t[0][j] + t[1][j] - 1.0).abs() <= tolerance::PROBABILITY);
    Ok(TheoremCheck {
        both_born_rules_hold,
        double_stochastic,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorRole {
    PositionLikeB,
    EnergyLikeA,
    Hamiltonian,
}

/// Self-adjoint operator with its closed-form spectral decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ObservableOperator {
    matrix: Mat2,
    eigenvalues: [f64; 2],
    #[serde(skip)]
    eigenvectors: [Vec2; 2],
    role: OperatorRole,
}

impl ObservableOperator {
    pub fn new(matrix: Mat2, role: OperatorRole) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        if !defect.is_finite() || defect > tolerance::STRUCTURAL {
            return Err(Error::InvalidInput(format!(
                "operator is not self-adjoint: ‖A − A†‖ = {defect:e}"
            )));
        }
        let eig = linalg::hermitian_eigen(&matrix);
        Ok(Self {
            matrix,
            eigenvalues: eig.values,
            eigenvectors: eig.vectors,
            role,
        })
    }

    /// Multiplication operator `b̂ φ(x) = x φ(x)`, diagonal in the b-basis.
    pub fn position_like(values: [f64; 2]) -> Self {
        Self::new(
            Mat2::real_diag(values[0], values[1]),
            OperatorRole::PositionLikeB,
        )
        .expect("real diagonal matrix is self-adjoint")
    }

    /// `â = Σ a_i e_i^a (e_i^a)†`, requiring an orthonormal a-basis.
    pub fn energy_like(values: [f64; 2], basis: &ReferenceBasis) -> Result<Self> {
        if !basis.orthonormal {
            return Err(Error::BornRuleUnavailable);
        }
        let m = Mat2::outer(&basis.a[0], &basis.a[0]).scale(C64::new(values[0], 0.0))
            + Mat2::outer(&basis.a[1], &basis.a[1]).scale(C64::new(values[1], 0.0));
        Self::new(m, OperatorRole::EnergyLikeA)
    }

    /// `Ĥ = diag(0, E)` in a-basis coordinates.
    pub fn hamiltonian(energy: f64) -> Self {
        Self::new(Mat2::real_diag(0.0, energy), OperatorRole::Hamiltonian)
            .expect("real diagonal matrix is self-adjoint")
    }

    /// `Ĥ = E e₂ e₂†` in b-basis coordinates.
    pub fn hamiltonian_in(energy: f64, basis: &ReferenceBasis) -> Result<Self> {
        if !basis.orthonormal {
            return Err(Error::BornRuleUnavailable);
        }
        let m = Mat2::outer(&basis.a[1], &basis.a[1]).scale(C64::new(energy, 0.0));
        Self::new(m, OperatorRole::Hamiltonian)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        self.eigenvalues
    }

    pub fn eigenvectors(&self) -> [Vec2; 2] {
        self.eigenvectors
    }

    pub fn role(&self) -> OperatorRole {
        self.role
    }

    /// `max_k ‖A e_k − λ_k e_k‖`.
    pub fn eigen_residual(&self) -> f64 {
        (0..2)
            .map(|k| {
                let v = &self.eigenvectors[k];
                let av = self.matrix.apply(v);
                linalg::vec_distance(&av, &linalg::scale(C64::new(self.eigenvalues[k], 0.0), v))
            })
            .fold(0.0, f64::max)
    }
}

/// `(Âφ, φ)` as a complex number; its imaginary part vanishes up to rounding.
pub fn expectation_value(state: &QLState, op: &ObservableOperator) -> Complex64 {
    inner(&op.matrix.apply(&state.amplitude), &state.amplitude)
}

/// Hilbert-space average `(Âφ, φ)`.
pub fn expectation(state: &QLState, op: &ObservableOperator) -> f64 {
    expectation_value(state, op).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::classify_context;

    fn state_of(data: &ContextualData) -> QLState {
        represent(data, &classify_context(data).unwrap()).unwrap()
    }

    fn symmetric() -> ContextualData {
        ContextualData::new([0.5, 0.5], [0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]]).unwrap()
    }

    #[test]
    fn symmetric_state() {
        let s = state_of(&symmetric());
        // θ = (π/2, 3π/2): φ(b₁) = (1 + i)/2, φ(b₂) = (1 − i)/2.
        let phi = s.amplitude();
        assert!((phi[0] - C64::new(0.5, 0.5)).norm() < 1e-15);
        assert!((phi[1] - C64::new(0.5, -0.5)).norm() < 1e-15);
        assert!((s.phases()[1] - 1.5 * PI).abs() < 1e-15);
        assert!(s.basis().orthonormal);
        for x in 0..2 {
            assert!((born_probability(&s, Observable::B, x).unwrap() - 0.5).abs() < 1e-15);
            assert!((born_probability(&s, Observable::A, x).unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn constructive_case_is_real() {
        // λ(b₁) = 1 with θ₁ = 0: φ(b₁) = √(1/4) + √(1/4).
        let d = ContextualData::new([0.5, 0.5], [1.0, 0.0], [[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let s = state_of(&d);
        assert_eq!(s.classification(), ContextClass::DegenerateBoundary);
        assert!((s.amplitude()[0] - C64::new(1.0, 0.0)).norm() < 1e-7);
        assert!(s.amplitude()[0].im.abs() < 1e-7);
    }

    #[test]
    fn hyperbolic_not_representable() {
        let d = ContextualData::new([0.5, 0.5], [0.22, 0.78], [[0.1, 0.9], [0.1, 0.9]]).unwrap();
        let r = classify_context(&d).unwrap();
        assert!(matches!(represent(&d, &r), Err(Error::NotRepresentable(_))));
    }

    #[test]
    fn double_stochastic_examples() {
        assert!(is_double_stochastic(&[[0.5, 0.5], [0.5, 0.5]]).unwrap());
        assert!(is_double_stochastic(&[[0.7, 0.3], [0.3, 0.7]]).unwrap());
        assert!(!is_double_stochastic(&[[0.7, 0.3], [0.4, 0.6]]).unwrap());
        assert!(is_double_stochastic(&[[0.7, 0.4], [0.3, 0.7]]).is_err());
    }

    #[test]
    fn non_double_stochastic_blocks_born_a() {
        let d = ContextualData::new([0.3, 0.7], [0.45, 0.55], [[0.2, 0.8], [0.6, 0.4]]).unwrap();
        let s = state_of(&d);
        assert!(!s.basis().orthonormal);
        assert_eq!(
            born_probability(&s, Observable::A, 0),
            Err(Error::BornRuleUnavailable)
        );
        let tc = theorem_check(&d, &classify_context(&d).unwrap()).unwrap();
        assert_eq!(
            tc,
            TheoremCheck {
                both_born_rules_hold: false,
                double_stochastic: false
            }
        );
    }

    #[test]
    fn basis_expansion_matches_amplitude() {
        let d = ContextualData::new([0.3, 0.7], [0.45, 0.55], [[0.2, 0.8], [0.6, 0.4]]).unwrap();
        let s = state_of(&d);
        assert!(linalg::vec_distance(&s.basis_expansion(), &s.amplitude()) < 1e-15);
        assert!(linalg::vec_distance(&s.interference_components(), &s.amplitude()) < 1e-15);
    }

    #[test]
    fn expectation_of_b() {
        let s = state_of(&symmetric());
        assert!(expectation(&s, &ObservableOperator::position_like([1.0, -1.0])).abs() < 1e-15);

        let d = ContextualData::new([0.3, 0.7], [0.45, 0.55], [[0.2, 0.8], [0.6, 0.4]]).unwrap();
        let s = state_of(&d);
        let e = expectation(&s, &ObservableOperator::position_like([2.0, 5.0]));
        assert!((e - (2.0 * 0.45 + 5.0 * 0.55)).abs() < 1e-12);
    }

    #[test]
    fn non_self_adjoint_rejected() {
        let m = Mat2([[ONE, ONE], [ZERO, ONE]]);
        assert!(ObservableOperator::new(m, OperatorRole::EnergyLikeA).is_err());
    }

    #[test]
    fn a_and_b_do_not_commute() {
        // Double stochastic with θ₁ = π/3: p_b(b₁) from the interference formula.
        let (pa, t): ([f64; 2], [[f64; 2]; 2]) = ([0.4, 0.6], [[0.7, 0.3], [0.3, 0.7]]);
        let pb1 = pa[0] * t[0][0]
            + pa[1] * t[1][0]
            + 2.0 * (PI / 3.0).cos() * (pa[0] * t[0][0] * pa[1] * t[1][0]).sqrt();
        let d = ContextualData::new(pa, [pb1, 1.0 - pb1], t).unwrap();
        let s = state_of(&d);
        assert!(s.basis().orthonormal);
        let a = ObservableOperator::energy_like([0.0, 1.0], s.basis()).unwrap();
        let b = ObservableOperator::position_like([1.0, -1.0]);
        assert!(a.matrix().commutator(b.matrix()).frobenius() > 1e-6);
        assert!(a.eigen_residual() < 1e-10);
        let ea = expectation(&s, &a);
        assert!((ea - 0.6).abs() < 1e-10);
    }
}
