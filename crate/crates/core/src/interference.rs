//! Coefficients of statistical disturbance, probabilistic phases and the
//! interference formula of total probability for a pair of dichotomous
//! reference variables.
//!
//! For a context `C` with `p_C^a(y)`, `p_C^b(x)` and the context-free
//! transition probabilities `p(x/y)`, the coefficient
//!
//! ```text
//! λ(x) = [p_C^b(x) − Σ_y p_C^a(y) p(x/y)] / [2 √(Π_y p_C^a(y) p(x/y))]
//! ```
//!
//! turns the classical formula of total probability into an identity:
//! `p_C^b(x) = Σ_y p_C^a(y) p(x/y) + 2 λ(x) √(Π_y p_C^a(y) p(x/y))`.
//! Contexts with both `|λ| ≤ 1` admit phases `θ = arccos λ`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

/// Context-conditional probabilities of the reference variables together with
/// the transition matrix `transition[i][j] = p(b_j / a_i)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContextualData {
    p_a: [f64; 2],
    p_b: [f64; 2],
    transition: [[f64; 2]; 2],
}

fn check_distribution(name: &str, p: &[f64; 2]) -> Result<()> {
    for (i, &v) in p.iter().enumerate() {
        if !v.is_finite() || !(-tolerance::PROBABILITY..=1.0 + tolerance::PROBABILITY).contains(&v)
        {
            return Err(Error::InvalidInput(format!(
                "{name}[{i}] = {v} is not a probability"
            )));
        }
    }
    let sum = p[0] + p[1];
    if (sum - 1.0).abs() > tolerance::PROBABILITY {
        return Err(Error::InvalidInput(format!(
            "{name} sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

impl ContextualData {
    pub fn new(p_a: [f64; 2], p_b: [f64; 2], transition: [[f64; 2]; 2]) -> Result<Self> {
        check_distribution("p_a", &p_a)?;
        check_distribution("p_b", &p_b)?;
        check_distribution("transition row 0", &transition[0])?;
        check_distribution("transition row 1", &transition[1])?;
        Ok(Self {
            p_a,
            p_b,
            transition,
        })
    }

    /// `p_C^a(a₁), p_C^a(a₂)`.
    pub fn p_a(&self) -> [f64; 2] {
        self.p_a
    }

    /// `p_C^b(b₁), p_C^b(b₂)`.
    pub fn p_b(&self) -> [f64; 2] {
        self.p_b
    }

    pub fn transition(&self) -> [[f64; 2]; 2] {
        self.transition
    }

    /// `u_j^a = √p_C^a(a_j)`.
    pub fn u_a(&self) -> [f64; 2] {
        [self.p_a[0].max(0.0).sqrt(), self.p_a[1].max(0.0).sqrt()]
    }

    /// `u_ij = √p(b_j/a_i)`.
    pub fn u_transition(&self) -> [[f64; 2]; 2] {
        let t = &self.transition;
        [
            [t[0][0].max(0.0).sqrt(), t[0][1].max(0.0).sqrt()],
            [t[1][0].max(0.0).sqrt(), t[1][1].max(0.0).sqrt()],
        ]
    }

    /// The same context with a different b-distribution; used by evolution,
    /// which changes `p_C^b` while conserving `p_C^a` and the transitions.
    pub fn with_p_b(&self, p_b: [f64; 2]) -> Result<Self> {
        Self::new(self.p_a, p_b, self.transition)
    }

    /// Classical total-probability prediction `Σ_y p_C^a(y) p(x/y)`.
    pub fn classical_prediction(&self, x: usize) -> f64 {
        self.p_a[0] * self.transition[0][x] + self.p_a[1] * self.transition[1][x]
    }

    /// `Π_y p_C^a(y) p(x/y)`, the quantity under the square root of the
    /// interference term.
    fn cell_product(&self, x: usize) -> f64 {
        self.p_a[0] * self.transition[0][x] * self.p_a[1] * self.transition[1][x]
    }
}

fn check_index(x: usize) -> Result<()> {
    if x > 1 {
        return Err(Error::InvalidInput(format!(
            "value index {x} out of range for a dichotomous variable"
        )));
    }
    Ok(())
}

/// Coefficient of statistical disturbance `λ(b = b_x / a, C)`.
pub fn lambda_coefficient(data: &ContextualData, x: usize) -> Result<f64> {
    check_index(x)?;
    let terms = [
        data.p_a[0] * data.transition[0][x],
        data.p_a[1] * data.transition[1][x],
    ];
    if terms.iter().any(|&t| t <= 0.0) {
        return Err(Error::LambdaUndefined(x));
    }
    let numerator = data.p_b[x] - (terms[0] + terms[1]);
    let denominator = 2.0 * (terms[0] * terms[1]).sqrt();
    Ok(numerator / denominator)
}

/// Right-hand side of the interference formula of total probability for a
/// given coefficient `lambda`. With `lambda = 0` it is the classical formula.
pub fn interference_total_probability(data: &ContextualData, lambda: f64, x: usize) -> f64 {
    data.classical_prediction(x) + 2.0 * lambda * data.cell_product(x).max(0.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContextClass {
    /// Both `|λ| < 1` (away from the boundary).
    Trigonometric,
    /// Both `|λ| > 1`.
    Hyperbolic,
    /// One coefficient on each side of 1.
    Mixed,
    /// No coefficient exceeds 1 but at least one is within
    /// [`tolerance::BOUNDARY`] of `±1`; phases degenerate to `{0, π}`.
    DegenerateBoundary,
}

impl ContextClass {
    /// Whether a complex amplitude can be built (trigonometric or boundary).
    pub fn is_representable(self) -> bool {
        matches!(
            self,
            ContextClass::Trigonometric | ContextClass::DegenerateBoundary
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ContextClass::Trigonometric => "trigonometric",
            ContextClass::Hyperbolic => "hyperbolic",
            ContextClass::Mixed => "mixed",
            ContextClass::DegenerateBoundary => "degenerate-boundary",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InterferenceReport {
    pub lambda: [f64; 2],
    /// Principal-branch phases `arccos λ ∈ [0, π]`, present when representable.
    pub phases: Option<[f64; 2]>,
    pub classification: ContextClass,
}

impl InterferenceReport {
    pub fn is_representable(&self) -> bool {
        self.classification.is_representable()
    }

    pub fn satisfies_phase_constraint(&self) -> bool {
        self.phases.is_some_and(|p| phase_constraint_check(&p))
    }
}

/// Classify a context by its two coefficients of statistical disturbance.
pub fn classify_context(data: &ContextualData) -> Result<InterferenceReport> {
    let lambda = [lambda_coefficient(data, 0)?, lambda_coefficient(data, 1)?];
    let beyond = |l: f64| l.abs() > 1.0 + tolerance::BOUNDARY;
    let near_one = |l: f64| (l.abs() - 1.0).abs() <= tolerance::BOUNDARY;

    let classification = match (beyond(lambda[0]), beyond(lambda[1])) {
        (true, true) => ContextClass::Hyperbolic,
        (true, false) | (false, true) => ContextClass::Mixed,
        (false, false) if lambda.iter().any(|&l| near_one(l)) => ContextClass::DegenerateBoundary,
        (false, false) => ContextClass::Trigonometric,
    };

    let phases = classification
        .is_representable()
        .then(|| lambda.map(|l| l.clamp(-1.0, 1.0).acos()));

    Ok(InterferenceReport {
        lambda,
        phases,
        classification,
    })
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `θ₂ − θ₁ = π (mod 2π)` within [`tolerance::PHASE_CONSTRAINT`].
pub fn phase_constraint_check(phases: &[f64; 2]) -> bool {
    (wrap_angle(phases[1] - phases[0]) - PI).abs() <= tolerance::PHASE_CONSTRAINT
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn symmetric(pb1: f64) -> ContextualData {
        ContextualData::new([0.5, 0.5], [pb1, 1.0 - pb1], [[0.5, 0.5], [0.5, 0.5]]).unwrap()
    }

    #[test]
    fn lambda_vanishes_for_classical_data() {
        assert_eq!(lambda_coefficient(&symmetric(0.5), 0).unwrap(), 0.0);
    }

    #[test]
    fn lambda_extreme_constructive() {
        // numerator 1 − 1/2 = 1/2, denominator 2·√(1/16) = 1/2
        let d = symmetric(1.0);
        assert!((lambda_coefficient(&d, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambda_coefficient(&d, 1).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_rejects_degenerate_cell() {
        let d = ContextualData::new([1.0, 0.0], [0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]]).unwrap();
        assert_eq!(lambda_coefficient(&d, 0), Err(Error::LambdaUndefined(0)));
        let d = ContextualData::new([0.5, 0.5], [0.5, 0.5], [[1.0, 0.0], [0.5, 0.5]]).unwrap();
        assert_eq!(lambda_coefficient(&d, 1), Err(Error::LambdaUndefined(1)));
        assert!(lambda_coefficient(&d, 0).is_ok());
    }

    #[test]
    fn invalid_tables_rejected() {
        assert!(ContextualData::new([0.5, 0.6], [0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]]).is_err());
        assert!(ContextualData::new([0.5, 0.5], [0.5, 0.5], [[0.5, 0.5], [0.7, 0.5]]).is_err());
        assert!(ContextualData::new([1.5, -0.5], [0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]]).is_err());
        assert!(
            ContextualData::new([f64::NAN, 0.5], [0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]]).is_err()
        );
    }

    #[test]
    fn zero_lambda_reduces_to_classical_formula() {
        let d = ContextualData::new([0.3, 0.7], [0.45, 0.55], [[0.2, 0.8], [0.6, 0.4]]).unwrap();
        for x in 0..2 {
            assert_eq!(
                interference_total_probability(&d, 0.0, x),
                d.classical_prediction(x)
            );
        }
    }

    #[test]
    fn symmetric_cosine_sweep() {
        // 1/4 + 1/4 + 2 cos θ · √(1/16) = 1/2 + cos θ / 2
        let d = symmetric(0.5);
        for k in 0..=16 {
            let theta = k as f64 * PI / 8.0;
            let got = interference_total_probability(&d, theta.cos(), 0);
            assert!((got - (0.5 + theta.cos() / 2.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn reconstruction_identity_on_fixed_instance() {
        let d = ContextualData::new([0.3, 0.7], [0.45, 0.55], [[0.2, 0.8], [0.6, 0.4]]).unwrap();
        for x in 0..2 {
            let l = lambda_coefficient(&d, x).unwrap();
            assert!((interference_total_probability(&d, l, x) - d.p_b()[x]).abs() < 1e-12);
        }
    }

    #[test]
    fn classify_zero_lambda() {
        let r = classify_context(&symmetric(0.5)).unwrap();
        assert_eq!(r.classification, ContextClass::Trigonometric);
        let p = r.phases.unwrap();
        assert!((p[0] - FRAC_PI_2).abs() < 1e-15 && (p[1] - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn classify_boundary() {
        let r = classify_context(&symmetric(1.0)).unwrap();
        assert_eq!(r.classification, ContextClass::DegenerateBoundary);
        let p = r.phases.unwrap();
        assert!(p[0].abs() < 1e-7 && (p[1] - PI).abs() < 1e-7);
    }

    #[test]
    fn classify_hyperbolic_or_mixed() {
        // p_a = (1/2,1/2), rows (0.1,0.9),(0.1,0.9): classical b₁ mass 0.1,
        // denominator 2·√(0.05·0.05) = 0.1; λ(b₁) = 1.2 needs p_b(b₁) = 0.22.
        let d = ContextualData::new([0.5, 0.5], [0.22, 0.78], [[0.1, 0.9], [0.1, 0.9]]).unwrap();
        let r = classify_context(&d).unwrap();
        assert!((r.lambda[0] - 1.2).abs() < 1e-12);
        assert!(matches!(
            r.classification,
            ContextClass::Hyperbolic | ContextClass::Mixed
        ));
        assert!(r.phases.is_none());
    }

    #[test]
    fn phase_constraint_examples() {
        assert!(phase_constraint_check(&[0.0, PI]));
        assert!(phase_constraint_check(&[1.5 * PI, 0.5 * PI]));
        assert!(!phase_constraint_check(&[FRAC_PI_2, FRAC_PI_2]));
    }

    #[test]
    fn phases_reproduce_lambda() {
        let d = ContextualData::new([0.3, 0.7], [0.45, 0.55], [[0.2, 0.8], [0.6, 0.4]]).unwrap();
        let r = classify_context(&d).unwrap();
        let p = r.phases.unwrap();
        for x in 0..2 {
            assert!((0.0..=PI).contains(&p[x]));
            assert!((p[x].cos() - r.lambda[x]).abs() < 1e-12);
        }
    }
}
