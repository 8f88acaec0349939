use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Phase rate `f(t)` (radians per unit time) from a closed family of
/// analytic forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rate {
    /// `f(t) = c`
    Constant(f64),
    /// `f(t) = k t`
    Linear(f64),
    /// `f(t) = A sin(Ω t + φ)`
    Sinusoid {
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
}

impl Rate {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Rate::Constant(c) => c,
            Rate::Linear(k) => k * t,
            Rate::Sinusoid {
                amplitude,
                omega,
                phase,
            } => amplitude * (omega * t + phase).sin(),
        }
    }

    /// `∫_from^to f(s) ds`, in closed form.
    pub fn integral(&self, from: f64, to: f64) -> f64 {
        match *self {
            Rate::Constant(c) => c * (to - from),
            Rate::Linear(k) => 0.5 * k * (to - from) * (to + from),
            Rate::Sinusoid {
                amplitude,
                omega,
                phase,
            } => {
                if omega == 0.0 {
                    amplitude * phase.sin() * (to - from)
                } else {
                    // cos u − cos v = −2 sin((u+v)/2) sin((u−v)/2)
                    let mid = omega * 0.5 * (to + from) + phase;
                    let half = omega * 0.5 * (to - from);
                    2.0 * amplitude / omega * mid.sin() * half.sin()
                }
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            Rate::Constant(_) => true,
            Rate::Linear(k) => k == 0.0,
            Rate::Sinusoid {
                amplitude, omega, ..
            } => amplitude == 0.0 || omega == 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        match *self {
            Rate::Constant(c) | Rate::Linear(c) => c.is_finite(),
            Rate::Sinusoid {
                amplitude,
                omega,
                phase,
            } => amplitude.is_finite() && omega.is_finite() && phase.is_finite(),
        }
    }
}

/// Piecewise-linear phase track `θ(t)` sampled on a time grid, typically
/// extracted from a prespace process. Constant outside the sampled range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseTrack {
    times: Vec<f64>,
    theta: Vec<f64>,
}

impl PhaseTrack {
    pub fn new(times: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != theta.len() {
            return Err(Error::InvalidInput(
                "phase track needs matching, non-empty time and phase samples".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "phase track times must increase".into(),
            ));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("phase track sample".into()));
        }
        Ok(Self { times, theta })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Index of the segment `[times[i], times[i+1]]` containing `t`.
    fn segment(&self, t: f64) -> Option<usize> {
        if self.times.len() < 2 || t < self.times[0] || t > *self.times.last()? {
            return None;
        }
        let i = self.times.partition_point(|&s| s <= t);
        Some(i.saturating_sub(1).min(self.times.len() - 2))
    }

    pub fn theta_at(&self, t: f64) -> f64 {
        match self.segment(t) {
            Some(i) => {
                let (t0, t1) = (self.times[i], self.times[i + 1]);
                let w = (t - t0) / (t1 - t0);
                self.theta[i] + w * (self.theta[i + 1] - self.theta[i])
            }
            None if t < self.times[0] => self.theta[0],
            None => *self.theta.last().expect("non-empty"),
        }
    }

    pub fn rate_at(&self, t: f64) -> f64 {
        match self.segment(t) {
            Some(i) => (self.theta[i + 1] - self.theta[i]) / (self.times[i + 1] - self.times[i]),
            None => 0.0,
        }
    }
}

type IncrementFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A phase increment `ξ(t, t₀)`.
#[derive(Clone)]
pub enum Increment {
    /// `ξ(t, t₀) = ∫_{t₀}^t f(s) ds`.
    Integrated(Rate),
    /// `ξ(t, t₀) = θ(t) − θ(t₀)` from a sampled phase track.
    Tabulated(PhaseTrack),
    /// Arbitrary two-time increment.
    Custom(IncrementFn),
}

impl fmt::Debug for Increment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Increment::Integrated(r) => f.debug_tuple("Integrated").field(r).finish(),
            Increment::Tabulated(p) => f.debug_tuple("Tabulated").field(&p.times.len()).finish(),
            Increment::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Increment {
    pub fn custom(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Increment::Custom(Arc::new(f))
    }

    pub fn eval(&self, t: f64, t0: f64) -> f64 {
        match self {
            Increment::Integrated(rate) => rate.integral(t0, t),
            Increment::Tabulated(track) => track.theta_at(t) - track.theta_at(t0),
            Increment::Custom(f) => f(t, t0),
        }
    }

    /// `f(t) = ∂ξ/∂t` when known without differentiation.
    pub fn rate(&self, t: f64) -> Option<f64> {
        match self {
            Increment::Integrated(rate) => Some(rate.eval(t)),
            Increment::Tabulated(track) => Some(track.rate_at(t)),
            Increment::Custom(_) => None,
        }
    }
}

/// Which argument of `f₁(·, t₀)` the perturbation shape is evaluated at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Clock {
    /// `f₁(s, t₀) = g(s)`: an additive split of a one-time rate.
    #[default]
    Absolute,
    /// `f₁(s, t₀) = g(s − t₀)`: time since preparation.
    Elapsed,
    /// `f₁(s, t₀) = g(t₀)`: frozen at the preparation time.
    Origin,
}

/// Perturbation term `ε f₁(s, t₀)` added to the phase rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub epsilon: f64,
    pub shape: Rate,
    #[serde(default)]
    pub clock: Clock,
}

impl Perturbation {
    /// `ε ∫_{t₀}^t f₁(s, t₀) ds`.
    pub fn increment(&self, t: f64, t0: f64) -> f64 {
        let integral = match self.clock {
            Clock::Absolute => self.shape.integral(t0, t),
            Clock::Elapsed => self.shape.integral(0.0, t - t0),
            Clock::Origin => self.shape.eval(t0) * (t - t0),
        };
        self.epsilon * integral
    }

    /// `ε f₁(s, t₀)`.
    pub fn rate(&self, s: f64, t0: f64) -> f64 {
        let v = match self.clock {
            Clock::Absolute => self.shape.eval(s),
            Clock::Elapsed => self.shape.eval(s - t0),
            Clock::Origin => self.shape.eval(t0),
        };
        self.epsilon * v
    }

    /// Whether `f₁` genuinely depends on the preparation time `t₀`.
    pub fn depends_on_origin(&self) -> bool {
        self.epsilon != 0.0 && self.clock != Clock::Absolute && !self.shape.is_constant()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LawKind {
    /// `ξ` depends on `(t, t₀)` beyond an integral of a one-time rate.
    #[serde(rename = "function-of-t-t0")]
    TwoTime,
    /// `ξ(t, t₀) = ∫_{t₀}^t f(s) ds`.
    #[serde(rename = "function-of-t")]
    OneTime,
    /// Constant rate: `ξ(t, t₀) = f · (t − t₀)`.
    #[serde(rename = "constant-rate")]
    ConstantRate,
}

/// Phase-increment law `ξ_C(t, t₀) = θ_C(t) − θ_C(t₀)`, optionally different
/// for each context, plus an optional perturbation.
#[derive(Clone, Debug)]
pub struct PhaseLaw {
    base: Option<Increment>,
    contexts: BTreeMap<String, Increment>,
    perturbation: Option<Perturbation>,
}

impl PhaseLaw {
    pub fn new(base: Increment) -> Self {
        Self {
            base: Some(base),
            contexts: BTreeMap::new(),
            perturbation: None,
        }
    }

    pub fn from_rate(rate: Rate) -> Self {
        Self::new(Increment::Integrated(rate))
    }

    /// `ξ ≡ 0`.
    pub fn zero() -> Self {
        Self::from_rate(Rate::Constant(0.0))
    }

    /// Constant generator: `f = −E/h`.
    pub fn schroedinger(energy: f64, h: f64) -> Self {
        Self::from_rate(Rate::Constant(-energy / h))
    }

    /// Linearly growing generator: `f(t) = −E t / h`.
    pub fn linear_ramp(energy: f64, h: f64) -> Self {
        Self::from_rate(Rate::Linear(-energy / h))
    }

    pub fn from_fn(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(Increment::custom(f))
    }

    /// A law with no shared increment; every evaluation needs a context label.
    pub fn per_context(contexts: impl IntoIterator<Item = (String, Increment)>) -> Self {
        Self {
            base: None,
            contexts: contexts.into_iter().collect(),
            perturbation: None,
        }
    }

    pub fn with_context(mut self, label: impl Into<String>, increment: Increment) -> Self {
        self.contexts.insert(label.into(), increment);
        self
    }

    pub fn with_perturbation(mut self, perturbation: Perturbation) -> Self {
        self.perturbation = Some(perturbation);
        self
    }

    /// The same law with the perturbation term dropped.
    pub fn unperturbed(&self) -> Self {
        Self {
            perturbation: None,
            ..self.clone()
        }
    }

    pub fn perturbation(&self) -> Option<&Perturbation> {
        self.perturbation.as_ref()
    }

    pub fn is_context_dependent(&self) -> bool {
        !self.contexts.is_empty()
    }

    pub fn context_labels(&self) -> impl Iterator<Item = &str> {
        self.contexts.keys().map(String::as_str)
    }

    /// Every distinct increment branch: each context, plus the shared one.
    pub fn branches(&self) -> Vec<Option<&str>> {
        let mut out: Vec<Option<&str>> = self.context_labels().map(Some).collect();
        if self.base.is_some() {
            out.push(None);
        }
        out
    }

    fn select(&self, context: Option<&str>) -> Result<&Increment> {
        match context {
            Some(label) => self
                .contexts
                .get(label)
                .or(self.base.as_ref())
                .ok_or_else(|| Error::UnknownContext(label.to_string())),
            None if self.is_context_dependent() && self.base.is_none() => {
                Err(Error::MissingContext)
            }
            None => self.base.as_ref().ok_or(Error::MissingContext),
        }
    }

    /// `ξ_C(t, t₀)`.
    pub fn increment(&self, t: f64, t0: f64, context: Option<&str>) -> Result<f64> {
        let xi = self.select(context)?.eval(t, t0)
            + self
                .perturbation
                .as_ref()
                .map_or(0.0, |p| p.increment(t, t0));
        if !xi.is_finite() {
            return Err(Error::NonFinite(format!("ξ({t}, {t0})")));
        }
        Ok(xi)
    }

    /// Analytic phase rate `f(t, t₀)` when available.
    pub fn rate(&self, t: f64, t0: f64, context: Option<&str>) -> Result<Option<f64>> {
        let base = self.select(context)?.rate(t);
        Ok(base.map(|f| f + self.perturbation.as_ref().map_or(0.0, |p| p.rate(t, t0))))
    }

    pub fn kind(&self) -> LawKind {
        let increments = self.base.iter().chain(self.contexts.values());
        let mut constant = true;
        for inc in increments {
            match inc {
                Increment::Custom(_) => return LawKind::TwoTime,
                Increment::Integrated(r) => constant &= r.is_constant(),
                Increment::Tabulated(_) => constant = false,
            }
        }
        match &self.perturbation {
            Some(p) if p.depends_on_origin() => LawKind::TwoTime,
            Some(p) if p.epsilon != 0.0 && !p.shape.is_constant() => LawKind::OneTime,
            _ if constant => LawKind::ConstantRate,
            _ => LawKind::OneTime,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_integrals() {
        assert!((Rate::Constant(-2.0).integral(1.0, 4.0) + 6.0).abs() < 1e-15);
        assert!((Rate::Linear(-2.0).integral(0.0, 1.0) + 1.0).abs() < 1e-15);
        let s = Rate::Sinusoid {
            amplitude: 1.5,
            omega: 2.0,
            phase: 0.3,
        };
        let exact = -1.5 / 2.0 * ((2.0 * 1.7f64 + 0.3).cos() - (2.0 * 0.2f64 + 0.3).cos());
        assert!((s.integral(0.2, 1.7) - exact).abs() < 1e-14);
    }

    #[test]
    fn increment_vanishes_on_diagonal() {
        let laws = [
            PhaseLaw::schroedinger(1.0, 1.0),
            PhaseLaw::linear_ramp(2.0, 1.0),
            PhaseLaw::from_rate(Rate::Sinusoid {
                amplitude: 1.0,
                omega: 3.0,
                phase: 0.1,
            })
            .with_perturbation(Perturbation {
                epsilon: 0.2,
                shape: Rate::Linear(1.0),
                clock: Clock::Origin,
            }),
        ];
        for law in &laws {
            for t0 in [-1.0, 0.0, 0.7, 5.0] {
                assert!(law.increment(t0, t0, None).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn context_selection() {
        let law = PhaseLaw::per_context([
            ("C1".to_string(), Increment::Integrated(Rate::Constant(1.0))),
            ("C2".to_string(), Increment::Integrated(Rate::Constant(2.0))),
        ]);
        assert_eq!(law.increment(1.0, 0.0, None), Err(Error::MissingContext));
        assert_eq!(law.increment(1.0, 0.0, Some("C2")).unwrap(), 2.0);
        assert!(matches!(
            law.increment(1.0, 0.0, Some("C3")),
            Err(Error::UnknownContext(_))
        ));
        let law = PhaseLaw::zero().with_context("C1", Increment::Integrated(Rate::Constant(1.0)));
        assert_eq!(law.increment(1.0, 0.0, Some("C3")).unwrap(), 0.0);
        assert_eq!(law.branches(), vec![Some("C1"), None]);
    }

    #[test]
    fn kinds() {
        assert_eq!(
            PhaseLaw::schroedinger(1.0, 1.0).kind(),
            LawKind::ConstantRate
        );
        assert_eq!(PhaseLaw::linear_ramp(1.0, 1.0).kind(), LawKind::OneTime);
        assert_eq!(
            PhaseLaw::from_fn(|t, t0| (t - t0).powi(2)).kind(),
            LawKind::TwoTime
        );
        let p = Perturbation {
            epsilon: 0.1,
            shape: Rate::Linear(1.0),
            clock: Clock::Elapsed,
        };
        assert_eq!(
            PhaseLaw::schroedinger(1.0, 1.0).with_perturbation(p).kind(),
            LawKind::TwoTime
        );
    }

    #[test]
    fn phase_track_interpolates() {
        let track = PhaseTrack::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(track.theta_at(0.5), 0.5);
        assert_eq!(track.theta_at(1.5), 2.0);
        assert_eq!(track.theta_at(9.0), 3.0);
        assert_eq!(track.rate_at(1.5), 2.0);
        let inc = Increment::Tabulated(track);
        assert_eq!(inc.eval(2.0, 0.5), 2.5);
    }
}
