use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Increment, Perturbation, PhaseLaw, Rate};
use crate::interference::ContextualData;
use crate::prespace::{Context, DichotomousVariable, Event, ProbabilitySpace};

/// Largest number of grid steps a scenario may request.
pub const MAX_GRID_STEPS: f64 = 1e7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Represent,
    Classify,
    Evolve,
    Prespace,
    Ode,
}

impl Kind {
    pub const ALL: [(&'static str, Kind); 5] = [
        ("represent", Kind::Represent),
        ("classify", Kind::Classify),
        ("evolve", Kind::Evolve),
        ("prespace", Kind::Prespace),
        ("ode", Kind::Ode),
    ];

    pub fn parse(s: &str) -> Result<Kind, String> {
        Self::ALL
            .iter()
            .find(|(name, _)| *name == s)
            .map(|(_, k)| *k)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|(n, _)| *n).collect();
                format!(
                    "kind: unknown scenario kind `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// Scenario file contents.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: String,
    pub seed: Option<u64>,
    pub h: Option<f64>,
    pub grid: Option<GridSpec>,
    pub contextual_data: Option<ContextualDataSpec>,
    pub prespace: Option<PrespaceSpec>,
    pub phase_law: Option<PhaseLawSpec>,
    pub ode: Option<OdeSpec>,
    /// Law branch driving an evolve run.
    pub context: Option<String>,
    #[serde(default)]
    pub outputs: OutputsSpec,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), String> {
        if ![self.t0, self.t1, self.dt].iter().all(|v| v.is_finite()) {
            return Err("grid: t0, t1 and dt must be finite".into());
        }
        if self.t1 <= self.t0 {
            return Err(format!(
                "grid: t1 = {} must exceed t0 = {}",
                self.t1, self.t0
            ));
        }
        if self.dt <= 0.0 {
            return Err(format!("grid: dt = {} must be positive", self.dt));
        }
        if (self.t1 - self.t0) / self.dt > MAX_GRID_STEPS {
            return Err(format!(
                "grid: more than {MAX_GRID_STEPS:e} steps requested"
            ));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        crate::dynamics::uniform_grid(self.t0, self.t1, self.dt)
    }
}

/// Same field names as the serialized [`ContextualData`], so a table copied
/// out of a report can be fed back in.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextualDataSpec {
    pub p_a: [f64; 2],
    pub p_b: [f64; 2],
    pub transition: [[f64; 2]; 2],
}

impl ContextualDataSpec {
    pub fn build(&self) -> crate::Result<ContextualData> {
        ContextualData::new(self.p_a, self.p_b, self.transition)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextSpec {
    pub label: String,
    /// Atom indices.
    pub atoms: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrespaceSpec {
    pub weights: Vec<f64>,
    pub atoms: Option<Vec<String>>,
    pub a: Vec<u8>,
    pub b: Vec<u8>,
    pub a_values: Option<[f64; 2]>,
    pub b_values: Option<[f64; 2]>,
    #[serde(default)]
    pub contexts: Vec<ContextSpec>,
    pub steps: Option<usize>,
    pub energy: Option<f64>,
    /// Draws per time step for the Monte Carlo precondition check.
    pub samples: Option<usize>,
    /// Check conservation of a-probabilities over every subset of atoms.
    #[serde(default)]
    pub exhaustive: bool,
}

/// A prespace model assembled from its specification.
#[derive(Clone, Debug)]
pub struct PrespaceModel {
    pub space: ProbabilitySpace,
    pub a: DichotomousVariable,
    pub b: DichotomousVariable,
    pub contexts: Vec<Context>,
}

impl PrespaceSpec {
    pub fn build(&self) -> crate::Result<PrespaceModel> {
        let space = match &self.atoms {
            Some(names) => ProbabilitySpace::new(names.clone(), self.weights.clone())?,
            None => ProbabilitySpace::with_weights(self.weights.clone())?,
        };
        let a =
            DichotomousVariable::new("a", self.a_values.unwrap_or([1.0, -1.0]), self.a.clone())?;
        let b =
            DichotomousVariable::new("b", self.b_values.unwrap_or([1.0, -1.0]), self.b.clone())?;
        let contexts = if self.contexts.is_empty() {
            vec![Context::full(&space)]
        } else {
            self.contexts
                .iter()
                .map(|c| {
                    if let Some(&bad) = c.atoms.iter().find(|&&i| i >= space.len()) {
                        return Err(crate::Error::InvalidInput(format!(
                            "prespace.contexts `{}`: atom index {bad} out of range",
                            c.label
                        )));
                    }
                    Context::new(
                        &space,
                        c.label.clone(),
                        Event::from_indices(space.len(), c.atoms.clone()),
                    )
                })
                .collect::<crate::Result<Vec<_>>>()?
        };
        Ok(PrespaceModel {
            space,
            a,
            b,
            contexts,
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseLawSpec {
    /// `schroedinger` (f = −E/h), `ramp` (f = −E t/h) or `rate`.
    pub kind: Option<String>,
    pub energy: Option<f64>,
    pub rate: Option<Rate>,
    #[serde(default)]
    pub contexts: BTreeMap<String, Rate>,
    pub perturbation: Option<Perturbation>,
}

impl PhaseLawSpec {
    pub fn build(&self, h: f64) -> Result<PhaseLaw, String> {
        let need_energy = |what: &str| {
            self.energy
                .filter(|e| e.is_finite())
                .ok_or_else(|| format!("phase_law: kind `{what}` needs a finite `energy`"))
        };
        let base = match (self.kind.as_deref(), &self.rate) {
            (Some("schroedinger"), _) => {
                Some(PhaseLaw::schroedinger(need_energy("schroedinger")?, h))
            }
            (Some("ramp"), _) => Some(PhaseLaw::linear_ramp(need_energy("ramp")?, h)),
            (Some("rate") | None, Some(rate)) => Some(PhaseLaw::from_rate(rate.clone())),
            (Some("rate"), None) => return Err("phase_law: kind `rate` needs `rate`".into()),
            (None, None) if !self.contexts.is_empty() => None,
            (None, None) => {
                return Err("phase_law: give `kind`, `rate` or per-context rates".into())
            }
            (Some(other), _) => {
                return Err(format!(
                "phase_law.kind: unknown law kind `{other}` (expected schroedinger, ramp or rate)"
            ))
            }
        };
        let rates = self.rate.iter().chain(self.contexts.values());
        if let Some(bad) = rates.clone().find(|r| !r.is_finite()) {
            return Err(format!("phase_law: non-finite rate {bad:?}"));
        }
        let branches = self
            .contexts
            .iter()
            .map(|(k, r)| (k.clone(), Increment::Integrated(r.clone())));
        let mut law = match base {
            Some(law) => branches.fold(law, |law, (k, inc)| law.with_context(k, inc)),
            None => PhaseLaw::per_context(branches),
        };
        if let Some(p) = &self.perturbation {
            if !(p.epsilon.is_finite() && p.shape.is_finite()) {
                return Err("phase_law.perturbation: non-finite parameters".into());
            }
            law = law.with_perturbation(p.clone());
        }
        Ok(law)
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSpec {
    pub theta0: Option<f64>,
    /// Initial branch of `λ′ = ±f√(1 − λ²)`; derived from `θ₀` when absent.
    pub sign: Option<f64>,
    pub step: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSpec {
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_kind_names_field() {
        let e = Kind::parse("simulate").unwrap_err();
        assert!(e.starts_with("kind:"));
        assert_eq!(Kind::parse("ode").unwrap(), Kind::Ode);
    }

    #[test]
    fn grid_limits() {
        assert!(GridSpec {
            t0: 0.0,
            t1: 1.0,
            dt: 0.1
        }
        .validate()
        .is_ok());
        assert!(GridSpec {
            t0: 1.0,
            t1: 1.0,
            dt: 0.1
        }
        .validate()
        .is_err());
        assert!(GridSpec {
            t0: 0.0,
            t1: 1.0,
            dt: 0.0
        }
        .validate()
        .is_err());
        assert!(GridSpec {
            t0: 0.0,
            t1: 1.0,
            dt: 1e-8
        }
        .validate()
        .is_err());
    }

    #[test]
    fn law_specs() {
        let spec: PhaseLawSpec = toml::from_str("kind = \"schroedinger\"\nenergy = 2.0").unwrap();
        let law = spec.build(1.0).unwrap();
        assert_eq!(law.increment(1.0, 0.0, None).unwrap(), -2.0);

        let spec: PhaseLawSpec =
            toml::from_str("[contexts]\nC1 = { constant = 1.0 }\nC2 = { linear = 2.0 }\n").unwrap();
        let law = spec.build(1.0).unwrap();
        assert!(law.increment(1.0, 0.0, None).is_err());
        assert_eq!(law.increment(1.0, 0.0, Some("C2")).unwrap(), 1.0);

        let spec: PhaseLawSpec = toml::from_str(
            "rate = { sinusoid = { amplitude = 1.0, omega = 2.0, phase = 0.0 } }\n\
             [perturbation]\nepsilon = 0.1\nshape = { linear = 1.0 }\nclock = \"origin\"\n",
        )
        .unwrap();
        assert!(spec.build(1.0).unwrap().perturbation().is_some());

        let spec: PhaseLawSpec = toml::from_str("kind = \"ramp\"").unwrap();
        assert!(spec.build(1.0).unwrap_err().contains("energy"));
    }
}
