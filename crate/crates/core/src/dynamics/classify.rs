use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use super::law::{LawKind, PhaseLaw};
use crate::error::Result;
use crate::linalg::{self, Vec2, C64};
use crate::tolerance;

/// Upper bound on the number of grid points used for pair and triple checks;
/// longer grids are thinned evenly, keeping both endpoints.
pub const CHECK_POINTS: usize = 48;

/// Evenly spaced grid `t0, t0 + dt, …` up to and including `t1` (within
/// half a step).
pub fn uniform_grid(t0: f64, t1: f64, dt: f64) -> Vec<f64> {
    let n = ((t1 - t0) / dt + 0.5).floor() as usize;
    (0..=n).map(|k| t0 + k as f64 * dt).collect()
}

/// At most [`CHECK_POINTS`] evenly chosen points of `grid`.
pub fn thin(grid: &[f64]) -> Vec<f64> {
    if grid.len() <= CHECK_POINTS {
        return grid.to_vec();
    }
    let last = grid.len() - 1;
    (0..CHECK_POINTS)
        .map(|k| grid[k * last / (CHECK_POINTS - 1)])
        .collect()
}

/// Constructive evidence that context-dependent dynamics is not linear.
///
/// `φ₁` is prepared in context `first` and `φ₂` in `second`. Whichever of the
/// two laws drives the superposition `αφ₁ + βφ₂`, its image differs from
/// `αU₁φ₁ + βU₂φ₂` by at least `violation`. Vectors are a-coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuperpositionWitness {
    pub first: String,
    pub second: String,
    pub t0: f64,
    pub t: f64,
    pub alpha: C64,
    pub beta: C64,
    pub phi1: Vec2,
    pub phi2: Vec2,
    pub superposition_image: [Vec2; 2],
    pub combined_images: Vec2,
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearityReport {
    pub linear: bool,
    pub max_gap: f64,
    pub witness: Option<SuperpositionWitness>,
}

fn real_vec(angle: f64) -> Vec2 {
    [C64::new(angle.cos(), 0.0), C64::new(angle.sin(), 0.0)]
}

fn witness(first: &str, second: &str, t0: f64, t: f64, xi: [f64; 2]) -> SuperpositionWitness {
    let alpha = C64::new(FRAC_1_SQRT_2, 0.0);
    let beta = alpha;
    let phi1 = real_vec(std::f64::consts::FRAC_PI_6);
    let phi2 = real_vec(std::f64::consts::FRAC_PI_3);
    let apply = |xi: f64, v: &Vec2| [v[0], C64::from_polar(1.0, xi) * v[1]];

    let psi = linalg::vec_add(&linalg::scale(alpha, &phi1), &linalg::scale(beta, &phi2));
    let combined = linalg::vec_add(
        &linalg::scale(alpha, &apply(xi[0], &phi1)),
        &linalg::scale(beta, &apply(xi[1], &phi2)),
    );
    let superposition_image = [apply(xi[0], &psi), apply(xi[1], &psi)];
    let violation = superposition_image
        .iter()
        .map(|img| linalg::vec_distance(img, &combined))
        .fold(f64::INFINITY, f64::min);
    SuperpositionWitness {
        first: first.to_string(),
        second: second.to_string(),
        t0,
        t,
        alpha,
        beta,
        phi1,
        phi2,
        superposition_image,
        combined_images: combined,
        violation,
    }
}

/// Context independence (CI): `ξ_C(t, t₀)` is the same for every listed context.
///
/// An empty `contexts` list checks every branch the law defines.
pub fn classify_linearity(
    law: &PhaseLaw,
    contexts: &[&str],
    grid: &[f64],
) -> Result<LinearityReport> {
    let labels: Vec<Option<&str>> = if contexts.is_empty() {
        law.branches()
    } else {
        contexts.iter().copied().map(Some).collect()
    };
    let points = thin(grid);
    let mut max_gap = 0.0f64;
    // Largest operator difference |e^{iξ₁} − e^{iξ₂}| and where it occurs.
    let mut best: Option<(f64, usize, usize, f64, f64, [f64; 2])> = None;

    for (i, c1) in labels.iter().enumerate() {
        for (j, c2) in labels.iter().enumerate().skip(i + 1) {
            for (k, &t0) in points.iter().enumerate() {
                for &t in &points[k + 1..] {
                    let x1 = law.increment(t, t0, *c1)?;
                    let x2 = law.increment(t, t0, *c2)?;
                    max_gap = max_gap.max((x1 - x2).abs());
                    let op_gap = 2.0 * (0.5 * (x1 - x2)).sin().abs();
                    if best.as_ref().is_none_or(|b| op_gap > b.0) {
                        best = Some((op_gap, i, j, t0, t, [x1, x2]));
                    }
                }
            }
        }
    }

    let linear = max_gap <= tolerance::LAW;
    let witness = match best {
        Some((_, i, j, t0, t, xi)) if !linear => {
            let name = |c: Option<&str>| c.unwrap_or("*").to_string();
            Some(witness(&name(labels[i]), &name(labels[j]), t0, t, xi))
        }
        _ => None,
    };
    Ok(LinearityReport {
        linear,
        max_gap,
        witness,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawCheck {
    pub holds: bool,
    pub max_defect: f64,
}

impl LawCheck {
    fn from_defect(max_defect: f64) -> Self {
        Self {
            holds: max_defect <= tolerance::LAW,
            max_defect,
        }
    }
}

/// Determinism: the cocycle `ξ(t, t₀) = ξ(t, t₁) + ξ(t₁, t₀)` over grid
/// triples `t₀ ≤ t₁ ≤ t`.
pub fn classify_determinism(
    law: &PhaseLaw,
    grid: &[f64],
    context: Option<&str>,
) -> Result<LawCheck> {
    let p = thin(grid);
    let n = p.len();
    let mut xi = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            xi[i * n + j] = law.increment(p[j], p[i], context)?;
        }
    }
    let mut defect = 0.0f64;
    for i in 0..n {
        for k in i..n {
            for j in k..n {
                defect = defect.max((xi[i * n + j] - xi[k * n + j] - xi[i * n + k]).abs());
            }
        }
    }
    Ok(LawCheck::from_defect(defect))
}

/// Time-shift invariance: `ξ(t + δ, t₀ + δ) = ξ(t, t₀)` for shifts `δ` drawn from
/// grid offsets.
pub fn classify_time_shift_invariance(
    law: &PhaseLaw,
    grid: &[f64],
    context: Option<&str>,
) -> Result<LawCheck> {
    let p = thin(grid);
    let shifts: Vec<f64> = p.iter().map(|t| t - p[0]).skip(1).collect();
    let mut defect = 0.0f64;
    for (k, &t0) in p.iter().enumerate() {
        for &t in &p[k + 1..] {
            let base = law.increment(t, t0, context)?;
            for &d in &shifts {
                defect = defect.max((law.increment(t + d, t0 + d, context)? - base).abs());
            }
        }
    }
    Ok(LawCheck::from_defect(defect))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub continuous: bool,
    /// Lipschitz estimates `max |Δξ| / Δ`, one per refinement level.
    pub lipschitz: Vec<f64>,
}

/// Continuity, operationally: on refining grids the difference quotient
/// `max |ξ(t+Δ, t₀) − ξ(t, t₀)| / Δ` stays bounded. A jump makes it double
/// with each halving of `Δ`.
pub fn classify_continuity(
    law: &PhaseLaw,
    grid: &[f64],
    context: Option<&str>,
) -> Result<ContinuityReport> {
    const LEVELS: u32 = 5;
    const BASE_CELLS: usize = 64;
    const GROWTH: f64 = 1.5;
    let (Some(&start), Some(&end)) = (grid.first(), grid.last()) else {
        return Ok(ContinuityReport {
            continuous: true,
            lipschitz: Vec::new(),
        });
    };
    if end <= start {
        return Ok(ContinuityReport {
            continuous: true,
            lipschitz: Vec::new(),
        });
    }
    let origins = [start, 0.5 * (start + end)];
    let mut lipschitz = Vec::with_capacity(LEVELS as usize);
    for level in 0..LEVELS {
        let cells = BASE_CELLS << level;
        let dt = (end - start) / cells as f64;
        let mut k = 0.0f64;
        for &t0 in &origins {
            let mut prev = law.increment(start, t0, context)?;
            for c in 1..=cells {
                let next = law.increment(start + c as f64 * dt, t0, context)?;
                k = k.max((next - prev).abs() / dt);
                prev = next;
            }
        }
        lipschitz.push(k);
    }
    let finite = lipschitz.iter().all(|k| k.is_finite());
    let settled = lipschitz
        .windows(2)
        .last()
        .is_none_or(|w| w[1] <= GROWTH * w[0] + tolerance::STRUCTURAL);
    Ok(ContinuityReport {
        continuous: finite && settled,
        lipschitz,
    })
}

/// Which dynamical properties a phase law has. The three precondition flags
/// come from a prespace process and are absent for purely analytic laws.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DynamicsClassification {
    pub law_kind: LawKind,
    pub trig_preserved: Option<bool>,
    pub a_prob_conserved: Option<bool>,
    pub transition_conserved: Option<bool>,
    pub linear: bool,
    pub deterministic: bool,
    pub continuous: bool,
    pub time_shift_invariant: bool,
    pub schroedinger: bool,
    pub extracted_energy: Option<f64>,
    pub time_dependent_generator: bool,
    pub cocycle_defect: f64,
    pub time_shift_defect: f64,
    pub linearity: LinearityReport,
}

impl DynamicsClassification {
    /// Attach prespace preconditions and recompute the Schrödinger flag.
    pub fn with_preconditions(mut self, trig: bool, a_prob: bool, transition: bool) -> Self {
        self.trig_preserved = Some(trig);
        self.a_prob_conserved = Some(a_prob);
        self.transition_conserved = Some(transition);
        self.schroedinger = self.compute_schroedinger();
        self
    }

    fn compute_schroedinger(&self) -> bool {
        let pre = [
            self.trig_preserved,
            self.a_prob_conserved,
            self.transition_conserved,
        ]
        .iter()
        .all(|f| f.unwrap_or(true));
        pre && self.linear && self.deterministic && self.continuous && self.time_shift_invariant
    }
}

/// Classify a law on a grid. Branch properties must hold for every context
/// branch; linearity compares the listed contexts (all branches when empty).
pub fn classify_dynamics(
    law: &PhaseLaw,
    contexts: &[&str],
    grid: &[f64],
    h: f64,
) -> Result<DynamicsClassification> {
    let linearity = classify_linearity(law, contexts, grid)?;
    let branches: Vec<Option<&str>> = if contexts.is_empty() {
        law.branches()
    } else {
        contexts.iter().copied().map(Some).collect()
    };
    let mut deterministic = true;
    let mut continuous = true;
    let mut shift = true;
    let mut cocycle_defect = 0.0f64;
    let mut time_shift_defect = 0.0f64;
    for &c in &branches {
        let det = classify_determinism(law, grid, c)?;
        let ts = classify_time_shift_invariance(law, grid, c)?;
        deterministic &= det.holds;
        shift &= ts.holds;
        cocycle_defect = cocycle_defect.max(det.max_defect);
        time_shift_defect = time_shift_defect.max(ts.max_defect);
        continuous &= classify_continuity(law, grid, c)?.continuous;
    }

    let (extracted_energy, time_dependent_generator) = if linearity.linear {
        match super::generator::extract_hamiltonian(law, h, grid, branches[0]) {
            Ok(super::generator::Generator::Constant { energy, .. }) => (Some(energy), false),
            Ok(super::generator::Generator::TimeDependent(_)) => (None, true),
            Err(_) => (None, false),
        }
    } else {
        (None, false)
    };

    let mut out = DynamicsClassification {
        law_kind: law.kind(),
        trig_preserved: None,
        a_prob_conserved: None,
        transition_conserved: None,
        linear: linearity.linear,
        deterministic,
        continuous,
        time_shift_invariant: shift,
        schroedinger: false,
        extracted_energy,
        time_dependent_generator,
        cocycle_defect,
        time_shift_defect,
        linearity,
    };
    out.schroedinger = out.compute_schroedinger();
    Ok(out)
}
