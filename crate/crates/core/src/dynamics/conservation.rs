use std::f64::consts::{FRAC_PI_2, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::law::PhaseTrack;
use crate::error::{Error, Result};
use crate::interference::{classify_context, ContextClass};
use crate::prespace::{all_nondegenerate_contexts, Context, Event, PrespaceProcess};
use crate::tolerance;

/// One tracked context at one time point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub context: String,
    /// `p_C^{a(t)}`; absent when the context is degenerate at this time.
    pub p_a: Option<[f64; 2]>,
    pub lambda: Option<[f64; 2]>,
    pub classification: Option<ContextClass>,
}

/// Exact (set-arithmetic) precondition check over the tracked contexts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreconditionReport {
    pub trig_preserved: bool,
    pub a_prob_conserved: bool,
    pub transition_conserved: bool,
    pub max_a_drift: f64,
    pub max_transition_drift: f64,
    pub transitions: Vec<[[f64; 2]; 2]>,
    pub steps: Vec<StepRecord>,
}

fn p_a_given(process: &PrespaceProcess, step: usize, context: &Context) -> Option<[f64; 2]> {
    let space = process.space();
    let pc = space.probability(context.atoms());
    if pc <= tolerance::PROBABILITY {
        return None;
    }
    let a = process.a_at(step);
    Some([0, 1].map(|y| space.probability(&a.level_set(y).intersect(context.atoms())) / pc))
}

/// `p(t; x/y) = P(b(t)=x / a(t)=y)`; NaN rows for empty a-level sets.
fn transition_at(process: &PrespaceProcess, step: usize) -> [[f64; 2]; 2] {
    let space = process.space();
    let (a, b) = (process.a_at(step), process.b_at(step));
    [0, 1].map(|y| {
        let ay = a.level_set(y);
        let py = space.probability(&ay);
        [0, 1].map(|x| {
            if py <= tolerance::PROBABILITY {
                f64::NAN
            } else {
                space.probability(&b.level_set(x).intersect(&ay)) / py
            }
        })
    })
}

fn drift(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).abs();
            if d.is_nan() {
                f64::INFINITY
            } else {
                d
            }
        })
        .fold(0.0, f64::max)
}

/// Check the dynamical preconditions over every time point of the process,
/// comparing against step `origin`.
pub fn validate_preconditions(
    process: &PrespaceProcess,
    tracked: &[Context],
    origin: usize,
) -> PreconditionReport {
    let transitions: Vec<[[f64; 2]; 2]> = (0..process.len())
        .map(|k| transition_at(process, k))
        .collect();
    let t_ref = transitions[origin].concat();
    let max_transition_drift = transitions
        .iter()
        .map(|t| drift(&t.concat(), &t_ref))
        .fold(0.0, f64::max);

    let mut trig = true;
    let mut max_a_drift = 0.0f64;
    let mut steps = Vec::with_capacity(process.len() * tracked.len());
    for context in tracked {
        let reference = p_a_given(process, origin, context);
        for (k, &t) in process.times().iter().enumerate() {
            let p_a = p_a_given(process, k, context);
            let d = match (p_a, reference) {
                (Some(p), Some(r)) => drift(&p, &r),
                _ => f64::INFINITY,
            };
            max_a_drift = max_a_drift.max(d);
            let report = process
                .contextual_data_at(k, context)
                .and_then(|data| classify_context(&data))
                .ok();
            let class = report.as_ref().map(|r| r.classification);
            trig &= class == Some(ContextClass::Trigonometric);
            steps.push(StepRecord {
                t,
                context: context.label().to_string(),
                p_a,
                lambda: report.map(|r| r.lambda),
                classification: class,
            });
        }
    }
    PreconditionReport {
        trig_preserved: trig,
        a_prob_conserved: max_a_drift <= tolerance::PROBABILITY,
        transition_conserved: max_transition_drift <= tolerance::PROBABILITY,
        max_a_drift,
        max_transition_drift,
        transitions,
        steps,
    }
}

/// (CP) over every nondegenerate subset of a space with at most 20 atoms.
pub fn a_prob_conserved_exhaustively(process: &PrespaceProcess, origin: usize) -> Result<bool> {
    let contexts = all_nondegenerate_contexts(process.space(), process.a_at(origin))?;
    Ok(contexts.iter().all(|c| {
        let reference = p_a_given(process, origin, c).expect("nondegenerate");
        (0..process.len()).all(|k| {
            p_a_given(process, k, c)
                .is_some_and(|p| drift(&p, &reference) <= tolerance::PROBABILITY)
        })
    }))
}

/// Monte Carlo version of (CP) and (CTP): estimated proportions at each step
/// must agree with those at `origin` within four standard deviations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledPreconditionReport {
    pub samples: usize,
    pub a_prob_conserved: bool,
    pub transition_conserved: bool,
    /// Largest `|p̂(t) − p̂(t₀)| / σ` seen.
    pub max_z: f64,
}

/// Two-proportion test at 4σ. `None` when either sample is empty.
fn z_score(hits: [usize; 2], totals: [usize; 2]) -> Option<f64> {
    if totals.contains(&0) {
        return None;
    }
    let p = [0, 1].map(|i| hits[i] as f64 / totals[i] as f64);
    let pooled = (hits[0] + hits[1]) as f64 / (totals[0] + totals[1]) as f64;
    let sd = (pooled * (1.0 - pooled) * (1.0 / totals[0] as f64 + 1.0 / totals[1] as f64)).sqrt();
    let d = (p[0] - p[1]).abs();
    Some(if sd == 0.0 {
        if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        d / sd
    })
}

pub fn validate_preconditions_sampled(
    process: &PrespaceProcess,
    tracked: &[Context],
    origin: usize,
    samples: usize,
    seed: u64,
) -> SampledPreconditionReport {
    const Z_LIMIT: f64 = 4.0;
    // counts[k] = (per-context [in C, a=a₁ in C], per-y [a=y, a=y ∧ b=b₁])
    type StepCounts = (Vec<[usize; 2]>, [[usize; 2]; 2]);
    let counts: Vec<StepCounts> = (0..process.len())
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let draws = process.space().sample(samples, &mut rng);
            let (a, b) = (process.a_at(k), process.b_at(k));
            let mut ctx = vec![[0usize; 2]; tracked.len()];
            let mut trans = [[0usize; 2]; 2];
            for &w in &draws {
                let y = a.value_index(w);
                for (c, slot) in tracked.iter().zip(ctx.iter_mut()) {
                    if c.atoms().contains(w) {
                        slot[0] += 1;
                        slot[1] += usize::from(y == 0);
                    }
                }
                trans[y][0] += 1;
                trans[y][1] += usize::from(b.value_index(w) == 0);
            }
            (ctx, trans)
        })
        .collect();

    let mut cp = true;
    let mut ctp = true;
    let mut max_z = 0.0f64;
    let (ref_ctx, ref_trans) = &counts[origin];
    for (ctx, trans) in &counts {
        for (c, r) in ctx.iter().zip(ref_ctx) {
            match z_score([c[1], r[1]], [c[0], r[0]]) {
                Some(z) => {
                    max_z = max_z.max(z);
                    cp &= z <= Z_LIMIT;
                }
                None => cp = false,
            }
        }
        for y in 0..2 {
            match z_score(
                [trans[y][1], ref_trans[y][1]],
                [trans[y][0], ref_trans[y][0]],
            ) {
                Some(z) => {
                    max_z = max_z.max(z);
                    ctp &= z <= Z_LIMIT;
                }
                None => ctp = false,
            }
        }
    }
    SampledPreconditionReport {
        samples,
        a_prob_conserved: cp,
        transition_conserved: ctp,
        max_z,
    }
}

/// Rescaled a-process `H(t, ω) = 0` on `a = a₁`, `E` on `a = a₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyProcess {
    levels: [f64; 2],
    process: PrespaceProcess,
}

impl EnergyProcess {
    pub fn levels(&self) -> [f64; 2] {
        self.levels
    }

    pub fn process(&self) -> &PrespaceProcess {
        &self.process
    }

    pub fn value(&self, step: usize, atom: usize) -> f64 {
        self.levels[self.process.a_at(step).value_index(atom)]
    }

    /// `p_C^{H(t)}(z)` for each distinct level `z`, in ascending order of `z`.
    pub fn distribution(&self, step: usize, context: &Context) -> Vec<(f64, f64)> {
        let space = self.process.space();
        let pc = space.probability(context.atoms());
        let mut levels = self.levels.to_vec();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        levels
            .into_iter()
            .map(|z| {
                let atoms = Event::from_mask(
                    (0..space.len())
                        .map(|w| context.atoms().contains(w) && self.value(step, w) == z)
                        .collect(),
                );
                (z, space.probability(&atoms) / pc)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationRow {
    pub t: f64,
    pub context: String,
    pub distribution: Vec<(f64, f64)>,
}

/// Statistical against individual conservation of energy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationReport {
    pub levels: [f64; 2],
    pub conserved: bool,
    pub max_drift: f64,
    /// Atoms whose energy trajectory `H(·, ω)` is not constant.
    pub nonconstant_trajectories: usize,
    pub table: Vec<ConservationRow>,
}

/// Relabel `a₁ → 0`, `a₂ → E` and compare the distribution of `H(t)` in
/// each tracked context with that at the first time point.
pub fn energy_process(
    process: &PrespaceProcess,
    energy: f64,
    tracked: &[Context],
) -> Result<(EnergyProcess, ConservationReport)> {
    if !energy.is_finite() {
        return Err(Error::NonFinite("energy level".into()));
    }
    for c in tracked {
        if process.space().probability(c.atoms()) <= tolerance::PROBABILITY {
            return Err(Error::DegenerateContext(c.label().to_string()));
        }
    }
    let ep = EnergyProcess {
        levels: [0.0, energy],
        process: process.clone(),
    };
    let mut table = Vec::new();
    let mut max_drift = 0.0f64;
    for c in tracked {
        let reference = ep.distribution(0, c);
        for (k, &t) in process.times().iter().enumerate() {
            let dist = ep.distribution(k, c);
            for ((_, p), (_, r)) in dist.iter().zip(&reference) {
                max_drift = max_drift.max((p - r).abs());
            }
            table.push(ConservationRow {
                t,
                context: c.label().to_string(),
                distribution: dist,
            });
        }
    }
    let nonconstant_trajectories = (0..process.space().len())
        .filter(|&w| (1..process.len()).any(|k| ep.value(k, w) != ep.value(0, w)))
        .count();
    let report = ConservationReport {
        levels: ep.levels,
        conserved: max_drift <= tolerance::PROBABILITY,
        max_drift,
        nonconstant_trajectories,
        table,
    };
    Ok((ep, report))
}

/// `θ_C(t)` extracted from a process, on a continuous branch.
///
/// At each time `λ(b₁)` is computed from the prespace; of the candidates
/// `±arccos λ + 2πk` the one closest to the previous phase is kept. Steps of
/// `π/2` or more are rejected as aliasing.
pub fn phase_track(process: &PrespaceProcess, context: &Context) -> Result<PhaseTrack> {
    let mut theta: Vec<f64> = Vec::with_capacity(process.len());
    for k in 0..process.len() {
        let report = classify_context(&process.contextual_data_at(k, context)?)?;
        let principal = match report.phases {
            Some(p) if report.is_representable() => p[0],
            _ => return Err(Error::NotRepresentable(report.classification.name().into())),
        };
        let next = match theta.last() {
            None => principal,
            Some(&prev) => {
                let nearest = |c: f64| c + TAU * ((prev - c) / TAU).round();
                let candidates = [nearest(principal), nearest(-principal)];
                let best = candidates
                    .into_iter()
                    .min_by(|a, b| (a - prev).abs().total_cmp(&(b - prev).abs()))
                    .expect("two candidates");
                let jump = (best - prev).abs();
                if jump >= FRAC_PI_2 {
                    return Err(Error::PhaseAliasing { index: k, jump });
                }
                best
            }
        };
        theta.push(next);
    }
    PhaseTrack::new(process.times().to_vec(), theta)
}
