//! Finite Kolmogorov probability spaces ("prespace"), dichotomous random
//! variables, contexts and time-indexed two-point random walks.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interference::ContextualData;
use crate::tolerance;

/// A subset of the atoms of a [`ProbabilitySpace`], stored as a membership mask.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    members: Vec<bool>,
}

impl Event {
    pub fn empty(size: usize) -> Self {
        Self {
            members: vec![false; size],
        }
    }

    pub fn full(size: usize) -> Self {
        Self {
            members: vec![true; size],
        }
    }

    /// Panics if an index is out of range.
    pub fn from_indices(size: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut e = Self::empty(size);
        for i in indices {
            e.members[i] = true;
        }
        e
    }

    pub fn from_mask(members: Vec<bool>) -> Self {
        Self { members }
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.members[atom]
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn intersect(&self, other: &Event) -> Event {
        Event {
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(&a, &b)| a && b)
                .collect(),
        }
    }
}

/// Finite sample space with normalized atom weights. The σ-field is the power set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbabilitySpace {
    atoms: Vec<String>,
    weights: Vec<f64>,
}

impl ProbabilitySpace {
    pub fn new(atoms: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if atoms.len() < 2 {
            return Err(Error::InvalidInput("a space needs at least 2 atoms".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0 || **w > 1.0)
        {
            return Err(Error::InvalidInput(format!(
                "weight of atom {i} is {w}, not in [0, 1]"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tolerance::PROBABILITY {
            return Err(Error::InvalidInput(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { atoms, weights })
    }

    /// Atoms named `ω1 … ωn` with the given weights.
    pub fn with_weights(weights: Vec<f64>) -> Result<Self> {
        let atoms = (1..=weights.len()).map(|i| format!("ω{i}")).collect();
        Self::new(atoms, weights)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::with_weights(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atom_index(&self, name: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == name)
    }

    /// **P**(event).
    pub fn probability(&self, event: &Event) -> f64 {
        event.indices().map(|i| self.weights[i]).sum()
    }

    pub fn full_event(&self) -> Event {
        Event::full(self.len())
    }

    /// Draw `n` atom indices according to the weights.
    pub fn sample(&self, n: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
        let dist = WeightedIndex::new(&self.weights).expect("weights validated at construction");
        (0..n).map(|_| dist.sample(rng)).collect()
    }

    /// Empirical atom frequencies from `n` draws. The draws are split into
    /// `chunks` independent ChaCha streams of the same seed and counted on
    /// separate threads; the result depends only on `(n, seed, chunks)`.
    pub fn empirical_frequencies(&self, n: usize, seed: u64, chunks: usize) -> Vec<f64> {
        let chunks = chunks.max(1);
        let counts: Vec<Vec<usize>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..chunks)
                .map(|k| {
                    let draws = n / chunks + usize::from(k < n % chunks);
                    scope.spawn(move || {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        rng.set_stream(k as u64);
                        let mut counts = vec![0usize; self.len()];
                        for atom in self.sample(draws, &mut rng) {
                            counts[atom] += 1;
                        }
                        counts
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampling thread panicked"))
                .collect()
        });
        (0..self.len())
            .map(|i| counts.iter().map(|c| c[i]).sum::<usize>() as f64 / n.max(1) as f64)
            .collect()
    }
}

/// A random variable with two distinct real values; `assignment[ω] ∈ {0, 1}`
/// is the index of the value taken at atom `ω`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DichotomousVariable {
    name: String,
    values: [f64; 2],
    assignment: Vec<u8>,
}

impl DichotomousVariable {
    pub fn new(name: impl Into<String>, values: [f64; 2], assignment: Vec<u8>) -> Result<Self> {
        let name = name.into();
        if values[0] == values[1] || !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "variable `{name}` needs two distinct finite values, got {values:?}"
            )));
        }
        if let Some(i) = assignment.iter().position(|&v| v > 1) {
            return Err(Error::InvalidInput(format!(
                "variable `{name}`: atom {i} assigned value index {}",
                assignment[i]
            )));
        }
        Ok(Self {
            name,
            values,
            assignment,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> [f64; 2] {
        self.values
    }

    pub fn assignment(&self) -> &[u8] {
        &self.assignment
    }

    pub fn value_index(&self, atom: usize) -> usize {
        self.assignment[atom] as usize
    }

    pub fn value_at(&self, atom: usize) -> f64 {
        self.values[self.value_index(atom)]
    }

    /// Level set `{ω : v(ω) = values[index]}`.
    pub fn level_set(&self, index: usize) -> Event {
        Event::from_mask(
            self.assignment
                .iter()
                .map(|&v| v as usize == index)
                .collect(),
        )
    }

    /// Same values, new assignment.
    pub fn reassigned(&self, assignment: Vec<u8>) -> Self {
        Self {
            name: self.name.clone(),
            values: self.values,
            assignment,
        }
    }

    fn check_on(&self, space: &ProbabilitySpace) -> Result<()> {
        if self.assignment.len() != space.len() {
            return Err(Error::InvalidInput(format!(
                "variable `{}` assigns {} atoms, space has {}",
                self.name,
                self.assignment.len(),
                space.len()
            )));
        }
        Ok(())
    }
}

/// A positive-probability subset of atoms labelled as a complex of conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct Context {
    label: String,
    atoms: Event,
}

impl Context {
    pub fn new(space: &ProbabilitySpace, label: impl Into<String>, atoms: Event) -> Result<Self> {
        let label = label.into();
        if atoms.size() != space.len() {
            return Err(Error::InvalidInput(format!(
                "context `{label}` defined over {} atoms, space has {}",
                atoms.size(),
                space.len()
            )));
        }
        if space.probability(&atoms) <= tolerance::PROBABILITY {
            return Err(Error::DegenerateContext(format!("P({label}) = 0")));
        }
        Ok(Self { label, atoms })
    }

    pub fn full(space: &ProbabilitySpace) -> Self {
        Self {
            label: "Ω".into(),
            atoms: space.full_event(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn atoms(&self) -> &Event {
        &self.atoms
    }
}

/// **P**(event / C) by Bayes' formula.
pub fn conditional_probability(
    space: &ProbabilitySpace,
    event: &Event,
    context: &Context,
) -> Result<f64> {
    let pc = space.probability(&context.atoms);
    if pc <= tolerance::PROBABILITY {
        return Err(Error::DegenerateContext(format!(
            "P({}) = 0",
            context.label
        )));
    }
    let joint = space.probability(&event.intersect(&context.atoms));
    Ok((joint / pc).clamp(0.0, 1.0))
}

/// Classical formula of total probability, conditioning on the set
/// intersections `A_y ∩ C`: `Σ_y P(a=y/C) P(b=x / A_y ∩ C)`.
pub fn classical_total_probability(
    space: &ProbabilitySpace,
    a: &DichotomousVariable,
    b: &DichotomousVariable,
    context: &Context,
    x: usize,
) -> Result<f64> {
    a.check_on(space)?;
    b.check_on(space)?;
    let bx = b.level_set(x);
    let mut total = 0.0;
    for y in 0..2 {
        let cell = a.level_set(y).intersect(&context.atoms);
        if space.probability(&cell) <= tolerance::PROBABILITY {
            return Err(Error::DegenerateContext(format!(
                "P(a = {} ∩ {}) = 0",
                a.values[y], context.label
            )));
        }
        let pa = conditional_probability(space, &a.level_set(y), context)?;
        let sub = Context {
            label: format!("a={} ∩ {}", a.values[y], context.label),
            atoms: cell,
        };
        total += pa * conditional_probability(space, &bx, &sub)?;
    }
    Ok(total)
}

/// `C ∈ 𝒞_{a,nd}`: both `P(A_y ∩ C) > 0`.
pub fn is_nondegenerate(
    space: &ProbabilitySpace,
    a: &DichotomousVariable,
    context: &Context,
) -> bool {
    a.check_on(space).is_ok()
        && (0..2).all(|y| {
            space.probability(&a.level_set(y).intersect(&context.atoms)) > tolerance::PROBABILITY
        })
}

/// All four cells `B_x ∩ A_y` have positive probability.
pub fn are_incompatible(
    space: &ProbabilitySpace,
    a: &DichotomousVariable,
    b: &DichotomousVariable,
) -> bool {
    first_empty_cell(space, a, b).is_none()
}

fn first_empty_cell(
    space: &ProbabilitySpace,
    a: &DichotomousVariable,
    b: &DichotomousVariable,
) -> Option<(usize, usize)> {
    if a.check_on(space).is_err() || b.check_on(space).is_err() {
        return Some((0, 0));
    }
    (0..2)
        .flat_map(|x| (0..2).map(move |y| (x, y)))
        .find(|&(x, y)| {
            space.probability(&b.level_set(x).intersect(&a.level_set(y))) <= tolerance::PROBABILITY
        })
}

/// `p_C^a`, `p_C^b` and the context-free transitions `p(x/y) = P(b=x / a=y)`.
pub fn contextual_data(
    space: &ProbabilitySpace,
    a: &DichotomousVariable,
    b: &DichotomousVariable,
    context: &Context,
) -> Result<ContextualData> {
    a.check_on(space)?;
    b.check_on(space)?;
    if !is_nondegenerate(space, a, context) {
        return Err(Error::DegenerateContext(format!(
            "`{}` is degenerate with respect to `{}`",
            context.label, a.name
        )));
    }
    if let Some((x, y)) = first_empty_cell(space, a, b) {
        return Err(Error::NotIncompatible { x, y });
    }
    let p_a = [0, 1].map(|y| space.probability(&a.level_set(y).intersect(&context.atoms)));
    let p_b = [0, 1].map(|x| space.probability(&b.level_set(x).intersect(&context.atoms)));
    let pc = space.probability(&context.atoms);
    let transition = [0, 1].map(|y| {
        let ay = a.level_set(y);
        let py = space.probability(&ay);
        [0, 1].map(|x| space.probability(&b.level_set(x).intersect(&ay)) / py)
    });
    ContextualData::new(p_a.map(|p| p / pc), p_b.map(|p| p / pc), transition)
}

/// Reference variables evolving on a fixed time grid; value pairs are the
/// same at every time point.
#[derive(Clone, Debug, PartialEq)]
pub struct PrespaceProcess {
    space: ProbabilitySpace,
    times: Vec<f64>,
    a: Vec<DichotomousVariable>,
    b: Vec<DichotomousVariable>,
}

impl PrespaceProcess {
    pub fn new(
        space: ProbabilitySpace,
        times: Vec<f64>,
        a: Vec<DichotomousVariable>,
        b: Vec<DichotomousVariable>,
    ) -> Result<Self> {
        if times.is_empty() || times.len() != a.len() || times.len() != b.len() {
            return Err(Error::InvalidInput(format!(
                "process needs one a and one b per time point: {} times, {} a, {} b",
                times.len(),
                a.len(),
                b.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "time grid must be strictly increasing".into(),
            ));
        }
        for v in a.iter().chain(&b) {
            v.check_on(&space)?;
        }
        if a.iter().any(|v| v.values != a[0].values) || b.iter().any(|v| v.values != b[0].values) {
            return Err(Error::InvalidInput(
                "value pairs of the reference variables must not change in time".into(),
            ));
        }
        Ok(Self { space, times, a, b })
    }

    /// `a(t) = a₀`, `b(t) = b₀` at every time.
    pub fn constant(
        space: ProbabilitySpace,
        times: Vec<f64>,
        a: DichotomousVariable,
        b: DichotomousVariable,
    ) -> Result<Self> {
        let n = times.len();
        Self::new(space, times, vec![a; n], vec![b; n])
    }

    pub fn space(&self) -> &ProbabilitySpace {
        &self.space
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn a_at(&self, step: usize) -> &DichotomousVariable {
        &self.a[step]
    }

    pub fn b_at(&self, step: usize) -> &DichotomousVariable {
        &self.b[step]
    }

    pub fn contextual_data_at(&self, step: usize, context: &Context) -> Result<ContextualData> {
        contextual_data(&self.space, &self.a[step], &self.b[step], context)
    }

    /// Number of atoms whose a-trajectory takes both values.
    pub fn moving_atoms(&self) -> usize {
        (0..self.space.len())
            .filter(|&w| {
                self.a
                    .iter()
                    .any(|v| v.assignment[w] != self.a[0].assignment[w])
            })
            .count()
    }
}

/// Non-fatal diagnostics of process construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ProcessWarning {
    /// No permutation allowed by the tracked contexts can move an atom across
    /// a-level sets, so every trajectory is constant.
    Frozen,
}

/// Build a process satisfying conservation of a-probabilities for every
/// tracked context, with `b` held fixed.
///
/// Atoms are grouped by their membership pattern in the tracked contexts, by
/// their b-value and by weight. Each step applies a random permutation within
/// every group, `a(t+1, ω) = a(t, σ(ω))`. Weight and context membership are
/// invariant under `σ`, so `P(a(t)=y / C)` is unchanged for each tracked
/// `C`; grouping by b-value also conserves the transitions `p(x/y)`.
pub fn build_conserving_process(
    space: &ProbabilitySpace,
    a0: &DichotomousVariable,
    b: &DichotomousVariable,
    tracked: &[Context],
    steps: usize,
    seed: u64,
) -> Result<(PrespaceProcess, Vec<ProcessWarning>)> {
    a0.check_on(space)?;
    b.check_on(space)?;
    for c in tracked {
        if !is_nondegenerate(space, a0, c) {
            return Err(Error::DegenerateContext(format!(
                "tracked context `{}` is degenerate with respect to `{}`",
                c.label, a0.name
            )));
        }
    }

    let groups = permutation_groups(space, b, tracked);
    let mut warnings = Vec::new();
    let movable = groups
        .iter()
        .any(|g| g.iter().any(|&w| a0.assignment[w] != a0.assignment[g[0]]));
    if !movable {
        log::warn!("process is frozen: no admissible permutation changes any trajectory");
        warnings.push(ProcessWarning::Frozen);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a_series = Vec::with_capacity(steps + 1);
    a_series.push(a0.clone());
    for _ in 0..steps {
        let prev = a_series.last().expect("non-empty").assignment.clone();
        let mut next = prev.clone();
        for group in &groups {
            let mut image = group.clone();
            image.shuffle(&mut rng);
            for (&w, &sw) in group.iter().zip(&image) {
                next[w] = prev[sw];
            }
        }
        a_series.push(a0.reassigned(next));
    }
    let times = (0..=steps).map(|k| k as f64).collect();
    let b_series = vec![b.clone(); steps + 1];
    let process = PrespaceProcess::new(space.clone(), times, a_series, b_series)?;
    Ok((process, warnings))
}

/// Weights closer than this are treated as equal when forming permutation
/// groups; kept far below [`tolerance::PROBABILITY`] so that conservation
/// holds to that tolerance.
const EQUAL_WEIGHT: f64 = 1e-15;

/// Groups of atoms that may be permuted among each other. Only groups with
/// at least two atoms are returned.
fn permutation_groups(
    space: &ProbabilitySpace,
    b: &DichotomousVariable,
    tracked: &[Context],
) -> Vec<Vec<usize>> {
    let mut by_pattern: BTreeMap<(Vec<bool>, u8), Vec<usize>> = BTreeMap::new();
    for w in 0..space.len() {
        let pattern = tracked.iter().map(|c| c.atoms.contains(w)).collect();
        by_pattern
            .entry((pattern, b.assignment[w]))
            .or_default()
            .push(w);
    }

    let mut groups = Vec::new();
    for mut atoms in by_pattern.into_values() {
        atoms.sort_by(|&i, &j| {
            space.weights[i]
                .total_cmp(&space.weights[j])
                .then(i.cmp(&j))
        });
        let mut current: Vec<usize> = Vec::new();
        for w in atoms {
            if let Some(&last) = current.last() {
                if (space.weights[w] - space.weights[last]).abs() > EQUAL_WEIGHT {
                    if current.len() > 1 {
                        groups.push(std::mem::take(&mut current));
                    }
                    current.clear();
                }
            }
            current.push(w);
        }
        if current.len() > 1 {
            groups.push(current);
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups
}

/// Every nondegenerate context of a space with at most 20 atoms, enumerated
/// as bitmasks; used to check conservation over all subsets rather than a
/// tracked list.
pub fn all_nondegenerate_contexts(
    space: &ProbabilitySpace,
    a: &DichotomousVariable,
) -> Result<Vec<Context>> {
    const MAX_ATOMS: usize = 20;
    if space.len() > MAX_ATOMS {
        return Err(Error::InvalidInput(format!(
            "exhaustive context enumeration limited to {MAX_ATOMS} atoms, space has {}",
            space.len()
        )));
    }
    a.check_on(space)?;
    let n = space.len();
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let event = Event::from_mask((0..n).map(|i| mask & (1 << i) != 0).collect());
        let ctx = Context {
            label: format!("#{mask:x}"),
            atoms: event,
        };
        if is_nondegenerate(space, a, &ctx) {
            out.push(ctx);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(name: &str, assignment: &[u8]) -> DichotomousVariable {
        DichotomousVariable::new(name, [1.0, -1.0], assignment.to_vec()).unwrap()
    }

    #[test]
    fn space_validation() {
        assert!(ProbabilitySpace::with_weights(vec![1.0]).is_err());
        assert!(ProbabilitySpace::with_weights(vec![0.5, 0.6]).is_err());
        assert!(ProbabilitySpace::with_weights(vec![1.5, -0.5]).is_err());
        assert!(ProbabilitySpace::new(vec!["x".into()], vec![0.5, 0.5]).is_err());
        assert!(ProbabilitySpace::with_weights(vec![0.25; 4]).is_ok());
    }

    #[test]
    fn variable_validation() {
        assert!(DichotomousVariable::new("a", [1.0, 1.0], vec![0, 1]).is_err());
        assert!(DichotomousVariable::new("a", [1.0, 2.0], vec![0, 2]).is_err());
    }

    #[test]
    fn degenerate_context_rejected() {
        let s = ProbabilitySpace::with_weights(vec![0.5, 0.5, 0.0]).unwrap();
        assert!(matches!(
            Context::new(&s, "C", Event::from_indices(3, [2])),
            Err(Error::DegenerateContext(_))
        ));
    }

    #[test]
    fn conditional_probability_examples() {
        let s = ProbabilitySpace::uniform(4).unwrap();
        let c = Context::new(&s, "C", Event::from_indices(4, [1, 2])).unwrap();
        assert_eq!(
            conditional_probability(&s, &s.full_event(), &c).unwrap(),
            1.0
        );
        assert_eq!(
            conditional_probability(&s, &Event::from_indices(4, [0, 3]), &c).unwrap(),
            0.0
        );
        let p = conditional_probability(&s, &Event::from_indices(4, [0, 1]), &c).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn total_probability_with_independent_b() {
        // a and b independent uniform bits on 4 atoms, C = Ω.
        let s = ProbabilitySpace::uniform(4).unwrap();
        let a = var("a", &[0, 0, 1, 1]);
        let b = var("b", &[0, 1, 0, 1]);
        let c = Context::full(&s);
        for x in 0..2 {
            let direct = conditional_probability(&s, &b.level_set(x), &c).unwrap();
            let total = classical_total_probability(&s, &a, &b, &c, x).unwrap();
            assert!((direct - total).abs() < 1e-15);
        }
    }

    #[test]
    fn total_probability_needs_nondegenerate_context() {
        let s = ProbabilitySpace::uniform(4).unwrap();
        let a = var("a", &[0, 0, 1, 1]);
        let b = var("b", &[0, 1, 0, 1]);
        let c = Context::new(&s, "C", Event::from_indices(4, [0, 1])).unwrap();
        assert!(matches!(
            classical_total_probability(&s, &a, &b, &c, 0),
            Err(Error::DegenerateContext(_))
        ));
        assert!(!is_nondegenerate(&s, &a, &c));
        assert!(is_nondegenerate(&s, &a, &Context::full(&s)));
    }

    #[test]
    fn incompatibility_examples() {
        let s = ProbabilitySpace::uniform(4).unwrap();
        let a = var("a", &[0, 0, 1, 1]);
        assert!(!are_incompatible(
            &s,
            &a,
            &a.reassigned(a.assignment().to_vec())
        ));
        assert!(are_incompatible(&s, &a, &var("b", &[0, 1, 0, 1])));
    }

    #[test]
    fn contextual_data_symmetric() {
        // 8 atoms = three independent uniform bits (a, b, C-membership).
        let s = ProbabilitySpace::uniform(8).unwrap();
        let a = var("a", &[0, 0, 0, 0, 1, 1, 1, 1]);
        let b = var("b", &[0, 0, 1, 1, 0, 0, 1, 1]);
        let c = Context::new(&s, "C", Event::from_indices(8, [0, 2, 4, 6])).unwrap();
        let d = contextual_data(&s, &a, &b, &c).unwrap();
        assert_eq!(d.p_a(), [0.5, 0.5]);
        assert_eq!(d.p_b(), [0.5, 0.5]);
        assert_eq!(d.transition(), [[0.5, 0.5], [0.5, 0.5]]);
    }

    #[test]
    fn contextual_data_requires_incompatibility() {
        let s = ProbabilitySpace::uniform(4).unwrap();
        let a = var("a", &[0, 0, 1, 1]);
        let b = var("b", &[0, 0, 1, 1]);
        assert!(matches!(
            contextual_data(&s, &a, &b, &Context::full(&s)),
            Err(Error::NotIncompatible { .. })
        ));
    }

    #[test]
    fn zero_steps_is_constant() {
        let s = ProbabilitySpace::uniform(8).unwrap();
        let a = var("a", &[0, 1, 0, 1, 0, 1, 0, 1]);
        let b = var("b", &[0, 0, 1, 1, 0, 0, 1, 1]);
        let (p, _) = build_conserving_process(&s, &a, &b, &[], 0, 1).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.a_at(0), &a);
    }

    #[test]
    fn frozen_process_warns() {
        // Every atom has a distinct weight: no admissible permutation.
        let s = ProbabilitySpace::with_weights(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let a = var("a", &[0, 1, 0, 1]);
        let b = var("b", &[0, 0, 1, 1]);
        let (p, w) = build_conserving_process(&s, &a, &b, &[], 5, 3).unwrap();
        assert_eq!(w, vec![ProcessWarning::Frozen]);
        assert_eq!(p.moving_atoms(), 0);
    }

    #[test]
    fn conserving_process_moves_atoms_and_conserves() {
        let s = ProbabilitySpace::uniform(8).unwrap();
        let a = var("a", &[0, 1, 0, 1, 0, 1, 0, 1]);
        let b = var("b", &[0, 0, 1, 1, 0, 0, 1, 1]);
        let c = Context::new(&s, "C", Event::from_indices(8, [0, 1, 2, 3, 4])).unwrap();
        let (p, w) =
            build_conserving_process(&s, &a, &b, std::slice::from_ref(&c), 20, 11).unwrap();
        assert!(w.is_empty());
        assert!(p.moving_atoms() >= 1);
        // Counted directly over atoms rather than through `contextual_data`.
        let count = |step: usize, y: u8| {
            (0..8)
                .filter(|&w| c.atoms().contains(w) && p.a_at(step).assignment()[w] == y)
                .count()
        };
        for t in 0..p.len() {
            assert_eq!(count(t, 0), count(0, 0));
        }
    }

    #[test]
    fn same_seed_same_process() {
        let s = ProbabilitySpace::uniform(8).unwrap();
        let a = var("a", &[0, 1, 0, 1, 0, 1, 0, 1]);
        let b = var("b", &[0, 0, 1, 1, 0, 0, 1, 1]);
        let p1 = build_conserving_process(&s, &a, &b, &[], 10, 42).unwrap().0;
        let p2 = build_conserving_process(&s, &a, &b, &[], 10, 42).unwrap().0;
        assert_eq!(p1, p2);
    }

    #[test]
    fn sampling_converges_within_four_sigma() {
        let s = ProbabilitySpace::with_weights(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let n = 200_000;
        let freq = s.empirical_frequencies(n, 7, 4);
        for (p, f) in s.weights().iter().zip(&freq) {
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((p - f).abs() <= 4.0 * sigma, "p={p} f={f}");
        }
        assert_eq!(freq, s.empirical_frequencies(n, 7, 4));
    }

    #[test]
    fn exhaustive_contexts_limit() {
        let s = ProbabilitySpace::uniform(21).unwrap();
        let a = DichotomousVariable::new("a", [0.0, 1.0], vec![0; 21]).unwrap();
        assert!(all_nondegenerate_contexts(&s, &a).is_err());
        let s = ProbabilitySpace::uniform(4).unwrap();
        let a = var("a", &[0, 0, 1, 1]);
        // Nonempty subsets of {0,1} times nonempty subsets of {2,3}.
        assert_eq!(all_nondegenerate_contexts(&s, &a).unwrap().len(), 9);
    }
}
