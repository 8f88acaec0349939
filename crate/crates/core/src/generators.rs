//! Seeded random instances for property tests and the acceptance suite.

use rand::Rng;

use crate::interference::{classify_context, ContextClass, ContextualData};
use crate::prespace::{Context, DichotomousVariable, Event, ProbabilitySpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransitionKind {
    DoubleStochastic,
    /// Column sums differ from 1 by at least `1e-3`.
    NonDoubleStochastic,
    Any,
}

/// A row-stochastic 2×2 matrix with entries in `[0.02, 0.98]`.
pub fn random_transition(rng: &mut impl Rng, kind: TransitionKind) -> [[f64; 2]; 2] {
    loop {
        let p11: f64 = rng.random_range(0.02..0.98);
        let p21 = match kind {
            TransitionKind::DoubleStochastic => 1.0 - p11,
            _ => rng.random_range(0.02..0.98),
        };
        if kind == TransitionKind::NonDoubleStochastic && (p11 + p21 - 1.0).abs() < 1e-3 {
            continue;
        }
        return [[p11, 1.0 - p11], [p21, 1.0 - p21]];
    }
}

/// Contextual data whose two coefficients of statistical disturbance both lie
/// strictly inside `(−1, 1)` (at least `1e-6` from the boundary).
///
/// `p_C^b` is synthesized from the interference formula with a random
/// `λ(b₁)`; `λ(b₂)` is then fixed by normalization of `p_C^b`.
pub fn random_trigonometric(rng: &mut impl Rng, kind: TransitionKind) -> ContextualData {
    loop {
        let t = random_transition(rng, kind);
        let pa1 = rng.random_range(0.02..0.98);
        let p_a = [pa1, 1.0 - pa1];
        let lambda1: f64 = rng.random_range(-1.0..1.0);
        let roots = [0, 1].map(|x| (p_a[0] * t[0][x] * p_a[1] * t[1][x]).sqrt());
        let lambda2 = -lambda1 * roots[0] / roots[1];
        if lambda1.abs() > 1.0 - 1e-6 || lambda2.abs() > 1.0 - 1e-6 {
            continue;
        }
        let lambda = [lambda1, lambda2];
        let p_b = [0, 1].map(|x| p_a[0] * t[0][x] + p_a[1] * t[1][x] + 2.0 * lambda[x] * roots[x]);
        let Ok(data) = ContextualData::new(p_a, p_b, t) else {
            continue;
        };
        if matches!(classify_context(&data), Ok(r) if r.classification == ContextClass::Trigonometric)
        {
            return data;
        }
    }
}

/// A prespace with reference variables and one context.
#[derive(Clone, Debug)]
pub struct PrespaceInstance {
    pub space: ProbabilitySpace,
    pub a: DichotomousVariable,
    pub b: DichotomousVariable,
    pub context: Context,
}

/// Random `n`-atom space (`n ≥ 4`) with incompatible `a`, `b` and a context
/// that is nondegenerate for `a` and trigonometric.
///
/// With `double_stochastic`, cell masses are `P(A₁B₁) = αq`,
/// `P(A₁B₂) = α(1−q)`, `P(A₂B₁) = (1−α)(1−q)`, `P(A₂B₂) = (1−α)q`, so that
/// `p(b₁/a₁) = p(b₂/a₂) = q`.
pub fn random_prespace(rng: &mut impl Rng, n: usize, double_stochastic: bool) -> PrespaceInstance {
    assert!(n >= 4, "need one atom per (a, b) cell");
    loop {
        // Cell index 2y + x; the first four atoms cover every cell.
        let cells: Vec<usize> = (0..n)
            .map(|w| if w < 4 { w } else { rng.random_range(0..4) })
            .collect();
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();

        let weights: Vec<f64> = if double_stochastic {
            let alpha = rng.random_range(0.1..0.9);
            let q = rng.random_range(0.1..0.9);
            let mass = [
                alpha * q,
                alpha * (1.0 - q),
                (1.0 - alpha) * (1.0 - q),
                (1.0 - alpha) * q,
            ];
            let mut cell_raw = [0.0; 4];
            for (w, &c) in cells.iter().enumerate() {
                cell_raw[c] += raw[w];
            }
            (0..n)
                .map(|w| mass[cells[w]] * raw[w] / cell_raw[cells[w]])
                .collect()
        } else {
            let total: f64 = raw.iter().sum();
            raw.iter().map(|r| r / total).collect()
        };
        let Ok(space) = ProbabilitySpace::with_weights(weights) else {
            continue;
        };
        let a = DichotomousVariable::new(
            "a",
            [1.0, -1.0],
            cells.iter().map(|c| (c / 2) as u8).collect(),
        )
        .expect("valid variable");
        let b = DichotomousVariable::new(
            "b",
            [1.0, -1.0],
            cells.iter().map(|c| (c % 2) as u8).collect(),
        )
        .expect("valid variable");

        for _ in 0..64 {
            let members: Vec<bool> = (0..n).map(|_| rng.random_bool(0.6)).collect();
            let Ok(context) = Context::new(&space, "C", Event::from_mask(members)) else {
                continue;
            };
            let Ok(data) = crate::prespace::contextual_data(&space, &a, &b, &context) else {
                continue;
            };
            if matches!(classify_context(&data), Ok(r) if r.classification == ContextClass::Trigonometric)
            {
                return PrespaceInstance {
                    space,
                    a,
                    b,
                    context,
                };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::is_double_stochastic;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn transition_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let ds = random_transition(&mut rng, TransitionKind::DoubleStochastic);
            assert!(is_double_stochastic(&ds).unwrap());
            let nds = random_transition(&mut rng, TransitionKind::NonDoubleStochastic);
            assert!(!is_double_stochastic(&nds).unwrap());
        }
    }

    #[test]
    fn prespace_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [4, 8, 16] {
            for ds in [false, true] {
                let inst = random_prespace(&mut rng, n, ds);
                let d =
                    crate::prespace::contextual_data(&inst.space, &inst.a, &inst.b, &inst.context)
                        .unwrap();
                if ds {
                    assert!(is_double_stochastic(&d.transition()).unwrap());
                }
            }
        }
    }
}
