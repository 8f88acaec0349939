//! Brute-force oracles written against the definitions, without going
//! through the library's own probability or representation code.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

/// Exhaustive sums over the atoms of a finite space.
#[derive(Clone, Debug)]
pub struct Enumerated {
    pub p_c: f64,
    /// `P(a = y / C)`
    pub p_a: [f64; 2],
    /// `P(b = x / C)`
    pub p_b: [f64; 2],
    /// `P(b = x / a = y)` over the whole space.
    pub transition: [[f64; 2]; 2],
    /// `E[a / C]`, `E[b / C]`.
    pub mean_a: f64,
    pub mean_b: f64,
}

pub fn enumerate(
    weights: &[f64],
    a: &[u8],
    b: &[u8],
    a_values: [f64; 2],
    b_values: [f64; 2],
    in_context: &dyn Fn(usize) -> bool,
) -> Enumerated {
    let mut p_c = 0.0;
    let mut a_c = [0.0; 2];
    let mut b_c = [0.0; 2];
    let mut joint = [[0.0; 2]; 2];
    let mut marg_a = [0.0; 2];
    let mut mean_a = 0.0;
    let mut mean_b = 0.0;
    for w in 0..weights.len() {
        let (y, x) = (a[w] as usize, b[w] as usize);
        joint[y][x] += weights[w];
        marg_a[y] += weights[w];
        if in_context(w) {
            p_c += weights[w];
            a_c[y] += weights[w];
            b_c[x] += weights[w];
            mean_a += weights[w] * a_values[y];
            mean_b += weights[w] * b_values[x];
        }
    }
    Enumerated {
        p_c,
        p_a: a_c.map(|v| v / p_c),
        p_b: b_c.map(|v| v / p_c),
        transition: [0, 1].map(|y| [0, 1].map(|x| joint[y][x] / marg_a[y])),
        mean_a: mean_a / p_c,
        mean_b: mean_b / p_c,
    }
}

/// `λ(x) = (p_b(x) − Σ_y p_a(y) p(x/y)) / (2 √(Π_y p_a(y) p(x/y)))`.
pub fn lambda(p_a: [f64; 2], p_b: [f64; 2], t: [[f64; 2]; 2]) -> [f64; 2] {
    [0, 1].map(|x| {
        let classical = p_a[0] * t[0][x] + p_a[1] * t[1][x];
        let root = (p_a[0] * t[0][x] * p_a[1] * t[1][x]).sqrt();
        (p_b[x] - classical) / (2.0 * root)
    })
}

pub fn is_double_stochastic(t: [[f64; 2]; 2]) -> bool {
    (t[0][0] + t[1][0] - 1.0).abs() <= 1e-12 && (t[0][1] + t[1][1] - 1.0).abs() <= 1e-12
}

fn circular(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Phases: `θ₁ = arccos λ₁`; `θ₂ = θ₁ + π` for double stochastic
/// transitions, otherwise the branch `±arccos λ₂` nearest to `θ₁ + π`.
pub fn phases(lambda: [f64; 2], t: [[f64; 2]; 2]) -> [f64; 2] {
    let th1 = lambda[0].clamp(-1.0, 1.0).acos();
    let th2 = if is_double_stochastic(t) {
        th1 + PI
    } else {
        let p = lambda[1].clamp(-1.0, 1.0).acos();
        if circular(p, th1 + PI) <= circular(TAU - p, th1 + PI) {
            p
        } else {
            TAU - p
        }
    };
    [th1, th2]
}

/// `φ(x) = √(p_a(1) p(x/1)) + e^{iθ_x} √(p_a(2) p(x/2))`.
pub fn amplitude(p_a: [f64; 2], t: [[f64; 2]; 2], theta: [f64; 2]) -> [Complex64; 2] {
    [0, 1].map(|x| {
        Complex64::new((p_a[0] * t[0][x]).sqrt(), 0.0)
            + Complex64::from_polar((p_a[1] * t[1][x]).sqrt(), theta[x])
    })
}

pub fn inner(u: &[Complex64; 2], v: &[Complex64; 2]) -> Complex64 {
    u[0] * v[0].conj() + u[1] * v[1].conj()
}

pub fn distance(u: &[Complex64; 2], v: &[Complex64; 2]) -> f64 {
    ((u[0] - v[0]).norm_sqr() + (u[1] - v[1]).norm_sqr()).sqrt()
}

/// Largest gap between library output and enumeration for one random
/// prespace: λ, φ and the b-average always, the a-average when the
/// transitions are double stochastic.
pub fn prespace_gap(seed: u64) -> f64 {
    use qlprob::generators::random_prespace;
    use qlprob::hilbert::{expectation, represent, ObservableOperator};
    use qlprob::interference::classify_context;
    use qlprob::prespace::{contextual_data, DichotomousVariable};
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(8..=16);
    let ds = rng.random_bool(0.5);
    let inst = random_prespace(&mut rng, n, ds);
    let a_values = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
    let b_values = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
    let a = DichotomousVariable::new("a", a_values, inst.a.assignment().to_vec()).unwrap();
    let b = DichotomousVariable::new("b", b_values, inst.b.assignment().to_vec()).unwrap();

    let truth = enumerate(
        inst.space.weights(),
        a.assignment(),
        b.assignment(),
        a_values,
        b_values,
        &|w| inst.context.atoms().contains(w),
    );
    let data = contextual_data(&inst.space, &a, &b, &inst.context).unwrap();
    let report = classify_context(&data).unwrap();
    let state = represent(&data, &report).unwrap();

    let lam = lambda(truth.p_a, truth.p_b, truth.transition);
    let phi = amplitude(truth.p_a, truth.transition, phases(lam, truth.transition));
    let mut gap = distance(&state.amplitude(), &phi);
    for x in 0..2 {
        gap = gap.max((report.lambda[x] - lam[x]).abs());
    }
    let eb = expectation(&state, &ObservableOperator::position_like(b_values));
    gap = gap.max((eb - truth.mean_b).abs());
    if is_double_stochastic(truth.transition) {
        let op = ObservableOperator::energy_like(a_values, state.basis()).unwrap();
        gap = gap.max((expectation(&state, &op) - truth.mean_a).abs());
    }
    gap
}
