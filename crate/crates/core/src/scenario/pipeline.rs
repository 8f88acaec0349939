use serde::Serialize;
use serde_json::{json, Value};

use super::schema::{GridSpec, Kind, PrespaceModel, Scenario};
use super::Failure;
use crate::dynamics::{
    self, approximation_analysis, classify_dynamics, energy_process, evolve, extract_hamiltonian,
    group_law_defect, phase_track, propagator, reconstruction_defect, schroedinger_residual, thin,
    validate_preconditions, validate_preconditions_sampled, Generator, Increment, LawKind,
    PhaseLaw,
};
use crate::hilbert::{born_probability, represent, theorem_check, Observable, QLState};
use crate::interference::{classify_context, lambda_coefficient, ContextualData};
use crate::lambda_ode::{
    harmonic_residual, schroedinger_detector, solve_eabb, solve_theta, LambdaTrajectory,
    DEFAULT_STEP,
};
use crate::linalg::Vec2;
use crate::prespace::build_conserving_process;
use crate::tolerance;

/// One verified quantity with its limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value <= limit,
        }
    }

    fn flag(name: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.into(),
            value: if passed { 1.0 } else { 0.0 },
            limit: 1.0,
            passed,
        }
    }
}

/// Fixed time-series row: `t, theta, lambda, xi, pB1, pB2, pA1, pA2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub t: f64,
    pub theta: f64,
    pub lambda: f64,
    pub xi: f64,
    pub p_b: [f64; 2],
    pub p_a: [f64; 2],
}

#[derive(Clone, Debug)]
pub enum Table {
    Series(Vec<Row>),
    Trajectories(Vec<LambdaTrajectory>),
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub results: Value,
    pub table: Option<Table>,
    pub checks: Vec<Check>,
}

/// Resolved run parameters.
#[derive(Clone, Copy, Debug)]
pub struct Params {
    pub seed: u64,
    pub h: f64,
}

pub fn execute(kind: Kind, sc: &Scenario, p: Params) -> Result<Outcome, Failure> {
    match kind {
        Kind::Represent => run_represent(sc),
        Kind::Classify => run_classify(sc, p),
        Kind::Evolve => run_evolve(sc, p),
        Kind::Prespace => run_prespace(sc, p),
        Kind::Ode => run_ode(sc, p),
    }
}

fn grid_of(sc: &Scenario, kind: &str) -> Result<GridSpec, Failure> {
    let grid = sc
        .grid
        .ok_or_else(|| Failure::Validation(format!("grid: required for {kind} scenarios")))?;
    grid.validate().map_err(Failure::Validation)?;
    Ok(grid)
}

fn law_of(sc: &Scenario, h: f64, kind: &str) -> Result<PhaseLaw, Failure> {
    sc.phase_law
        .as_ref()
        .ok_or_else(|| Failure::Validation(format!("phase_law: required for {kind} scenarios")))?
        .build(h)
        .map_err(Failure::Validation)
}

fn prespace_of(sc: &Scenario) -> Result<Option<PrespaceModel>, Failure> {
    Ok(match &sc.prespace {
        Some(spec) => Some(spec.build()?),
        None => None,
    })
}

/// Labelled contextual data from exactly one of the two sources.
fn sources(sc: &Scenario, kind: &str) -> Result<Vec<(String, ContextualData)>, Failure> {
    match (&sc.contextual_data, prespace_of(sc)?) {
        (Some(spec), None) => Ok(vec![("C".to_string(), spec.build()?)]),
        (None, Some(model)) => model
            .contexts
            .iter()
            .map(|c| {
                let data = crate::prespace::contextual_data(&model.space, &model.a, &model.b, c)?;
                Ok((c.label().to_string(), data))
            })
            .collect(),
        _ => Err(Failure::Validation(format!(
            "contextual_data/prespace: exactly one must be given for {kind} scenarios"
        ))),
    }
}

fn cvec(v: &Vec2) -> [[f64; 2]; 2] {
    v.map(|z| [z.re, z.im])
}

fn state_of(label: &str, data: &ContextualData) -> Result<QLState, Failure> {
    let report = classify_context(data)?;
    if !report.is_representable() {
        return Err(Failure::Representation(format!(
            "context `{label}` is {} (λ = {:?}); no complex amplitude exists",
            report.classification.name(),
            report.lambda
        )));
    }
    Ok(represent(data, &report)?)
}

fn born_a(state: &QLState) -> [f64; 2] {
    if state.basis().orthonormal {
        [0, 1].map(|y| born_probability(state, Observable::A, y).expect("orthonormal basis"))
    } else {
        state.source().p_a()
    }
}

fn run_represent(sc: &Scenario) -> Result<Outcome, Failure> {
    let t = sc.grid.map_or(0.0, |g| g.t0);
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (label, data) in sources(sc, "represent")? {
        let report = classify_context(&data)?;
        let state = state_of(&label, &data)?;
        let theorem = theorem_check(&data, &report)?;
        let p_b = state.amplitude().map(|z| z.norm_sqr());
        checks.push(Check::at_most(
            format!("born_b_residual[{label}]"),
            state.born_b_residual(),
            tolerance::STRUCTURAL,
        ));
        checks.push(Check::flag(format!("theorem[{label}]"), theorem.agrees()));
        rows.push(Row {
            t,
            theta: state.phases()[0],
            lambda: report.lambda[0],
            xi: 0.0,
            p_b,
            p_a: born_a(&state),
        });
        entries.push(json!({
            "label": label,
            "contextual_data": data,
            "classification": report.classification,
            "lambda": report.lambda,
            "principal_phases": report.phases,
            "phases": state.phases(),
            "phase_constraint": crate::interference::phase_constraint_check(&state.phases()),
            "phase_disagreement": state.phase_disagreement(),
            "amplitude": cvec(&state.amplitude()),
            "born_b": p_b,
            "born_b_residual": state.born_b_residual(),
            "a_basis": [cvec(&state.basis().a[0]), cvec(&state.basis().a[1])],
            "a_basis_global_phase": state.basis().a_global_phase,
            "a_basis_orthonormal": state.basis().orthonormal,
            "orthonormality_defect": state.basis().orthonormality_defect(),
            "born_a": state.basis().orthonormal.then(|| born_a(&state)),
            "born_a_residual": state.born_a_residual(),
            "double_stochastic": theorem.double_stochastic,
            "theorem": theorem,
            "interference_components": cvec(&state.interference_components()),
        }));
    }
    Ok(Outcome {
        results: json!({ "states": entries }),
        table: Some(Table::Series(rows)),
        checks,
    })
}

/// Classification, generator and perturbation analysis of a law.
fn analyse_law(
    law: &PhaseLaw,
    grid: &GridSpec,
    h: f64,
    branch: Option<&str>,
) -> Result<(Value, Vec<Check>, Option<Generator>), Failure> {
    let points = grid.points();
    let contexts: Vec<&str> = law.context_labels().collect();
    let class = classify_dynamics(law, &[], &points, h)?;
    let mut checks = Vec::new();
    let mut out = serde_json::Map::new();
    out.insert("law_kind".into(), json!(law.kind()));
    out.insert("contexts".into(), json!(contexts));

    let mut unitarity = 0.0f64;
    for c in law.branches() {
        for (k, &t0) in thin(&points).iter().enumerate() {
            for &t in &thin(&points)[k..] {
                unitarity = unitarity.max(propagator(law, t0, t, c)?.unitarity_defect());
            }
        }
    }
    checks.push(Check::at_most(
        "propagator_unitarity",
        unitarity,
        tolerance::STRUCTURAL,
    ));
    out.insert("max_unitarity_defect".into(), json!(unitarity));
    if let Some(w) = &class.linearity.witness {
        checks.push(Check {
            name: "witness_violation".into(),
            value: w.violation,
            limit: tolerance::WITNESS_MARGIN,
            passed: w.violation > tolerance::WITNESS_MARGIN,
        });
    }

    let generator = if class.deterministic && class.continuous {
        extract_hamiltonian(law, h, &points, branch).ok()
    } else {
        None
    };
    if class.deterministic && class.time_shift_invariant {
        let g = group_law_defect(law, &points, branch)?;
        checks.push(Check::at_most("group_law", g, 1e-10));
        out.insert("group_law_defect".into(), json!(g));
    }
    match &generator {
        Some(gen) => {
            let rec = reconstruction_defect(gen, law, &points, h, branch)?;
            let fd = schroedinger_residual(gen, law, &points, h, 1e-4, branch)?;
            checks.push(Check::at_most(
                "generator_reconstruction",
                rec,
                tolerance::LAW,
            ));
            checks.push(Check::at_most(
                "schroedinger_equation_residual",
                fd,
                tolerance::FINITE_DIFFERENCE,
            ));
            out.insert("reconstruction_defect".into(), json!(rec));
            out.insert("schroedinger_equation_residual".into(), json!(fd));
            match gen {
                Generator::Constant {
                    energy,
                    hamiltonian,
                } => {
                    out.insert(
                        "generator".into(),
                        json!({
                            "type": "constant",
                            "energy": energy,
                            "hamiltonian": hamiltonian.matrix(),
                        }),
                    );
                }
                Generator::TimeDependent(g) => {
                    let samples = thin(&points)
                        .into_iter()
                        .map(|t| Ok([t, g.energy(t)?]))
                        .collect::<crate::Result<Vec<_>>>()?;
                    out.insert(
                        "generator".into(),
                        json!({
                            "type": "time-dependent",
                            "energy_samples": samples,
                        }),
                    );
                }
            }
        }
        None => {
            out.insert("generator".into(), Value::Null);
        }
    }
    if law.perturbation().is_some() {
        let a = approximation_analysis(law, h, grid.t0, grid.t1 - grid.t0, branch)?;
        checks.push(Check::at_most(
            "approximation_bound",
            a.observed,
            a.bound * (1.0 + 1e-9) + 1e-15,
        ));
        out.insert("approximation".into(), json!(a));
    }
    out.insert("classification".into(), json!(class));
    Ok((Value::Object(out), checks, generator))
}

fn run_classify(sc: &Scenario, p: Params) -> Result<Outcome, Failure> {
    let mut results = serde_json::Map::new();
    let mut checks = Vec::new();
    if sc.contextual_data.is_none() && sc.phase_law.is_none() && sc.prespace.is_none() {
        return Err(Failure::Validation(
            "classify: needs contextual_data, prespace or phase_law".into(),
        ));
    }
    if sc.contextual_data.is_some() || sc.prespace.is_some() {
        let mut list = Vec::new();
        for (label, data) in sources(sc, "classify")? {
            let report = classify_context(&data)?;
            list.push(json!({ "label": label, "contextual_data": data, "interference": report }));
        }
        results.insert("contexts".into(), Value::Array(list));
    }
    if sc.phase_law.is_some() {
        let grid = grid_of(sc, "classify")?;
        let law = law_of(sc, p.h, "classify")?;
        let branch = sc.context.as_deref().or(law.branches()[0]);
        let (value, c, _) = analyse_law(&law, &grid, p.h, branch)?;
        checks.extend(c);
        results.insert("dynamics".into(), value);
    }
    if sc.outputs.csv.is_some() {
        log::warn!("classify scenarios produce no time series; outputs.csv ignored");
    }
    Ok(Outcome {
        results: Value::Object(results),
        table: None,
        checks,
    })
}

fn run_evolve(sc: &Scenario, p: Params) -> Result<Outcome, Failure> {
    let grid = grid_of(sc, "evolve")?;
    let law = law_of(sc, p.h, "evolve")?;
    let ctx = sc.context.as_deref();
    let (label, data) = sources(sc, "evolve")?
        .into_iter()
        .next()
        .ok_or_else(|| Failure::Validation("prespace.contexts: empty".into()))?;
    let state0 = state_of(&label, &data)?;
    let theta0 = state0.phases()[0];
    let pa0 = born_a(&state0);
    let points = grid.points();

    let mut rows = Vec::with_capacity(points.len());
    let (mut a_drift, mut born_b, mut lambda_gap, mut unitarity) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &t in &points {
        let u = propagator(&law, grid.t0, t, ctx)?;
        unitarity = unitarity.max(u.unitarity_defect());
        let state = evolve(&state0, &law, grid.t0, t, ctx)?;
        let theta = theta0 + u.xi();
        let lambda = lambda_coefficient(state.source(), 0)?;
        let pa = born_a(&state);
        a_drift = a_drift
            .max((pa[0] - pa0[0]).abs())
            .max((pa[1] - pa0[1]).abs());
        born_b = born_b.max(state.born_b_residual());
        lambda_gap = lambda_gap.max((lambda - theta.cos()).abs());
        rows.push(Row {
            t,
            theta,
            lambda,
            xi: u.xi(),
            p_b: state.amplitude().map(|z| z.norm_sqr()),
            p_a: pa,
        });
    }

    let (law_value, mut checks, generator) =
        analyse_law(&law, &grid, p.h, ctx.or(law.branches()[0]))?;
    checks.push(Check::at_most(
        "a_probability_drift",
        a_drift,
        tolerance::STRUCTURAL,
    ));
    checks.push(Check::at_most(
        "born_b_residual",
        born_b,
        tolerance::STRUCTURAL,
    ));
    checks.push(Check::at_most(
        "lambda_vs_cos_theta",
        lambda_gap,
        tolerance::LAW,
    ));
    checks.push(Check::at_most(
        "unitarity",
        unitarity,
        tolerance::STRUCTURAL,
    ));

    let trajectory = LambdaTrajectory {
        grid: points.clone(),
        lambda: rows.iter().map(|r| r.lambda).collect(),
        theta: rows.iter().map(|r| r.theta).collect(),
        method: crate::lambda_ode::Method::ThetaIntegration,
    };
    let fit = if points.len() >= 16 {
        match schroedinger_detector(&trajectory, p.h) {
            Ok(f) => json!(f),
            Err(e) => json!({ "error": e.to_string() }),
        }
    } else {
        Value::Null
    };
    let harmonic = match &generator {
        Some(Generator::Constant { energy, .. }) if points.len() >= 3 => {
            let r = harmonic_residual(&trajectory, energy / p.h)?;
            checks.push(Check::at_most("harmonic_residual", r, 1e-4));
            json!({ "omega": energy / p.h, "residual": r })
        }
        _ => Value::Null,
    };

    Ok(Outcome {
        results: json!({
            "context": label,
            "law_branch": ctx,
            "initial_state": {
                "contextual_data": data,
                "phases": state0.phases(),
                "amplitude": cvec(&state0.amplitude()),
            },
            "samples": points.len(),
            "max_a_probability_drift": a_drift,
            "max_born_b_residual": born_b,
            "max_lambda_vs_cos_theta": lambda_gap,
            "harmonic_fit": fit,
            "harmonic_residual": harmonic,
            "dynamics": law_value,
        }),
        table: Some(Table::Series(rows)),
        checks,
    })
}

fn run_prespace(sc: &Scenario, p: Params) -> Result<Outcome, Failure> {
    let spec = sc
        .prespace
        .as_ref()
        .ok_or_else(|| Failure::Validation("prespace: required for prespace scenarios".into()))?;
    let model = spec.build()?;
    let steps = spec.steps.unwrap_or(50);
    let energy = spec.energy.unwrap_or(1.0);
    let (process, warnings) = build_conserving_process(
        &model.space,
        &model.a,
        &model.b,
        &model.contexts,
        steps,
        p.seed,
    )?;
    let pre = validate_preconditions(&process, &model.contexts, 0);
    let (_, conservation) = energy_process(&process, energy, &model.contexts)?;
    let mut checks = vec![
        Check::at_most(
            "a_probability_conservation",
            pre.max_a_drift,
            tolerance::PROBABILITY,
        ),
        Check::at_most(
            "transition_conservation",
            pre.max_transition_drift,
            tolerance::PROBABILITY,
        ),
        Check::at_most(
            "energy_distribution_conservation",
            conservation.max_drift,
            tolerance::PROBABILITY,
        ),
    ];

    let sampled = spec
        .samples
        .map(|n| validate_preconditions_sampled(&process, &model.contexts, 0, n, p.seed));
    let exhaustive = if spec.exhaustive {
        Some(dynamics::a_prob_conserved_exhaustively(&process, 0)?)
    } else {
        None
    };

    // Empirical driving mode: θ_C(t) tracked from the process.
    let mut tracks = Vec::new();
    let mut track_errors = serde_json::Map::new();
    for c in &model.contexts {
        match phase_track(&process, c) {
            Ok(track) => tracks.push((c.label().to_string(), track)),
            Err(e) => {
                track_errors.insert(c.label().to_string(), json!(e.to_string()));
            }
        }
    }
    let empirical = if tracks.len() == model.contexts.len() && process.len() >= 3 {
        let law = PhaseLaw::per_context(
            tracks
                .iter()
                .map(|(l, t)| (l.clone(), Increment::Tabulated(t.clone()))),
        );
        let labels: Vec<&str> = tracks.iter().map(|(l, _)| l.as_str()).collect();
        let class = classify_dynamics(&law, &labels, process.times(), p.h)?.with_preconditions(
            pre.trig_preserved,
            pre.a_prob_conserved,
            pre.transition_conserved,
        );
        json!(class)
    } else {
        Value::Null
    };

    let first = &model.contexts[0];
    let track0 = tracks
        .iter()
        .find(|(l, _)| l == first.label())
        .map(|(_, t)| t);
    let mut rows = Vec::with_capacity(process.len());
    for (k, &t) in process.times().iter().enumerate() {
        let data = process.contextual_data_at(k, first)?;
        let lambda = lambda_coefficient(&data, 0).unwrap_or(f64::NAN);
        let (theta, xi) = match track0 {
            Some(tr) => (tr.theta()[k], tr.theta()[k] - tr.theta()[0]),
            None => (f64::NAN, f64::NAN),
        };
        rows.push(Row {
            t,
            theta,
            lambda,
            xi,
            p_b: data.p_b(),
            p_a: data.p_a(),
        });
    }
    if let Some(s) = &sampled {
        checks.push(Check::flag(
            "sampled_a_probability_conservation",
            s.a_prob_conserved,
        ));
        checks.push(Check::flag(
            "sampled_transition_conservation",
            s.transition_conserved,
        ));
    }

    Ok(Outcome {
        results: json!({
            "atoms": model.space.len(),
            "steps": steps,
            "warnings": warnings,
            "tracked_contexts": model.contexts.iter().map(|c| c.label()).collect::<Vec<_>>(),
            "preconditions": {
                "trig_preserved": pre.trig_preserved,
                "a_prob_conserved": pre.a_prob_conserved,
                "transition_conserved": pre.transition_conserved,
                "max_a_drift": pre.max_a_drift,
                "max_transition_drift": pre.max_transition_drift,
                "a_prob_conserved_all_contexts": exhaustive,
                "sampled": sampled,
                "table": pre.steps,
            },
            "energy": {
                "levels": conservation.levels,
                "statistically_conserved": conservation.conserved,
                "max_drift": conservation.max_drift,
                "nonconstant_trajectories": conservation.nonconstant_trajectories,
                "individually_conserved": conservation.nonconstant_trajectories == 0,
                "table": conservation.table,
            },
            "moving_atoms": process.moving_atoms(),
            "phase_track_errors": track_errors,
            "empirical_dynamics": empirical,
        }),
        table: Some(Table::Series(rows)),
        checks,
    })
}

fn run_ode(sc: &Scenario, p: Params) -> Result<Outcome, Failure> {
    let grid = grid_of(sc, "ode")?;
    let law = law_of(sc, p.h, "ode")?;
    let ctx = sc.context.as_deref();
    let spec = sc.ode.unwrap_or_default();
    let theta0 = spec.theta0.unwrap_or(0.0);
    let step = spec.step.unwrap_or(DEFAULT_STEP);
    let sign = spec
        .sign
        .unwrap_or(if theta0.sin() > 0.0 { -1.0 } else { 1.0 });
    let t0 = grid.t0;
    // Probe once so a law without an analytic rate fails before integrating.
    if law.rate(t0, t0, ctx)?.is_none() {
        return Err(Failure::Validation(
            "phase_law: ode scenarios need an analytic rate".into(),
        ));
    }
    let f = |t: f64| law.rate(t, t0, ctx).ok().flatten().unwrap_or(f64::NAN);
    let points = grid.points();
    let by_theta = solve_theta(&f, theta0, t0, &points, step)?;
    let direct = solve_eabb(&f, theta0.cos(), sign, t0, &points, step)?;
    let gap = by_theta.sup_distance(&direct)?;
    let range = by_theta
        .lambda
        .iter()
        .chain(&direct.lambda)
        .fold(0.0f64, |m, l| m.max(l.abs()));
    let mut checks = vec![
        Check::at_most("cross_method_gap", gap, tolerance::FINITE_DIFFERENCE),
        Check::at_most("lambda_range", range, 1.0 + tolerance::BOUNDARY),
    ];
    let mut closed_form = Value::Null;
    let mut harmonic = Value::Null;
    if law.kind() == LawKind::ConstantRate {
        let rate = f(t0);
        let err = points
            .iter()
            .zip(&by_theta.lambda)
            .map(|(t, l)| (l - (theta0 + rate * (t - t0)).cos()).abs())
            .fold(0.0, f64::max);
        checks.push(Check::at_most(
            "closed_form",
            err,
            tolerance::FINITE_DIFFERENCE,
        ));
        closed_form = json!(err);
        if points.len() >= 3 {
            let r = harmonic_residual(&by_theta, rate)?;
            checks.push(Check::at_most("harmonic_residual", r, 1e-4));
            harmonic = json!({ "omega": rate.abs(), "residual": r });
        }
    }
    let fit = if points.len() >= 16 {
        match schroedinger_detector(&by_theta, p.h) {
            Ok(f) => json!(f),
            Err(e) => json!({ "error": e.to_string() }),
        }
    } else {
        Value::Null
    };
    Ok(Outcome {
        results: json!({
            "theta0": theta0,
            "lambda0": theta0.cos(),
            "sign": sign,
            "step": step,
            "law_kind": law.kind(),
            "samples": points.len(),
            "cross_method_gap": gap,
            "max_abs_lambda": range,
            "closed_form_error": closed_form,
            "harmonic_residual": harmonic,
            "harmonic_fit": fit,
        }),
        table: Some(Table::Trajectories(vec![by_theta, direct])),
        checks,
    })
}
