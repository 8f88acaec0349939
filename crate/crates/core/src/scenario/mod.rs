//! Scenario files: one pipeline run per file, with a CSV time series and a
//! JSON verification report as outputs.
//!
//! Exit codes: `0` success, `2` invalid scenario or input, `3` context not
//! representable, `4` numerical or output failure (and, under the strict
//! tolerance profile, any failed verification).

mod pipeline;
mod schema;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;

pub use pipeline::{Check, Outcome, Row, Table};
pub use schema::{
    ContextSpec, ContextualDataSpec, GridSpec, Kind, OdeSpec, OutputsSpec, PhaseLawSpec,
    PrespaceModel, PrespaceSpec, Scenario, MAX_GRID_STEPS,
};

use crate::error::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Failure {
    Validation(String),
    Representation(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Representation(_) => 3,
            Failure::Numerical(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Representation(m) | Failure::Numerical(m) => m,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let what = match self {
            Failure::Validation(_) => "invalid scenario",
            Failure::Representation(_) => "representation failure",
            Failure::Numerical(_) => "numerical failure",
        };
        write!(f, "{what}: {}", self.message())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::NotRepresentable(_)
            | Error::BornRuleUnavailable
            | Error::NonOrthonormalBasis(_)
            | Error::HyperbolicInitialData(_) => Failure::Representation(msg),
            Error::NonFinite(_)
            | Error::PhaseAliasing { .. }
            | Error::IndeterminateFrequency
            | Error::NoGenerator(_)
            | Error::NoDecomposition => Failure::Numerical(msg),
            Error::DegenerateContext(_)
            | Error::InvalidInput(_)
            | Error::NotIncompatible { .. }
            | Error::LambdaUndefined(_)
            | Error::MissingContext
            | Error::UnknownContext(_) => Failure::Validation(msg),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Failed verifications are recorded in the report.
    #[default]
    Default,
    /// Failed verifications also make the run fail with exit code 4.
    Strict,
}

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub h: Option<f64>,
    pub profile: Profile,
}

/// Files written by a successful run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSummary {
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub failed_checks: Vec<String>,
}

pub fn load(path: &Path) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Scenario, Failure> {
    toml::from_str(text).map_err(|e| Failure::Validation(e.to_string()))
}

/// Run a scenario file.
pub fn run(path: &Path, options: &RunOptions) -> Result<RunSummary, Failure> {
    let scenario = load(path)?;
    let base = match &options.out_dir {
        Some(dir) => dir.clone(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    run_scenario(&scenario, &base, options, &path.display().to_string())
}

/// Run a parsed scenario; relative output paths are resolved against `base`.
pub fn run_scenario(
    scenario: &Scenario,
    base: &Path,
    options: &RunOptions,
    name: &str,
) -> Result<RunSummary, Failure> {
    let kind = Kind::parse(&scenario.kind).map_err(Failure::Validation)?;
    let seed = options.seed.or(scenario.seed).unwrap_or(0);
    let h = options.h.or(scenario.h).unwrap_or(1.0);
    if !(h > 0.0 && h.is_finite()) {
        return Err(Failure::Validation(format!(
            "h: must be positive and finite, got {h}"
        )));
    }
    let outcome = pipeline::execute(kind, scenario, pipeline::Params { seed, h })?;

    let failed_checks: Vec<String> = outcome
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.clone())
        .collect();
    for name in &failed_checks {
        log::warn!("verification failed: {name}");
    }

    let mut summary = RunSummary {
        failed_checks: failed_checks.clone(),
        ..RunSummary::default()
    };
    let resolve = |p: &Path| {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };

    if let (Some(path), Some(table)) = (&scenario.outputs.csv, &outcome.table) {
        let target = resolve(path);
        write_atomically(&target, &csv_bytes(table))?;
        summary.csv = Some(target);
    }
    if let Some(path) = &scenario.outputs.report {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let report = json!({
            "meta": {
                "tool": env!("CARGO_PKG_NAME"),
                "version": env!("CARGO_PKG_VERSION"),
                "scenario": name,
                "kind": kind,
                "seed": seed,
                "h": h,
                "tolerance_profile": options.profile,
                "timestamp_unix": timestamp,
            },
            "passed": failed_checks.is_empty(),
            "verification": outcome.checks,
            "results": outcome.results,
        });
        let mut bytes = serde_json::to_vec_pretty(&report)
            .map_err(|e| Failure::Numerical(format!("report serialization: {e}")))?;
        bytes.push(b'\n');
        let target = resolve(path);
        write_atomically(&target, &bytes)?;
        summary.report = Some(target);
    }

    if options.profile == Profile::Strict && !failed_checks.is_empty() {
        return Err(Failure::Numerical(format!(
            "verification failed: {}",
            failed_checks.join(", ")
        )));
    }
    Ok(summary)
}

pub const SERIES_HEADER: &str = "t,theta,lambda,xi,pB1,pB2,pA1,pA2";

fn csv_bytes(table: &Table) -> Vec<u8> {
    let mut out = Vec::new();
    match table {
        Table::Series(rows) => {
            writeln!(out, "{SERIES_HEADER}").expect("write to memory");
            for r in rows {
                let cols = [
                    r.t, r.theta, r.lambda, r.xi, r.p_b[0], r.p_b[1], r.p_a[0], r.p_a[1],
                ];
                let line: Vec<String> = cols.iter().map(|v| format!("{v:.16e}")).collect();
                writeln!(out, "{}", line.join(",")).expect("write to memory");
            }
        }
        Table::Trajectories(list) => {
            for (i, tr) in list.iter().enumerate() {
                tr.write_csv(&mut out, i == 0).expect("write to memory");
            }
        }
    }
    out
}

/// Write through a temporary file in the target directory, then rename.
fn write_atomically(target: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let fail = |e: &dyn std::fmt::Display| {
        Failure::Numerical(format!("cannot write {}: {e}", target.display()))
    };
    let dir = match target.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| fail(&e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| fail(&e))?;
    tmp.write_all(bytes).map_err(|e| fail(&e))?;
    tmp.as_file().sync_all().map_err(|e| fail(&e))?;
    tmp.persist(target).map_err(|e| fail(&e.error))?;
    Ok(())
}
