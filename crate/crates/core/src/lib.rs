//! Contextual classical probability represented in a two-dimensional complex
//! Hilbert space.
//!
//! The pipeline runs from a finite Kolmogorov "prespace" ([`prespace`])
//! through coefficients of statistical disturbance and probabilistic phases
//! ([`interference`]) to Born-rule amplitudes and operators ([`hilbert`]),
//! then to context-driven unitary dynamics and its classification
//! ([`dynamics`]) and the ODE characterizations of the disturbance
//! coefficient ([`lambda_ode`]). [`scenario`] drives all of it from scenario
//! files for the `qlprob` command-line tool.

pub mod dynamics;
pub mod error;
pub mod generators;
pub mod hilbert;
pub mod interference;
pub mod lambda_ode;
pub mod linalg;
pub mod prespace;
pub mod scenario;
pub mod tolerance;

pub use error::{Error, Result};
pub use hilbert::{represent, Observable, ObservableOperator, QLState};
pub use interference::{classify_context, ContextClass, ContextualData, InterferenceReport};
