//! Context-driven unitary dynamics in the a-basis.
//!
//! A phase law `ξ_C(t, t₀)` moves the second a-basis vector,
//! `e₂(t) = e^{iξ_C(t,t₀)} e₂(t₀)`, which acts on the wave function as
//! `Û(t, t₀) = diag(1, e^{iξ})`. The law's properties decide what kind of
//! dynamics this is: independence of the context makes it linear, the cocycle
//! identity makes it deterministic, and time-shift invariance together with
//! continuity gives a one-parameter group with a constant Hamiltonian.

mod classify;
mod conservation;
mod generator;
mod law;
mod propagator;

pub use classify::{
    classify_continuity, classify_determinism, classify_dynamics, classify_linearity,
    classify_time_shift_invariance, thin, uniform_grid, ContinuityReport, DynamicsClassification,
    LawCheck, LinearityReport, SuperpositionWitness, CHECK_POINTS,
};
pub use conservation::{
    a_prob_conserved_exhaustively, energy_process, phase_track, validate_preconditions,
    validate_preconditions_sampled, ConservationReport, ConservationRow, EnergyProcess,
    PreconditionReport, SampledPreconditionReport, StepRecord,
};
pub use generator::{
    approximation_analysis, extract_hamiltonian, group_law_defect, reconstruction_defect,
    schroedinger_residual, ApproximationReport, Generator, TimeDependentGenerator,
};
pub use law::{Clock, Increment, LawKind, Perturbation, PhaseLaw, PhaseTrack, Rate};
pub use propagator::{evolve, propagator, Propagator};
