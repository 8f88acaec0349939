//! Comparison thresholds shared across modules.
//!
//! Structural identities (probabilities, unitarity, Born's rule for b) are
//! held to near machine precision; law classification on time grids uses a
//! looser threshold, and finite-difference generator residuals looser still.

/// Probability sums, nondegeneracy and conservation under exact set arithmetic.
pub const PROBABILITY: f64 = 1e-12;

/// Unitarity, Born rule for b, invariance of a-probabilities under evolution.
pub const STRUCTURAL: f64 = 1e-12;

/// Orthonormality of the a-basis and Born rule for a.
pub const ORTHONORMAL: f64 = 1e-10;

/// Distance from |λ| = 1 below which a context is flagged degenerate-boundary.
pub const BOUNDARY: f64 = 1e-9;

/// θ₂ − θ₁ = π (mod 2π).
pub const PHASE_CONSTRAINT: f64 = 1e-9;

/// Context independence, cocycle, time-shift and generator constancy checks.
pub const LAW: f64 = 1e-9;

/// Finite-difference residual of the Schrödinger equation.
pub const FINITE_DIFFERENCE: f64 = 1e-6;

/// Minimal violation of additivity for a nonlinearity witness.
pub const WITNESS_MARGIN: f64 = 1e-6;

/// Approximate reversibility/linearity cut: ε̂·T < `APPROXIMATION_FRACTION`·h.
pub const APPROXIMATION_FRACTION: f64 = 0.01;
