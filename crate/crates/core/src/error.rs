use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate context: {0}")]
    DegenerateContext(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("variables are not incompatible: cell (b={x}, a={y}) has zero probability")]
    NotIncompatible { x: usize, y: usize },

    #[error("λ undefined: degenerate cell for b-value index {0}")]
    LambdaUndefined(usize),

    #[error("not representable in complex Hilbert space: context is {0}")]
    NotRepresentable(String),

    #[error("Born rule for a unavailable: a-basis is not orthonormal")]
    BornRuleUnavailable,

    #[error("a-basis is not orthonormal (defect {0:e}); unitary evolution needs double stochastic transitions")]
    NonOrthonormalBasis(f64),

    #[error("context label required by context-dependent phase law")]
    MissingContext,

    #[error("unknown context label `{0}`")]
    UnknownContext(String),

    #[error("no generator exists: {0}")]
    NoGenerator(String),

    #[error("phase aliasing at sample {index}: |Δθ| = {jump} ≥ π/2")]
    PhaseAliasing { index: usize, jump: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("hyperbolic initial data: |λ₀| = {0} > 1")]
    HyperbolicInitialData(f64),

    #[error("indeterminate frequency: trajectory is identically zero")]
    IndeterminateFrequency,

    #[error("no perturbation decomposition available on this phase law")]
    NoDecomposition,
}

pub type Result<T> = std::result::Result<T, Error>;
