use thiserror::Error;

/// Errors surfaced by the numerical pipeline.
///
/// Variants are named after the failure they signal so that callers (and the
/// CLI) can map them onto exit codes without string matching.
#[derive(Debug, Error)]
pub enum Error {
    #[error("potential returned a non-finite value at s = {at}")]
    NonFiniteEvaluation { at: f64 },

    #[error("potential failed validation: {0}")]
    InvalidPotential(String),

    #[error("adaptive step collapsed below 1e-14 at t = {at} (potential violates well hypotheses?)")]
    StiffnessFailure { at: f64 },

    #[error("no sign change for {what} on [{lo}, {hi}]")]
    NoBracket { what: &'static str, lo: f64, hi: f64 },

    #[error("pinned volume {v_m} is a non-differentiability point of the isoperimetric profile")]
    KinkAtMass { v_m: f64 },

    #[error("tail of the modified profile is not integrable (measured exponent {exponent})")]
    NonIntegrableTail { exponent: f64 },

    #[error("weight violates tail hypotheses: {0}")]
    HypothesisViolation(String),

    #[error("unsupported canonical set")]
    UnsupportedSet,

    #[error("mass {m} outside the admissible range ({lo}, {hi})")]
    MassOutOfRange { m: f64, lo: f64, hi: f64 },

    #[error("grid does not resolve eps = {eps}: fine spacing {spacing} exceeds eps/10")]
    UnresolvedEpsilon { eps: f64, spacing: f64 },

    #[error("iterate left the locality ball: ||v - v0||_L1 = {distance} > delta = {delta}")]
    LeftLocalityBall { distance: f64, delta: f64 },

    #[error("minimizer did not converge within {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("expected 3 roots of W' + eps*lambda, found {found}")]
    RootCountChanged { found: usize },

    #[error("modified profile construction failed: {0}")]
    ProfileConstruction(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
