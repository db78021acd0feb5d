use thiserror::Error;

/// Errors shared across the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside the valid domain: {0}")]
    Domain(String),
    /// The orbit reached 0 exactly; the index map is infinite there.
    #[error("orbit terminated at 0 (index map is infinite)")]
    TerminatedOrbit,
    /// The interval enclosure straddled a branch boundary and the
    /// precision cap was reached before every requested digit was certified.
    #[error("precision exhausted after {certified} certified digits (requested {requested})")]
    PrecisionExhausted { certified: usize, requested: usize },
    #[error("continued fraction needs at least one digit")]
    EmptyDigits,
    #[error("grid too coarse: interpolation error estimate {estimate:.3e} exceeds tolerance {tol:.3e}")]
    GridTooCoarse { estimate: f64, tol: f64 },
    #[error("monotonicity violated by {violation:.3e} at node {node}")]
    MonotonicityViolation { node: usize, violation: f64 },
    #[error("rate fit degenerate: {0}")]
    DegenerateFit(String),
    #[error("quadrature failed to reach tolerance {tol:.3e} (best error {achieved:.3e})")]
    QuadratureFailure { tol: f64, achieved: f64 },
    #[error("empty sample")]
    EmptySample,
    #[error("digit source shorter than requested length {needed}")]
    DegenerateDigits { needed: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
