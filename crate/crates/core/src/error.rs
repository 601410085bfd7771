//! Error taxonomy shared by every module in the crate.
//!
//! Errors split into two broad groups, and the CLI maps them onto exit
//! codes along the same line: *rejected input* (bad parameters, energies
//! outside the admissible interval, malformed profiles) and *numerical
//! failure* (brackets that cannot be established, tolerances that cannot
//! be met, orbits that fail to close, inversion targets that no energy
//! attains).

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong below the CLI layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Model or option validation failed (n < 3, R ≤ 0, grids of size 0, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An energy was requested outside the open admissible interval.
    #[error("energy {energy} outside the admissible range (0, {max})")]
    EnergyOutOfRange { energy: f64, max: f64 },

    /// A sign-change bracket for a root could not be established or shrank
    /// without converging.
    #[error("root bracketing failed: {0}")]
    BracketFailure(String),

    /// Adaptive quadrature hit its refinement ceiling before reaching the
    /// requested tolerance.
    #[error("quadrature tolerance not reached: estimated error {estimate:e} exceeds {tolerance:e}")]
    AccuracyNotReached { estimate: f64, tolerance: f64 },

    /// A period inversion target sits at or below the small-amplitude limit
    /// period, which no orbit of positive amplitude attains.
    #[error("target period {target} at or below the small-amplitude limit {limit}")]
    TargetBelowMinimum { target: f64, limit: f64 },

    /// A period inversion target falls outside the range the period map
    /// attains on the admissible energy interval (after the energy cutoff).
    #[error("target period {target} outside the attainable range ({lo}, {hi})")]
    TargetUnattainable { target: f64, lo: f64, hi: f64 },

    /// The period map does not depend on the energy, so inversion is
    /// ill-posed (the n = 4 family).
    #[error("isochronous period map: every energy yields the same period, no energy singles out {target}")]
    Isochronous { target: f64 },

    /// An orbit failed to return to its initial state after one period.
    #[error("orbit failed to close: distance {distance:e} exceeds tolerance {tolerance:e}")]
    NonClosure { distance: f64, tolerance: f64 },

    /// A warping function or orbit coordinate left the positive half-line.
    #[error("positivity violation: {0}")]
    PositivityViolation(String),

    /// Codazzi tensor fields need a nonzero prescribed trace.
    #[error("zero trace: the Codazzi tensor field family degenerates at c = 0")]
    ZeroTrace,

    /// A sampled profile failed structural validation (too short, not
    /// uniformly sampled, not periodic, ...).
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
}

impl Error {
    /// True when the error reports rejected input rather than a numerical
    /// failure encountered during an otherwise well-posed computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::EnergyOutOfRange { .. }
                | Error::ZeroTrace
                | Error::InvalidProfile(_)
        )
    }
}
