use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A sideband pulse would move amplitude past the top Fock level.
    TruncationLeakage { n_max: usize, amplitude: f64 },
    /// The hierarchy truncation cannot represent the initial Fock state.
    TruncationTooSmall { truncation: usize, n0: usize },
    /// The adaptive integrator needed a step below its floor.
    StepSizeUnderflow { t: f64, h: f64 },
    /// The Gaussian P function collapsed to a delta (zero dispersion).
    DegenerateDispersion { dispersion: f64 },
    /// Argument outside the domain of a function.
    Domain { what: &'static str, value: f64 },
    /// Fock indices too large for the displacement matrix element.
    Overflow { m: usize, l: usize },
    /// The oracle state put too much weight on the top Fock levels.
    TailLeakage { t: f64, mass: f64 },
    /// A density matrix lost positivity beyond tolerance.
    NotPositive { t: f64 },
    /// Parameters that violate a type invariant.
    InvalidParameter { name: &'static str, reason: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::TruncationLeakage { n_max, amplitude } => write!(
                f,
                "amplitude {amplitude:e} at top Fock level {n_max} would leak out of the truncated space"
            ),
            Error::TruncationTooSmall { truncation, n0 } => write!(
                f,
                "hierarchy truncation {truncation} too small for initial Fock state n0={n0}"
            ),
            Error::StepSizeUnderflow { t, h } => {
                write!(f, "step size underflow at t={t:e} s (h={h:e} s)")
            }
            Error::DegenerateDispersion { dispersion } => write!(
                f,
                "dispersion {dispersion:e} too small: P function is a delta, use moment formulas"
            ),
            Error::Domain { what, value } => write!(f, "{what}: argument {value} out of domain"),
            Error::Overflow { m, l } => {
                write!(f, "displacement matrix element <{m}|D|{l}> exceeds index guard")
            }
            Error::TailLeakage { t, mass } => write!(
                f,
                "top Fock levels hold {mass:e} of the population at t={t:e} s; raise n_max"
            ),
            Error::NotPositive { t } => write!(f, "density matrix not positive at t={t:e} s"),
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
        }
    }
}

impl core::error::Error for Error {}
