use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    Param { name: &'static str, reason: String },
    /// Imaginary residue of a physical-space evaluation is too large.
    NotEven { residual: f64 },
    /// Grid too coarse for the kernel cutoff.
    UnderResolved { points: usize, needed: usize },
    /// Kernels or potentials built on incompatible tori.
    CutoffMismatch,
    /// Collapsed multigraph violates the degree rules.
    Degree(String),
    /// Every importance weight underflowed.
    Underflow,
    /// A quantity that must be real came out complex.
    ImaginaryResidue { residual: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Param { name, reason: reason.into() }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Param { name, reason } => write!(f, "invalid `{name}`: {reason}"),
            Error::NotEven { residual } => {
                write!(f, "kernel is not even: imaginary residue {residual:.3e}")
            }
            Error::UnderResolved { points, needed } => {
                write!(f, "grid with {points} points per axis under-resolves cutoff (need {needed})")
            }
            Error::CutoffMismatch => f.write_str("objects live on different tori"),
            Error::Degree(s) => write!(f, "degree violation: {s}"),
            Error::ImaginaryResidue { residual } => write!(f, "imaginary residue {residual:.3e} on a real quantity"),
            Error::Underflow => f.write_str("all importance weights underflowed; reduce z or coupling"),
        }
    }
}

impl core::error::Error for Error {}
