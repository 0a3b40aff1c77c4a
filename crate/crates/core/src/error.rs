use num_complex::Complex64;

use crate::polyzero::ZeroMeasure;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("function is not convex near x = {at}")]
    NotConvex { at: f64 },

    #[error(
        "radius {radius} carries an atom of the limit measure; the density is undefined there"
    )]
    AtomRadius { radius: f64 },

    #[error("radius {radius} lies outside the domain (limit {limit})")]
    OutOfDomain { radius: f64, limit: f64 },

    #[error("mass near zero is too heavy: fitted power-law exponent {exponent:.3e}")]
    IntegrabilityViolated { exponent: f64 },

    #[error("measure puts mass {mass} at or beyond R0 = {r0}")]
    MassBeyondR0 { mass: f64, r0: f64 },

    #[error("{0} is a polynomial family; truncation does not apply")]
    NotEntire(String),

    #[error("series tail did not become geometric within {budget} terms")]
    TailNotGeometric { budget: usize },

    #[error("truncation needs {terms} terms, more than the limit of {limit}")]
    SeriesTooLong { terms: usize, limit: usize },

    #[error("root finder left {} of {degree} roots unconverged", unconverged.len())]
    NotConverged {
        partial: Box<ZeroMeasure>,
        unconverged: Vec<Complex64>,
        degree: usize,
    },

    #[error("a zero sits on the contour |z - c| = {radius} after repeated jitter")]
    ZeroOnContour { radius: f64 },

    #[error("degenerate polynomial: {0}")]
    Degenerate(String),

    #[error("incomplete zero set: multiplicities sum to {found}, degree is {degree}")]
    IncompleteZeroSet { found: usize, degree: usize },

    #[error("too few zeros: {found} found, at least {required} needed")]
    TooFewZeros { found: usize, required: usize },

    #[error("no empirical mass inside the comparison disk")]
    EmptyMass,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to rejected input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::TailNotGeometric { .. }
                | Error::SeriesTooLong { .. }
                | Error::NotConverged { .. }
                | Error::ZeroOnContour { .. }
                | Error::Degenerate(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
