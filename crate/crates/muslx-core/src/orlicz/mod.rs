//! Young functions, isotropic N-functions, modulars, Luxemburg norms and
//! numerical convex conjugation.

mod conjugate;
mod modular;
mod nfunction;
mod young;

pub use conjugate::{
    conjugate, default_dual_grid, fenchel_young_gap, ConjugateTable,
};
pub use modular::{
    holder_defect, luxemburg_norm, luxemburg_norm_slice, modular, modular_slice, qt_pairing,
};
pub use nfunction::{
    check_nfunction_bounds, theta_ratio_diagnostic, NBoundsReport, NFunction, ThetaDiagnostic,
};
pub use young::{
    check_young_axioms, AxiomCheck, GrowthParams, YoungAxiomReport, YoungFunction,
};

use alloc::string::String;

/// Errors from the Orlicz-space layer.
#[derive(Debug, Clone, PartialEq)]
pub enum OrliczError {
    /// A constructor rejected its arguments.
    Rejected(String),
    /// The 1-D sup in the conjugate ran out of bracket: the function does not
    /// grow fast enough relative to the requested dual argument.
    BracketExhausted { x: f64 },
    /// A table was evaluated outside its node coverage.
    OutOfCoverage { x: f64 },
    /// The modular overflowed; the field is not in the space at this scale.
    NonFiniteModular,
    /// No scaling below the cap brings the modular under 1.
    NoFiniteScale,
    /// Dual grid empty or not strictly increasing and positive.
    BadGrid,
    Grid(crate::grid::GridError),
}

impl From<crate::grid::GridError> for OrliczError {
    fn from(e: crate::grid::GridError) -> Self {
        OrliczError::Grid(e)
    }
}

impl core::fmt::Display for OrliczError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            OrliczError::Rejected(why) => write!(f, "rejected at construction: {why}"),
            OrliczError::BracketExhausted { x } => {
                write!(f, "conjugate bracket exhausted at dual argument {x}")
            }
            OrliczError::OutOfCoverage { x } => write!(f, "argument {x} outside table coverage"),
            OrliczError::NonFiniteModular => write!(f, "modular is not finite"),
            OrliczError::NoFiniteScale => write!(f, "no finite Luxemburg scale below cap"),
            OrliczError::BadGrid => write!(f, "dual grid must be nonempty, positive, increasing"),
            OrliczError::Grid(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for OrliczError {}
