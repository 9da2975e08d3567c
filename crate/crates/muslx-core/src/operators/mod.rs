//! Monotone fluxes A(t, x, xi), their regularization, truncation families,
//! and sampled checks of the coercivity/monotonicity assumptions.

mod checks;
mod flux;
mod trunc;

pub use checks::{
    bounded_flux_bound, verify_coercivity, verify_monotonicity, CoercivityReport, MStar,
    MonotonicityReport, SampleSpec,
};
pub use flux::{
    double_phase_flux, linear_flux, plaplace_flux, regularize, ExponentField, Flux, SpatialExpr,
};
pub use trunc::TruncationFamily;

use alloc::string::String;

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorError {
    Rejected(String),
}

impl core::fmt::Display for OperatorError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            OperatorError::Rejected(why) => write!(f, "rejected: {why}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for OperatorError {}
