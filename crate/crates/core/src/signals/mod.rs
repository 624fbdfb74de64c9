//! Scalar driving signals, their gap functionals and the moduli entering the
//! stability bounds.

mod brownian;
mod gaps;
mod modulus;
mod path;

pub use brownian::{sample_brownian, sample_brownian_levels};
pub use gaps::{delta_gamma_pm, delta_pm, sup_distance, weighted_gap};
pub use modulus::{theta, theta_tilde, Modulus};
pub use path::PathSignal;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SignalError {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("horizon {requested} exceeds signal horizon {available}")]
    HorizonMismatch { requested: f64, available: f64 },
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error(
        "theta-tilde is infinite: uncapped modulus with slope {lipschitz} > gamma/2 = {half_gamma}"
    )]
    ThetaTildeInfinite { lipschitz: f64, half_gamma: f64 },
    #[error("signal csv line {line}: {message}")]
    Parse { line: usize, message: String },
}
