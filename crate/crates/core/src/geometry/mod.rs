//! Riemannian energy, distance and geodesic shooting for quadratic
//! Hamiltonians `H(x, p) = (g^{-1}(x) p, p)`.

mod flow;
mod metric;
mod probe;
mod shooting;

pub use flow::{
    endpoint_map, geodesic_flow, geodesic_flow_with_tangent, tangent_flow, Flow, DEFAULT_STEPS,
    DRIFT_SCALE,
};
pub use metric::{
    christoffel, hamiltonian, InverseJet, MetricBounds, MetricFamily, MetricField, ScalarField,
    Term, DEFAULT_DOMAIN_RADIUS,
};
pub use probe::{probe_injectivity, GeometryReport, ProbeOptions, ProbePair};
pub use shooting::{EnergyHessian, Shooter, ShootingOptions, ShootingResult};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("step count must be at least 1")]
    InvalidSteps,
    #[error("hamiltonian drift {drift:e} exceeds budget {budget:e}")]
    DriftExceeded { drift: f64, budget: f64 },
    #[error("shooting did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("tangent map is singular")]
    SingularTangent,
}
