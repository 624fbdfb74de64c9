//! Monotone finite-difference solver for
//! `du = F(D^2 u, Du, u, x) dt + (g^{-1}(x) Du, Du) d xi` on a periodic box.

mod fspec;
mod grid;
mod hopf_lax;
mod isaacs;
mod schemes;
mod solve;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::signals::SignalError;

pub use fspec::{BModel, CModel, FKind, FSpec, IsaacsEntry, SigmaModel, Wave};
pub use grid::{Grid, GridFunction};
pub use hopf_lax::hopf_lax_flat;
pub use isaacs::{
    flat_apriori_modulus, isaacs_condition_check, IsaacsCheck, IsaacsOptions, IsaacsRecord,
};
pub use schemes::{
    step_f, step_hamiltonian, FOperator, HamiltonianOperator, DEFAULT_CFL, DEFAULT_MAX_SUBSTEPS,
};
pub use solve::{solve, SliceDiag, SolveOptions, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("CFL substepping exceeded the cap after {substeps} substeps")]
    CflFailure { substeps: usize },
    #[error("non-monotone stencil: {0}")]
    NonMonotoneStencil(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid operator: {0}")]
    InvalidSpec(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}
