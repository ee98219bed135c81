//! Symmetric simulation of asymmetric quantum measurements over finite groups.

// Matrix code reads more clearly with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod asymmetry;
pub mod engine;
pub mod error;
pub mod exec;
pub mod grouprep;
pub mod matcore;
pub mod noprog;
pub mod random;
pub mod simulate;
pub mod symmetry;

pub use engine::{Certificate, SolverOptions};
pub use error::{Error, Result};
pub use exec::Execution;
pub use grouprep::{FiniteGroup, ProjectiveRep};
pub use matcore::{ComplexMatrix, Povm, ProjectiveObservable, QState, C64};
pub use simulate::{Mode, SimulationInstance, SimulationResult};
