//! Exact diagonalization of the long-range critical lattice models on a ring
//! with Jastrow-type analytic ground states, and of their nearest- and
//! next-nearest-neighbour truncations.
//!
//! The crate assembles the Hamiltonians in the fixed-particle-number sector,
//! evaluates the analytic ground state, finds low-lying eigenpairs with a
//! thick-restart Lanczos solver and computes the quantities used to compare
//! models: overlaps, entanglement entropies, density correlations, normalized
//! spectra and excited-state overlaps.

pub mod analytic;
pub mod basis;
pub mod cache;
pub mod config;
pub mod eigensolve;
mod error;
pub mod hamiltonian;
pub mod lattice;
pub mod observables;
pub mod optimize;
pub mod reference;
pub mod state;

pub use basis::{Configuration, SectorBasis};
pub use eigensolve::{lowest_k, EigenResult, LanczosOptions};
pub use error::{Error, Result};
pub use hamiltonian::{Hamiltonian, LinearOperator, ModelKind, ModelSpec, SparseOperator};
pub use state::StateVector;
