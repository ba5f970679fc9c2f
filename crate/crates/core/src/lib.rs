//! Invariant tori of commuting Hamiltonian systems at finite Galerkin
//! truncation.
//!
//! A family of `r` Poisson-commuting Hamiltonians in normal form is reduced,
//! for a frequency shift `eps`, to a periodic-orbit problem for one
//! combination `H~`. The periodic orbits are computed by a
//! Lyapunov-Schmidt split into a range equation (contraction) and a
//! finite-dimensional kernel equation (Newton), and their union over the
//! mean angles forms the torus.
//!
//! Modules: [`model`] (phase space, systems), [`resonance`] (Diophantine
//! machinery), [`solver`] (the reduction), [`models`] (wave equation, beam,
//! tables), [`verify`] (independent integration) and [`cli`] (batch runs).

pub mod cli;
pub mod error;
pub mod model;
pub mod models;
pub mod resonance;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use model::{CommutingSystem, PhasePoint, TailMode, TruncationParams, WeightedSeq};
