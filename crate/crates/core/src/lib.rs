//! Variational eigensolvers for light-front meson Hamiltonians.
//!
//! The crate covers the whole pipeline from a basis-function Hamiltonian
//! matrix to hadron observables measured on a simulated quantum register:
//!
//! - [`pauli`]: Pauli strings and operators, Jordan-Wigner and compact
//!   (Hilbert-Schmidt) encodings, qubit-wise commuting groups.
//! - [`blfq`]: basis catalogs, model parameters, basis functions, bundled
//!   Hamiltonians and the exact eigensolver used as the reference.
//! - [`sim`]: statevector / shot-sampled / noisy simulation with readout
//!   mitigation.
//! - [`ansatz`]: hardware-efficient and single-excitation UCC circuits.
//! - [`optim`]: SPSA, Nelder-Mead and parameter-shift gradient optimizers.
//! - [`engine`]: VQE and subspace-search VQE drivers.
//! - [`observables`]: decay constants and parton distribution functions.
//!
//! Qubit 0 is always the least-significant bit of a basis index, and Pauli
//! strings are displayed with the highest-index qubit first.

pub mod ansatz;
pub mod blfq;
pub mod engine;
mod error;
pub mod linalg;
pub mod observables;
pub mod optim;
pub mod pauli;
pub mod rng;
pub mod sim;
pub mod special;

pub use error::{Error, Result};
