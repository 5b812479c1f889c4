//! Basis-function model: catalogs, parameters, Hamiltonians and basis functions.

mod basis;
mod catalog;
mod hamiltonian;
mod params;

pub use basis::{chi_l, phi_nm};
pub use catalog::{BasisCatalog, BlfqQuantumNumbers, CatalogEntry};
pub use hamiltonian::{
    builtin_hamiltonian, exact_eigensolve, load_external_hamiltonian, parse_matrix, Encoding,
    HamiltonianSource, SourceLabel, Spectrum,
};
pub use params::ModelParams;
