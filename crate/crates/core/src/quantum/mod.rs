//! Quantum side: Hamiltonian assembly in the efficient coherent basis,
//! dense diagonalization, convergence certification, and parity labels.

pub mod cache;
pub mod displaced;
pub mod hamiltonian;
pub mod linalg;
pub mod spectrum;

pub use hamiltonian::{
    build_ecb_hamiltonian, build_fock_hamiltonian, BasisTag, ECBasisSpec, FockBasisSpec,
    HamiltonianMatrix,
};
pub use linalg::{eigh_dc, eigvals_dc, EigenDecomposition};
pub use spectrum::{
    convergence_check, diagonalize, parity_label, suggest_n_max, Parity, Spectrum,
    SpectrumOptions,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error("matrix is not square: {rows}×{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("LAPACK {routine} failed with info = {info}")]
    LapackFailed { routine: &'static str, info: i32 },
    #[error("Hamiltonian asymmetry {max_relative:.3e} exceeds 1e-12")]
    Asymmetric { max_relative: f64 },
    #[error("invalid basis: {0}")]
    InvalidBasis(&'static str),
    #[error("eigen residual {residual:.3e} exceeds {tol:.3e}")]
    Residual { residual: f64, tol: f64 },
    #[error("spectrum cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
