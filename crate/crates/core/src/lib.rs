//! Chaos diagnostics for the Dicke model and the integrable LMG control case.
//!
//! The crate has two legs that meet in phase space:
//!
//! - **Classical**: Hamilton's equations for the coherent-state classical
//!   limit of the Dicke Hamiltonian, largest Lyapunov exponents (Benettin
//!   tangent-map method), SALI, Poincaré sections, and a map of the averaged
//!   Lyapunov exponent over the energy–coupling plane.
//! - **Quantum**: exact diagonalization in an efficient coherent basis (ECB)
//!   of displaced bosons, expansion of Glauber⊗Bloch coherent states on the
//!   eigenbasis, Husimi overlaps, and the participation ratio P_R as a
//!   quantum chaos measure, including its scaling with the atom number.
//!
//! Both legs classify a phase-space point as regular or chaotic: the
//! classical side via Λ > Λ_T = 0.004, the quantum side via P_R/N > 1, and
//! the two classifiers can be compared point by point on energy sections.
//!
//! The Lipkin-Meshkov-Glick model is included as an integrable benchmark
//! where every coherent state stays localized (P_R scaling exponents < 1).


pub mod dynamics;


pub mod model;
pub mod quantum;

pub use model::{Branch, DickeParams, PhasePoint, RegularizedPoint};

/// Numerical tolerance separating regular from chaotic Lyapunov exponents.
pub const LAMBDA_TOLERANCE: f64 = 0.004;

/// Library version recorded in run manifests and cache headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
