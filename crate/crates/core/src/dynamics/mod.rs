//! Classical dynamics: Hamilton's equations, Lyapunov exponents, SALI,
//! Poincaré sections, and the chaos map over the energy–coupling plane.
//!
//! All integration runs in the regularized (q, p, Qa, Pa) chart where the
//! equations of motion are pole-free (see [`crate::model::RegularizedPoint`]).
//! The tangent (variational) flow uses the analytic Jacobian of the same
//! chart, co-integrated with the trajectory for Benettin-style exponent
//! estimates.

mod chaos_map;
mod eom;
mod integrator;
mod lyapunov;
mod poincare;
mod sali;

pub use chaos_map::{chaos_map, CellState, ChaosMapGrid};
pub use eom::{equations_of_motion, jacobian};
pub use integrator::{integrate, Trajectory};
pub use lyapunov::{
    classify_binary_lyapunov, lyapunov_exponent, lyapunov_exponent_with, EarlyExit,
    LyapunovResult,
};
pub use poincare::{poincare_section, Crossing, PoincareSection};
pub use sali::{sali, OrbitClass, SaliResult};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("relative energy drift {drift:.3e} exceeded {max:.3e} at t = {t:.3}")]
    EnergyDrift { t: f64, drift: f64, max: f64 },
    #[error("step size underflow (h = {h:.3e}) at t = {t:.3}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("energy {epsilon} lies below the ground state {ground}")]
    EmptyShell { epsilon: f64, ground: f64 },
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// Integration controls shared by all trajectory-based computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryConfig {
    /// Total integration time (units of 1/ω).
    pub t_max: f64,
    /// Initial trial step.
    pub dt_init: f64,
    /// Relative tolerance of the embedded error estimate.
    pub rel_tol: f64,
    /// Absolute tolerance of the embedded error estimate.
    pub abs_tol: f64,
    /// Time between tangent-vector renormalizations (and drift checks).
    pub renorm_interval: f64,
    /// Maximum allowed relative energy drift before aborting.
    pub energy_drift_max: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            t_max: 2.0e4,
            dt_init: 1.0e-3,
            rel_tol: 1.0e-12,
            abs_tol: 1.0e-12,
            renorm_interval: 1.0,
            energy_drift_max: 1.0e-8,
        }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.t_max > 0.0) {
            return Err(DynamicsError::InvalidConfig("t_max must be > 0"));
        }
        if !(self.dt_init > 0.0 && self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(DynamicsError::InvalidConfig(
                "dt_init and tolerances must be > 0",
            ));
        }
        if !(self.renorm_interval > 0.0) {
            return Err(DynamicsError::InvalidConfig("renorm_interval must be > 0"));
        }
        if !(self.energy_drift_max > 0.0) {
            return Err(DynamicsError::InvalidConfig(
                "energy_drift_max must be > 0",
            ));
        }
        Ok(())
    }

    /// Copy with a different total time.
    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }
}
