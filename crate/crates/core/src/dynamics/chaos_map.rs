//! Shell-averaged Lyapunov map over the coupling–energy plane.
//!
//! For every (γ, ε) cell above the ground-state curve, initial conditions
//! are drawn uniformly in (j̃z, φ, branch) on the p = 0 surface (rejecting
//! off-shell draws) and the mean largest Lyapunov exponent is stored. Cells
//! below the ground state are flagged empty. Each cell owns a counter-mode
//! RNG stream derived from (seed, cell index), so the map is reproducible
//! independently of the parallel schedule.

use super::lyapunov::{lyapunov_exponent_with, EarlyExit};
use super::{DynamicsError, TrajectoryConfig};
use crate::model::{Branch, DickeParams, RegularizedPoint};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellState {
    /// Below the ground-state energy — no classical shell exists.
    Empty,
    /// Mean Λ over the sampled shell points.
    Filled { mean_lambda: f64, n_used: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChaosMapGrid {
    pub gamma_axis: Vec<f64>,
    pub epsilon_axis: Vec<f64>,
    /// Row-major `[i_gamma * epsilon_axis.len() + i_epsilon]`.
    pub cells: Vec<CellState>,
    pub n_samples: usize,
    pub seed: u64,
}

impl ChaosMapGrid {
    pub fn cell(&self, i_gamma: usize, i_epsilon: usize) -> CellState {
        self.cells[i_gamma * self.epsilon_axis.len() + i_epsilon]
    }

    pub fn mean_lambda(&self, i_gamma: usize, i_epsilon: usize) -> Option<f64> {
        match self.cell(i_gamma, i_epsilon) {
            CellState::Empty => None,
            CellState::Filled { mean_lambda, .. } => Some(mean_lambda),
        }
    }
}

/// Build the chaos map. `template` fixes ω, ω₀ and j; the γ of each column
/// replaces the template coupling. Energies are per particle in the raw
/// energy unit.
pub fn chaos_map(
    template: &DickeParams,
    gamma_axis: &[f64],
    epsilon_axis: &[f64],
    n_samples: usize,
    config: &TrajectoryConfig,
    seed: u64,
) -> Result<ChaosMapGrid, DynamicsError> {
    config.validate()?;
    if n_samples == 0 {
        return Err(DynamicsError::InvalidConfig("n_samples must be >= 1"));
    }
    if !is_sorted(gamma_axis) || !is_sorted(epsilon_axis) {
        return Err(DynamicsError::InvalidConfig("axes must be sorted ascending"));
    }

    let n_eps = epsilon_axis.len();
    let indices: Vec<(usize, usize)> = (0..gamma_axis.len())
        .flat_map(|ig| (0..n_eps).map(move |ie| (ig, ie)))
        .collect();

    let cells: Vec<CellState> = indices
        .par_iter()
        .map(|&(ig, ie)| {
            let gamma = gamma_axis[ig];
            let eps = epsilon_axis[ie];
            let params = DickeParams::new(
                template.omega(),
                template.omega0(),
                gamma,
                template.j(),
            )
            .expect("template parameters stay valid under coupling sweep");
            cell_mean(&params, eps, n_samples, config, seed, ig * n_eps + ie)
        })
        .collect();

    Ok(ChaosMapGrid {
        gamma_axis: gamma_axis.to_vec(),
        epsilon_axis: epsilon_axis.to_vec(),
        cells,
        n_samples,
        seed,
    })
}

fn cell_mean(
    params: &DickeParams,
    epsilon: f64,
    n_samples: usize,
    config: &TrajectoryConfig,
    seed: u64,
    cell_index: usize,
) -> CellState {
    if epsilon < params.ground_state_energy() {
        return CellState::Empty;
    }
    let mut rng = cell_rng(seed, cell_index);
    let mut lambdas = Vec::with_capacity(n_samples);
    let mut tries = 0usize;
    while lambdas.len() < n_samples && tries < 200 * n_samples {
        tries += 1;
        let jz = rng.random_range(-1.0..1.0);
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let branch = if rng.random::<bool>() {
            Branch::Plus
        } else {
            Branch::Minus
        };
        let Ok(Some(pt)) = params.shell_point(epsilon, jz, phi, branch) else {
            continue;
        };
        let initial = RegularizedPoint::from_phase(&pt);
        match lyapunov_exponent_with(params, &initial, config, Some(EarlyExit::default())) {
            Ok(r) => lambdas.push(r.lambda),
            // Rare pathological samples (e.g. razor-thin shells) are
            // skipped rather than poisoning the cell.
            Err(_) => continue,
        }
    }
    if lambdas.is_empty() {
        return CellState::Empty;
    }
    let mean = lambdas.iter().sum::<f64>() / lambdas.len() as f64;
    CellState::Filled {
        // The Benettin sum can undershoot zero on strongly regular orbits;
        // the shell average is a nonnegative quantity.
        mean_lambda: mean.max(0.0),
        n_used: lambdas.len(),
    }
}

/// Deterministic per-cell stream: ChaCha keyed by (seed, cell index).
fn cell_rng(seed: u64, cell_index: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(cell_index as u64).to_le_bytes());
    key[16] = 0x9e;
    key[17] = 0x37;
    ChaCha8Rng::from_seed(key)
}

fn is_sorted(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config() -> TrajectoryConfig {
        TrajectoryConfig {
            t_max: 300.0,
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            energy_drift_max: 1e-6,
            ..TrajectoryConfig::default()
        }
    }

    #[test]
    fn cells_below_ground_state_are_empty() {
        let template = DickeParams::resonant(1.0, 20.0).unwrap();
        let map = chaos_map(
            &template,
            &[0.25, 1.0],
            &[-1.9, -0.5],
            2,
            &quick_config(),
            42,
        )
        .unwrap();
        // γ = 0.25 (normal phase): ground state −ω₀ = −1, so ε = −1.9 is empty.
        assert_eq!(map.cell(0, 0), CellState::Empty);
        assert!(matches!(map.cell(0, 1), CellState::Filled { .. }));
        // γ = 1 = 2γ_c: ground state −2.125, both energies above it.
        assert!(matches!(map.cell(1, 0), CellState::Filled { .. }));
    }

    #[test]
    fn map_is_reproducible_for_fixed_seed() {
        let template = DickeParams::resonant(1.0, 20.0).unwrap();
        let run = || {
            chaos_map(&template, &[0.9, 1.0], &[-0.6], 3, &quick_config(), 7).unwrap()
        };
        let (a, b) = (run(), run());
        for (ca, cb) in a.cells.iter().zip(&b.cells) {
            match (ca, cb) {
                (
                    CellState::Filled { mean_lambda: la, .. },
                    CellState::Filled { mean_lambda: lb, .. },
                ) => assert_eq!(la, lb, "map not bit-reproducible"),
                (CellState::Empty, CellState::Empty) => {}
                other => panic!("cell state mismatch: {other:?}"),
            }
        }
    }

    #[test]
    fn axes_must_be_sorted() {
        let template = DickeParams::resonant(1.0, 20.0).unwrap();
        assert!(chaos_map(&template, &[1.0, 0.5], &[-0.5], 1, &quick_config(), 0).is_err());
    }
}
