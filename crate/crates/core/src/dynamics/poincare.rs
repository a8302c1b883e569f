//! Poincaré sections on the p = 0 hyperplane.
//!
//! Orbits are seeded on the (j̃z, φ) energy shell through the q± roots,
//! integrated, and every p = 0 crossing with ṗ > 0 is localized by
//! bisection on a single clipped Runge-Kutta step until |p| < 1e−10.
//! Regular orbits trace closed curves in the (j̃z, φ) projection; chaotic
//! orbits fill areas.

use super::eom::equations_of_motion;
use super::integrator::{rkf78_step, AdaptiveStepper};
use super::{DynamicsError, TrajectoryConfig};
use crate::model::{Branch, DickeParams, RegularizedPoint};
use serde::{Deserialize, Serialize};

/// |p| accepted at a refined crossing.
pub const CROSSING_TOLERANCE: f64 = 1e-10;

/// One refined section crossing.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Crossing {
    pub t: f64,
    pub jz_tilde: f64,
    pub phi: f64,
    pub q: f64,
    /// Which shell root q matches at this (j̃z, φ).
    pub branch: Branch,
    pub orbit_id: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoincareSection {
    pub epsilon: f64,
    /// Branch the seeds were placed on.
    pub branch: Branch,
    pub crossings: Vec<Crossing>,
    pub n_orbits: usize,
}

/// Generate a section at energy-per-particle `epsilon`, seeding `n_orbits`
/// initial conditions on the requested branch of the p = 0 surface.
///
/// Seeds are spread deterministically over the valid (j̃z, φ) region with a
/// golden-angle sequence, so a given argument set always produces the same
/// section.
pub fn poincare_section(
    params: &DickeParams,
    epsilon: f64,
    branch: Branch,
    n_orbits: usize,
    config: &TrajectoryConfig,
) -> Result<PoincareSection, DynamicsError> {
    config.validate()?;
    let ground = params.ground_state_energy();
    if epsilon < ground {
        return Err(DynamicsError::EmptyShell {
            epsilon,
            ground,
        });
    }

    // Golden-angle spread over the shell, skipping off-shell trials.
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let mut seeds = Vec::with_capacity(n_orbits);
    let mut trial = 0usize;
    while seeds.len() < n_orbits && trial < 100 * n_orbits.max(8) {
        let frac = (trial as f64 + 0.5) / n_orbits.max(8) as f64;
        let jz = -1.0 + 2.0 * (frac % 1.0);
        let phi = (trial as f64 * golden).rem_euclid(std::f64::consts::TAU);
        trial += 1;
        if let Some(pt) = params.shell_point(epsilon, jz, phi, branch)? {
            seeds.push(pt);
        }
    }

    let p = *params;
    let rhs = move |_t: f64, y: &[f64; 4]| {
        equations_of_motion(&p, &RegularizedPoint::from_array(*y))
    };

    let mut section = PoincareSection {
        epsilon,
        branch,
        crossings: Vec::new(),
        n_orbits: seeds.len(),
    };

    for (orbit_id, seed) in seeds.iter().enumerate() {
        let initial = RegularizedPoint::from_phase(seed);
        let e0 = params.energy_regularized(&initial);
        let e_scale = e0.abs().max(1e-8);
        let mut stepper = AdaptiveStepper::new(config);
        let mut t = 0.0;
        let mut y = initial.as_array();
        let mut prev = (t, y);
        let mut crossings_here: Vec<Crossing> = Vec::new();
        let n_chunks = (config.t_max / config.renorm_interval).ceil() as usize;

        for chunk in 1..=n_chunks {
            let t_target = (chunk as f64 * config.renorm_interval).min(config.t_max);
            stepper.advance(&rhs, &mut t, &mut y, t_target, |t_new, y_new| {
                // Sign change of p with rising slope brackets a crossing.
                if prev.1[1] < 0.0 && y_new[1] >= 0.0 {
                    if let Some(c) =
                        refine_crossing(&p, prev.0, &prev.1, t_new - prev.0, epsilon, orbit_id)
                    {
                        crossings_here.push(c);
                    }
                }
                prev = (t_new, *y_new);
            })?;
            let state = RegularizedPoint::from_array(y);
            let e = params.energy_regularized(&state);
            if (e - e0).abs() / e_scale > config.energy_drift_max {
                break;
            }
        }
        section.crossings.append(&mut crossings_here);
    }
    Ok(section)
}

/// Bisection for the crossing time inside one bracketing step, evaluated by
/// re-stepping from the stored left state with a clipped step size.
fn refine_crossing(
    params: &DickeParams,
    t0: f64,
    y0: &[f64; 4],
    dt_bracket: f64,
    epsilon: f64,
    orbit_id: usize,
) -> Option<Crossing> {
    let p = *params;
    let rhs = move |_t: f64, y: &[f64; 4]| {
        equations_of_motion(&p, &RegularizedPoint::from_array(*y))
    };
    let p_at = |dt: f64| -> [f64; 4] {
        if dt == 0.0 {
            *y0
        } else {
            rkf78_step(&rhs, t0, y0, dt).0
        }
    };
    let (mut lo, mut hi) = (0.0f64, dt_bracket);
    if p_at(hi)[1] < 0.0 {
        return None;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if p_at(mid)[1] < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 * dt_bracket.max(1e-6) {
            break;
        }
    }
    let state = RegularizedPoint::from_array(p_at(hi));
    if state.p.abs() > CROSSING_TOLERANCE {
        return None;
    }
    // ṗ > 0 by construction of the bracket; identify the shell root.
    let phase = state.to_phase();
    let branch = match params.q_branches(epsilon, phase.jz_tilde, phase.phi) {
        Ok(Some(roots)) => {
            if (phase.q - roots.plus).abs() <= (phase.q - roots.minus).abs() {
                Branch::Plus
            } else {
                Branch::Minus
            }
        }
        // Drift can push a refined point marginally off shell; keep it
        // with the nearest-branch guess from the sign of q + 2γc/ω.
        _ => Branch::Plus,
    };
    Some(Crossing {
        t: t0 + hi,
        jz_tilde: phase.jz_tilde,
        phi: phase.phi,
        q: phase.q,
        branch,
        orbit_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(t_max: f64) -> TrajectoryConfig {
        TrajectoryConfig::default().with_t_max(t_max)
    }

    #[test]
    fn empty_shell_is_rejected() {
        let params = DickeParams::resonant(2.0, 40.0).unwrap();
        match poincare_section(&params, -3.0, Branch::Plus, 4, &config(10.0)) {
            Err(DynamicsError::EmptyShell { .. }) => {}
            other => panic!("expected empty shell, got {other:?}"),
        }
    }

    #[test]
    fn crossings_satisfy_section_conditions() {
        let params = DickeParams::resonant(2.0, 40.0).unwrap();
        let section =
            poincare_section(&params, -1.5, Branch::Plus, 6, &config(300.0)).unwrap();
        assert!(!section.crossings.is_empty());
        for c in &section.crossings {
            let pt = crate::model::PhasePoint::new(c.q, 0.0, c.jz_tilde, c.phi);
            let e = params.classical_energy(&pt);
            assert!(
                (e - section.epsilon).abs() < 1e-7,
                "crossing off shell: e = {e}, ε = {}",
                section.epsilon
            );
        }
    }

    #[test]
    fn regular_energy_yields_many_curve_points() {
        // ε = −1.8 is dominated by regular orbits: every orbit keeps
        // crossing the section, so each seed contributes many points.
        let params = DickeParams::resonant(2.0, 40.0).unwrap();
        let section =
            poincare_section(&params, -1.8, Branch::Plus, 5, &config(400.0)).unwrap();
        let per_orbit = section.crossings.len() as f64 / section.n_orbits as f64;
        assert!(per_orbit > 10.0, "expected dense sections, got {per_orbit}");
    }

    #[test]
    fn harmonic_limit_crossings_repeat_at_fixed_point() {
        // γ = 0 with the spin at a J_z turning orbit: (q, p) oscillates and
        // each return to p = 0 (rising) lands on the same q, so the section
        // of a periodic orbit collapses onto isolated points.
        let params = DickeParams::new(1.0, 1.0, 0.0, 10.0).unwrap();
        let section =
            poincare_section(&params, 0.3, Branch::Plus, 1, &config(120.0)).unwrap();
        assert!(section.crossings.len() > 10);
        let q0 = section.crossings[0].q;
        for c in &section.crossings {
            assert!(
                (c.q - q0).abs() < 1e-6,
                "periodic orbit crossing moved: {} vs {}",
                c.q,
                q0
            );
        }
    }
}
