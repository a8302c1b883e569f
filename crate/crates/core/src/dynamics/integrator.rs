//! Embedded Runge-Kutta-Fehlberg 7(8) stepper with PI step-size control.
//!
//! The classical 13-stage Fehlberg pair (NASA TR R-287, 1968). The step is
//! propagated with the 8th-order solution; the embedded 7th-order solution
//! provides the error estimate, which for this pair reduces to
//! (41/840)(k₀ + k₁₀ − k₁₁ − k₁₂)h. Non-symplectic, but at tolerances of
//! 1e−12 the secular energy drift stays below 1e−8 over 10⁴–10⁵ time units,
//! which is what the trajectory-based chaos measures require.

use super::{DynamicsError, TrajectoryConfig};
use crate::model::{DickeParams, RegularizedPoint};

const STAGES: usize = 13;

/// Nodes c_i.
const C: [f64; STAGES] = [
    0.0,
    2.0 / 27.0,
    1.0 / 9.0,
    1.0 / 6.0,
    5.0 / 12.0,
    1.0 / 2.0,
    5.0 / 6.0,
    1.0 / 6.0,
    2.0 / 3.0,
    1.0 / 3.0,
    1.0,
    0.0,
    1.0,
];

/// Runge-Kutta matrix a_ij (row i = stage, lower triangular).
const A: [[f64; STAGES - 1]; STAGES] = {
    let mut a = [[0.0; STAGES - 1]; STAGES];
    a[1][0] = 2.0 / 27.0;
    a[2][0] = 1.0 / 36.0;
    a[2][1] = 1.0 / 12.0;
    a[3][0] = 1.0 / 24.0;
    a[3][2] = 1.0 / 8.0;
    a[4][0] = 5.0 / 12.0;
    a[4][2] = -25.0 / 16.0;
    a[4][3] = 25.0 / 16.0;
    a[5][0] = 1.0 / 20.0;
    a[5][3] = 1.0 / 4.0;
    a[5][4] = 1.0 / 5.0;
    a[6][0] = -25.0 / 108.0;
    a[6][3] = 125.0 / 108.0;
    a[6][4] = -65.0 / 27.0;
    a[6][5] = 125.0 / 54.0;
    a[7][0] = 31.0 / 300.0;
    a[7][4] = 61.0 / 225.0;
    a[7][5] = -2.0 / 9.0;
    a[7][6] = 13.0 / 900.0;
    a[8][0] = 2.0;
    a[8][3] = -53.0 / 6.0;
    a[8][4] = 704.0 / 45.0;
    a[8][5] = -107.0 / 9.0;
    a[8][6] = 67.0 / 90.0;
    a[8][7] = 3.0;
    a[9][0] = -91.0 / 108.0;
    a[9][3] = 23.0 / 108.0;
    a[9][4] = -976.0 / 135.0;
    a[9][5] = 311.0 / 54.0;
    a[9][6] = -19.0 / 60.0;
    a[9][7] = 17.0 / 6.0;
    a[9][8] = -1.0 / 12.0;
    a[10][0] = 2383.0 / 4100.0;
    a[10][3] = -341.0 / 164.0;
    a[10][4] = 4496.0 / 1025.0;
    a[10][5] = -301.0 / 82.0;
    a[10][6] = 2133.0 / 4100.0;
    a[10][7] = 45.0 / 82.0;
    a[10][8] = 45.0 / 164.0;
    a[10][9] = 18.0 / 41.0;
    a[11][0] = 3.0 / 205.0;
    a[11][5] = -6.0 / 41.0;
    a[11][6] = -3.0 / 205.0;
    a[11][7] = -3.0 / 41.0;
    a[11][8] = 3.0 / 41.0;
    a[11][9] = 6.0 / 41.0;
    a[12][0] = -1777.0 / 4100.0;
    a[12][3] = -341.0 / 164.0;
    a[12][4] = 4496.0 / 1025.0;
    a[12][5] = -289.0 / 82.0;
    a[12][6] = 2193.0 / 4100.0;
    a[12][7] = 51.0 / 82.0;
    a[12][8] = 33.0 / 164.0;
    a[12][9] = 12.0 / 41.0;
    a[12][11] = 1.0;
    a
};

/// 8th-order weights (propagating solution).
const B8: [f64; STAGES] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    0.0,
    41.0 / 840.0,
    41.0 / 840.0,
];

/// A single fixed-size RKF78 step. Returns the 8th-order update and the
/// embedded error estimate per component.
pub(crate) fn rkf78_step<const D: usize, F>(f: &F, t: f64, y: &[f64; D], h: f64) -> ([f64; D], [f64; D])
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let mut k = [[0.0; D]; STAGES];
    k[0] = f(t, y);
    for s in 1..STAGES {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..D {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = f(t + C[s] * h, &ys);
    }
    let mut out = *y;
    for (s, ks) in k.iter().enumerate() {
        let b = B8[s];
        if b != 0.0 {
            for i in 0..D {
                out[i] += h * b * ks[i];
            }
        }
    }
    let mut err = [0.0; D];
    for i in 0..D {
        err[i] = (41.0 / 840.0) * h * (k[0][i] + k[10][i] - k[11][i] - k[12][i]);
    }
    (out, err)
}

/// Adaptive driver. Advances `y` from `t` to exactly `t_end`, calling
/// `on_step` after every accepted step. `on_step` may inspect but not
/// modify the state.
pub(crate) struct AdaptiveStepper {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h: f64,
}

impl AdaptiveStepper {
    pub fn new(config: &TrajectoryConfig) -> Self {
        Self {
            rel_tol: config.rel_tol,
            abs_tol: config.abs_tol,
            h: config.dt_init,
        }
    }

    /// Integrate to `t_end`, hitting it exactly (the final step is clipped).
    pub fn advance<const D: usize, F>(
        &mut self,
        f: &F,
        t: &mut f64,
        y: &mut [f64; D],
        t_end: f64,
        mut on_step: impl FnMut(f64, &[f64; D]),
    ) -> Result<(), DynamicsError>
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
    {
        let h_min = 1e-14 * t_end.abs().max(1.0);
        while *t < t_end {
            let mut h = self.h.min(t_end - *t);
            loop {
                let (y_new, err) = rkf78_step(f, *t, y, h);
                let mut err_norm = 0.0f64;
                for i in 0..D {
                    let scale = self.abs_tol + self.rel_tol * y[i].abs().max(y_new[i].abs());
                    err_norm = err_norm.max((err[i] / scale).abs());
                }
                if err_norm <= 1.0 {
                    *t += h;
                    *y = y_new;
                    // Grow cautiously; the pair is order 8 so exponent 1/8.
                    let grow = if err_norm > 0.0 {
                        (0.9 * err_norm.powf(-1.0 / 8.0)).min(4.0)
                    } else {
                        4.0
                    };
                    self.h = (h * grow).min(1.0e2);
                    on_step(*t, y);
                    break;
                }
                h *= (0.9 * err_norm.powf(-1.0 / 8.0)).max(0.1);
                if h < h_min {
                    return Err(DynamicsError::StepUnderflow { t: *t, h });
                }
            }
        }
        Ok(())
    }
}

/// A sampled trajectory with its energy record.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<RegularizedPoint>,
    pub energies: Vec<f64>,
    /// Largest |E(t) − E(0)| / |E(0)| observed.
    pub max_drift: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> RegularizedPoint {
        *self.states.last().expect("trajectory has at least the initial state")
    }
}

/// Integrate Hamilton's equations from `initial` over `config.t_max`,
/// sampling every `config.renorm_interval`, and abort if the relative
/// energy drift exceeds `config.energy_drift_max`.
pub fn integrate(
    params: &DickeParams,
    initial: &RegularizedPoint,
    config: &TrajectoryConfig,
) -> Result<Trajectory, DynamicsError> {
    config.validate()?;
    let p = *params;
    let rhs = move |_t: f64, y: &[f64; 4]| {
        super::eom::equations_of_motion(&p, &RegularizedPoint::from_array(*y))
    };
    let e0 = params.energy_regularized(initial);
    let e_scale = e0.abs().max(1e-8);

    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![*initial],
        energies: vec![e0],
        max_drift: 0.0,
    };
    let mut stepper = AdaptiveStepper::new(config);
    let mut t = 0.0;
    let mut y = initial.as_array();
    let n_chunks = (config.t_max / config.renorm_interval).ceil() as usize;
    for chunk in 1..=n_chunks {
        let t_target = (chunk as f64 * config.renorm_interval).min(config.t_max);
        stepper.advance(&rhs, &mut t, &mut y, t_target, |_, _| {})?;
        let state = RegularizedPoint::from_array(y);
        let e = params.energy_regularized(&state);
        let drift = (e - e0).abs() / e_scale;
        traj.max_drift = traj.max_drift.max(drift);
        if drift > config.energy_drift_max {
            return Err(DynamicsError::EnergyDrift {
                t,
                drift,
                max: config.energy_drift_max,
            });
        }
        traj.times.push(t);
        traj.states.push(state);
        traj.energies.push(e);
    }
    Ok(traj)
}
