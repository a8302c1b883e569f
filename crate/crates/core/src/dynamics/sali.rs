//! Smaller Alignment Index (SALI) chaos detection.
//!
//! Two initially orthonormal deviation vectors are propagated with the
//! tangent flow and normalized at every renormalization time. Their
//! alignment index
//!
//! ```text
//! SALI(t) = min(‖v̂₁ + v̂₂‖, ‖v̂₁ − v̂₂‖)
//! ```
//!
//! decays exponentially for chaotic orbits (both vectors collapse onto the
//! local most-expanding direction) and oscillates around a positive value
//! for regular ones (Skokos 2001).

use super::eom::{equations_of_motion, jacobian, jacobian_times};
use super::integrator::AdaptiveStepper;
use super::{DynamicsError, TrajectoryConfig};
use crate::model::{DickeParams, RegularizedPoint};
use serde::{Deserialize, Serialize};

/// Threshold below which an orbit is declared chaotic.
pub const SALI_CHAOS_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitClass {
    Regular,
    Chaotic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaliResult {
    /// SALI at the end of the run (or at the chaos-threshold crossing).
    pub sali_final: f64,
    /// Exponential decay rate fitted to ln SALI(t); ≈ 0 for regular orbits.
    pub decay_rate: f64,
    pub classification: OrbitClass,
    /// Time at which the run stopped.
    pub t_final: f64,
}

/// Evolve two deviation vectors and classify the orbit by SALI decay.
pub fn sali(
    params: &DickeParams,
    initial: &RegularizedPoint,
    config: &TrajectoryConfig,
) -> Result<SaliResult, DynamicsError> {
    config.validate()?;
    let p = *params;
    let rhs = move |_t: f64, y: &[f64; 12]| {
        let state = RegularizedPoint::from_array([y[0], y[1], y[2], y[3]]);
        let f = equations_of_motion(&p, &state);
        let jac = jacobian(&p, &state);
        let d1 = jacobian_times(&jac, &[y[4], y[5], y[6], y[7]]);
        let d2 = jacobian_times(&jac, &[y[8], y[9], y[10], y[11]]);
        [
            f[0], f[1], f[2], f[3], d1[0], d1[1], d1[2], d1[3], d2[0], d2[1], d2[2], d2[3],
        ]
    };

    let e0 = params.energy_regularized(initial);
    let e_scale = e0.abs().max(1e-8);
    let x0 = initial.as_array();
    let mut y = [
        x0[0], x0[1], x0[2], x0[3], // state
        1.0, 0.0, 0.0, 0.0, // v1
        0.0, 1.0, 0.0, 0.0, // v2
    ];

    let mut stepper = AdaptiveStepper::new(config);
    let mut t = 0.0;
    let mut log_sali: Vec<(f64, f64)> = Vec::new();
    let n_chunks = (config.t_max / config.renorm_interval).ceil() as usize;
    let mut sali_now = f64::NAN;

    for chunk in 1..=n_chunks {
        let t_target = (chunk as f64 * config.renorm_interval).min(config.t_max);
        stepper.advance(&rhs, &mut t, &mut y, t_target, |_, _| {})?;

        let n1 = norm4(&y[4..8]);
        let n2 = norm4(&y[8..12]);
        for v in &mut y[4..8] {
            *v /= n1;
        }
        for v in &mut y[8..12] {
            *v /= n2;
        }
        let mut plus = 0.0;
        let mut minus = 0.0;
        for i in 0..4 {
            let a = y[4 + i];
            let b = y[8 + i];
            plus += (a + b) * (a + b);
            minus += (a - b) * (a - b);
        }
        sali_now = plus.sqrt().min(minus.sqrt());
        log_sali.push((t, sali_now.max(1e-300).ln()));

        let state = RegularizedPoint::from_array([y[0], y[1], y[2], y[3]]);
        let e = params.energy_regularized(&state);
        let drift = (e - e0).abs() / e_scale;
        if drift > config.energy_drift_max {
            return Err(DynamicsError::EnergyDrift {
                t,
                drift,
                max: config.energy_drift_max,
            });
        }

        if sali_now < SALI_CHAOS_THRESHOLD {
            break;
        }
    }

    let chaotic = sali_now < SALI_CHAOS_THRESHOLD;
    // Fit d(ln SALI)/dt on the decaying stretch (the second half of the
    // record up to the stop time) by least squares.
    let half = log_sali.len() / 2;
    let seg = &log_sali[half.saturating_sub(1)..];
    let decay_rate = if seg.len() >= 2 {
        -slope(seg)
    } else {
        0.0
    };

    Ok(SaliResult {
        sali_final: sali_now,
        decay_rate,
        classification: if chaotic {
            OrbitClass::Chaotic
        } else {
            OrbitClass::Regular
        },
        t_final: t,
    })
}

fn norm4(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x, sy + y));
    let (mx, my) = (sx / n, sy / n);
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in points {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Branch;

    fn table_point(eps: f64, jz: f64) -> (DickeParams, RegularizedPoint) {
        let params = DickeParams::resonant(2.0, 80.0).unwrap();
        let pt = params
            .shell_point(eps, jz, 0.0, Branch::Plus)
            .unwrap()
            .expect("point on shell");
        (params, RegularizedPoint::from_phase(&pt))
    }

    #[test]
    fn chaotic_point_decays() {
        let (params, x0) = table_point(-0.5, 0.075);
        let config = TrajectoryConfig::default().with_t_max(500.0);
        let r = sali(&params, &x0, &config).unwrap();
        assert_eq!(r.classification, OrbitClass::Chaotic);
        assert!(r.sali_final < SALI_CHAOS_THRESHOLD);
        assert!(r.decay_rate > 0.0);
        assert!(r.t_final < 500.0, "chaotic SALI should cross early");
    }

    #[test]
    fn regular_point_stays_aligned() {
        let (params, x0) = table_point(-1.8, -0.495);
        let config = TrajectoryConfig::default().with_t_max(1000.0);
        let r = sali(&params, &x0, &config).unwrap();
        assert_eq!(r.classification, OrbitClass::Regular);
        assert!(r.sali_final >= SALI_CHAOS_THRESHOLD);
        assert!(r.sali_final <= 2.0f64.sqrt() + 1e-9);
    }

    #[test]
    fn decoupled_limit_is_regular() {
        let params = DickeParams::new(1.0, 1.0, 0.0, 20.0).unwrap();
        let x0 = RegularizedPoint::new(1.0, 0.0, 0.7, -0.4);
        let config = TrajectoryConfig::default().with_t_max(500.0);
        let r = sali(&params, &x0, &config).unwrap();
        assert_eq!(r.classification, OrbitClass::Regular);
    }
}
