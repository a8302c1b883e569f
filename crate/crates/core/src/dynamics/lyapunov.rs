//! Largest Lyapunov exponent via the Benettin tangent-map method.
//!
//! A single deviation vector is propagated with the linearized flow
//! δ̇ = J(x(t))·δ alongside the trajectory, renormalized every
//! `renorm_interval`, and Λ = (1/T) Σ ln‖δ‖ over the renormalizations
//! (Benettin, Galgani, Giorgilli & Strelcyn 1980). For regular orbits the
//! running estimate decays towards zero like ln(t)/t; for chaotic orbits it
//! saturates at Λ > 0.

use super::eom::{equations_of_motion, jacobian, jacobian_times};
use super::integrator::AdaptiveStepper;
use super::{DynamicsError, TrajectoryConfig};
use crate::model::{DickeParams, RegularizedPoint};
use crate::LAMBDA_TOLERANCE;
use serde::{Deserialize, Serialize};

/// Outcome of one Lyapunov estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovResult {
    /// Final estimate Λ (inverse time units of ω).
    pub lambda: f64,
    /// Running estimate sampled at renormalization times.
    pub lambda_history: Vec<(f64, f64)>,
    /// True when the last 20% of the history varies by < 10% relative.
    pub converged: bool,
    /// 1 iff Λ > Λ_T = 0.004.
    pub binary: u8,
    /// Time actually integrated (shorter than t_max only with early exit).
    pub t_final: f64,
}

/// Binary chaos classification: Λ_bin = 1 iff Λ > 0.004 (strict).
pub fn classify_binary_lyapunov(lambda: f64) -> u8 {
    u8::from(lambda > LAMBDA_TOLERANCE)
}

/// Optional early termination for throughput-bound sweeps (chaos maps).
///
/// The run may stop once `min_time` has elapsed and the running estimate is
/// both converged (plateau test) and farther than `margin` from Λ_T in
/// either direction. Point measurements should keep the default `None`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EarlyExit {
    pub min_time: f64,
    /// Multiplicative separation from Λ_T required to stop.
    pub margin: f64,
}

impl Default for EarlyExit {
    fn default() -> Self {
        Self {
            min_time: 200.0,
            margin: 3.0,
        }
    }
}

/// Benettin estimate over the full `config.t_max`.
pub fn lyapunov_exponent(
    params: &DickeParams,
    initial: &RegularizedPoint,
    config: &TrajectoryConfig,
) -> Result<LyapunovResult, DynamicsError> {
    lyapunov_exponent_with(params, initial, config, None)
}

/// Benettin estimate with an optional early-exit rule.
pub fn lyapunov_exponent_with(
    params: &DickeParams,
    initial: &RegularizedPoint,
    config: &TrajectoryConfig,
    early_exit: Option<EarlyExit>,
) -> Result<LyapunovResult, DynamicsError> {
    config.validate()?;
    let p = *params;
    // y = (state, deviation): the tangent flow rides along the trajectory.
    let rhs = move |_t: f64, y: &[f64; 8]| {
        let state = RegularizedPoint::from_array([y[0], y[1], y[2], y[3]]);
        let f = equations_of_motion(&p, &state);
        let jac = jacobian(&p, &state);
        let dv = jacobian_times(&jac, &[y[4], y[5], y[6], y[7]]);
        [f[0], f[1], f[2], f[3], dv[0], dv[1], dv[2], dv[3]]
    };

    let e0 = params.energy_regularized(initial);
    let e_scale = e0.abs().max(1e-8);
    let x0 = initial.as_array();
    // Generic initial deviation; any direction aligns with the fastest one.
    let mut y = [x0[0], x0[1], x0[2], x0[3], 0.5, 0.5, 0.5, 0.5];

    let mut stepper = AdaptiveStepper::new(config);
    let mut t = 0.0;
    let mut log_sum = 0.0;
    let mut history = Vec::new();
    let n_chunks = (config.t_max / config.renorm_interval).ceil() as usize;

    for chunk in 1..=n_chunks {
        let t_target = (chunk as f64 * config.renorm_interval).min(config.t_max);
        stepper.advance(&rhs, &mut t, &mut y, t_target, |_, _| {})?;

        let norm = (y[4] * y[4] + y[5] * y[5] + y[6] * y[6] + y[7] * y[7]).sqrt();
        log_sum += norm.ln();
        for v in &mut y[4..8] {
            *v /= norm;
        }
        history.push((t, log_sum / t));

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

        if let Some(rule) = early_exit {
            if t >= rule.min_time && chunk % 32 == 0 {
                let lambda = log_sum / t;
                let separated = lambda > rule.margin * LAMBDA_TOLERANCE
                    || lambda < LAMBDA_TOLERANCE / rule.margin;
                if separated && plateau(&history) {
                    break;
                }
            }
        }
    }

    let lambda = history.last().map_or(0.0, |&(_, l)| l);
    Ok(LyapunovResult {
        lambda,
        converged: plateau(&history),
        binary: classify_binary_lyapunov(lambda),
        t_final: t,
        lambda_history: history,
    })
}

/// Plateau detection: the last 20% of the running estimate varies by less
/// than 10% of its mean.
fn plateau(history: &[(f64, f64)]) -> bool {
    if history.len() < 10 {
        return false;
    }
    let tail = &history[history.len() * 4 / 5..];
    let mean = tail.iter().map(|&(_, l)| l).sum::<f64>() / tail.len() as f64;
    if mean.abs() < 1e-12 {
        return true;
    }
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, l)| {
        (lo.min(l), hi.max(l))
    });
    (hi - lo) / mean.abs() < 0.10
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
    fn chaotic_point_has_positive_exponent() {
        // ε = −0.5, j̃z = 0.075 lies deep in the ergodic region (Λ ≈ 0.32).
        let (params, x0) = table_point(-0.5, 0.075);
        let config = TrajectoryConfig::default().with_t_max(3000.0);
        let r = lyapunov_exponent(&params, &x0, &config).unwrap();
        assert_eq!(r.binary, 1);
        assert!(
            (0.2..0.45).contains(&r.lambda),
            "Λ = {} outside the expected window",
            r.lambda
        );
    }

    #[test]
    fn regular_point_estimate_decays() {
        let (params, x0) = table_point(-1.8, -0.495);
        let config = TrajectoryConfig::default().with_t_max(4000.0);
        let r = lyapunov_exponent(&params, &x0, &config).unwrap();
        assert_eq!(r.binary, 0, "Λ = {} should be below Λ_T", r.lambda);
        assert!(r.lambda < LAMBDA_TOLERANCE);
    }

    #[test]
    fn estimator_stable_under_renorm_halving() {
        let (params, x0) = table_point(-0.5, 0.075);
        let config = TrajectoryConfig::default().with_t_max(2000.0);
        let halved = TrajectoryConfig {
            renorm_interval: config.renorm_interval / 2.0,
            ..config
        };
        let a = lyapunov_exponent(&params, &x0, &config).unwrap();
        let b = lyapunov_exponent(&params, &x0, &halved).unwrap();
        assert!(a.converged, "baseline run did not converge");
        let rel = (a.lambda - b.lambda).abs() / a.lambda;
        assert!(rel < 0.10, "renorm halving moved Λ by {:.1}%", rel * 100.0);
    }

    #[test]
    fn estimator_stable_under_time_doubling() {
        let (params, x0) = table_point(-0.5, 0.075);
        let config = TrajectoryConfig::default().with_t_max(1500.0);
        let doubled = config.with_t_max(3000.0);
        let a = lyapunov_exponent(&params, &x0, &config).unwrap();
        let b = lyapunov_exponent(&params, &x0, &doubled).unwrap();
        let rel = (a.lambda - b.lambda).abs() / a.lambda;
        assert!(rel < 0.10, "t_max doubling moved Λ by {:.1}%", rel * 100.0);
    }

    #[test]
    fn binary_classifier_thresholds() {
        assert_eq!(classify_binary_lyapunov(0.322), 1);
        assert_eq!(classify_binary_lyapunov(9.18e-6), 0);
        assert_eq!(classify_binary_lyapunov(0.004), 0); // strict inequality
    }

    #[test]
    fn early_exit_matches_full_run_classification() {
        let (params, x0) = table_point(-0.5, 0.075);
        let config = TrajectoryConfig::default().with_t_max(2000.0);
        let fast =
            lyapunov_exponent_with(&params, &x0, &config, Some(EarlyExit::default())).unwrap();
        assert_eq!(fast.binary, 1);
        assert!(fast.t_final < 2000.0, "early exit did not trigger");
    }
}
