//! Equations of motion and their Jacobian in the regularized chart.
//!
//! With G = √(4 − Qa² − Pa²) the classical Hamiltonian per particle is
//!
//! ```text
//! h = (ω/2)(q² + p²) + ω₀[(Qa² + Pa²)/2 − 1] + γ q Qa G ,
//! ```
//!
//! giving
//!
//! ```text
//! q̇  =  ω p
//! ṗ  = −ω q − γ Qa G
//! Q̇a =  ω₀ Pa − γ q Qa Pa / G
//! Ṗa = −ω₀ Qa − γ q (4 − 2Qa² − Pa²) / G .
//! ```
//!
//! G vanishes only at the north pole Qa² + Pa² = 4, which is unreachable
//! below the static ESQPT energy +ω₀; the chart is regular on the whole
//! of the phase space explored here.

use crate::model::{DickeParams, RegularizedPoint};

/// Right-hand side of Hamilton's equations, (q̇, ṗ, Q̇a, Ṗa).
pub fn equations_of_motion(params: &DickeParams, point: &RegularizedPoint) -> [f64; 4] {
    let RegularizedPoint { q, p, qa, pa } = *point;
    let (omega, omega0, gamma) = (params.omega(), params.omega0(), params.gamma());
    let g = (4.0 - qa * qa - pa * pa).max(0.0).sqrt();
    [
        omega * p,
        -omega * q - gamma * qa * g,
        omega0 * pa - gamma * q * qa * pa / g,
        -omega0 * qa - gamma * q * (4.0 - 2.0 * qa * qa - pa * pa) / g,
    ]
}

/// Analytic 4×4 Jacobian ∂F_i/∂x_j of [`equations_of_motion`] with
/// x = (q, p, Qa, Pa). Drives the tangent (variational) flow.
pub fn jacobian(params: &DickeParams, point: &RegularizedPoint) -> [[f64; 4]; 4] {
    let RegularizedPoint { q, p: _, qa, pa } = *point;
    let (omega, omega0, gamma) = (params.omega(), params.omega0(), params.gamma());
    let g2 = (4.0 - qa * qa - pa * pa).max(0.0);
    let g = g2.sqrt();
    let g3 = g2 * g;
    let u = 4.0 - 2.0 * qa * qa - pa * pa;
    [
        [0.0, omega, 0.0, 0.0],
        [
            -omega,
            0.0,
            -gamma * (g2 - qa * qa) / g,
            gamma * qa * pa / g,
        ],
        [
            -gamma * qa * pa / g,
            0.0,
            -gamma * q * pa * (g2 + qa * qa) / g3,
            omega0 - gamma * q * qa * (g2 + pa * pa) / g3,
        ],
        [
            -gamma * u / g,
            0.0,
            -omega0 - gamma * q * qa * (u - 4.0 * g2) / g3,
            -gamma * q * pa * (u - 2.0 * g2) / g3,
        ],
    ]
}

/// Jacobian–vector product for tangent propagation.
#[inline]
pub fn jacobian_times(jac: &[[f64; 4]; 4], v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (row, o) in jac.iter().zip(out.iter_mut()) {
        *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
    }
    out
}
