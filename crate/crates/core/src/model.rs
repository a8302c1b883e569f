//! Dicke-model parameters, the classical Hamiltonian, and phase-space
//! geometry.
//!
//! The Dicke Hamiltonian (ħ = 1) for N two-level atoms coupled to a single
//! bosonic mode is
//!
//! ```text
//! H = ω a†a + ω₀ J_z + (2γ/√N)(a + a†) J_x ,
//! ```
//!
//! restricted throughout to the symmetric pseudospin sector j = N/2.
//! Its classical limit, the expectation value in a product of Glauber and
//! Bloch coherent states divided by j, is
//!
//! ```text
//! h(q, p, j̃z, φ) = ω₀ j̃z + (ω/2)(q² + p²) + 2γ √(1 − j̃z²) q cos φ ,
//! ```
//!
//! with α = √(j/2)(q + ip) and z = tan(θ/2) e^{iφ}, j̃z = j_z/j = −cos θ
//! (θ measured from the negative z-axis, so the south pole j̃z = −1 is the
//! bare atomic ground state at z = 0).
//!
//! The (j̃z, φ) chart is singular at the poles; integration uses the
//! canonical chart (Qa, Pa) with j̃z = (Qa² + Pa²)/2 − 1, in which the
//! Hamiltonian is polynomial apart from a square root that only vanishes at
//! the energetically remote north pole.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter {name}: {value} ({reason})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("phase point at the north pole has no finite Bloch parameter")]
    NorthPole,
}

/// Which root of the energy-shell quadratic a point sits on.
///
/// `Plus` is the algebraically larger root q₊ of the p = 0 energy surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Plus => write!(f, "plus"),
            Branch::Minus => write!(f, "minus"),
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plus" | "+" | "q+" => Ok(Branch::Plus),
            "minus" | "-" | "q-" => Ok(Branch::Minus),
            other => Err(format!("unknown branch {other:?} (expected plus/minus)")),
        }
    }
}

/// Model parameters of the Dicke Hamiltonian.
///
/// All frequencies are in the same energy unit; `j` is the pseudospin
/// length (half-integer, N = 2j atoms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DickeParams {
    omega: f64,
    omega0: f64,
    gamma: f64,
    j: f64,
}

impl DickeParams {
    pub fn new(omega: f64, omega0: f64, gamma: f64, j: f64) -> Result<Self, ModelError> {
        let check = |name: &'static str, value: f64, ok: bool, reason: &'static str| {
            if value.is_finite() && ok {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason,
                })
            }
        };
        check("omega", omega, omega > 0.0, "boson frequency must be > 0")?;
        check("omega0", omega0, omega0 >= 0.0, "level splitting must be >= 0")?;
        check("gamma", gamma, gamma >= 0.0, "coupling must be >= 0")?;
        check("j", j, j > 0.0, "pseudospin length must be > 0")?;
        // N = 2j must be a whole number of atoms.
        let two_j = 2.0 * j;
        check("j", j, (two_j - two_j.round()).abs() < 1e-9, "2j must be an integer")?;
        Ok(Self {
            omega,
            omega0,
            gamma,
            j,
        })
    }

    /// Resonant case ω = ω₀ = 1 with the coupling given in units of γ_c.
    pub fn resonant(gamma_over_gc: f64, j: f64) -> Result<Self, ModelError> {
        Self::new(1.0, 1.0, gamma_over_gc * 0.5, j)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    /// Number of atoms N = 2j.
    pub fn n_atoms(&self) -> f64 {
        2.0 * self.j
    }

    /// Critical coupling γ_c = √(ω ω₀)/2 of the superradiant QPT.
    pub fn critical_coupling(&self) -> f64 {
        (self.omega * self.omega0).sqrt() / 2.0
    }

    /// Semiclassical ground-state energy per particle,
    ///
    /// ```text
    /// ε₀(γ) = −ω₀                                 γ ≤ γ_c
    ///       = −(ω₀/2)(γ_c²/γ² + γ²/γ_c²)          γ > γ_c ,
    /// ```
    ///
    /// continuous (with continuous slope) at the critical point.
    pub fn ground_state_energy(&self) -> f64 {
        let gc = self.critical_coupling();
        if self.gamma <= gc || gc == 0.0 {
            -self.omega0
        } else {
            let r2 = (gc / self.gamma).powi(2);
            -(self.omega0 / 2.0) * (r2 + 1.0 / r2)
        }
    }

    /// Energies per particle of the two excited-state quantum phase
    /// transitions: the dynamical one at −ω₀ (present only for γ > γ_c,
    /// where the two energy lobes merge) and the static one at +ω₀ (where
    /// the full Bloch sphere becomes available).
    pub fn esqpt_energies(&self) -> EsqptEnergies {
        EsqptEnergies {
            dynamical: -self.omega0,
            is_dynamical_active: self.gamma > self.critical_coupling(),
            r#static: self.omega0,
        }
    }

    /// Classical Hamiltonian per particle, Glauber⊗Bloch expectation of H/j.
    pub fn classical_energy(&self, point: &PhasePoint) -> f64 {
        let PhasePoint {
            q,
            p,
            jz_tilde,
            phi,
        } = *point;
        self.omega0 * jz_tilde
            + 0.5 * self.omega * (q * q + p * p)
            + 2.0 * self.gamma * (1.0 - jz_tilde * jz_tilde).sqrt() * q * phi.cos()
    }

    /// Classical Hamiltonian per particle in the regularized chart.
    ///
    /// Identical to [`Self::classical_energy`] but free of the pole
    /// singularities of the (j̃z, φ) chart:
    ///
    /// ```text
    /// h = (ω/2)(q² + p²) + ω₀[(Qa² + Pa²)/2 − 1] + γ q Qa √(4 − Qa² − Pa²).
    /// ```
    pub fn energy_regularized(&self, point: &RegularizedPoint) -> f64 {
        let RegularizedPoint { q, p, qa, pa } = *point;
        let g = (4.0 - qa * qa - pa * pa).max(0.0).sqrt();
        0.5 * self.omega * (q * q + p * p) + self.omega0 * (0.5 * (qa * qa + pa * pa) - 1.0)
            + self.gamma * q * qa * g
    }

    /// The two solutions q±(j̃z, φ; ε) of h(q, p = 0, j̃z, φ) = ε,
    ///
    /// ```text
    /// q± = −(2γ/ω)√(1−j̃z²) cos φ ± √[(4γ²/ω²)(1−j̃z²)cos²φ + (2/ω)(ε − ω₀ j̃z)] .
    /// ```
    ///
    /// Returns `Ok(None)` when the discriminant is negative, i.e. the
    /// (j̃z, φ) point lies outside the energy shell.
    pub fn q_branches(
        &self,
        epsilon: f64,
        jz_tilde: f64,
        phi: f64,
    ) -> Result<Option<QRoots>, ModelError> {
        if !(epsilon.is_finite() && jz_tilde.is_finite() && phi.is_finite()) {
            return Err(ModelError::NonFinite("q_branches input"));
        }
        if jz_tilde.abs() > 1.0 {
            return Err(ModelError::InvalidParameter {
                name: "jz_tilde",
                value: jz_tilde,
                reason: "|j̃z| must be <= 1",
            });
        }
        let c = (1.0 - jz_tilde * jz_tilde).sqrt() * phi.cos();
        let shift = 2.0 * self.gamma / self.omega * c;
        let disc = shift * shift + 2.0 / self.omega * (epsilon - self.omega0 * jz_tilde);
        if disc < 0.0 {
            return Ok(None);
        }
        let root = disc.sqrt();
        Ok(Some(QRoots {
            plus: -shift + root,
            minus: -shift - root,
        }))
    }

    /// Phase point with p = 0 on the requested branch of the ε shell, or
    /// `None` outside the shell.
    pub fn shell_point(
        &self,
        epsilon: f64,
        jz_tilde: f64,
        phi: f64,
        branch: Branch,
    ) -> Result<Option<PhasePoint>, ModelError> {
        Ok(self
            .q_branches(epsilon, jz_tilde, phi)?
            .map(|roots| PhasePoint::new(roots.get(branch), 0.0, jz_tilde, phi)))
    }
}

/// ESQPT energies per particle; the dynamical one is physically meaningful
/// only in the superradiant phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsqptEnergies {
    pub dynamical: f64,
    pub is_dynamical_active: bool,
    pub r#static: f64,
}

/// Pair of energy-shell roots, q₊ ≥ q₋.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QRoots {
    pub plus: f64,
    pub minus: f64,
}

impl QRoots {
    pub fn get(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.plus,
            Branch::Minus => self.minus,
        }
    }
}

/// Classical state in the (q, p, j̃z, φ) chart.
///
/// `phi` is stored canonicalized to [0, 2π); `jz_tilde` ∈ [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
    pub jz_tilde: f64,
    pub phi: f64,
}

impl PhasePoint {
    /// Build a phase point, canonicalizing φ and clamping j̃z roundoff
    /// (values outside [−1, 1] by more than 1e−12 panic in debug builds).
    pub fn new(q: f64, p: f64, jz_tilde: f64, phi: f64) -> Self {
        debug_assert!(
            jz_tilde.abs() <= 1.0 + 1e-12,
            "jz_tilde out of range: {jz_tilde}"
        );
        Self {
            q,
            p,
            jz_tilde: jz_tilde.clamp(-1.0, 1.0),
            phi: phi.rem_euclid(TAU),
        }
    }

    /// Glauber parameter α = √(j/2)(q + ip).
    pub fn alpha(&self, j: f64) -> Complex64 {
        Complex64::new(self.q, self.p) * (j / 2.0).sqrt()
    }

    /// Bloch parameter z = √((1+j̃z)/(1−j̃z)) e^{iφ}, with the north pole
    /// j̃z = +1 (z → ∞) kept as an explicit tag instead of an overflowing
    /// float.
    pub fn bloch(&self) -> SpinCoherent {
        if self.jz_tilde >= 1.0 {
            SpinCoherent::NorthPole
        } else {
            let r = ((1.0 + self.jz_tilde) / (1.0 - self.jz_tilde)).sqrt();
            SpinCoherent::Finite(Complex64::from_polar(r, self.phi))
        }
    }

    /// Coherent-state parameters (α, z) of the point.
    pub fn coherent_parameters(&self, j: f64) -> (Complex64, SpinCoherent) {
        (self.alpha(j), self.bloch())
    }

    /// Inverse of [`Self::coherent_parameters`].
    pub fn from_coherent(alpha: Complex64, z: SpinCoherent, j: f64) -> Self {
        let scale = (2.0 / j).sqrt();
        let (q, p) = (alpha.re * scale, alpha.im * scale);
        match z {
            SpinCoherent::NorthPole => Self::new(q, p, 1.0, 0.0),
            SpinCoherent::Finite(z) => {
                let r2 = z.norm_sqr();
                let jz = (r2 - 1.0) / (r2 + 1.0);
                let phi = if r2 == 0.0 { 0.0 } else { z.arg() };
                Self::new(q, p, jz, phi)
            }
        }
    }

    /// Parity image: the Hamiltonian commutes with Π = e^{iπ(a†a + J_z + j)},
    /// which maps (α, z) → (−α, −z), i.e. (q, p, j̃z, φ) → (−q, −p, j̃z, φ+π).
    pub fn parity_image(&self) -> Self {
        Self::new(-self.q, -self.p, self.jz_tilde, self.phi + std::f64::consts::PI)
    }
}

/// Bloch coherent parameter, finite or the north pole (z → ∞, all atoms
/// excited).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpinCoherent {
    Finite(Complex64),
    NorthPole,
}

impl SpinCoherent {
    pub fn finite(&self) -> Result<Complex64, ModelError> {
        match self {
            SpinCoherent::Finite(z) => Ok(*z),
            SpinCoherent::NorthPole => Err(ModelError::NorthPole),
        }
    }
}

/// Classical state in the pole-free canonical chart (q, p, Qa, Pa),
///
/// ```text
/// Qa = √(2(1+j̃z)) cos φ ,   Pa = −√(2(1+j̃z)) sin φ ,
/// ```
///
/// so j̃z = (Qa² + Pa²)/2 − 1 and the Bloch sphere is the disk
/// Qa² + Pa² ≤ 4. The pair (Qa, Pa) is canonical: the sign of Pa makes
/// dQa/dt = ∂h/∂Pa, dPa/dt = −∂h/∂Qa reproduce the (φ, j̃z) equations of
/// motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizedPoint {
    pub q: f64,
    pub p: f64,
    pub qa: f64,
    pub pa: f64,
}

impl RegularizedPoint {
    pub fn new(q: f64, p: f64, qa: f64, pa: f64) -> Self {
        debug_assert!(
            qa * qa + pa * pa <= 4.0 + 1e-9,
            "atomic coordinates outside the Bloch disk: Qa={qa}, Pa={pa}"
        );
        Self { q, p, qa, pa }
    }

    pub fn from_phase(point: &PhasePoint) -> Self {
        let r = (2.0 * (1.0 + point.jz_tilde)).max(0.0).sqrt();
        Self {
            q: point.q,
            p: point.p,
            qa: r * point.phi.cos(),
            pa: -r * point.phi.sin(),
        }
    }

    pub fn jz_tilde(&self) -> f64 {
        (0.5 * (self.qa * self.qa + self.pa * self.pa) - 1.0).clamp(-1.0, 1.0)
    }

    pub fn phi(&self) -> f64 {
        if self.qa == 0.0 && self.pa == 0.0 {
            0.0
        } else {
            (-self.pa).atan2(self.qa).rem_euclid(TAU)
        }
    }

    pub fn to_phase(&self) -> PhasePoint {
        PhasePoint::new(self.q, self.p, self.jz_tilde(), self.phi())
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.q, self.p, self.qa, self.pa]
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        Self {
            q: x[0],
            p: x[1],
            qa: x[2],
            pa: x[3],
        }
    }
}

/// A point on the p = 0 energy surface at energy per particle `epsilon`,
/// tagged by which root of the shell quadratic it uses. Only points with
/// nonnegative discriminant can be constructed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySurfacePoint {
    pub epsilon: f64,
    pub jz_tilde: f64,
    pub phi: f64,
    pub branch: Branch,
}

impl EnergySurfacePoint {
    pub fn new(
        params: &DickeParams,
        epsilon: f64,
        jz_tilde: f64,
        phi: f64,
        branch: Branch,
    ) -> Result<Option<Self>, ModelError> {
        Ok(params.q_branches(epsilon, jz_tilde, phi)?.map(|_| Self {
            epsilon,
            jz_tilde,
            phi,
            branch,
        }))
    }

    pub fn phase_point(&self, params: &DickeParams) -> Result<PhasePoint, ModelError> {
        let roots = params
            .q_branches(self.epsilon, self.jz_tilde, self.phi)?
            .expect("EnergySurfacePoint was constructed on the shell");
        Ok(PhasePoint::new(
            roots.get(self.branch),
            0.0,
            self.jz_tilde,
            self.phi,
        ))
    }
}

/// Minimize the classical energy over a dense (q, j̃z, φ) grid with local
/// refinement. Used as an independent check of the closed-form ground-state
/// energy.
pub fn minimize_classical_energy(params: &DickeParams, n_grid: usize) -> (f64, PhasePoint) {
    fn scan(
        params: &DickeParams,
        n_grid: usize,
        best: &mut (f64, PhasePoint),
        ranges: [(f64, f64); 3],
    ) {
        let [(q_lo, q_hi), (jz_lo, jz_hi), (phi_lo, phi_hi)] = ranges;
        for iq in 0..=n_grid {
            let q = q_lo + (q_hi - q_lo) * iq as f64 / n_grid as f64;
            for ij in 0..=n_grid {
                let jz = jz_lo + (jz_hi - jz_lo) * ij as f64 / n_grid as f64;
                for ip in 0..=n_grid {
                    let phi = phi_lo + (phi_hi - phi_lo) * ip as f64 / n_grid as f64;
                    // p = 0 at any minimum (h is quadratic in p).
                    let pt = PhasePoint::new(q, 0.0, jz, phi);
                    let e = params.classical_energy(&pt);
                    if e < best.0 {
                        *best = (e, pt);
                    }
                }
            }
        }
    }

    let mut best = (f64::INFINITY, PhasePoint::new(0.0, 0.0, -1.0, 0.0));
    let q_max = 2.0 * (params.gamma / params.omega) + (2.0 / params.omega).sqrt() + 1.0;
    scan(
        params,
        n_grid,
        &mut best,
        [(-q_max, q_max), (-1.0, 1.0), (0.0, TAU)],
    );
    // Local refinement around the best cell.
    let mut dq = 2.0 * q_max / n_grid as f64;
    let mut dj = 2.0 / n_grid as f64;
    let mut dp = TAU / n_grid as f64;
    for _ in 0..3 {
        let pt = best.1;
        scan(
            params,
            n_grid,
            &mut best,
            [
                (pt.q - dq, pt.q + dq),
                ((pt.jz_tilde - dj).max(-1.0), (pt.jz_tilde + dj).min(1.0)),
                (pt.phi - dp, pt.phi + dp),
            ],
        );
        dq *= 2.0 / n_grid as f64;
        dj *= 2.0 / n_grid as f64;
        dp *= 2.0 / n_grid as f64;
    }
    best
}
