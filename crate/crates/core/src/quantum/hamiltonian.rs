//! Dicke Hamiltonian matrices in the Fock and efficient coherent bases.
//!
//! The efficient coherent basis (ECB) rewrites the Hamiltonian through the
//! displaced boson A = a + (2γ/(ω√N)) J_x (Chen, Liu & Liang 2008):
//!
//! ```text
//! H = ω A†A − (4γ²/(ωN)) J_x² + ω₀ J_z ,
//! ```
//!
//! so the basis |N; m_x⟩ = D(α_{m_x})|N⟩ ⊗ |j, m_x⟩, with
//! α_m = −2γm/(ω√N), diagonalizes everything except the ω₀J_z term. That
//! term moves m_x by ±1 and connects displaced Fock towers whose centers
//! differ by β₀ = 2γ/(ω√N), so its matrix elements factor into a spin
//! ladder coefficient times ⟨N′|D(β₀)|N⟩. In the superradiant phase the
//! ECB converges orders of magnitude more eigenstates than the bare Fock
//! basis at equal dimension.

use super::displaced::{displacement_matrix, LnFactorial};
use super::QuantumError;
use crate::model::DickeParams;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// Basis of displaced quanta N ≤ n_max times J_x eigenstates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ECBasisSpec {
    pub j: f64,
    pub n_max: usize,
}

/// Bare photon-number times J_z eigenstate basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockBasisSpec {
    pub j: f64,
    pub n_max_photons: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisTag {
    Ecb,
    Fock,
}

impl ECBasisSpec {
    pub fn new(j: f64, n_max: usize) -> Result<Self, QuantumError> {
        validate_j(j)?;
        Ok(Self { j, n_max })
    }

    pub fn n_spin(&self) -> usize {
        (2.0 * self.j).round() as usize + 1
    }

    pub fn dimension(&self) -> usize {
        self.n_spin() * (self.n_max + 1)
    }

    /// Flat index of |N; m_x = k − j⟩ (boson-major).
    #[inline]
    pub fn index(&self, n: usize, k: usize) -> usize {
        n * self.n_spin() + k
    }
}

impl FockBasisSpec {
    pub fn new(j: f64, n_max_photons: usize) -> Result<Self, QuantumError> {
        validate_j(j)?;
        Ok(Self { j, n_max_photons })
    }

    pub fn n_spin(&self) -> usize {
        (2.0 * self.j).round() as usize + 1
    }

    pub fn dimension(&self) -> usize {
        self.n_spin() * (self.n_max_photons + 1)
    }

    #[inline]
    pub fn index(&self, n: usize, k: usize) -> usize {
        n * self.n_spin() + k
    }
}

fn validate_j(j: f64) -> Result<(), QuantumError> {
    let two_j = 2.0 * j;
    if j > 0.0 && (two_j - two_j.round()).abs() < 1e-9 {
        Ok(())
    } else {
        Err(QuantumError::InvalidBasis("j must be a positive half-integer"))
    }
}

/// Real symmetric Hamiltonian with its basis tag.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub matrix: Array2<f64>,
    pub basis: BasisTag,
}

impl HamiltonianMatrix {
    /// Largest |H − Hᵀ| entry divided by the largest |H| entry.
    pub fn asymmetry(&self) -> f64 {
        let m = &self.matrix;
        let scale = m.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1e-300);
        let n = m.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for k in (i + 1)..n {
                worst = worst.max((m[[i, k]] - m[[k, i]]).abs());
            }
        }
        worst / scale
    }
}

/// Spin ladder coefficient √(j(j+1) − m(m+1)).
#[inline]
pub fn ladder_plus(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

/// Assemble H in the efficient coherent basis.
///
/// Element structure (m = m_x, c₊(m) the ladder coefficient):
///
/// ```text
/// ⟨N m|H|N m⟩       = ωN − (2γ²/(ωj)) m²
/// ⟨N′ m±1|H|N m⟩    = (ω₀/2) c±(m) ⟨N′|D(±β₀)|N⟩ ,  β₀ = 2γ/(ω√(2j)) .
/// ```
pub fn build_ecb_hamiltonian(
    params: &DickeParams,
    spec: &ECBasisSpec,
) -> Result<HamiltonianMatrix, QuantumError> {
    check_j_match(params, spec.j)?;
    let (j, n_max) = (spec.j, spec.n_max);
    let n_spin = spec.n_spin();
    let dim = spec.dimension();
    let (omega, omega0, gamma) = (params.omega(), params.omega0(), params.gamma());

    let lnf = LnFactorial::new(n_max + 1);
    let beta0 = 2.0 * gamma / (omega * params.n_atoms().sqrt());
    let dmat = displacement_matrix(n_max, beta0, &lnf);

    let mut h = Array2::<f64>::zeros((dim, dim));
    let quad = 2.0 * gamma * gamma / (omega * j);
    for n in 0..=n_max {
        for k in 0..n_spin {
            let m = k as f64 - j;
            let idx = spec.index(n, k);
            h[[idx, idx]] = omega * n as f64 - quad * m * m;
        }
    }
    if omega0 != 0.0 {
        for k in 0..n_spin - 1 {
            let m = k as f64 - j;
            let f0 = 0.5 * omega0 * ladder_plus(j, m);
            for np in 0..=n_max {
                for n in 0..=n_max {
                    let v = f0 * dmat[[np, n]];
                    h[[spec.index(np, k + 1), spec.index(n, k)]] = v;
                    h[[spec.index(n, k), spec.index(np, k + 1)]] = v;
                }
            }
        }
    }

    let out = HamiltonianMatrix {
        matrix: h,
        basis: BasisTag::Ecb,
    };
    let asym = out.asymmetry();
    if asym > 1e-12 {
        return Err(QuantumError::Asymmetric { max_relative: asym });
    }
    Ok(out)
}

/// Assemble H in the bare Fock ⊗ J_z basis,
///
/// ```text
/// ⟨n m|H|n m⟩     = ωn + ω₀m
/// ⟨n+1 m±1|H|n m⟩ = (γ/√(2j)) √(n+1) c±(m) .
/// ```
pub fn build_fock_hamiltonian(
    params: &DickeParams,
    spec: &FockBasisSpec,
) -> Result<HamiltonianMatrix, QuantumError> {
    check_j_match(params, spec.j)?;
    let (j, n_max) = (spec.j, spec.n_max_photons);
    let n_spin = spec.n_spin();
    let dim = spec.dimension();
    let (omega, omega0, gamma) = (params.omega(), params.omega0(), params.gamma());

    let mut h = Array2::<f64>::zeros((dim, dim));
    for n in 0..=n_max {
        for k in 0..n_spin {
            let m = k as f64 - j;
            let idx = spec.index(n, k);
            h[[idx, idx]] = omega * n as f64 + omega0 * m;
        }
    }
    // (2γ/√N)(a + a†)J_x with J_x = (J₊ + J₋)/2.
    let lambda = 2.0 * gamma / params.n_atoms().sqrt();
    for n in 0..n_max {
        let boson = (n as f64 + 1.0).sqrt();
        for k in 0..n_spin {
            let m = k as f64 - j;
            if k + 1 < n_spin {
                let v = 0.5 * lambda * boson * ladder_plus(j, m);
                h[[spec.index(n + 1, k + 1), spec.index(n, k)]] = v;
                h[[spec.index(n, k), spec.index(n + 1, k + 1)]] = v;
            }
            if k > 0 {
                let v = 0.5 * lambda * boson * ladder_plus(j, m - 1.0);
                h[[spec.index(n + 1, k - 1), spec.index(n, k)]] = v;
                h[[spec.index(n, k), spec.index(n + 1, k - 1)]] = v;
            }
        }
    }

    Ok(HamiltonianMatrix {
        matrix: h,
        basis: BasisTag::Fock,
    })
}

fn check_j_match(params: &DickeParams, j: f64) -> Result<(), QuantumError> {
    if (params.j() - j).abs() > 1e-12 {
        Err(QuantumError::InvalidBasis(
            "basis pseudospin length differs from the model parameters",
        ))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::linalg::eigh_dc;
    use approx::assert_relative_eq;

    #[test]
    fn ecb_at_zero_coupling_is_diagonal_free_hamiltonian() {
        // γ = 0: the ECB is the bare basis; eigenvalues ωn + ω₀m exactly,
        // but the matrix itself is not diagonal (J_z in the J_x basis).
        let params = DickeParams::new(1.0, 0.7, 0.0, 1.0).unwrap();
        let spec = ECBasisSpec::new(1.0, 3).unwrap();
        let h = build_ecb_hamiltonian(&params, &spec).unwrap();
        let d = eigh_dc(h.matrix).unwrap();
        let mut expect: Vec<f64> = (0..=3)
            .flat_map(|n| [-1.0f64, 0.0, 1.0].map(|m| n as f64 + 0.7 * m))
            .collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in d.energies.iter().zip(&expect) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn ecb_is_exact_eigenbasis_at_zero_splitting() {
        // ω₀ = 0: H is diagonal in the ECB with E = ωN − (2γ²/(ωj))m².
        let params = DickeParams::new(1.0, 0.0, 0.8, 1.5).unwrap();
        let spec = ECBasisSpec::new(1.5, 5).unwrap();
        let h = build_ecb_hamiltonian(&params, &spec).unwrap();
        for i in 0..spec.dimension() {
            for k in 0..spec.dimension() {
                if i != k {
                    assert_eq!(h.matrix[[i, k]], 0.0);
                }
            }
        }
        let quad = 2.0 * 0.8 * 0.8 / 1.5;
        for n in 0..=5 {
            for k in 0..4 {
                let m = k as f64 - 1.5;
                assert_relative_eq!(
                    h.matrix[[spec.index(n, k), spec.index(n, k)]],
                    n as f64 - quad * m * m,
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn fock_half_spin_zero_coupling() {
        let params = DickeParams::new(1.0, 1.0, 0.0, 0.5).unwrap();
        let spec = FockBasisSpec::new(0.5, 4).unwrap();
        let h = build_fock_hamiltonian(&params, &spec).unwrap();
        let d = eigh_dc(h.matrix).unwrap();
        let mut expect: Vec<f64> = (0..=4)
            .flat_map(|n| [n as f64 - 0.5, n as f64 + 0.5])
            .collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in d.energies.iter().zip(&expect) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn fock_matches_kronecker_product_oracle() {
        // Independent construction by explicit operator products
        // H = ω n̂⊗1 + ω₀ 1⊗J_z + (2γ/√N)(a+a†)⊗J_x for j = 1/2.
        let (omega, omega0, gamma, j) = (0.9, 1.1, 0.6, 0.5);
        let params = DickeParams::new(omega, omega0, gamma, j).unwrap();
        let spec = FockBasisSpec::new(j, 6).unwrap();
        let h = build_fock_hamiltonian(&params, &spec).unwrap();

        let nb = 7;
        let dim = nb * 2;
        let mut oracle = Array2::<f64>::zeros((dim, dim));
        // Basis order matches spec.index: (n, k) → n*2 + k, k = 0 ↔ m=−1/2.
        let jz = [-0.5, 0.5];
        let jx = |kp: usize, k: usize| -> f64 {
            if kp != k {
                0.5
            } else {
                0.0
            }
        };
        for n in 0..nb {
            for k in 0..2 {
                let row = n * 2 + k;
                oracle[[row, row]] = omega * n as f64 + omega0 * jz[k];
                for np in 0..nb {
                    let x = if np == n + 1 {
                        (n as f64 + 1.0).sqrt()
                    } else if np + 1 == n {
                        (n as f64).sqrt()
                    } else {
                        0.0
                    };
                    if x != 0.0 {
                        for kp in 0..2 {
                            // N = 2j = 1 atom here.
                            let v = 2.0 * gamma * x * jx(kp, k);
                            oracle[[np * 2 + kp, row]] += v;
                        }
                    }
                }
            }
        }
        for i in 0..dim {
            for k in 0..dim {
                assert_relative_eq!(h.matrix[[i, k]], oracle[[i, k]], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn matrices_are_symmetric() {
        let params = DickeParams::new(1.0, 1.0, 1.0, 2.0).unwrap();
        let ecb = build_ecb_hamiltonian(&params, &ECBasisSpec::new(2.0, 12).unwrap()).unwrap();
        assert!(ecb.asymmetry() < 1e-14);
        let fock =
            build_fock_hamiltonian(&params, &FockBasisSpec::new(2.0, 12).unwrap()).unwrap();
        assert!(fock.asymmetry() < 1e-14);
    }

    #[test]
    fn ecb_spectrum_matches_fock_oracle_small() {
        // j = 1, γ = 2γ_c: lowest converged ECB eigenvalues against a
        // heavily over-cut Fock diagonalization.
        let params = DickeParams::resonant(2.0, 1.0).unwrap();
        let ecb = build_ecb_hamiltonian(&params, &ECBasisSpec::new(1.0, 40).unwrap()).unwrap();
        let fock =
            build_fock_hamiltonian(&params, &FockBasisSpec::new(1.0, 120).unwrap()).unwrap();
        let de = eigh_dc(ecb.matrix).unwrap();
        let df = eigh_dc(fock.matrix).unwrap();
        for k in 0..20 {
            assert!(
                (de.energies[k] - df.energies[k]).abs() < 1e-8,
                "state {k}: ECB {} vs Fock {}",
                de.energies[k],
                df.energies[k]
            );
        }
    }
}
