//! Eigenspectra with convergence certification and parity labels.
//!
//! The pipeline builds H in the requested basis, diagonalizes (optionally
//! in the two parity blocks), certifies per-state convergence with a dual
//! criterion — negligible probability in the top boson shell *and* energy
//! stability against a larger cutoff — and labels each state by the parity
//! Π = e^{iπ(a†a + J_z + j)}.
//!
//! In the ECB index (N, m_x), parity acts as the involution
//!
//! ```text
//! Π |N; m_x⟩ = (−1)^{2j} (−1)^N |N; −m_x⟩ ,
//! ```
//!
//! because Π sends a → −a (so D(α_m) → (−1)^N-weighted D(−α_m) on the
//! displaced tower) and reflects J_x. The global (−1)^{2j} comes from the
//! half-turn of a spin j and matters only for half-integer j.

use super::displaced::{displacement_matrix, LnFactorial};
use super::hamiltonian::{
    build_ecb_hamiltonian, ladder_plus, BasisTag, ECBasisSpec, HamiltonianMatrix,
};
use super::linalg::{eigh_dc, eigvals_dc, sample_residual, EigenDecomposition};
use super::QuantumError;
use crate::model::DickeParams;
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Plus,
    Minus,
    Unresolved,
}

/// Controls for [`Spectrum::compute`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectrumOptions {
    /// Diagonalize the two parity blocks separately (≈4× faster, half the
    /// memory). Off by default; the full-matrix route keeps the a-posteriori
    /// parity labels as an unbiased symmetry check.
    pub parity_blocks: bool,
    /// Maximum probability allowed in the top boson shell N = n_max.
    pub tail_tol: f64,
    /// Re-diagonalize (eigenvalues only) with n_max + delta to certify
    /// energy stability. `0` skips the recheck.
    pub stability_delta_n: usize,
    /// Energy stability tolerance in units of ω₀.
    pub stability_tol: f64,
    /// Keep only converged eigenvectors (plus a margin) instead of all.
    pub store_converged_only: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            parity_blocks: false,
            tail_tol: 1e-8,
            stability_delta_n: 10,
            stability_tol: 1e-6,
            store_converged_only: true,
        }
    }
}

/// Converged eigenpairs of one (params, basis) combination.
///
/// `vectors` stores eigenvector k in row k over the flat basis index of
/// [`ECBasisSpec::index`]. Only the lowest `n_stored` states are kept;
/// `converged_count ≤ n_stored` of them are certified.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub params: DickeParams,
    pub basis: BasisTag,
    pub j: f64,
    pub n_max: usize,
    pub dim: usize,
    pub energies: Vec<f64>,
    pub vectors: Array2<f64>,
    /// Probability of each stored state in the top boson shell.
    pub tail_weight: Vec<f64>,
    pub parity: Vec<Parity>,
    pub converged_count: usize,
    pub params_hash: String,
}

impl Spectrum {
    pub fn n_stored(&self) -> usize {
        self.energies.len()
    }

    /// Largest certified energy per particle (E/j), or None when nothing
    /// converged.
    pub fn converged_energy_per_particle(&self) -> Option<f64> {
        if self.converged_count == 0 {
            None
        } else {
            Some(self.energies[self.converged_count - 1] / self.j)
        }
    }

    /// Content hash of (params, basis, options, library version) that keys
    /// the on-disk cache.
    pub fn cache_key(
        params: &DickeParams,
        spec: &ECBasisSpec,
        options: &SpectrumOptions,
    ) -> String {
        let mut hasher = Sha256::new();
        let text = format!(
            "dicke-ecb;omega={:.17e};omega0={:.17e};gamma={:.17e};j={:.17e};n_max={};blocks={};tail={:.3e};dn={};stol={:.3e};v{}",
            params.omega(),
            params.omega0(),
            params.gamma(),
            params.j(),
            spec.n_max,
            options.parity_blocks,
            options.tail_tol,
            options.stability_delta_n,
            options.stability_tol,
            crate::VERSION,
        );
        hasher.update(text.as_bytes());
        hex::encode(&hasher.finalize()[..16])
    }

    /// Full pipeline in the efficient coherent basis.
    pub fn compute(
        params: &DickeParams,
        spec: &ECBasisSpec,
        options: &SpectrumOptions,
    ) -> Result<Self, QuantumError> {
        let mut decomp = if options.parity_blocks {
            diagonalize_ecb_blocks(params, spec)?
        } else {
            let h = build_ecb_hamiltonian(params, spec)?;
            let mut d = diagonalize(&h)?;
            // Numerically degenerate doublets come out of the solver as
            // arbitrary mixtures of the two parities; rotate each cluster
            // into the parity eigenbasis so the labels are well defined.
            purify_parity_doublets(&mut d, spec)?;
            let parity = parity_label(&d, spec);
            LabeledDecomposition {
                energies: d.energies,
                vectors: d.vectors,
                parity,
            }
        };
        // Fix the ordering inside degenerate clusters (positive parity
        // first) so block and full diagonalization emit identical spectra.
        order_degenerate_clusters(&mut decomp);

        let tail_weight = tail_weights(&decomp.vectors, spec);

        // The displaced basis is the exact eigenbasis when the J_z term
        // vanishes; no cutoff artifact exists then.
        let converged_count = if params.omega0() == 0.0 {
            decomp.energies.len()
        } else {
            let stability = if options.stability_delta_n > 0 {
                let bigger = ECBasisSpec::new(spec.j, spec.n_max + options.stability_delta_n)?;
                Some(ecb_eigenvalues(params, &bigger, options.parity_blocks)?)
            } else {
                None
            };
            converged_count_from(
                &decomp.energies,
                &tail_weight,
                options.tail_tol,
                stability.as_deref(),
                options.stability_tol * params.omega0().max(1e-300),
            )
        };

        let n_keep = if options.store_converged_only {
            (converged_count + 32).min(decomp.energies.len())
        } else {
            decomp.energies.len()
        };

        let params_hash = Self::cache_key(params, spec, options);
        Ok(Spectrum {
            params: *params,
            basis: BasisTag::Ecb,
            j: spec.j,
            n_max: spec.n_max,
            dim: spec.dimension(),
            energies: decomp.energies[..n_keep].to_vec(),
            vectors: decomp.vectors.slice_move(ndarray::s![..n_keep, ..]),
            tail_weight: tail_weight[..n_keep].to_vec(),
            parity: decomp.parity[..n_keep].to_vec(),
            converged_count: converged_count.min(n_keep),
            params_hash,
        })
    }
}

struct LabeledDecomposition {
    energies: Vec<f64>,
    vectors: Array2<f64>,
    parity: Vec<Parity>,
}

/// Dense symmetric eigendecomposition with a sampled residual check
/// ‖Hv − Ev‖ < 1e−9 ‖H‖_F.
pub fn diagonalize(h: &HamiltonianMatrix) -> Result<EigenDecomposition, QuantumError> {
    let asym = h.asymmetry();
    if asym > 1e-12 {
        return Err(QuantumError::Asymmetric { max_relative: asym });
    }
    let d = eigh_dc(h.matrix.clone())?;
    let residual = sample_residual(&h.matrix, &d.energies, &d.vectors, 32);
    if residual > 1e-9 {
        return Err(QuantumError::Residual {
            residual,
            tol: 1e-9,
        });
    }
    Ok(d)
}

/// Probability of each eigenstate in the top boson shell N = n_max.
fn tail_weights(vectors: &Array2<f64>, spec: &ECBasisSpec) -> Vec<f64> {
    let n_spin = spec.n_spin();
    let start = spec.index(spec.n_max, 0);
    vectors
        .rows()
        .into_iter()
        .map(|row| row.slice(ndarray::s![start..start + n_spin]).iter().map(|v| v * v).sum())
        .collect()
}

/// Largest K such that states 0..K all pass the tail bound and (when a
/// larger-cutoff eigenvalue list is supplied) are energy-stable within
/// `e_tol`.
pub fn convergence_check(
    spectrum: &Spectrum,
    tail_tol: f64,
    bigger_eigenvalues: Option<&[f64]>,
    e_tol: f64,
) -> usize {
    converged_count_from(
        &spectrum.energies,
        &spectrum.tail_weight,
        tail_tol,
        bigger_eigenvalues,
        e_tol,
    )
}

fn converged_count_from(
    energies: &[f64],
    tail_weight: &[f64],
    tail_tol: f64,
    bigger_eigenvalues: Option<&[f64]>,
    e_tol: f64,
) -> usize {
    let mut count = 0;
    for (k, (&tail, &e)) in tail_weight.iter().zip(energies).enumerate() {
        let tail_ok = tail < tail_tol;
        let stable = match bigger_eigenvalues {
            None => true,
            Some(big) => nearest_distance(big, e) < e_tol,
        };
        if tail_ok && stable {
            count = k + 1;
        } else {
            break;
        }
    }
    count
}

fn nearest_distance(sorted: &[f64], x: f64) -> f64 {
    match sorted.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(_) => 0.0,
        Err(i) => {
            let right = sorted.get(i).map(|v| (v - x).abs());
            let left = i.checked_sub(1).and_then(|k| sorted.get(k)).map(|v| (v - x).abs());
            match (left, right) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => f64::INFINITY,
            }
        }
    }
}

/// Apply the ECB parity involution R|N,m⟩ = (−1)^N|N,−m⟩ to one stored
/// eigenvector.
fn apply_involution(row: ndarray::ArrayView1<f64>, spec: &ECBasisSpec) -> Vec<f64> {
    let n_spin = spec.n_spin();
    let mut out = vec![0.0; row.len()];
    for n in 0..=spec.n_max {
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        let base = n * n_spin;
        for k in 0..n_spin {
            out[base + k] = s * row[base + n_spin - 1 - k];
        }
    }
    out
}

/// Rotate numerically degenerate eigenvector clusters into the parity
/// eigenbasis. H commutes with the involution, so inside an exactly
/// degenerate subspace this is a free gauge choice; it pins the doublets
/// that the dense solver mixes arbitrarily.
fn purify_parity_doublets(
    d: &mut EigenDecomposition,
    spec: &ECBasisSpec,
) -> Result<(), QuantumError> {
    let n = d.energies.len();
    let scale = d
        .energies
        .iter()
        .fold(1.0f64, |a, &e| a.max(e.abs()));
    // Only clusters the dense solver cannot resolve; genuinely split pairs
    // come out parity-pure already.
    let tol = 1e-12 * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (d.energies[end] - d.energies[end - 1]).abs() < tol {
            end += 1;
        }
        let size = end - start;
        if size > 1 {
            // ⟨v_a|R|v_b⟩ on the cluster.
            let mut p = Array2::<f64>::zeros((size, size));
            for a in 0..size {
                let rv = apply_involution(d.vectors.row(start + a), spec);
                for b in 0..size {
                    let dot: f64 = d
                        .vectors
                        .row(start + b)
                        .iter()
                        .zip(&rv)
                        .map(|(x, y)| x * y)
                        .sum();
                    p[[b, a]] = dot;
                }
            }
            // Symmetrize against roundoff and rotate.
            let sym = 0.5 * (&p + &p.t());
            let rot = eigh_dc(sym)?;
            let old: Vec<Vec<f64>> = (0..size)
                .map(|a| d.vectors.row(start + a).to_vec())
                .collect();
            // Keep each rotated vector at the slot of the original state it
            // overlaps most, so (energy, vector) pairs survive when the
            // cluster is only borderline degenerate.
            let mut slots: Vec<usize> = (0..size).collect();
            let mut used = vec![false; size];
            let mut ok = true;
            for (a, slot) in slots.iter_mut().enumerate() {
                let mut best = (0.0f64, a);
                for b in 0..size {
                    let w = rot.vectors[[a, b]].abs();
                    if w > best.0 {
                        best = (w, b);
                    }
                }
                if used[best.1] {
                    ok = false;
                    break;
                }
                used[best.1] = true;
                *slot = best.1;
            }
            if !ok {
                slots = (0..size).collect();
            }
            for a in 0..size {
                let mut new_v = vec![0.0; d.vectors.ncols()];
                for b in 0..size {
                    let c = rot.vectors[[a, b]];
                    for (nv, ov) in new_v.iter_mut().zip(&old[b]) {
                        *nv += c * ov;
                    }
                }
                d.vectors
                    .row_mut(start + slots[a])
                    .assign(&ndarray::ArrayView1::from(&new_v));
            }
        }
        start = end;
    }
    Ok(())
}

/// Inside every numerically degenerate cluster, put Plus states before
/// Minus states (stable), carrying (energy, parity, vector) together.
fn order_degenerate_clusters(d: &mut LabeledDecomposition) {
    let n = d.energies.len();
    if n == 0 {
        return;
    }
    let scale = d.energies.iter().fold(1.0f64, |a, &e| a.max(e.abs()));
    let tol = 1e-9 * scale;
    let rank = |p: Parity| match p {
        Parity::Plus => 0,
        Parity::Minus => 1,
        Parity::Unresolved => 2,
    };
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (d.energies[end] - d.energies[end - 1]).abs() < tol {
            end += 1;
        }
        if end - start > 1 {
            let mut idx: Vec<usize> = (start..end).collect();
            idx.sort_by_key(|&k| (rank(d.parity[k]), k));
            if idx.iter().enumerate().any(|(o, &k)| k != start + o) {
                let energies: Vec<f64> = idx.iter().map(|&k| d.energies[k]).collect();
                let parity: Vec<Parity> = idx.iter().map(|&k| d.parity[k]).collect();
                let rows: Vec<Vec<f64>> =
                    idx.iter().map(|&k| d.vectors.row(k).to_vec()).collect();
                for (o, _) in idx.iter().enumerate() {
                    d.energies[start + o] = energies[o];
                    d.parity[start + o] = parity[o];
                    d.vectors
                        .row_mut(start + o)
                        .assign(&ndarray::ArrayView1::from(&rows[o]));
                }
            }
        }
        start = end;
    }
}

/// Parity expectation labels from the ECB involution; |⟨Π⟩| > 0.99 resolves
/// the label.
pub fn parity_label(decomp: &EigenDecomposition, spec: &ECBasisSpec) -> Vec<Parity> {
    let n_spin = spec.n_spin();
    let global = if (2.0 * spec.j).round() as i64 % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    decomp
        .vectors
        .rows()
        .into_iter()
        .map(|row| {
            let mut pi = 0.0;
            for n in 0..=spec.n_max {
                let s = if n % 2 == 0 { 1.0 } else { -1.0 };
                let base = n * n_spin;
                for k in 0..n_spin {
                    pi += s * row[base + k] * row[base + n_spin - 1 - k];
                }
            }
            pi *= global;
            if pi > 0.99 {
                Parity::Plus
            } else if pi < -0.99 {
                Parity::Minus
            } else {
                Parity::Unresolved
            }
        })
        .collect()
}

/// Eigenvalues only, via the same block split when requested.
fn ecb_eigenvalues(
    params: &DickeParams,
    spec: &ECBasisSpec,
    parity_blocks: bool,
) -> Result<Vec<f64>, QuantumError> {
    if parity_blocks {
        let mut vals = Vec::with_capacity(spec.dimension());
        for r in [1.0, -1.0] {
            let block = build_parity_block(params, spec, r)?;
            vals.extend(eigvals_dc(block.matrix)?);
        }
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    } else {
        let h = build_ecb_hamiltonian(params, spec)?;
        eigvals_dc(h.matrix)
    }
}

/// Basis element of one parity block.
#[derive(Debug, Clone, Copy)]
enum BlockElem {
    /// (|N, m⟩ + r(−1)^N |N, −m⟩)/√2 with m > 0.
    Pair { n: usize, k_hi: usize },
    /// |N, 0⟩ (integer j only; lives in the block with r = (−1)^N).
    Zero { n: usize },
}

struct ParityBlock {
    matrix: Array2<f64>,
    elems: Vec<BlockElem>,
}

/// Assemble H restricted to the r = ±1 eigenspace of the involution
/// R|N,m⟩ = (−1)^N|N,−m⟩. The physical parity of the block is
/// (−1)^{2j} r.
fn build_parity_block(
    params: &DickeParams,
    spec: &ECBasisSpec,
    r: f64,
) -> Result<ParityBlock, QuantumError> {
    let (j, n_max) = (spec.j, spec.n_max);
    let n_spin = spec.n_spin();
    let (omega, omega0, gamma) = (params.omega(), params.omega0(), params.gamma());
    let lnf = LnFactorial::new(n_max + 1);
    let beta0 = 2.0 * gamma / (omega * params.n_atoms().sqrt());
    let dmat = displacement_matrix(n_max, beta0, &lnf);

    let integer_j = n_spin % 2 == 1;
    let k_mid = (n_spin - 1) / 2; // m = 0 slot for integer j
    // Positive-m slots in ascending m order.
    let k_pos_start = if integer_j { k_mid + 1 } else { n_spin / 2 };

    let mut elems = Vec::new();
    for n in 0..=n_max {
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        if integer_j && s == r {
            elems.push(BlockElem::Zero { n });
        }
        for k_hi in k_pos_start..n_spin {
            elems.push(BlockElem::Pair { n, k_hi });
        }
    }

    let db = elems.len();
    let mut h = Array2::<f64>::zeros((db, db));
    let quad = 2.0 * gamma * gamma / (omega * j);
    let m_of = |k: usize| k as f64 - j;

    for (a, &ea) in elems.iter().enumerate() {
        for (b, &eb) in elems.iter().enumerate().skip(a) {
            let v = match (ea, eb) {
                (BlockElem::Pair { n: na, k_hi: ka }, BlockElem::Pair { n: nb, k_hi: kb }) => {
                    let (ma, mb) = (m_of(ka), m_of(kb));
                    let mut v = 0.0;
                    if ka == kb && na == nb {
                        v += omega * na as f64 - quad * ma * ma;
                    }
                    if (mb - ma - 1.0).abs() < 1e-9 {
                        // m_a → m_a + 1 within the positive tower.
                        v += 0.5 * omega0 * ladder_plus(j, ma) * dmat[[nb, na]];
                    } else if (ma - mb - 1.0).abs() < 1e-9 {
                        v += 0.5 * omega0 * ladder_plus(j, mb) * dmat[[na, nb]];
                    }
                    // Half-integer j: m = 1/2 couples to its own partner −1/2.
                    if !integer_j && ka == k_pos_start && kb == k_pos_start {
                        let sa = if na % 2 == 0 { 1.0 } else { -1.0 };
                        v += r * sa * 0.5 * omega0 * ladder_plus(j, -0.5) * dmat[[nb, na]];
                    }
                    v
                }
                (BlockElem::Zero { n: na }, BlockElem::Zero { n: nb }) => {
                    if na == nb {
                        omega * na as f64
                    } else {
                        0.0
                    }
                }
                (BlockElem::Zero { n: nz }, BlockElem::Pair { n: np, k_hi })
                | (BlockElem::Pair { n: np, k_hi }, BlockElem::Zero { n: nz }) => {
                    if k_hi == k_pos_start {
                        // √2-enhanced m = 0 ↔ 1 coupling.
                        std::f64::consts::SQRT_2 * 0.5 * omega0 * ladder_plus(j, 0.0)
                            * dmat[[np, nz]]
                    } else {
                        0.0
                    }
                }
            };
            h[[a, b]] = v;
            h[[b, a]] = v;
        }
    }
    Ok(ParityBlock { matrix: h, elems })
}

/// Diagonalize both parity blocks and reassemble full-basis eigenvectors,
/// merged in ascending energy order with exact parity labels.
fn diagonalize_ecb_blocks(
    params: &DickeParams,
    spec: &ECBasisSpec,
) -> Result<LabeledDecomposition, QuantumError> {
    let n_spin = spec.n_spin();
    let dim = spec.dimension();
    let global = if (2.0 * spec.j).round() as i64 % 2 == 0 {
        1.0
    } else {
        -1.0
    };

    let mut merged: Vec<(f64, Parity, Vec<f64>)> = Vec::with_capacity(dim);
    for r in [1.0f64, -1.0] {
        let block = build_parity_block(params, spec, r)?;
        let db = block.matrix.nrows();
        if db == 0 {
            continue;
        }
        let d = eigh_dc(block.matrix)?;
        let parity = if global * r > 0.0 {
            Parity::Plus
        } else {
            Parity::Minus
        };
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for kk in 0..db {
            let w = d.vectors.row(kk);
            let mut full = vec![0.0f64; dim];
            for (i, elem) in block.elems.iter().enumerate() {
                match *elem {
                    BlockElem::Pair { n, k_hi } => {
                        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
                        let k_lo = n_spin - 1 - k_hi;
                        full[spec.index(n, k_hi)] += inv_sqrt2 * w[i];
                        full[spec.index(n, k_lo)] += r * s * inv_sqrt2 * w[i];
                    }
                    BlockElem::Zero { n } => {
                        full[spec.index(n, (n_spin - 1) / 2)] = w[i];
                    }
                }
            }
            merged.push((d.energies[kk], parity, full));
        }
    }
    merged.sort_by(|a, b| a.0.total_cmp(&b.0));

    let n_states = merged.len();
    let mut energies = Vec::with_capacity(n_states);
    let mut parity = Vec::with_capacity(n_states);
    let mut vectors = Array2::<f64>::zeros((n_states, dim));
    for (row, (e, p, v)) in merged.into_iter().enumerate() {
        energies.push(e);
        parity.push(p);
        vectors.row_mut(row).assign(&ndarray::ArrayView1::from(&v));
    }
    Ok(LabeledDecomposition {
        energies,
        vectors,
        parity,
    })
}

/// Boson cutoff that covers the classical shell at energy-per-particle
/// `eps` with a `sigmas`·√N quantum margin. The maximum of the displaced
/// occupation ⟨A†A⟩/j over the shell is (1/2)·max_x [(4γ²/ω²)(1−x²) +
/// (2/ω)(ε − ω₀x)].
pub fn suggest_n_max(params: &DickeParams, eps: f64, sigmas: f64) -> usize {
    let (omega, omega0, gamma, j) = (
        params.omega(),
        params.omega0(),
        params.gamma(),
        params.j(),
    );
    let g = |x: f64| {
        (4.0 * gamma * gamma / (omega * omega)) * (1.0 - x * x)
            + 2.0 / omega * (eps - omega0 * x)
    };
    let mut best = g(-1.0).max(g(1.0));
    if gamma > 0.0 {
        let x_star = (-omega0 * omega / (4.0 * gamma * gamma)).clamp(-1.0, 1.0);
        best = best.max(g(x_star));
    }
    let n_cl = (0.5 * j * best).max(0.0);
    (n_cl + sigmas * (n_cl + 1.0).sqrt() + 8.0).ceil() as usize
}
