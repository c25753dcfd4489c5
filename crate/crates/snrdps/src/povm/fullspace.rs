//! Bit/phase error operators on the full register space, built directly
//! from their defining sums and used only for verification.
//!
//! The space is `H_A ⊗ H_B` where `H_A` is the `L`-qubit register
//! (dimension `2^L`) and `H_B` the single-photon space (dimension `L`).
//! A basis state is `|a⟩|k⟩` with `a` a bit mask and `k ∈ [1, L]`, indexed
//! as `a·L + (k−1)`. Everything is real in this basis.
//!
//! Block length is capped at 6 (dimension `2^6·6 = 384`): the identities
//! checked here are basis-independent, so small blocks already exercise
//! every construction branch.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::SymOperator;
use crate::povm::{
    bit_error_operator, dial_povm, occupation_projector, phase_error_operator, OccupationVector,
    ProtocolParams,
};

/// Largest block length accepted by the full-space builders.
pub const MAX_FULLSPACE_BLOCK: usize = 6;

/// Dense operator on the register ⊗ photon space.
#[derive(Clone, Debug)]
pub struct FullOperator {
    dim: usize,
    data: Vec<f64>,
}

impl FullOperator {
    fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] += v;
    }

    pub fn max_abs_diff(&self, other: &FullOperator) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn matmul(&self, other: &FullOperator) -> FullOperator {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = FullOperator::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += aik * b;
                }
            }
        }
        out
    }

    /// `U · self · U` for a symmetric involution `U`.
    pub fn conjugate_by(&self, u: &FullOperator) -> FullOperator {
        u.matmul(self).matmul(u)
    }
}

fn guard(params: &ProtocolParams) -> Result<(usize, usize)> {
    let l = params.block_len();
    if l > MAX_FULLSPACE_BLOCK {
        return Err(Error::ResourceGuard(format!(
            "full-space construction is limited to L <= {MAX_FULLSPACE_BLOCK}, got {l}"
        )));
    }
    Ok((l, (1usize << l) * l))
}

#[inline]
fn idx(a: usize, k0: usize, l: usize) -> usize {
    a * l + k0
}

/// Adds `scale · (two-qubit A operator at qubits qi, qj) ⊗ bop`.
/// `a4` is indexed by `2·bit_i + bit_j` on both sides.
fn add_two_qubit_kron(
    target: &mut FullOperator,
    l: usize,
    qi: usize,
    qj: usize,
    a4: &[[f64; 4]; 4],
    bop: &SymOperator,
    scale: f64,
) {
    let masks = 1usize << l;
    for a in 0..masks {
        let ai = (a >> qi) & 1;
        let aj = (a >> qj) & 1;
        let row4 = 2 * ai + aj;
        for bi in 0..2usize {
            for bj in 0..2usize {
                let coeff = a4[row4][2 * bi + bj];
                if coeff == 0.0 {
                    continue;
                }
                let a2 = (a & !(1 << qi) & !(1 << qj)) | (bi << qi) | (bj << qj);
                for k in 0..l {
                    for k2 in 0..l {
                        let v = bop.get(k, k2);
                        if v != 0.0 {
                            target.add(idx(a, k, l), idx(a2, k2, l), scale * coeff * v);
                        }
                    }
                }
            }
        }
    }
}

/// `P(H|s⟩)` as a 2×2 matrix.
fn hadamard_projector(s: u8) -> [[f64; 2]; 2] {
    let hs = if s == 0 {
        [FRAC_1_SQRT_2, FRAC_1_SQRT_2]
    } else {
        [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]
    };
    [
        [hs[0] * hs[0], hs[0] * hs[1]],
        [hs[1] * hs[0], hs[1] * hs[1]],
    ]
}

/// The three Alice-circuit measurement operators `M_m` mapping the qubit
/// pair `(i, j)` to the output qubit, as 2×4 matrices (rows: output qubit
/// basis, columns: `2·s_i + s_j`).
fn alice_circuit_operators() -> [[[f64; 4]; 2]; 3] {
    let c = FRAC_1_SQRT_2;
    let mut m1 = [[0.0; 4]; 2];
    // H|0><01| + H|1><10|
    m1[0][1] = c;
    m1[1][1] = c;
    m1[0][2] = c;
    m1[1][2] = -c;
    let mut m2 = [[0.0; 4]; 2];
    // (|0><00| + |0><11|)/sqrt(2)
    m2[0][0] = c;
    m2[0][3] = c;
    let mut m3 = [[0.0; 4]; 2];
    // (|1><00| - |1><11|)/sqrt(2)
    m3[1][0] = c;
    m3[1][3] = -c;
    [m1, m2, m3]
}

/// `Σ_m M_m† P(H|s⟩) M_m` as a 4×4 operator on the qubit pair.
fn alice_backaction(s: u8) -> [[f64; 4]; 4] {
    let ms = alice_circuit_operators();
    let hs = if s == 0 {
        [FRAC_1_SQRT_2, FRAC_1_SQRT_2]
    } else {
        [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]
    };
    let mut out = [[0.0; 4]; 4];
    for m in &ms {
        // v = M^T (H|s>)
        let mut v = [0.0; 4];
        for (x, vx) in v.iter_mut().enumerate() {
            *vx = m[0][x] * hs[0] + m[1][x] * hs[1];
        }
        for x in 0..4 {
            for y in 0..4 {
                out[x][y] += v[x] * v[y];
            }
        }
    }
    out
}

/// Bob's filtering operation `F_k^{(r)}` as a 2×L matrix (rows: output
/// qubit basis). 1-based `k`.
fn filter_operation(l: usize, r: usize, k: usize) -> [Vec<f64>; 2] {
    let c = FRAC_1_SQRT_2;
    let h0 = [c, c];
    let h1 = [c, -c];
    let mut rows = [vec![0.0; l], vec![0.0; l]];
    if k <= l - r {
        // (H|1><k| + H|0><k+r|)/sqrt(2)
        for b in 0..2 {
            rows[b][k - 1] += c * h1[b];
            rows[b][k + r - 1] += c * h0[b];
        }
    } else {
        // (H|1><k+r-L| + H|0><k|)/sqrt(2)
        for b in 0..2 {
            rows[b][k + r - l - 1] += c * h1[b];
            rows[b][k - 1] += c * h0[b];
        }
    }
    rows
}

/// `F_k^{(r)†} P(H|s̄⟩) F_k^{(r)}` on the photon space.
fn filter_backaction(l: usize, r: usize, k: usize, sbar: u8) -> SymOperator {
    let f = filter_operation(l, r, k);
    let p2 = hadamard_projector(sbar);
    SymOperator::from_fn(l, |x, y| {
        let mut v = 0.0;
        for b in 0..2 {
            for b2 in 0..2 {
                v += f[b][x] * p2[b][b2] * f[b2][y];
            }
        }
        v
    })
}

/// The summed bit- and phase-error operators and the sign-flip unitary,
/// all on the full register ⊗ photon space.
pub struct FullSpaceOps {
    pub e_bit: FullOperator,
    pub e_phase: FullOperator,
    pub unitary: FullOperator,
}

/// Builds `Σ_{(i,j): j−i ∈ R} ê^(b)_{i,j}`, the matching phase-error sum,
/// and the unitary, each directly from its definition.
pub fn build_fullspace_error_ops(params: &ProtocolParams) -> Result<FullSpaceOps> {
    build_error_ops_inner(params, false)
}

/// `corrupt` drops the wrap-around delta branch of the bit-error POVM —
/// the negative control used by the verification suite.
pub(crate) fn build_error_ops_inner(
    params: &ProtocolParams,
    corrupt: bool,
) -> Result<FullSpaceOps> {
    let (l, dim) = guard(params)?;
    let card = params.delay_count() as f64;
    let mut e_bit = FullOperator::zeros(dim);
    let mut e_phase = FullOperator::zeros(dim);

    for i in 1..=l {
        for j in (i + 1)..=l {
            if !params.is_delay(j - i) {
                continue;
            }
            // bit error at the announced pair (i, j)
            for si in 0..2u8 {
                for sj in 0..2u8 {
                    let sbar = si ^ sj ^ 1;
                    let phs_i = hadamard_projector(si);
                    let phs_j = hadamard_projector(sj);
                    let mut a4 = [[0.0; 4]; 4];
                    for (x, row) in a4.iter_mut().enumerate() {
                        for (y, v) in row.iter_mut().enumerate() {
                            *v = phs_i[x >> 1][y >> 1] * phs_j[x & 1][y & 1];
                        }
                    }
                    let mut bop = SymOperator::zeros(l);
                    for r in params.delays() {
                        if j == i + r {
                            bop = bop.scaled_add(1.0, &dial_povm(params, r, i, sbar)?);
                        }
                        if !corrupt && i + l == j + r {
                            bop = bop.scaled_add(1.0, &dial_povm(params, r, j, sbar)?);
                        }
                    }
                    add_two_qubit_kron(&mut e_bit, l, i - 1, j - 1, &a4, &bop, 1.0 / card);
                }
            }
            // phase error at the announced pair (i, j)
            for s in 0..2u8 {
                let sbar = s ^ 1;
                let a4 = alice_backaction(s);
                let mut bop = SymOperator::zeros(l);
                for r in params.delays() {
                    if j == i + r {
                        bop = bop.scaled_add(1.0, &filter_backaction(l, r, i, sbar));
                    }
                    if i + l == j + r {
                        bop = bop.scaled_add(1.0, &filter_backaction(l, r, j, sbar));
                    }
                }
                add_two_qubit_kron(&mut e_phase, l, i - 1, j - 1, &a4, &bop, 1.0 / card);
            }
        }
    }

    Ok(FullSpaceOps {
        e_bit,
        e_phase,
        unitary: sign_flip_unitary(params)?,
    })
}

/// The unitary acting as `(−1)^{s_k}` on Hadamard-basis register states
/// paired with `|k⟩`, assembled from that definition:
/// `U = Σ_{s,k} (−1)^{s_k} P(H^{⊗L}|s⟩) ⊗ P(|k⟩)`.
pub fn sign_flip_unitary(params: &ProtocolParams) -> Result<FullOperator> {
    let (l, dim) = guard(params)?;
    let masks = 1usize << l;
    let scale = 1.0 / masks as f64; // ⟨a|H^{⊗L}|s⟩ = ±2^{-L/2}
    let mut u = FullOperator::zeros(dim);
    for s in 0..masks {
        for k0 in 0..l {
            let sign_k = if (s >> k0) & 1 == 1 { -1.0 } else { 1.0 };
            for a in 0..masks {
                let pa = if ((a & s).count_ones() & 1) == 1 {
                    -1.0
                } else {
                    1.0
                };
                for a2 in 0..masks {
                    let pa2 = if ((a2 & s).count_ones() & 1) == 1 {
                        -1.0
                    } else {
                        1.0
                    };
                    u.add(idx(a, k0, l), idx(a2, k0, l), sign_k * pa * pa2 * scale);
                }
            }
        }
    }
    Ok(u)
}

/// `1_A ⊗ Π^(b)` — the unitary conjugate of the summed bit-error POVM.
pub fn bit_error_target(params: &ProtocolParams) -> Result<FullOperator> {
    let (l, dim) = guard(params)?;
    let pib = bit_error_operator(params);
    let mut out = FullOperator::zeros(dim);
    for a in 0..(1usize << l) {
        for k in 0..l {
            for k2 in 0..l {
                let v = pib.get(k, k2);
                if v != 0.0 {
                    out.add(idx(a, k, l), idx(a, k2, l), v);
                }
            }
        }
    }
    Ok(out)
}

/// `Σ_a P(|a⟩) ⊗ Π_a^(ph)` — the unitary conjugate of the summed
/// phase-error POVM.
pub fn phase_error_target(params: &ProtocolParams) -> Result<FullOperator> {
    let (l, dim) = guard(params)?;
    let mut out = FullOperator::zeros(dim);
    for a in 0..(1usize << l) {
        let occ = occupation_from_mask(a, l);
        let pia = phase_error_operator(params, &occ)?;
        for k in 0..l {
            out.add(idx(a, k, l), idx(a, k, l), pia.get(k, k));
        }
    }
    Ok(out)
}

/// The projector `P^(ν)` onto register weights `ν, ν−2, ν−4, …` (diagonal
/// in the computational basis).
pub fn range_projector(params: &ProtocolParams, nu: u32) -> Result<FullOperator> {
    let (l, dim) = guard(params)?;
    let mut out = FullOperator::zeros(dim);
    for a in 0..(1usize << l) {
        let w = (a as u32).count_ones();
        if w <= nu && (nu - w).is_multiple_of(2) {
            for k in 0..l {
                out.add(idx(a, k, l), idx(a, k, l), 1.0);
            }
        }
    }
    Ok(out)
}

/// What `U P^(ν) U†` must equal:
/// `Σ_{|a| ∈ {ν−1, ν−3, …}} P(|a⟩)⊗1 + Σ_{|a| = ν+1} P(|a⟩)⊗P_a`.
pub fn range_projector_target(params: &ProtocolParams, nu: u32) -> Result<FullOperator> {
    let (l, dim) = guard(params)?;
    let mut out = FullOperator::zeros(dim);
    for a in 0..(1usize << l) {
        let w = (a as u32).count_ones();
        if nu >= 1 && w < nu && (nu - 1 - w).is_multiple_of(2) {
            for k in 0..l {
                out.add(idx(a, k, l), idx(a, k, l), 1.0);
            }
        } else if w == nu + 1 {
            let proj = occupation_projector(&occupation_from_mask(a, l));
            for k in 0..l {
                out.add(idx(a, k, l), idx(a, k, l), proj.get(k, k));
            }
        }
    }
    Ok(out)
}

pub(crate) fn occupation_from_mask(mask: usize, l: usize) -> OccupationVector {
    OccupationVector::new((0..l).map(|i| (mask >> i) & 1 == 1).collect())
}
