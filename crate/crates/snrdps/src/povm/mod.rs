//! Operators of the SNRDPS measurement on the single-photon space.
//!
//! The block of `L` pulses restricted to one detected photon lives on an
//! `L`-dimensional space with basis `|k⟩` ("the photon is in pulse k").
//! All operators needed by the security analysis are real symmetric in
//! this basis, so no complex arithmetic appears anywhere.
//!
//! Indices `k`, pairs `(i, j)` and delays follow the 1-based protocol
//! convention; matrix row/column indices are 0-based.

pub mod fullspace;

use crate::error::{invalid, Result};
use crate::linalg::SymOperator;

/// Block length `L` and half-delay count `t`, with the derived delay set
/// `R = ∪_{m=1..t} {m, L−m}` of cardinality `|R| = 2t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProtocolParams {
    block_len: usize,
    half_delays: usize,
}

impl ProtocolParams {
    /// Requires `L ≥ 3` and `0 < t < L/2` (strictly).
    pub fn new(block_len: usize, half_delays: usize) -> Result<Self> {
        if block_len < 3 {
            return Err(invalid(format!("block length {block_len} < 3")));
        }
        if half_delays == 0 || 2 * half_delays >= block_len {
            return Err(invalid(format!(
                "half-delay count {half_delays} must satisfy 0 < t < L/2 = {}/2",
                block_len
            )));
        }
        Ok(Self {
            block_len,
            half_delays,
        })
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn half_delays(&self) -> usize {
        self.half_delays
    }

    /// `|R| = 2t`.
    pub fn delay_count(&self) -> usize {
        2 * self.half_delays
    }

    /// The delay set, sorted ascending.
    pub fn delays(&self) -> Vec<usize> {
        let (l, t) = (self.block_len, self.half_delays);
        let mut r: Vec<usize> = (1..=t).collect();
        r.extend(l - t..=l - 1);
        r
    }

    /// Whether `d` belongs to the delay set.
    pub fn is_delay(&self, d: usize) -> bool {
        let (l, t) = (self.block_len, self.half_delays);
        (1..=t).contains(&d) || (l - t..=l - 1).contains(&d)
    }
}

/// Length-`L` bit pattern marking occupied register positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccupationVector {
    bits: Vec<bool>,
}

impl OccupationVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    /// Marks the given 0-based positions.
    pub fn from_ones(len: usize, ones: &[usize]) -> Result<Self> {
        let mut bits = vec![false; len];
        for &i in ones {
            if i >= len {
                return Err(invalid(format!("position {i} out of range for length {len}")));
            }
            bits[i] = true;
        }
        Ok(Self { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// Number of occupied positions.
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// 0-based occupied positions.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    /// Cyclic shift by `shift` positions.
    pub fn rotated(&self, shift: usize) -> Self {
        let n = self.bits.len();
        Self {
            bits: (0..n).map(|i| self.bits[(i + n - shift % n) % n]).collect(),
        }
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &Self) -> bool {
        self.bits.len() == other.bits.len()
            && self.bits.iter().zip(&other.bits).all(|(a, b)| !a || *b)
    }
}

/// State of the block restricted to one detected photon: a (possibly
/// sub-normalized) amplitude per pulse slot. All states needed here are
/// real in the pulse basis, so no complex arithmetic appears.
#[derive(Clone, Debug, PartialEq)]
pub struct SinglePhotonState {
    amplitudes: Vec<f64>,
}

impl SinglePhotonState {
    /// Accepts any squared norm up to `1 + 1e−12` (filtered states may be
    /// sub-normalized).
    pub fn new(amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.is_empty() || amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(invalid("amplitudes must be nonempty and finite"));
        }
        let norm2: f64 = amplitudes.iter().map(|a| a * a).sum();
        if norm2 > 1.0 + 1e-12 {
            return Err(invalid(format!("squared norm {norm2} exceeds 1")));
        }
        Ok(Self { amplitudes })
    }

    /// The photon sits in pulse `k` (1-based).
    pub fn basis(block_len: usize, k: usize) -> Result<Self> {
        if k < 1 || k > block_len {
            return Err(invalid(format!("index {k} out of range [1, {block_len}]")));
        }
        let mut amplitudes = vec![0.0; block_len];
        amplitudes[k - 1] = 1.0;
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Rank-1 density operator `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> SymOperator {
        SymOperator::from_fn(self.amplitudes.len(), |i, j| {
            self.amplitudes[i] * self.amplitudes[j]
        })
    }
}

/// Modular index sum `p +_L q`: `p+q` when it stays within `[1, L]`,
/// else `p+q−L`. Both operands must lie in `[1, L]`.
pub fn mod_sum(p: usize, q: usize, block_len: usize) -> Result<usize> {
    if p < 1 || p > block_len || q < 1 || q > block_len {
        return Err(invalid(format!(
            "mod_sum operands ({p}, {q}) out of range [1, {block_len}]"
        )));
    }
    let s = p + q;
    Ok(if s <= block_len { s } else { s - block_len })
}

/// Modular index difference `p −_L q`, the inverse of [`mod_sum`].
pub fn mod_sub(p: usize, q: usize, block_len: usize) -> Result<usize> {
    if p < 1 || p > block_len || q < 1 || q > block_len {
        return Err(invalid(format!(
            "mod_sub operands ({p}, {q}) out of range [1, {block_len}]"
        )));
    }
    Ok(if p > q { p - q } else { p + block_len - q })
}

fn check_bit(s: u8) -> Result<()> {
    if s > 1 {
        Err(invalid(format!("bit value {s} must be 0 or 1")))
    } else {
        Ok(())
    }
}

fn check_delay(params: &ProtocolParams, r: usize) -> Result<()> {
    if params.is_delay(r) {
        Ok(())
    } else {
        Err(invalid(format!("{r} is not in the delay set")))
    }
}

/// Rank-1 element (times 1/2) of the projector onto
/// `(|k⟩ + (−1)^s |k2⟩)/√2`, as an `L×L` matrix. 1-based indices.
fn half_pair_projector(block_len: usize, k: usize, k2: usize, s: u8) -> SymOperator {
    let mut m = SymOperator::zeros(block_len);
    let sign = if s == 0 { 1.0 } else { -1.0 };
    m.set_sym(k - 1, k - 1, 0.25);
    m.set_sym(k2 - 1, k2 - 1, 0.25);
    m.set_sym(k - 1, k2 - 1, 0.25 * sign);
    m
}

/// POVM element of Bob's actual measurement with delay `r`: outcome bit
/// `s` on the interfering pair `(k, k+r)`. Zero operator when `k` falls
/// outside `[1, L−r]` (the convention used throughout the analysis).
pub fn actual_povm(params: &ProtocolParams, r: usize, k: i64, s: u8) -> Result<SymOperator> {
    check_delay(params, r)?;
    check_bit(s)?;
    let l = params.block_len();
    if k < 1 || k > (l - r) as i64 {
        return Ok(SymOperator::zeros(l));
    }
    let k = k as usize;
    Ok(half_pair_projector(l, k, k + r, s))
}

/// POVM element of the dial measurement with delay `r`: outcome bit `s`
/// on the pair `(k, k +_L r)`, for `1 ≤ k ≤ L`.
pub fn dial_povm(params: &ProtocolParams, r: usize, k: usize, s: u8) -> Result<SymOperator> {
    check_delay(params, r)?;
    check_bit(s)?;
    let l = params.block_len();
    if k < 1 || k > l {
        return Err(invalid(format!("index {k} out of range [1, {l}]")));
    }
    let k2 = mod_sum(k, r, l)?;
    Ok(half_pair_projector(l, k, k2, s))
}

/// Probability that the dial measurement with delay `r_dial` yields bit
/// `s` on the announced pair `(i, j)`, `i < j`, for the density operator
/// `rho`. Pairs inconsistent with the delay give probability 0.
pub fn prob_dial(
    rho: &SymOperator,
    params: &ProtocolParams,
    r_dial: usize,
    s: u8,
    pair: (usize, usize),
) -> Result<f64> {
    check_delay(params, r_dial)?;
    check_bit(s)?;
    let l = params.block_len();
    let (i, j) = pair;
    if rho.dim() != l {
        return Err(invalid("density operator dimension mismatch"));
    }
    if i >= j || i < 1 || j > l {
        return Err(invalid(format!("pair ({i}, {j}) must satisfy 1 <= i < j <= L")));
    }
    let mut p = 0.0;
    if j - i == r_dial {
        p += rho.trace_product(&dial_povm(params, r_dial, i, s)?);
    }
    if j - i == l - r_dial {
        p += rho.trace_product(&dial_povm(params, r_dial, j, s)?);
    }
    Ok(p)
}

/// Probability that the actual measurement, run with delay `r_dial` or
/// `L−r_dial` chosen uniformly at random, yields bit `s` on the announced
/// pair `(i, j)`.
pub fn prob_actual_mixed(
    rho: &SymOperator,
    params: &ProtocolParams,
    r_dial: usize,
    s: u8,
    pair: (usize, usize),
) -> Result<f64> {
    check_delay(params, r_dial)?;
    check_bit(s)?;
    let l = params.block_len();
    let (i, j) = pair;
    if rho.dim() != l {
        return Err(invalid("density operator dimension mismatch"));
    }
    if i >= j || i < 1 || j > l {
        return Err(invalid(format!("pair ({i}, {j}) must satisfy 1 <= i < j <= L")));
    }
    let mut p = 0.0;
    if j - i == r_dial {
        p += 0.5 * rho.trace_product(&actual_povm(params, r_dial, i as i64, s)?);
    }
    if j - i == l - r_dial {
        p += 0.5 * rho.trace_product(&actual_povm(params, l - r_dial, i as i64, s)?);
    }
    Ok(p)
}

/// Bit-error operator on the single-photon space for an arbitrary delay
/// set: `1/2` on the diagonal, `−1/(2|R|)` at distances in the set,
/// `−1/|R|` at distance exactly `L/2` (unreachable for SNRDPS sets, where
/// `t < L/2`; retained for generality).
pub fn bit_error_operator_for_delays(block_len: usize, delays: &[usize]) -> SymOperator {
    let card = delays.len() as f64;
    SymOperator::from_fn(block_len, |m, n| {
        if m == n {
            0.5
        } else {
            let d = n - m; // n > m in the upper triangle
            if delays.contains(&d) {
                if 2 * d == block_len {
                    -1.0 / card
                } else {
                    -1.0 / (2.0 * card)
                }
            } else {
                0.0
            }
        }
    })
}

/// Bit-error operator `Π^(b)` for the SNRDPS delay set. Positive
/// semidefinite; every row sums to zero (the uniform vector spans its
/// kernel).
pub fn bit_error_operator(params: &ProtocolParams) -> SymOperator {
    bit_error_operator_for_delays(params.block_len(), &params.delays())
}

/// Phase-error operator `Π_a^(ph)` for occupation `a`: diagonal with
/// entry `m` equal to `δ_{a_m,1}/2 + (1/(2|R|)) Σ_{n: |m−n| ∈ R} δ_{a_n,1}`.
pub fn phase_error_operator(params: &ProtocolParams, a: &OccupationVector) -> Result<SymOperator> {
    let l = params.block_len();
    if a.len() != l {
        return Err(invalid(format!(
            "occupation vector length {} does not match block length {l}",
            a.len()
        )));
    }
    let card = params.delay_count() as f64;
    let mut m = SymOperator::zeros(l);
    for i in 0..l {
        let mut v = if a.get(i) { 0.5 } else { 0.0 };
        for n in 0..l {
            if n != i && a.get(n) && params.is_delay(i.abs_diff(n)) {
                v += 1.0 / (2.0 * card);
            }
        }
        m.set_sym(i, i, v);
    }
    Ok(m)
}

/// 0/1 circulant band matrix: entry `(l, m)` is 1 iff
/// `1 ≤ |l−m| ≤ k` or `n−k ≤ |l−m| ≤ n−1`.
pub fn cyclic_band_matrix(half_width: usize, n: usize) -> Result<SymOperator> {
    if half_width == 0 || half_width >= n {
        return Err(invalid(format!(
            "band half-width {half_width} must satisfy 1 <= k < n = {n}"
        )));
    }
    Ok(SymOperator::from_fn(n, |i, j| {
        let d = j - i; // upper triangle
        if d == 0 {
            0.0
        } else if d <= half_width || d >= n - half_width {
            1.0
        } else {
            0.0
        }
    }))
}

/// Diagonal 0/1 projector selecting the occupied positions of `a`.
pub fn occupation_projector(a: &OccupationVector) -> SymOperator {
    SymOperator::from_fn(a.len(), |i, j| {
        if i == j && a.get(i) {
            1.0
        } else {
            0.0
        }
    })
}

/// Cyclic shift `|m⟩ ↦ |m +_L κ⟩` applied by conjugation: returns
/// `V M V†`. Used by the translation-covariance checks.
pub fn conjugate_by_shift(m: &SymOperator, shift: usize) -> SymOperator {
    let n = m.dim();
    SymOperator::from_fn(n, |i, j| {
        m.get((i + n - shift % n) % n, (j + n - shift % n) % n)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_EIG_TOL;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_density(rng: &mut impl Rng, dim: usize) -> SymOperator {
        // normalized mixture of random pure states
        let mut rho = SymOperator::zeros(dim);
        let weights: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
        let wsum: f64 = weights.iter().sum();
        for w in &weights {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            for i in 0..dim {
                for j in i..dim {
                    rho.add_sym(i, j, w / wsum * v[i] * v[j]);
                }
            }
        }
        rho
    }

    #[test]
    fn params_validation() {
        assert!(ProtocolParams::new(2, 1).is_err());
        assert!(ProtocolParams::new(5, 0).is_err());
        assert!(ProtocolParams::new(6, 3).is_err()); // t = L/2 not allowed
        let p = ProtocolParams::new(7, 3).unwrap();
        assert_eq!(p.delays(), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(p.delay_count(), 6);
    }

    #[test]
    fn delay_set_closed_under_reflection() {
        for l in 3usize..12 {
            for t in 1..l.div_ceil(2) {
                if 2 * t >= l {
                    continue;
                }
                let p = ProtocolParams::new(l, t).unwrap();
                let r = p.delays();
                assert_eq!(r.len(), 2 * t);
                for &d in &r {
                    assert!((1..l).contains(&d));
                    assert!(p.is_delay(l - d));
                }
            }
        }
    }

    #[test]
    fn mod_sum_examples() {
        assert_eq!(mod_sum(3, 2, 7).unwrap(), 5);
        assert_eq!(mod_sum(5, 2, 7).unwrap(), 7);
        assert_eq!(mod_sum(6, 2, 7).unwrap(), 1);
        assert!(mod_sum(0, 2, 7).is_err());
        assert!(mod_sum(3, 8, 7).is_err());
    }

    #[test]
    fn mod_sub_inverts_mod_sum() {
        for l in 3..9 {
            for p in 1..=l {
                for q in 1..=l {
                    let s = mod_sum(p, q, l).unwrap();
                    assert_eq!(mod_sub(s, q, l).unwrap(), p);
                }
            }
        }
    }

    #[test]
    fn actual_povm_matrix_elements() {
        let p = ProtocolParams::new(5, 2).unwrap();
        let b = actual_povm(&p, 2, 1, 0).unwrap();
        assert!((b.get(0, 0) - 0.25).abs() < 1e-15);
        assert!((b.get(2, 2) - 0.25).abs() < 1e-15);
        assert!((b.get(0, 2) - 0.25).abs() < 1e-15);
        assert_eq!(b.get(1, 1), 0.0);
    }

    #[test]
    fn actual_povm_zero_convention() {
        let p = ProtocolParams::new(5, 2).unwrap();
        let z = actual_povm(&p, 2, 4, 0).unwrap(); // k > L - r
        assert_eq!(z, SymOperator::zeros(5));
        let z = actual_povm(&p, 2, -1, 1).unwrap();
        assert_eq!(z, SymOperator::zeros(5));
        assert!(actual_povm(&p, 2, 1, 2).is_err());
    }

    #[test]
    fn dial_povm_wraps() {
        let p = ProtocolParams::new(5, 2).unwrap();
        // (L=5, r=2, k=4, s=1): projector onto (|4> - |1>)/sqrt(2) halved
        let e = dial_povm(&p, 2, 4, 1).unwrap();
        assert!((e.get(3, 3) - 0.25).abs() < 1e-15);
        assert!((e.get(0, 0) - 0.25).abs() < 1e-15);
        assert!((e.get(3, 0) + 0.25).abs() < 1e-15);
        assert!(dial_povm(&p, 3, 0, 0).is_err()); // k out of range
        let p1 = ProtocolParams::new(5, 1).unwrap();
        assert!(dial_povm(&p1, 2, 1, 0).is_err()); // 2 not in {1, 4}
    }

    #[test]
    fn dial_wrap_identity() {
        // E_{k +_L r, s}^{(L-r)} == E_{k, s}^{(r)}
        for (l, t) in [(5usize, 2usize), (7, 3), (8, 2)] {
            let p = ProtocolParams::new(l, t).unwrap();
            for r in p.delays() {
                for k in 1..=l {
                    for s in 0..2u8 {
                        let lhs =
                            dial_povm(&p, l - r, mod_sum(k, r, l).unwrap(), s).unwrap();
                        let rhs = dial_povm(&p, r, k, s).unwrap();
                        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn dial_completeness() {
        // sum over k, s of the dial POVM is the identity for every delay
        for (l, t) in [(5usize, 1usize), (6, 2), (9, 4)] {
            let p = ProtocolParams::new(l, t).unwrap();
            for r in p.delays() {
                let mut sum = SymOperator::zeros(l);
                for k in 1..=l {
                    for s in 0..2u8 {
                        sum = sum.scaled_add(1.0, &dial_povm(&p, r, k, s).unwrap());
                    }
                }
                assert!(sum.max_abs_diff(&SymOperator::identity(l)) < 1e-14);
            }
        }
    }

    #[test]
    fn dial_decomposes_into_actual() {
        // E_{k,s}^{(r)} == B_{k,s}^{(r)} + B_{k-L+r,s}^{(L-r)}
        for (l, t) in [(5usize, 2usize), (8, 3)] {
            let p = ProtocolParams::new(l, t).unwrap();
            for r in p.delays() {
                for k in 1..=l {
                    for s in 0..2u8 {
                        let e = dial_povm(&p, r, k, s).unwrap();
                        let b1 = actual_povm(&p, r, k as i64, s).unwrap();
                        let b2 =
                            actual_povm(&p, l - r, k as i64 - l as i64 + r as i64, s).unwrap();
                        let sum = b1.scaled_add(1.0, &b2);
                        assert!(e.max_abs_diff(&sum) < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn single_photon_state_validation() {
        assert!(SinglePhotonState::new(vec![1.0, 0.1]).is_err()); // norm > 1
        assert!(SinglePhotonState::new(vec![f64::NAN]).is_err());
        let sub = SinglePhotonState::new(vec![0.5, 0.5]).unwrap(); // filtered
        assert!(sub.density().trace() <= 1.0);
        let basis = SinglePhotonState::basis(5, 2).unwrap();
        assert_eq!(basis.density().get(1, 1), 1.0);
        assert_eq!(basis.density().trace(), 1.0);
        assert!(SinglePhotonState::basis(5, 6).is_err());
    }

    #[test]
    fn prob_examples() {
        let p = ProtocolParams::new(5, 2).unwrap();
        let rho = SinglePhotonState::basis(5, 1).unwrap().density(); // |1><1|
        assert!((prob_dial(&rho, &p, 2, 0, (1, 3)).unwrap() - 0.25).abs() < 1e-15);
        assert!((prob_actual_mixed(&rho, &p, 2, 0, (1, 3)).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(prob_dial(&rho, &p, 2, 0, (2, 4)).unwrap(), 0.0);
        assert_eq!(prob_actual_mixed(&rho, &p, 2, 0, (2, 4)).unwrap(), 0.0);
        // maximally mixed: 1/(2L) and half of it
        let mixed = SymOperator::from_fn(5, |i, j| if i == j { 0.2 } else { 0.0 });
        assert!((prob_dial(&mixed, &p, 2, 1, (1, 3)).unwrap() - 0.1).abs() < 1e-15);
        assert!((prob_actual_mixed(&mixed, &p, 2, 1, (1, 3)).unwrap() - 0.05).abs() < 1e-15);
        // pair inconsistent with the delay
        assert_eq!(prob_dial(&rho, &p, 2, 0, (1, 2)).unwrap(), 0.0);
    }

    #[test]
    fn dial_equals_twice_actual_for_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for l in 3..=8usize {
            for t in 1..l.div_ceil(2) {
                if 2 * t >= l {
                    continue;
                }
                let p = ProtocolParams::new(l, t).unwrap();
                for _ in 0..20 {
                    let rho = random_density(&mut rng, l);
                    for r in p.delays() {
                        for s in 0..2u8 {
                            for i in 1..l {
                                for j in (i + 1)..=l {
                                    let d = prob_dial(&rho, &p, r, s, (i, j)).unwrap();
                                    let a =
                                        prob_actual_mixed(&rho, &p, r, s, (i, j)).unwrap();
                                    assert!(
                                        (d - 2.0 * a).abs() < 1e-12,
                                        "L={l} t={t} r={r} s={s} pair=({i},{j})"
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bit_error_operator_elements() {
        let p = ProtocolParams::new(5, 1).unwrap();
        let m = bit_error_operator(&p);
        assert!((m.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((m.get(0, 1) + 0.25).abs() < 1e-15);
        assert!((m.get(0, 4) + 0.25).abs() < 1e-15); // |1-5| = 4 = L-1
        assert_eq!(m.get(0, 2), 0.0);
    }

    #[test]
    fn bit_error_operator_rows_sum_to_zero() {
        for (l, t) in [(5usize, 1usize), (8, 3), (32, 5)] {
            let p = ProtocolParams::new(l, t).unwrap();
            let m = bit_error_operator(&p);
            let u = vec![1.0; l];
            for v in m.matvec(&u) {
                assert!(v.abs() < 1e-14);
            }
            // PSD with lambda_max <= 1
            assert!(m.smallest_eigenvalue(DEFAULT_EIG_TOL).unwrap() > -1e-12);
            assert!(m.largest_eigenvalue(DEFAULT_EIG_TOL).unwrap() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn bit_error_operator_half_block_branch() {
        // artificial delay set containing L/2: the displayed form doubles
        // that entry; SNRDPS sets (t < L/2) never reach this branch
        let m = bit_error_operator_for_delays(6, &[1, 3, 5]);
        assert!((m.get(0, 3) + 1.0 / 3.0).abs() < 1e-15); // distance 3 = L/2
        assert!((m.get(0, 1) + 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn phase_error_operator_examples() {
        let p = ProtocolParams::new(5, 1).unwrap();
        let zero = phase_error_operator(&p, &OccupationVector::zeros(5)).unwrap();
        assert_eq!(zero, SymOperator::zeros(5));

        let ones = OccupationVector::new(vec![true; 5]);
        let m = phase_error_operator(&p, &ones).unwrap();
        for i in 0..5 {
            assert!((m.get(i, i) - 1.0).abs() < 1e-15);
        }

        let a = OccupationVector::from_ones(5, &[0]).unwrap();
        let m = phase_error_operator(&p, &a).unwrap();
        assert!((m.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((m.get(1, 1) - 0.25).abs() < 1e-15);
        assert!((m.get(4, 4) - 0.25).abs() < 1e-15);
        assert_eq!(m.get(2, 2), 0.0);
        assert_eq!(m.get(3, 3), 0.0);
    }

    #[test]
    fn phase_error_operator_monotone_in_occupation() {
        let p = ProtocolParams::new(8, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let small: Vec<bool> = (0..8).map(|_| rng.gen_bool(0.4)).collect();
            let big: Vec<bool> = small
                .iter()
                .map(|&b| b || rng.gen_bool(0.3))
                .collect();
            let a = OccupationVector::new(small);
            let b = OccupationVector::new(big);
            assert!(a.le(&b));
            let ma = phase_error_operator(&p, &a).unwrap();
            let mb = phase_error_operator(&p, &b).unwrap();
            for i in 0..8 {
                assert!(ma.get(i, i) <= mb.get(i, i) + 1e-15);
            }
        }
    }

    #[test]
    fn cyclic_band_matrix_examples() {
        let a13 = cyclic_band_matrix(1, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a13.get(i, j), if i == j { 0.0 } else { 1.0 });
            }
        }
        let a15 = cyclic_band_matrix(1, 5).unwrap();
        assert_eq!(a15.get(0, 2), 0.0);
        assert_eq!(a15.get(0, 4), 1.0);
        assert!(cyclic_band_matrix(3, 3).is_err());
    }

    #[test]
    fn occupation_projector_action() {
        let a = OccupationVector::from_ones(5, &[0, 2]).unwrap();
        let proj = occupation_projector(&a);
        assert_eq!(proj.trace(), 2.0);
        // conjugation zeroes the complementary rows and columns
        let m = SymOperator::from_fn(5, |i, j| (i + j) as f64 + 1.0);
        let restricted = SymOperator::from_fn(5, |i, j| {
            if a.get(i) && a.get(j) {
                m.get(i, j)
            } else {
                0.0
            }
        });
        // P M P via two matvec-free products on entries
        let pmp = SymOperator::from_fn(5, |i, j| proj.get(i, i) * m.get(i, j) * proj.get(j, j));
        assert!(pmp.max_abs_diff(&restricted) < 1e-15);
        // idempotence
        let pp = SymOperator::from_fn(5, |i, j| proj.get(i, i) * proj.get(i, j));
        assert!(pp.max_abs_diff(&proj) < 1e-15);
    }

    #[test]
    fn translation_leaves_spectrum_invariant() {
        let p = ProtocolParams::new(9, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pib = bit_error_operator(&p);
        for _ in 0..25 {
            let bits: Vec<bool> = (0..9).map(|_| rng.gen_bool(0.5)).collect();
            let a = OccupationVector::new(bits);
            let lam = rng.gen_range(0.0..3.0);
            let shift = rng.gen_range(1..9);
            let m = phase_error_operator(&p, &a)
                .unwrap()
                .scaled_add(-lam, &pib);
            let m_shifted = phase_error_operator(&p, &a.rotated(shift))
                .unwrap()
                .scaled_add(-lam, &pib);
            let e1 = m.largest_eigenvalue(DEFAULT_EIG_TOL).unwrap();
            let e2 = m_shifted.largest_eigenvalue(DEFAULT_EIG_TOL).unwrap();
            assert!((e1 - e2).abs() < 1e-10);
            // conjugating by the shift operator gives the same matrix
            assert!(conjugate_by_shift(&m, shift).max_abs_diff(&m_shifted) < 1e-12);
        }
    }
}
