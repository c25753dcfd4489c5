//! Per-photon-number phase-error upper bounds.
//!
//! For `ν` photons the achievable `(bit error, phase error)` region is
//! bounded through the largest eigenvalues of two operator families,
//! split by register weight `ν∓1`:
//!
//! * the plus branch restricts `Π_a^(ph) − λΠ^(b)` to weight-`ν+1`
//!   occupations and collapses to a `(ν+1)×(ν+1)` matrix (closed form
//!   `(1−λ)/2 + ν(1+λ)/(2|R|)` when `ν ≤ |R|/2`);
//! * the minus branch keeps the full `L×L` operator at weight `ν−1`.
//!
//! Each branch yields a bound `f_±(x) = min_{λ≥0} {λx + Ω_±(λ)}`; the
//! final curve is the upper concave envelope of their pointwise max,
//! which realizes the optimal mixture of the branches. `ν = 1` has the
//! closed form `min{(|R|+1)/(|R|−1)·x, 1/2 + 1/(2|R|)}`; `ν ≥ 3` is
//! treated pessimistically (bound 1/2, entropy 1).

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    golden_min, log_grid, upper_concave_envelope, PLCurve, SymOperator, DEFAULT_EIG_TOL,
};
use crate::povm::{
    bit_error_operator, cyclic_band_matrix, ProtocolParams,
};
use crate::rate::h2;

/// Which occupation-weight family an evaluator works on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Weight `ν+1`, projected onto the occupied positions.
    Plus,
    /// Weight `ν−1`, on the full single-photon space.
    Minus,
}

/// Grid knobs for the λ minimizations and the bit-error sampling.
#[derive(Clone, Copy, Debug)]
pub struct BoundsConfig {
    /// Log-spaced λ grid bounds (λ = 0 is always prepended).
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub lambda_count: usize,
    /// Number of bit-error samples on `[0, 1/2]`.
    pub ebit_samples: usize,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            lambda_lo: 1e-4,
            lambda_hi: 1e4,
            lambda_count: 512,
            ebit_samples: 400,
        }
    }
}

impl BoundsConfig {
    fn lambda_grid(&self) -> Vec<f64> {
        let mut g = vec![0.0];
        g.extend(log_grid(self.lambda_lo, self.lambda_hi, self.lambda_count));
        g
    }
}

/// Closed form for the plus branch, valid for `ν ≤ |R|/2`:
/// `Ω₊^(ν)(λ) = (1−λ)/2 + ν(1+λ)/(2|R|)`.
pub fn omega_plus_closed_form(nu: u32, card_r: usize, lambda: f64) -> Result<f64> {
    if 2 * nu as usize > card_r {
        return Err(Error::Unsupported(format!(
            "closed form needs nu <= |R|/2 (nu = {nu}, |R| = {card_r}); use the reduced matrix"
        )));
    }
    if lambda < 0.0 {
        return Err(invalid("lambda must be nonnegative"));
    }
    let card = card_r as f64;
    Ok((1.0 - lambda) / 2.0 + nu as f64 * (1.0 + lambda) / (2.0 * card))
}

/// Constant and λ-linear parts of the reduced plus-branch matrix for the
/// consecutive-ones occupation (the maximizer over occupation classes).
fn reduced_plus_parts(params: &ProtocolParams, nu: u32) -> (SymOperator, SymOperator) {
    let n = nu as usize + 1;
    let card = params.delay_count() as f64;
    let adjacent = |m: usize, k: usize| params.is_delay(m.abs_diff(k));
    let base = SymOperator::from_fn(n, |m, k| {
        if m == k {
            let count = (0..n).filter(|&j| j != m && adjacent(m, j)).count();
            0.5 + count as f64 / (2.0 * card)
        } else {
            0.0
        }
    });
    let linear = SymOperator::from_fn(n, |m, k| {
        if m == k {
            -0.5
        } else if adjacent(m, k) {
            1.0 / (2.0 * card)
        } else {
            0.0
        }
    });
    (base, linear)
}

/// Plus branch via the reduced `(ν+1)×(ν+1)` matrix. Valid for any
/// `0 ≤ ν ≤ L−1`; agrees with [`omega_plus_closed_form`] when `ν ≤ |R|/2`.
pub fn omega_plus_reduced(params: &ProtocolParams, nu: u32, lambda: f64) -> Result<f64> {
    if nu as usize > params.block_len() - 1 {
        return Err(invalid(format!(
            "nu = {nu} exceeds L - 1 = {}",
            params.block_len() - 1
        )));
    }
    if lambda < 0.0 {
        return Err(invalid("lambda must be nonnegative"));
    }
    let (base, linear) = reduced_plus_parts(params, nu);
    base.scaled_add(lambda, &linear)
        .largest_eigenvalue(DEFAULT_EIG_TOL)
}

/// Constant and λ-linear parts of the minus-branch operator for `ν = 2`:
/// `diag{1…1, |R|, 1…1, 0…0}/(2|R|) − (λ/2)·1 + (λ/(2|R|))·A^(|R|/2)_L`.
fn minus_nu2_parts(params: &ProtocolParams) -> (SymOperator, SymOperator) {
    let l = params.block_len();
    let t = params.half_delays();
    let card = params.delay_count() as f64;
    let mut diag = SymOperator::zeros(l);
    for i in 0..t {
        diag.set_sym(i, i, 1.0 / (2.0 * card));
        diag.set_sym(t + 1 + i, t + 1 + i, 1.0 / (2.0 * card));
    }
    diag.set_sym(t, t, 0.5);
    let band = cyclic_band_matrix(t, l).expect("1 <= t < L");
    let linear = SymOperator::from_fn(l, |i, j| {
        if i == j {
            -0.5
        } else {
            band.get(i, j) / (2.0 * card)
        }
    });
    (diag, linear)
}

/// Minus branch `Ω₋^(ν)(λ)`. Supported for `ν ∈ {1, 2}` (for `ν ≥ 3` the
/// analysis replaces the whole bound by 1).
pub fn omega_minus(params: &ProtocolParams, nu: u32, lambda: f64) -> Result<f64> {
    if lambda < 0.0 {
        return Err(invalid("lambda must be nonnegative"));
    }
    match nu {
        1 => {
            // weight-0 occupation: the phase operator vanishes
            let neg_bit = SymOperator::zeros(params.block_len())
                .scaled_add(-lambda, &bit_error_operator(params));
            neg_bit.largest_eigenvalue(DEFAULT_EIG_TOL)
        }
        2 => {
            let (diag, linear) = minus_nu2_parts(params);
            diag.scaled_add(lambda, &linear)
                .largest_eigenvalue(DEFAULT_EIG_TOL)
        }
        _ => Err(Error::Unsupported(format!(
            "minus branch is only evaluated for nu in {{1, 2}}, got {nu}"
        ))),
    }
}

/// Branch evaluator with a precomputed Ω grid so that
/// `f(x) = min_λ {λx + Ω(λ)}` amortizes across many `x`.
pub struct OmegaEvaluator {
    params: ProtocolParams,
    nu: u32,
    branch: Branch,
    lambdas: Vec<f64>,
    omegas: Vec<f64>,
    kind: EvaluatorKind,
}

enum EvaluatorKind {
    ClosedPlus,
    /// affine family `base + λ·linear`
    Affine {
        base: SymOperator,
        linear: SymOperator,
    },
    /// `Ω(λ) = λ · coeff` (minus branch at ν = 1)
    Scaled {
        coeff: f64,
    },
}

impl OmegaEvaluator {
    pub fn new(
        params: &ProtocolParams,
        nu: u32,
        branch: Branch,
        cfg: &BoundsConfig,
    ) -> Result<Self> {
        let kind = match branch {
            Branch::Plus => {
                if nu as usize > params.block_len() - 1 {
                    return Err(invalid(format!("nu = {nu} exceeds L - 1")));
                }
                if 2 * nu as usize <= params.delay_count() {
                    EvaluatorKind::ClosedPlus
                } else {
                    let (base, linear) = reduced_plus_parts(params, nu);
                    EvaluatorKind::Affine { base, linear }
                }
            }
            Branch::Minus => match nu {
                1 => EvaluatorKind::Scaled {
                    coeff: omega_minus(params, 1, 1.0)?,
                },
                2 => {
                    let (base, linear) = minus_nu2_parts(params);
                    EvaluatorKind::Affine { base, linear }
                }
                _ => {
                    return Err(Error::Unsupported(format!(
                        "minus branch is only evaluated for nu in {{1, 2}}, got {nu}"
                    )))
                }
            },
        };
        let mut ev = Self {
            params: *params,
            nu,
            branch,
            lambdas: cfg.lambda_grid(),
            omegas: Vec::new(),
            kind,
        };
        ev.omegas = ev.lambdas.iter().map(|&l| ev.omega(l)).collect();
        Ok(ev)
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    /// `Ω(λ)` for this branch.
    pub fn omega(&self, lambda: f64) -> f64 {
        match &self.kind {
            EvaluatorKind::ClosedPlus => {
                omega_plus_closed_form(self.nu, self.params.delay_count(), lambda)
                    .expect("validated at construction")
            }
            EvaluatorKind::Affine { base, linear } => base
                .scaled_add(lambda, linear)
                .largest_eigenvalue(DEFAULT_EIG_TOL)
                .expect("finite affine family"),
            EvaluatorKind::Scaled { coeff } => lambda * coeff,
        }
    }

    /// `f(x) = max(0, min_{λ≥0} {λx + Ω(λ)})`: grid minimum refined by
    /// golden section (the objective is convex in λ).
    pub fn branch_bound(&self, x: f64) -> f64 {
        if let EvaluatorKind::ClosedPlus = self.kind {
            let card = self.params.delay_count() as f64;
            let sat = 0.5 + self.nu as f64 / (2.0 * card);
            return if x < 0.5 - self.nu as f64 / (2.0 * card) {
                0.0
            } else {
                sat
            };
        }
        let mut best = f64::INFINITY;
        let mut best_i = 0;
        for (i, (&l, &om)) in self.lambdas.iter().zip(&self.omegas).enumerate() {
            let v = l * x + om;
            if v < best {
                best = v;
                best_i = i;
            }
        }
        let lo = self.lambdas[best_i.saturating_sub(1)];
        let hi = self.lambdas[(best_i + 1).min(self.lambdas.len() - 1)];
        if hi > lo {
            let mut f = |l: f64| l * x + self.omega(l);
            let tol = 1e-3 * (hi - lo) + 1e-12;
            let (_, refined) = golden_min(&mut f, lo, hi, tol);
            best = best.min(refined);
        }
        best.max(0.0)
    }
}

/// Single branch bound `f_±^(ν)(x)`: the closed form where it exists,
/// otherwise the grid-plus-golden minimization.
pub fn branch_bound(
    params: &ProtocolParams,
    nu: u32,
    branch: Branch,
    x: f64,
    cfg: &BoundsConfig,
) -> Result<f64> {
    check_ebit(x)?;
    Ok(OmegaEvaluator::new(params, nu, branch, cfg)?.branch_bound(x))
}

fn check_ebit(x: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&x) {
        return Err(invalid(format!("bit error rate {x} outside [0, 1/2]")));
    }
    Ok(())
}

/// Closed form for the single-photon bound:
/// `min{(|R|+1)/(|R|−1)·x, 1/2 + 1/(2|R|)}`.
fn nu1_closed_form(card_r: usize, x: f64) -> f64 {
    let card = card_r as f64;
    ((card + 1.0) / (card - 1.0) * x).min(0.5 + 1.0 / (2.0 * card))
}

/// Inclusive sample grid on `[0, 1/2]` plus the exact plus-branch
/// saturation breakpoint, which a uniform grid misses and without which
/// the envelope undershoots the closed form near the kink.
fn sample_grid(params: &ProtocolParams, nu: u32, n: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..n).map(|i| 0.5 * i as f64 / (n - 1) as f64).collect();
    if 2 * nu as usize <= params.delay_count() {
        let kink = 0.5 - nu as f64 / (2.0 * params.delay_count() as f64);
        if kink > 0.0 && kink < 0.5 && !xs.contains(&kink) {
            xs.push(kink);
            xs.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
        }
    }
    xs
}

/// The generic mixture pipeline for `ν ∈ {1, 2}`: sample both branch
/// bounds, take the pointwise max and return its upper concave envelope
/// (the best convex combination of branch points).
pub fn mixture_envelope(params: &ProtocolParams, nu: u32, cfg: &BoundsConfig) -> Result<PLCurve> {
    if !(nu == 1 || nu == 2) {
        return Err(Error::Unsupported(format!(
            "the mixture pipeline covers nu in {{1, 2}}, got {nu}"
        )));
    }
    let plus = OmegaEvaluator::new(params, nu, Branch::Plus, cfg)?;
    let minus = OmegaEvaluator::new(params, nu, Branch::Minus, cfg)?;
    let points: Vec<(f64, f64)> = sample_grid(params, nu, cfg.ebit_samples)
        .into_iter()
        .map(|x| (x, plus.branch_bound(x).max(minus.branch_bound(x))))
        .collect();
    upper_concave_envelope(&points)
}

/// Upper bound on the phase error rate for `ν` photons at bit error rate
/// `e_bit`. Uncapped (callers feeding the binary entropy cap at 1/2);
/// `ν = 2` builds the envelope afresh — use [`PhaseErrorBounds`] when
/// evaluating many points.
pub fn phase_error_bound(params: &ProtocolParams, nu: u32, e_bit: f64) -> Result<f64> {
    check_ebit(e_bit)?;
    match nu {
        0 => Ok(if e_bit < 0.5 { 0.0 } else { 0.5 }),
        1 => Ok(nu1_closed_form(params.delay_count(), e_bit)),
        2 => Ok(mixture_envelope(params, 2, &BoundsConfig::default())?.eval(e_bit)),
        _ => Ok(0.5),
    }
}

/// Precomputed bound curves and entropy tables for one parameter set.
///
/// The ν = 2 envelope and the entropy samples are built once; rate scans
/// share the instance read-only across threads.
pub struct PhaseErrorBounds {
    params: ProtocolParams,
    cfg: BoundsConfig,
    curve2: PLCurve,
    /// supremum grid for the supporting-line intercepts: half-open
    /// `[0, 1/2)` so that the ν = 0 bound is identically zero on it
    sup_xs: Vec<f64>,
    sup_h: [Vec<f64>; 3],
}

impl PhaseErrorBounds {
    pub fn new(params: &ProtocolParams) -> Result<Self> {
        Self::with_config(params, BoundsConfig::default())
    }

    pub fn with_config(params: &ProtocolParams, cfg: BoundsConfig) -> Result<Self> {
        let curve2 = mixture_envelope(params, 2, &cfg)?;
        let n = cfg.ebit_samples;
        let sup_xs: Vec<f64> = (0..n).map(|i| 0.5 * i as f64 / n as f64).collect();
        let card = params.delay_count();
        let bound = |nu: u32, x: f64| -> f64 {
            match nu {
                0 => {
                    if x < 0.5 {
                        0.0
                    } else {
                        0.5
                    }
                }
                1 => nu1_closed_form(card, x),
                _ => curve2.eval(x),
            }
        };
        let sup_h = [0u32, 1, 2].map(|nu| {
            sup_xs
                .iter()
                .map(|&x| h2(bound(nu, x).min(0.5)))
                .collect::<Vec<f64>>()
        });
        Ok(Self {
            params: *params,
            cfg,
            curve2,
            sup_xs,
            sup_h,
        })
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn config(&self) -> &BoundsConfig {
        &self.cfg
    }

    /// Phase-error bound for `ν` photons (uncapped).
    pub fn bound(&self, nu: u32, e_bit: f64) -> f64 {
        match nu {
            0 => {
                if e_bit < 0.5 {
                    0.0
                } else {
                    0.5
                }
            }
            1 => nu1_closed_form(self.params.delay_count(), e_bit),
            2 => self.curve2.eval(e_bit),
            _ => 0.5,
        }
    }

    /// `h(min(bound, 1/2))` — the entropy the bound feeds into privacy
    /// amplification.
    pub fn entropy_of_bound(&self, nu: u32, e_bit: f64) -> f64 {
        h2(self.bound(nu, e_bit).min(0.5))
    }

    /// Supporting-line intercept `Ω_h^(ν)(γ)`: the supremum over the bit
    /// error grid of `h(min(bound, 1/2)) − γ·e_bit`. Photon numbers ≥ 3
    /// give exactly 1 (the pessimistic capped bound at `e_bit = 0`).
    pub fn entropy_intercept(&self, nu: u32, gamma: f64) -> f64 {
        if nu >= 3 {
            return 1.0;
        }
        self.sup_xs
            .iter()
            .zip(&self.sup_h[nu as usize])
            .map(|(&x, &hv)| hv - gamma * x)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The ν = 2 envelope.
    pub fn envelope2(&self) -> &PLCurve {
        &self.curve2
    }

    /// `n` bound samples on the inclusive grid `[0, 1/2]` (CSV output).
    pub fn curve_samples(&self, nu: u32, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let x = 0.5 * i as f64 / (n - 1) as f64;
                (x, self.bound(nu, x))
            })
            .collect()
    }
}
