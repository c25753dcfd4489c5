//! Brute-force oracles validating every analytic shortcut the fast paths
//! rely on. Runnable as a test suite and through the `verify` subcommand.
//!
//! Each check reports the worst deviation it saw against a stated
//! tolerance. Every check also has a deliberately corrupted twin (the
//! negative control) that must exceed its tolerance — a guard against
//! vacuous passes.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;

use crate::bounds::{mixture_envelope, omega_minus, omega_plus_closed_form, omega_plus_reduced, Branch, BoundsConfig, PhaseErrorBounds};
use crate::error::{invalid, Error, Result};
use crate::linalg::{log_grid, SymOperator, DEFAULT_EIG_TOL};
use crate::povm::fullspace::{
    bit_error_target, build_error_ops_inner, phase_error_target, range_projector,
    range_projector_target, sign_flip_unitary,
};
use crate::povm::{
    actual_povm, bit_error_operator, phase_error_operator, OccupationVector,
    ProtocolParams,
};

/// Outcome of one verification check.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub name: String,
    pub instance: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
}

impl VerifyReport {
    fn from_deviation(
        name: &str,
        instance: impl Into<String>,
        max_deviation: f64,
        tolerance: f64,
        seed: u64,
    ) -> Self {
        Self {
            name: name.to_string(),
            instance: instance.into(),
            max_deviation,
            tolerance,
            pass: max_deviation <= tolerance,
            seed,
        }
    }

    /// Negative control: the corrupted construction must be detected.
    fn into_negative_control(mut self) -> Self {
        self.name.push_str(" [negative-control]");
        self.pass = self.max_deviation > self.tolerance;
        self
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:4}  {:34} {:28} dev {:9.3e}  tol {:7.1e}  seed {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.instance,
            self.max_deviation,
            self.tolerance,
            self.seed
        )
    }
}

fn random_density(rng: &mut impl Rng, dim: usize) -> SymOperator {
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

/// Dial vs actual measurement: `Pr_dial == 2·Pr_actual` for random
/// density operators, every delay, bit and announced pair. The corrupted
/// variant mixes the two actual delays 0.6/0.4 instead of evenly.
pub fn verify_dial_vs_actual(
    max_block: usize,
    trials: usize,
    seed: u64,
    corrupt: bool,
) -> Result<VerifyReport> {
    if max_block > 8 {
        return Err(Error::ResourceGuard(format!(
            "the dial-vs-actual check is sized for L <= 8, got {max_block}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dev = 0.0f64;
    let (w1, w2) = if corrupt { (0.6, 0.4) } else { (0.5, 0.5) };
    for l in 3..=max_block {
        for t in 1..l.div_ceil(2) {
            if 2 * t >= l {
                continue;
            }
            let p = ProtocolParams::new(l, t)?;
            for _ in 0..trials {
                let rho = random_density(&mut rng, l);
                for r in p.delays() {
                    for s in 0..2u8 {
                        for i in 1..l {
                            for j in (i + 1)..=l {
                                let dial =
                                    crate::povm::prob_dial(&rho, &p, r, s, (i, j))?;
                                let mut actual = 0.0;
                                if j - i == r {
                                    actual += w1
                                        * rho.trace_product(&actual_povm(&p, r, i as i64, s)?);
                                }
                                if j - i == l - r {
                                    actual += w2
                                        * rho.trace_product(&actual_povm(
                                            &p,
                                            l - r,
                                            i as i64,
                                            s,
                                        )?);
                                }
                                dev = dev.max((dial - 2.0 * actual).abs());
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(VerifyReport::from_deviation(
        "dial-vs-actual",
        format!("L=3..={max_block}, all t, {trials} states"),
        dev,
        1e-12,
        seed,
    ))
}

/// Full-space conjugation identities: the summed bit/phase error POVMs
/// transform into `1 ⊗ Π^(b)` and `Σ_a P(|a⟩) ⊗ Π_a^(ph)`. The corrupted
/// variant drops the wrap-around branch of the bit-error POVM.
pub fn verify_fullspace_conjugation(l: usize, t: usize, corrupt: bool) -> Result<VerifyReport> {
    let p = ProtocolParams::new(l, t)?;
    let ops = build_error_ops_inner(&p, corrupt)?;
    let dev_bit = ops
        .e_bit
        .conjugate_by(&ops.unitary)
        .max_abs_diff(&bit_error_target(&p)?);
    let dev_phase = ops
        .e_phase
        .conjugate_by(&ops.unitary)
        .max_abs_diff(&phase_error_target(&p)?);
    Ok(VerifyReport::from_deviation(
        "fullspace-conjugation",
        format!("L={l} t={t}"),
        dev_bit.max(dev_phase),
        1e-12,
        0,
    ))
}

/// Conjugation of the weight-range projector: the split into weight
/// `ν−1, ν−3, …` (full photon space) plus weight `ν+1` (projected)
/// that justifies the two Ω branches. The corrupted variant forgets the
/// projection on the weight-`ν+1` part.
pub fn verify_range_projector(l: usize, t: usize, corrupt: bool) -> Result<VerifyReport> {
    let p = ProtocolParams::new(l, t)?;
    let u = sign_flip_unitary(&p)?;
    let mut dev = 0.0f64;
    for nu in 0..=(l as u32) {
        let conj = range_projector(&p, nu)?.conjugate_by(&u);
        let target = if corrupt {
            // wrong target: treat the nu+1 block as unprojected
            range_projector(&p, nu.saturating_sub(1))?
        } else {
            range_projector_target(&p, nu)?
        };
        dev = dev.max(conj.max_abs_diff(&target));
    }
    Ok(VerifyReport::from_deviation(
        "range-projector",
        format!("L={l} t={t}, nu=0..={l}"),
        dev,
        1e-12,
        0,
    ))
}

/// Exact maximum of the branch eigenvalue over ALL occupation vectors of
/// the branch weight (no translation-class reduction). `L ≤ 12`.
pub fn exhaustive_omega(
    params: &ProtocolParams,
    nu: u32,
    lambda: f64,
    branch: Branch,
) -> Result<f64> {
    let l = params.block_len();
    if l > 12 {
        return Err(Error::ResourceGuard(format!(
            "exhaustive enumeration is sized for L <= 12, got {l}"
        )));
    }
    if lambda < 0.0 {
        return Err(invalid("lambda must be nonnegative"));
    }
    let weight = match branch {
        Branch::Plus => nu as usize + 1,
        Branch::Minus => {
            if nu == 0 {
                return Err(invalid("the minus branch needs nu >= 1"));
            }
            nu as usize - 1
        }
    };
    if weight > l {
        return Err(invalid(format!("occupation weight {weight} exceeds L = {l}")));
    }
    let pib = bit_error_operator(params);
    let mut best = f64::NEG_INFINITY;
    for ones in (0..l).combinations(weight) {
        let a = OccupationVector::from_ones(l, &ones)?;
        let m = phase_error_operator(params, &a)?.scaled_add(-lambda, &pib);
        let value = match branch {
            Branch::Plus => m
                .principal_submatrix(&ones)
                .largest_eigenvalue(DEFAULT_EIG_TOL)?,
            Branch::Minus => m.largest_eigenvalue(DEFAULT_EIG_TOL)?,
        };
        best = best.max(value);
    }
    Ok(best)
}

/// Closed form of the plus branch against the exhaustive maximum, over
/// `L ∈ {8..12}, t ∈ {1,2}, ν ≤ |R|/2, λ ∈ {0, 1/2, 1, 2, 10}`.
pub fn verify_plus_branch_closed_form(corrupt: bool) -> Result<VerifyReport> {
    let lambdas = [0.0, 0.5, 1.0, 2.0, 10.0];
    let mut dev = 0.0f64;
    for l in 8..=12usize {
        for t in [1usize, 2] {
            let p = ProtocolParams::new(l, t)?;
            for nu in 0..=(t as u32) {
                for &lam in &lambdas {
                    let closed = omega_plus_closed_form(nu, p.delay_count(), lam)?;
                    let closed = if corrupt {
                        closed - 2.0 * nu as f64 * lam / (2.0 * p.delay_count() as f64)
                    } else {
                        closed
                    };
                    let brute = exhaustive_omega(&p, nu, lam, Branch::Plus)?;
                    // the reduced consecutive-ones matrix must agree too
                    let reduced = omega_plus_reduced(&p, nu, lam)?;
                    dev = dev.max((closed - brute).abs()).max((closed - reduced).abs());
                }
            }
        }
    }
    Ok(VerifyReport::from_deviation(
        "plus-closed-form",
        "L=8..=12, t=1..2, nu<=|R|/2, 5 lambdas",
        dev,
        1e-9,
        0,
    ))
}

/// Every fast Ω path against its exhaustive twin on at least three
/// instances per code path. The corrupted variant evaluates the fast
/// paths at a shifted λ.
pub fn verify_omega_paths(corrupt: bool) -> Result<VerifyReport> {
    let shift = if corrupt { 1.1 } else { 1.0 };
    let mut dev = 0.0f64;
    // reduced plus matrix beyond the closed form (nu > |R|/2)
    for (l, t, nu, lam) in [
        (10usize, 1usize, 2u32, 0.5f64),
        (10, 1, 3, 2.0),
        (12, 2, 3, 1.0),
        (8, 1, 2, 10.0),
    ] {
        let p = ProtocolParams::new(l, t)?;
        let fast = omega_plus_reduced(&p, nu, lam * shift)?;
        let brute = exhaustive_omega(&p, nu, lam, Branch::Plus)?;
        dev = dev.max((fast - brute).abs());
    }
    // minus branch, nu = 1 (identically the largest eigenvalue of -l*Pi_b)
    for (l, t, lam) in [(8usize, 2usize, 0.7f64), (10, 1, 2.0), (12, 2, 5.0)] {
        let p = ProtocolParams::new(l, t)?;
        let fast = omega_minus(&p, 1, lam * shift)?;
        let brute = exhaustive_omega(&p, 1, lam, Branch::Minus)?;
        dev = dev.max((fast - brute).abs());
    }
    // minus branch, nu = 2 (translation-class representative)
    for (l, t, lam) in [
        (10usize, 2usize, 0.7f64),
        (8, 1, 0.0),
        (8, 1, 1.0),
        (12, 2, 2.0),
    ] {
        let p = ProtocolParams::new(l, t)?;
        let fast = omega_minus(&p, 2, lam * shift)?;
        let brute = exhaustive_omega(&p, 2, lam, Branch::Minus)?;
        dev = dev.max((fast - brute).abs());
    }
    Ok(VerifyReport::from_deviation(
        "omega-brute-force",
        "plus reduced / minus nu=1 / minus nu=2",
        dev,
        1e-10,
        0,
    ))
}

/// Eigenvalue monotonicity under entrywise domination for matrices with
/// nonnegative off-diagonals. The corrupted variant violates the sign
/// precondition, where monotonicity genuinely fails.
pub fn verify_eigenvalue_monotonicity(trials: usize, max_dim: usize, seed: u64, corrupt: bool) -> Result<VerifyReport> {
    if max_dim > 12 {
        return Err(Error::ResourceGuard(format!(
            "the monotonicity check is sized for dim <= 12, got {max_dim}"
        )));
    }
    if corrupt {
        // negative off-diagonals: growing their magnitude grows the
        // spectral radius even though every entry decreases
        let big = SymOperator::from_fn(2, |i, j| if i == j { 0.0 } else { -1.0 });
        let small = SymOperator::from_fn(2, |i, j| if i == j { 0.0 } else { -2.0 });
        let dev = (small.largest_eigenvalue(DEFAULT_EIG_TOL)?
            - big.largest_eigenvalue(DEFAULT_EIG_TOL)?)
        .max(0.0);
        return Ok(VerifyReport::from_deviation(
            "eigenvalue-monotonicity",
            "sign precondition violated",
            dev,
            1e-10,
            seed,
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dev = 0.0f64;
    // deterministic anchor: identity vs identity plus a positive bump
    let id = SymOperator::identity(3);
    let bumped = id.scaled_add(1.0, &SymOperator::from_fn(3, |_, _| 0.25));
    dev = dev.max(
        id.largest_eigenvalue(DEFAULT_EIG_TOL)? - bumped.largest_eigenvalue(DEFAULT_EIG_TOL)?,
    );
    for _ in 0..trials {
        let n = rng.gen_range(2..=max_dim);
        let dominant = SymOperator::from_fn(n, |i, j| {
            if i == j {
                rng.gen_range(-1.0..1.0)
            } else {
                rng.gen_range(0.0..1.0)
            }
        });
        // entrywise smaller, off-diagonals still nonnegative
        let smaller = SymOperator::from_fn(n, |i, j| {
            let v = dominant.get(i, j);
            if i == j {
                v - rng.gen_range(0.0..0.5)
            } else {
                v * rng.gen_range(0.0..1.0)
            }
        });
        let gap = smaller.largest_eigenvalue(DEFAULT_EIG_TOL)?
            - dominant.largest_eigenvalue(DEFAULT_EIG_TOL)?;
        dev = dev.max(gap);
    }
    Ok(VerifyReport::from_deviation(
        "eigenvalue-monotonicity",
        format!("{trials} random pairs, dim<= {max_dim}"),
        dev.max(0.0),
        1e-10,
        seed,
    ))
}

/// The generic ν = 1 mixture pipeline against the closed form
/// `min{(|R|+1)/(|R|−1)·x, 1/2 + 1/(2|R|)}` on a 200-point grid for
/// `|R| ∈ {2,4,6,8,10}`. The generic side may never fall below the
/// closed form by more than 1e−9 nor exceed it by more than 1e−6.
pub fn verify_single_photon_bound(corrupt: bool) -> Result<VerifyReport> {
    let cfg = BoundsConfig::default();
    let mut dev_above = 0.0f64;
    let mut dev_below = 0.0f64;
    for t in 1..=5usize {
        let p = ProtocolParams::new(32, t)?;
        let card = p.delay_count() as f64;
        let slope = if corrupt {
            (card + 2.0) / (card - 1.0)
        } else {
            (card + 1.0) / (card - 1.0)
        };
        let sat = 0.5 + 1.0 / (2.0 * card);
        let curve = mixture_envelope(&p, 1, &cfg)?;
        for i in 0..=200 {
            let x = 0.5 * i as f64 / 200.0;
            let closed = (slope * x).min(sat);
            let generic = curve.eval(x);
            dev_above = dev_above.max(generic - closed);
            dev_below = dev_below.max(closed - generic);
        }
    }
    let pass = dev_above <= 1e-6 && dev_below <= 1e-9;
    let mut report = VerifyReport::from_deviation(
        "single-photon-bound",
        "|R|=2,4,6,8,10 on 200-point grid",
        dev_above.max(dev_below),
        1e-6,
        0,
    );
    report.pass = pass;
    Ok(report)
}

/// Diagnostic for the leakage-ordering assumption: the supporting-line
/// intercepts must be nondecreasing in the photon number on the γ grid.
pub fn verify_omega_ordering() -> Result<VerifyReport> {
    let mut dev = 0.0f64;
    let gammas = {
        let mut g = vec![0.0];
        g.extend(log_grid(1e-2, 1e4, 64));
        g
    };
    for t in 1..=5usize {
        let p = ProtocolParams::new(32, t)?;
        let bounds = PhaseErrorBounds::new(&p)?;
        for &g in &gammas {
            let o = [0u32, 1, 2, 3].map(|nu| bounds.entropy_intercept(nu, g));
            for w in o.windows(2) {
                dev = dev.max(w[0] - w[1]);
            }
        }
    }
    Ok(VerifyReport::from_deviation(
        "omega-ordering",
        "L=32, t=1..5, 65 gammas",
        dev.max(0.0),
        1e-12,
        0,
    ))
}

/// Which checks to run and how.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Trials for the randomized checks.
    pub trials: usize,
    /// Clamp on the block lengths of the full-space checks (3..=8 for
    /// the dial-vs-actual check, the (L, t) table for the full-space one).
    pub max_block: Option<usize>,
    /// Restrict to checks with these names (all when empty).
    pub checks: Vec<String>,
    /// Run the real checks on corrupted constructions (they must then
    /// fail; used to exercise the failure path end to end).
    pub corrupt: bool,
    /// Include the negative-control twins.
    pub negative_controls: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            trials: 100,
            max_block: None,
            checks: Vec::new(),
            corrupt: false,
            negative_controls: true,
        }
    }
}

const FULLSPACE_INSTANCES: [(usize, usize); 4] = [(4, 1), (5, 1), (5, 2), (6, 2)];

/// Runs the suite; reports come back sorted by name and instance.
pub fn run_suite(cfg: &VerifyConfig) -> Result<Vec<VerifyReport>> {
    let wanted = |name: &str| cfg.checks.is_empty() || cfg.checks.iter().any(|c| c == name);
    let corrupt = cfg.corrupt;
    let max_dial = cfg.max_block.unwrap_or(8).min(8);
    let seed = cfg.seed;
    let trials = cfg.trials;

    type Job = Box<dyn Fn() -> Result<VerifyReport> + Send + Sync>;
    let mut jobs: Vec<Job> = Vec::new();
    if wanted("dial-vs-actual") {
        jobs.push(Box::new(move || {
            verify_dial_vs_actual(max_dial, trials, seed, corrupt)
        }));
        if cfg.negative_controls {
            jobs.push(Box::new(move || {
                Ok(verify_dial_vs_actual(max_dial.min(5), 10, seed, true)?.into_negative_control())
            }));
        }
    }
    if wanted("fullspace-conjugation") {
        for (l, t) in FULLSPACE_INSTANCES {
            if l <= cfg.max_block.unwrap_or(6) {
                jobs.push(Box::new(move || verify_fullspace_conjugation(l, t, corrupt)));
            }
        }
        if cfg.negative_controls {
            jobs.push(Box::new(move || {
                Ok(verify_fullspace_conjugation(4, 1, true)?.into_negative_control())
            }));
        }
    }
    if wanted("range-projector") {
        jobs.push(Box::new(move || verify_range_projector(5, 2, corrupt)));
        if cfg.negative_controls {
            jobs.push(Box::new(move || {
                Ok(verify_range_projector(4, 1, true)?.into_negative_control())
            }));
        }
    }
    if wanted("plus-closed-form") {
        jobs.push(Box::new(move || verify_plus_branch_closed_form(corrupt)));
        if cfg.negative_controls {
            jobs.push(Box::new(move || {
                Ok(verify_plus_branch_closed_form(true)?.into_negative_control())
            }));
        }
    }
    if wanted("omega-brute-force") {
        jobs.push(Box::new(move || verify_omega_paths(corrupt)));
        if cfg.negative_controls {
            jobs.push(Box::new(move || {
                Ok(verify_omega_paths(true)?.into_negative_control())
            }));
        }
    }
    if wanted("eigenvalue-monotonicity") {
        jobs.push(Box::new(move || verify_eigenvalue_monotonicity(trials.max(500), 12, seed, corrupt)));
        if cfg.negative_controls {
            jobs.push(Box::new(move || {
                Ok(verify_eigenvalue_monotonicity(1, 12, seed, true)?.into_negative_control())
            }));
        }
    }
    if wanted("single-photon-bound") {
        jobs.push(Box::new(move || verify_single_photon_bound(corrupt)));
        if cfg.negative_controls {
            jobs.push(Box::new(move || {
                Ok(verify_single_photon_bound(true)?.into_negative_control())
            }));
        }
    }
    if wanted("omega-ordering") {
        jobs.push(Box::new(verify_omega_ordering));
    }
    if jobs.is_empty() {
        return Err(invalid(format!(
            "no checks match the filter {:?}; known checks: dial-vs-actual, eigenvalue-monotonicity, fullspace-conjugation, omega-brute-force, omega-ordering, plus-closed-form, range-projector, single-photon-bound",
            cfg.checks
        )));
    }

    let mut reports = jobs
        .par_iter()
        .map(|job| job())
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| (&a.name, &a.instance).cmp(&(&b.name, &b.instance)));
    Ok(reports)
}
