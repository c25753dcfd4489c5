//! Channel model, adversarial photon-number allocation, privacy
//! amplification and asymptotic key rates.
//!
//! The per-pulse key rate is `G = [Q(1 − h(e_b)) − h_ph]/L` with `Q` the
//! detection probability and `h_ph` the privacy-amplification term. The
//! detected events are split by emitted photon number `ν` according to
//! the worst-case allocation the Poisson source permits, and the `ν ≤ 2`
//! leakage is bounded through the supporting lines of [`PhaseErrorBounds`]
//! (everything at `ν ≥ 3` counts as fully leaked).

use rayon::prelude::*;

use crate::bounds::PhaseErrorBounds;
use crate::error::{invalid, Result};
use crate::linalg::{golden_min, log_grid, minimize_on_grid};
use crate::povm::ProtocolParams;

/// Fiber channel: detector efficiency `η₀` and attenuation in dB/km.
#[derive(Clone, Copy, Debug)]
pub struct ChannelModel {
    pub detector_efficiency: f64,
    pub attenuation_db_per_km: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            detector_efficiency: 0.1,
            attenuation_db_per_km: 0.2,
        }
    }
}

impl ChannelModel {
    pub fn new(detector_efficiency: f64, attenuation_db_per_km: f64) -> Result<Self> {
        if !(detector_efficiency > 0.0 && detector_efficiency <= 1.0) {
            return Err(invalid("detector efficiency must lie in (0, 1]"));
        }
        if attenuation_db_per_km < 0.0 {
            return Err(invalid("attenuation must be nonnegative"));
        }
        Ok(Self {
            detector_efficiency,
            attenuation_db_per_km,
        })
    }

    /// `η(l) = η₀ · 10^(−α·l/10)`.
    pub fn transmittance(&self, fiber_km: f64) -> f64 {
        self.detector_efficiency * 10f64.powf(-self.attenuation_db_per_km * fiber_km / 10.0)
    }
}

/// Binary entropy `h(x) = −x log₂ x − (1−x) log₂ (1−x)`, with
/// `h(0) = h(1) = 0` by continuity.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("binary entropy argument {x} outside [0, 1]")));
    }
    Ok(h2(x))
}

/// Unchecked binary entropy for validated hot paths.
pub(crate) fn h2(x: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&x));
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Poisson probability of `nu` photons at the given block mean.
pub fn poisson_pmf(nu: u32, mean: f64) -> Result<f64> {
    if mean.is_nan() || mean < 0.0 {
        return Err(invalid("Poisson mean must be nonnegative"));
    }
    let mut p = (-mean).exp();
    for k in 1..=nu {
        p *= mean / k as f64;
    }
    Ok(p)
}

/// Detection probability `Q = (Lμη/2)·e^(−Lμη)`.
pub fn detection_prob(block_len: usize, mu: f64, eta: f64) -> Result<f64> {
    if mu < 0.0 || eta < 0.0 {
        return Err(invalid("intensity and transmittance must be nonnegative"));
    }
    let x = block_len as f64 * mu * eta;
    Ok(x / 2.0 * (-x).exp())
}

/// Upper tail `Σ_{k > n} p_k` by forward summation. Avoids the
/// cancellation of `1 − Σ_{k ≤ n} p_k`, which loses everything once the
/// tail drops near the f64 resolution at 1.
pub(crate) fn poisson_upper_tail(n: u32, mean: f64) -> f64 {
    let mut k = n + 1;
    let mut term = poisson_pmf(k, mean).expect("validated mean");
    let mut acc = 0.0;
    while term > 0.0 {
        acc += term;
        k += 1;
        term *= mean / k as f64;
        if k as f64 > mean && term <= acc * 1e-18 {
            break;
        }
    }
    acc
}

/// The eavesdropper's optimal assignment of detected events to emitted
/// photon numbers, subject to the Poisson source constraint
/// `q^(ν)·Q ≤ p_ν`: all detections go to the largest ν the budget allows.
#[derive(Clone, Copy, Debug)]
pub struct EveAllocation {
    mean: f64,
    detection: f64,
    tail_at_threshold: f64,
    /// Smallest photon number receiving any detections.
    pub threshold: u32,
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    /// `q^(ν≥3) = 1 − q0 − q1 − q2` (exact by normalization).
    pub q_tail: f64,
}

impl EveAllocation {
    /// Fraction of detected events attributed to `nu` photons.
    pub fn q(&self, nu: u32) -> f64 {
        use std::cmp::Ordering::*;
        match nu.cmp(&self.threshold) {
            Less => 0.0,
            Equal => (1.0 - self.tail_at_threshold / self.detection).max(0.0),
            Greater => {
                poisson_pmf(nu, self.mean).expect("validated mean") / self.detection
            }
        }
    }
}

/// Computes the allocation for detection probability `Q` and per-pulse
/// intensity `mu` (block mean `L·mu`). The threshold `ν₀` is the integer
/// with `1 − Σ_{ν'≤ν₀} p_ν' < Q ≤ 1 − Σ_{ν'≤ν₀−1} p_ν'`.
pub fn eve_allocation(detection: f64, block_len: usize, mu: f64) -> Result<EveAllocation> {
    if !(detection > 0.0 && detection <= 1.0) {
        return Err(invalid(format!("detection probability {detection} outside (0, 1]")));
    }
    if mu < 0.0 {
        return Err(invalid("intensity must be nonnegative"));
    }
    let mean = block_len as f64 * mu;
    let mut threshold = 0u32;
    let mut tail = poisson_upper_tail(0, mean);
    while tail >= detection {
        threshold += 1;
        assert!(threshold < 10_000, "allocation threshold scan diverged");
        tail = poisson_upper_tail(threshold, mean);
    }
    let mut alloc = EveAllocation {
        mean,
        detection,
        tail_at_threshold: tail,
        threshold,
        q0: 0.0,
        q1: 0.0,
        q2: 0.0,
        q_tail: 0.0,
    };
    alloc.q0 = alloc.q(0);
    alloc.q1 = alloc.q(1);
    alloc.q2 = alloc.q(2);
    alloc.q_tail = (1.0 - alloc.q0 - alloc.q1 - alloc.q2).max(0.0);
    Ok(alloc)
}

/// Grid knobs for the γ and μ optimizations.
#[derive(Clone, Copy, Debug)]
pub struct RateConfig {
    /// Log-spaced γ grid bounds (γ = 0 always prepended).
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub gamma_count: usize,
    /// Log-spaced per-pulse intensity search domain.
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub mu_count: usize,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            gamma_lo: 1e-2,
            gamma_hi: 1e4,
            gamma_count: 128,
            mu_lo: 1e-7,
            mu_hi: 1.0,
            mu_count: 128,
        }
    }
}

/// Supporting-line minimizer for the privacy-amplification fraction,
/// with the intercepts pretabulated on the γ grid. Build once per
/// parameter set; shared read-only across a scan.
pub struct LeakageMinimizer<'a> {
    bounds: &'a PhaseErrorBounds,
    gammas: Vec<f64>,
    intercepts: Vec<[f64; 3]>,
}

impl<'a> LeakageMinimizer<'a> {
    pub fn new(bounds: &'a PhaseErrorBounds, cfg: &RateConfig) -> Self {
        let mut gammas = vec![0.0];
        gammas.extend(log_grid(cfg.gamma_lo, cfg.gamma_hi, cfg.gamma_count));
        let intercepts = gammas
            .iter()
            .map(|&g| [0u32, 1, 2].map(|nu| bounds.entropy_intercept(nu, g)))
            .collect();
        Self {
            bounds,
            gammas,
            intercepts,
        }
    }

    pub fn bounds(&self) -> &PhaseErrorBounds {
        self.bounds
    }

    pub fn params(&self) -> &ProtocolParams {
        self.bounds.params()
    }

    /// `min_γ { γ·e_b + Σ_{ν≤2} q^(ν) Ω_h^(ν)(γ) + q^(ν≥3) }`, clamped to
    /// `[0, 1]`: the per-detected-bit privacy-amplification fraction.
    pub fn phase_entropy_bound(&self, e_bit: f64, alloc: &EveAllocation) -> Result<f64> {
        if !(0.0..=0.5).contains(&e_bit) {
            return Err(invalid(format!("bit error rate {e_bit} outside [0, 1/2]")));
        }
        Ok(self.leak(e_bit, alloc))
    }

    fn leak(&self, e_bit: f64, alloc: &EveAllocation) -> f64 {
        let weights = [alloc.q0, alloc.q1, alloc.q2];
        let coarse = |i: usize| -> f64 {
            let t = &self.intercepts[i];
            self.gammas[i] * e_bit
                + weights[0] * t[0]
                + weights[1] * t[1]
                + weights[2] * t[2]
                + alloc.q_tail
        };
        let mut best = f64::INFINITY;
        let mut best_i = 0;
        for i in 0..self.gammas.len() {
            let v = coarse(i);
            if v < best {
                best = v;
                best_i = i;
            }
        }
        let lo = self.gammas[best_i.saturating_sub(1)];
        let hi = self.gammas[(best_i + 1).min(self.gammas.len() - 1)];
        if hi > lo {
            let mut live = |g: f64| {
                g * e_bit
                    + weights[0] * self.bounds.entropy_intercept(0, g)
                    + weights[1] * self.bounds.entropy_intercept(1, g)
                    + weights[2] * self.bounds.entropy_intercept(2, g)
                    + alloc.q_tail
            };
            let tol = 1e-3 * (hi - lo) + 1e-12;
            let (_, refined) = golden_min(&mut live, lo, hi, tol);
            best = best.min(refined);
        }
        best.clamp(0.0, 1.0)
    }
}

/// Privacy-amplification fraction without a pretabulated minimizer.
pub fn phase_entropy_bound(
    bounds: &PhaseErrorBounds,
    e_bit: f64,
    alloc: &EveAllocation,
    cfg: &RateConfig,
) -> Result<f64> {
    LeakageMinimizer::new(bounds, cfg).phase_entropy_bound(e_bit, alloc)
}

/// Key rate per sending pulse, `max(0, [Q(1 − h(e_b)) − h_ph]/L)`, where
/// `hph_leak` is the absolute privacy-amplification term (already scaled
/// by `Q`).
pub fn key_rate(block_len: usize, detection: f64, e_bit: f64, hph_leak: f64) -> Result<f64> {
    Ok(key_rate_raw(block_len, detection, e_bit, hph_leak)?.max(0.0))
}

/// Pre-clamp key rate (may be negative; kept for diagnostics).
pub fn key_rate_raw(block_len: usize, detection: f64, e_bit: f64, hph_leak: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&detection) {
        return Err(invalid("detection probability outside [0, 1]"));
    }
    if !(0.0..=0.5).contains(&e_bit) {
        return Err(invalid("bit error rate outside [0, 1/2]"));
    }
    if hph_leak < 0.0 {
        return Err(invalid("leakage must be nonnegative"));
    }
    Ok((detection * (1.0 - h2(e_bit)) - hph_leak) / block_len as f64)
}

/// One distance sample of a rate scan.
#[derive(Clone, Debug)]
pub struct RatePoint {
    pub fiber_km: f64,
    pub eta: f64,
    /// `None` when no intensity gives a positive rate; the remaining
    /// fields then describe the least-bad intensity found.
    pub mu_opt: Option<f64>,
    pub detection: f64,
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q_tail: f64,
    pub e_bit: f64,
    /// Pre-clamp rate at the chosen intensity.
    pub rate_raw: f64,
    /// Clamped rate `max(0, rate_raw)`.
    pub rate: f64,
}

fn block_mu_grid(cfg: &RateConfig) -> Vec<f64> {
    log_grid(cfg.mu_lo, cfg.mu_hi, cfg.mu_count)
}

/// Maximizes the SNRDPS key rate over the per-pulse intensity at one
/// distance. Deterministic: log grid plus golden-section refinement.
pub fn optimize_mu(
    minimizer: &LeakageMinimizer<'_>,
    channel: &ChannelModel,
    fiber_km: f64,
    e_bit: f64,
    cfg: &RateConfig,
) -> Result<RatePoint> {
    if fiber_km < 0.0 {
        return Err(invalid("fiber length must be nonnegative"));
    }
    if !(0.0..=0.5).contains(&e_bit) {
        return Err(invalid(format!("bit error rate {e_bit} outside [0, 1/2]")));
    }
    let params = minimizer.params();
    let l = params.block_len();
    let eta = channel.transmittance(fiber_km);
    let ec = 1.0 - h2(e_bit);
    let raw_at = |mu: f64| -> f64 {
        let q = detection_prob(l, mu, eta).expect("validated inputs");
        if q <= 0.0 {
            return 0.0;
        }
        let alloc = eve_allocation(q, l, mu).expect("q in (0, 1]");
        let frac = minimizer.leak(e_bit, &alloc);
        q * (ec - frac) / l as f64
    };
    let grid = block_mu_grid(cfg);
    let mut neg = |mu: f64| -raw_at(mu);
    let (mu_best, neg_best) = minimize_on_grid(&mut neg, &grid, 1e-12)?;
    let raw = -neg_best;
    let q = detection_prob(l, mu_best, eta)?;
    let alloc = eve_allocation(q, l, mu_best)?;
    Ok(RatePoint {
        fiber_km,
        eta,
        mu_opt: (raw > 0.0).then_some(mu_best),
        detection: q,
        q0: alloc.q0,
        q1: alloc.q1,
        q2: alloc.q2,
        q_tail: alloc.q_tail,
        e_bit,
        rate_raw: raw,
        rate: raw.max(0.0),
    })
}

/// Round-robin DPS baseline without disturbance monitoring, block length
/// `|R|+1`: the detected events carry phase error at most `ν_th/|R|`
/// except for a source tail `P(ν > ν_th)` counted at 1/2, all inside one
/// binary entropy. Optimized over the threshold and the intensity.
pub fn rrdps_rate(
    card_r: usize,
    e_bit: f64,
    channel: &ChannelModel,
    fiber_km: f64,
    cfg: &RateConfig,
) -> Result<RatePoint> {
    if card_r < 2 {
        return Err(invalid("the round-robin baseline needs |R| >= 2"));
    }
    if fiber_km < 0.0 {
        return Err(invalid("fiber length must be nonnegative"));
    }
    if !(0.0..=0.5).contains(&e_bit) {
        return Err(invalid(format!("bit error rate {e_bit} outside [0, 1/2]")));
    }
    let l = card_r + 1;
    let eta = channel.transmittance(fiber_km);
    let ec = 1.0 - h2(e_bit);
    let nth_max = card_r.div_ceil(2) as u32;
    let raw_at = |nth: u32, mu: f64| -> f64 {
        let q = detection_prob(l, mu, eta).expect("validated inputs");
        if q <= 0.0 {
            return 0.0;
        }
        let mean = l as f64 * mu;
        let e_src = poisson_upper_tail(nth, mean);
        let eph = if e_src >= q {
            0.5
        } else {
            let f = e_src / q;
            (0.5 * f + (1.0 - f) * nth as f64 / card_r as f64).min(0.5)
        };
        q * (ec - h2(eph)) / l as f64
    };
    let grid = block_mu_grid(cfg);
    let mut best: Option<(f64, f64)> = None; // (raw, mu)
    for nth in 1..=nth_max {
        let mut neg = |mu: f64| -raw_at(nth, mu);
        let (mu, negv) = minimize_on_grid(&mut neg, &grid, 1e-12)?;
        let raw = -negv;
        if best.is_none_or(|(b, _)| raw > b) {
            best = Some((raw, mu));
        }
    }
    let (raw, mu_best) = best.expect("nth_max >= 1");
    let q = detection_prob(l, mu_best, eta)?;
    let alloc = eve_allocation(q, l, mu_best)?;
    Ok(RatePoint {
        fiber_km,
        eta,
        mu_opt: (raw > 0.0).then_some(mu_best),
        detection: q,
        q0: alloc.q0,
        q1: alloc.q1,
        q2: alloc.q2,
        q_tail: alloc.q_tail,
        e_bit,
        rate_raw: raw,
        rate: raw.max(0.0),
    })
}

/// Inclusive distance grid in km.
#[derive(Clone, Copy, Debug)]
pub struct KmGrid {
    pub km_min: f64,
    pub km_max: f64,
    pub km_step: f64,
}

impl KmGrid {
    pub fn new(km_min: f64, km_max: f64, km_step: f64) -> Result<Self> {
        if km_step <= 0.0 || km_min < 0.0 || km_max < km_min {
            return Err(invalid("need 0 <= km_min <= km_max and km_step > 0"));
        }
        Ok(Self {
            km_min,
            km_max,
            km_step,
        })
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.km_max - self.km_min) / self.km_step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.km_min + i as f64 * self.km_step).collect()
    }
}

/// Distance scan for the SNRDPS protocol; points are independent and
/// computed in parallel, output ordered by km.
pub fn scan_snrdps(
    minimizer: &LeakageMinimizer<'_>,
    channel: &ChannelModel,
    e_bit: f64,
    grid: &KmGrid,
    cfg: &RateConfig,
) -> Result<Vec<RatePoint>> {
    grid.points()
        .into_par_iter()
        .map(|km| optimize_mu(minimizer, channel, km, e_bit, cfg))
        .collect()
}

/// Distance scan for the round-robin baseline.
pub fn scan_rrdps(
    card_r: usize,
    channel: &ChannelModel,
    e_bit: f64,
    grid: &KmGrid,
    cfg: &RateConfig,
) -> Result<Vec<RatePoint>> {
    grid.points()
        .into_par_iter()
        .map(|km| rrdps_rate(card_r, e_bit, channel, km, cfg))
        .collect()
}
