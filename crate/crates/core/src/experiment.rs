//! Finite-statistics emulation: seeded shot sampling, empirical estimators,
//! and fringe-visibility analysis.
//!
//! Reproducibility is part of the contract. Shots come from a ChaCha8 stream
//! cipher generator (`rand_chacha`), multinomial counts are drawn by
//! sequential binomial splitting with exact conditional probabilities, and
//! each Bernoulli trial compares a raw 64-bit draw against an integer
//! threshold. No transcendental math touches the sample path, so identical
//! inputs give identical counts on every platform. Grid points derive their
//! own streams as `seed ^ splitmix64(index)`, making multi-point runs
//! schedule-independent.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{ExperimentSetting, JointDistribution};
use crate::error::{Error, Result};
use crate::noise::noisy_joint_distribution;

/// Counted outcomes of a finite run at one setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotRecord {
    /// Counts over the outcomes {00, 01, 10, 11} in (S, A) order.
    pub counts: [u64; 4],
    pub shots: u64,
    pub seed: u64,
    /// The knobs behind the sampled distribution, when sampling went through
    /// [`sample_at_setting`].
    pub setting: Option<ExperimentSetting>,
}

/// Fringe contrast of the wave branch with its statistical uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityEstimate {
    /// (max − min)/(max + min) of the conditioned fringe, clamped to [0, 1].
    pub value: f64,
    /// Binomial error propagated through the contrast ratio.
    pub std_error: f64,
    /// Ancilla outcome the fringe is conditioned on (1, the closed branch).
    pub conditioned_on: u8,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream seed for grid point `index` of a run seeded with `seed`.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    seed ^ splitmix64(index)
}

/// Binomial(n, p) by n Bernoulli trials against a fixed integer threshold.
fn binomial_draw(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    let threshold = (p * 18_446_744_073_709_551_616.0) as u64;
    (0..n).filter(|_| rng.next_u64() < threshold).count() as u64
}

/// Multinomial draw of `shots` outcomes from a joint distribution.
pub fn sample_shots(j: &JointDistribution, shots: u64, seed: u64) -> Result<ShotRecord> {
    if shots < 1 {
        return Err(Error::InvalidArgument(format!(
            "shot count must be at least 1, got {shots}"
        )));
    }
    let p = j.probabilities();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0u64; 4];
    let mut remaining = shots;
    let mut tail = 1.0f64;
    for k in 0..3 {
        if remaining == 0 {
            break;
        }
        let conditional = if tail > 0.0 {
            (p[k] / tail).clamp(0.0, 1.0)
        } else {
            0.0
        };
        counts[k] = binomial_draw(&mut rng, remaining, conditional);
        remaining -= counts[k];
        tail -= p[k];
    }
    counts[3] = remaining;
    Ok(ShotRecord {
        counts,
        shots,
        seed,
        setting: None,
    })
}

/// Samples the noisy statistics of a setting and records the provenance.
pub fn sample_at_setting(
    setting: &ExperimentSetting,
    shots: u64,
    seed: u64,
) -> Result<ShotRecord> {
    let mut record = sample_shots(&noisy_joint_distribution(setting), shots, seed)?;
    record.setting = Some(*setting);
    Ok(record)
}

/// Relative frequencies counts/shots.
pub fn empirical_distribution(record: &ShotRecord) -> Result<JointDistribution> {
    if record.shots < 1 {
        return Err(Error::InvalidArgument(
            "cannot normalize an empty record".into(),
        ));
    }
    let n = record.shots as f64;
    JointDistribution::new([
        record.counts[0] as f64 / n,
        record.counts[1] as f64 / n,
        record.counts[2] as f64 / n,
        record.counts[3] as f64 / n,
    ])
}

/// Closed-form fringe visibility of the wave branch,
/// V = ε sin²α / (2η + ε sin²α).
///
/// This is (max − min)/(max + min) of P(S=0|A=1) over φ: the conditional
/// fringe runs between β(0) = (η + ε sin²α)/p₁ and β(π) = η/p₁.
pub fn analytic_visibility(alpha: f64, epsilon: f64) -> Result<f64> {
    if !alpha.is_finite() || !(0.0..=std::f64::consts::FRAC_PI_2).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in [0, pi/2], got {alpha}"
        )));
    }
    if !epsilon.is_finite() || !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in [0, 1], got {epsilon}"
        )));
    }
    let eta = (1.0 - epsilon) / 4.0;
    let wave_weight = epsilon * alpha.sin().powi(2);
    let p1 = 2.0 * eta + wave_weight;
    if p1 <= 1e-12 {
        return Err(Error::DegenerateConditioning(
            "p1 = 0 (epsilon = 1, alpha = 0): the closed branch never fires".into(),
        ));
    }
    Ok(wave_weight / p1)
}

/// Samples the fringe over a φ grid and estimates its visibility from the
/// conditioned frequencies at the extrema φ = 0 and φ = π.
///
/// The grid must hold at least 5 points inside [0, π] including both
/// endpoints (the exact extrema of the cos²(φ/2) fringe, so no curve fit is
/// needed), and every point must see at least one A = 1 event.
pub fn estimate_visibility(
    alpha: f64,
    epsilon: f64,
    phi_grid: &[f64],
    shots_per_point: u64,
    seed: u64,
) -> Result<VisibilityEstimate> {
    if phi_grid.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "phi grid needs at least 5 points, got {}",
            phi_grid.len()
        )));
    }
    const GRID_EPS: f64 = 1e-12;
    if phi_grid.iter().any(|&phi| {
        !phi.is_finite() || !(-GRID_EPS..=std::f64::consts::PI + GRID_EPS).contains(&phi)
    }) {
        return Err(Error::InvalidArgument(
            "phi grid points must lie in [0, pi]".into(),
        ));
    }
    let index_of = |value: f64| {
        phi_grid
            .iter()
            .position(|&phi| (phi - value).abs() <= GRID_EPS)
    };
    let (Some(bright_idx), Some(dark_idx)) = (index_of(0.0), index_of(std::f64::consts::PI))
    else {
        return Err(Error::InvalidArgument(
            "phi grid must include both 0 and pi".into(),
        ));
    };
    if shots_per_point < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 shots per point, got {shots_per_point}"
        )));
    }

    // Conditioned frequency P(S=0 | A=1) and its binomial variance per point.
    let mut freq = vec![0.0f64; phi_grid.len()];
    let mut var = vec![0.0f64; phi_grid.len()];
    for (idx, &phi) in phi_grid.iter().enumerate() {
        let setting = ExperimentSetting::new(alpha, phi, epsilon)?;
        let record = sample_at_setting(&setting, shots_per_point, point_seed(seed, idx as u64))?;
        let closed = record.counts[1] + record.counts[3];
        if closed == 0 {
            return Err(Error::InsufficientStatistics(format!(
                "no A = 1 events at phi = {phi}"
            )));
        }
        let f = record.counts[1] as f64 / closed as f64;
        freq[idx] = f;
        var[idx] = f * (1.0 - f) / closed as f64;
    }

    let bright = freq[bright_idx];
    let dark = freq[dark_idx];
    let total = bright + dark;
    if total <= 0.0 {
        return Err(Error::InsufficientStatistics(
            "no S = 0 events on the closed branch at either fringe extremum".into(),
        ));
    }
    let value = ((bright - dark) / total).clamp(0.0, 1.0);
    // V = (f₀ − fπ)/(f₀ + fπ): ∂V/∂f₀ = 2fπ/(f₀+fπ)², ∂V/∂fπ = −2f₀/(f₀+fπ)².
    let denom_sq = total * total;
    let d_bright = 2.0 * dark / denom_sq;
    let d_dark = 2.0 * bright / denom_sq;
    let std_error =
        (d_bright * d_bright * var[bright_idx] + d_dark * d_dark * var[dark_idx]).sqrt();
    Ok(VisibilityEstimate {
        value,
        std_error,
        conditioned_on: 1,
    })
}

/// Evenly spaced φ grid over [0, π], endpoints included.
pub fn fringe_grid(points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n)
        .map(|k| std::f64::consts::PI * k as f64 / (n - 1) as f64)
        .collect()
}
