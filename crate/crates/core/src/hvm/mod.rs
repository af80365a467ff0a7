//! Hidden-variable model of the delayed-choice statistics.
//!
//! The model posits a source-determined binary variable λ ∈ {p, w} carrying
//! the particle or wave character of each quantum, with five free
//! probabilities:
//!
//! * `a`: P(λ = p),
//! * `b`: P(A = 0 | λ = p), `c`: P(A = 0 | λ = w),
//! * `d`: P(S = 0 | A = 0, λ = w), the unknown behavior of a wave quantum
//!   in an open interferometer,
//! * `e`: P(S = 0 | A = 1, λ = p), the unknown behavior of a particle
//!   quantum in a closed one.
//!
//! The remaining conditionals are forced by the observed statistics: a
//! particle in an open interferometer gives [1/2, 1/2], and a wave in a
//! closed one gives [β, 1 − β] with β = (η + ε cos²(φ/2) sin²α)/p₁. Summing
//! P(S|A,λ)P(A|λ)P(λ) over λ and matching the observed distribution reduces
//! to three polynomial constraints ([`constraint_triple`]); this module
//! evaluates them, classifies their solutions against the physical-
//! consistency rejections, and certifies infeasibility numerically
//! ([`feasibility_scan`]).

mod branches;
mod scan;

pub use branches::{enumerate_branches, Binding, SolutionBranch};
pub use scan::{feasibility_scan, FeasibilityVerdict};

use std::collections::BTreeSet;
use std::fmt;

use crate::circuit::{ExperimentSetting, JointDistribution};
use crate::error::{Error, Result};
use crate::noise::noisy_joint_distribution;

/// Below this ancilla marginal the wave branch cannot be conditioned on;
/// reached only at ε = 1, α = 0.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

/// The five free probabilities of the hidden-variable model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HvParameters {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl HvParameters {
    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64) -> Result<Self> {
        for (name, value) in [("a", a), ("b", b), ("c", c), ("d", d), ("e", e)] {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidArgument(format!(
                    "parameter {name} must be a probability, got {value}"
                )));
            }
        }
        Ok(Self { a, b, c, d, e })
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.a, self.b, self.c, self.d, self.e]
    }

    /// The model's ancilla marginal P(A = 0) = ab + c(1 − a).
    pub fn ancilla_marginal_zero(&self) -> f64 {
        self.a * self.b + self.c * (1.0 - self.a)
    }
}

/// Quantities the observed statistics fix independently of the model:
/// η, the ancilla marginals p₀ and p₁, and the wave-branch conditional β.
///
/// `beta` is `None` exactly when p₁ vanishes (ε = 1, α = 0), the one knob
/// combination where the closed-interferometer branch never fires.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities {
    pub eta: f64,
    pub p0: f64,
    pub p1: f64,
    pub beta: Option<f64>,
}

impl DerivedQuantities {
    /// β, or a degenerate-setting error where it is undefined.
    pub fn beta(&self) -> Result<f64> {
        self.beta.ok_or_else(|| {
            Error::DegenerateSetting(
                "p1 = 0 (epsilon = 1, alpha = 0): the wave branch never fires".into(),
            )
        })
    }
}

/// Marginals and β at a setting: p₀ = 2η + ε cos²α, p₁ = 2η + ε sin²α,
/// β = (η + ε cos²(φ/2) sin²α)/p₁.
pub fn derived_quantities(setting: &ExperimentSetting) -> DerivedQuantities {
    let eps = setting.epsilon();
    let eta = (1.0 - eps) / 4.0;
    let p0 = 2.0 * eta + eps * setting.alpha().cos().powi(2);
    let p1 = 2.0 * eta + eps * setting.alpha().sin().powi(2);
    let beta = if p1 > DEGENERACY_FLOOR {
        Some((eta + eps * (0.5 * setting.phi()).cos().powi(2) * setting.alpha().sin().powi(2)) / p1)
    } else {
        None
    };
    DerivedQuantities { eta, p0, p1, beta }
}

/// Joint distribution the model predicts at a setting:
/// P(S,A) = Σ_λ P(S|A,λ) P(A|λ) P(λ).
pub fn model_distribution(
    params: &HvParameters,
    setting: &ExperimentSetting,
) -> Result<JointDistribution> {
    let beta = derived_quantities(setting).beta()?;
    let particle_open = params.a * params.b;
    let wave_open = params.c * (1.0 - params.a);
    let particle_closed = params.a * (1.0 - params.b);
    let wave_closed = (1.0 - params.c) * (1.0 - params.a);
    JointDistribution::new([
        0.5 * particle_open + params.d * wave_open,
        params.e * particle_closed + beta * wave_closed,
        0.5 * particle_open + (1.0 - params.d) * wave_open,
        (1.0 - params.e) * particle_closed + (1.0 - beta) * wave_closed,
    ])
}

/// Max-norm distance between the model's distribution and the observed one.
/// Zero exactly when the model reproduces the noisy statistics here.
pub fn residual(params: &HvParameters, setting: &ExperimentSetting) -> Result<f64> {
    let model = model_distribution(params, setting)?;
    Ok(model.max_abs_diff(&noisy_joint_distribution(setting)))
}

/// The three constraints equivalent to a vanishing residual:
/// (c(1−a)(d−1/2), a(1−b)(e−β), ab + c(1−a) − p₀).
pub fn constraint_triple(params: &HvParameters, setting: &ExperimentSetting) -> Result<[f64; 3]> {
    let derived = derived_quantities(setting);
    let beta = derived.beta()?;
    Ok([
        params.c * (1.0 - params.a) * (params.d - 0.5),
        params.a * (1.0 - params.b) * (params.e - beta),
        params.ancilla_marginal_zero() - derived.p0,
    ])
}

/// Reasons a solution of the constraint system must be discarded.
///
/// The first three encode physically inconsistent behavior; the last marks
/// the degenerate families that pin the ancilla marginal to 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RejectionLabel {
    /// d = 1/2 with wave quanta present at A = 0: wave quanta would show
    /// particle statistics in the open interferometer.
    WaveActsAsParticle,
    /// e = β with particle quanta present at A = 1: β depends on φ, so
    /// particle quanta would show a fringe in the closed interferometer.
    ParticleActsAsWave,
    /// a = p₀, b = 1, c = 0: λ duplicates the ancilla outcome, making the
    /// source distribution depend on the experimenter's choice of α.
    PerfectCorrelation,
    /// The model forces P(A = 0) to 0 or 1, contradicting both marginals
    /// being positive.
    TrivialDegenerate,
}

impl RejectionLabel {
    pub const ALL: [RejectionLabel; 4] = [
        RejectionLabel::WaveActsAsParticle,
        RejectionLabel::ParticleActsAsWave,
        RejectionLabel::PerfectCorrelation,
        RejectionLabel::TrivialDegenerate,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RejectionLabel::WaveActsAsParticle => "WAVE_ACTS_AS_PARTICLE",
            RejectionLabel::ParticleActsAsWave => "PARTICLE_ACTS_AS_WAVE",
            RejectionLabel::PerfectCorrelation => "PERFECT_CORRELATION",
            RejectionLabel::TrivialDegenerate => "TRIVIAL_DEGENERATE",
        }
    }
}

impl fmt::Display for RejectionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Labels a near-solution of the constraint system with every rejection that
/// applies; an empty set means a physically consistent model.
///
/// Only parameter vectors with `residual < tol` are classified; anything
/// else is not a solution and errors. At ε = 0 the flat statistics make wave
/// and particle behavior indistinguishable (the interferometer acts on the
/// identity), so none of the consistency rejections apply and valid
/// solutions classify empty.
pub fn classify(
    params: &HvParameters,
    setting: &ExperimentSetting,
    tol: f64,
) -> Result<BTreeSet<RejectionLabel>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "classification tolerance must be positive, got {tol}"
        )));
    }
    let derived = derived_quantities(setting);
    let beta = derived.beta()?;
    let r = residual(params, setting)?;
    if r >= tol {
        return Err(Error::NotASolution(format!(
            "residual {r} exceeds tolerance {tol}"
        )));
    }
    let mut labels = BTreeSet::new();
    let marginal = params.ancilla_marginal_zero();
    if marginal < tol || marginal > 1.0 - tol {
        labels.insert(RejectionLabel::TrivialDegenerate);
    }
    if setting.epsilon() > 0.0 {
        if params.c * (1.0 - params.a) > tol && (params.d - 0.5).abs() < tol {
            labels.insert(RejectionLabel::WaveActsAsParticle);
        }
        if params.a * (1.0 - params.b) > tol && (params.e - beta).abs() < tol {
            labels.insert(RejectionLabel::ParticleActsAsWave);
        }
        if params.c < tol && (params.b - 1.0).abs() < tol && (params.a - derived.p0).abs() < tol {
            labels.insert(RejectionLabel::PerfectCorrelation);
        }
    }
    Ok(labels)
}

/// Default manifold-membership tolerance for [`classify`]; looser than the
/// solution-residual tolerance so membership tests sit above residual noise.
pub const CLASSIFY_TOL: f64 = 1e-6;

/// Default residual tolerance for deciding that a parameter vector solves
/// the system.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn setting(alpha: f64, phi: f64, eps: f64) -> ExperimentSetting {
        ExperimentSetting::new(alpha, phi, eps).unwrap()
    }

    fn params(a: f64, b: f64, c: f64, d: f64, e: f64) -> HvParameters {
        HvParameters::new(a, b, c, d, e).unwrap()
    }

    #[test]
    fn parameters_must_be_probabilities() {
        assert!(HvParameters::new(0.5, 0.5, 0.5, 0.5, 1.1).is_err());
        assert!(HvParameters::new(-0.1, 0.5, 0.5, 0.5, 0.5).is_err());
        assert!(HvParameters::new(f64::NAN, 0.5, 0.5, 0.5, 0.5).is_err());
    }

    #[test]
    fn derived_reference_points() {
        // Pure case at the balanced angle: flat marginals, β traces the fringe.
        for phi in [0.0, 1.0, FRAC_PI_2, PI] {
            let d = derived_quantities(&setting(FRAC_PI_4, phi, 1.0));
            assert!((d.p0 - 0.5).abs() < 1e-12);
            assert!((d.p1 - 0.5).abs() < 1e-12);
            assert!((d.beta().unwrap() - (0.5 * phi).cos().powi(2)).abs() < 1e-12);
        }
        // Fully mixed: everything flat.
        for (alpha, phi) in [(0.2, 0.3), (1.0, 4.0)] {
            let d = derived_quantities(&setting(alpha, phi, 0.0));
            assert!((d.p0 - 0.5).abs() < 1e-12);
            assert!((d.p1 - 0.5).abs() < 1e-12);
            assert!((d.beta().unwrap() - 0.5).abs() < 1e-12);
        }
        // Printed-formula arithmetic: ε = 1/2, α = π/3, φ = π/2.
        let d = derived_quantities(&setting(FRAC_PI_3, FRAC_PI_2, 0.5));
        assert!((d.eta - 0.125).abs() < 1e-12);
        assert!((d.p1 - 0.625).abs() < 1e-12);
        assert!((d.beta().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn derived_marginals_sum_to_one() {
        for alpha in [0.0, 0.4, FRAC_PI_4, 1.3, FRAC_PI_2] {
            for eps in [0.0, 0.3, 1.0] {
                let d = derived_quantities(&setting(alpha, 0.7, eps));
                assert!((d.p0 + d.p1 - 1.0).abs() < 1e-12);
                if let Some(beta) = d.beta {
                    assert!((0.0..=1.0).contains(&beta));
                }
            }
        }
    }

    #[test]
    fn degenerate_setting_has_no_beta() {
        let d = derived_quantities(&setting(0.0, 0.3, 1.0));
        assert!(d.beta.is_none());
        assert!((d.p0 - 1.0).abs() < 1e-12);
        assert!(matches!(d.beta(), Err(Error::DegenerateSetting(_))));
        assert!(matches!(
            model_distribution(&params(0.5, 0.5, 0.5, 0.5, 0.5), &setting(0.0, 0.3, 1.0)),
            Err(Error::DegenerateSetting(_))
        ));
    }

    #[test]
    fn flat_point_solves_the_flat_statistics() {
        let s = setting(0.8, 2.1, 0.0);
        let flat = params(0.5, 0.5, 0.5, 0.5, 0.5);
        let dist = model_distribution(&flat, &s).unwrap();
        for p in dist.probabilities() {
            assert!((p - 0.25).abs() < 1e-15);
        }
        assert!(residual(&flat, &s).unwrap() < 1e-15);
    }

    #[test]
    fn flat_statistics_admit_a_whole_solution_family() {
        // At eps = 0 any vector with ab + c(1-a) = 1/2 and d = e = 1/2 works.
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let s = setting(1.1, 0.4, 0.0);
        for _ in 0..100 {
            let a = 0.9 * unit();
            let b = (0.5 / a).min(1.0) * unit();
            let c = (0.5 - a * b) / (1.0 - a);
            if !(0.0..=1.0).contains(&c) {
                continue;
            }
            let p = params(a, b, c, 0.5, 0.5);
            assert!(residual(&p, &s).unwrap() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn perfect_correlation_family_reproduces_the_statistics_exactly() {
        for (alpha, phi, eps) in [(0.5, 1.0, 1.0), (1.2, 3.0, 0.4), (FRAC_PI_4, 0.2, 0.05)] {
            let s = setting(alpha, phi, eps);
            let p0 = derived_quantities(&s).p0;
            for (d, e) in [(0.0, 0.9), (0.7, 0.2), (1.0, 0.0)] {
                let p = params(p0, 1.0, 0.0, d, e);
                assert!(residual(&p, &s).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn all_particle_family_misses_the_wave_marginal() {
        // a = 1, b = 1 forces P(A=1) = 0 while p1 > 0 whenever ε < 1.
        let s = setting(0.9, 1.4, 0.6);
        let p = params(1.0, 1.0, 0.3, 0.1, 0.8);
        let dist = model_distribution(&p, &s).unwrap();
        assert!((dist.probability(0, 1) + dist.probability(1, 1)).abs() < 1e-15);
        let p1 = derived_quantities(&s).p1;
        assert!(p1 > 0.1);
        assert!(residual(&p, &s).unwrap() > p1 / 2.0 - 1e-12);
    }

    #[test]
    fn residual_of_the_flat_point_in_the_pure_case() {
        // Frozen from direct evaluation of the model sums: the worst outcome
        // is (S,A) = (0,1) where the model gives 3/8 against 1/2.
        let r = residual(&params(0.5, 0.5, 0.5, 0.5, 0.5), &setting(FRAC_PI_4, 0.0, 1.0)).unwrap();
        assert!((r - 0.125).abs() < 1e-12);
    }

    #[test]
    fn triple_vanishes_exactly_on_known_branches() {
        let s = setting(0.7, 1.9, 0.8);
        let d = derived_quantities(&s);
        let p0 = d.p0;
        let beta = d.beta().unwrap();
        // a = 0, c = p0, d = 1/2 with b, e free.
        let t = constraint_triple(&params(0.0, 0.33, p0, 0.5, 0.77), &s).unwrap();
        assert!(t.iter().all(|x| x.abs() < 1e-12), "{t:?}");
        // b = 1, c = 0, a = p0.
        let t = constraint_triple(&params(p0, 1.0, 0.0, 0.1, 0.9), &s).unwrap();
        assert!(t.iter().all(|x| x.abs() < 1e-12), "{t:?}");
        // e = β with the marginal balanced by b = p0/a.
        let a = 0.9;
        let t = constraint_triple(&params(a, p0 / a, 0.0, 0.4, beta), &s).unwrap();
        assert!(t.iter().all(|x| x.abs() < 1e-12), "{t:?}");
    }

    #[test]
    fn triple_detects_a_broken_first_component() {
        // Frozen arithmetic: ε = 1, α = π/4 gives p0 = 1/2, so the triple at
        // (1/2, 1/2, 1/2, 1, β) is (1/8, 0, 0).
        let s = setting(FRAC_PI_4, 0.7, 1.0);
        let beta = derived_quantities(&s).beta().unwrap();
        let t = constraint_triple(&params(0.5, 0.5, 0.5, 1.0, beta), &s).unwrap();
        assert!((t[0] - 0.125).abs() < 1e-12);
        assert!(t[1].abs() < 1e-15);
        assert!(t[2].abs() < 1e-12);
    }

    #[test]
    fn triple_and_residual_vanish_together() {
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let mut on_manifold = 0usize;
        for trial in 0..10_000 {
            let s = setting(
                0.05 + 0.95 * (FRAC_PI_2 - 0.1) * unit(),
                2.0 * PI * unit(),
                0.05 + 0.95 * unit(),
            );
            let d = derived_quantities(&s);
            let p = if trial % 2 == 0 {
                // Generic point: almost surely off every manifold.
                params(unit(), unit(), unit(), unit(), unit())
            } else {
                // On the perfect-correlation manifold.
                on_manifold += 1;
                params(d.p0, 1.0, 0.0, unit(), unit())
            };
            let r = residual(&p, &s).unwrap();
            let t = constraint_triple(&p, &s).unwrap();
            let triple_small = t.iter().all(|x| x.abs() < 1e-12);
            assert_eq!(r < 1e-12, triple_small, "params={p:?} triple={t:?} r={r}");
        }
        assert!(on_manifold > 0);
    }

    #[test]
    fn beta_spans_exactly_the_predicted_fringe_range() {
        for (alpha, eps) in [(0.4, 0.3), (FRAC_PI_4, 1.0), (1.3, 0.05)] {
            let at = |phi: f64| {
                derived_quantities(&setting(alpha, phi, eps))
                    .beta()
                    .unwrap()
            };
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for k in 0..=100 {
                let b = at(2.0 * PI * k as f64 / 100.0);
                lo = lo.min(b);
                hi = hi.max(b);
            }
            let d = derived_quantities(&setting(alpha, 0.0, eps));
            let predicted = eps * alpha.sin().powi(2) / d.p1;
            assert!((hi - lo - predicted).abs() < 1e-12);
            assert!(predicted > 0.0);
        }
    }

    #[test]
    fn classify_reference_points() {
        let s = setting(0.7, 1.9, 0.8);
        let d = derived_quantities(&s);
        let wave = classify(&params(0.0, 0.3, d.p0, 0.5, 0.9), &s, CLASSIFY_TOL).unwrap();
        assert_eq!(
            wave.into_iter().collect::<Vec<_>>(),
            vec![RejectionLabel::WaveActsAsParticle]
        );
        let perfect = classify(&params(d.p0, 1.0, 0.0, 0.3, 0.6), &s, CLASSIFY_TOL).unwrap();
        assert_eq!(
            perfect.into_iter().collect::<Vec<_>>(),
            vec![RejectionLabel::PerfectCorrelation]
        );
        let beta = d.beta().unwrap();
        let particle = classify(&params(0.9, d.p0 / 0.9, 0.0, 0.3, beta), &s, CLASSIFY_TOL).unwrap();
        assert_eq!(
            particle.into_iter().collect::<Vec<_>>(),
            vec![RejectionLabel::ParticleActsAsWave]
        );
    }

    #[test]
    fn classify_flat_solution_at_zero_noise_is_consistent() {
        let s = setting(0.8, 2.1, 0.0);
        let labels = classify(&params(0.5, 0.5, 0.5, 0.5, 0.5), &s, CLASSIFY_TOL).unwrap();
        assert!(labels.is_empty());
    }

    #[test]
    fn classify_rejects_non_solutions() {
        let s = setting(0.7, 1.9, 0.8);
        assert!(matches!(
            classify(&params(0.1, 0.9, 0.9, 0.1, 0.9), &s, CLASSIFY_TOL),
            Err(Error::NotASolution(_))
        ));
    }

    #[test]
    fn cross_setting_rigidity_of_the_perfect_correlation_manifold() {
        // A perfect-correlation solution pinned at α₁ misses the ancilla
        // marginal at α₂ by at least ε|cos²α₁ − cos²α₂|/4.
        for eps in [0.2, 0.6, 1.0] {
            let phi = 1.3;
            let a1 = 0.5;
            let a2 = 1.2;
            let s1 = setting(a1, phi, eps);
            let s2 = setting(a2, phi, eps);
            let p = params(derived_quantities(&s1).p0, 1.0, 0.0, 0.4, 0.8);
            assert!(residual(&p, &s1).unwrap() < 1e-9);
            let bound = eps * (a1.cos().powi(2) - a2.cos().powi(2)).abs() / 4.0;
            assert!(residual(&p, &s2).unwrap() >= bound - 1e-9);
        }
    }
}
