//! Exact solution manifolds of the constraint system and their rejections.
//!
//! For ε > 0 and 0 < α < π/2 the three constraints factor, so their solution
//! set is a finite union of coordinate-aligned families. Each family below
//! carries the rejection labels that apply to every one of its members; the
//! two degenerate families solve the first two constraints but contradict
//! the marginal one (they would force P(A=0) to 0 or 1), which is itself
//! their rejection.

use std::collections::BTreeSet;
use std::fmt;

use crate::circuit::ExperimentSetting;
use crate::error::{Error, Result};
use crate::hvm::{derived_quantities, HvParameters, RejectionLabel};

/// Margin used when sampling members near strict-inequality boundaries, as a
/// fraction of min(p₀, p₁).
const SAMPLE_MARGIN: f64 = 0.02;

/// One exact constraint appearing in a branch description.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binding {
    AZero,
    AOne,
    AEqualsP0,
    BOne,
    BEqualsP0,
    CZero,
    CEqualsP0,
    CPositive,
    BBelowOne,
    DHalf,
    EBeta,
    MarginalMatch,
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            Binding::AZero => "a = 0",
            Binding::AOne => "a = 1",
            Binding::AEqualsP0 => "a = p0",
            Binding::BOne => "b = 1",
            Binding::BEqualsP0 => "b = p0",
            Binding::CZero => "c = 0",
            Binding::CEqualsP0 => "c = p0",
            Binding::CPositive => "c > 0",
            Binding::BBelowOne => "b < 1",
            Binding::DHalf => "d = 1/2",
            Binding::EBeta => "e = beta",
            Binding::MarginalMatch => "a*b + c*(1-a) = p0",
        };
        f.write_str(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    /// {a = 0, c = p₀, d = 1/2}; b, e free.
    WaveSourceOnly,
    /// {b = 1, d = 1/2, a + c(1−a) = p₀, c > 0}; e free, a ∈ [0, p₀).
    WaveBalancedMarginal,
    /// {b = 1, c = 0, a = p₀}; d, e free.
    PerfectCorrelation,
    /// {c = 0, ab = p₀, b < 1, e = β}; d free, a ∈ (p₀, 1].
    ParticleBalancedMarginal,
    /// {a = 1, b = p₀, e = β}; c, d free.
    ParticleSourceOnly,
    /// {d = 1/2, e = β, ab + c(1−a) = p₀, 0 < a < 1, b < 1, c > 0}.
    BothBehaviorsFixed,
    /// {a = 0, c = 0}: forces P(A=0) = 0.
    DegenerateAllClosed,
    /// {a = 1, b = 1}: forces P(A=0) = 1.
    DegenerateAllOpen,
}

/// One solution manifold of the constraint system, with its rejections.
#[derive(Debug, Clone)]
pub struct SolutionBranch {
    family: Family,
    bindings: Vec<Binding>,
    labels: BTreeSet<RejectionLabel>,
    satisfies_marginal: bool,
    p0: f64,
    beta: f64,
}

impl SolutionBranch {
    /// The exact constraints that define this manifold.
    pub fn bindings(&self) -> &[Binding] {
        &self.bindings
    }

    /// Rejection labels carried by every member; never empty.
    pub fn labels(&self) -> &BTreeSet<RejectionLabel> {
        &self.labels
    }

    /// False for the two degenerate families that contradict the ancilla
    /// marginal constraint (their members never reproduce the statistics).
    pub fn satisfies_marginal(&self) -> bool {
        self.satisfies_marginal
    }

    /// Human-readable constraint list.
    pub fn description(&self) -> String {
        self.bindings
            .iter()
            .map(Binding::to_string)
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Maps a point of the unit cube onto the manifold.
    ///
    /// Free coordinates are filled from `u`; bound ones are solved for.
    /// Strict inequalities are sampled with an interior margin so that
    /// membership predicates stay decisive at the classification tolerance.
    pub fn sample_member(&self, u: &[f64; 5]) -> HvParameters {
        let p0 = self.p0;
        let p1 = 1.0 - p0;
        let margin = SAMPLE_MARGIN * p0.min(p1);
        let (a, b, c, d, e) = match self.family {
            Family::WaveSourceOnly => (0.0, u[0], p0, 0.5, u[1]),
            Family::WaveBalancedMarginal => {
                // c = (p0 - a)/(1 - a) stays ≥ margin when a ≤ p0 - margin.
                let a = (p0 - margin) * u[0];
                let c = (p0 - a) / (1.0 - a);
                (a, 1.0, c, 0.5, u[1])
            }
            Family::PerfectCorrelation => (p0, 1.0, 0.0, u[0], u[1]),
            Family::ParticleBalancedMarginal => {
                // b = p0/a < 1 needs a > p0; keep a(1-b) = a - p0 ≥ margin.
                let a = (p0 + margin) + (1.0 - p0 - margin) * u[0];
                (a, p0 / a, 0.0, u[1], self.beta)
            }
            Family::ParticleSourceOnly => (1.0, p0, u[0], u[1], self.beta),
            Family::BothBehaviorsFixed => {
                let a = margin + (1.0 - 2.0 * margin) * u[0];
                // Keep both masses away from zero: ab ≤ p0 - margin gives
                // c(1-a) ≥ margin, b ≤ 1 - margin/a gives a(1-b) ≥ margin,
                // and b ≥ (p0 + a - 1)/a keeps c ≤ 1.
                let lo = ((p0 + a - 1.0) / a).max(0.0);
                let hi = ((p0 - margin) / a).min(1.0 - margin / a);
                let b = lo + (hi - lo).max(0.0) * u[1];
                let c = (p0 - a * b) / (1.0 - a);
                (a, b, c.clamp(0.0, 1.0), 0.5, self.beta)
            }
            Family::DegenerateAllClosed => (0.0, u[0], 0.0, u[1], u[2]),
            Family::DegenerateAllOpen => (1.0, 1.0, u[0], u[1], u[2]),
        };
        HvParameters::new(a, b, c, d, e).expect("samplers stay inside the unit cube")
    }
}

/// The complete catalogue of solution manifolds at a setting.
///
/// Requires ε > 0 and 0 < α < π/2 strictly: there p₀, p₁ ∈ (0, 1) and β is
/// φ-dependent, which is what makes every family below rejectable.
pub fn enumerate_branches(setting: &ExperimentSetting) -> Result<Vec<SolutionBranch>> {
    if setting.epsilon() <= 0.0 {
        return Err(Error::InvalidArgument(
            "branch enumeration needs epsilon > 0; at epsilon = 0 the flat statistics admit consistent models".into(),
        ));
    }
    if setting.alpha() <= 0.0 || setting.alpha() >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::InvalidArgument(format!(
            "branch enumeration needs 0 < alpha < pi/2, got {}",
            setting.alpha()
        )));
    }
    let derived = derived_quantities(setting);
    let beta = derived.beta()?;
    let p0 = derived.p0;
    let branch = |family: Family,
                  bindings: Vec<Binding>,
                  labels: Vec<RejectionLabel>,
                  satisfies_marginal: bool| SolutionBranch {
        family,
        bindings,
        labels: labels.into_iter().collect(),
        satisfies_marginal,
        p0,
        beta,
    };
    Ok(vec![
        branch(
            Family::WaveSourceOnly,
            vec![Binding::AZero, Binding::CEqualsP0, Binding::DHalf],
            vec![RejectionLabel::WaveActsAsParticle],
            true,
        ),
        branch(
            Family::WaveBalancedMarginal,
            vec![
                Binding::BOne,
                Binding::DHalf,
                Binding::MarginalMatch,
                Binding::CPositive,
            ],
            vec![RejectionLabel::WaveActsAsParticle],
            true,
        ),
        branch(
            Family::PerfectCorrelation,
            vec![Binding::BOne, Binding::CZero, Binding::AEqualsP0],
            vec![RejectionLabel::PerfectCorrelation],
            true,
        ),
        branch(
            Family::ParticleBalancedMarginal,
            vec![
                Binding::CZero,
                Binding::EBeta,
                Binding::MarginalMatch,
                Binding::BBelowOne,
            ],
            vec![RejectionLabel::ParticleActsAsWave],
            true,
        ),
        branch(
            Family::ParticleSourceOnly,
            vec![Binding::AOne, Binding::BEqualsP0, Binding::EBeta],
            vec![RejectionLabel::ParticleActsAsWave],
            true,
        ),
        branch(
            Family::BothBehaviorsFixed,
            vec![
                Binding::DHalf,
                Binding::EBeta,
                Binding::MarginalMatch,
                Binding::CPositive,
                Binding::BBelowOne,
            ],
            vec![
                RejectionLabel::WaveActsAsParticle,
                RejectionLabel::ParticleActsAsWave,
            ],
            true,
        ),
        branch(
            Family::DegenerateAllClosed,
            vec![Binding::AZero, Binding::CZero],
            vec![RejectionLabel::TrivialDegenerate],
            false,
        ),
        branch(
            Family::DegenerateAllOpen,
            vec![Binding::AOne, Binding::BOne],
            vec![RejectionLabel::TrivialDegenerate],
            false,
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hvm::{classify, residual, CLASSIFY_TOL};
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn unit(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn enumeration_requires_an_interior_setting() {
        assert!(enumerate_branches(&ExperimentSetting::new(0.5, 1.0, 0.0).unwrap()).is_err());
        assert!(enumerate_branches(&ExperimentSetting::new(0.0, 1.0, 0.5).unwrap()).is_err());
        assert!(
            enumerate_branches(&ExperimentSetting::new(FRAC_PI_2, 1.0, 0.5).unwrap()).is_err()
        );
    }

    #[test]
    fn every_branch_is_labeled() {
        for (alpha, phi, eps) in [
            (std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_3, 1.0),
            (std::f64::consts::FRAC_PI_3, 1.0, 0.05),
        ] {
            let branches =
                enumerate_branches(&ExperimentSetting::new(alpha, phi, eps).unwrap()).unwrap();
            assert_eq!(branches.len(), 8);
            for b in &branches {
                assert!(!b.labels().is_empty(), "{}", b.description());
            }
        }
    }

    #[test]
    fn members_of_solving_branches_have_zero_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let setting = ExperimentSetting::new(
                0.1 + (FRAC_PI_2 - 0.2) * unit(&mut rng),
                2.0 * PI * unit(&mut rng),
                0.05 + 0.95 * unit(&mut rng),
            )
            .unwrap();
            for branch in enumerate_branches(&setting).unwrap() {
                let u = [
                    unit(&mut rng),
                    unit(&mut rng),
                    unit(&mut rng),
                    unit(&mut rng),
                    unit(&mut rng),
                ];
                let member = branch.sample_member(&u);
                let r = residual(&member, &setting).unwrap();
                if branch.satisfies_marginal() {
                    assert!(r < 1e-12, "{}: residual {r}", branch.description());
                } else {
                    // Degenerate families miss the ancilla marginal by a
                    // macroscopic amount.
                    assert!(r > 1e-3, "{}: residual {r}", branch.description());
                }
            }
        }
    }

    #[test]
    fn sampled_members_classify_exactly_into_their_branch_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let setting = ExperimentSetting::new(
                0.15 + (FRAC_PI_2 - 0.3) * unit(&mut rng),
                0.2 + 5.8 * unit(&mut rng),
                0.1 + 0.9 * unit(&mut rng),
            )
            .unwrap();
            for branch in enumerate_branches(&setting).unwrap() {
                if !branch.satisfies_marginal() {
                    continue;
                }
                let u = [
                    unit(&mut rng),
                    unit(&mut rng),
                    unit(&mut rng),
                    unit(&mut rng),
                    unit(&mut rng),
                ];
                let member = branch.sample_member(&u);
                let labels = classify(&member, &setting, CLASSIFY_TOL).unwrap();
                assert_eq!(&labels, branch.labels(), "{}", branch.description());
            }
        }
    }

    #[test]
    fn perfect_correlation_membership_example() {
        let setting = ExperimentSetting::new(0.6, 2.3, 0.7).unwrap();
        let p0 = derived_quantities(&setting).p0;
        let member = HvParameters::new(p0, 1.0, 0.0, 0.7, 0.2).unwrap();
        assert!(residual(&member, &setting).unwrap() < 1e-15);
    }
}
