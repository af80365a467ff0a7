//! Numerical feasibility certificate for the hidden-variable model.
//!
//! The source fixes one parameter vector before the experimenter dials in
//! (α, φ); measurement independence therefore means a single (a, b, c, d, e)
//! must fit every setting of a sweep at once. The scan minimizes the worst
//! per-setting residual over the parameter cube with an exhaustive grid
//! followed by coordinate refinement, and returns either a witness vector or
//! the certified minimum.

use rayon::prelude::*;

use crate::circuit::ExperimentSetting;
use crate::error::{Error, Result};
use crate::hvm::{derived_quantities, HvParameters};
use crate::noise::noisy_joint_distribution;

/// Verdict of the cross-setting search.
#[derive(Debug, Clone)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    /// A parameter vector achieving residual < tol at every setting, when
    /// one exists.
    pub witness: Option<HvParameters>,
    /// The certified minimum of the max-over-settings residual, when no
    /// witness exists.
    pub min_max_residual: Option<f64>,
    pub settings_used: Vec<ExperimentSetting>,
}

/// Per-setting constants the objective needs.
struct SettingTarget {
    beta: f64,
    target: [f64; 4],
}

impl SettingTarget {
    fn new(setting: &ExperimentSetting) -> Result<Self> {
        let beta = derived_quantities(setting).beta()?;
        Ok(Self {
            beta,
            target: noisy_joint_distribution(setting).probabilities(),
        })
    }

    /// Max-norm residual of the model at this setting; same arithmetic as
    /// [`crate::hvm::model_distribution`], inlined on raw floats for the
    /// inner loop.
    fn residual(&self, x: &[f64; 5]) -> f64 {
        let [a, b, c, d, e] = *x;
        let particle_open = a * b;
        let wave_open = c * (1.0 - a);
        let particle_closed = a * (1.0 - b);
        let wave_closed = (1.0 - c) * (1.0 - a);
        let p = [
            0.5 * particle_open + d * wave_open,
            e * particle_closed + self.beta * wave_closed,
            0.5 * particle_open + (1.0 - d) * wave_open,
            (1.0 - e) * particle_closed + (1.0 - self.beta) * wave_closed,
        ];
        let mut worst = 0.0f64;
        for (model, target) in p.iter().zip(&self.target) {
            worst = worst.max((model - target).abs());
        }
        worst
    }
}

fn objective(targets: &[SettingTarget], x: &[f64; 5]) -> f64 {
    targets
        .iter()
        .map(|t| t.residual(x))
        .fold(0.0f64, f64::max)
}

fn count_distinct(values: impl Iterator<Item = f64>) -> usize {
    let mut seen: Vec<f64> = values.collect();
    seen.sort_by(|a, b| a.partial_cmp(b).expect("setting angles are finite"));
    seen.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    seen.len()
}

/// Searches for one parameter vector reproducing the statistics of every
/// setting simultaneously.
///
/// The grid places `grid_density` points per axis on [0, 1]⁵; the best grid
/// point is then refined by `refine_steps` rounds of shrinking coordinate
/// probes. The result is independent of evaluation order: grid ties go to
/// the lexicographically smallest parameter vector, and refinement moves
/// only on strict improvement.
///
/// With ε > 0 the settings must span at least 2 distinct α and 3 distinct φ;
/// anything less leaves a solution manifold unchallenged (a single α cannot
/// reject the perfectly correlated family, and a constant φ cannot expose
/// the fringe dependence of β).
pub fn feasibility_scan(
    settings: &[ExperimentSetting],
    grid_density: usize,
    refine_steps: usize,
    tol: f64,
) -> Result<FeasibilityVerdict> {
    if settings.is_empty() {
        return Err(Error::InvalidArgument(
            "feasibility scan needs at least one setting".into(),
        ));
    }
    if grid_density < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid density must be at least 2, got {grid_density}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let epsilon = settings[0].epsilon();
    if settings
        .iter()
        .any(|s| (s.epsilon() - epsilon).abs() > 1e-15)
    {
        return Err(Error::InvalidArgument(
            "all settings in a scan must share one epsilon".into(),
        ));
    }
    if epsilon > 0.0 {
        let alphas = count_distinct(settings.iter().map(|s| s.alpha()));
        let phis = count_distinct(settings.iter().map(|s| s.phi()));
        if alphas < 2 || phis < 3 {
            return Err(Error::InvalidArgument(format!(
                "scan needs >= 2 distinct alpha and >= 3 distinct phi values for epsilon > 0, \
                 got {alphas} and {phis}"
            )));
        }
    }
    let targets = settings
        .iter()
        .map(SettingTarget::new)
        .collect::<Result<Vec<_>>>()?;

    let n = grid_density as u64;
    let total = n.pow(5);
    let step = 1.0 / (grid_density as f64 - 1.0);
    let decode = |idx: u64| -> [f64; 5] {
        let mut x = [0.0; 5];
        let mut rest = idx;
        for slot in x.iter_mut().rev() {
            *slot = (rest % n) as f64 * step;
            rest /= n;
        }
        x
    };

    // Exhaustive grid pass. Reducing on (value, index) keeps the outcome
    // deterministic under any rayon work split: the index order is the
    // lexicographic order of the parameter vectors.
    let (mut best_value, best_idx) = (0..total)
        .into_par_iter()
        .fold(
            || (f64::INFINITY, u64::MAX),
            |acc, idx| {
                let value = objective(&targets, &decode(idx));
                if value < acc.0 || (value == acc.0 && idx < acc.1) {
                    (value, idx)
                } else {
                    acc
                }
            },
        )
        .reduce(
            || (f64::INFINITY, u64::MAX),
            |a, b| {
                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    let mut best = decode(best_idx);

    // Coordinate refinement with a shrinking probe radius.
    let mut radius = step;
    for _ in 0..refine_steps {
        for coord in 0..5 {
            for offset in [-radius, -0.5 * radius, 0.5 * radius, radius] {
                let mut candidate = best;
                candidate[coord] = (candidate[coord] + offset).clamp(0.0, 1.0);
                let value = objective(&targets, &candidate);
                if value < best_value {
                    best_value = value;
                    best = candidate;
                }
            }
        }
        radius *= 0.5;
    }

    let witness = HvParameters::new(best[0], best[1], best[2], best[3], best[4])
        .expect("grid and refinement stay inside the unit cube");
    if best_value < tol {
        Ok(FeasibilityVerdict {
            feasible: true,
            witness: Some(witness),
            min_max_residual: None,
            settings_used: settings.to_vec(),
        })
    } else {
        Ok(FeasibilityVerdict {
            feasible: false,
            witness: None,
            min_max_residual: Some(best_value),
            settings_used: settings.to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI};

    fn sweep(eps: f64) -> Vec<ExperimentSetting> {
        let mut settings = Vec::new();
        for alpha in [FRAC_PI_6, FRAC_PI_3] {
            for phi in [0.0, FRAC_PI_2, PI] {
                settings.push(ExperimentSetting::new(alpha, phi, eps).unwrap());
            }
        }
        settings
    }

    #[test]
    fn rejects_insufficient_diversity() {
        let settings: Vec<_> = [0.0, FRAC_PI_2, PI]
            .iter()
            .map(|&phi| ExperimentSetting::new(FRAC_PI_6, phi, 0.5).unwrap())
            .collect();
        assert!(matches!(
            feasibility_scan(&settings, 5, 5, 1e-9),
            Err(Error::InvalidArgument(_))
        ));
        let settings: Vec<_> = [FRAC_PI_6, FRAC_PI_3]
            .iter()
            .map(|&alpha| ExperimentSetting::new(alpha, 1.0, 0.5).unwrap())
            .collect();
        assert!(matches!(
            feasibility_scan(&settings, 5, 5, 1e-9),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn rejects_mixed_epsilon() {
        let settings = vec![
            ExperimentSetting::new(FRAC_PI_6, 0.0, 0.5).unwrap(),
            ExperimentSetting::new(FRAC_PI_3, 1.0, 0.6).unwrap(),
        ];
        assert!(feasibility_scan(&settings, 5, 5, 1e-9).is_err());
    }

    #[test]
    fn flat_statistics_are_feasible() {
        let verdict = feasibility_scan(&sweep(0.0), 11, 20, 1e-9).unwrap();
        assert!(verdict.feasible);
        let w = verdict.witness.unwrap();
        // The witness balances the flat ancilla marginal.
        assert!((w.ancilla_marginal_zero() - 0.5).abs() < 1e-9);
        assert!(verdict.min_max_residual.is_none());
    }

    #[test]
    fn noisy_statistics_are_infeasible_with_the_marginal_bound() {
        for eps in [0.5, 1.0] {
            let verdict = feasibility_scan(&sweep(eps), 11, 20, 1e-9).unwrap();
            assert!(!verdict.feasible);
            let certified = verdict.min_max_residual.unwrap();
            assert!(
                certified >= eps / 8.0 - 1e-3,
                "eps={eps}: certified {certified}"
            );
        }
    }

    #[test]
    fn scan_is_deterministic() {
        let a = feasibility_scan(&sweep(0.5), 7, 10, 1e-9).unwrap();
        let b = feasibility_scan(&sweep(0.5), 7, 10, 1e-9).unwrap();
        assert_eq!(a.min_max_residual, b.min_max_residual);
    }
}
