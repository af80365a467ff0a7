//! The delayed-choice interferometer circuit and its exact statistics.
//!
//! The circuit prepares |0⟩_S ⊗ (cos α|0⟩_A + sin α|1⟩_A), sends the system
//! qubit through a beam splitter and a phase gate, and applies a second beam
//! splitter coherently controlled by the ancilla. The ancilla value decides
//! the arrangement: A = 0 leaves the interferometer open (particle
//! statistics), A = 1 closes it (wave statistics), and intermediate α puts
//! the beam splitter in superposition.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    evolve_density, make_gate, tensor_product, validate_density, ComplexOperator, Gate, PureState,
};

/// Marginal probabilities below this threshold cannot be conditioned on.
pub const CONDITIONING_FLOOR: f64 = 1e-12;

/// The experimenter's knobs: ancilla superposition angle α ∈ [0, π/2], path
/// phase φ (canonicalized to [0, 2π)), and white-noise mixing ε ∈ [0, 1].
///
/// Validation happens here once; operations taking a setting are then total.
/// α outside its range raises rather than wraps; a negative ancilla
/// amplitude would silently flip the meaning of the marginal formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentSetting {
    alpha: f64,
    phi: f64,
    epsilon: f64,
}

impl ExperimentSetting {
    pub fn new(alpha: f64, phi: f64, epsilon: f64) -> Result<Self> {
        if !alpha.is_finite() || !(0.0..=FRAC_PI_2).contains(&alpha) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in [0, pi/2], got {alpha}"
            )));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "phi must be finite, got {phi}"
            )));
        }
        if !epsilon.is_finite() || !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in [0, 1], got {epsilon}"
            )));
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            // rem_euclid can round up to the modulus itself.
            phi = 0.0;
        }
        Ok(Self {
            alpha,
            phi,
            epsilon,
        })
    }

    /// A pure-state setting (ε = 1).
    pub fn pure(alpha: f64, phi: f64) -> Result<Self> {
        Self::new(alpha, phi, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Same α and ε with a different phase.
    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        Self::new(self.alpha, phi, self.epsilon)
    }
}

/// Probability 4-vector over the joint outcomes {00, 01, 10, 11} in (S, A)
/// order.
///
/// Entries as small as -1e-12 are accepted and clamped to zero; the vector
/// must sum to 1 within 1e-10.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDistribution {
    p: [f64; 4],
}

impl JointDistribution {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        let mut clamped = [0.0; 4];
        for (i, &x) in p.iter().enumerate() {
            if !x.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&x) {
                return Err(Error::InvalidArgument(format!(
                    "probability entry {i} out of range: {x}"
                )));
            }
            clamped[i] = x.max(0.0);
        }
        let sum: f64 = clamped.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(Self { p: clamped })
    }

    /// Entries ordered (p00, p01, p10, p11).
    pub fn probabilities(&self) -> [f64; 4] {
        self.p
    }

    /// P(S = s, A = a); outcomes must be 0 or 1.
    pub fn probability(&self, s: u8, a: u8) -> f64 {
        debug_assert!(s <= 1 && a <= 1, "outcomes are single bits");
        self.p[(2 * s + a) as usize]
    }

    /// Marginal P(A = a).
    pub fn ancilla_marginal(&self, a: u8) -> f64 {
        self.probability(0, a) + self.probability(1, a)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.p
            .iter()
            .zip(&other.p)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// |0⟩_S ⊗ (cos α|0⟩_A + sin α|1⟩_A).
pub fn initial_state(alpha: f64) -> Result<PureState> {
    if !alpha.is_finite() || !(0.0..=FRAC_PI_2).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in [0, pi/2], got {alpha}"
        )));
    }
    PureState::new(vec![
        Complex64::new(alpha.cos(), 0.0),
        Complex64::new(alpha.sin(), 0.0),
        Complex64::ZERO,
        Complex64::ZERO,
    ])
}

/// The full interferometer unitary: first beam splitter on S, phase on path
/// |1⟩_S, then the ancilla-controlled second beam splitter.
pub fn interferometer_unitary(phi: f64) -> Result<ComplexOperator> {
    let id2 = make_gate(Gate::Identity(2))?;
    let first = tensor_product(&make_gate(Gate::Hadamard)?, &id2)?;
    let phase = tensor_product(&make_gate(Gate::Phase(phi))?, &id2)?;
    let second = make_gate(Gate::ControlledHadamard)?;
    second.matmul(&phase.matmul(&first)?)
}

/// The particle branch state |p⟩ = (|0⟩ + e^{iφ}|1⟩)/√2.
pub fn particle_branch(phi: f64) -> Result<PureState> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::new(vec![
        Complex64::new(s, 0.0),
        Complex64::from_polar(s, phi),
    ])
}

/// The wave branch state |w⟩ = e^{iφ/2}(cos(φ/2)|0⟩ − i sin(φ/2)|1⟩).
pub fn wave_branch(phi: f64) -> Result<PureState> {
    let half = 0.5 * phi;
    let global = Complex64::from_polar(1.0, half);
    PureState::new(vec![
        global * Complex64::new(half.cos(), 0.0),
        global * Complex64::new(0.0, -half.sin()),
    ])
}

/// Closed-form final state cos α|p⟩_S|0⟩_A + sin α|w⟩_S|1⟩_A.
///
/// Agrees with running [`initial_state`] through [`interferometer_unitary`]
/// exactly, global phase included.
pub fn final_state(setting: &ExperimentSetting) -> PureState {
    let p = particle_branch(setting.phi).expect("phi is finite");
    let w = wave_branch(setting.phi).expect("phi is finite");
    let ca = setting.alpha.cos();
    let sa = setting.alpha.sin();
    PureState::new(vec![
        ca * p.amplitudes()[0],
        sa * w.amplitudes()[0],
        ca * p.amplitudes()[1],
        sa * w.amplitudes()[1],
    ])
    .expect("branch states are normalized and orthogonal across the ancilla")
}

/// Closed-form joint distribution of the pure case:
/// [cos²α/2, sin²α cos²(φ/2), cos²α/2, sin²α sin²(φ/2)].
pub fn joint_distribution(setting: &ExperimentSetting) -> JointDistribution {
    let ca2 = setting.alpha.cos().powi(2);
    let sa2 = setting.alpha.sin().powi(2);
    let half = 0.5 * setting.phi;
    JointDistribution::new([
        0.5 * ca2,
        sa2 * half.cos().powi(2),
        0.5 * ca2,
        sa2 * half.sin().powi(2),
    ])
    .expect("closed form is a normalized distribution")
}

/// Born-rule measurement in the computational basis: pᵢ = Tr(ρ|i⟩⟨i|), the
/// real diagonal of ρ.
pub fn measure_joint(rho: &ComplexOperator) -> Result<JointDistribution> {
    if rho.dim() != 4 {
        return Err(Error::InvalidArgument(format!(
            "joint measurement expects a 4x4 density matrix, got {}x{}",
            rho.dim(),
            rho.dim()
        )));
    }
    validate_density(rho, 1e-10)?;
    JointDistribution::new([
        rho.get(0, 0).re,
        rho.get(1, 1).re,
        rho.get(2, 2).re,
        rho.get(3, 3).re,
    ])
}

/// Runs the circuit on the given pure initial state and measures.
pub fn circuit_distribution(setting: &ExperimentSetting) -> Result<JointDistribution> {
    let u = interferometer_unitary(setting.phi)?;
    let rho = initial_state(setting.alpha)?.density();
    measure_joint(&evolve_density(&u, &rho)?)
}

/// [P(S=0|A=a), P(S=1|A=a)].
pub fn conditional_system_distribution(j: &JointDistribution, a_outcome: u8) -> Result<[f64; 2]> {
    if a_outcome > 1 {
        return Err(Error::InvalidArgument(format!(
            "ancilla outcome must be 0 or 1, got {a_outcome}"
        )));
    }
    let marginal = j.ancilla_marginal(a_outcome);
    if marginal <= CONDITIONING_FLOOR {
        return Err(Error::DegenerateConditioning(format!(
            "P(A = {a_outcome}) = {marginal} is too small to condition on"
        )));
    }
    Ok([
        j.probability(0, a_outcome) / marginal,
        j.probability(1, a_outcome) / marginal,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn setting_validation() {
        assert!(ExperimentSetting::new(-0.1, 0.0, 1.0).is_err());
        assert!(ExperimentSetting::new(FRAC_PI_2 + 0.1, 0.0, 1.0).is_err());
        assert!(ExperimentSetting::new(0.3, f64::INFINITY, 1.0).is_err());
        assert!(ExperimentSetting::new(0.3, 0.0, 1.5).is_err());
        assert!(ExperimentSetting::new(0.3, 0.0, -0.5).is_err());
        let s = ExperimentSetting::new(0.3, -PI, 0.5).unwrap();
        assert!((s.phi() - PI).abs() < 1e-12);
        assert!(s.phi() >= 0.0 && s.phi() < 2.0 * PI);
    }

    #[test]
    fn initial_state_open_and_closed() {
        let open = initial_state(0.0).unwrap();
        assert!((open.amplitudes()[0].re - 1.0).abs() < 1e-15);
        let closed = initial_state(FRAC_PI_2).unwrap();
        assert!((closed.amplitudes()[1].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn initial_state_equal_superposition() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let st = initial_state(FRAC_PI_4).unwrap();
        assert!((st.amplitudes()[0].re - s).abs() < 1e-15);
        assert!((st.amplitudes()[1].re - s).abs() < 1e-15);
        assert_eq!(st.amplitudes()[2], Complex64::ZERO);
    }

    #[test]
    fn unitary_reproduces_particle_branch_at_alpha_zero() {
        for phi in [0.0, 0.7, FRAC_PI_2, PI, 5.0] {
            let u = interferometer_unitary(phi).unwrap();
            let out = initial_state(0.0).unwrap().apply(&u).unwrap();
            let p = particle_branch(phi).unwrap();
            assert!((out.amplitudes()[0] - p.amplitudes()[0]).norm() < 1e-12);
            assert!((out.amplitudes()[2] - p.amplitudes()[1]).norm() < 1e-12);
            assert!(out.amplitudes()[1].norm() < 1e-15);
            assert!(out.amplitudes()[3].norm() < 1e-15);
        }
    }

    #[test]
    fn unitary_reproduces_wave_branch_at_alpha_half_pi() {
        for phi in [0.0, 0.7, FRAC_PI_2, PI, 5.0] {
            let u = interferometer_unitary(phi).unwrap();
            let out = initial_state(FRAC_PI_2).unwrap().apply(&u).unwrap();
            let w = wave_branch(phi).unwrap();
            // The circuit output matches the closed form exactly, not just up
            // to a global phase.
            assert!((out.amplitudes()[1] - w.amplitudes()[0]).norm() < 1e-12);
            assert!((out.amplitudes()[3] - w.amplitudes()[1]).norm() < 1e-12);
        }
    }

    #[test]
    fn closed_interferometer_at_zero_phase_is_a_bright_fringe() {
        // H·H = 1, so the photon exits in S = 0 deterministically.
        let u = interferometer_unitary(0.0).unwrap();
        let out = initial_state(FRAC_PI_2).unwrap().apply(&u).unwrap();
        assert!((out.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn final_state_matches_circuit_on_a_grid() {
        for i in 0..=10 {
            for k in 0..10 {
                let alpha = FRAC_PI_2 * i as f64 / 10.0;
                let phi = 2.0 * PI * k as f64 / 10.0;
                let setting = ExperimentSetting::pure(alpha, phi).unwrap();
                let u = interferometer_unitary(phi).unwrap();
                let circuit = initial_state(alpha).unwrap().apply(&u).unwrap();
                let closed = final_state(&setting);
                let fidelity = circuit.fidelity(&closed).unwrap();
                assert!(fidelity > 1.0 - 1e-12, "alpha={alpha} phi={phi}");
                for (a, b) in circuit.amplitudes().iter().zip(closed.amplitudes()) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn final_state_closed_zero_phase() {
        let setting = ExperimentSetting::pure(FRAC_PI_2, 0.0).unwrap();
        let out = final_state(&setting);
        assert!((out.amplitudes()[1] - Complex64::ONE).norm() < 1e-15);
    }

    #[test]
    fn final_state_open_pi_phase() {
        // |p⟩ at φ = π is (|0⟩ − |1⟩)/√2.
        let setting = ExperimentSetting::pure(0.0, PI).unwrap();
        let out = final_state(&setting);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitudes()[0].re - s).abs() < 1e-12);
        assert!((out.amplitudes()[2] + Complex64::new(s, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn branch_overlap_vanishes_at_quarter_fringe() {
        // ⟨p|w⟩ = cos φ/√2, zero at φ = π/2 where the state is maximally
        // entangled for α = π/4.
        let overlap = particle_branch(FRAC_PI_2)
            .unwrap()
            .inner(&wave_branch(FRAC_PI_2).unwrap())
            .unwrap();
        assert!(overlap.norm() < 1e-15);
        for phi in [0.0, 0.3, 1.0, 2.5, 4.0] {
            let overlap = particle_branch(phi)
                .unwrap()
                .inner(&wave_branch(phi).unwrap())
                .unwrap();
            assert!((overlap.norm() - (phi.cos() / 2f64.sqrt()).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_ignores_global_phases_on_either_branch() {
        let setting = ExperimentSetting::pure(0.9, 2.3).unwrap();
        let u = interferometer_unitary(setting.phi()).unwrap();
        let circuit = initial_state(setting.alpha()).unwrap().apply(&u).unwrap();
        let closed = final_state(&setting);
        for phase in [0.4, 1.9, 4.4] {
            let factor = Complex64::from_polar(1.0, phase);
            let rotated = PureState::new(
                closed.amplitudes().iter().map(|a| a * factor).collect(),
            )
            .unwrap();
            assert!(circuit.fidelity(&rotated).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn joint_distribution_reference_points() {
        let uniform = joint_distribution(&ExperimentSetting::pure(FRAC_PI_4, FRAC_PI_2).unwrap());
        for p in uniform.probabilities() {
            assert!((p - 0.25).abs() < 1e-12);
        }
        let particle = joint_distribution(&ExperimentSetting::pure(0.0, 1.234).unwrap());
        let expected = [0.5, 0.0, 0.5, 0.0];
        for (p, e) in particle.probabilities().iter().zip(&expected) {
            assert!((p - e).abs() < 1e-12);
        }
        let wave = joint_distribution(&ExperimentSetting::pure(FRAC_PI_2, 0.0).unwrap());
        let expected = [0.0, 1.0, 0.0, 0.0];
        for (p, e) in wave.probabilities().iter().zip(&expected) {
            assert!((p - e).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_joint_reference_points() {
        let mixed = ComplexOperator::identity(4)
            .unwrap()
            .scale(Complex64::new(0.25, 0.0));
        let p = measure_joint(&mixed).unwrap().probabilities();
        for x in p {
            assert!((x - 0.25).abs() < 1e-15);
        }
        let pure01 = PureState::basis(4, 1).unwrap().density();
        let p = measure_joint(&pure01).unwrap().probabilities();
        assert_eq!(p, [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn measure_joint_rejects_invalid_density() {
        let not_a_state = ComplexOperator::identity(4).unwrap();
        assert!(measure_joint(&not_a_state).is_err());
    }

    #[test]
    fn circuit_matches_closed_form_on_random_settings() {
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        for _ in 0..100 {
            let setting =
                ExperimentSetting::pure(unit() * FRAC_PI_2, unit() * 2.0 * PI).unwrap();
            let measured = circuit_distribution(&setting).unwrap();
            let closed = joint_distribution(&setting);
            assert!(measured.max_abs_diff(&closed) < 1e-12);
        }
    }

    #[test]
    fn particle_statistics_do_not_depend_on_phase() {
        for i in 0..10 {
            for k in 0..12 {
                let alpha = FRAC_PI_2 * i as f64 / 10.0; // excludes pi/2
                let phi = 2.0 * PI * k as f64 / 12.0;
                let j = joint_distribution(&ExperimentSetting::pure(alpha, phi).unwrap());
                let cond = conditional_system_distribution(&j, 0).unwrap();
                assert!((cond[0] - 0.5).abs() < 1e-12);
                assert!((cond[1] - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wave_statistics_follow_the_fringe() {
        for k in 1..12 {
            let phi = 2.0 * PI * k as f64 / 12.0;
            let j = joint_distribution(&ExperimentSetting::pure(1.0, phi).unwrap());
            let cond = conditional_system_distribution(&j, 1).unwrap();
            assert!((cond[0] - (0.5 * phi).cos().powi(2)).abs() < 1e-12);
        }
        // Extrema of the fringe: bright at φ = 0, dark at φ = π.
        let bright = joint_distribution(&ExperimentSetting::pure(1.0, 0.0).unwrap());
        assert!((conditional_system_distribution(&bright, 1).unwrap()[0] - 1.0).abs() < 1e-12);
        let dark = joint_distribution(&ExperimentSetting::pure(1.0, PI).unwrap());
        assert!(conditional_system_distribution(&dark, 1).unwrap()[0].abs() < 1e-12);
    }

    #[test]
    fn conditioning_on_an_impossible_outcome_fails() {
        let j = JointDistribution::new([0.0, 1.0, 0.0, 0.0]).unwrap();
        let cond = conditional_system_distribution(&j, 1).unwrap();
        assert_eq!(cond, [1.0, 0.0]);
        assert!(matches!(
            conditional_system_distribution(&j, 0),
            Err(Error::DegenerateConditioning(_))
        ));
    }

    #[test]
    fn conditional_at_quarter_fringe_is_balanced() {
        let j = joint_distribution(&ExperimentSetting::pure(FRAC_PI_4, FRAC_PI_2).unwrap());
        let cond = conditional_system_distribution(&j, 1).unwrap();
        assert!((cond[0] - 0.5).abs() < 1e-12);
    }
}
