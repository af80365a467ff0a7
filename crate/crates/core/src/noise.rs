//! White-noise mixing and the entanglement side of the analysis.
//!
//! The noisy input is the mixture ρ = η·𝟙 + ε·σ of the maximally mixed state
//! with the pure preparation σ, η = (1 − ε)/4. Because the interferometer is
//! unitary, the identity part stays flat and the measured statistics are
//! η + ε·P(S,A). Separability is decided by the positivity of the partial
//! transpose (necessary and sufficient for two qubits), and the maximal CHSH
//! value comes from the correlation-matrix criterion.

use num_complex::Complex64;

use crate::circuit::{
    initial_state, interferometer_unitary, joint_distribution, ExperimentSetting,
    JointDistribution,
};
use crate::error::{Error, Result};
use crate::linalg::{
    evolve_density, jacobi_eigenvalues, partial_transpose, tensor_product, ComplexOperator,
    Subsystem,
};

/// Bisection tolerance on ε for the separability boundary.
const BISECTION_TOL: f64 = 1e-9;
const BISECTION_MAX_ITERS: usize = 60;

/// The white-noise mixture η·𝟙 + ε·σ with σ the pure preparation density.
#[derive(Debug, Clone)]
pub struct WernerState {
    epsilon: f64,
    eta: f64,
    sigma: ComplexOperator,
    rho: ComplexOperator,
}

impl WernerState {
    /// Weight of the pure component.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Weight of each maximally mixed eigenvalue, (1 − ε)/4.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// The rank-1 pure part |ψ⟩⟨ψ|.
    pub fn sigma(&self) -> &ComplexOperator {
        &self.sigma
    }

    /// The full mixture.
    pub fn rho(&self) -> &ComplexOperator {
        &self.rho
    }
}

/// Builds the noisy input state for the given preparation angle.
pub fn werner_state(alpha: f64, epsilon: f64) -> Result<WernerState> {
    if !epsilon.is_finite() || !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in [0, 1], got {epsilon}"
        )));
    }
    let sigma = initial_state(alpha)?.density();
    let eta = (1.0 - epsilon) / 4.0;
    let rho = ComplexOperator::identity(4)?
        .scale(Complex64::new(eta, 0.0))
        .add(&sigma.scale(Complex64::new(epsilon, 0.0)))?;
    Ok(WernerState {
        epsilon,
        eta,
        sigma,
        rho,
    })
}

/// Noisy joint statistics η + ε·P(S,A), with P the pure closed form.
pub fn noisy_joint_distribution(setting: &ExperimentSetting) -> JointDistribution {
    let eta = (1.0 - setting.epsilon()) / 4.0;
    let pure = joint_distribution(setting).probabilities();
    let p: Vec<f64> = pure.iter().map(|x| eta + setting.epsilon() * x).collect();
    JointDistribution::new([p[0], p[1], p[2], p[3]])
        .expect("affine mix of a distribution with the flat one is a distribution")
}

/// Runs the noisy state through the interferometer and measures, the
/// density-matrix route to the same statistics.
pub fn evolved_noisy_distribution(setting: &ExperimentSetting) -> Result<JointDistribution> {
    let rho = evolved_state(setting)?;
    crate::circuit::measure_joint(&rho)
}

/// U_I ρ U_I† for the Werner input at this setting.
pub fn evolved_state(setting: &ExperimentSetting) -> Result<ComplexOperator> {
    let werner = werner_state(setting.alpha(), setting.epsilon())?;
    let u = interferometer_unitary(setting.phi())?;
    evolve_density(&u, werner.rho())
}

/// Minimum eigenvalue of the partial transpose (over the ancilla) of the
/// evolved noisy state. Non-negative iff the state is separable.
pub fn ppt_min_eigenvalue(setting: &ExperimentSetting) -> f64 {
    let rho = evolved_state(setting).expect("valid settings produce valid densities");
    let pt = partial_transpose(&rho, Subsystem::Ancilla)
        .expect("evolved density matrices are hermitian");
    crate::linalg::eigenvalues_hermitian(&pt).expect("partial transpose stays hermitian")[0]
}

/// Outcome of the separability boundary search at fixed (α, φ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeparabilityThreshold {
    /// The state is entangled for every ε above this value.
    EntangledAbove(f64),
    /// PPT holds on all of ε ∈ [0, 1]; the family never entangles.
    NeverEntangled,
}

impl SeparabilityThreshold {
    /// The boundary value, reported as 1.0 for a never-entangled family.
    pub fn value(&self) -> f64 {
        match self {
            Self::EntangledAbove(eps) => *eps,
            Self::NeverEntangled => 1.0,
        }
    }

    pub fn never_entangled(&self) -> bool {
        matches!(self, Self::NeverEntangled)
    }
}

/// Smallest ε at which the partial-transpose spectrum crosses zero, by
/// bisection on [0, 1] to 1e-9.
///
/// The minimum eigenvalue is strictly decreasing in ε (the flat part
/// contributes η = (1 − ε)/4 while the pure part pulls one eigenvalue down),
/// so a sign check at ε = 1 settles whether a crossing exists at all.
pub fn separability_threshold(alpha: f64, phi: f64) -> Result<SeparabilityThreshold> {
    let probe = |eps: f64| -> Result<f64> {
        Ok(ppt_min_eigenvalue(&ExperimentSetting::new(
            alpha, phi, eps,
        )?))
    };
    // Product-state families sit exactly on zero at ε = 1 up to rounding.
    if probe(1.0)? >= -1e-12 {
        return Ok(SeparabilityThreshold::NeverEntangled);
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..BISECTION_MAX_ITERS {
        if hi - lo < BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if probe(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SeparabilityThreshold::EntangledAbove(0.5 * (lo + hi)))
}

fn pauli_matrices() -> [ComplexOperator; 3] {
    let z = Complex64::ZERO;
    let one = Complex64::ONE;
    let i = Complex64::I;
    [
        ComplexOperator::new(2, vec![z, one, one, z]).expect("2x2"),
        ComplexOperator::new(2, vec![z, -i, i, z]).expect("2x2"),
        ComplexOperator::new(2, vec![one, z, z, -one]).expect("2x2"),
    ]
}

/// 3x3 spin correlation matrix Tᵢⱼ = Tr(ρ σᵢ ⊗ σⱼ) of the evolved state.
pub fn correlation_matrix(setting: &ExperimentSetting) -> [[f64; 3]; 3] {
    let rho = evolved_state(setting).expect("valid settings produce valid densities");
    let paulis = pauli_matrices();
    let mut t = [[0.0; 3]; 3];
    for (i, si) in paulis.iter().enumerate() {
        for (j, sj) in paulis.iter().enumerate() {
            let obs = tensor_product(si, sj).expect("pauli factors are 2x2");
            t[i][j] = rho.matmul(&obs).expect("dimensions match").trace().re;
        }
    }
    t
}

/// Maximal CHSH expectation 2√(m₁ + m₂), with m₁ ≥ m₂ the two largest
/// eigenvalues of TᵀT. Values above 2 certify a Bell violation; 2√2 is the
/// quantum ceiling.
pub fn chsh_max(setting: &ExperimentSetting) -> f64 {
    let t = correlation_matrix(setting);
    let mut gram = vec![Complex64::ZERO; 9];
    for i in 0..3 {
        for j in 0..3 {
            let mut sum = 0.0;
            for row in &t {
                sum += row[i] * row[j];
            }
            gram[i * 3 + j] = Complex64::new(sum, 0.0);
        }
    }
    let eigenvalues = jacobi_eigenvalues(gram, 3);
    // TᵀT is positive semidefinite; guard the sqrt against -1e-17 noise.
    2.0 * (eigenvalues[1].max(0.0) + eigenvalues[2].max(0.0)).sqrt()
}

/// ε at which PPT crosses zero in closed form, 1/(1 + 4·s₁s₂) with s₁s₂ the
/// product of the Schmidt coefficients of the final pure state.
///
/// Test oracle for the bisection route; s₁s₂ = cos α sin α √(1 − cos²φ/2)
/// comes from ⟨p|w⟩ = cos φ/√2.
pub fn separability_threshold_closed_form(alpha: f64, phi: f64) -> Option<f64> {
    let schmidt_product =
        alpha.cos() * alpha.sin() * (1.0 - 0.5 * phi.cos().powi(2)).max(0.0).sqrt();
    if schmidt_product <= 0.0 {
        None
    } else {
        Some(1.0 / (1.0 + 4.0 * schmidt_product))
    }
}
