//! Dense complex linear algebra for 2- and 4-dimensional Hilbert spaces.
//!
//! The two-qubit space is ordered as system ⊗ ancilla: the system qubit S is
//! the slow (left) tensor index and the ancilla A the fast (right) one, so
//! the computational basis reads {|00⟩, |01⟩, |10⟩, |11⟩} = {|S A⟩}. Every
//! operator and state in this crate uses that convention.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Frobenius tolerance below which the Jacobi sweep stops.
const JACOBI_OFF_TOL: f64 = 1e-13;
/// Hard cap on Jacobi sweeps; 4x4 hermitian matrices converge in a handful.
const JACOBI_MAX_SWEEPS: usize = 200;

/// Tensor factor of the two-qubit space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    /// The interferometric (path) qubit, the slow index.
    System,
    /// The control qubit deciding whether the second beam splitter acts.
    Ancilla,
}

/// Gate constructors understood by [`make_gate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    /// 50/50 beam splitter, (1,1;1,-1)/√2.
    Hadamard,
    /// diag(1, e^{iφ}) on the system qubit; path |1⟩ acquires the phase.
    Phase(f64),
    /// Hadamard on S exactly when A = 1, in S ⊗ A order.
    ControlledHadamard,
    /// Identity of the given dimension (2 or 4).
    Identity(usize),
}

/// Dense complex matrix of dimension 2 or 4, row-major.
///
/// Carries gates, density matrices and projectors. Instances are immutable
/// after construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexOperator {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexOperator {
    /// Builds an operator from row-major entries.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::InvalidArgument(format!(
                "operator dimension must be 2 or 4, got {dim}"
            )));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "operator entries must be finite".into(),
            ));
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut entries = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::ONE;
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut entries = vec![Complex64::ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        Self { dim: n, entries }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::InvalidArgument(format!(
                "dimension mismatch in product: {} vs {}",
                self.dim, rhs.dim
            )));
        }
        let n = self.dim;
        let mut entries = vec![Complex64::ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = self.entries[i * n + k];
                if aik == Complex64::ZERO {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += aik * rhs.entries[k * n + j];
                }
            }
        }
        Ok(Self { dim: n, entries })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::InvalidArgument(format!(
                "dimension mismatch in sum: {} vs {}",
                self.dim, rhs.dim
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            dim: self.dim,
            entries,
        })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Max entrywise deviation from the conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = (self.entries[i * n + j] - self.entries[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Max entrywise deviation of U†U from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let product = self
            .adjoint()
            .matmul(self)
            .expect("adjoint preserves dimension");
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { Complex64::ONE } else { Complex64::ZERO };
                worst = worst.max((product.entries[i * n + j] - expect).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }
}

/// Normalized state vector of dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dim: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Builds a state; the amplitudes must already be normalized (Σ|c|² = 1
    /// within 1e-12).
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim != 2 && dim != 4 {
            return Err(Error::InvalidArgument(format!(
                "state dimension must be 2 or 4, got {dim}"
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "state is not normalized: Σ|c|² = {norm_sq}"
            )));
        }
        Ok(Self { dim, amplitudes })
    }

    /// Computational basis vector |index⟩.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![Complex64::ZERO; dim];
        amplitudes[index] = Complex64::ONE;
        Self::new(amplitudes)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim != other.dim {
            return Err(Error::InvalidArgument(format!(
                "dimension mismatch in inner product: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies a unitary: U|ψ⟩.
    pub fn apply(&self, u: &ComplexOperator) -> Result<Self> {
        if u.dim() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "dimension mismatch applying operator: {} vs {}",
                u.dim(),
                self.dim
            )));
        }
        let n = self.dim;
        let mut amplitudes = vec![Complex64::ZERO; n];
        for (i, amp) in amplitudes.iter_mut().enumerate() {
            for j in 0..n {
                *amp += u.get(i, j) * self.amplitudes[j];
            }
        }
        Self::new(amplitudes)
    }

    /// The projector |ψ⟩⟨ψ|.
    pub fn density(&self) -> ComplexOperator {
        let n = self.dim;
        let mut entries = vec![Complex64::ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        ComplexOperator { dim: n, entries }
    }

    /// |⟨self|other⟩|², insensitive to global phases on either side.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }
}

/// Builds one of the fixed gates of the interferometer circuit.
pub fn make_gate(gate: Gate) -> Result<ComplexOperator> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match gate {
        Gate::Hadamard => ComplexOperator::new(
            2,
            vec![
                Complex64::new(s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(-s, 0.0),
            ],
        ),
        Gate::Phase(phi) => {
            if !phi.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "phase angle must be finite, got {phi}"
                )));
            }
            ComplexOperator::new(
                2,
                vec![
                    Complex64::ONE,
                    Complex64::ZERO,
                    Complex64::ZERO,
                    Complex64::from_polar(1.0, phi),
                ],
            )
        }
        Gate::ControlledHadamard => {
            // Acts on S when A = 1: columns |01⟩ and |11⟩ mix, |x0⟩ pass through.
            let z = Complex64::ZERO;
            let one = Complex64::ONE;
            let h = Complex64::new(s, 0.0);
            ComplexOperator::new(
                4,
                vec![
                    one, z, z, z, //
                    z, h, z, h, //
                    z, z, one, z, //
                    z, h, z, -h,
                ],
            )
        }
        Gate::Identity(dim) => ComplexOperator::identity(dim),
    }
}

/// Kronecker product of two single-qubit operators, left factor slow.
///
/// With S on the left and A on the right this matches the basis listing
/// {00, 01, 10, 11} of the joint space.
pub fn tensor_product(left: &ComplexOperator, right: &ComplexOperator) -> Result<ComplexOperator> {
    if left.dim() != 2 || right.dim() != 2 {
        return Err(Error::InvalidArgument(format!(
            "tensor product expects two 2x2 operators, got {}x{} and {}x{}",
            left.dim(),
            left.dim(),
            right.dim(),
            right.dim()
        )));
    }
    let mut entries = vec![Complex64::ZERO; 16];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    entries[(2 * i + k) * 4 + (2 * j + l)] = left.get(i, j) * right.get(k, l);
                }
            }
        }
    }
    ComplexOperator::new(4, entries)
}

/// Conjugation UρU† of a density matrix by a unitary.
pub fn evolve_density(u: &ComplexOperator, rho: &ComplexOperator) -> Result<ComplexOperator> {
    if u.dim() != rho.dim() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: operator {} vs state {}",
            u.dim(),
            rho.dim()
        )));
    }
    if !u.is_unitary(1e-10) {
        return Err(Error::InvalidArgument(
            "evolution operator is not unitary".into(),
        ));
    }
    validate_density(rho, 1e-10)?;
    u.matmul(rho)?.matmul(&u.adjoint())
}

/// Checks hermiticity, unit trace and positive semidefiniteness within `tol`.
pub fn validate_density(rho: &ComplexOperator, tol: f64) -> Result<()> {
    if !rho.is_hermitian(tol) {
        return Err(Error::InvalidArgument(
            "density matrix is not hermitian".into(),
        ));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidArgument(format!(
            "density matrix trace is {tr}, expected 1"
        )));
    }
    let min = *eigenvalues_hermitian(rho)?
        .first()
        .expect("spectrum is non-empty");
    if min < -tol {
        return Err(Error::InvalidArgument(format!(
            "density matrix is not positive semidefinite: min eigenvalue {min}"
        )));
    }
    Ok(())
}

/// Transposes one tensor factor of a two-qubit operator.
pub fn partial_transpose(rho: &ComplexOperator, subsystem: Subsystem) -> Result<ComplexOperator> {
    if rho.dim() != 4 {
        return Err(Error::InvalidArgument(format!(
            "partial transpose expects a 4x4 operator, got {}x{}",
            rho.dim(),
            rho.dim()
        )));
    }
    if !rho.is_hermitian(1e-10) {
        return Err(Error::InvalidArgument(
            "partial transpose expects a hermitian operator".into(),
        ));
    }
    let mut entries = vec![Complex64::ZERO; 16];
    for s in 0..2 {
        for a in 0..2 {
            for sp in 0..2 {
                for ap in 0..2 {
                    // Row (s,a), column (s',a') of the output.
                    let src = match subsystem {
                        // Transpose on A swaps a with a'.
                        Subsystem::Ancilla => (2 * s + ap) * 4 + (2 * sp + a),
                        // Transpose on S swaps s with s'.
                        Subsystem::System => (2 * sp + a) * 4 + (2 * s + ap),
                    };
                    entries[(2 * s + a) * 4 + (2 * sp + ap)] = rho.entries[src];
                }
            }
        }
    }
    ComplexOperator::new(4, entries)
}

/// Eigenvalues of a hermitian operator, ascending.
pub fn eigenvalues_hermitian(m: &ComplexOperator) -> Result<Vec<f64>> {
    if !m.is_hermitian(1e-10) {
        return Err(Error::InvalidArgument(format!(
            "matrix is not hermitian: defect {}",
            m.hermiticity_defect()
        )));
    }
    Ok(jacobi_eigenvalues(m.entries.clone(), m.dim))
}

/// Cyclic Jacobi diagonalization by unitary plane rotations.
///
/// Each rotation diagonalizes one 2x2 principal block exactly, which strictly
/// shrinks the off-diagonal Frobenius norm; the sweep stops once that norm
/// drops below 1e-13. Works for any small n, not just 2 and 4; the CHSH
/// correlation analysis feeds it a real symmetric 3x3.
pub(crate) fn jacobi_eigenvalues(mut a: Vec<Complex64>, n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i * n + j].norm_sqr();
            }
        }
        if off.sqrt() < JACOBI_OFF_TOL {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // Entries at rounding level cannot be zeroed meaningfully and
                // their eigenvector formulas are pure cancellation noise.
                let scale = 1.0 + app.abs() + aqq.abs();
                if apq.norm_sqr() <= (1e-18 * scale) * (1e-18 * scale) {
                    continue;
                }
                let mid = 0.5 * (app + aqq);
                let half_gap = 0.5 * (app - aqq);
                let radius = (half_gap * half_gap + apq.norm_sqr()).sqrt();
                let lambda_hi = mid + radius;
                let lambda_lo = mid - radius;
                // Unit eigenvector of the block for lambda_hi, written so the
                // real component is radius + |half_gap| rather than their
                // difference; both forms solve (H - lambda_hi)v = 0.
                let (v0, v1) = if app >= aqq {
                    (Complex64::new(lambda_hi - aqq, 0.0), apq.conj())
                } else {
                    (apq, Complex64::new(lambda_hi - app, 0.0))
                };
                let norm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
                let (g00, g10) = (v0 / norm, v1 / norm);
                // Orthonormal partner column.
                let (g01, g11) = (-g10.conj(), g00.conj());
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_p = akp * g00 + akq * g10;
                    let new_q = akp * g01 + akq * g11;
                    a[k * n + p] = new_p;
                    a[k * n + q] = new_q;
                    a[p * n + k] = new_p.conj();
                    a[q * n + k] = new_q.conj();
                }
                a[p * n + p] = Complex64::new(lambda_hi, 0.0);
                a[q * n + q] = Complex64::new(lambda_lo, 0.0);
                a[p * n + q] = Complex64::ZERO;
                a[q * n + p] = Complex64::ZERO;
            }
        }
    }
    let mut eigenvalues: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    eigenvalues.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    eigenvalues
}
