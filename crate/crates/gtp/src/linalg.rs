//! Dense complex state vectors and 2×2 operators for small qubit registers.
//!
//! One index convention is used everywhere: qubit 1 is the most significant
//! bit, so a basis index decomposes as b = Σ_{i=1..k} b_i · 2^(k−i) and
//! `tensor` keeps the left factor in the high bits.

use num_complex::Complex64;

use crate::error::{GtpError, Result};

/// Absolute tolerance for amplitude and probability comparisons.
pub const AMP_TOL: f64 = 1e-12;
/// Probability below which a projection outcome is treated as unreachable.
pub const NULL_CUTOFF: f64 = 1e-15;
/// Slack accepted on squared norms of states fed into the engines.
pub const NORM_TOL: f64 = 1e-9;

/// Pure state of `num_qubits` qubits stored as 2^k dense amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Builds a state from raw amplitudes. Amplitudes must be finite and the
    /// vector length must be 2^`num_qubits`; normalization is not imposed.
    pub fn from_amps(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if num_qubits == 0 || amps.len() != 1 << num_qubits {
            return Err(GtpError::BadAmplitudeCount {
                num_qubits,
                len: amps.len(),
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(GtpError::NonFiniteAmplitude);
        }
        Ok(Self { num_qubits, amps })
    }

    /// Computational basis state |index⟩ of a `num_qubits` register.
    pub fn computational(num_qubits: usize, index: usize) -> Self {
        assert!(num_qubits >= 1, "register needs at least one qubit");
        assert!(index < 1 << num_qubits, "basis index out of range");
        let mut amps = vec![Complex64::ZERO; 1 << num_qubits];
        amps[index] = Complex64::ONE;
        Self { num_qubits, amps }
    }

    /// Parses a bitstring such as "010" into the matching basis state, with
    /// the leftmost character on qubit 1.
    pub fn from_bitstring(bits: &str) -> Result<Self> {
        if bits.is_empty() || bits.chars().any(|c| c != '0' && c != '1') {
            return Err(GtpError::InvalidConfig(format!(
                "bad bitstring {bits:?}: expected characters 0/1"
            )));
        }
        let index = bits
            .chars()
            .fold(0usize, |acc, c| (acc << 1) | (c == '1') as usize);
        Ok(Self::computational(bits.len(), index))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sq() - 1.0).abs() <= tol
    }

    /// Returns the unit-norm copy of this state.
    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm_sq().sqrt();
        if norm <= NULL_CUTOFF {
            return Err(GtpError::ZeroNorm);
        }
        let amps = self.amps.iter().map(|a| a / norm).collect();
        Ok(Self {
            num_qubits: self.num_qubits,
            amps,
        })
    }

    /// Kronecker product; `self` takes the high-order bits.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let dim_other = other.dim();
        let mut amps = Vec::with_capacity(self.dim() * dim_other);
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector {
            num_qubits: self.num_qubits + other.num_qubits,
            amps,
        }
    }

    /// Inner product ⟨self|other⟩ (conjugate-linear in `self`).
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(GtpError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |⟨self|other⟩|², clamped into [0, 1].
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().clamp(0.0, 1.0))
    }

    /// Applies a single-qubit operator to qubit `qubit` (1-based).
    pub fn apply_local(&self, qubit: usize, op: &Operator2x2) -> Result<StateVector> {
        if qubit == 0 || qubit > self.num_qubits {
            return Err(GtpError::QubitOutOfRange {
                index: qubit,
                num_qubits: self.num_qubits,
            });
        }
        let shift = self.num_qubits - qubit;
        let bit = 1usize << shift;
        let mut amps = self.amps.clone();
        for b in 0..self.dim() {
            if b & bit == 0 {
                let a0 = self.amps[b];
                let a1 = self.amps[b | bit];
                amps[b] = op.entry(0, 0) * a0 + op.entry(0, 1) * a1;
                amps[b | bit] = op.entry(1, 0) * a0 + op.entry(1, 1) * a1;
            }
        }
        Ok(StateVector {
            num_qubits: self.num_qubits,
            amps,
        })
    }

    /// Projects qubits `pair` onto a two-qubit `basis` state and removes them.
    ///
    /// Returns the outcome probability (squared norm of the unnormalized
    /// residual) together with the normalized residual on the remaining
    /// qubits, or `None` when the probability falls below [`NULL_CUTOFF`].
    /// The first pair member supplies the high bit of the basis index.
    pub fn project_pair(
        &self,
        pair: (usize, usize),
        basis: &StateVector,
    ) -> Result<(f64, Option<StateVector>)> {
        if basis.num_qubits != 2 {
            return Err(GtpError::DimensionMismatch {
                left: basis.dim(),
                right: 4,
            });
        }
        let (q1, q2) = pair;
        for q in [q1, q2] {
            if q == 0 || q > self.num_qubits {
                return Err(GtpError::QubitOutOfRange {
                    index: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        if q1 == q2 {
            return Err(GtpError::QubitOutOfRange {
                index: q2,
                num_qubits: self.num_qubits,
            });
        }
        if self.num_qubits < 3 {
            return Err(GtpError::NoResidualQubits);
        }

        let s1 = self.num_qubits - q1;
        let s2 = self.num_qubits - q2;
        let (hi, lo) = if s1 > s2 { (s1, s2) } else { (s2, s1) };
        let mut residual = vec![Complex64::ZERO; 1 << (self.num_qubits - 2)];
        for (b, amp) in self.amps.iter().enumerate() {
            let b1 = (b >> s1) & 1;
            let b2 = (b >> s2) & 1;
            let pair_index = (b1 << 1) | b2;
            let low = b & ((1 << lo) - 1);
            let mid = (b >> (lo + 1)) & ((1 << (hi - lo - 1)) - 1);
            let top = b >> (hi + 1);
            let rest = (((top << (hi - lo - 1)) | mid) << lo) | low;
            residual[rest] += basis.amps[pair_index].conj() * amp;
        }

        let probability: f64 = residual.iter().map(|a| a.norm_sqr()).sum();
        if probability <= NULL_CUTOFF {
            return Ok((probability, None));
        }
        let scale = probability.sqrt();
        for a in &mut residual {
            *a /= scale;
        }
        Ok((
            probability,
            Some(StateVector {
                num_qubits: self.num_qubits - 2,
                amps: residual,
            }),
        ))
    }

    /// True when every amplitude matches `other` within `tol` (absolute).
    pub fn approx_eq(&self, other: &StateVector, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .amps
                .iter()
                .zip(&other.amps)
                .all(|(a, b)| (a - b).norm() <= tol)
    }
}

/// Dense single-qubit operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator2x2 {
    entries: [[Complex64; 2]; 2],
}

impl Operator2x2 {
    pub fn new(entries: [[Complex64; 2]; 2]) -> Self {
        Self { entries }
    }

    pub fn identity() -> Self {
        Self::diag(Complex64::ONE, Complex64::ONE)
    }

    pub fn sigma_x() -> Self {
        Self::new([
            [Complex64::ZERO, Complex64::ONE],
            [Complex64::ONE, Complex64::ZERO],
        ])
    }

    pub fn sigma_z() -> Self {
        Self::diag(Complex64::ONE, -Complex64::ONE)
    }

    /// Product σ_z·σ_x = [[0, 1], [−1, 0]].
    pub fn sigma_z_sigma_x() -> Self {
        Self::new([
            [Complex64::ZERO, Complex64::ONE],
            [-Complex64::ONE, Complex64::ZERO],
        ])
    }

    /// exp(iσ_z θ) = diag(e^{iθ}, e^{−iθ}).
    pub fn z_phase(theta: f64) -> Self {
        Self::diag(
            Complex64::from_polar(1.0, theta),
            Complex64::from_polar(1.0, -theta),
        )
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Self::new([[a, Complex64::ZERO], [Complex64::ZERO, d]])
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Operator2x2) -> Operator2x2 {
        let mut out = [[Complex64::ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = self.entries[r][0] * rhs.entries[0][c] + self.entries[r][1] * rhs.entries[1][c];
            }
        }
        Operator2x2::new(out)
    }

    pub fn adjoint(&self) -> Operator2x2 {
        Operator2x2::new([
            [self.entries[0][0].conj(), self.entries[1][0].conj()],
            [self.entries[0][1].conj(), self.entries[1][1].conj()],
        ])
    }

    /// Checks U†U = I entrywise within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let p = self.adjoint().mul(self);
        (p.entry(0, 0) - Complex64::ONE).norm() <= tol
            && (p.entry(1, 1) - Complex64::ONE).norm() <= tol
            && p.entry(0, 1).norm() <= tol
            && p.entry(1, 0).norm() <= tol
    }
}
