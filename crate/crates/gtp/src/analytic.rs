//! Closed-form input-averaged quantities and the transfer-operator route
//! that reproduces them exactly.
//!
//! Averages are over Haar-random pure input states. For any linear map M
//! taking the input straight to Bob's unnormalized output, the two moments
//! needed here are
//!
//! ```text
//! ⟨P⟩   = Tr(M†M)/d
//! ⟨P·F⟩ = (|Tr M|² + Tr(M†M)) / (d(d+1))      d = 2^N
//! ```
//!
//! so every averaged formula in this module can be cross-checked against a
//! finite matrix computation that never touches the sampling engine.

use num_complex::Complex64;

use crate::error::{GtpError, Result};
use crate::linalg::{Operator2x2, StateVector, NULL_CUTOFF};
use crate::multi::MultiParams;
use crate::outcome::{AcceptanceSet, JointOutcome, OutcomeKind};
use crate::single::{concurrence, correction_operator, ProtocolReport};

/// Haar moments of basis amplitudes in dimension 2^N: ⟨|α_i|²⟩ = 1/2^N and
/// ⟨|α_i α_j|²⟩ = 2^(δ_ij − N)/(1 + 2^N).
#[derive(Debug, Clone, Copy)]
pub struct MomentTable {
    num_qubits: usize,
}

impl MomentTable {
    pub fn new(num_qubits: usize) -> Self {
        assert!(num_qubits >= 1, "at least one qubit");
        Self { num_qubits }
    }

    pub fn dimension(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn second_moment(&self) -> f64 {
        1.0 / self.dimension() as f64
    }

    pub fn fourth_moment(&self, i: usize, j: usize) -> f64 {
        let d = self.dimension();
        assert!(i < d && j < d, "amplitude index out of range");
        let numerator = if i == j { 2.0 } else { 1.0 };
        numerator / (d as f64 * (1.0 + d as f64))
    }
}

fn factor(n: Complex64, m: Complex64) -> f64 {
    (1.0 + n.norm_sqr()) * (1.0 + m.norm_sqr())
}

/// Haar-averaged probability of a single-channel outcome:
/// (1 + |nm|²)/(2(1+|n|²)(1+|m|²)) for Φ⁺/Ψ⁻ and
/// (|n|² + |m|²)/(2(1+|n|²)(1+|m|²)) for Φ⁻/Ψ⁺.
pub fn avg_probability(n: Complex64, m: Complex64, kind: OutcomeKind) -> f64 {
    let numerator = match kind {
        OutcomeKind::PhiPlus | OutcomeKind::PsiMinus => 1.0 + (n * m).norm_sqr(),
        OutcomeKind::PhiMinus | OutcomeKind::PsiPlus => n.norm_sqr() + m.norm_sqr(),
    };
    numerator / (2.0 * factor(n, m))
}

/// Haar-averaged probability·fidelity product of one outcome, given its
/// residual phase mismatch ξ:
/// (1 + |nm|² + |nm|cos ξ)/(3(1+|n|²)(1+|m|²)) for Φ⁺/Ψ⁻ and
/// (|n|² + |m|² + |nm|cos ξ)/(3(1+|n|²)(1+|m|²)) for Φ⁻/Ψ⁺.
pub fn avg_pf(n: Complex64, m: Complex64, mismatch: f64, kind: OutcomeKind) -> f64 {
    let base = match kind {
        OutcomeKind::PhiPlus | OutcomeKind::PsiMinus => 1.0 + (n * m).norm_sqr(),
        OutcomeKind::PhiMinus | OutcomeKind::PsiPlus => n.norm_sqr() + m.norm_sqr(),
    };
    (base + (n.norm() * m.norm()) * mismatch.cos()) / (3.0 * factor(n, m))
}

/// All-accept efficiency of a single channel,
/// c_pro = (2/3)(1 + |nm| Σ_j cos ξ_j / (2(1+|n|²)(1+|m|²))),
/// with the four mismatches in [`OutcomeKind`] order.
pub fn c_pro_all_accept(n: Complex64, m: Complex64, mismatches: &[f64; 4]) -> f64 {
    let cos_sum: f64 = mismatches.iter().map(|x| x.cos()).sum();
    (2.0 / 3.0) * (1.0 + n.norm() * m.norm() * cos_sum / (2.0 * factor(n, m)))
}

/// All-accept efficiency at cancelled mismatches, written through the two
/// concurrences: c_pro = (2/3)(1 + c(n)·c(m)/2).
pub fn c_pro_from_concurrences(n: Complex64, m: Complex64) -> f64 {
    (2.0 / 3.0) * (1.0 + concurrence(n) * concurrence(m) / 2.0)
}

/// Efficiency (equals average fidelity) of the standard protocol run over a
/// partially entangled channel with real n: (2/3)(1 + n/(1+n²)).
pub fn c_std(n: f64) -> f64 {
    (2.0 / 3.0) * (1.0 + n / (1.0 + n * n))
}

/// Success probability of matched-basis post-selection (m = n, accept
/// {Φ⁻, Ψ⁺}), where fidelity is exactly 1: p = 2n²/(1+n²)².
pub fn c_pqt(n: f64) -> f64 {
    let d = 1.0 + n * n;
    2.0 * n * n / (d * d)
}

/// Post-selection attributes for a possibly mismatched real basis m ≠ n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PqtAttributes {
    pub p_suc: f64,
    pub c_pqt: f64,
    /// Conditional fidelity c_pqt / p_suc; `None` when p_suc vanishes.
    pub f_pqt: Option<f64>,
}

/// Accept-{Φ⁻, Ψ⁺} attributes for real n, m with cancelled mismatches,
/// assembled from the per-outcome averages.
pub fn pqt_attributes(n: f64, m: f64) -> PqtAttributes {
    let (nc, mc) = (Complex64::new(n, 0.0), Complex64::new(m, 0.0));
    let kinds = [OutcomeKind::PhiMinus, OutcomeKind::PsiPlus];
    let p_suc: f64 = kinds.iter().map(|&k| avg_probability(nc, mc, k)).sum();
    let c_pqt: f64 = kinds.iter().map(|&k| avg_pf(nc, mc, 0.0, k)).sum();
    let f_pqt = (p_suc > DEGENERATE_CUTOFF).then(|| c_pqt / p_suc);
    PqtAttributes {
        p_suc,
        c_pqt,
        f_pqt,
    }
}

const DEGENERATE_CUTOFF: f64 = 1e-12;

/// Elementary symmetric polynomial e_degree(values); e_0 = 1.
pub fn elementary_symmetric(degree: usize, values: &[f64]) -> Result<f64> {
    if degree > values.len() {
        return Err(GtpError::DegreeOutOfRange {
            degree,
            len: values.len(),
        });
    }
    let mut acc = vec![0.0; degree + 1];
    acc[0] = 1.0;
    for &value in values {
        for i in (1..=degree).rev() {
            acc[i] += value * acc[i - 1];
        }
    }
    Ok(acc[degree])
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(GtpError::UnsupportedChannelCount(0));
    }
    for &w in weights {
        if !(0.0..=0.5 + 1e-12).contains(&w) {
            return Err(GtpError::WeightOutOfRange { value: w });
        }
    }
    Ok(())
}

/// All-accept efficiency of N channels with cancelled mismatches, as the
/// weighted sum of elementary symmetric polynomials:
///
/// ```text
/// c_pro = 2/(2^N + 1) · (1 + Σ_{i=1..N} 2^(i−1) e_i(w))
/// ```
///
/// where w_k = c(n_k)·c(m_k)/2 is the per-channel weight in [0, 1/2].
pub fn c_pro_multi(weights: &[f64]) -> Result<f64> {
    check_weights(weights)?;
    let n = weights.len();
    let mut sum = 0.0;
    for degree in 1..=n {
        sum += 2f64.powi(degree as i32 - 1) * elementary_symmetric(degree, weights)?;
    }
    Ok(2.0 / (2f64.powi(n as i32) + 1.0) * (1.0 + sum))
}

/// Same quantity in fully factored form, c_pro = (1 + Π_k(1+2w_k))/(2^N+1).
pub fn c_pro_multi_product_form(weights: &[f64]) -> Result<f64> {
    check_weights(weights)?;
    let product: f64 = weights.iter().map(|w| 1.0 + 2.0 * w).product();
    Ok((1.0 + product) / (2f64.powi(weights.len() as i32) + 1.0))
}

/// Success probability of matched-basis post-selection over N channels,
/// Π_k 2n_k²/(1+n_k²)²; the joint conditional fidelity is exactly 1.
pub fn c_pqt_multi(n_list: &[f64]) -> f64 {
    n_list.iter().map(|&n| c_pqt(n)).product()
}

/// Small dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    fn scalar_one() -> Self {
        Self {
            dim: 1,
            data: vec![Complex64::ONE],
        }
    }

    fn from_operator(op: &Operator2x2) -> Self {
        Self {
            dim: 2,
            data: vec![op.entry(0, 0), op.entry(0, 1), op.entry(1, 0), op.entry(1, 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn kron(&self, rhs: &CMatrix) -> CMatrix {
        let dim = self.dim * rhs.dim;
        let mut data = vec![Complex64::ZERO; dim * dim];
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let factor = self.entry(r1, c1);
                for r2 in 0..rhs.dim {
                    for c2 in 0..rhs.dim {
                        data[(r1 * rhs.dim + r2) * dim + (c1 * rhs.dim + c2)] =
                            factor * rhs.entry(r2, c2);
                    }
                }
            }
        }
        CMatrix { dim, data }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    /// Tr(M†M) = Σ |entries|².
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(amps.len(), self.dim, "vector length must match dimension");
        (0..self.dim)
            .map(|r| {
                (0..self.dim)
                    .map(|c| self.entry(r, c) * amps[c])
                    .sum::<Complex64>()
            })
            .collect()
    }
}

/// The linear map from input to Bob's (unnormalized, corrected) output for
/// one joint outcome: the Kronecker product over channels of
/// exp(iσ_z θ)·O_j·M_j, where M_j is the per-channel measurement block.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    outcome: JointOutcome,
    matrix: CMatrix,
}

fn outcome_block(kind: OutcomeKind, n: Complex64, m: Complex64) -> Operator2x2 {
    let scale = Complex64::new(1.0 / factor(n, m).sqrt(), 0.0);
    let zero = Complex64::ZERO;
    let entries = match kind {
        OutcomeKind::PhiPlus => [[Complex64::ONE, zero], [zero, n * m.conj()]],
        OutcomeKind::PhiMinus => [[m, zero], [zero, -n]],
        OutcomeKind::PsiPlus => [[zero, m.conj()], [n, zero]],
        OutcomeKind::PsiMinus => [[zero, -Complex64::ONE], [m * n, zero]],
    };
    Operator2x2::new(entries.map(|row| row.map(|e| e * scale)))
}

/// Builds the transfer operator of `outcome` under `params`.
pub fn transfer_operator(outcome: &JointOutcome, params: &MultiParams) -> Result<TransferOperator> {
    if outcome.num_channels() != params.num_channels() {
        return Err(GtpError::ChannelCountMismatch {
            left: outcome.num_channels(),
            right: params.num_channels(),
        });
    }
    let mut matrix = CMatrix::scalar_one();
    for (k, &kind) in outcome.kinds().iter().enumerate() {
        let block = outcome_block(kind, params.n(k).value(), params.m(k).value());
        let corrected = correction_operator(kind, params.phases(k).theta(kind)).mul(&block);
        matrix = matrix.kron(&CMatrix::from_operator(&corrected));
    }
    Ok(TransferOperator {
        outcome: outcome.clone(),
        matrix,
    })
}

/// All 4^N transfer operators in canonical outcome order.
pub fn all_transfer_operators(params: &MultiParams) -> Vec<TransferOperator> {
    let n = params.num_channels();
    (0..1usize << (2 * n))
        .map(|index| {
            let outcome = JointOutcome::from_index(n, index).expect("index in range");
            transfer_operator(&outcome, params).expect("widths match")
        })
        .collect()
}

impl TransferOperator {
    pub fn outcome(&self) -> &JointOutcome {
        &self.outcome
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Exact Haar-averaged outcome probability Tr(M†M)/d.
    pub fn haar_avg_prob(&self) -> f64 {
        self.matrix.frobenius_norm_sq() / self.dim() as f64
    }

    /// Exact Haar-averaged ⟨P·F⟩ = (|Tr M|² + Tr(M†M))/(d(d+1)).
    pub fn haar_avg_pf(&self) -> f64 {
        let d = self.dim() as f64;
        (self.matrix.trace().norm_sqr() + self.matrix.frobenius_norm_sq()) / (d * (d + 1.0))
    }

    /// Applies the map to a state, returning the unnormalized image.
    pub fn apply(&self, input: &StateVector) -> Result<StateVector> {
        if input.dim() != self.dim() {
            return Err(GtpError::DimensionMismatch {
                left: input.dim(),
                right: self.dim(),
            });
        }
        StateVector::from_amps(input.num_qubits(), self.matrix.apply(input.amps()))
    }
}

/// Exact all-accept efficiency Σ_outcomes ⟨P·F⟩ under `params`, from the
/// transfer operators alone.
pub fn haar_all_accept_efficiency(params: &MultiParams) -> f64 {
    all_transfer_operators(params)
        .iter()
        .map(TransferOperator::haar_avg_pf)
        .sum()
}

/// Exact Haar-averaged post-selection report: p_suc = Σ⟨P⟩ and
/// c_pro = Σ⟨P·F⟩ over the accepted set, per-outcome fidelity as the ratio.
pub fn haar_report(params: &MultiParams, acceptance: &AcceptanceSet) -> Result<ProtocolReport> {
    if acceptance.num_channels() != params.num_channels() {
        return Err(GtpError::ChannelCountMismatch {
            left: acceptance.num_channels(),
            right: params.num_channels(),
        });
    }
    if acceptance.is_empty() {
        return Err(GtpError::EmptyAcceptance);
    }
    let mut p_suc = 0.0;
    let mut c_pro = 0.0;
    let mut per_outcome = Vec::new();
    for op in all_transfer_operators(params) {
        let p = op.haar_avg_prob();
        let pf = op.haar_avg_pf();
        let accepted = acceptance.contains(op.outcome());
        if accepted {
            p_suc += p;
            c_pro += pf;
        }
        per_outcome.push(crate::single::OutcomeSummary {
            outcome: op.outcome().clone(),
            probability: p,
            fidelity: (p > NULL_CUTOFF).then(|| pf / p),
            accepted,
        });
    }
    let degenerate = p_suc <= DEGENERATE_CUTOFF;
    Ok(ProtocolReport {
        p_suc,
        c_pro,
        f_pro: (!degenerate).then(|| c_pro / p_suc),
        degenerate,
        per_outcome,
    })
}
