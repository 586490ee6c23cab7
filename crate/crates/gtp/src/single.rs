//! Teleportation of one qubit over a partially entangled channel.
//!
//! The channel is |Φ_n⁺⟩ = (|00⟩ + n|11⟩)/√(1+|n|²) with complex n, |n| ≤ 1.
//! Alice measures her two qubits in a generalized Bell basis parameterized by
//! a second complex number m, and Bob applies exp(iσ_z θ_j)·O_j where O_j is
//! the usual Pauli correction for outcome j. With n = m = 1 and θ_j = 0 this
//! reduces to the standard protocol; elsewhere the outcome fidelities depend
//! on how well the basis matches the channel.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{GtpError, Result};
use crate::linalg::{Operator2x2, StateVector, NORM_TOL, NULL_CUTOFF};
use crate::outcome::{AcceptanceSet, JointOutcome, OutcomeKind};

/// Slack on the |·| ≤ 1 bound so grid endpoints landing at 1 + O(ε) pass.
const MAGNITUDE_SLACK: f64 = 1e-9;
/// Success probability below which the conditional fidelity is undefined.
pub const DEGENERATE_P_SUC: f64 = 1e-12;

fn validated(value: Complex64) -> Result<Complex64> {
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(GtpError::NonFiniteAmplitude);
    }
    let magnitude = value.norm();
    if magnitude > 1.0 + MAGNITUDE_SLACK {
        return Err(GtpError::ParamOutOfRange { magnitude });
    }
    Ok(value)
}

/// Entanglement parameter n of the shared channel, 0 ≤ |n| ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParam(Complex64);

impl ChannelParam {
    pub fn new(value: Complex64) -> Result<Self> {
        validated(value).map(Self)
    }

    pub fn real(value: f64) -> Result<Self> {
        Self::new(Complex64::new(value, 0.0))
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(magnitude, phase))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn magnitude(&self) -> f64 {
        self.0.norm()
    }

    pub fn phase(&self) -> f64 {
        if self.0 == Complex64::ZERO {
            0.0
        } else {
            self.0.arg()
        }
    }
}

/// Entanglement parameter m of Alice's measurement basis, 0 ≤ |m| ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisParam(Complex64);

impl BasisParam {
    pub fn new(value: Complex64) -> Result<Self> {
        validated(value).map(Self)
    }

    pub fn real(value: f64) -> Result<Self> {
        Self::new(Complex64::new(value, 0.0))
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(magnitude, phase))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn magnitude(&self) -> f64 {
        self.0.norm()
    }

    pub fn phase(&self) -> f64 {
        if self.0 == Complex64::ZERO {
            0.0
        } else {
            self.0.arg()
        }
    }
}

/// Bob's four correction phases θ_j, indexed by [`OutcomeKind`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectionPhases {
    thetas: [f64; 4],
}

impl CorrectionPhases {
    pub fn new(thetas: [f64; 4]) -> Self {
        // Adding +0.0 maps IEEE −0.0 onto +0.0 so reports never print "-0.0".
        Self {
            thetas: thetas.map(|theta| theta + 0.0),
        }
    }

    pub fn zero() -> Self {
        Self::new([0.0; 4])
    }

    /// Phases cancelling every mismatch angle: θ_{Φ±} = (θ_n − θ_m)/2 and
    /// θ_{Ψ±} = −(θ_n + θ_m)/2, so all four outcomes reach their maximal
    /// averaged fidelity simultaneously.
    pub fn optimal(n: &ChannelParam, m: &BasisParam) -> Self {
        let phi = (n.phase() - m.phase()) / 2.0;
        let psi = -(n.phase() + m.phase()) / 2.0;
        Self::new([phi, phi, psi, psi])
    }

    /// Recovery phases for a dephased maximally entangled channel, n = e^{iθ_n}
    /// measured in the standard basis (m = 1): θ_{Φ±} = θ_n/2, θ_{Ψ±} = −θ_n/2.
    pub fn dephasing(theta_n: f64) -> Self {
        Self::new([theta_n / 2.0, theta_n / 2.0, -theta_n / 2.0, -theta_n / 2.0])
    }

    pub fn theta(&self, kind: OutcomeKind) -> f64 {
        self.thetas[kind.index()]
    }

    pub fn thetas(&self) -> [f64; 4] {
        self.thetas
    }
}

/// Concurrence of (|00⟩ + n|11⟩)/√(1+|n|²): c(n) = 2|n|/(1 + |n|²).
pub fn concurrence(n: Complex64) -> f64 {
    let mag_sq = n.norm_sqr();
    2.0 * n.norm() / (1.0 + mag_sq)
}

/// The shared two-qubit channel state (|00⟩ + n|11⟩)/√(1+|n|²).
pub fn channel_state(n: &ChannelParam) -> StateVector {
    let norm = 1.0 / (1.0 + n.value().norm_sqr()).sqrt();
    StateVector::from_amps(
        2,
        vec![
            Complex64::new(norm, 0.0),
            Complex64::ZERO,
            Complex64::ZERO,
            n.value() * norm,
        ],
    )
    .expect("fixed shape")
}

/// Alice's generalized Bell basis, indexed by [`OutcomeKind`]:
///
/// ```text
/// Φ_m⁺ = (|00⟩ + m|11⟩)/√(1+|m|²)     Ψ_m⁺ = (|01⟩ + m|10⟩)/√(1+|m|²)
/// Φ_m⁻ = (m*|00⟩ − |11⟩)/√(1+|m|²)    Ψ_m⁻ = (m*|01⟩ − |10⟩)/√(1+|m|²)
/// ```
///
/// The set is orthonormal for every |m| ≤ 1 and reduces to the Bell basis at
/// m = 1.
pub fn bell_basis(m: &BasisParam) -> [StateVector; 4] {
    let norm = 1.0 / (1.0 + m.value().norm_sqr()).sqrt();
    let scaled = m.value() * norm;
    let scaled_conj = m.value().conj() * norm;
    let unit = Complex64::new(norm, 0.0);
    let zero = Complex64::ZERO;
    let make = |amps: [Complex64; 4]| StateVector::from_amps(2, amps.to_vec()).expect("fixed shape");
    [
        make([unit, zero, zero, scaled]),
        make([scaled_conj, zero, zero, -unit]),
        make([zero, unit, scaled, zero]),
        make([zero, scaled_conj, -unit, zero]),
    ]
}

/// Bob's correction exp(iσ_z θ)·O for one outcome, with O drawn from
/// {I, σ_z, σ_x, σ_zσ_x} in the order {Φ⁺, Φ⁻, Ψ⁺, Ψ⁻}.
pub fn correction_operator(kind: OutcomeKind, theta: f64) -> Operator2x2 {
    let pauli = match kind {
        OutcomeKind::PhiPlus => Operator2x2::identity(),
        OutcomeKind::PhiMinus => Operator2x2::sigma_z(),
        OutcomeKind::PsiPlus => Operator2x2::sigma_x(),
        OutcomeKind::PsiMinus => Operator2x2::sigma_z_sigma_x(),
    };
    Operator2x2::z_phase(theta).mul(&pauli)
}

/// Residual phase mismatch ξ_j entering the averaged fidelity of outcome j:
/// ξ_{Φ±} = θ_n − θ_m − 2θ_{Φ±} and ξ_{Ψ±} = θ_n + θ_m + 2θ_{Ψ±}.
pub fn phase_mismatch(kind: OutcomeKind, theta_n: f64, theta_m: f64, theta: f64) -> f64 {
    match kind {
        OutcomeKind::PhiPlus | OutcomeKind::PhiMinus => theta_n - theta_m - 2.0 * theta,
        OutcomeKind::PsiPlus | OutcomeKind::PsiMinus => theta_n + theta_m + 2.0 * theta,
    }
}

/// Everything recorded for one measurement branch of a run.
#[derive(Debug, Clone)]
pub struct OutcomeRecord {
    pub outcome: OutcomeKind,
    pub probability: f64,
    /// Bob's corrected state; `None` when the branch is unreachable.
    pub bob_state: Option<StateVector>,
    /// Teleportation fidelity against the input; `None` when unreachable.
    pub fidelity: Option<f64>,
}

/// Runs the full protocol for one input state and returns all four branches
/// in [`OutcomeKind`] order. Unreachable branches carry probability 0 and no
/// state. The four probabilities sum to 1.
pub fn run_single(
    input: &StateVector,
    n: &ChannelParam,
    m: &BasisParam,
    phases: &CorrectionPhases,
) -> Result<[OutcomeRecord; 4]> {
    if input.num_qubits() != 1 {
        return Err(GtpError::DimensionMismatch {
            left: input.dim(),
            right: 2,
        });
    }
    if !input.is_normalized(NORM_TOL) {
        return Err(GtpError::NotNormalized {
            norm_sq: input.norm_sq(),
        });
    }

    // Register layout: qubit 1 = input, qubit 2 = Alice's half, qubit 3 = Bob's.
    let total = input.tensor(&channel_state(n));
    let basis = bell_basis(m);

    let mut records = Vec::with_capacity(4);
    for kind in OutcomeKind::ALL {
        let (probability, residual) = total.project_pair((1, 2), &basis[kind.index()])?;
        let record = match residual {
            Some(state) => {
                let corrected =
                    state.apply_local(1, &correction_operator(kind, phases.theta(kind)))?;
                let fidelity = input.fidelity(&corrected)?;
                OutcomeRecord {
                    outcome: kind,
                    probability,
                    bob_state: Some(corrected),
                    fidelity: Some(fidelity),
                }
            }
            None => OutcomeRecord {
                outcome: kind,
                probability: 0.0,
                bob_state: None,
                fidelity: None,
            },
        };
        records.push(record);
    }
    Ok(records.try_into().expect("four outcomes"))
}

/// Per-outcome entry of a [`ProtocolReport`].
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeSummary {
    pub outcome: JointOutcome,
    pub probability: f64,
    pub fidelity: Option<f64>,
    pub accepted: bool,
}

/// Post-selected protocol summary: success probability of the accepted set,
/// the efficiency c_pro = Σ p·F over accepted branches, and their ratio
/// f_pro (undefined when p_suc is numerically zero).
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolReport {
    pub p_suc: f64,
    pub c_pro: f64,
    pub f_pro: Option<f64>,
    pub degenerate: bool,
    pub per_outcome: Vec<OutcomeSummary>,
}

pub(crate) fn build_report(
    entries: impl Iterator<Item = (JointOutcome, f64, Option<f64>)>,
    acceptance: &AcceptanceSet,
) -> Result<ProtocolReport> {
    if acceptance.is_empty() {
        return Err(GtpError::EmptyAcceptance);
    }
    let mut p_suc = 0.0;
    let mut c_pro = 0.0;
    let mut per_outcome = Vec::new();
    for (outcome, probability, fidelity) in entries {
        if outcome.num_channels() != acceptance.num_channels() {
            return Err(GtpError::ChannelCountMismatch {
                left: outcome.num_channels(),
                right: acceptance.num_channels(),
            });
        }
        let accepted = acceptance.contains(&outcome);
        if accepted {
            p_suc += probability;
            if let Some(f) = fidelity {
                c_pro += probability * f;
            }
        }
        per_outcome.push(OutcomeSummary {
            outcome,
            probability,
            fidelity,
            accepted,
        });
    }
    let degenerate = p_suc <= DEGENERATE_P_SUC;
    let f_pro = (!degenerate).then(|| c_pro / p_suc);
    Ok(ProtocolReport {
        p_suc,
        c_pro,
        f_pro,
        degenerate,
        per_outcome,
    })
}

/// Post-selects a single-channel run on `acceptance`.
pub fn report(records: &[OutcomeRecord; 4], acceptance: &AcceptanceSet) -> Result<ProtocolReport> {
    build_report(
        records.iter().map(|r| {
            (
                JointOutcome::single(r.outcome),
                r.probability,
                r.fidelity.filter(|_| r.probability > NULL_CUTOFF),
            )
        }),
        acceptance,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::AMP_TOL;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn haarish(seed: u64) -> StateVector {
        // Small deterministic spread of test inputs without pulling in the sampler.
        let a = ((seed * 37 + 11) % 97) as f64 / 97.0;
        let b = ((seed * 53 + 29) % 89) as f64 / 89.0;
        let amps = vec![
            Complex64::new(a.cos(), 0.3 * b.sin()),
            Complex64::new(0.7 * b.cos(), a.sin()),
        ];
        StateVector::from_amps(1, amps).unwrap().normalize().unwrap()
    }

    #[test]
    fn params_reject_magnitudes_above_one() {
        assert!(ChannelParam::real(1.0).is_ok());
        assert!(ChannelParam::real(1.05).is_err());
        assert!(BasisParam::new(Complex64::new(0.9, 0.9)).is_err());
        assert!(ChannelParam::new(Complex64::new(f64::INFINITY, 0.0)).is_err());
    }

    #[test]
    fn channel_state_amplitudes_for_half_entanglement() {
        let n = ChannelParam::real(0.5).unwrap();
        let state = channel_state(&n);
        assert!((state.amp(0).re - 0.894_427_190_999_915_9).abs() < 1e-12);
        assert!((state.amp(3).re - 0.447_213_595_499_958).abs() < 1e-12);
        assert_eq!(state.amp(1), Complex64::ZERO);
        assert!(state.is_normalized(AMP_TOL));
    }

    #[test]
    fn concurrence_hits_the_known_anchors() {
        assert_eq!(concurrence(Complex64::ZERO), 0.0);
        assert!((concurrence(Complex64::ONE) - 1.0).abs() < 1e-15);
        assert!((concurrence(Complex64::new(0.5, 0.0)) - 0.8).abs() < 1e-15);
        // Depends on the magnitude only.
        let rotated = Complex64::from_polar(0.5, 1.1);
        assert!((concurrence(rotated) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn bell_basis_is_orthonormal_for_complex_m() {
        let m = BasisParam::new(Complex64::from_polar(0.6, 0.9)).unwrap();
        let basis = bell_basis(&m);
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let overlap = a.inner(b).unwrap();
                let expected = if i == j { Complex64::ONE } else { Complex64::ZERO };
                assert!(
                    (overlap - expected).norm() < 1e-12,
                    "⟨{i}|{j}⟩ = {overlap}"
                );
            }
        }
    }

    #[test]
    fn bell_basis_amplitudes_at_m_half() {
        let m = BasisParam::real(0.5).unwrap();
        let basis = bell_basis(&m);
        let norm = 1.0 / 1.25f64.sqrt();
        assert!((basis[0].amp(0).re - norm).abs() < 1e-12);
        assert!((basis[0].amp(3).re - 0.5 * norm).abs() < 1e-12);
        assert!((basis[1].amp(0).re - 0.5 * norm).abs() < 1e-12);
        assert!((basis[1].amp(3).re + norm).abs() < 1e-12);
        assert!((basis[2].amp(1).re - norm).abs() < 1e-12);
        assert!((basis[3].amp(2).re + norm).abs() < 1e-12);
    }

    #[test]
    fn correction_operators_are_unitary_and_match_the_phi_minus_closed_form() {
        for kind in OutcomeKind::ALL {
            assert!(correction_operator(kind, 0.37).is_unitary(1e-12));
        }
        // exp(iσ_z π/2)·σ_z = diag(i, i).
        let op = correction_operator(OutcomeKind::PhiMinus, std::f64::consts::FRAC_PI_2);
        assert!((op.entry(0, 0) - Complex64::I).norm() < 1e-12);
        assert!((op.entry(1, 1) - Complex64::I).norm() < 1e-12);
    }

    #[test]
    fn optimal_phases_cancel_every_mismatch() {
        let n = ChannelParam::from_polar(0.8, 0.0).unwrap();
        let m = BasisParam::from_polar(0.6, std::f64::consts::FRAC_PI_2).unwrap();
        let phases = CorrectionPhases::optimal(&n, &m);
        assert!((phases.theta(OutcomeKind::PhiPlus) + std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((phases.theta(OutcomeKind::PsiMinus) + std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        for kind in OutcomeKind::ALL {
            let xi = phase_mismatch(kind, n.phase(), m.phase(), phases.theta(kind));
            assert!(xi.abs() < 1e-12, "{kind}: ξ = {xi}");
        }
    }

    #[test]
    fn standard_protocol_teleports_exactly() {
        let n = ChannelParam::real(1.0).unwrap();
        let m = BasisParam::real(1.0).unwrap();
        let phases = CorrectionPhases::zero();
        for seed in 0..20 {
            let input = haarish(seed);
            let records = run_single(&input, &n, &m, &phases).unwrap();
            for record in &records {
                assert!((record.probability - 0.25).abs() < AMP_TOL);
                assert!((record.fidelity.unwrap() - 1.0).abs() < AMP_TOL);
            }
        }
    }

    #[test]
    fn basis_inputs_give_the_textbook_branch_probabilities() {
        // n = 0.5, m = 1, input |0⟩: the Φ branches carry 0.4 each, Ψ 0.1 each.
        let input = StateVector::computational(1, 0);
        let n = ChannelParam::real(0.5).unwrap();
        let m = BasisParam::real(1.0).unwrap();
        let records = run_single(&input, &n, &m, &CorrectionPhases::zero()).unwrap();
        let expected = [0.4, 0.4, 0.1, 0.1];
        for (record, want) in records.iter().zip(expected) {
            assert!(
                (record.probability - want).abs() < AMP_TOL,
                "{}: {} vs {want}",
                record.outcome,
                record.probability
            );
            assert!((record.fidelity.unwrap() - 1.0).abs() < AMP_TOL);
        }
    }

    #[test]
    fn probabilities_always_sum_to_one() {
        let n = ChannelParam::from_polar(0.7, 0.4).unwrap();
        let m = BasisParam::from_polar(0.3, 2.2).unwrap();
        for seed in 0..10 {
            let records =
                run_single(&haarish(seed), &n, &m, &CorrectionPhases::new([0.1, 0.2, 0.3, 0.4]))
                    .unwrap();
            let total: f64 = records.iter().map(|r| r.probability).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_parameters_kill_the_phi_minus_and_psi_plus_branches() {
        // At n = m = 0 the channel is |00⟩ and the measurement projectors for
        // Φ⁻ and Ψ⁺ only touch amplitudes that are identically zero, so those
        // two outcomes can never fire regardless of the input.
        let input = StateVector::from_amps(
            1,
            vec![
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::new(FRAC_1_SQRT_2, 0.0),
            ],
        )
        .unwrap();
        let n = ChannelParam::real(0.0).unwrap();
        let m = BasisParam::real(0.0).unwrap();
        let records = run_single(&input, &n, &m, &CorrectionPhases::zero()).unwrap();
        assert!((records[0].probability - 0.5).abs() < AMP_TOL);
        assert_eq!(records[1].probability, 0.0);
        assert!(records[1].bob_state.is_none());
        assert!(records[1].fidelity.is_none());
        assert_eq!(records[2].probability, 0.0);
        assert!((records[3].probability - 0.5).abs() < AMP_TOL);
        // Both reachable branches leave Bob in |0⟩, half-overlapping |+⟩.
        assert!((records[0].fidelity.unwrap() - 0.5).abs() < AMP_TOL);
        assert!((records[3].fidelity.unwrap() - 0.5).abs() < AMP_TOL);
    }

    #[test]
    fn run_single_validates_its_input() {
        let n = ChannelParam::real(0.5).unwrap();
        let m = BasisParam::real(0.5).unwrap();
        let two_qubits = StateVector::computational(2, 0);
        assert!(run_single(&two_qubits, &n, &m, &CorrectionPhases::zero()).is_err());
        let unnormalized =
            StateVector::from_amps(1, vec![Complex64::ONE, Complex64::ONE]).unwrap();
        assert!(matches!(
            run_single(&unnormalized, &n, &m, &CorrectionPhases::zero()),
            Err(GtpError::NotNormalized { .. })
        ));
    }

    #[test]
    fn matched_basis_post_selection_is_perfect_and_state_independent() {
        let n = ChannelParam::real(0.5).unwrap();
        let m = BasisParam::real(0.5).unwrap();
        let acceptance =
            AcceptanceSet::from_kinds(&[OutcomeKind::PhiMinus, OutcomeKind::PsiPlus]).unwrap();
        for seed in 0..10 {
            let records = run_single(&haarish(seed), &n, &m, &CorrectionPhases::zero()).unwrap();
            let summary = report(&records, &acceptance).unwrap();
            assert!((summary.p_suc - 0.32).abs() < AMP_TOL);
            assert!((summary.f_pro.unwrap() - 1.0).abs() < AMP_TOL);
            assert!(!summary.degenerate);
            assert!(summary.c_pro <= summary.p_suc + 1e-15);
        }
    }

    #[test]
    fn report_flags_degenerate_acceptance() {
        // n = 0, m = 0, input |0⟩: both Ψ branches are unreachable.
        let input = StateVector::computational(1, 0);
        let n = ChannelParam::real(0.0).unwrap();
        let m = BasisParam::real(0.0).unwrap();
        let records = run_single(&input, &n, &m, &CorrectionPhases::zero()).unwrap();
        let acceptance =
            AcceptanceSet::from_kinds(&[OutcomeKind::PsiPlus, OutcomeKind::PsiMinus]).unwrap();
        let summary = report(&records, &acceptance).unwrap();
        assert_eq!(summary.p_suc, 0.0);
        assert!(summary.degenerate);
        assert!(summary.f_pro.is_none());
    }

    #[test]
    fn report_lists_all_outcomes_and_marks_accepted_ones() {
        let n = ChannelParam::real(1.0).unwrap();
        let m = BasisParam::real(1.0).unwrap();
        let records =
            run_single(&haarish(3), &n, &m, &CorrectionPhases::zero()).unwrap();
        let acceptance = AcceptanceSet::from_kinds(&[OutcomeKind::PhiPlus]).unwrap();
        let summary = report(&records, &acceptance).unwrap();
        assert_eq!(summary.per_outcome.len(), 4);
        assert_eq!(
            summary.per_outcome.iter().filter(|o| o.accepted).count(),
            1
        );
        assert!((summary.p_suc - 0.25).abs() < AMP_TOL);
    }
}
