//! Qubit-by-qubit teleportation of an N-qubit state over N independent
//! channels (N ≤ 3), with per-channel basis and correction parameters.
//!
//! Register layout before any measurement: input qubits at positions 1..N,
//! channel pair k at positions (N+2k−1, N+2k). Alice measures each
//! (input_k, alice_k) pair; the joint outcome is the tuple of per-channel
//! outcomes, enumerated in base-4 index order with channel 1 as the most
//! significant digit. After the N projections Bob's qubit k sits at output
//! position k, so entangled inputs are handled exactly.

use crate::error::{GtpError, Result};
use crate::linalg::{StateVector, NORM_TOL, NULL_CUTOFF};
use crate::outcome::{AcceptanceSet, JointOutcome, MAX_CHANNELS};
use crate::single::{
    bell_basis, build_report, channel_state, correction_operator, BasisParam, ChannelParam,
    CorrectionPhases, ProtocolReport,
};

/// Per-channel parameters for an N-channel run.
#[derive(Debug, Clone)]
pub struct MultiParams {
    n_list: Vec<ChannelParam>,
    m_list: Vec<BasisParam>,
    phases: Vec<CorrectionPhases>,
}

impl MultiParams {
    pub fn new(
        n_list: Vec<ChannelParam>,
        m_list: Vec<BasisParam>,
        phases: Vec<CorrectionPhases>,
    ) -> Result<Self> {
        let count = n_list.len();
        if count == 0 || count > MAX_CHANNELS {
            return Err(GtpError::UnsupportedChannelCount(count));
        }
        if m_list.len() != count {
            return Err(GtpError::ChannelCountMismatch {
                left: count,
                right: m_list.len(),
            });
        }
        if phases.len() != count {
            return Err(GtpError::ChannelCountMismatch {
                left: count,
                right: phases.len(),
            });
        }
        Ok(Self {
            n_list,
            m_list,
            phases,
        })
    }

    /// Pairs each channel with the mismatch-cancelling phases for its (n, m).
    pub fn with_optimal_phases(n_list: Vec<ChannelParam>, m_list: Vec<BasisParam>) -> Result<Self> {
        let phases = n_list
            .iter()
            .zip(&m_list)
            .map(|(n, m)| CorrectionPhases::optimal(n, m))
            .collect();
        Self::new(n_list, m_list, phases)
    }

    pub fn single(n: ChannelParam, m: BasisParam, phases: CorrectionPhases) -> Self {
        Self {
            n_list: vec![n],
            m_list: vec![m],
            phases: vec![phases],
        }
    }

    pub fn num_channels(&self) -> usize {
        self.n_list.len()
    }

    pub fn n(&self, channel: usize) -> &ChannelParam {
        &self.n_list[channel]
    }

    pub fn m(&self, channel: usize) -> &BasisParam {
        &self.m_list[channel]
    }

    pub fn phases(&self, channel: usize) -> &CorrectionPhases {
        &self.phases[channel]
    }

    pub fn n_list(&self) -> &[ChannelParam] {
        &self.n_list
    }

    pub fn m_list(&self) -> &[BasisParam] {
        &self.m_list
    }
}

/// One joint branch of an N-channel run.
#[derive(Debug, Clone)]
pub struct JointRecord {
    pub outcome: JointOutcome,
    pub probability: f64,
    pub bob_state: Option<StateVector>,
    pub fidelity: Option<f64>,
}

/// Runs the N-channel protocol for one input and returns all 4^N joint
/// branches in canonical index order. Probabilities sum to 1; unreachable
/// branches carry probability 0 and no state.
pub fn run_multi(input: &StateVector, params: &MultiParams) -> Result<Vec<JointRecord>> {
    let n = params.num_channels();
    if input.num_qubits() != n {
        return Err(GtpError::DimensionMismatch {
            left: input.dim(),
            right: 1 << n,
        });
    }
    if !input.is_normalized(NORM_TOL) {
        return Err(GtpError::NotNormalized {
            norm_sq: input.norm_sq(),
        });
    }

    let mut full = input.clone();
    for k in 0..n {
        full = full.tensor(&channel_state(params.n(k)));
    }
    let bases: Vec<_> = (0..n).map(|k| bell_basis(params.m(k))).collect();

    let mut records = Vec::with_capacity(1 << (2 * n));
    for index in 0..1usize << (2 * n) {
        let outcome = JointOutcome::from_index(n, index)?;
        // Original 1-based register positions still present in `state`;
        // projections remove two entries at a time and shift the rest.
        let mut remaining: Vec<usize> = (1..=3 * n).collect();
        let mut state = full.clone();
        let mut probability = 1.0;
        let mut reachable = true;

        for (k, &kind) in outcome.kinds().iter().enumerate() {
            let input_orig = k + 1;
            let alice_orig = n + 2 * k + 1;
            let input_pos = remaining.iter().position(|&q| q == input_orig).unwrap() + 1;
            let alice_pos = remaining.iter().position(|&q| q == alice_orig).unwrap() + 1;
            let (p, residual) =
                state.project_pair((input_pos, alice_pos), &bases[k][kind.index()])?;
            match residual {
                Some(next) => {
                    probability *= p;
                    state = next;
                    remaining.retain(|&q| q != input_orig && q != alice_orig);
                }
                None => {
                    reachable = false;
                    break;
                }
            }
        }

        if !reachable || probability <= NULL_CUTOFF {
            records.push(JointRecord {
                outcome,
                probability: 0.0,
                bob_state: None,
                fidelity: None,
            });
            continue;
        }

        let mut bob = state;
        for (k, &kind) in outcome.kinds().iter().enumerate() {
            let op = correction_operator(kind, params.phases(k).theta(kind));
            bob = bob.apply_local(k + 1, &op)?;
        }
        let fidelity = input.fidelity(&bob)?;
        records.push(JointRecord {
            outcome,
            probability,
            bob_state: Some(bob),
            fidelity: Some(fidelity),
        });
    }
    Ok(records)
}

/// Post-selects an N-channel run on `acceptance`.
pub fn joint_report(records: &[JointRecord], acceptance: &AcceptanceSet) -> Result<ProtocolReport> {
    build_report(
        records
            .iter()
            .map(|r| (r.outcome.clone(), r.probability, r.fidelity)),
        acceptance,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::AMP_TOL;
    use crate::outcome::OutcomeKind;
    use crate::single::run_single;
    use num_complex::Complex64;

    fn params_real(ns: &[f64], ms: &[f64]) -> MultiParams {
        let n_list = ns.iter().map(|&x| ChannelParam::real(x).unwrap()).collect();
        let m_list = ms.iter().map(|&x| BasisParam::real(x).unwrap()).collect();
        MultiParams::with_optimal_phases(n_list, m_list).unwrap()
    }

    fn one_qubit(re0: f64, im0: f64, re1: f64, im1: f64) -> StateVector {
        StateVector::from_amps(
            1,
            vec![Complex64::new(re0, im0), Complex64::new(re1, im1)],
        )
        .unwrap()
        .normalize()
        .unwrap()
    }

    #[test]
    fn params_validate_lengths_and_channel_count() {
        let n = ChannelParam::real(0.5).unwrap();
        let m = BasisParam::real(0.5).unwrap();
        assert!(MultiParams::new(vec![n], vec![m, m], vec![CorrectionPhases::zero()]).is_err());
        assert!(MultiParams::new(vec![n], vec![m], vec![]).is_err());
        assert!(MultiParams::new(vec![], vec![], vec![]).is_err());
        assert!(MultiParams::new(
            vec![n; 4],
            vec![m; 4],
            vec![CorrectionPhases::zero(); 4]
        )
        .is_err());
    }

    #[test]
    fn single_channel_run_matches_the_dedicated_engine() {
        let input = one_qubit(0.31, -0.4, 0.77, 0.2);
        let n = ChannelParam::from_polar(0.7, 0.5).unwrap();
        let m = BasisParam::from_polar(0.4, -1.1).unwrap();
        let phases = CorrectionPhases::new([0.2, -0.3, 0.15, 0.4]);
        let direct = run_single(&input, &n, &m, &phases).unwrap();
        let via_multi =
            run_multi(&input, &MultiParams::single(n, m, phases)).unwrap();
        assert_eq!(via_multi.len(), 4);
        for (a, b) in direct.iter().zip(&via_multi) {
            assert_eq!(b.outcome.kinds(), [a.outcome]);
            assert!((a.probability - b.probability).abs() < 1e-14);
            match (&a.bob_state, &b.bob_state) {
                (Some(x), Some(y)) => {
                    assert!(x.approx_eq(y, 1e-14));
                    assert!((a.fidelity.unwrap() - b.fidelity.unwrap()).abs() < 1e-14);
                }
                (None, None) => {}
                _ => panic!("reachability disagrees"),
            }
        }
    }

    #[test]
    fn product_inputs_factorize_into_per_channel_runs() {
        let lhs = one_qubit(0.6, 0.1, -0.4, 0.68);
        let rhs = one_qubit(0.2, -0.5, 0.83, 0.1);
        let params = params_real(&[0.6, 0.9], &[0.8, 0.5]);
        let product = lhs.tensor(&rhs);
        let joint = run_multi(&product, &params).unwrap();

        let single_l = run_multi(&lhs, &params_real(&[0.6], &[0.8])).unwrap();
        let single_r = run_multi(&rhs, &params_real(&[0.9], &[0.5])).unwrap();
        for record in &joint {
            let kl = record.outcome.kinds()[0].index();
            let kr = record.outcome.kinds()[1].index();
            let expected_p = single_l[kl].probability * single_r[kr].probability;
            assert!(
                (record.probability - expected_p).abs() < 1e-12,
                "{}: {} vs {expected_p}",
                record.outcome,
                record.probability
            );
            if let (Some(fl), Some(fr)) = (single_l[kl].fidelity, single_r[kr].fidelity) {
                if let Some(fj) = record.fidelity {
                    assert!((fj - fl * fr).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn maximally_entangled_channels_teleport_entangled_inputs_exactly() {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let bell_input = StateVector::from_amps(
            2,
            vec![
                Complex64::new(inv, 0.0),
                Complex64::ZERO,
                Complex64::ZERO,
                Complex64::new(inv, 0.0),
            ],
        )
        .unwrap();
        let params = params_real(&[1.0, 1.0], &[1.0, 1.0]);
        let records = run_multi(&bell_input, &params).unwrap();
        assert_eq!(records.len(), 16);
        for record in &records {
            assert!((record.probability - 1.0 / 16.0).abs() < AMP_TOL);
            assert!((record.fidelity.unwrap() - 1.0).abs() < AMP_TOL);
        }
    }

    #[test]
    fn joint_probabilities_sum_to_one_for_three_channels() {
        let input = one_qubit(0.4, 0.3, 0.5, -0.2)
            .tensor(&one_qubit(0.9, 0.0, 0.1, 0.4))
            .tensor(&one_qubit(0.3, 0.8, -0.2, 0.1));
        let params = params_real(&[0.4, 0.8, 1.0], &[0.9, 0.3, 0.6]);
        let records = run_multi(&input, &params).unwrap();
        assert_eq!(records.len(), 64);
        let total: f64 = records.iter().map(|r| r.probability).sum();
        assert!((total - 1.0).abs() < 1e-11);
    }

    #[test]
    fn matched_bases_give_unit_fidelity_on_the_accepted_set() {
        let input = one_qubit(0.23, 0.51, -0.6, 0.33).tensor(&one_qubit(0.8, -0.1, 0.35, 0.2));
        let params = params_real(&[0.5, 0.5], &[0.5, 0.5]);
        let records = run_multi(&input, &params).unwrap();
        let acceptance = AcceptanceSet::pqt(2).unwrap();
        let summary = joint_report(&records, &acceptance).unwrap();
        assert!((summary.p_suc - 0.1024).abs() < AMP_TOL, "{}", summary.p_suc);
        assert!((summary.f_pro.unwrap() - 1.0).abs() < AMP_TOL);
    }

    #[test]
    fn standard_two_channel_pqt_success_probability_is_one_quarter() {
        let input = one_qubit(0.7, 0.1, 0.3, -0.64).tensor(&one_qubit(0.1, 0.9, 0.4, 0.0));
        let params = params_real(&[1.0, 1.0], &[1.0, 1.0]);
        let records = run_multi(&input, &params).unwrap();
        let summary = joint_report(&records, &AcceptanceSet::pqt(2).unwrap()).unwrap();
        assert!((summary.p_suc - 0.25).abs() < AMP_TOL);
    }

    #[test]
    fn run_multi_validates_register_width_and_acceptance_width() {
        let params = params_real(&[0.5, 0.5], &[0.5, 0.5]);
        let too_small = one_qubit(1.0, 0.0, 0.0, 0.0);
        assert!(run_multi(&too_small, &params).is_err());

        let input = one_qubit(1.0, 0.0, 0.0, 0.0).tensor(&one_qubit(1.0, 0.0, 0.0, 0.0));
        let records = run_multi(&input, &params).unwrap();
        let wrong_width = AcceptanceSet::from_kinds(&[OutcomeKind::PhiPlus]).unwrap();
        assert!(joint_report(&records, &wrong_width).is_err());
    }
}
