//! Property-based invariants of the protocol engine, the closed-form
//! averages, and the operator oracle, exercised over randomized parameters.

use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;

use gtp::analytic::{
    avg_pf, avg_probability, c_pro_multi, c_pro_multi_product_form, elementary_symmetric,
    transfer_operator,
};
use gtp::linalg::StateVector;
use gtp::multi::{run_multi, MultiParams};
use gtp::outcome::{AcceptanceSet, JointOutcome, OutcomeKind};
use gtp::single::{bell_basis, phase_mismatch, BasisParam, ChannelParam, CorrectionPhases};

fn complex_in_disc() -> impl Strategy<Value = Complex64> {
    (0.0..=1.0f64, 0.0..TAU).prop_map(|(mag, phase)| Complex64::from_polar(mag, phase))
}

fn qubit_state() -> impl Strategy<Value = StateVector> {
    // Bloch angles cover every pure single-qubit state.
    (0.0..TAU, 0.0..TAU).prop_map(|(theta, phi)| {
        let amps = vec![
            Complex64::new((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ];
        StateVector::from_amps(1, amps).unwrap()
    })
}

fn single_params() -> impl Strategy<Value = MultiParams> {
    (
        complex_in_disc(),
        complex_in_disc(),
        prop::array::uniform4(0.0..TAU),
    )
        .prop_map(|(n, m, thetas)| {
            MultiParams::single(
                ChannelParam::new(n).unwrap(),
                BasisParam::new(m).unwrap(),
                CorrectionPhases::new(thetas),
            )
        })
}

proptest! {
    /// The four outcome probabilities of a single-channel run always sum to
    /// one, and every realized branch state stays normalized.
    #[test]
    fn outcome_probabilities_are_complete(
        input in qubit_state(),
        params in single_params(),
    ) {
        let records = run_multi(&input, &params).unwrap();
        let total: f64 = records.iter().map(|r| r.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "total probability {total}");
        for record in &records {
            if let Some(state) = &record.bob_state {
                prop_assert!(state.is_normalized(1e-9));
            }
            if let Some(f) = record.fidelity {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
            }
        }
    }

    /// The generalized measurement basis is orthonormal for every basis
    /// parameter in the unit disc.
    #[test]
    fn measurement_basis_is_orthonormal(m in complex_in_disc()) {
        let basis = bell_basis(&BasisParam::new(m).unwrap());
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let overlap = a.inner(b).unwrap();
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!(
                    (overlap.norm() - expected).abs() < 1e-12,
                    "<e{i}|e{j}> = {overlap}"
                );
            }
        }
    }

    /// Post-selected efficiency can never exceed the success probability,
    /// for any acceptance subset (fidelities are at most one).
    #[test]
    fn efficiency_is_bounded_by_success_probability(
        input in qubit_state(),
        params in single_params(),
        mask in 1u8..16,
    ) {
        let kinds: Vec<OutcomeKind> = OutcomeKind::ALL
            .into_iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, k)| k)
            .collect();
        let acceptance = AcceptanceSet::from_kinds(&kinds).unwrap();
        let records = run_multi(&input, &params).unwrap();
        let report = gtp::multi::joint_report(&records, &acceptance).unwrap();
        prop_assert!(report.c_pro <= report.p_suc + 1e-12);
        if let Some(f) = report.f_pro {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        }
    }

    /// Matching the basis to a real channel makes both restricted-acceptance
    /// branches perfect for every input.
    #[test]
    fn matched_basis_branches_teleport_perfectly(
        input in qubit_state(),
        n in 0.05..=1.0f64,
    ) {
        let params = MultiParams::single(
            ChannelParam::real(n).unwrap(),
            BasisParam::real(n).unwrap(),
            CorrectionPhases::zero(),
        );
        let acceptance = AcceptanceSet::pqt(1).unwrap();
        let records = run_multi(&input, &params).unwrap();
        for (index, record) in records.iter().enumerate() {
            if acceptance.contains_index(index) {
                prop_assert!((record.fidelity.unwrap() - 1.0).abs() < 1e-9);
            }
        }
    }

    /// Two independent channels acting on a product input factorize:
    /// joint probabilities and fidelities are products of the single-channel
    /// ones.
    #[test]
    fn independent_channels_factorize_on_product_inputs(
        a in qubit_state(),
        b in qubit_state(),
        n1 in 0.1..=1.0f64,
        n2 in 0.1..=1.0f64,
        m1 in 0.1..=1.0f64,
        m2 in 0.1..=1.0f64,
    ) {
        let single = |n: f64, m: f64| MultiParams::single(
            ChannelParam::real(n).unwrap(),
            BasisParam::real(m).unwrap(),
            CorrectionPhases::zero(),
        );
        let first = run_multi(&a, &single(n1, m1)).unwrap();
        let second = run_multi(&b, &single(n2, m2)).unwrap();

        let joint_params = MultiParams::new(
            vec![ChannelParam::real(n1).unwrap(), ChannelParam::real(n2).unwrap()],
            vec![BasisParam::real(m1).unwrap(), BasisParam::real(m2).unwrap()],
            vec![CorrectionPhases::zero(); 2],
        ).unwrap();
        let joint = run_multi(&a.tensor(&b), &joint_params).unwrap();

        for (index, record) in joint.iter().enumerate() {
            let (i, j) = (index / 4, index % 4);
            let expected_p = first[i].probability * second[j].probability;
            prop_assert!((record.probability - expected_p).abs() < 1e-9);
            if expected_p > 1e-9 {
                let expected_f = first[i].fidelity.unwrap() * second[j].fidelity.unwrap();
                prop_assert!((record.fidelity.unwrap() - expected_f).abs() < 1e-8);
            }
        }
    }

    /// The elementary symmetric polynomials obey their defining recursion
    /// e_k(x_1..x_r) = e_k(x_1..x_{r-1}) + x_r e_{k-1}(x_1..x_{r-1}).
    #[test]
    fn elementary_symmetric_recursion_holds(
        values in prop::collection::vec(0.0..=0.5f64, 1..=3),
        degree in 1usize..=3,
    ) {
        prop_assume!(degree <= values.len());
        let full = elementary_symmetric(degree, &values).unwrap();
        let head = &values[..values.len() - 1];
        let last = values[values.len() - 1];
        let keep = if degree <= head.len() {
            elementary_symmetric(degree, head).unwrap()
        } else {
            0.0
        };
        let take = elementary_symmetric(degree - 1, head).unwrap();
        prop_assert!((full - (keep + last * take)).abs() < 1e-12);
    }

    /// The symmetric-sum and telescoped-product forms of the multi-channel
    /// efficiency agree for any admissible weights.
    #[test]
    fn efficiency_sum_and_product_forms_agree(
        weights in prop::collection::vec(0.0..=0.5f64, 1..=3),
    ) {
        let sum_form = c_pro_multi(&weights).unwrap();
        let product_form = c_pro_multi_product_form(&weights).unwrap();
        prop_assert!((sum_form - product_form).abs() < 1e-12);
    }

    /// The operator oracle's Haar averages match the closed forms for every
    /// outcome at arbitrary complex parameters.
    #[test]
    fn oracle_and_closed_forms_agree(n in complex_in_disc(), m in complex_in_disc()) {
        let params = MultiParams::single(
            ChannelParam::new(n).unwrap(),
            BasisParam::new(m).unwrap(),
            CorrectionPhases::zero(),
        );
        for kind in OutcomeKind::ALL {
            let op = transfer_operator(&JointOutcome::single(kind), &params).unwrap();
            let mismatch = phase_mismatch(kind, n.arg(), m.arg(), 0.0);
            prop_assert!((op.haar_avg_prob() - avg_probability(n, m, kind)).abs() < 1e-12);
            prop_assert!((op.haar_avg_pf() - avg_pf(n, m, mismatch, kind)).abs() < 1e-12);
        }
    }

    /// The averaged efficiency is invariant under exchanging channel and
    /// basis parameters.
    #[test]
    fn averaged_efficiency_is_exchange_symmetric(
        n in complex_in_disc(),
        m in complex_in_disc(),
    ) {
        let efficiency = |x: Complex64, y: Complex64| -> f64 {
            OutcomeKind::ALL
                .iter()
                .map(|&kind| avg_pf(x, y, phase_mismatch(kind, x.arg(), y.arg(), 0.0), kind))
                .sum()
        };
        prop_assert!((efficiency(n, m) - efficiency(m, n)).abs() < 1e-14);
    }

    /// For every outcome, the transfer operator reproduces the simulator:
    /// ⟨φ|M†M|φ⟩ is the outcome probability and |⟨φ|M|φ⟩|² is P·F.
    #[test]
    fn transfer_operators_reproduce_the_simulator(
        input in qubit_state(),
        params in single_params(),
    ) {
        let records = run_multi(&input, &params).unwrap();
        for (index, record) in records.iter().enumerate() {
            let outcome = JointOutcome::from_index(1, index).unwrap();
            let op = transfer_operator(&outcome, &params).unwrap();
            let mapped = op.apply(&input).unwrap();
            let probability = mapped.norm_sq();
            prop_assert!(
                (probability - record.probability).abs() < 1e-10,
                "outcome {outcome}: {probability} vs {}",
                record.probability
            );
            let overlap = input.inner(&mapped).unwrap().norm_sqr();
            let pf = record.probability * record.fidelity.unwrap_or(0.0);
            prop_assert!((overlap - pf).abs() < 1e-10);
        }
    }
}
