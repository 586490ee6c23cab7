//! The verification suite: twelve cross-checks that pin the simulator, the
//! closed-form averages, the operator-level Haar oracle, and the Monte-Carlo
//! sampler against each other and against known exact values.
//!
//! Every tolerance is fixed here, in code. Deterministic checks use absolute
//! gaps; statistical checks use a 4-standard-error band plus a tiny floor
//! ([`SIGMA_FLOOR`]) that absorbs IEEE rounding noise when the true variance
//! is zero. The suite is deterministic for a fixed seed, including its
//! rendered output.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::{
    avg_pf, avg_probability, c_pro_multi, c_pro_multi_product_form, haar_all_accept_efficiency,
    haar_report, transfer_operator, MomentTable,
};
use crate::error::{GtpError, Result};
use crate::multi::{run_multi, MultiParams};
use crate::optimize::optimize_single;
use crate::outcome::{AcceptanceSet, JointOutcome, OutcomeKind};
use crate::run::{execute, render_json, resolve, InputSpec, ParamSpec, RunConfig, MIN_SAMPLES};
use crate::sampler::{haar_state, mc_protocol_average, RandomStream};
use crate::single::{concurrence, phase_mismatch, BasisParam, ChannelParam, CorrectionPhases};
use crate::sweep::{render_csv, sweep_rows, SweepSpec};

/// Number of criteria in the suite.
pub const CRITERIA_COUNT: usize = 12;

/// Short stable names, one per criterion, indexed by id − 1.
pub const CRITERIA_NAMES: [&str; CRITERIA_COUNT] = [
    "standard-protocol-exactness",
    "matched-basis-exactness",
    "averaged-formula-agreement",
    "monte-carlo-agreement",
    "exchange-symmetry",
    "dephasing-recovery",
    "multi-channel-efficiency",
    "multi-channel-matched-exactness",
    "perturbed-sweep-properties",
    "optimizer-maximum",
    "haar-moment-sanity",
    "reproducibility",
];

/// Standard-error threshold above which a statistical check is annotated
/// with a WIDE-CI warning (the check still passes or fails on its own).
pub const WIDE_CI: f64 = 0.01;

/// Noise floor added to every sigma band: absorbs IEEE rounding when the
/// sampled quantity is deterministic (true variance zero).
const SIGMA_FLOOR: f64 = 1e-9;

/// Grid density for the deterministic formula checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GridKind {
    /// Magnitudes {0, 0.5, 1.0} — quick smoke runs.
    Coarse,
    /// Magnitudes {0, 0.1, …, 1.0} — the pinned verification grid.
    Fine,
}

/// Suite configuration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifyConfig {
    pub samples: u64,
    pub seed: u64,
    pub grid: GridKind,
    /// Test hook: replaces every tolerance with −1 so each tolerance-based
    /// check must fail; exercises the failure path end to end.
    pub corrupt_tolerances: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 42,
            grid: GridKind::Fine,
            corrupt_tolerances: false,
        }
    }
}

/// Outcome of one criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// Measured-versus-expected summary for the status line.
    pub details: String,
    pub warnings: Vec<String>,
}

impl CriterionReport {
    pub fn status_line(&self) -> String {
        format!(
            "{} criterion {:>2} {} -- {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.details
        )
    }
}

/// Outcome of the whole suite.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub criteria: Vec<CriterionReport>,
    pub all_passed: bool,
}

impl VerifyReport {
    /// One status line per criterion, indented warnings, summary line.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for criterion in &self.criteria {
            out.push_str(&criterion.status_line());
            out.push('\n');
            for warning in &criterion.warnings {
                let _ = writeln!(out, "    WIDE-CI {warning}");
            }
        }
        let passed = self.criteria.iter().filter(|c| c.passed).count();
        let _ = writeln!(
            out,
            "verification: {passed}/{} criteria passed{}",
            self.criteria.len(),
            if self.all_passed { "" } else { " -- FAILURES above" }
        );
        out
    }

    pub fn render_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

/// Pinned tolerances. The corrupt hook turns every one negative.
#[derive(Debug, Clone, Copy)]
struct Tols {
    /// Exact-identity gap (criteria 1, 2, 6, 8, 9).
    exact: f64,
    /// Closed-form vs oracle agreement (criterion 3).
    formula: f64,
    /// Analytic exchange-symmetry gap (criterion 5).
    pair: f64,
    /// Multi-channel closed-form agreement (criterion 7).
    nqubit: f64,
    /// Optimizer maximizer coordinates (criterion 10).
    opt_param: f64,
    /// Optimizer maximum value (criterion 10).
    opt_value: f64,
    /// Width of statistical acceptance bands, in standard errors.
    sigma: f64,
    /// Additive floor of statistical bands.
    sigma_floor: f64,
}

fn tols(corrupt: bool) -> Tols {
    if corrupt {
        Tols {
            exact: -1.0,
            formula: -1.0,
            pair: -1.0,
            nqubit: -1.0,
            opt_param: -1.0,
            opt_value: -1.0,
            sigma: -1.0,
            sigma_floor: -1.0,
        }
    } else {
        Tols {
            exact: 1e-12,
            formula: 1e-12,
            pair: 1e-14,
            nqubit: 1e-10,
            opt_param: 0.005,
            opt_value: 1e-4,
            sigma: 4.0,
            sigma_floor: SIGMA_FLOOR,
        }
    }
}

fn stream(config: &VerifyConfig, criterion: usize, index: u64) -> RandomStream {
    RandomStream::new(config.seed, criterion as u64 * 1000 + index)
}

fn sub_samples(samples: u64, divisor: u64) -> u64 {
    (samples / divisor).max(MIN_SAMPLES)
}

fn magnitudes(grid: GridKind) -> Vec<f64> {
    match grid {
        GridKind::Coarse => vec![0.0, 0.5, 1.0],
        GridKind::Fine => (0..=10).map(|i| i as f64 / 10.0).collect(),
    }
}

fn real_single(n: f64, m: f64) -> Result<MultiParams> {
    Ok(MultiParams::single(
        ChannelParam::real(n)?,
        BasisParam::real(m)?,
        CorrectionPhases::zero(),
    ))
}

fn note_wide_ci(warnings: &mut Vec<String>, context: &str, se: f64) {
    if se > WIDE_CI {
        warnings.push(format!("{context}: std_error {se:.2e} exceeds {WIDE_CI}"));
    }
}

/// Runs one criterion by id (1-based).
pub fn run_criterion(id: usize, config: &VerifyConfig) -> Result<CriterionReport> {
    let t = tols(config.corrupt_tolerances);
    let (passed, details, warnings) = match id {
        1 => standard_protocol_exactness(config, &t)?,
        2 => matched_basis_exactness(config, &t)?,
        3 => averaged_formula_agreement(config, &t)?,
        4 => monte_carlo_agreement(config, &t)?,
        5 => exchange_symmetry(config, &t)?,
        6 => dephasing_recovery(config, &t)?,
        7 => multi_channel_efficiency(config, &t)?,
        8 => multi_channel_matched_exactness(config, &t)?,
        9 => perturbed_sweep_properties(&t)?,
        10 => optimizer_maximum(&t)?,
        11 => haar_moment_sanity(config, &t)?,
        12 => reproducibility(config)?,
        other => {
            return Err(GtpError::InvalidConfig(format!(
                "criterion id {other} outside 1..={CRITERIA_COUNT}"
            )))
        }
    };
    Ok(CriterionReport {
        id,
        name: CRITERIA_NAMES[id - 1],
        passed,
        details,
        warnings,
    })
}

/// Runs the full suite in order.
pub fn run_all(config: &VerifyConfig) -> Result<VerifyReport> {
    let criteria: Vec<CriterionReport> = (1..=CRITERIA_COUNT)
        .map(|id| run_criterion(id, config))
        .collect::<Result<_>>()?;
    let all_passed = criteria.iter().all(|c| c.passed);
    Ok(VerifyReport {
        criteria,
        all_passed,
    })
}

type CriterionOutcome = (bool, String, Vec<String>);

/// 1: with the maximally entangled channel and matched basis, every outcome
/// teleports perfectly: P = 1/4 and F = 1 per outcome, p_suc = c_pro = 1.
fn standard_protocol_exactness(config: &VerifyConfig, t: &Tols) -> Result<CriterionOutcome> {
    let params = real_single(1.0, 1.0)?;
    let acceptance = AcceptanceSet::all(1)?;
    let mut rng = stream(config, 1, 0).rng();
    let mut max_p_gap: f64 = 0.0;
    let mut max_f_gap: f64 = 0.0;
    let mut max_total_gap: f64 = 0.0;
    for _ in 0..100 {
        let input = haar_state(1, &mut rng);
        let records = run_multi(&input, &params)?;
        for record in &records {
            max_p_gap = max_p_gap.max((record.probability - 0.25).abs());
            max_f_gap = max_f_gap.max((record.fidelity.unwrap_or(0.0) - 1.0).abs());
        }
        let report = crate::multi::joint_report(&records, &acceptance)?;
        max_total_gap = max_total_gap.max((report.p_suc - 1.0).abs());
        max_total_gap = max_total_gap.max((report.c_pro - 1.0).abs());
    }
    let passed = max_p_gap <= t.exact && max_f_gap <= t.exact && max_total_gap <= t.exact;
    let details = format!(
        "100 inputs: max|P-1/4|={max_p_gap:.2e}, max|F-1|={max_f_gap:.2e}, \
         max|p_suc-1|,|c_pro-1|={max_total_gap:.2e} (tol {:.0e})",
        t.exact
    );
    Ok((passed, details, Vec::new()))
}

/// 2: with the basis matched to the channel (m = n) and the restricted
/// acceptance set, teleportation is perfect on accepted outcomes and the
/// success probability is exactly 2n²/(1+n²)².
fn matched_basis_exactness(config: &VerifyConfig, t: &Tols) -> Result<CriterionOutcome> {
    let acceptance = AcceptanceSet::pqt(1)?;
    let mut rng = stream(config, 2, 0).rng();
    let mut max_f_gap: f64 = 0.0;
    let mut max_p_gap: f64 = 0.0;
    for i in 1..=10 {
        let n = i as f64 / 10.0;
        let params = real_single(n, n)?;
        for _ in 0..10 {
            let input = haar_state(1, &mut rng);
            let records = run_multi(&input, &params)?;
            for (index, record) in records.iter().enumerate() {
                if acceptance.contains_index(index) {
                    max_f_gap = max_f_gap.max((record.fidelity.unwrap_or(0.0) - 1.0).abs());
                }
            }
        }
        let report = haar_report(&params, &acceptance)?;
        let expected = 2.0 * n * n / ((1.0 + n * n) * (1.0 + n * n));
        max_p_gap = max_p_gap.max((report.p_suc - expected).abs());
    }
    let passed = max_f_gap <= t.exact && max_p_gap <= t.exact;
    let details = format!(
        "n=m in 0.1..=1.0: max|F-1|={max_f_gap:.2e}, max|p_suc-2n^2/(1+n^2)^2|={max_p_gap:.2e} \
         (tol {:.0e})",
        t.exact
    );
    Ok((passed, details, Vec::new()))
}

/// 3: the operator-level Haar oracle reproduces the closed-form averaged
/// probability and averaged P·F for every outcome across the magnitude and
/// phase grid.
fn averaged_formula_agreement(config: &VerifyConfig, t: &Tols) -> Result<CriterionOutcome> {
    let mags = magnitudes(config.grid);
    let phases = [0.0, PI / 4.0, PI / 2.0];
    let mut max_p_gap: f64 = 0.0;
    let mut max_pf_gap: f64 = 0.0;
    let mut comparisons = 0usize;
    for &n_mag in &mags {
        for &m_mag in &mags {
            for &theta_n in &phases {
                for &theta_m in &phases {
                    let n = Complex64::from_polar(n_mag, theta_n);
                    let m = Complex64::from_polar(m_mag, theta_m);
                    let params = MultiParams::single(
                        ChannelParam::new(n)?,
                        BasisParam::new(m)?,
                        CorrectionPhases::zero(),
                    );
                    for kind in OutcomeKind::ALL {
                        let op = transfer_operator(&JointOutcome::single(kind), &params)?;
                        let mismatch = phase_mismatch(kind, theta_n, theta_m, 0.0);
                        max_p_gap = max_p_gap
                            .max((op.haar_avg_prob() - avg_probability(n, m, kind)).abs());
                        max_pf_gap = max_pf_gap
                            .max((op.haar_avg_pf() - avg_pf(n, m, mismatch, kind)).abs());
                        comparisons += 2;
                    }
                }
            }
        }
    }
    let passed = max_p_gap <= t.formula && max_pf_gap <= t.formula;
    let details = format!(
        "{comparisons} comparisons: max|<P>_oracle-<P>_formula|={max_p_gap:.2e}, \
         max|<PF>_oracle-<PF>_formula|={max_pf_gap:.2e} (tol {:.0e})",
        t.formula
    );
    Ok((passed, details, Vec::new()))
}

/// 4: Monte-Carlo estimates agree with the closed forms within 4 standard
/// errors on a 4×4 parameter grid, allowing ~1% statistical outliers.
fn monte_carlo_agreement(config: &VerifyConfig, t: &Tols) -> Result<CriterionOutcome> {
    let grid = [0.1, 0.4, 0.7, 1.0];
    let acceptance = AcceptanceSet::all(1)?;
    let mut outliers = 0usize;
    let mut comparisons = 0usize;
    let mut max_sigma_ratio: f64 = 0.0;
    let mut warnings = Vec::new();
    for (g, (&n, &m)) in grid
        .iter()
        .flat_map(|n| grid.iter().map(move |m| (n, m)))
        .enumerate()
    {
        let params = real_single(n, m)?;
        let averages =
            mc_protocol_average(&params, &acceptance, config.samples, &stream(config, 4, g as u64))?;
        let nc = Complex64::new(n, 0.0);
        let mc = Complex64::new(m, 0.0);
        for entry in &averages.per_outcome {
            let kind = entry.outcome.kinds()[0];
            let checks = [
                (entry.avg_prob, avg_probability(nc, mc, kind)),
                (entry.avg_pf, avg_pf(nc, mc, 0.0, kind)),
            ];
            for (estimate, expected) in checks {
                let gap = (estimate.mean - expected).abs();
                let band = t.sigma * estimate.std_error + t.sigma_floor;
                if gap > band {
                    outliers += 1;
                }
                if estimate.std_error > 0.0 {
                    max_sigma_ratio = max_sigma_ratio.max(gap / estimate.std_error);
                }
                note_wide_ci(
                    &mut warnings,
                    &format!("n={n}, m={m}, outcome {}", entry.outcome),
                    estimate.std_error,
                );
                comparisons += 1;
            }
        }
    }
    // Fixed-seed run: the outlier count is deterministic; the 1% allowance
    // (at least 2 of 128) documents the expected tail of a 4-sigma band.
    let allowed = (comparisons / 100).max(2);
    let passed = outliers <= allowed;
    let details = format!(
        "{comparisons} comparisons at {} samples: {outliers} outside {}sigma+{:.0e} \
         (allowed {allowed}), worst gap {max_sigma_ratio:.2} sigma",
        config.samples, t.sigma, t.sigma_floor
    );
    Ok((passed, details, warnings))
}

/// 5: the averaged efficiency is symmetric under exchanging the channel and
/// basis parameters, analytically on the full grid and statistically at
/// three spot points.
fn exchange_symmetry(config: &VerifyConfig, t: &Tols) -> Result<CriterionOutcome> {
    let mags = magnitudes(config.grid);
    let phases = [0.0, PI / 4.0, PI / 2.0];
    let mut max_gap: f64 = 0.0;
    let efficiency = |n: Complex64, m: Complex64| -> f64 {
        OutcomeKind::ALL
            .iter()
            .map(|&kind| {
                let mismatch = phase_mismatch(kind, n.arg(), m.arg(), 0.0);
                avg_pf(n, m, mismatch, kind)
            })
            .sum()
    };
    for &n_mag in &mags {
        for &m_mag in &mags {
            for &theta_n in &phases {
                for &theta_m in &phases {
                    let n = Complex64::from_polar(n_mag, theta_n);
                    let m = Complex64::from_polar(m_mag, theta_m);
                    max_gap = max_gap.max((efficiency(n, m) - efficiency(m, n)).abs());
                }
            }
        }
    }
    let analytic_pass = max_gap <= t.pair;

    let spots = [(0.3, 0.8), (0.5, 1.0), (0.2, 0.6)];
    let acceptance = AcceptanceSet::all(1)?;
    let samples = sub_samples(config.samples, 10);
    let mut max_mc_sigma: f64 = 0.0;
    let mut mc_pass = true;
    let mut warnings = Vec::new();
    for (k, &(n, m)) in spots.iter().enumerate() {
        let forward = mc_protocol_average(
            &real_single(n, m)?,
            &acceptance,
            samples,
            &stream(config, 5, 2 * k as u64),
        )?;
        let swapped = mc_protocol_average(
            &real_single(m, n)?,
            &acceptance,
            samples,
            &stream(config, 5, 2 * k as u64 + 1),
        )?;
        let gap = (forward.c_pro.mean - swapped.c_pro.mean).abs();
        let se = forward.c_pro.std_error.hypot(swapped.c_pro.std_error);
        if gap > t.sigma * se + t.sigma_floor {
            mc_pass = false;
        }
        if se > 0.0 {
            max_mc_sigma = max_mc_sigma.max(gap / se);
        }
        note_wide_ci(&mut warnings, &format!("spot ({n}, {m})"), se);
    }
    let passed = analytic_pass && mc_pass;
    let details = format!(
        "analytic max gap {max_gap:.2e} (tol {:.0e}); MC spots worst {max_mc_sigma:.2} sigma \
         at {samples} samples (band {}sigma)",
        t.pair, t.sigma
    );
    Ok((passed, details, warnings))
}

/// 6: for a channel that differs from maximal entanglement only by a phase,
/// the dephasing correction preset restores F = 1 on all four outcomes for
/// every input, without any averaging.
fn dephasing_recovery(config: &VerifyConfig, t: &Tols) -> Result<CriterionOutcome> {
    let mut rng = stream(config, 6, 0).rng();
    let mut max_f_gap: f64 = 0.0;
    let mut max_p_gap: f64 = 0.0;
    for k in 0..=12 {
        let theta_n = k as f64 * PI / 6.0;
        let params = MultiParams::single(
            ChannelParam::from_polar(1.0, theta_n)?,
            BasisParam::real(1.0)?,
            CorrectionPhases::dephasing(theta_n),
        );
        for _ in 0..5 {
            let input = haar_state(1, &mut rng);
            let records = run_multi(&input, &params)?;
            for record in &records {
                max_f_gap = max_f_gap.max((record.fidelity.unwrap_or(0.0) - 1.0).abs());
                max_p_gap = max_p_gap.max((record.probability - 0.25).abs());
            }
        }
    }
    let passed = max_f_gap <= t.exact && max_p_gap <= t.exact;
    let details = format!(
        "13 phases x 5 inputs: max|F-1|={max_f_gap:.2e}, max|P-1/4|={max_p_gap:.2e} (tol {:.0e})",
        t.exact
    );
    Ok((passed, details, Vec::new()))
}

fn weights_for(params: &MultiParams) -> Vec<f64> {
    (0..params.num_channels())
        .map(|k| {
            concurrence(params.n(k).value()) * concurrence(params.m(k).value()) / 2.0
        })
        .collect()
}

/// 7: for 2 and 3 channels the oracle efficiency matches both closed forms
/// (elementary-symmetric sum and telescoped product), and Monte Carlo
/// agrees at spot configurations.
fn multi_channel_efficiency(config: &VerifyConfig, t: &Tols) -> Result<CriterionOutcome> {
    let v = [0.3, 0.5, 0.8, 1.0];
    let mut max_oracle_gap: f64 = 0.0;
    let mut max_form_gap: f64 = 0.0;
    let mut configs = 0usize;

    let mut check = |n_list: Vec<f64>, m_list: Vec<f64>| -> Result<()> {
        let params = MultiParams::with_optimal_phases(
            n_list.iter().map(|&x| ChannelParam::real(x)).collect::<Result<_>>()?,
            m_list.iter().map(|&x| BasisParam::real(x)).collect::<Result<_>>()?,
        )?;
        let weights = weights_for(&params);
        let oracle = haar_all_accept_efficiency(&params);
        let symmetric = c_pro_multi(&weights)?;
        let product = c_pro_multi_product_form(&weights)?;
        max_oracle_gap = max_oracle_gap.max((oracle - symmetric).abs());
        max_form_gap = max_form_gap.max((symmetric - product).abs());
        configs += 1;
        Ok(())
    };

    for &n1 in &v {
        for &n2 in &v {
            for &m1 in &v {
                for &m2 in &v {
                    check(vec![n1, n2], vec![m1, m2])?;
                }
            }
        }
    }
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                check(
                    vec![v[a], v[b], v[c]],
                    vec![v[(a + 1) % 4], v[(b + 2) % 4], v[(c + 3) % 4]],
                )?;
            }
        }
    }
    let exact_pass = max_oracle_gap <= t.nqubit && max_form_gap <= t.nqubit;

    let samples = sub_samples(config.samples, 10);
    let mut warnings = Vec::new();
    let mut mc_pass = true;
    let mut worst_sigma: f64 = 0.0;
    let spot_configs: [(Vec<f64>, Vec<f64>); 2] = [
        (vec![0.5, 0.8], vec![0.8, 0.5]),
        (vec![0.3, 0.5, 0.8], vec![1.0, 0.5, 0.3]),
    ];
    for (k, (n_list, m_list)) in spot_configs.into_iter().enumerate() {
        let params = MultiParams::with_optimal_phases(
            n_list.iter().map(|&x| ChannelParam::real(x)).collect::<Result<_>>()?,
            m_list.iter().map(|&x| BasisParam::real(x)).collect::<Result<_>>()?,
        )?;
        let count = params.num_channels();
        let expected = c_pro_multi(&weights_for(&params))?;
        let averages = mc_protocol_average(
            &params,
            &AcceptanceSet::all(count)?,
            samples,
            &stream(config, 7, k as u64),
        )?;
        let gap = (averages.c_pro.mean - expected).abs();
        let se = averages.c_pro.std_error;
        if gap > t.sigma * se + t.sigma_floor {
            mc_pass = false;
        }
        if se > 0.0 {
            worst_sigma = worst_sigma.max(gap / se);
        }
        note_wide_ci(&mut warnings, &format!("{count}-channel spot"), se);
    }

    let passed = exact_pass && mc_pass;
    let details = format!(
        "{configs} configs: max|oracle-sum_form|={max_oracle_gap:.2e}, \
         max|sum_form-product_form|={max_form_gap:.2e} (tol {:.0e}); \
         MC worst {worst_sigma:.2} sigma at {samples} samples",
        t.nqubit
    );
    Ok((passed, details, warnings))
}

/// 8: two matched channels with restricted acceptance teleport two qubits
/// perfectly, with success probability equal to the product of the
/// per-channel probabilities.
fn multi_channel_matched_exactness(_config: &VerifyConfig, t: &Tols) -> Result<CriterionOutcome> {
    let v = [0.3, 0.5, 0.8, 1.0];
    let acceptance = AcceptanceSet::pqt(2)?;
    let mut max_f_gap: f64 = 0.0;
    let mut max_p_gap: f64 = 0.0;
    for &n1 in &v {
        for &n2 in &v {
            let params = MultiParams::with_optimal_phases(
                vec![ChannelParam::real(n1)?, ChannelParam::real(n2)?],
                vec![BasisParam::real(n1)?, BasisParam::real(n2)?],
            )?;
            let report = haar_report(&params, &acceptance)?;
            let expected_p: f64 = [n1, n2]
                .iter()
                .map(|&n| 2.0 * n * n / ((1.0 + n * n) * (1.0 + n * n)))
                .product();
            max_p_gap = max_p_gap.max((report.p_suc - expected_p).abs());
            max_f_gap = max_f_gap.max((report.f_pro.unwrap_or(0.0) - 1.0).abs());
        }
    }
    let passed = max_f_gap <= t.exact && max_p_gap <= t.exact;
    let details = format!(
        "16 matched pairs: max|f_pro-1|={max_f_gap:.2e}, \
         max|p_suc-prod 2n^2/(1+n^2)^2|={max_p_gap:.2e} (tol {:.0e})",
        t.exact
    );
    Ok((passed, details, Vec::new()))
}

/// 9: the default perturbation sweep satisfies the expected row properties:
/// unit fidelity on the unperturbed line, strict decrease away from it,
/// the known corner value, and the row identity c = f·p.
fn perturbed_sweep_properties(t: &Tols) -> Result<CriterionOutcome> {
    let output = sweep_rows(&SweepSpec::default())?;
    let rows = &output.rows;
    let mut max_unit_gap: f64 = 0.0;
    let mut max_identity_gap: f64 = 0.0;
    let mut monotone = true;
    let mut corner_gap = f64::INFINITY;

    for row in rows {
        if row.delta == 0.0 {
            max_unit_gap = max_unit_gap.max((row.f_pqt - 1.0).abs());
            if row.n == 1.0 {
                corner_gap = (row.p_suc - 0.5).abs();
            }
        }
        max_identity_gap = max_identity_gap.max((row.c_pqt - row.f_pqt * row.p_suc).abs());
    }

    // Group rows by n (rows arrive in grid order: n outer, delta inner
    // ascending) and demand strict decrease of f as |delta| grows on each
    // side of zero.
    let mut index = 0;
    while index < rows.len() {
        let n = rows[index].n;
        let mut group_end = index;
        while group_end < rows.len() && rows[group_end].n == n {
            group_end += 1;
        }
        let group = &rows[index..group_end];
        for pair in group.windows(2) {
            let ordered = if pair[1].delta <= 0.0 {
                // Moving toward zero from below: |delta| shrinks, f grows.
                pair[0].f_pqt < pair[1].f_pqt
            } else {
                // Past zero: |delta| grows, f shrinks.
                pair[0].f_pqt > pair[1].f_pqt
            };
            if !ordered {
                monotone = false;
            }
        }
        index = group_end;
    }

    let passed = max_unit_gap <= t.exact
        && corner_gap <= t.exact
        && max_identity_gap <= t.exact
        && monotone;
    let details = format!(
        "{} rows: max|f-1| on delta=0 line {max_unit_gap:.2e}, corner |p_suc-1/2|={corner_gap:.2e}, \
         max|c-f*p|={max_identity_gap:.2e} (tol {:.0e}), strict monotonicity {}",
        rows.len(),
        t.exact,
        if monotone { "holds" } else { "violated" }
    );
    Ok((passed, details, Vec::new()))
}

/// 10: the coordinate search finds the known maximum: full basis
/// entanglement, zero phase mismatches, value (2/3)(1 + c(n)/2).
fn optimizer_maximum(t: &Tols) -> Result<CriterionOutcome> {
    let mut max_m_gap: f64 = 0.0;
    let mut max_xi_gap: f64 = 0.0;
    let mut max_value_gap: f64 = 0.0;
    for n in [0.2, 0.5, 0.9] {
        let result = optimize_single(n)?;
        max_m_gap = max_m_gap.max((result.m_star - 1.0).abs());
        for xi in result.xi_star {
            max_xi_gap = max_xi_gap.max(xi.min(TAU - xi));
        }
        let c = concurrence(Complex64::new(n, 0.0));
        let expected = (2.0 / 3.0) * (1.0 + c / 2.0);
        max_value_gap = max_value_gap.max((result.c_channel - expected).abs());
    }
    let passed =
        max_m_gap <= t.opt_param && max_xi_gap <= t.opt_param && max_value_gap <= t.opt_value;
    let details = format!(
        "n in {{0.2, 0.5, 0.9}}: |m*-1|<={max_m_gap:.2e}, |xi*|<={max_xi_gap:.2e} \
         (tol {}), |c-max|<={max_value_gap:.2e} (tol {:.0e})",
        t.opt_param, t.opt_value
    );
    Ok((passed, details, Vec::new()))
}

/// 11: empirical Haar moments of the sampled inputs match the moment table:
/// ⟨|α_i|²⟩ = 1/2^N and ⟨|α_i α_j|²⟩ = 2^(δ_ij − N)/(1 + 2^N).
fn haar_moment_sanity(config: &VerifyConfig, t: &Tols) -> Result<CriterionOutcome> {
    let mut worst_sigma: f64 = 0.0;
    let mut failed = false;
    let mut warnings = Vec::new();
    for num_qubits in 1..=3usize {
        let table = MomentTable::new(num_qubits);
        let dim = table.dimension();
        let samples = config.samples;
        let mut rng = stream(config, 11, num_qubits as u64).rng();
        // Moment index layout: [0, dim) second moments |α_i|², then one
        // slot per ordered pair (i, j), i ≤ j, for |α_i α_j|².
        let pair_count = dim * (dim + 1) / 2;
        let mut sums = vec![0.0f64; dim + pair_count];
        let mut sq_sums = vec![0.0f64; dim + pair_count];
        for _ in 0..samples {
            let state = haar_state(num_qubits, &mut rng);
            let norms: Vec<f64> = state.amps().iter().map(|a| a.norm_sqr()).collect();
            let mut slot = dim;
            for (i, &ni) in norms.iter().enumerate() {
                sums[i] += ni;
                sq_sums[i] += ni * ni;
                for &nj in norms.iter().skip(i) {
                    let value = ni * nj;
                    sums[slot] += value;
                    sq_sums[slot] += value * value;
                    slot += 1;
                }
            }
        }
        let s = samples as f64;
        let mut slot = dim;
        let mut check = |slot_index: usize, expected: f64, context: String| {
            let mean = sums[slot_index] / s;
            let var = ((sq_sums[slot_index] - sums[slot_index] * sums[slot_index] / s)
                / (s - 1.0))
                .max(0.0);
            let se = (var / s).sqrt();
            let gap = (mean - expected).abs();
            if gap > t.sigma * se + t.sigma_floor {
                failed = true;
            }
            if se > 0.0 {
                worst_sigma = worst_sigma.max(gap / se);
            }
            note_wide_ci(&mut warnings, &context, se);
        };
        for i in 0..dim {
            check(i, table.second_moment(), format!("N={num_qubits} |a_{i}|^2"));
        }
        for i in 0..dim {
            for j in i..dim {
                check(
                    slot,
                    table.fourth_moment(i, j),
                    format!("N={num_qubits} |a_{i} a_{j}|^2"),
                );
                slot += 1;
            }
        }
    }
    let passed = !failed;
    let details = format!(
        "N=1..3 at {} samples: worst moment gap {worst_sigma:.2} sigma (band {}sigma+{:.0e})",
        config.samples, t.sigma, t.sigma_floor
    );
    Ok((passed, details, warnings))
}

/// 12: rendered outputs are byte-identical across repeated executions with
/// the same seed: Monte-Carlo run report, exact run report, sweep CSV, and
/// raw estimator bits.
fn reproducibility(config: &VerifyConfig) -> Result<CriterionOutcome> {
    let mc_config = RunConfig {
        n: Some(vec![ParamSpec::Real(0.7)]),
        m: Some(vec![ParamSpec::Real(0.9)]),
        samples: Some(sub_samples(config.samples, 100)),
        seed: Some(config.seed),
        ..RunConfig::default()
    };
    let resolved = resolve(&mc_config, None, false)?;
    let mc_equal = render_json(&execute(&resolved)?) == render_json(&execute(&resolved)?);

    let ket_config = RunConfig {
        n: Some(vec![ParamSpec::Real(0.6)]),
        m: Some(vec![ParamSpec::Real(0.8)]),
        input: Some(InputSpec::Text("ket:0".into())),
        ..RunConfig::default()
    };
    let resolved_ket = resolve(&ket_config, None, false)?;
    let ket_equal = render_json(&execute(&resolved_ket)?) == render_json(&execute(&resolved_ket)?);

    let sweep_a = render_csv(&sweep_rows(&SweepSpec::default())?.rows);
    let sweep_b = render_csv(&sweep_rows(&SweepSpec::default())?.rows);
    let sweep_equal = sweep_a == sweep_b;

    let params = real_single(0.4, 0.9)?;
    let acceptance = AcceptanceSet::all(1)?;
    let samples = sub_samples(config.samples, 100);
    let first = mc_protocol_average(&params, &acceptance, samples, &stream(config, 12, 0))?;
    let second = mc_protocol_average(&params, &acceptance, samples, &stream(config, 12, 0))?;
    let bits_equal = first.p_suc.mean.to_bits() == second.p_suc.mean.to_bits()
        && first.c_pro.std_error.to_bits() == second.c_pro.std_error.to_bits();

    let passed = mc_equal && ket_equal && sweep_equal && bits_equal;
    let details = format!(
        "MC report bytes {}, deterministic report bytes {}, sweep CSV bytes {}, \
         estimator bits {}",
        if mc_equal { "equal" } else { "DIFFER" },
        if ket_equal { "equal" } else { "DIFFER" },
        if sweep_equal { "equal" } else { "DIFFER" },
        if bits_equal { "equal" } else { "DIFFER" },
    );
    Ok((passed, details, Vec::new()))
}
