//! Declarative protocol-run configuration and execution.
//!
//! A [`RunConfig`] describes one protocol execution in plain data (suitable
//! for a JSON config file); [`resolve`] validates it into concrete engine
//! types, and [`execute`] dispatches to the right averaging mode:
//!
//! * a concrete input state → a single deterministic execution,
//! * `"haar"` input with `exact` → transfer-operator Haar averaging,
//! * `"haar"` input otherwise → seeded Monte-Carlo estimation.
//!
//! All three modes serialize into one report schema; exact quantities appear
//! as bare numbers, sampled ones as `{mean, std_error, samples}` objects.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::haar_report;
use crate::error::{GtpError, Result};
use crate::linalg::StateVector;
use crate::multi::{joint_report, run_multi, MultiParams};
use crate::outcome::{AcceptanceSet, JointOutcome};
use crate::sampler::{mc_protocol_average, Estimate, McAverages, RandomStream};
use crate::single::{BasisParam, ChannelParam, CorrectionPhases, ProtocolReport};

/// Default seed when neither flag, config, nor environment provides one.
pub const DEFAULT_SEED: u64 = 42;
/// Default Monte-Carlo sample count.
pub const DEFAULT_SAMPLES: u64 = 100_000;
/// Smallest accepted Monte-Carlo sample count.
pub const MIN_SAMPLES: u64 = 100;

/// A complex parameter: either a bare real or an `[magnitude, phase]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ParamSpec {
    Real(f64),
    Polar([f64; 2]),
}

impl ParamSpec {
    pub fn to_complex(self) -> Complex64 {
        match self {
            ParamSpec::Real(x) => Complex64::new(x, 0.0),
            ParamSpec::Polar([mag, phase]) => Complex64::from_polar(mag, phase),
        }
    }

    /// Parses a comma-separated list, each item a real (`0.5`) or a
    /// magnitude@phase pair (`0.5@1.5707`).
    pub fn parse_list(text: &str) -> Result<Vec<ParamSpec>> {
        text.split(',')
            .map(|item| {
                let item = item.trim();
                let parse = |s: &str| {
                    s.trim().parse::<f64>().map_err(|_| {
                        GtpError::InvalidConfig(format!("cannot parse number `{s}`"))
                    })
                };
                match item.split_once('@') {
                    None => Ok(ParamSpec::Real(parse(item)?)),
                    Some((mag, phase)) => Ok(ParamSpec::Polar([parse(mag)?, parse(phase)?])),
                }
            })
            .collect()
    }
}

/// Correction-phase selection: a named preset or explicit per-channel
/// `[θ_{Φ⁺}, θ_{Φ⁻}, θ_{Ψ⁺}, θ_{Ψ⁻}]` rows.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum PhaseSpec {
    Named(String),
    PerChannel(Vec<[f64; 4]>),
}

/// Acceptance selection: `"all"`, `"pqt"`, or explicit outcome labels.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum AcceptanceSpec {
    Named(String),
    List(Vec<String>),
}

/// Input selection: `"haar"`, `"ket:<bits>"`, or inline `[re, im]`
/// amplitude pairs.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum InputSpec {
    Text(String),
    Amplitudes(Vec<[f64; 2]>),
}

/// Plain-data description of one protocol run. All fields optional so a
/// partial config (e.g. from CLI flags) can overlay a base config; `n` and
/// `m` must be present after merging.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub n: Option<Vec<ParamSpec>>,
    #[serde(default)]
    pub m: Option<Vec<ParamSpec>>,
    #[serde(default)]
    pub phases: Option<PhaseSpec>,
    #[serde(default)]
    pub acceptance: Option<AcceptanceSpec>,
    #[serde(default)]
    pub input: Option<InputSpec>,
    #[serde(default)]
    pub samples: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Field-wise merge; `overlay` wins wherever it is set.
    pub fn merged(base: RunConfig, overlay: RunConfig) -> RunConfig {
        RunConfig {
            n: overlay.n.or(base.n),
            m: overlay.m.or(base.m),
            phases: overlay.phases.or(base.phases),
            acceptance: overlay.acceptance.or(base.acceptance),
            input: overlay.input.or(base.input),
            samples: overlay.samples.or(base.samples),
            seed: overlay.seed.or(base.seed),
        }
    }
}

/// Concrete input for one execution.
#[derive(Debug, Clone)]
pub enum RunInput {
    Haar,
    State(StateVector),
}

/// Fully validated run, ready for [`execute`].
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub params: MultiParams,
    pub acceptance: AcceptanceSet,
    pub input: RunInput,
    pub samples: u64,
    pub seed: u64,
    pub exact: bool,
    input_label: String,
    acceptance_labels: Vec<String>,
}

/// Validates a merged config into engine types.
///
/// `env_seed` is the process-environment fallback; precedence is
/// config seed > environment > [`DEFAULT_SEED`] (a CLI flag overlays the
/// config before this point, so flags rank highest overall).
pub fn resolve(config: &RunConfig, env_seed: Option<u64>, exact: bool) -> Result<ResolvedRun> {
    let n_specs = config
        .n
        .as_ref()
        .ok_or_else(|| GtpError::InvalidConfig("missing channel parameters `n`".into()))?;
    let m_specs = config
        .m
        .as_ref()
        .ok_or_else(|| GtpError::InvalidConfig("missing basis parameters `m`".into()))?;

    let n_list: Vec<ChannelParam> = n_specs
        .iter()
        .map(|spec| ChannelParam::new(spec.to_complex()))
        .collect::<Result<_>>()?;
    let m_list: Vec<BasisParam> = m_specs
        .iter()
        .map(|spec| BasisParam::new(spec.to_complex()))
        .collect::<Result<_>>()?;

    let params = match config.phases.as_ref() {
        None => MultiParams::with_optimal_phases(n_list, m_list)?,
        Some(PhaseSpec::Named(name)) => match name.as_str() {
            "optimal" => MultiParams::with_optimal_phases(n_list, m_list)?,
            "zero" => {
                let phases = vec![CorrectionPhases::zero(); n_list.len()];
                MultiParams::new(n_list, m_list, phases)?
            }
            "dephasing" => {
                let phases = n_list
                    .iter()
                    .map(|n| CorrectionPhases::dephasing(n.phase()))
                    .collect();
                MultiParams::new(n_list, m_list, phases)?
            }
            other => {
                return Err(GtpError::InvalidConfig(format!(
                    "unknown phase preset `{other}` (expected optimal, zero, \
                     dephasing, or explicit rows)"
                )))
            }
        },
        Some(PhaseSpec::PerChannel(rows)) => {
            if rows.len() != n_list.len() {
                return Err(GtpError::InvalidConfig(format!(
                    "{} phase rows for {} channels",
                    rows.len(),
                    n_list.len()
                )));
            }
            let phases = rows.iter().map(|row| CorrectionPhases::new(*row)).collect();
            MultiParams::new(n_list, m_list, phases)?
        }
    };
    let num_channels = params.num_channels();

    let (acceptance, acceptance_labels) = match config.acceptance.as_ref() {
        None => (AcceptanceSet::all(num_channels)?, vec!["all".to_string()]),
        Some(AcceptanceSpec::Named(name)) => match name.as_str() {
            "all" => (AcceptanceSet::all(num_channels)?, vec!["all".to_string()]),
            "pqt" => (AcceptanceSet::pqt(num_channels)?, vec!["pqt".to_string()]),
            other => (
                AcceptanceSet::from_outcomes(
                    num_channels,
                    &[other.parse::<JointOutcome>().map_err(|e| {
                        GtpError::InvalidConfig(format!("bad acceptance `{other}`: {e}"))
                    })?],
                )?,
                vec![other.to_string()],
            ),
        },
        Some(AcceptanceSpec::List(labels)) => {
            let outcomes: Vec<JointOutcome> = labels
                .iter()
                .map(|label| {
                    label.parse::<JointOutcome>().map_err(|e| {
                        GtpError::InvalidConfig(format!("bad acceptance `{label}`: {e}"))
                    })
                })
                .collect::<Result<_>>()?;
            (
                AcceptanceSet::from_outcomes(num_channels, &outcomes)?,
                labels.clone(),
            )
        }
    };

    let (input, input_label) = match config.input.as_ref() {
        None => (RunInput::Haar, "haar".to_string()),
        Some(InputSpec::Text(text)) if text == "haar" => (RunInput::Haar, "haar".to_string()),
        Some(InputSpec::Text(text)) => {
            let Some(bits) = text.strip_prefix("ket:") else {
                return Err(GtpError::InvalidConfig(format!(
                    "unknown input `{text}` (expected haar, ket:<bits>, or amplitudes)"
                )));
            };
            if bits.len() != num_channels {
                return Err(GtpError::InvalidConfig(format!(
                    "ket `{bits}` has {} bits but the run teleports {num_channels} qubit(s)",
                    bits.len()
                )));
            }
            (RunInput::State(StateVector::from_bitstring(bits)?), text.clone())
        }
        Some(InputSpec::Amplitudes(pairs)) => {
            let amps = pairs
                .iter()
                .map(|[re, im]| Complex64::new(*re, *im))
                .collect();
            let state = StateVector::from_amps(num_channels, amps)?;
            if !state.is_normalized(crate::linalg::NORM_TOL) {
                return Err(GtpError::NotNormalized {
                    norm_sq: state.norm_sq(),
                });
            }
            (RunInput::State(state), format!("amplitudes[{}]", pairs.len()))
        }
    };

    let samples = config.samples.unwrap_or(DEFAULT_SAMPLES);
    if matches!(input, RunInput::Haar) && !exact && samples < MIN_SAMPLES {
        return Err(GtpError::InvalidConfig(format!(
            "Monte-Carlo runs need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let seed = config.seed.or(env_seed).unwrap_or(DEFAULT_SEED);

    Ok(ResolvedRun {
        params,
        acceptance,
        input,
        samples,
        seed,
        exact,
        input_label,
        acceptance_labels,
    })
}

/// Echo of the resolved parameters, embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct ParamsEcho {
    pub n: Vec<[f64; 2]>,
    pub m: Vec<[f64; 2]>,
    pub phases: Vec<[f64; 4]>,
    pub acceptance: Vec<String>,
    pub input: String,
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A reported quantity: exact number or sampled estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Quantity {
    Exact(f64),
    Estimated(Estimate),
}

impl Quantity {
    pub fn mean(&self) -> f64 {
        match self {
            Quantity::Exact(x) => *x,
            Quantity::Estimated(e) => e.mean,
        }
    }

    pub fn std_error(&self) -> f64 {
        match self {
            Quantity::Exact(_) => 0.0,
            Quantity::Estimated(e) => e.std_error,
        }
    }
}

/// Per-outcome block of the run report.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeReport {
    pub outcome: JointOutcome,
    pub probability: Quantity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<Quantity>,
    pub accepted: bool,
}

/// Full run report; one schema for all three execution modes.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub params: ParamsEcho,
    pub per_outcome: Vec<OutcomeReport>,
    pub p_suc: Quantity,
    pub c_pro: Quantity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_pro: Option<Quantity>,
    pub degenerate: bool,
}

fn params_echo(run: &ResolvedRun, mode: &'static str) -> ParamsEcho {
    let polar = |c: Complex64| [c.norm(), if c.norm() == 0.0 { 0.0 } else { c.arg() }];
    ParamsEcho {
        n: run.params.n_list().iter().map(|p| polar(p.value())).collect(),
        m: run.params.m_list().iter().map(|p| polar(p.value())).collect(),
        phases: (0..run.params.num_channels())
            .map(|k| run.params.phases(k).thetas())
            .collect(),
        acceptance: run.acceptance_labels.clone(),
        input: run.input_label.clone(),
        mode,
        samples: (mode == "monte-carlo").then_some(run.samples),
        seed: (mode == "monte-carlo").then_some(run.seed),
    }
}

fn from_protocol_report(run: &ResolvedRun, mode: &'static str, report: ProtocolReport) -> RunReport {
    RunReport {
        params: params_echo(run, mode),
        per_outcome: report
            .per_outcome
            .into_iter()
            .map(|entry| OutcomeReport {
                outcome: entry.outcome,
                probability: Quantity::Exact(entry.probability),
                fidelity: entry.fidelity.map(Quantity::Exact),
                accepted: entry.accepted,
            })
            .collect(),
        p_suc: Quantity::Exact(report.p_suc),
        c_pro: Quantity::Exact(report.c_pro),
        f_pro: report.f_pro.map(Quantity::Exact),
        degenerate: report.degenerate,
    }
}

fn from_mc_averages(run: &ResolvedRun, averages: McAverages) -> RunReport {
    RunReport {
        params: params_echo(run, "monte-carlo"),
        per_outcome: averages
            .per_outcome
            .into_iter()
            .enumerate()
            .map(|(index, entry)| OutcomeReport {
                outcome: entry.outcome,
                probability: Quantity::Estimated(entry.avg_prob),
                fidelity: entry.fidelity.map(Quantity::Estimated),
                accepted: run.acceptance.contains_index(index),
            })
            .collect(),
        p_suc: Quantity::Estimated(averages.p_suc),
        c_pro: Quantity::Estimated(averages.c_pro),
        f_pro: averages.f_pro.map(Quantity::Estimated),
        degenerate: averages.degenerate,
    }
}

/// Executes a resolved run in its selected mode.
pub fn execute(run: &ResolvedRun) -> Result<RunReport> {
    match &run.input {
        RunInput::State(state) => {
            let records = run_multi(state, &run.params)?;
            let report = joint_report(&records, &run.acceptance)?;
            Ok(from_protocol_report(run, "deterministic", report))
        }
        RunInput::Haar if run.exact => {
            let report = haar_report(&run.params, &run.acceptance)?;
            Ok(from_protocol_report(run, "exact", report))
        }
        RunInput::Haar => {
            let averages = mc_protocol_average(
                &run.params,
                &run.acceptance,
                run.samples,
                &RandomStream::new(run.seed, 0),
            )?;
            Ok(from_mc_averages(run, averages))
        }
    }
}

/// Renders a report as pretty JSON with a trailing newline; identical
/// reports render to identical bytes.
pub fn render_json(report: &RunReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}
