//! Simulator and verification suite for a teleportation protocol over
//! partially entangled channels with generalized measurement bases.
//!
//! The crate provides four independent routes to the same physical
//! quantities and a verification harness that cross-checks them:
//!
//! * [`single`] / [`multi`] — exact state-vector execution of the protocol
//!   on one or several channels,
//! * [`analytic`] — closed-form input-averaged formulas,
//! * [`analytic::TransferOperator`] — an independent operator-level oracle
//!   for Haar averages,
//! * [`sampler`] — seeded Monte-Carlo estimation over Haar-random inputs.

pub mod analytic;
pub mod error;
pub mod linalg;
pub mod multi;
pub mod optimize;
pub mod outcome;
pub mod run;
pub mod sampler;
pub mod single;
pub mod sweep;
pub mod verify;

pub use error::{GtpError, Result};
pub use linalg::{Operator2x2, StateVector, AMP_TOL, NORM_TOL, NULL_CUTOFF};
pub use multi::{joint_report, run_multi, JointRecord, MultiParams};
pub use outcome::{AcceptanceSet, JointOutcome, OutcomeKind, MAX_CHANNELS};
pub use sampler::{
    haar_state, mc_protocol_average, Estimate, McAverages, OutcomeEstimates, RandomStream,
    MC_SHARDS,
};
pub use optimize::{optimize_multi, optimize_single, MultiOptimizeResult, OptimizeResult};
pub use run::{execute, render_json, resolve, ResolvedRun, RunConfig, RunReport};
pub use single::{
    bell_basis, channel_state, concurrence, correction_operator, phase_mismatch, report,
    run_single, BasisParam, ChannelParam, CorrectionPhases, OutcomeRecord, OutcomeSummary,
    ProtocolReport,
};
pub use sweep::{render_csv, sweep_rows, GridRange, SweepOutput, SweepRow, SweepSpec, CSV_HEADER};
pub use verify::{run_all, run_criterion, CriterionReport, GridKind, VerifyConfig, VerifyReport};
