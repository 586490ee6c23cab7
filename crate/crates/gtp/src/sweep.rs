//! Grid sweep of the matched-basis protocol under basis perturbation.
//!
//! Each row evaluates the closed-form attributes of the protocol at channel
//! parameter `n` and basis parameter `m = n − δ`. Output is a CSV table with
//! fixed 6-decimal formatting so identical specs produce identical bytes.

use serde::Serialize;

use crate::analytic::pqt_attributes;
use crate::error::{GtpError, Result};

/// Column header of the sweep CSV.
pub const CSV_HEADER: &str = "n,delta,f_pqt,p_suc,c_pqt";

/// Inclusive arithmetic grid `start, start+step, …, stop`.
///
/// Accumulated floating-point drift is snapped away: values within a
/// relative whisker of the endpoint collapse onto `stop`, and values within
/// 1e-12 of zero collapse onto `0.0`, so grid points like `δ = 0` are exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridRange {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(GtpError::InvalidConfig(
                "grid bounds and step must be finite".into(),
            ));
        }
        if step <= 0.0 {
            return Err(GtpError::InvalidConfig(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if stop < start {
            return Err(GtpError::InvalidConfig(format!(
                "grid stop {stop} is below start {start}"
            )));
        }
        Ok(Self { start, stop, step })
    }

    /// Materializes the grid points in ascending order.
    pub fn values(&self) -> Vec<f64> {
        let whisker = self.step * 1e-9;
        let mut points = Vec::new();
        for i in 0.. {
            let mut v = self.start + i as f64 * self.step;
            if v > self.stop + whisker {
                break;
            }
            if v.abs() <= 1e-12 {
                v = 0.0;
            } else if (v - self.stop).abs() <= whisker {
                v = self.stop;
            }
            points.push(v);
        }
        points
    }
}

/// Sweep request: a channel grid for `n` and a perturbation grid for
/// `δ = n − m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSpec {
    pub n_grid: GridRange,
    pub delta_grid: GridRange,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            n_grid: GridRange {
                start: 0.05,
                stop: 1.0,
                step: 0.05,
            },
            delta_grid: GridRange {
                start: -0.3,
                stop: 0.3,
                step: 0.025,
            },
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: f64,
    pub delta: f64,
    pub f_pqt: f64,
    pub p_suc: f64,
    pub c_pqt: f64,
}

/// Rows in grid order plus one warning per skipped grid point.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

/// Evaluates the sweep. Grid points whose derived basis parameter
/// `m = n − δ` falls outside (0, 1], or where the success probability
/// vanishes, are skipped with a warning instead of producing a row.
pub fn sweep_rows(spec: &SweepSpec) -> Result<SweepOutput> {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for n in spec.n_grid.values() {
        if !(0.0..=1.0).contains(&n) {
            return Err(GtpError::InvalidConfig(format!(
                "channel grid value {n} outside [0, 1]"
            )));
        }
        for delta in spec.delta_grid.values() {
            let mut m = n - delta;
            if m.abs() <= 1e-12 {
                m = 0.0;
            } else if (m - 1.0).abs() <= 1e-12 {
                m = 1.0;
            }
            if m <= 0.0 || m > 1.0 {
                warnings.push(format!(
                    "skipping n={n:.6}, delta={delta:.6}: basis parameter m={m:.6} outside (0, 1]"
                ));
                continue;
            }
            let attrs = pqt_attributes(n, m);
            let Some(f_pqt) = attrs.f_pqt else {
                warnings.push(format!(
                    "skipping n={n:.6}, delta={delta:.6}: success probability vanishes"
                ));
                continue;
            };
            rows.push(SweepRow {
                n,
                delta,
                f_pqt,
                p_suc: attrs.p_suc,
                c_pqt: attrs.c_pqt,
            });
        }
    }
    Ok(SweepOutput { rows, warnings })
}

/// Renders rows as CSV: header line plus one `{:.6}`-formatted row per grid
/// point, '\n' line endings throughout.
pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            row.n, row.delta, row.f_pqt, row.p_suc, row.c_pqt
        ));
    }
    out
}
