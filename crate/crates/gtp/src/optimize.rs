//! Derivative-free maximization of the all-accept protocol efficiency over
//! the measurement-basis parameter and the four correction phase mismatches.
//!
//! The search is a cyclic coordinate scan with grid-then-refine resolution:
//! a full-domain scan at step 0.05, then two refinement passes shrinking the
//! step ×0.1 each time (0.005, 0.0005) around the running maximizer. The
//! optimizer treats the objective as a black box; expected maxima are only
//! asserted by the verification suite, never assumed here.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::c_pro_all_accept;
use crate::error::{GtpError, Result};

/// Initial scan step; each refinement divides it by [`REFINE_FACTOR`].
const INITIAL_STEP: f64 = 0.05;
const REFINE_FACTOR: f64 = 10.0;
const REFINEMENTS: usize = 2;
/// Objective spread below which the maximizer is reported as degenerate.
const FLAT_OBJECTIVE: f64 = 1e-12;

/// Result of one single-channel search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub n: f64,
    pub m_star: f64,
    pub xi_star: [f64; 4],
    pub c_channel: f64,
    /// True when the objective is flat over the whole initial scan, i.e.
    /// the reported maximizer is arbitrary.
    pub degenerate: bool,
}

/// Result of an independent per-channel search over several channels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiOptimizeResult {
    pub channels: Vec<OptimizeResult>,
    pub c_channel: f64,
}

struct Coordinate {
    lo: f64,
    hi: f64,
}

const M_COORD: Coordinate = Coordinate { lo: 0.0, hi: 1.0 };
const XI_COORD: Coordinate = Coordinate { lo: 0.0, hi: TAU };

fn scan_coordinate<F: Fn(f64) -> f64>(
    coord: &Coordinate,
    center: f64,
    radius: Option<f64>,
    step: f64,
    objective: F,
) -> (f64, f64, f64) {
    let (lo, hi) = match radius {
        Some(r) => ((center - r).max(coord.lo), (center + r).min(coord.hi)),
        None => (coord.lo, coord.hi),
    };
    let mut best_x = center;
    let mut best_v = objective(center);
    let mut min_v = best_v;
    let mut i = 0u64;
    loop {
        let x = lo + i as f64 * step;
        // Half-open at 2π so phases stay canonical; closed elsewhere.
        let open_end = (coord.hi - TAU).abs() < 1e-12 && radius.is_none();
        if x > hi + step * 1e-9 || (open_end && x >= coord.hi) {
            break;
        }
        let x = if (x - hi).abs() <= step * 1e-9 { hi } else { x };
        let v = objective(x);
        if v > best_v {
            best_v = v;
            best_x = x;
        }
        if v < min_v {
            min_v = v;
        }
        i += 1;
    }
    (best_x, best_v, best_v - min_v)
}

/// Maximizes the averaged all-accept efficiency for channel magnitude `n`
/// over the basis magnitude `m ∈ [0, 1]` and the four outcome phase
/// mismatches `ξ_j ∈ [0, 2π)`.
pub fn optimize_single(n: f64) -> Result<OptimizeResult> {
    if !n.is_finite() || !(0.0..=1.0).contains(&n) {
        return Err(GtpError::InvalidConfig(format!(
            "channel magnitude {n} outside [0, 1]"
        )));
    }
    let nc = Complex64::new(n, 0.0);
    let objective =
        |m: f64, xi: &[f64; 4]| c_pro_all_accept(nc, Complex64::new(m, 0.0), xi);

    let mut m = 0.5;
    let mut xi = [0.0f64; 4];
    let mut best = objective(m, &xi);
    let mut spread: f64 = 0.0;

    let mut step = INITIAL_STEP;
    for stage in 0..=REFINEMENTS {
        let radius = if stage == 0 {
            None
        } else {
            Some(step * REFINE_FACTOR)
        };
        // Cyclic scans until no coordinate moves at this resolution.
        loop {
            let mut moved = false;
            let (new_m, v_m, spread_m) = scan_coordinate(
                &M_COORD,
                m,
                radius,
                step,
                |x| objective(x, &xi),
            );
            if v_m > best {
                best = v_m;
                moved |= new_m != m;
                m = new_m;
            }
            spread = spread.max(spread_m);
            for j in 0..4 {
                let (new_xi, v_xi, spread_xi) = scan_coordinate(&XI_COORD, xi[j], radius, step, |x| {
                    let mut trial = xi;
                    trial[j] = x;
                    objective(m, &trial)
                });
                if v_xi > best {
                    best = v_xi;
                    moved |= new_xi != xi[j];
                    xi[j] = new_xi;
                }
                spread = spread.max(spread_xi);
            }
            if !moved {
                break;
            }
        }
        step /= REFINE_FACTOR;
    }

    Ok(OptimizeResult {
        n,
        m_star: m,
        xi_star: xi,
        c_channel: best,
        degenerate: spread < FLAT_OBJECTIVE,
    })
}

/// Optimizes several channels independently and combines the per-channel
/// maxima into the joint efficiency (1 + ∏(1 + 2χ_k)) / (2^N + 1), where
/// χ_k is the channel-k cosine-weighted concurrence product at its maximum.
pub fn optimize_multi(n_list: &[f64]) -> Result<MultiOptimizeResult> {
    if n_list.is_empty() || n_list.len() > crate::outcome::MAX_CHANNELS {
        return Err(GtpError::UnsupportedChannelCount(n_list.len()));
    }
    let channels: Vec<OptimizeResult> = n_list
        .iter()
        .map(|&n| optimize_single(n))
        .collect::<Result<_>>()?;
    let count = channels.len() as u32;
    // A single channel satisfies c = (2/3)(1 + χ), so its joint-product
    // factor is 1 + 2χ = 3c − 1 ≥ 0 and the product is maximized exactly
    // when every factor is.
    let product: f64 = channels
        .iter()
        .map(|ch| 3.0 * ch.c_channel - 1.0)
        .product();
    let c_channel = (1.0 + product) / (2f64.powi(count as i32) + 1.0);
    Ok(MultiOptimizeResult {
        channels,
        c_channel,
    })
}
