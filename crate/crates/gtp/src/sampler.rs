//! Seeded Monte-Carlo estimation of the input-averaged protocol quantities.
//!
//! Reproducibility contract: a (seed, stream_id) pair pins the entire sample
//! sequence bit-for-bit on every platform. Streams are ChaCha12 counters and
//! normals come from the ziggurat sampler in rand_distr, both pure integer /
//! IEEE-754 code pinned by the lockfile. Averages are accumulated per shard
//! with compensated summation and the [`MC_SHARDS`] shard totals are merged
//! in ascending shard order, so the result does not depend on how the shards
//! are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use num_complex::Complex64;

use crate::error::{GtpError, Result};
use crate::linalg::StateVector;
use crate::multi::{run_multi, MultiParams};
use crate::outcome::{AcceptanceSet, JointOutcome};

/// Fixed shard count of every Monte-Carlo run.
pub const MC_SHARDS: u64 = 8;

/// Deterministic random source: `seed` selects the key, `stream_id` an
/// independent substream. Shard s of a run on stream t draws from stream
/// t·MC_SHARDS + s, so distinct base streams never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    fn shard(&self, shard: u64) -> RandomStream {
        debug_assert!(shard < MC_SHARDS);
        RandomStream::new(self.seed, self.stream_id * MC_SHARDS + shard)
    }
}

/// Draws a Haar-random pure state on `num_qubits` qubits: 2^k independent
/// standard complex Gaussian amplitudes, normalized.
pub fn haar_state<R: Rng>(num_qubits: usize, rng: &mut R) -> StateVector {
    assert!(num_qubits >= 1, "register needs at least one qubit");
    loop {
        let amps: Vec<Complex64> = (0..1usize << num_qubits)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        let state = StateVector::from_amps(num_qubits, amps).expect("fixed shape");
        // A zero draw has measure zero but would make normalize fail.
        if let Ok(normalized) = state.normalize() {
            return normalized;
        }
    }
}

/// Sample mean with its standard error (sample standard deviation / √n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Accumulates paired samples (x, y) with enough cross terms for mean,
/// variance and the delta-method error of the ratio ȳ/x̄.
#[derive(Debug, Clone, Copy, Default)]
struct PairStats {
    count: u64,
    sum_x: KahanSum,
    sum_y: KahanSum,
    sum_xx: KahanSum,
    sum_yy: KahanSum,
    sum_xy: KahanSum,
}

impl PairStats {
    fn add(&mut self, x: f64, y: f64) {
        self.count += 1;
        self.sum_x.add(x);
        self.sum_y.add(y);
        self.sum_xx.add(x * x);
        self.sum_yy.add(y * y);
        self.sum_xy.add(x * y);
    }

    fn merge(&mut self, other: &PairStats) {
        self.count += other.count;
        self.sum_x.add(other.sum_x.value());
        self.sum_y.add(other.sum_y.value());
        self.sum_xx.add(other.sum_xx.value());
        self.sum_yy.add(other.sum_yy.value());
        self.sum_xy.add(other.sum_xy.value());
    }

    fn variance(sum: f64, sum_sq: f64, n: f64) -> f64 {
        ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0)
    }

    fn estimate_x(&self) -> Estimate {
        let n = self.count as f64;
        let var = Self::variance(self.sum_x.value(), self.sum_xx.value(), n);
        Estimate {
            mean: self.sum_x.value() / n,
            std_error: (var / n).sqrt(),
            samples: self.count,
        }
    }

    fn estimate_y(&self) -> Estimate {
        let n = self.count as f64;
        let var = Self::variance(self.sum_y.value(), self.sum_yy.value(), n);
        Estimate {
            mean: self.sum_y.value() / n,
            std_error: (var / n).sqrt(),
            samples: self.count,
        }
    }

    /// Ratio ȳ/x̄ with the first-order propagated standard error; `None`
    /// when the denominator is not resolved away from zero (x̄ ≤ 10·SE(x̄)).
    fn estimate_ratio(&self) -> Option<Estimate> {
        let x = self.estimate_x();
        if x.mean <= 10.0 * x.std_error {
            return None;
        }
        let n = self.count as f64;
        let mean_x = x.mean;
        let mean_y = self.sum_y.value() / n;
        let ratio = mean_y / mean_x;
        let var_x = Self::variance(self.sum_x.value(), self.sum_xx.value(), n);
        let var_y = Self::variance(self.sum_y.value(), self.sum_yy.value(), n);
        let cov = (self.sum_xy.value() - self.sum_x.value() * self.sum_y.value() / n) / (n - 1.0);
        let var_ratio = (ratio * ratio * var_x - 2.0 * ratio * cov + var_y) / (n * mean_x * mean_x);
        Some(Estimate {
            mean: ratio,
            std_error: var_ratio.max(0.0).sqrt(),
            samples: self.count,
        })
    }
}

/// Monte-Carlo estimates of one outcome's averaged probability and ⟨P·F⟩.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeEstimates {
    pub outcome: JointOutcome,
    pub avg_prob: Estimate,
    pub avg_pf: Estimate,
    /// Conditional fidelity ⟨P·F⟩/⟨P⟩; `None` for unresolved branches.
    pub fidelity: Option<Estimate>,
}

/// Monte-Carlo protocol averages over Haar-random inputs.
#[derive(Debug, Clone, Serialize)]
pub struct McAverages {
    pub p_suc: Estimate,
    pub c_pro: Estimate,
    /// Ratio estimate c_pro/p_suc; `None` when the run is degenerate.
    pub f_pro: Option<Estimate>,
    pub degenerate: bool,
    pub per_outcome: Vec<OutcomeEstimates>,
}

/// Runs `samples` protocol executions on Haar-random inputs and averages the
/// per-outcome and post-selected quantities. Identical arguments reproduce
/// identical bits.
pub fn mc_protocol_average(
    params: &MultiParams,
    acceptance: &AcceptanceSet,
    samples: u64,
    stream: &RandomStream,
) -> Result<McAverages> {
    if samples < 2 {
        return Err(GtpError::InvalidConfig(format!(
            "at least 2 samples required, got {samples}"
        )));
    }
    if acceptance.num_channels() != params.num_channels() {
        return Err(GtpError::ChannelCountMismatch {
            left: acceptance.num_channels(),
            right: params.num_channels(),
        });
    }

    let num_channels = params.num_channels();
    let num_outcomes = 1usize << (2 * num_channels);

    let mut outcome_stats = vec![PairStats::default(); num_outcomes];
    let mut selected_stats = PairStats::default();

    for shard in 0..MC_SHARDS {
        let shard_samples = samples / MC_SHARDS + u64::from(shard < samples % MC_SHARDS);
        let mut shard_outcomes = vec![PairStats::default(); num_outcomes];
        let mut shard_selected = PairStats::default();
        let mut rng = stream.shard(shard).rng();

        for _ in 0..shard_samples {
            let input = haar_state(num_channels, &mut rng);
            let records = run_multi(&input, params)?;
            let mut p_suc = 0.0;
            let mut c_pro = 0.0;
            for (index, record) in records.iter().enumerate() {
                let p = record.probability;
                let pf = p * record.fidelity.unwrap_or(0.0);
                shard_outcomes[index].add(p, pf);
                if acceptance.contains_index(index) {
                    p_suc += p;
                    c_pro += pf;
                }
            }
            shard_selected.add(p_suc, c_pro);
        }

        for (total, shard_acc) in outcome_stats.iter_mut().zip(&shard_outcomes) {
            total.merge(shard_acc);
        }
        selected_stats.merge(&shard_selected);
    }

    let per_outcome = outcome_stats
        .iter()
        .enumerate()
        .map(|(index, stats)| OutcomeEstimates {
            outcome: JointOutcome::from_index(num_channels, index).expect("index in range"),
            avg_prob: stats.estimate_x(),
            avg_pf: stats.estimate_y(),
            fidelity: stats.estimate_ratio(),
        })
        .collect();

    let f_pro = selected_stats.estimate_ratio();
    Ok(McAverages {
        p_suc: selected_stats.estimate_x(),
        c_pro: selected_stats.estimate_y(),
        degenerate: f_pro.is_none(),
        f_pro,
        per_outcome,
    })
}
