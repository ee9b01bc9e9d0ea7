//! Brute-force estimators that check the analytical formulas.
//!
//! Every estimator is deterministic given its seed. Replication `k` draws
//! from ChaCha stream `k` of the seeded generator, and per-replication
//! values are reduced in index order, so serial and parallel runs agree
//! bit for bit.

mod queue_sim;
mod sinr;
mod spatial;
mod transport;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use queue_sim::{simulate_queue, QueueSimulation, MIN_FRAMES};
pub use sinr::{
    estimate_interference, estimate_p_theta, interference_tail_bound, sample_active_count_mixture,
    SinrScenario,
};
pub use spatial::{
    empirical_active_count, empirical_distance_cdf, ks_statistic, sample_ppp, ActiveCountReport, DistanceCdfReport,
    NetworkSample, Point, MIN_ACTIVE_CELLS, MIN_DISTANCE_SAMPLES,
};
pub use transport::{particle_transport, ParticleHistogram};

/// Generator for replication `stream` of the experiment seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl McEstimate {
    /// Mean and standard error of `values`, summed in order.
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, se: f64::NAN, n };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, se: f64::NAN, n };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Self {
            mean,
            se: (var / n as f64).sqrt(),
            n,
        }
    }

    /// `|mean - target| / se`; zero when both the gap and the error vanish.
    pub fn z_score(&self, target: f64) -> f64 {
        let gap = (self.mean - target).abs();
        if gap == 0.0 {
            0.0
        } else {
            gap / self.se
        }
    }
}

/// Total-variation distance between two probability vectors; missing
/// entries count as zero.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    0.5 * (0..n)
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}
