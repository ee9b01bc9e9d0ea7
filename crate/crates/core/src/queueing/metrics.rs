//! Steady-state performance of the Geo/Geo/1/M device queue.

use crate::error::{invalid, Error, Result};
use crate::queueing::markov::SteadyState;

/// Service rate per frame, `(1 - p_b) p_s`.
pub fn throughput(p_b: f64, p_s: f64) -> f64 {
    (1.0 - p_b) * p_s
}

/// `p_a > T_h`: arrivals outpace service and every queue fills up.
pub fn is_saturated(p_a: f64, throughput: f64) -> bool {
    p_a > throughput
}

/// Mean of the geometric number of access frames per packet, `1 / T_h`.
pub fn avg_transmissions(throughput: f64) -> Result<f64> {
    if throughput == 0.0 {
        return Err(Error::ZeroThroughput);
    }
    if !(throughput > 0.0 && throughput <= 1.0) {
        return Err(invalid("throughput", format!("must lie in (0, 1] (got {throughput})")));
    }
    Ok(1.0 / throughput)
}

/// `sum_k k pi_k`.
pub fn avg_queue(ss: &SteadyState) -> f64 {
    ss.pi.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
}

/// Queueing plus transmission delay in frames, `(Q + 1) / T_h`.
pub fn avg_delay(ss: &SteadyState, throughput: f64) -> Result<f64> {
    let n_t = avg_transmissions(throughput)?;
    Ok(avg_queue(ss) * n_t + n_t)
}

/// Everything derived from a steady state and a success probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueMetrics {
    pub throughput: f64,
    pub avg_transmissions: f64,
    pub avg_queue: f64,
    pub avg_delay: f64,
    pub saturated: bool,
}

impl QueueMetrics {
    pub fn evaluate(ss: &SteadyState, p_a: f64, p_b: f64, p_s: f64) -> Result<Self> {
        let t_h = throughput(p_b, p_s);
        Ok(Self {
            throughput: t_h,
            avg_transmissions: avg_transmissions(t_h)?,
            avg_queue: avg_queue(ss),
            avg_delay: avg_delay(ss, t_h)?,
            saturated: is_saturated(p_a, t_h),
        })
    }
}
