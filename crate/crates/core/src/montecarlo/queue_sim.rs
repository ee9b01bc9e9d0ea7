//! Frame-by-frame simulation of a single device queue.

use std::collections::VecDeque;

use rand::Rng;

use crate::error::{invalid, Result};

use super::stream_rng;

/// Outcome of [`simulate_queue`].
#[derive(Debug, Clone, PartialEq)]
pub struct QueueSimulation {
    /// Fraction of frames that start in each queue length.
    pub occupancy: Vec<f64>,
    pub mean_queue: f64,
    /// Frames from arrival to successful departure, per delivered packet.
    pub delays: Vec<u64>,
    /// Frames each delivered packet spent at the head of the queue.
    pub service_frames: Vec<u64>,
    pub arrivals: u64,
    pub dropped: u64,
}

impl QueueSimulation {
    pub fn mean_delay(&self) -> f64 {
        mean(&self.delays)
    }

    pub fn mean_service_frames(&self) -> f64 {
        mean(&self.service_frames)
    }
}

fn mean(xs: &[u64]) -> f64 {
    xs.iter().map(|&x| x as f64).sum::<f64>() / xs.len() as f64
}

/// Fewest frames accepted by [`simulate_queue`].
pub const MIN_FRAMES: u64 = 100_000;

/// Simulates `n_frames` frames of the queue starting empty.
///
/// In each frame a nonempty queue transmits its head packet with
/// probability `1 - p_b`, which succeeds with probability `p_s`; a packet
/// then arrives with probability `p_a` and is dropped if the queue is still
/// full. A packet that arrives in a frame is first eligible in the next.
pub fn simulate_queue(
    p_a: f64,
    p_b: f64,
    p_s: f64,
    queue_size: usize,
    n_frames: u64,
    seed: u64,
) -> Result<QueueSimulation> {
    for (name, v) in [("p_a", p_a), ("p_b", p_b), ("p_s", p_s)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(invalid(name, format!("probability out of range [0, 1] (got {v})")));
        }
    }
    if queue_size == 0 {
        return Err(invalid("queue_size", "must be at least 1"));
    }
    if n_frames < MIN_FRAMES {
        return Err(invalid("n_frames", format!("need at least {MIN_FRAMES} frames (got {n_frames})")));
    }
    let mut rng = stream_rng(seed, 0);
    let mut queue: VecDeque<u64> = VecDeque::with_capacity(queue_size);
    let mut head_since = 0u64;
    let mut hist = vec![0u64; queue_size + 1];
    let mut out = QueueSimulation {
        occupancy: Vec::new(),
        mean_queue: 0.0,
        delays: Vec::new(),
        service_frames: Vec::new(),
        arrivals: 0,
        dropped: 0,
    };
    for frame in 0..n_frames {
        hist[queue.len()] += 1;
        if !queue.is_empty() && rng.random::<f64>() >= p_b && rng.random::<f64>() < p_s {
            let born = queue.pop_front().expect("queue is nonempty");
            out.delays.push(frame - born);
            out.service_frames.push(frame - head_since + 1);
            head_since = frame + 1;
        }
        if rng.random::<f64>() < p_a {
            out.arrivals += 1;
            if queue.len() < queue_size {
                if queue.is_empty() {
                    head_since = frame + 1;
                }
                queue.push_back(frame);
            } else {
                out.dropped += 1;
            }
        }
    }
    let total = n_frames as f64;
    out.occupancy = hist.iter().map(|&c| c as f64 / total).collect();
    out.mean_queue = out.occupancy.iter().enumerate().map(|(k, f)| k as f64 * f).sum();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_traffic_stays_empty() {
        let s = simulate_queue(0.0, 0.1, 0.5, 10, MIN_FRAMES, 1).unwrap();
        assert_eq!(s.occupancy[0], 1.0);
        assert_eq!(s.mean_queue, 0.0);
        assert!(s.delays.is_empty());
    }

    #[test]
    fn always_served_queue_has_unit_delay() {
        let s = simulate_queue(0.3, 0.0, 1.0, 5, MIN_FRAMES, 2).unwrap();
        assert!(s.delays.iter().all(|&d| d == 1));
        assert!(s.service_frames.iter().all(|&d| d == 1));
        assert_eq!(s.dropped, 0);
    }

    #[test]
    fn rejects_short_runs() {
        assert!(simulate_queue(0.1, 0.1, 0.5, 10, 10, 1).is_err());
    }
}
