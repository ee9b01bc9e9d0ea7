//! Birth-death chain of a device queue with capacity `M`.

use ndarray::{Array1, Array2};

use crate::error::{invalid, Error, Result};

/// Transition matrix of the queue-length chain and the inputs that built it.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    pub kernel: Array2<f64>,
    pub p_a: f64,
    pub p_b: f64,
    pub p_s: f64,
    pub queue_size: usize,
}

impl MarkovModel {
    pub fn states(&self) -> usize {
        self.queue_size + 1
    }

    pub fn up(&self, j: usize) -> f64 {
        self.kernel[[j, j + 1]]
    }

    pub fn down(&self, j: usize) -> f64 {
        self.kernel[[j, j - 1]]
    }
}

fn check_probability(field: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(field, format!("probability out of range [0, 1] (got {v})")))
    }
}

/// Builds the `(M+1) x (M+1)` tridiagonal kernel.
///
/// An empty queue only receives arrivals. A nonempty queue transmits with
/// probability `1 - p_b`, succeeds with `p_s`, and a full queue drops
/// arrivals that find no departure.
pub fn transition_matrix(p_a: f64, p_b: f64, p_s: f64, queue_size: usize) -> Result<MarkovModel> {
    check_probability("p_a", p_a)?;
    check_probability("p_b", p_b)?;
    check_probability("p_s", p_s)?;
    if queue_size == 0 {
        return Err(invalid("queue_size", "must be at least 1"));
    }
    let m = queue_size;
    let served = (1.0 - p_b) * p_s;
    let down = (1.0 - p_a) * served;
    let up = p_a * (1.0 - p_b) * (1.0 - p_s) + p_a * p_b;
    let stay = (1.0 - p_a) * p_b + (1.0 - p_a) * (1.0 - p_b) * (1.0 - p_s) + p_a * served;

    let mut k = Array2::zeros((m + 1, m + 1));
    k[[0, 0]] = 1.0 - p_a;
    k[[0, 1]] = p_a;
    for j in 1..m {
        k[[j, j - 1]] = down;
        k[[j, j]] = stay;
        k[[j, j + 1]] = up;
    }
    k[[m, m - 1]] = down;
    k[[m, m]] = 1.0 - down;
    Ok(MarkovModel {
        kernel: k,
        p_a,
        p_b,
        p_s,
        queue_size,
    })
}

/// Stationary distribution of the queue and the probability of being active.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub pi: Array1<f64>,
    pub pi_a: f64,
}

/// Product-form stationary law, `pi_i = pi_0 prod_{j<i} q_{j,j+1} / q_{j+1,j}`.
///
/// Weights are accumulated in log space so long queues with large ratios
/// stay finite.
pub fn steady_state(model: &MarkovModel) -> Result<SteadyState> {
    let m = model.queue_size;
    if model.p_a == 0.0 {
        let mut pi = Array1::zeros(m + 1);
        pi[0] = 1.0;
        return Ok(SteadyState { pi, pi_a: 0.0 });
    }
    let mut log_w = vec![0.0; m + 1];
    for i in 1..=m {
        let up = model.up(i - 1);
        let down = model.down(i);
        if down <= 0.0 {
            return Err(Error::DegenerateChain);
        }
        log_w[i] = log_w[i - 1] + up.ln() - down.ln();
    }
    let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    let pi = Array1::from_iter(w.iter().map(|x| x / total));
    let pi_a = 1.0 - pi[0];
    Ok(SteadyState { pi, pi_a })
}

/// Probability that a queue is nonempty in steady state.
///
/// When the chain cannot drain (`(1-p_a)(1-p_b)p_s = 0`) with arrivals
/// present, every queue ends up nonempty and the limit `1` is returned.
pub fn active_probability(p_a: f64, p_b: f64, p_s: f64, queue_size: usize) -> Result<f64> {
    let model = transition_matrix(p_a, p_b, p_s, queue_size)?;
    match steady_state(&model) {
        Ok(ss) => Ok(ss.pi_a),
        Err(Error::DegenerateChain) => Ok(1.0),
        Err(e) => Err(e),
    }
}
