//! Queue-length Markov chain, success probability and performance metrics.

pub mod markov;
pub mod metrics;
pub mod special;
pub mod success;

pub use markov::{active_probability, steady_state, transition_matrix, MarkovModel, SteadyState};
pub use metrics::{
    avg_delay, avg_queue, avg_transmissions, is_saturated, throughput, QueueMetrics,
};
pub use special::{g_closed_form, q_function, sinr_tail_integral};
pub use success::{
    fixed_point_ps_pia, sinr_success_probability, success_probability, FixedPoint,
    FixedPointOptions,
};
