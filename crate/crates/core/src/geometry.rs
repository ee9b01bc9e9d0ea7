//! Closed-form stochastic geometry of the BS and device point processes.

use std::f64::consts::PI;

use ndarray::Array1;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::model::{check_shape, Field, Grid, SystemParams};

/// `P[r <= r0]` for the distance from a device to its nearest BS.
pub fn nearest_distance_cdf(p: &SystemParams, r0: f64) -> Result<f64> {
    if !(r0 >= 0.0) {
        return Err(invalid("r0", format!("distance must be nonnegative (got {r0})")));
    }
    Ok(-(-p.lambda_s * PI * r0 * r0).exp_m1())
}

/// Density of the nearest-BS distance, `2 pi lambda_s r exp(-lambda_s pi r^2)`.
pub fn nearest_distance_pdf(p: &SystemParams, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(invalid("r", format!("distance must be nonnegative (got {r})")));
    }
    Ok(2.0 * PI * p.lambda_s * r * (-p.lambda_s * PI * r * r).exp())
}

/// Gamma approximation of the Voronoi cell area: shape `c`, rate `lambda_s c`.
pub fn cell_area_pdf(p: &SystemParams, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(invalid("v", format!("area must be positive (got {v})")));
    }
    let c = p.gamma_shape;
    let rate = p.lambda_s * c;
    let log = (c - 1.0) * v.ln() + c * rate.ln() - ln_gamma(c) - rate * v;
    Ok(log.exp())
}

/// Probability that `k` devices of one channel are active in a cell.
///
/// Negative-binomial mixture of a Poisson count over the gamma cell area,
/// evaluated in log space.
pub fn active_count_pmf(p: &SystemParams, pi_a: f64, k: usize) -> f64 {
    let lambda_a = p.active_density(pi_a);
    if lambda_a <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let c = p.gamma_shape;
    let kc = c * p.lambda_s;
    let kf = k as f64;
    let log = ln_gamma(kf + c) - ln_gamma(kf + 1.0) - ln_gamma(c)
        + kf * lambda_a.ln()
        + c * kc.ln()
        - (kf + c) * (lambda_a + kc).ln();
    log.exp()
}

/// Probability that at most `J` devices share the channel, `sum_{j<=J} P[N_a = j]`.
pub fn collision_free_prob(p: &SystemParams, pi_a: f64) -> f64 {
    (0..=p.j_mpr)
        .map(|j| active_count_pmf(p, pi_a, j))
        .sum::<f64>()
        .min(1.0)
}

/// Interference per unit of mean transmit power,
/// `2 pi lambda_u ((1 - p_b) pi_a / L) (1/2 + 1/(alpha - 2))`.
pub fn interference_coefficient(p: &SystemParams, pi_a: f64) -> Result<f64> {
    if !(p.alpha > 2.0) {
        return Err(invalid(
            "alpha",
            format!("alpha must exceed 2 for finite interference (got {})", p.alpha),
        ));
    }
    Ok(2.0 * PI * p.active_density(pi_a) * (0.5 + 1.0 / (p.alpha - 2.0)))
}

/// Mean-field interference for a population whose mean transmit power is `p_mf`.
pub fn mean_field_interference(p: &SystemParams, pi_a: f64, p_mf: f64) -> Result<f64> {
    if !(p_mf >= 0.0) {
        return Err(invalid("p_mf", format!("power must be nonnegative (got {p_mf})")));
    }
    Ok(interference_coefficient(p, pi_a)? * p_mf)
}

/// Population mean transmit power per time node, `sum_i P_i^n m_i^n dE`.
pub fn mean_field_power(m: &Field, policy: &Field, g: &Grid) -> Result<Array1<f64>> {
    check_shape(g, m.dim())?;
    check_shape(g, policy.dim())?;
    let prod = &m.values * &policy.values;
    Ok(prod.sum_axis(ndarray::Axis(1)) * g.de)
}

/// Mean-field power and interference along the time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceTrace {
    pub i_mf: Array1<f64>,
    pub p_mf: Array1<f64>,
}

impl InterferenceTrace {
    pub fn from_power(p: &SystemParams, pi_a: f64, p_mf: Array1<f64>) -> Result<Self> {
        let coef = interference_coefficient(p, pi_a)?;
        let i_mf = p_mf.mapv(|x| coef * x);
        Ok(Self { i_mf, p_mf })
    }

    pub fn from_fields(
        p: &SystemParams,
        pi_a: f64,
        m: &Field,
        policy: &Field,
        g: &Grid,
    ) -> Result<Self> {
        Self::from_power(p, pi_a, mean_field_power(m, policy, g)?)
    }

    /// Trace with the same interference value at every time node.
    pub fn constant(g: &Grid, i_mf: f64, p_mf: f64) -> Self {
        Self {
            i_mf: Array1::from_elem(g.time_nodes(), i_mf),
            p_mf: Array1::from_elem(g.time_nodes(), p_mf),
        }
    }
}
