//! Backward sweep of the costate (adjoint) equation.

use ndarray::{Array1, ArrayView1};

use crate::error::Result;
use crate::geometry::InterferenceTrace;
use crate::mfg::control::running_cost;
use crate::model::{check_len, Field, FieldRole, Grid, SystemParams};

/// `mu_i^{n-1} = mu_i^n - dt/dE P_i^n (mu_i^n - mu_{i-1}^n) + F_i^n dt`,
/// with `mu_{-1} := mu_0`.
pub fn hjb_step(
    p: &SystemParams,
    mu: ArrayView1<'_, f64>,
    policy: ArrayView1<'_, f64>,
    p_s: f64,
    i_mf: f64,
    g: &Grid,
) -> Result<Array1<f64>> {
    let k = g.energy_nodes();
    check_len(k, mu.len())?;
    check_len(k, policy.len())?;
    let ratio = g.dt / g.de;
    Ok(Array1::from_shape_fn(k, |i| {
        let below = if i == 0 { mu[0] } else { mu[i - 1] };
        let power = policy[i];
        mu[i] - ratio * power * (mu[i] - below) + running_cost(p, power, i_mf, p_s) * g.dt
    }))
}

/// Costate on the whole lattice from the terminal condition `mu(T_f, .) = 0`.
pub fn hjb_backward(
    p: &SystemParams,
    policy: &Field,
    p_s: f64,
    interference: &InterferenceTrace,
    g: &Grid,
) -> Result<Field> {
    policy.check_grid(g)?;
    check_len(g.time_nodes(), interference.i_mf.len())?;
    let mut mu = Field::zeros(FieldRole::Costate, g);
    for n in (1..=g.n_time).rev() {
        let prev = hjb_step(p, mu.slice(n), policy.slice(n), p_s, interference.i_mf[n], g)?;
        mu.slice_mut(n - 1).assign(&prev);
    }
    Ok(mu)
}

/// Backward difference `(mu_i - mu_{i-1}) / dE`, zero on the first node.
pub fn costate_gradient(mu: ArrayView1<'_, f64>, g: &Grid, i: usize) -> f64 {
    if i == 0 {
        0.0
    } else {
        (mu[i] - mu[i - 1]) / g.de
    }
}
