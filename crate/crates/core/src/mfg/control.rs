//! Running cost of a generic device and its pointwise minimiser.

use std::f64::consts::LN_2;

use crate::model::SystemParams;

/// Mean-field SINR `P (2 sqrt(lambda_s))^alpha / (sigma_0 + I_mf)`.
pub fn mf_sinr(p: &SystemParams, power: f64, i_mf: f64) -> f64 {
    power * p.mean_path_gain() / (p.sigma0 + i_mf)
}

/// `F = (1 - p_s) P - p_s log2(1 + SINR)`.
pub fn running_cost(p: &SystemParams, power: f64, i_mf: f64, p_s: f64) -> f64 {
    (1.0 - p_s) * power - p_s * mf_sinr(p, power, i_mf).ln_1p() / LN_2
}

/// `dF/dP = (1 - p_s) - p_s gamma / (ln 2 (1 + gamma P))` with `gamma` the
/// SINR per watt.
pub fn running_cost_derivative(p: &SystemParams, power: f64, i_mf: f64, p_s: f64) -> f64 {
    let gamma = mf_sinr(p, 1.0, i_mf);
    (1.0 - p_s) - p_s * gamma / (LN_2 * (1.0 + gamma * power))
}

/// Unconstrained solution of `dF/dP = dmu_de`, or `None` when the
/// Lagrangian derivative is negative for every power.
pub fn stationary_power(p: &SystemParams, dmu_de: f64, p_s: f64, i_mf: f64) -> Option<f64> {
    let gamma = mf_sinr(p, 1.0, i_mf);
    let h = (1.0 - p_s) - dmu_de;
    if h <= 0.0 {
        None
    } else {
        Some(p_s / (LN_2 * h) - 1.0 / gamma)
    }
}

/// Minimiser of `F(P) - P dmu_de` over `[0, P_max]`.
///
/// `F` is convex in `P`, so the stationary point clipped to the box is the
/// constrained optimum; a nonpositive `h = (1 - p_s) - dmu_de` means the
/// objective decreases everywhere and `P_max` is optimal.
pub fn optimal_power_update(p: &SystemParams, dmu_de: f64, p_s: f64, i_mf: f64) -> f64 {
    match stationary_power(p, dmu_de, p_s, i_mf) {
        None => p.p_max,
        Some(x) => x.clamp(0.0, p.p_max),
    }
}
