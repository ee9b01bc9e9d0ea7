//! Mean-field equilibrium of the transmit-power game.
//!
//! The equilibrium couples a forward transport of the energy distribution
//! with a backward costate sweep; the policy is the pointwise minimiser of
//! the running cost against the costate gradient. The outer loop
//! alternates the two sweeps with the queue fixed point and relaxes the
//! policy until it stops moving.

pub mod control;
pub mod fpk;
pub mod hjb;

use ndarray::{Array1, ArrayView1};

use crate::error::{invalid, Result};
use crate::geometry::InterferenceTrace;
use crate::model::{check_len, validate_grid, Field, FieldRole, Grid, SystemParams};
use crate::queueing::{fixed_point_ps_pia, FixedPointOptions};

pub use control::{
    mf_sinr, optimal_power_update, running_cost, running_cost_derivative, stationary_power,
};
pub use fpk::{fpk_forward, fpk_step};
pub use hjb::{costate_gradient, hjb_backward, hjb_step};

/// Knobs of the outer successive-sweep iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Sup-norm tolerance on the policy change, in watts.
    pub tol: f64,
    pub max_iters: usize,
    /// Relaxation weight of the new policy.
    pub damping: f64,
    /// Initial power on every node with positive energy.
    pub initial_power: f64,
    pub fixed_point: FixedPointOptions,
}

impl SolverOptions {
    pub fn for_params(p: &SystemParams) -> Self {
        Self {
            tol: 1e-5 * p.p_max,
            max_iters: 200,
            damping: 0.5,
            initial_power: 0.5 * p.p_max,
            fixed_point: FixedPointOptions::default(),
        }
    }

    pub fn validate(&self, p: &SystemParams) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(invalid("tol", format!("must be positive (got {})", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be positive"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(invalid("damping", format!("must lie in (0, 1] (got {})", self.damping)));
        }
        if !(0.0..=p.p_max).contains(&self.initial_power) {
            return Err(invalid(
                "p0_init",
                format!("must lie in [0, P_max] (got {})", self.initial_power),
            ));
        }
        self.fixed_point.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    NotConverged,
}

/// Converged (or last) iterate of the outer loop with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub policy: Field,
    pub mean_field: Field,
    pub costate: Field,
    pub p_s: f64,
    pub pi_a: f64,
    pub interference: InterferenceTrace,
    pub iterations: usize,
    pub final_residual: f64,
    pub residual_history: Vec<f64>,
    pub status: Status,
    /// Whether the last inner success/activity fixed point converged.
    pub fixed_point_converged: bool,
}

impl EquilibriumResult {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// Mass on the `e = 0` node at the end of the frame.
    pub fn depleted_fraction(&self, g: &Grid) -> f64 {
        self.mean_field.get(g.n_time, 0) * g.de
    }
}

/// Policy with `power` on every node except `e = 0`.
pub fn initial_policy(g: &Grid, power: f64) -> Field {
    Field::from_fn(FieldRole::Policy, g, |_, i| if i == 0 { 0.0 } else { power })
}

/// Pointwise best response to a costate.
pub fn best_response(
    p: &SystemParams,
    mu: &Field,
    p_s: f64,
    interference: &InterferenceTrace,
    g: &Grid,
) -> Field {
    let mut out = Field::zeros(FieldRole::Policy, g);
    for n in 0..g.time_nodes() {
        let row = mu.slice(n);
        let i_mf = interference.i_mf[n];
        for i in 1..g.energy_nodes() {
            let grad = costate_gradient(row, g, i);
            out.values[[n, i]] = optimal_power_update(p, grad, p_s, i_mf);
        }
    }
    out
}

/// Solves the coupled forward/backward system by successive sweeps.
///
/// Each iteration transports `m0` under the current policy, solves the
/// success/activity fixed point, builds the interference trace, sweeps the
/// costate backward and computes the best-response policy. The iteration
/// stops once the best response is within `tol` (sup norm) of the current
/// policy; otherwise the policy moves a fraction `damping` towards it.
/// Non-convergence is reported through [`Status::NotConverged`].
pub fn solve_equilibrium(
    p: &SystemParams,
    g: &Grid,
    m0: ArrayView1<'_, f64>,
    opts: &SolverOptions,
) -> Result<EquilibriumResult> {
    p.validate()?;
    validate_grid(p, g)?;
    opts.validate(p)?;
    check_len(g.energy_nodes(), m0.len())?;
    if m0.iter().any(|&x| !(x >= 0.0)) {
        return Err(invalid("m0", "density must be nonnegative"));
    }
    let mass = m0.sum() * g.de;
    if (mass - 1.0).abs() > 1e-9 {
        return Err(invalid("m0", format!("density must integrate to 1 (got {mass})")));
    }

    let mut policy = initial_policy(g, opts.initial_power);
    let mut fp_opts = opts.fixed_point;
    let mut history = Vec::with_capacity(opts.max_iters);

    for it in 1..=opts.max_iters {
        let m = fpk_forward(m0, &policy, g)?;
        let fp = fixed_point_ps_pia(p, &policy, &m, g, &fp_opts)?;
        let mu = hjb_backward(p, &policy, fp.p_s, &fp.interference, g)?;
        let response = best_response(p, &mu, fp.p_s, &fp.interference, g);
        let residual = sup_distance(&response, &policy);
        history.push(residual);

        let done = residual < opts.tol;
        if done || it == opts.max_iters {
            return Ok(EquilibriumResult {
                policy,
                mean_field: m,
                costate: mu,
                p_s: fp.p_s,
                pi_a: fp.pi_a,
                interference: fp.interference,
                iterations: it,
                final_residual: residual,
                residual_history: history,
                status: if done { Status::Converged } else { Status::NotConverged },
                fixed_point_converged: fp.converged,
            });
        }
        let w = opts.damping;
        policy.values.zip_mut_with(&response.values, |old, new| {
            *old = (1.0 - w) * *old + w * new;
        });
        fp_opts.initial_p_s = fp.p_s.max(f64::MIN_POSITIVE);
    }
    unreachable!("loop returns on its final iteration")
}

fn sup_distance(a: &Field, b: &Field) -> f64 {
    a.values
        .iter()
        .zip(b.values.iter())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Distance in watts between the policy and the clipped solution of the
/// first-order condition `dF/dP = d mu / de`, on nodes with `0 < P < P_max`.
pub fn first_order_residuals(p: &SystemParams, result: &EquilibriumResult, g: &Grid) -> Array1<f64> {
    let mut out = Vec::new();
    for n in 0..g.time_nodes() {
        let row = result.costate.slice(n);
        let i_mf = result.interference.i_mf[n];
        for i in 1..g.energy_nodes() {
            let power = result.policy.get(n, i);
            if power <= 0.0 || power >= p.p_max {
                continue;
            }
            let grad = costate_gradient(row, g, i);
            let target = optimal_power_update(p, grad, result.p_s, i_mf);
            out.push((power - target).abs());
        }
    }
    Array1::from(out)
}
