//! Per-attempt success probability and its fixed point with queue activity.

use std::f64::consts::PI;

use ndarray::Array1;

use crate::error::{invalid, Result};
use crate::geometry::{collision_free_prob, mean_field_power, InterferenceTrace};
use crate::model::{check_len, check_shape, Field, Grid, SystemParams};
use crate::queueing::markov::active_probability;
use crate::queueing::special::sinr_tail_integral;

/// Probability that the mean-field SINR clears `theta`, averaged over the
/// frame and the energy distribution.
///
/// Left-point rule in time (`n = 0..X-1`), node sum in energy. Cells with
/// zero transmit power contribute nothing.
pub fn sinr_success_probability(
    p: &SystemParams,
    policy: &Field,
    m: &Field,
    interference: &InterferenceTrace,
    g: &Grid,
) -> Result<f64> {
    check_shape(g, policy.dim())?;
    check_shape(g, m.dim())?;
    check_len(g.time_nodes(), interference.i_mf.len())?;
    let b = PI * p.lambda_s;
    let mut acc = 0.0;
    for n in 0..g.n_time {
        let noise = p.sigma0 + interference.i_mf[n];
        let mut slice = 0.0;
        for i in 0..g.energy_nodes() {
            let power = policy.get(n, i);
            let mass = m.get(n, i);
            if power <= 0.0 || mass == 0.0 {
                continue;
            }
            let a = p.theta * noise / power;
            slice += sinr_tail_integral(a, b, p.alpha)? * mass;
        }
        acc += slice * g.de * g.dt;
    }
    Ok(b / p.t_frame * acc)
}

/// Success probability of an attempt: no MPR overflow times the SINR term.
pub fn success_probability(
    p: &SystemParams,
    policy: &Field,
    m: &Field,
    interference: &InterferenceTrace,
    pi_a: f64,
    g: &Grid,
) -> Result<f64> {
    let p_theta = sinr_success_probability(p, policy, m, interference, g)?;
    Ok((collision_free_prob(p, pi_a) * p_theta).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub damping: f64,
    pub initial_p_s: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 500,
            damping: 0.5,
            initial_p_s: 1.0,
        }
    }
}

impl FixedPointOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(invalid("tol2", format!("must be positive (got {})", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters2", "must be positive"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(invalid("damping2", format!("must lie in (0, 1] (got {})", self.damping)));
        }
        if !(self.initial_p_s > 0.0 && self.initial_p_s <= 1.0) {
            return Err(invalid(
                "initial_p_s",
                format!("must lie in (0, 1] (got {})", self.initial_p_s),
            ));
        }
        Ok(())
    }
}

/// Joint solution of the success probability and the activity probability.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub p_s: f64,
    pub pi_a: f64,
    pub interference: InterferenceTrace,
    pub iterations: usize,
    pub converged: bool,
    pub residuals: Vec<f64>,
}

/// Alternates the activity probability of the queue with the success
/// probability it induces until the pair is self-consistent.
///
/// The activity probability carries the relaxation; the success probability
/// is always the exact image of the current activity. The residual is
/// `|change in p_s| + |pi_a(p_s) - pi_a|`.
pub fn fixed_point_ps_pia(
    p: &SystemParams,
    policy: &Field,
    m: &Field,
    g: &Grid,
    opts: &FixedPointOptions,
) -> Result<FixedPoint> {
    opts.validate()?;
    let p_mf = mean_field_power(m, policy, g)?;
    let activity = |p_s: f64| active_probability(p.p_a, p.p_b, p_s, p.queue_size);
    let success = |pi_a: f64, p_mf: &Array1<f64>| -> Result<(f64, InterferenceTrace)> {
        let trace = InterferenceTrace::from_power(p, pi_a, p_mf.clone())?;
        let ps = success_probability(p, policy, m, &trace, pi_a, g)?;
        Ok((ps, trace))
    };

    let mut pi_a = activity(opts.initial_p_s)?;
    let mut prev_ps: Option<f64> = None;
    let mut residuals = Vec::new();
    for it in 1..=opts.max_iters {
        let (p_s, trace) = success(pi_a, &p_mf)?;
        let target = activity(p_s)?;
        let residual = prev_ps.map_or(0.0, |q| (p_s - q).abs()) + (target - pi_a).abs();
        residuals.push(residual);
        if residual < opts.tol {
            return Ok(FixedPoint {
                p_s,
                pi_a,
                interference: trace,
                iterations: it,
                converged: true,
                residuals,
            });
        }
        prev_ps = Some(p_s);
        pi_a = (1.0 - opts.damping) * pi_a + opts.damping * target;
    }
    let (p_s, trace) = success(pi_a, &p_mf)?;
    Ok(FixedPoint {
        p_s,
        pi_a,
        interference: trace,
        iterations: opts.max_iters,
        converged: false,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{uniform_density, FieldRole};

    fn degenerate_setup(p: &SystemParams, power: f64, noise_plus_i: f64) -> (Grid, Field, Field, InterferenceTrace) {
        let g = Grid::default_for(p).unwrap();
        let idx = 20;
        let m = Field::from_fn(FieldRole::Density, &g, |_, i| if i == idx { 1.0 / g.de } else { 0.0 });
        let policy = Field::from_fn(FieldRole::Policy, &g, |_, _| power);
        let trace = InterferenceTrace::constant(&g, noise_plus_i - p.sigma0, power);
        (g, m, policy, trace)
    }

    #[test]
    fn degenerate_field_reference() {
        // a = 10 * 0.7069 / 0.025 = 282.8, b = 10 pi
        let p = SystemParams::reference();
        let (g, m, policy, trace) = degenerate_setup(&p, 0.025, 0.7069);
        let pt = sinr_success_probability(&p, &policy, &m, &trace, &g).unwrap();
        let a: f64 = 10.0 * 0.7069 / 0.025;
        assert!((a - 282.76).abs() < 1e-9);
        let b = PI * 10.0;
        let hand = b * crate::queueing::special::g_closed_form(a, b).unwrap();
        assert!((pt - hand).abs() < 1e-12);
        assert!((pt - 0.739).abs() < 1e-3, "{pt}");
    }

    #[test]
    fn huge_threshold_kills_success() {
        let p = SystemParams {
            theta: 1e12,
            ..SystemParams::reference()
        };
        let (g, m, policy, trace) = degenerate_setup(&p, 0.025, 0.7);
        assert!(success_probability(&p, &policy, &m, &trace, 0.1, &g).unwrap() < 1e-5);
    }

    #[test]
    fn zero_power_cells_excluded() {
        let p = SystemParams::reference();
        let (g, m, _, trace) = degenerate_setup(&p, 0.025, 0.7);
        let silent = Field::zeros(FieldRole::Policy, &g);
        assert_eq!(sinr_success_probability(&p, &silent, &m, &trace, &g).unwrap(), 0.0);
    }

    #[test]
    fn success_grows_with_bs_density() {
        let mut prev = 0.0;
        for ls in [1.0, 5.0, 10.0, 20.0] {
            let p = SystemParams {
                lambda_s: ls,
                ..SystemParams::reference()
            };
            let g = Grid::default_for(&p).unwrap();
            let m0 = uniform_density(&g);
            let m = Field::from_fn(FieldRole::Density, &g, |_, i| m0[i]);
            let policy = Field::from_fn(FieldRole::Policy, &g, |_, i| if i == 0 { 0.0 } else { 0.01 });
            let trace = InterferenceTrace::from_fields(&p, 0.2, &m, &policy, &g).unwrap();
            let ps = success_probability(&p, &policy, &m, &trace, 0.2, &g).unwrap();
            assert!(ps > prev, "lambda_s = {ls}: {ps} <= {prev}");
            prev = ps;
        }
    }

    fn full_power_setup(p: &SystemParams) -> (Grid, Field, Field) {
        let g = Grid::default_for(p).unwrap();
        let m0 = uniform_density(&g);
        let m = Field::from_fn(FieldRole::Density, &g, |_, i| m0[i]);
        let policy = Field::from_fn(FieldRole::Policy, &g, |_, i| if i == 0 { 0.0 } else { p.p_max });
        (g, m, policy)
    }

    #[test]
    fn no_arrivals_converges_immediately() {
        let p = SystemParams {
            p_a: 0.0,
            ..SystemParams::reference()
        };
        let (g, m, policy) = full_power_setup(&p);
        let fp = fixed_point_ps_pia(&p, &policy, &m, &g, &FixedPointOptions::default()).unwrap();
        assert!(fp.converged);
        assert_eq!(fp.iterations, 1);
        assert_eq!(fp.pi_a, 0.0);
        let trace = InterferenceTrace::from_fields(&p, 0.0, &m, &policy, &g).unwrap();
        let pt = sinr_success_probability(&p, &policy, &m, &trace, &g).unwrap();
        assert!((fp.p_s - pt).abs() < 1e-15);
    }

    fn composite(p: &SystemParams, g: &Grid, m: &Field, policy: &Field, ps: f64) -> f64 {
        let pi_a = active_probability(p.p_a, p.p_b, ps, p.queue_size).unwrap();
        let trace = InterferenceTrace::from_fields(p, pi_a, m, policy, g).unwrap();
        success_probability(p, policy, m, &trace, pi_a, g).unwrap()
    }

    #[test]
    fn matches_bisection_oracle() {
        // heavier traffic than the reference so the coupling is visible
        for rate in [12.0, 3600.0 * 5.0] {
            let p = SystemParams {
                p_a: crate::model::arrival_probability(rate, 0.01),
                ..SystemParams::reference()
            };
            let (g, m, policy) = full_power_setup(&p);
            let (mut lo, mut hi) = (1e-9, 1.0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if composite(&p, &g, &m, &policy, mid) > mid {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let oracle = 0.5 * (lo + hi);
            let fp = fixed_point_ps_pia(&p, &policy, &m, &g, &FixedPointOptions::default()).unwrap();
            assert!(fp.converged);
            assert!((fp.p_s - oracle).abs() < 1e-6, "rate {rate}: {} vs {oracle}", fp.p_s);
        }
    }

    #[test]
    fn fixed_point_residual_and_idempotence() {
        let p = SystemParams {
            p_a: 0.05,
            ..SystemParams::reference()
        };
        let (g, m, policy) = full_power_setup(&p);
        let opts = FixedPointOptions::default();
        let fp = fixed_point_ps_pia(&p, &policy, &m, &g, &opts).unwrap();
        assert!(fp.converged);
        let trace = InterferenceTrace::from_fields(&p, fp.pi_a, &m, &policy, &g).unwrap();
        let ps = success_probability(&p, &policy, &m, &trace, fp.pi_a, &g).unwrap();
        let pi = active_probability(p.p_a, p.p_b, fp.p_s, p.queue_size).unwrap();
        assert!((ps - fp.p_s).abs() < 10.0 * opts.tol);
        assert!((pi - fp.pi_a).abs() < 10.0 * opts.tol);

        let again = fixed_point_ps_pia(
            &p,
            &policy,
            &m,
            &g,
            &FixedPointOptions {
                initial_p_s: fp.p_s,
                ..opts
            },
        )
        .unwrap();
        assert!(again.converged && again.iterations <= 2, "{}", again.iterations);
    }
}
