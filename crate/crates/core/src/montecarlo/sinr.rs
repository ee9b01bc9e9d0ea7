//! Interference and SINR-threshold estimators on sampled active-device
//! processes, and the gamma-Poisson occupancy mixture.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::model::SystemParams;

use super::{stream_rng, McEstimate};

fn check_replications(replications: usize) -> Result<()> {
    if replications == 0 {
        Err(invalid("replications", "must be positive"))
    } else {
        Ok(())
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(invalid("radius", format!("must be positive (got {radius})")))
    }
}

fn poisson<R: Rng>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
    }
}

/// Capped path gain `min(1, r^-alpha)` from the squared distance.
fn capped_gain(r2: f64, alpha: f64) -> f64 {
    if r2 <= 1.0 {
        1.0
    } else {
        r2.powf(-0.5 * alpha)
    }
}

/// Interference at the disk centre from one PPP draw; each of the
/// `Poisson(lambda pi R^2)` points is uniform in the disk, so only its
/// squared radius `R^2 U` matters.
fn shot_noise<R: Rng>(lambda: f64, power: f64, radius: f64, alpha: f64, faded: bool, rng: &mut R) -> f64 {
    let n = poisson(lambda * PI * radius * radius, rng);
    let r2_max = radius * radius;
    let mut total = 0.0;
    for _ in 0..n {
        let r2 = r2_max * rng.random::<f64>();
        let h: f64 = if faded { Exp1.sample(rng) } else { 1.0 };
        total += h * capped_gain(r2, alpha);
    }
    power * total
}

/// Interference omitted by truncating the active process at `radius`,
/// `2 pi lambda_a P / ((alpha - 2) R^(alpha - 2))`.
pub fn interference_tail_bound(p: &SystemParams, pi_a: f64, power: f64, radius: f64) -> f64 {
    2.0 * PI * p.active_density(pi_a) * power / ((p.alpha - 2.0) * radius.powf(p.alpha - 2.0))
}

/// Mean and standard error of `sum_j P min(1, r_j^-alpha)` at the centre of
/// a disk of `radius` filled with the active-device PPP.
pub fn estimate_interference(
    p: &SystemParams,
    pi_a: f64,
    power: f64,
    radius: f64,
    replications: usize,
    seed: u64,
) -> Result<McEstimate> {
    if !(p.alpha > 2.0) {
        return Err(invalid("alpha", format!("alpha must exceed 2 (got {})", p.alpha)));
    }
    check_radius(radius)?;
    check_replications(replications)?;
    let lambda = p.active_density(pi_a);
    let values: Vec<f64> = (0..replications)
        .into_par_iter()
        .map(|k| shot_noise(lambda, power, radius, p.alpha, false, &mut stream_rng(seed, k as u64)))
        .collect();
    Ok(McEstimate::from_samples(&values))
}

/// Degenerate mean field for the SINR-threshold estimator: every device
/// transmits at a fixed power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrScenario {
    /// Power of the tagged device (W).
    pub tagged_power: f64,
    /// Power of every interferer (W).
    pub interferer_power: f64,
    pub pi_a: f64,
    /// Radius of the interferer disk (km).
    pub radius: f64,
}

/// Fraction of replications with `P H r^-alpha >= theta (sigma0 + I)`.
///
/// The link distance follows the nearest-BS law at `lambda_s`, `H` is unit
/// exponential, and `I` sums faded, capped contributions of a fresh active
/// PPP around the serving BS.
pub fn estimate_p_theta(
    p: &SystemParams,
    scenario: &SinrScenario,
    replications: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_radius(scenario.radius)?;
    check_replications(replications)?;
    if !(scenario.tagged_power > 0.0) || !(scenario.interferer_power >= 0.0) {
        return Err(invalid("power", "tagged power must be positive and interferer power nonnegative"));
    }
    let lambda = p.active_density(scenario.pi_a);
    let values: Vec<f64> = (0..replications)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let e: f64 = Exp1.sample(&mut rng);
            let r2 = e / (PI * p.lambda_s);
            let h: f64 = Exp1.sample(&mut rng);
            let signal = scenario.tagged_power * h * r2.powf(-0.5 * p.alpha);
            let i = shot_noise(lambda, scenario.interferer_power, scenario.radius, p.alpha, true, &mut rng);
            if signal >= p.theta * (p.sigma0 + i) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(McEstimate::from_samples(&values))
}

/// Empirical pmf of a Poisson count with mean `lambda_a V`, `V` drawn from
/// the gamma cell-area law; the mixture that defines the occupancy pmf.
pub fn sample_active_count_mixture(p: &SystemParams, pi_a: f64, draws: usize, seed: u64) -> Result<Vec<f64>> {
    check_replications(draws)?;
    let lambda = p.active_density(pi_a);
    let c = p.gamma_shape;
    let area = Gamma::new(c, 1.0 / (c * p.lambda_s))
        .map_err(|e| invalid("gamma_shape", e.to_string()))?;
    let counts: Vec<u64> = (0..draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let v = area.sample(&mut rng);
            poisson(lambda * v, &mut rng)
        })
        .collect();
    let top = counts.iter().copied().max().unwrap_or(0) as usize;
    let mut pmf = vec![0.0; top + 1];
    for c in counts {
        pmf[c as usize] += 1.0;
    }
    pmf.iter_mut().for_each(|v| *v /= draws as f64);
    Ok(pmf)
}
