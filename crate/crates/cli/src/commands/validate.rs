//! Analytic formulas against their Monte Carlo oracles.
//!
//! For the distance rows (`*_ks`, `*_tv`) the `analytic` column holds the
//! acceptance threshold and `mc_mean` the observed distance.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::Result;
use mfpa_core::geometry::{interference_coefficient, mean_field_interference};
use mfpa_core::mfg::solve_equilibrium;
use mfpa_core::montecarlo::{
    empirical_active_count, empirical_distance_cdf, estimate_interference, estimate_p_theta,
    interference_tail_bound, particle_transport, simulate_queue, total_variation, McEstimate,
    NetworkSample, SinrScenario,
};
use mfpa_core::queueing::{g_closed_form, steady_state, throughput, transition_matrix};
use mfpa_core::{Error, SystemParams};

use crate::config::ExperimentConfig;
use crate::output::{create, finish, fmt_f64};

/// Activity probability of the spatial checks; `lambda_a = 9` at the reference parameters.
pub const VALIDATION_PI_A: f64 = 0.1;
/// Disk radius of the sampled networks (km).
const NETWORK_RADIUS: f64 = 10.0;
/// Device density of the distance check, sparse so distances are nearly
/// independent (km^-2).
const SPARSE_DEVICES: f64 = 1.0;
const MIN_CELLS: usize = 10_000;
const MIN_FRAMES: u64 = 1_000_000;
const MIN_PARTICLES: usize = 100_000;
const LOADED_P_A: f64 = 0.3;
const LOADED_P_S: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    InsufficientPrecision,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::InsufficientPrecision => "insufficient_precision",
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub analytic: f64,
    pub mc_mean: f64,
    pub mc_se: Option<f64>,
    pub verdict: Verdict,
}

impl Check {
    fn insufficient(name: &'static str, analytic: f64) -> Self {
        Self {
            name,
            analytic,
            mc_mean: f64::NAN,
            mc_se: None,
            verdict: Verdict::InsufficientPrecision,
        }
    }

    fn z_test(name: &'static str, analytic: f64, e: McEstimate, max_rel_se: f64) -> Self {
        let verdict = if !(e.se <= max_rel_se * analytic.abs()) {
            Verdict::InsufficientPrecision
        } else {
            Verdict::from_bool(e.z_score(analytic) < 3.0)
        };
        Self { name, analytic, mc_mean: e.mean, mc_se: Some(e.se), verdict }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Number of sampled disks, scaled from the replication count.
fn disks(replications: usize, per_disk: usize) -> u64 {
    replications.div_ceil(per_disk) as u64
}

pub fn check_distance_cdf(cfg: &ExperimentConfig) -> Result<Check> {
    let samples = (0..disks(cfg.replications, 25))
        .map(|k| NetworkSample::generate(cfg.lambda_s, SPARSE_DEVICES, NETWORK_RADIUS, cfg.seed, k))
        .collect::<mfpa_core::Result<Vec<_>>>()?;
    match empirical_distance_cdf(cfg.lambda_s, &samples) {
        Ok(r) => Ok(Check {
            name: "distance_cdf_ks",
            analytic: r.ks_band,
            mc_mean: r.ks_distance,
            mc_se: None,
            verdict: Verdict::from_bool(r.passes()),
        }),
        Err(Error::InsufficientSamples(_)) => Ok(Check::insufficient("distance_cdf_ks", f64::NAN)),
        Err(e) => Err(e.into()),
    }
}

/// Occupancy pmf distance and mean count per cell.
pub fn check_active_count(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let p = cfg.params();
    let samples = (0..disks(cfg.replications, 300))
        .map(|k| NetworkSample::generate(p.lambda_s, p.lambda_u, NETWORK_RADIUS, cfg.seed ^ 0x5eed, k))
        .collect::<mfpa_core::Result<Vec<_>>>()?;
    let mean = p.active_density(VALIDATION_PI_A) / p.lambda_s;
    let rep = match empirical_active_count(&p, VALIDATION_PI_A, &samples, cfg.seed) {
        Ok(r) if r.cells >= MIN_CELLS => r,
        Ok(_) | Err(Error::InsufficientSamples(_)) => {
            return Ok(vec![
                Check::insufficient("active_count_tv", 0.02),
                Check::insufficient("active_count_mean", mean),
            ])
        }
        Err(e) => return Err(e.into()),
    };
    Ok(vec![
        Check {
            name: "active_count_tv",
            analytic: 0.02,
            mc_mean: rep.tv_distance,
            mc_se: None,
            verdict: Verdict::from_bool(rep.tv_distance < 0.02),
        },
        Check {
            name: "active_count_mean",
            analytic: mean,
            mc_mean: rep.mean,
            mc_se: Some(rep.se_mean),
            verdict: Verdict::from_bool((rep.mean - mean).abs() < 3.0 * rep.se_mean),
        },
    ])
}

/// Campbell mean at interferer power `P_max / 2`.
pub fn check_interference(cfg: &ExperimentConfig) -> Result<Check> {
    let p = cfg.params();
    let power = 0.5 * p.p_max;
    let radius = cfg.radius.unwrap_or(50.0);
    let analytic = mean_field_interference(&p, VALIDATION_PI_A, power)?
        - interference_tail_bound(&p, VALIDATION_PI_A, power, radius);
    let e = estimate_interference(&p, VALIDATION_PI_A, power, radius, cfg.replications, cfg.seed)?;
    Ok(Check::z_test("interference", analytic, e, 0.01))
}

/// Mean-field SINR threshold probability on the degenerate field: tagged
/// device at `P_max`, interferers at `P_max / 2`.
pub fn p_theta_analytic(p: &SystemParams) -> Result<f64> {
    let i_mf = interference_coefficient(p, VALIDATION_PI_A)? * 0.5 * p.p_max;
    let b = PI * p.lambda_s;
    let a = p.theta * (p.sigma0 + i_mf) / p.p_max;
    Ok(b * g_closed_form(a, b)?)
}

pub fn check_p_theta(cfg: &ExperimentConfig) -> Result<Check> {
    let p = cfg.params();
    let analytic = p_theta_analytic(&p)?;
    // interferer disk whose truncation tail is below 0.5% of the mean
    let scenario = SinrScenario {
        tagged_power: p.p_max,
        interferer_power: 0.5 * p.p_max,
        pi_a: VALIDATION_PI_A,
        radius: 12.0,
    };
    let e = estimate_p_theta(&p, &scenario, 5 * cfg.replications, cfg.seed)?;
    let verdict = if !(3.0 * e.se < 0.03) {
        Verdict::InsufficientPrecision
    } else {
        Verdict::from_bool((e.mean - analytic).abs() < 0.03)
    };
    Ok(Check { name: "p_theta", analytic, mc_mean: e.mean, mc_se: Some(e.se), verdict })
}

/// Simulated queue at a loaded operating point against the chain.
pub fn check_queue(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let p = cfg.params();
    let frames = 250 * cfg.replications as u64;
    let service = 1.0 / throughput(p.p_b, LOADED_P_S);
    if frames < MIN_FRAMES {
        return Ok(vec![
            Check::insufficient("queue_occupancy_tv", 0.01),
            Check::insufficient("queue_service_frames", service),
        ]);
    }
    let sim = simulate_queue(LOADED_P_A, p.p_b, LOADED_P_S, p.queue_size, frames, cfg.seed)?;
    let ss = steady_state(&transition_matrix(LOADED_P_A, p.p_b, LOADED_P_S, p.queue_size)?)?;
    let tv = total_variation(&sim.occupancy, &ss.pi.to_vec());
    let svc: Vec<f64> = sim.service_frames.iter().map(|&x| x as f64).collect();
    Ok(vec![
        Check {
            name: "queue_occupancy_tv",
            analytic: 0.01,
            mc_mean: tv,
            mc_se: None,
            verdict: Verdict::from_bool(tv < 0.01),
        },
        Check::z_test("queue_service_frames", service, McEstimate::from_samples(&svc), 0.01),
    ])
}

/// Particle histogram against the transported density at `T_f`, both under
/// the equilibrium policy.
pub fn check_transport(cfg: &ExperimentConfig) -> Result<Check> {
    let particles = 25 * cfg.replications;
    if particles < MIN_PARTICLES {
        return Ok(Check::insufficient("transport_tv", 0.02));
    }
    let p = cfg.params();
    let g = cfg.grid()?;
    let m0 = cfg.initial_density(&g)?;
    let eq = solve_equilibrium(&p, &g, m0.view(), &cfg.solver_options())?;
    let h = particle_transport(m0.view(), &eq.policy, particles, &g, cfg.seed)?;
    let tv = h.tv_to_density(g.n_time, eq.mean_field.slice(g.n_time), &g);
    Ok(Check {
        name: "transport_tv",
        analytic: 0.02,
        mc_mean: tv,
        mc_se: None,
        verdict: Verdict::from_bool(tv < 0.02),
    })
}

pub fn run_checks(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let mut out = vec![check_distance_cdf(cfg)?];
    out.extend(check_active_count(cfg)?);
    out.push(check_interference(cfg)?);
    out.push(check_p_theta(cfg)?);
    out.extend(check_queue(cfg)?);
    out.push(check_transport(cfg)?);
    Ok(out)
}

pub fn write_checks(path: &Path, checks: &[Check]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["check", "analytic", "mc_mean", "mc_se", "pass"])?;
    for c in checks {
        w.write_record([
            c.name.to_string(),
            fmt_f64(c.analytic),
            fmt_f64(c.mc_mean),
            c.mc_se.map(fmt_f64).unwrap_or_default(),
            c.verdict.as_str().to_string(),
        ])?;
    }
    finish(w, path)
}

pub fn cmd_validate(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<Check>> {
    let checks = run_checks(cfg)?;
    std::fs::create_dir_all(out)?;
    write_checks(&out.join("validate.csv"), &checks)?;
    Ok(checks)
}
