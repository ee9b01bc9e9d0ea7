//! Single equilibrium solve and its CSV bundle.

use std::path::Path;

use anyhow::Result;
use mfpa_core::mfg::{solve_equilibrium, EquilibriumResult};
use mfpa_core::queueing::{steady_state, transition_matrix, QueueMetrics};
use mfpa_core::{Error, Grid};

use crate::config::ExperimentConfig;
use crate::output::{create, finish, fmt_f64, write_field};

/// Scalar outputs of one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub p_s: f64,
    pub pi_a: f64,
    pub t_h: f64,
    pub e_nt: f64,
    pub q: f64,
    /// Mean delay in frames; NaN without traffic.
    pub d: f64,
    pub iterations: usize,
    pub residual: f64,
    pub depleted_fraction: f64,
    pub converged: bool,
    /// No packet arrivals, so the delay is undefined.
    pub no_traffic: bool,
}

impl Summary {
    pub fn status(&self) -> &'static str {
        if self.converged {
            "converged"
        } else {
            "not_converged"
        }
    }

    pub fn flags(&self) -> &'static str {
        if self.no_traffic {
            "no_traffic"
        } else {
            ""
        }
    }
}

/// Equilibrium of one configuration with its queue metrics.
pub struct Solution {
    pub grid: Grid,
    pub result: EquilibriumResult,
    pub summary: Summary,
}

pub fn solve_point(cfg: &ExperimentConfig) -> Result<Solution> {
    let p = cfg.params();
    let g = cfg.grid()?;
    let m0 = cfg.initial_density(&g)?;
    let result = solve_equilibrium(&p, &g, m0.view(), &cfg.solver_options())?;

    let t_h = (1.0 - p.p_b) * result.p_s;
    let (e_nt, q, d) = match steady_state(&transition_matrix(p.p_a, p.p_b, result.p_s, p.queue_size)?) {
        Ok(ss) => match QueueMetrics::evaluate(&ss, p.p_a, p.p_b, result.p_s) {
            Ok(m) => (m.avg_transmissions, m.avg_queue, m.avg_delay),
            Err(Error::ZeroThroughput) => (f64::INFINITY, 0.0, f64::INFINITY),
            Err(e) => return Err(e.into()),
        },
        // arrivals with no service: every queue is full and never drains
        Err(Error::DegenerateChain) => (f64::INFINITY, p.queue_size as f64, f64::INFINITY),
        Err(e) => return Err(e.into()),
    };
    let no_traffic = p.p_a == 0.0;
    let summary = Summary {
        p_s: result.p_s,
        pi_a: result.pi_a,
        t_h,
        e_nt,
        q,
        d: if no_traffic { f64::NAN } else { d },
        iterations: result.iterations,
        residual: result.final_residual,
        depleted_fraction: result.depleted_fraction(&g),
        converged: result.converged(),
        no_traffic,
    };
    Ok(Solution { grid: g, result, summary })
}

pub fn write_summary(path: &Path, s: &Summary) -> Result<()> {
    let mut w = create(path)?;
    w.write_record([
        "p_s", "pi_a", "T_h", "E_Nt", "Q", "D", "iterations", "residual", "depleted_fraction", "status", "flags",
    ])?;
    w.write_record([
        fmt_f64(s.p_s),
        fmt_f64(s.pi_a),
        fmt_f64(s.t_h),
        fmt_f64(s.e_nt),
        fmt_f64(s.q),
        fmt_f64(s.d),
        s.iterations.to_string(),
        fmt_f64(s.residual),
        fmt_f64(s.depleted_fraction),
        s.status().to_string(),
        s.flags().to_string(),
    ])?;
    finish(w, path)
}

/// Solves and writes policy, mean field, costate and summary; returns
/// whether the solver converged.
pub fn cmd_solve(cfg: &ExperimentConfig, out: &Path) -> Result<Solution> {
    let sol = solve_point(cfg)?;
    std::fs::create_dir_all(out)?;
    write_field(&out.join("policy.csv"), &sol.result.policy, &sol.grid)?;
    write_field(&out.join("meanfield.csv"), &sol.result.mean_field, &sol.grid)?;
    write_field(&out.join("costate.csv"), &sol.result.costate, &sol.grid)?;
    write_summary(&out.join("summary.csv"), &sol.summary)?;
    Ok(sol)
}
