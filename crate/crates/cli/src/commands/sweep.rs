//! One solve per value of a single sweep axis.

use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;

use crate::commands::solve::{solve_point, Summary};
use crate::config::ConfigTable;
use crate::output::{create, finish, fmt_f64};

/// Result of one sweep point; a failed solve keeps its message.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: std::result::Result<Summary, String>,
}

impl SweepRow {
    pub fn converged(&self) -> bool {
        matches!(&self.outcome, Ok(s) if s.converged)
    }
}

/// Runs every sweep value on a pool of `workers` threads; rows come back in
/// axis order.
pub fn run_sweep(table: &ConfigTable, workers: usize) -> Result<(String, Vec<SweepRow>)> {
    let base = table.resolve()?;
    let (axis, values) = base.sweep_axis()?;
    let axis = axis.to_string();
    let mut configs = Vec::with_capacity(values.len());
    for &v in values {
        let mut t = table.clone();
        t.set_number(&axis, v)?;
        let cfg = t.resolve().with_context(|| format!("sweep point {axis} = {v}"))?;
        configs.push((v, cfg));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    let rows = pool.install(|| {
        configs
            .par_iter()
            .map(|(v, cfg)| SweepRow {
                value: *v,
                outcome: solve_point(cfg).map(|s| s.summary).map_err(|e| format!("{e:#}")),
            })
            .collect::<Vec<_>>()
    });
    Ok((axis, rows))
}

pub fn write_sweep(path: &Path, axis: &str, rows: &[SweepRow]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record([axis, "p_s", "pi_a", "T_h", "D", "Q", "E_Nt", "converged"])?;
    for r in rows {
        let mut rec = vec![fmt_f64(r.value)];
        match &r.outcome {
            Ok(s) => rec.extend([s.p_s, s.pi_a, s.t_h, s.d, s.q, s.e_nt].map(fmt_f64)),
            Err(_) => rec.extend(std::iter::repeat_n("NaN".to_string(), 6)),
        }
        rec.push(r.converged().to_string());
        w.write_record(&rec)?;
    }
    finish(w, path)
}

pub fn cmd_sweep(table: &ConfigTable, out: &Path, workers: usize) -> Result<Vec<SweepRow>> {
    let (axis, rows) = run_sweep(table, workers)?;
    std::fs::create_dir_all(out)?;
    write_sweep(&out.join("sweep.csv"), &axis, &rows)?;
    Ok(rows)
}
