//! Lagrangian particle oracle for the energy transport.

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::model::{check_len, Field, Grid};

use super::{stream_rng, total_variation};

const BLOCK: usize = 8192;

/// Particle counts per time node and energy cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleHistogram {
    pub counts: Array2<u64>,
    pub n_particles: usize,
}

impl ParticleHistogram {
    /// Fraction of particles in each energy cell at time node `n`.
    pub fn fractions(&self, n: usize) -> Vec<f64> {
        let total = self.n_particles as f64;
        self.counts.row(n).iter().map(|&c| c as f64 / total).collect()
    }

    /// Total-variation distance at time node `n` to a density slice.
    pub fn tv_to_density(&self, n: usize, m: ArrayView1<'_, f64>, g: &Grid) -> f64 {
        let mass: Vec<f64> = m.iter().map(|v| v * g.de).collect();
        total_variation(&self.fractions(n), &mass)
    }
}

/// Moves `n_particles` energies drawn from `m0` with `dE = -P(t, E) dt`.
///
/// Each particle starts at node `i` with probability `m0_i dE`, uniformly
/// inside that node's cell, and takes explicit Euler steps of length `dt`
/// with the power of the node nearest to its energy, clamped at zero.
pub fn particle_transport(
    m0: ArrayView1<'_, f64>,
    policy: &Field,
    n_particles: usize,
    g: &Grid,
    seed: u64,
) -> Result<ParticleHistogram> {
    policy.check_grid(g)?;
    let k = g.energy_nodes();
    check_len(k, m0.len())?;
    if n_particles == 0 {
        return Err(invalid("n_particles", "must be positive"));
    }
    if m0.iter().any(|&x| !(x >= 0.0)) || m0.sum() <= 0.0 {
        return Err(invalid("m0", "density must be nonnegative with positive mass"));
    }
    let mut cumulative = Vec::with_capacity(k);
    let mut acc = 0.0;
    for &v in m0.iter() {
        acc += v;
        cumulative.push(acc);
    }
    let e_max = g.energy(k - 1);
    let node = |e: f64| ((e / g.de).round() as usize).min(k - 1);

    let blocks = n_particles.div_ceil(BLOCK);
    let partial: Vec<Array2<u64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let count = BLOCK.min(n_particles - b * BLOCK);
            let mut hist = Array2::<u64>::zeros(g.shape());
            for _ in 0..count {
                let u = rng.random::<f64>() * acc;
                let i = cumulative.partition_point(|&c| c <= u).min(k - 1);
                let lo = ((i as f64 - 0.5) * g.de).max(0.0);
                let hi = ((i as f64 + 0.5) * g.de).min(e_max);
                let mut e = lo + (hi - lo) * rng.random::<f64>();
                hist[[0, node(e)]] += 1;
                for n in 0..g.n_time {
                    e = (e - policy.get(n, node(e)) * g.dt).max(0.0);
                    hist[[n + 1, node(e)]] += 1;
                }
            }
            hist
        })
        .collect();
    let mut counts = Array2::<u64>::zeros(g.shape());
    for h in &partial {
        counts += h;
    }
    Ok(ParticleHistogram { counts, n_particles })
}
