//! Network parameters, the time x energy lattice, and fields defined on it.
//!
//! Units: lengths in km, densities per km², power in W, energy in J and
//! time in s. The km length unit follows from the unit-distance cap on the
//! path loss; with it `r^-alpha` is dimensionless.

use ndarray::{Array1, Array2, ArrayView1, ArrayViewMut1};

use crate::error::{invalid, Error, Result};

/// Shape constant of the gamma approximation of the Voronoi cell area.
pub const VORONOI_SHAPE: f64 = 3.575;

/// Scalar network and protocol parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// BS density (BS/km²).
    pub lambda_s: f64,
    /// Device density (devices/km²).
    pub lambda_u: f64,
    /// Access barring probability.
    pub p_b: f64,
    /// Per-frame packet arrival probability.
    pub p_a: f64,
    /// SINR threshold.
    pub theta: f64,
    /// Multi-packet reception capability.
    pub j_mpr: usize,
    /// Number of orthogonal channels.
    pub n_channels: usize,
    /// Queue capacity in packets.
    pub queue_size: usize,
    /// Maximum transmit power (W).
    pub p_max: f64,
    /// Frame duration (s).
    pub t_frame: f64,
    /// Energy budget per frame (J).
    pub e_max: f64,
    /// Noise power (W).
    pub sigma0: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Voronoi-area gamma shape, always [`VORONOI_SHAPE`].
    pub gamma_shape: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::reference()
    }
}

impl SystemParams {
    /// Reference parameterisation: lambda_s = 10 BS/km², J = 3 and one
    /// packet every five minutes; the remaining values are the nominal
    /// network constants.
    pub fn reference() -> Self {
        let t_frame = 0.01;
        Self {
            lambda_s: 10.0,
            lambda_u: 3000.0,
            p_b: 0.1,
            p_a: arrival_probability(12.0, t_frame),
            theta: 10.0,
            j_mpr: 3,
            n_channels: 30,
            queue_size: 10,
            p_max: 0.025,
            t_frame,
            e_max: 1e-4,
            sigma0: 1e-23,
            alpha: 4.0,
            gamma_shape: VORONOI_SHAPE,
        }
    }

    /// Per-channel density of devices attempting a transmission,
    /// `lambda_u (1 - p_b) pi_a / L`.
    pub fn active_density(&self, pi_a: f64) -> f64 {
        self.lambda_u * (1.0 - self.p_b) * pi_a / self.n_channels as f64
    }

    /// Mean-field path gain `(2 sqrt(lambda_s))^alpha`, the inverse path loss
    /// at the mean serving distance.
    pub fn mean_path_gain(&self) -> f64 {
        (2.0 * self.lambda_s.sqrt()).powf(self.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        validate_params(self)
    }
}

/// Converts an arrival rate in packets/hour into a per-frame Bernoulli
/// probability.
pub fn arrival_probability(packets_per_hour: f64, t_frame: f64) -> f64 {
    packets_per_hour / 3600.0 * t_frame
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be strictly positive (got {v})")))
    }
}

fn probability(field: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(field, format!("probability out of range [0, 1] (got {v})")))
    }
}

/// Checks every parameter invariant and names the first offending field.
pub fn validate_params(p: &SystemParams) -> Result<()> {
    positive("lambda_s", p.lambda_s)?;
    positive("lambda_u", p.lambda_u)?;
    probability("p_b", p.p_b)?;
    probability("p_a", p.p_a)?;
    positive("theta", p.theta)?;
    if p.j_mpr == 0 {
        return Err(invalid("j_mpr", "must be a positive integer"));
    }
    if p.n_channels == 0 {
        return Err(invalid("n_channels", "must be a positive integer"));
    }
    if p.queue_size == 0 {
        return Err(invalid("queue_size", "must be a positive integer"));
    }
    positive("p_max", p.p_max)?;
    positive("t_frame", p.t_frame)?;
    positive("e_max", p.e_max)?;
    positive("sigma0", p.sigma0)?;
    if !(p.alpha.is_finite() && p.alpha > 2.0) {
        return Err(invalid("alpha", format!("alpha must exceed 2 (got {})", p.alpha)));
    }
    if p.gamma_shape != VORONOI_SHAPE {
        return Err(invalid(
            "gamma_shape",
            format!("must equal {VORONOI_SHAPE} (got {})", p.gamma_shape),
        ));
    }
    Ok(())
}

/// Uniform lattice over `[0, T_f] x [0, E_max]` with `X + 1` time nodes and
/// `Y + 1` energy nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n_time: usize,
    pub n_energy: usize,
    pub dt: f64,
    pub de: f64,
}

impl Grid {
    pub const DEFAULT_TIME_STEPS: usize = 100;
    pub const DEFAULT_ENERGY_STEPS: usize = 30;

    pub fn new(p: &SystemParams, n_time: usize, n_energy: usize) -> Result<Self> {
        if n_time == 0 {
            return Err(invalid("n_time", "must be a positive integer"));
        }
        if n_energy == 0 {
            return Err(invalid("n_energy", "must be a positive integer"));
        }
        Ok(Self {
            n_time,
            n_energy,
            dt: p.t_frame / n_time as f64,
            de: p.e_max / n_energy as f64,
        })
    }

    pub fn default_for(p: &SystemParams) -> Result<Self> {
        Self::new(p, Self::DEFAULT_TIME_STEPS, Self::DEFAULT_ENERGY_STEPS)
    }

    /// Number of time nodes, `X + 1`.
    pub fn time_nodes(&self) -> usize {
        self.n_time + 1
    }

    /// Number of energy nodes, `Y + 1`.
    pub fn energy_nodes(&self) -> usize {
        self.n_energy + 1
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn energy(&self, i: usize) -> f64 {
        i as f64 * self.de
    }

    /// Nearest time node, clamped to the lattice.
    pub fn time_index(&self, t: f64) -> usize {
        nearest_index(t, self.dt, self.n_time)
    }

    /// Nearest energy node, clamped to the lattice.
    pub fn energy_index(&self, e: f64) -> usize {
        nearest_index(e, self.de, self.n_energy)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.time_nodes(), self.energy_nodes())
    }
}

fn nearest_index(x: f64, step: f64, max: usize) -> usize {
    let k = (x / step).round();
    if k <= 0.0 {
        0
    } else {
        (k as usize).min(max)
    }
}

/// Returns the CFL number `P_max dt / dE`, failing if it exceeds one.
pub fn validate_grid(p: &SystemParams, g: &Grid) -> Result<f64> {
    let cfl = p.p_max * g.dt / g.de;
    if cfl > 1.0 {
        Err(Error::Cfl { cfl })
    } else {
        Ok(cfl)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRole {
    Policy,
    Density,
    Costate,
}

/// Real-valued function on the lattice, indexed `[time, energy]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub role: FieldRole,
    pub values: Array2<f64>,
}

impl Field {
    pub fn zeros(role: FieldRole, g: &Grid) -> Self {
        Self {
            role,
            values: Array2::zeros(g.shape()),
        }
    }

    pub fn from_fn(role: FieldRole, g: &Grid, f: impl Fn(usize, usize) -> f64) -> Self {
        Self {
            role,
            values: Array2::from_shape_fn(g.shape(), |(n, i)| f(n, i)),
        }
    }

    pub fn from_values(role: FieldRole, g: &Grid, values: Array2<f64>) -> Result<Self> {
        check_shape(g, values.dim())?;
        Ok(Self { role, values })
    }

    pub fn slice(&self, n: usize) -> ArrayView1<'_, f64> {
        self.values.row(n)
    }

    pub fn slice_mut(&mut self, n: usize) -> ArrayViewMut1<'_, f64> {
        self.values.row_mut(n)
    }

    pub fn get(&self, n: usize, i: usize) -> f64 {
        self.values[[n, i]]
    }

    pub fn dim(&self) -> (usize, usize) {
        self.values.dim()
    }

    pub fn check_grid(&self, g: &Grid) -> Result<()> {
        check_shape(g, self.values.dim())
    }
}

pub(crate) fn check_shape(g: &Grid, found: (usize, usize)) -> Result<()> {
    if found == g.shape() {
        Ok(())
    } else {
        Err(Error::Shape {
            expected: format!("{:?}", g.shape()),
            found: format!("{found:?}"),
        })
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Shape {
            expected: expected.to_string(),
            found: found.to_string(),
        })
    }
}

/// Uniform density over `[0, E_max]` on the energy nodes, normalised so
/// that `sum_i m_i dE = 1`.
pub fn uniform_density(g: &Grid) -> Array1<f64> {
    let k = g.energy_nodes() as f64;
    Array1::from_elem(g.energy_nodes(), 1.0 / (k * g.de))
}

/// Total mass `sum_i m_i dE` of a density slice.
pub fn slice_mass(m: ArrayView1<'_, f64>, g: &Grid) -> f64 {
    m.sum() * g.de
}
