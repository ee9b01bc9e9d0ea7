//! Flat TOML experiment configuration with the reference parameters as defaults.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use mfpa_core::mfg::SolverOptions;
use mfpa_core::model::{arrival_probability, uniform_density, validate_grid, Grid, SystemParams, VORONOI_SHAPE};
use mfpa_core::queueing::FixedPointOptions;
use ndarray::Array1;
use serde::Deserialize;
use toml::{Table, Value};

/// Keys holding integers; everything else numeric is a float.
const INTEGER_KEYS: &[&str] = &["J", "L", "M", "X", "Y", "max_iters", "max_iters2", "seed", "replications"];

/// Keys a sweep may vary.
pub const SWEEPABLE: &[&str] = &[
    "lambda_s",
    "lambda_u",
    "p_b",
    "arrival_rate_per_hour",
    "theta",
    "J",
    "L",
    "M",
    "p_max",
    "t_frame",
    "e_max",
    "sigma0",
    "alpha",
];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lambda_s: f64,
    pub lambda_u: f64,
    pub p_b: f64,
    pub arrival_rate_per_hour: f64,
    pub theta: f64,
    #[serde(rename = "J")]
    pub j_mpr: usize,
    #[serde(rename = "L")]
    pub n_channels: usize,
    #[serde(rename = "M")]
    pub queue_size: usize,
    pub p_max: f64,
    pub t_frame: f64,
    pub e_max: f64,
    pub sigma0: f64,
    pub alpha: f64,
    #[serde(rename = "X")]
    pub n_time: usize,
    #[serde(rename = "Y")]
    pub n_energy: usize,
    /// Outer tolerance in watts; `1e-5 P_max` when absent.
    pub tol: Option<f64>,
    pub max_iters: usize,
    pub damping: f64,
    pub tol2: f64,
    pub max_iters2: usize,
    pub damping2: f64,
    /// Initial power; `P_max / 2` when absent.
    pub p0_init: Option<f64>,
    /// `uniform` or `file:<path>` with one density value per energy node.
    pub m0_shape: String,
    pub sweep_param: Option<String>,
    pub sweep_values: Vec<f64>,
    pub seed: u64,
    pub replications: usize,
    /// Interferer disk radius for the interference check (km).
    pub radius: Option<f64>,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let t = SystemParams::reference();
        let fp = FixedPointOptions::default();
        Self {
            lambda_s: t.lambda_s,
            lambda_u: t.lambda_u,
            p_b: t.p_b,
            arrival_rate_per_hour: 12.0,
            theta: t.theta,
            j_mpr: t.j_mpr,
            n_channels: t.n_channels,
            queue_size: t.queue_size,
            p_max: t.p_max,
            t_frame: t.t_frame,
            e_max: t.e_max,
            sigma0: t.sigma0,
            alpha: t.alpha,
            n_time: 100,
            n_energy: 30,
            tol: None,
            max_iters: 200,
            damping: 0.5,
            tol2: fp.tol,
            max_iters2: fp.max_iters,
            damping2: fp.damping,
            p0_init: None,
            m0_shape: "uniform".into(),
            sweep_param: None,
            sweep_values: Vec::new(),
            seed: 1,
            replications: 4000,
            radius: None,
            output: PathBuf::from("out"),
        }
    }
}

/// Raw key table: the config file with command-line overrides applied.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigTable(Table);

impl ConfigTable {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self(text.parse::<Table>()?))
    }

    /// Applies one `key=value` override; values are read as TOML and fall
    /// back to a bare string.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| anyhow!("override '{assignment}' is not of the form key=value"))?;
        let key = key.trim();
        if key.is_empty() {
            bail!("override '{assignment}' has an empty key");
        }
        let value = value.trim();
        let parsed = format!("v = {value}")
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(value.to_string()));
        self.0.insert(key.to_string(), parsed);
        Ok(())
    }

    /// Sets a numeric key, stored as an integer for integer-valued keys.
    pub fn set_number(&mut self, key: &str, v: f64) -> Result<()> {
        let value = if INTEGER_KEYS.contains(&key) {
            if v.fract() != 0.0 || v < 0.0 {
                bail!("{key} takes a nonnegative integer (got {v})");
            }
            Value::Integer(v as i64)
        } else {
            Value::Float(v)
        };
        self.0.insert(key.to_string(), value);
        Ok(())
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = self.0.clone().try_into().context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn params(&self) -> SystemParams {
        SystemParams {
            lambda_s: self.lambda_s,
            lambda_u: self.lambda_u,
            p_b: self.p_b,
            p_a: arrival_probability(self.arrival_rate_per_hour, self.t_frame),
            theta: self.theta,
            j_mpr: self.j_mpr,
            n_channels: self.n_channels,
            queue_size: self.queue_size,
            p_max: self.p_max,
            t_frame: self.t_frame,
            e_max: self.e_max,
            sigma0: self.sigma0,
            alpha: self.alpha,
            gamma_shape: VORONOI_SHAPE,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(&self.params(), self.n_time, self.n_energy)?)
    }

    pub fn solver_options(&self) -> SolverOptions {
        let p = self.params();
        let mut o = SolverOptions::for_params(&p);
        if let Some(t) = self.tol {
            o.tol = t;
        }
        if let Some(p0) = self.p0_init {
            o.initial_power = p0;
        }
        o.max_iters = self.max_iters;
        o.damping = self.damping;
        o.fixed_point = FixedPointOptions {
            tol: self.tol2,
            max_iters: self.max_iters2,
            damping: self.damping2,
            ..FixedPointOptions::default()
        };
        o
    }

    /// Initial energy density on the grid, normalised to unit mass.
    pub fn initial_density(&self, g: &Grid) -> Result<Array1<f64>> {
        if self.m0_shape == "uniform" {
            return Ok(uniform_density(g));
        }
        let Some(path) = self.m0_shape.strip_prefix("file:") else {
            bail!("m0_shape must be 'uniform' or 'file:<path>' (got '{}')", self.m0_shape);
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading m0 file {path}"))?;
        let values = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().with_context(|| format!("bad m0 value '{s}'")))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != g.energy_nodes() {
            bail!("m0 file has {} values, the grid has {} energy nodes", values.len(), g.energy_nodes());
        }
        if values.iter().any(|&v| !(v >= 0.0)) {
            bail!("m0 values must be nonnegative");
        }
        let mass: f64 = values.iter().sum::<f64>() * g.de;
        if !(mass > 0.0) {
            bail!("m0 has zero mass");
        }
        Ok(Array1::from(values) / mass)
    }

    /// Checks every key before any work starts.
    pub fn validate(&self) -> Result<()> {
        let p = self.params();
        if !(self.arrival_rate_per_hour >= 0.0) {
            bail!("arrival_rate_per_hour must be nonnegative (got {})", self.arrival_rate_per_hour);
        }
        p.validate()?;
        let g = self.grid()?;
        validate_grid(&p, &g)?;
        self.solver_options().validate(&p)?;
        if self.m0_shape != "uniform" && !self.m0_shape.starts_with("file:") {
            bail!("m0_shape must be 'uniform' or 'file:<path>' (got '{}')", self.m0_shape);
        }
        if self.replications == 0 {
            bail!("replications must be positive");
        }
        if let Some(r) = self.radius {
            if !(r > 0.0) {
                bail!("radius must be positive (got {r})");
            }
        }
        if let Some(axis) = &self.sweep_param {
            if !SWEEPABLE.contains(&axis.as_str()) {
                bail!("sweep_param '{axis}' is not a sweepable key ({})", SWEEPABLE.join(", "));
            }
        }
        Ok(())
    }

    /// The sweep axis and its values; exactly one axis with at least one value.
    pub fn sweep_axis(&self) -> Result<(&str, &[f64])> {
        let axis = self
            .sweep_param
            .as_deref()
            .ok_or_else(|| anyhow!("sweep needs sweep_param"))?;
        if self.sweep_values.is_empty() {
            bail!("sweep needs a nonempty sweep_values list");
        }
        Ok((axis, &self.sweep_values))
    }
}
