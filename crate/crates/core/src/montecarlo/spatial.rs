//! Poisson point processes in a disk, nearest-BS association and the
//! empirical distance and occupancy laws.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::error::{invalid, Error, Result};
use crate::geometry::{active_count_pmf, nearest_distance_cdf};
use crate::model::SystemParams;

use super::{stream_rng, total_variation};

/// Fewest association distances accepted by [`empirical_distance_cdf`].
pub const MIN_DISTANCE_SAMPLES: usize = 10_000;
/// Fewest interior cells accepted by [`empirical_active_count`].
pub const MIN_ACTIVE_CELLS: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist2(&self, o: &Point) -> f64 {
        (self.x - o.x).powi(2) + (self.y - o.y).powi(2)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

fn poisson_count<R: Rng>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    // rand_distr returns the count as a float
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

pub(crate) fn uniform_in_disk<R: Rng>(radius: f64, rng: &mut R) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let t = 2.0 * PI * rng.random::<f64>();
    Point::new(r * t.cos(), r * t.sin())
}

pub(crate) fn sample_ppp_with<R: Rng>(intensity: f64, radius: f64, rng: &mut R) -> Vec<Point> {
    let n = poisson_count(intensity * PI * radius * radius, rng);
    (0..n).map(|_| uniform_in_disk(radius, rng)).collect()
}

/// Homogeneous PPP of `intensity` points per km² in the disk of `radius`
/// km centred at the origin.
pub fn sample_ppp(intensity: f64, radius: f64, seed: u64) -> Result<Vec<Point>> {
    if !(intensity >= 0.0) || !intensity.is_finite() {
        return Err(invalid("intensity", format!("must be nonnegative (got {intensity})")));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid("radius", format!("must be positive (got {radius})")));
    }
    Ok(sample_ppp_with(intensity, radius, &mut stream_rng(seed, 0)))
}

/// Uniform bucket grid for nearest-neighbour queries.
struct BucketIndex<'a> {
    points: &'a [Point],
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> BucketIndex<'a> {
    fn new(points: &'a [Point]) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in points {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        let area = ((x1 - x0) * (y1 - y0)).max(1e-12);
        // about two points per bucket
        let cell = (2.0 * area / points.len() as f64).sqrt().max(1e-9);
        let nx = (((x1 - x0) / cell) as usize + 1).max(1);
        let ny = (((y1 - y0) / cell) as usize + 1).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        let origin = Point::new(x0, y0);
        let mut index = Self { points, origin, cell, nx, ny, buckets: Vec::new() };
        for (k, p) in points.iter().enumerate() {
            let (bx, by) = index.bucket_of(p);
            buckets[by * nx + bx].push(k as u32);
        }
        index.buckets = buckets;
        index
    }

    fn bucket_of(&self, p: &Point) -> (usize, usize) {
        let bx = ((p.x - self.origin.x) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let by = ((p.y - self.origin.y) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (bx, by)
    }

    /// Index of the nearest point; ties go to the lower index.
    fn nearest(&self, q: &Point) -> usize {
        let (bx, by) = self.bucket_of(q);
        let (bx, by) = (bx as isize, by as isize);
        let mut best = (f64::INFINITY, usize::MAX);
        let max_ring = self.nx.max(self.ny) as isize;
        for ring in 0..=max_ring {
            for dy in -ring..=ring {
                for dx in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    let (x, y) = (bx + dx, by + dy);
                    if x < 0 || y < 0 || x >= self.nx as isize || y >= self.ny as isize {
                        continue;
                    }
                    for &k in &self.buckets[y as usize * self.nx + x as usize] {
                        let d = self.points[k as usize].dist2(q);
                        let k = k as usize;
                        if d < best.0 || (d == best.0 && k < best.1) {
                            best = (d, k);
                        }
                    }
                }
            }
            // unvisited buckets lie at least `ring * cell` away, also for
            // queries clamped in from outside the bounding box
            let reach = ring as f64 * self.cell;
            if best.1 != usize::MAX && reach * reach >= best.0 {
                break;
            }
        }
        best.1
    }
}

/// One spatial realisation: BSs, devices, nearest-BS association and a
/// unit-mean exponential fading draw per device link.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSample {
    pub bs_points: Vec<Point>,
    pub device_points: Vec<Point>,
    pub associations: Vec<usize>,
    pub fading: Vec<f64>,
    pub radius: f64,
    /// Centre of the sampling disk.
    pub centre: Point,
    pub rng_seed: u64,
}

impl NetworkSample {
    /// Independent PPPs of BSs and devices in the disk of `radius`.
    pub fn generate(lambda_s: f64, lambda_u: f64, radius: f64, seed: u64, stream: u64) -> Result<Self> {
        if !(lambda_s > 0.0) || !(lambda_u >= 0.0) {
            return Err(invalid("intensity", "BS density must be positive and device density nonnegative"));
        }
        if !(radius > 0.0) {
            return Err(invalid("radius", format!("must be positive (got {radius})")));
        }
        let mut rng = stream_rng(seed, stream);
        let mut bs = sample_ppp_with(lambda_s, radius, &mut rng);
        if bs.is_empty() {
            bs.push(uniform_in_disk(radius, &mut rng));
        }
        let devices = sample_ppp_with(lambda_u, radius, &mut rng);
        let fading = (0..devices.len()).map(|_| Exp1.sample(&mut rng)).collect();
        Self::from_points(bs, devices, fading, radius, seed)
    }

    /// Associates every device with its nearest BS.
    pub fn from_points(
        bs_points: Vec<Point>,
        device_points: Vec<Point>,
        fading: Vec<f64>,
        radius: f64,
        rng_seed: u64,
    ) -> Result<Self> {
        if bs_points.is_empty() {
            return Err(invalid("bs_points", "at least one BS is required"));
        }
        if fading.len() != device_points.len() {
            return Err(Error::Shape {
                expected: device_points.len().to_string(),
                found: fading.len().to_string(),
            });
        }
        let index = BucketIndex::new(&bs_points);
        let associations = device_points.iter().map(|d| index.nearest(d)).collect();
        Ok(Self {
            bs_points,
            device_points,
            associations,
            fading,
            radius,
            centre: Point::new(0.0, 0.0),
            rng_seed,
        })
    }

    /// Rigid translation of every point, with associations recomputed.
    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self> {
        let shift = |v: &[Point]| v.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect();
        let mut out = Self::from_points(
            shift(&self.bs_points),
            shift(&self.device_points),
            self.fading.clone(),
            self.radius,
            self.rng_seed,
        )?;
        out.centre = Point::new(self.centre.x + dx, self.centre.y + dy);
        Ok(out)
    }

    /// Association distances of devices within `R/2` of the window centre.
    pub fn interior_distances(&self) -> Vec<f64> {
        let centre = self.centre;
        let half2 = (0.5 * self.radius).powi(2);
        self.device_points
            .iter()
            .zip(&self.associations)
            .filter(|(d, _)| d.dist2(&centre) <= half2)
            .map(|(d, &b)| d.dist2(&self.bs_points[b]).sqrt())
            .collect()
    }
}

/// Sorted sample with its Kolmogorov-Smirnov distance to the analytic
/// nearest-BS distance law.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceCdfReport {
    pub distances: Vec<f64>,
    pub ks_distance: f64,
    /// `1.63 / sqrt(n)`.
    pub ks_band: f64,
}

impl DistanceCdfReport {
    pub fn n(&self) -> usize {
        self.distances.len()
    }

    /// Empirical CDF at `r`.
    pub fn cdf(&self, r: f64) -> f64 {
        self.distances.partition_point(|&d| d <= r) as f64 / self.n() as f64
    }

    pub fn passes(&self) -> bool {
        self.ks_distance < self.ks_band
    }
}

/// KS distance between sorted samples and a continuous CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0f64, |acc, (k, &x)| {
        let f = cdf(x);
        acc.max((k as f64 + 1.0) / n - f).max(f - k as f64 / n)
    })
}

/// Empirical law of the device-to-serving-BS distance over the inner half
/// radius of each sample, compared with the nearest-distance CDF at
/// `lambda_s`.
pub fn empirical_distance_cdf<'a>(
    lambda_s: f64,
    samples: impl IntoIterator<Item = &'a NetworkSample>,
) -> Result<DistanceCdfReport> {
    let p = SystemParams { lambda_s, ..SystemParams::reference() };
    let mut distances = Vec::new();
    for s in samples {
        distances.extend(s.interior_distances());
    }
    if distances.len() < MIN_DISTANCE_SAMPLES {
        return Err(Error::InsufficientSamples(format!(
            "{} association distances, need at least {MIN_DISTANCE_SAMPLES}",
            distances.len()
        )));
    }
    distances.sort_by(f64::total_cmp);
    let ks_distance = ks_statistic(&distances, |r| nearest_distance_cdf(&p, r).unwrap_or(0.0));
    let ks_band = 1.63 / (distances.len() as f64).sqrt();
    Ok(DistanceCdfReport { distances, ks_distance, ks_band })
}

/// Per-cell counts of active devices on one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveCountReport {
    /// Empirical pmf indexed by count.
    pub pmf: Vec<f64>,
    pub cells: usize,
    pub mean: f64,
    pub se_mean: f64,
    /// Total-variation distance to the gamma-mixture pmf, tail included.
    pub tv_distance: f64,
}

/// Thins every device with probability `(1-p_b) pi_a / L`, counts the
/// retained devices associated with each BS inside the inner half radius
/// and compares the histogram with [`active_count_pmf`].
pub fn empirical_active_count<'a>(
    p: &SystemParams,
    pi_a: f64,
    samples: impl IntoIterator<Item = &'a NetworkSample>,
    seed: u64,
) -> Result<ActiveCountReport> {
    if !(0.0..=1.0).contains(&pi_a) {
        return Err(invalid("pi_a", format!("probability out of range [0, 1] (got {pi_a})")));
    }
    let keep = (1.0 - p.p_b) * pi_a / p.n_channels as f64;
    let mut counts: Vec<u64> = Vec::new();
    for (k, s) in samples.into_iter().enumerate() {
        let mut rng = stream_rng(seed, k as u64);
        let mut per_bs = vec![0u64; s.bs_points.len()];
        for &b in &s.associations {
            if rng.random::<f64>() < keep {
                per_bs[b] += 1;
            }
        }
        let centre = s.centre;
        let half2 = (0.5 * s.radius).powi(2);
        counts.extend(
            s.bs_points
                .iter()
                .zip(per_bs)
                .filter(|(b, _)| b.dist2(&centre) <= half2)
                .map(|(_, c)| c),
        );
    }
    let cells = counts.len();
    if cells < MIN_ACTIVE_CELLS {
        return Err(Error::InsufficientSamples(format!(
            "{cells} interior cells, need at least {MIN_ACTIVE_CELLS}"
        )));
    }
    let top = counts.iter().copied().max().unwrap_or(0) as usize;
    let mut pmf = vec![0.0; top + 1];
    for &c in &counts {
        pmf[c as usize] += 1.0;
    }
    pmf.iter_mut().for_each(|v| *v /= cells as f64);
    let values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let est = super::McEstimate::from_samples(&values);

    let analytic: Vec<f64> = (0..=top).map(|k| active_count_pmf(p, pi_a, k)).collect();
    let tail = (1.0 - analytic.iter().sum::<f64>()).max(0.0);
    let tv_distance = total_variation(&pmf, &analytic) + 0.5 * tail;
    Ok(ActiveCountReport {
        pmf,
        cells,
        mean: est.mean,
        se_mean: est.se,
        tv_distance,
    })
}
