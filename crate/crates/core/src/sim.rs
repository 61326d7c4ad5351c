//! Monte-Carlo simulator of the uplink training phase: block-fading channels,
//! LS channel estimation from received pilots, and empirical sum-MSE
//! statistics against the analytic prediction ‖G_B‖²_F − JK + JK·σ².
//!
//! Trials are independent and deterministically seeded from
//! (seed, σ² index, trial index), so grid points stream independently and
//! parallel execution reproduces the sequential result bit for bit
//! (aggregation is pairwise over the ordered per-trial values).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::metrics;
use crate::model::{ChannelModel, InterferenceMatrix, SequenceSet};
use crate::{Error, Result};

/// One Monte-Carlo experiment: a pilot set, B, a σ² grid, and a trial budget.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub set: SequenceSet,
    pub b: InterferenceMatrix,
    pub sigma_sq_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl SimulationConfig {
    fn check(&self) -> Result<()> {
        if self.b.order() != self.set.cells() {
            return Err(Error::DimensionMismatch(format!(
                "B has order {} but the set has {} cells",
                self.b.order(),
                self.set.cells()
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        for &s in &self.sigma_sq_grid {
            ChannelModel::new(s)?;
        }
        if self.sigma_sq_grid.is_empty() {
            return Err(Error::InvalidArgument("sigma^2 grid must be non-empty".into()));
        }
        Ok(())
    }
}

/// Statistics for one σ² grid point.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimPoint {
    pub sigma_sq: f64,
    /// Mean of the per-trial sum MSE over all JK users (un-normalized).
    pub empirical_mean: f64,
    pub standard_error: f64,
    /// Analytic prediction ‖G_B‖²_F − JK + JK·σ².
    pub analytic: f64,
    /// Per-user average of the empirical mean, for convenience.
    pub empirical_per_user: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulationReport {
    pub points: Vec<SimPoint>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream seed for (seed, σ²-index, trial).
fn derive_stream_seed(seed: u64, sigma_index: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ sigma_index as u64) ^ trial as u64)
}

/// CN(0,1): (g₁ + i·g₂)/√2 with independent standard normals.
fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

/// Received pilot signal at BS j:
/// y_j = Σ_{j̄} √β_{j,j̄} Σ_k h_{j,j̄,k}·s_{j̄,k} + n_j.
///
/// `channels` holds h_{j,j̄,k} at (k, j̄) for the receiving BS j; `noise` has
/// length τ.
pub fn received_pilot(
    set: &SequenceSet,
    b: &InterferenceMatrix,
    channels: &DMatrix<Complex64>,
    noise: &DVector<Complex64>,
    cell_index: usize,
) -> Result<DVector<Complex64>> {
    let j = set.cells();
    let k = set.users_per_cell();
    if b.order() != j {
        return Err(Error::DimensionMismatch(format!(
            "B has order {} but the set has {j} cells",
            b.order()
        )));
    }
    if channels.nrows() != k || channels.ncols() != j {
        return Err(Error::DimensionMismatch(format!(
            "channels must be {k}x{j} (user x cell), got {}x{}",
            channels.nrows(),
            channels.ncols()
        )));
    }
    if noise.len() != set.tau() {
        return Err(Error::DimensionMismatch(format!(
            "noise must have length tau = {}, got {}",
            set.tau(),
            noise.len()
        )));
    }
    if cell_index >= j {
        return Err(Error::InvalidArgument(format!(
            "cell index {cell_index} out of range for J = {j}"
        )));
    }

    let mut y = noise.clone();
    for jbar in 0..j {
        let gain = Complex64::new(b.beta(cell_index, jbar).sqrt(), 0.0);
        let block = set.cell_block(jbar);
        let h = channels.column(jbar);
        y += block * h * gain;
    }
    Ok(y)
}

/// LS estimate of h_{j,j,k}: ĥ = s_{j,k}ᴴ·y_j.
pub fn ls_estimate(set: &SequenceSet, y: &DVector<Complex64>, j: usize, k: usize) -> Complex64 {
    set.sequence(j, k).dotc(y)
}

/// Sum over all home-cell users of |h − ĥ|² for one channel/noise draw.
fn trial_sum_mse(set: &SequenceSet, b: &InterferenceMatrix, sigma_sq: f64, stream_seed: u64) -> f64 {
    let j = set.cells();
    let k = set.users_per_cell();
    let tau = set.tau();
    let noise_scale = Complex64::new(sigma_sq.sqrt(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);

    let mut total = 0.0;
    for receiver in 0..j {
        let channels = DMatrix::from_fn(k, j, |_, _| complex_gaussian(&mut rng));
        let noise = DVector::from_fn(tau, |_, _| complex_gaussian(&mut rng) * noise_scale);
        let y = received_pilot(set, b, &channels, &noise, receiver)
            .expect("dimensions checked by the caller");
        for user in 0..k {
            let estimate = ls_estimate(set, &y, receiver, user);
            total += (channels[(user, receiver)] - estimate).norm_sqr();
        }
    }
    total
}

fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Runs the full experiment: for each σ² and trial, draw h ~ CN(0,1) and
/// n ~ CN(0, σ²I), form the LS estimates, and accumulate Σ_{j,k}|h − ĥ|².
/// Reports mean, standard error, and the analytic prediction per grid point.
pub fn run_monte_carlo(config: &SimulationConfig) -> Result<SimulationReport> {
    config.check()?;
    let set = &config.set;
    let b = &config.b;
    let jk = (set.cells() * set.users_per_cell()) as f64;

    let mut points = Vec::with_capacity(config.sigma_sq_grid.len());
    for (sigma_index, &sigma_sq) in config.sigma_sq_grid.iter().enumerate() {
        let values: Vec<f64> = (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                let stream = derive_stream_seed(config.seed, sigma_index, trial);
                trial_sum_mse(set, b, sigma_sq, stream)
            })
            .collect();

        let n = values.len() as f64;
        let mean = pairwise_sum(&values) / n;
        let standard_error = if values.len() > 1 {
            let sq_dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            (pairwise_sum(&sq_dev) / (n * (n - 1.0))).sqrt()
        } else {
            0.0
        };
        points.push(SimPoint {
            sigma_sq,
            empirical_mean: mean,
            standard_error,
            analytic: metrics::sum_mse_analytic(set, b, sigma_sq)?,
            empirical_per_user: mean / jk,
            trials: values.len(),
        });
    }
    Ok(SimulationReport { points })
}
