//! Monte Carlo ensembles over media with randomly perturbed time profiles.
//!
//! Each path adds a coloured noise series, sampled on the master grid, to one
//! of `xi`, `eta`, `chi`; the result is tabulated as a cubic spline and run
//! through the deterministic pipeline. Path `k` draws from the ChaCha stream
//! keyed by `(seed, k, attempt)`, so results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{MediumProfile, Profile, medium_to_hamiltonian};
use crate::ermakov::ErmakovInit;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::observables::FockObservables;
use crate::pipeline::{Pipeline, PipelineOptions};
use crate::spline::CubicSpline;

/// Retries per path after the first positivity failure.
pub const RETRY_BUDGET: u32 = 10;
/// Largest tolerated fraction of failed paths.
pub const MAX_FAILED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseTarget {
    Xi,
    Eta,
    Chi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    OrnsteinUhlenbeck,
    Telegraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub target: NoiseTarget,
    pub model: NoiseModel,
    /// Stationary standard deviation (OU) or switching level (telegraph).
    pub amplitude: f64,
    pub correlation_time: f64,
    pub seed: u64,
    pub paths: usize,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::config("noise.amplitude", "must be finite and >= 0"));
        }
        if !(self.correlation_time.is_finite() && self.correlation_time > 0.0) {
            return Err(Error::config("noise.correlation_time", "must be finite and > 0"));
        }
        if self.paths == 0 {
            return Err(Error::config("noise.paths", "must be at least 1"));
        }
        Ok(())
    }
}

fn path_rng(seed: u64, path: u64, attempt: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path * 16 + attempt as u64);
    rng
}

/// Noise values at the grid nodes, stationary from `t = 0`.
fn noise_series(spec: &NoiseSpec, times: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let amp = spec.amplitude;
    let tc = spec.correlation_time;
    let mut out = Vec::with_capacity(times.len());
    match spec.model {
        NoiseModel::OrnsteinUhlenbeck => {
            let mut x: f64 = amp * rng.sample::<f64, _>(StandardNormal);
            out.push(x);
            for w in times.windows(2) {
                let decay = (-(w[1] - w[0]) / tc).exp();
                let kick: f64 = rng.sample(StandardNormal);
                x = x * decay + amp * (1.0 - decay * decay).sqrt() * kick;
                out.push(x);
            }
        }
        NoiseModel::Telegraph => {
            // flip rate 1/(2 tc) gives autocorrelation exp(−|Δt|/tc)
            let holding = Exp::new(0.5 / tc).expect("positive rate");
            let mut level = if rng.random::<bool>() { amp } else { -amp };
            let mut next_flip = rng.sample(holding);
            for &t in times {
                while next_flip <= t {
                    level = -level;
                    next_flip += rng.sample(holding);
                }
                out.push(level);
            }
        }
    }
    out
}

fn target_profile(profile: &mut MediumProfile, target: NoiseTarget) -> &mut Profile {
    match target {
        NoiseTarget::Xi => &mut profile.xi,
        NoiseTarget::Eta => &mut profile.eta,
        NoiseTarget::Chi => &mut profile.chi,
    }
}

/// Checks positivity at the nodes and at interval midpoints of the spline.
fn admissible(profile: &MediumProfile, grid: &TimeGrid) -> bool {
    if profile.validate(grid).is_err() {
        return false;
    }
    let mids: Vec<f64> = grid.times().windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    mids.iter().all(|&t| {
        profile.xi.value(t) > 0.0 && profile.eta.value(t) > 0.0 && profile.chi.value(t) >= 0.0
    })
}

/// The medium for path `path_index`: the base profile with noise added to the target.
pub fn sample_path(
    spec: &NoiseSpec,
    base: &MediumProfile,
    grid: &TimeGrid,
    path_index: u64,
) -> Result<MediumProfile> {
    spec.validate()?;
    if spec.amplitude == 0.0 {
        return Ok(base.clone());
    }
    let times = grid.times();
    for attempt in 0..=RETRY_BUDGET {
        let mut rng = path_rng(spec.seed, path_index, attempt);
        let noise = noise_series(spec, times, &mut rng);
        let mut medium = base.clone();
        let target = target_profile(&mut medium, spec.target);
        let values: Vec<f64> = times
            .iter()
            .zip(&noise)
            .map(|(&t, n)| target.value(t) + n)
            .collect();
        *target = Profile::Table(CubicSpline::new(times.to_vec(), values)?);
        if admissible(&medium, grid) {
            return Ok(medium);
        }
    }
    Err(Error::PathRejected {
        path: path_index,
        attempts: RETRY_BUDGET + 1,
    })
}

/// Per-time values of the aggregated observables.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ObservableSeries {
    pub var_x: Vec<f64>,
    pub var_p: Vec<f64>,
    pub product: Vec<f64>,
    pub xbar: Vec<f64>,
    pub pbar: Vec<f64>,
}

impl ObservableSeries {
    pub const NAMES: [&'static str; 5] = ["var_x", "var_p", "product", "xbar", "pbar"];

    pub fn columns(&self) -> [&[f64]; 5] {
        [&self.var_x, &self.var_p, &self.product, &self.xbar, &self.pbar]
    }

    fn from_columns(mut cols: Vec<Vec<f64>>) -> Self {
        let pbar = cols.pop().unwrap_or_default();
        let xbar = cols.pop().unwrap_or_default();
        let product = cols.pop().unwrap_or_default();
        let var_p = cols.pop().unwrap_or_default();
        let var_x = cols.pop().unwrap_or_default();
        ObservableSeries {
            var_x,
            var_p,
            product,
            xbar,
            pbar,
        }
    }
}

fn pick(o: &FockObservables, k: usize) -> f64 {
    match k {
        0 => o.var_x,
        1 => o.var_p,
        2 => o.product,
        3 => o.xbar,
        _ => o.pbar,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub times: Vec<f64>,
    pub mean: ObservableSeries,
    pub stderr: ObservableSeries,
    pub paths: usize,
    pub failed: usize,
    /// Smallest uncertainty product over all times and successful paths.
    pub min_product: f64,
    /// `max_t |E[x̄] − x̄_base|` and the same for `p̄`, against the noise-free run.
    pub linear_gap: (f64, f64),
}

/// Sum by recursive halving; independent of thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = pairwise_sum(values) / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = pairwise_sum(&dev) / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Runs the pipeline for one sampled medium.
pub fn run_path(
    spec: &NoiseSpec,
    base: &MediumProfile,
    grid: &TimeGrid,
    init: &ErmakovInit,
    fock_index: u32,
    options: PipelineOptions,
    path_index: u64,
) -> Result<Pipeline> {
    let medium = sample_path(spec, base, grid, path_index).map_err(|e| e.in_stage("stochastic"))?;
    let set = medium_to_hamiltonian(&medium, grid).map_err(|e| e.in_stage("coefficients"))?;
    Pipeline::run(set, Some(medium), grid, *init, fock_index, options)
}

pub fn run_ensemble(
    spec: &NoiseSpec,
    base: &MediumProfile,
    init: &ErmakovInit,
    fock_index: u32,
    grid: &TimeGrid,
    options: PipelineOptions,
) -> Result<EnsembleSummary> {
    spec.validate()?;
    let reference = {
        let set = medium_to_hamiltonian(base, grid).map_err(|e| e.in_stage("coefficients"))?;
        Pipeline::run(set, Some(base.clone()), grid, *init, fock_index, options)?
    };

    let results: Vec<Result<Vec<FockObservables>>> = (0..spec.paths as u64)
        .into_par_iter()
        .map(|k| run_path(spec, base, grid, init, fock_index, options, k).map(|p| p.observables))
        .collect();
    let total = results.len();
    let good: Vec<Vec<FockObservables>> = results.into_iter().filter_map(|r| r.ok()).collect();
    let failed = total - good.len();
    if good.is_empty() || failed as f64 > MAX_FAILED_FRACTION * total as f64 {
        return Err(Error::Ensemble { failed, total });
    }

    let n_times = grid.len();
    let mut means: Vec<Vec<f64>> = (0..5).map(|_| Vec::with_capacity(n_times)).collect();
    let mut errs: Vec<Vec<f64>> = (0..5).map(|_| Vec::with_capacity(n_times)).collect();
    let mut column = Vec::with_capacity(good.len());
    for i in 0..n_times {
        for k in 0..5 {
            column.clear();
            column.extend(good.iter().map(|path| pick(&path[i], k)));
            let (m, s) = mean_and_stderr(&column);
            means[k].push(m);
            errs[k].push(s);
        }
    }
    let min_product = good
        .iter()
        .flat_map(|p| p.iter().map(|o| o.product))
        .fold(f64::INFINITY, f64::min);
    let mean = ObservableSeries::from_columns(means);
    let gap = |series: &[f64], k: usize| {
        series
            .iter()
            .zip(&reference.observables)
            .map(|(m, o)| (m - pick(o, k)).abs())
            .fold(0.0, f64::max)
    };
    let linear_gap = (gap(&mean.xbar, 3), gap(&mean.pbar, 4));
    Ok(EnsembleSummary {
        times: grid.times().to_vec(),
        mean,
        stderr: ObservableSeries::from_columns(errs),
        paths: total,
        failed,
        min_product,
        linear_gap,
    })
}
