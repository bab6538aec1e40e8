//! Rate and heat-map experiments.
//!
//! Every cell draws its own sample from a seed derived from the master seed,
//! the sample size and the repetition, so results do not depend on how cells
//! are scheduled across threads.

use std::time::Instant;

use anyhow::{bail, ensure, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wopt_core::multivariate::w1_closed_form_md;
use wopt_core::oracle::w1_exact;
use wopt_core::path::{
    exact_covering_walk, heuristic_covering_walk, k2_lower_bound, EXACT_SIZE_LIMIT,
};
use wopt_core::univariate::{build_gstar_1d, fixed_k_optimum_1d, k1_lower_bound};
use wopt_core::{DiscreteMeasure, SampleCloud};

/// The law `mu` the samples are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetDistribution {
    UniformInterval { a: f64, b: f64 },
    StandardGaussian,
    UniformBox { dim: usize },
}

impl TargetDistribution {
    pub fn dim(&self) -> usize {
        match self {
            Self::UniformInterval { .. } | Self::StandardGaussian => 1,
            Self::UniformBox { dim } => *dim,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::UniformInterval { a, b } => {
                ensure!(a < b && a.is_finite() && b.is_finite(), "need a < b")
            }
            Self::UniformBox { dim } => ensure!(dim >= 1, "box dimension must be positive"),
            Self::StandardGaussian => {}
        }
        Ok(())
    }

    /// Generalized inverse of the distribution function (one-dimensional
    /// targets only).
    pub fn quantile(&self, p: f64) -> Option<f64> {
        match *self {
            Self::UniformInterval { a, b } => Some(a + p * (b - a)),
            Self::UniformBox { dim: 1 } => Some(p),
            Self::StandardGaussian => Some(normal_quantile(p)),
            Self::UniformBox { .. } => None,
        }
    }

    pub fn sample_with(&self, rng: &mut ChaCha8Rng, n: usize) -> Result<SampleCloud> {
        self.validate()?;
        ensure!(n >= 1, "need at least one sample");
        let coords: Vec<f64> = match *self {
            Self::UniformInterval { a, b } => {
                (0..n).map(|_| a + (b - a) * rng.random::<f64>()).collect()
            }
            Self::StandardGaussian => (0..n).map(|_| StandardNormal.sample(rng)).collect(),
            Self::UniformBox { dim } => (0..n * dim).map(|_| rng.random::<f64>()).collect(),
        };
        Ok(SampleCloud::new(coords, self.dim())?)
    }
}

/// Seeded i.i.d. draws; identical output for identical `(target, n, seed)`.
pub fn sample_target(target: &TargetDistribution, n: usize, seed: u64) -> Result<SampleCloud> {
    target.sample_with(&mut ChaCha8Rng::seed_from_u64(seed), n)
}

/// Acklam's rational approximation refined by one Halley step.
fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.38357751867269e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    let low = 0.02425;
    let x = if p < low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// How the Lipschitz budget of a cell is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum KRule {
    /// `K = factor * lower bound` of the cell's sample.
    MultipleOfLower { factor: f64 },
    /// Fixed budgets, one cell per value.
    Absolute { values: Vec<f64> },
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub target: TargetDistribution,
    /// Ascending sample sizes.
    pub n_grid: Vec<usize>,
    pub k_rule: KRule,
    pub repetitions: usize,
    /// Latent grid size used to discretize generators.
    pub oracle_grid: usize,
    /// Size of the reference sample standing in for `mu`; `0` skips the
    /// estimate of `W_1` against the target.
    pub reference_size: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub csv_path: Option<String>,
    #[serde(default)]
    pub svg_path: Option<String>,
    /// Fill the `ms` column with wall-clock times; when off the column is 0
    /// and the CSV is byte-reproducible.
    #[serde(default = "default_true")]
    pub record_timing: bool,
}

impl ExperimentConfig {
    /// Geometric sample sizes `start, 2 start, ...` up to `end`.
    pub fn geometric_grid(start: usize, end: usize) -> Vec<usize> {
        std::iter::successors(Some(start.max(1)), |&n| Some(n * 2))
            .take_while(|&n| n <= end)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.target.validate()?;
        ensure!(!self.n_grid.is_empty(), "n_grid is empty");
        ensure!(
            self.n_grid.windows(2).all(|w| w[0] < w[1]),
            "n_grid must be strictly ascending"
        );
        ensure!(self.n_grid[0] >= 1, "sample sizes must be positive");
        ensure!(self.repetitions >= 1, "repetitions must be at least 1");
        ensure!(self.oracle_grid >= 2, "oracle_grid must be at least 2");
        match &self.k_rule {
            KRule::MultipleOfLower { factor } => {
                ensure!(*factor >= 1.0, "factor must be at least 1")
            }
            KRule::Absolute { values } => {
                ensure!(!values.is_empty(), "no K values");
                ensure!(
                    values.iter().all(|k| k.is_finite() && *k >= 0.0),
                    "K values must be finite and nonnegative"
                );
            }
        }
        Ok(())
    }

    fn k_choices(&self) -> Vec<Option<f64>> {
        match &self.k_rule {
            KRule::MultipleOfLower { .. } => vec![None],
            KRule::Absolute { values } => values.iter().copied().map(Some).collect(),
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub k_lower: f64,
    /// `W_1` between the fitted generator and the empirical measure.
    pub w1_emp: f64,
    /// `W_1` between the fitted generator and the reference sample.
    pub w1_target: Option<f64>,
    pub seed: u64,
    pub ms: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the sample drawn for `(n, rep)`; shared by every `K` so that
/// budgets are compared on the same data.
pub fn data_seed(master: u64, n: usize, rep: usize) -> u64 {
    splitmix(splitmix(splitmix(master) ^ n as u64) ^ rep as u64)
}

/// Seed of the walk heuristic of a cell, derived from `(master, n, K, rep)`.
pub fn cell_seed(master: u64, n: usize, k: f64, rep: usize) -> u64 {
    splitmix(data_seed(master, n, rep) ^ k.to_bits())
}

/// Reference sample standing in for `mu` in the cell whose data seed is
/// `seed`; `None` when `reference_size` is 0.
pub fn reference_sample(config: &ExperimentConfig, seed: u64) -> Result<Option<SampleCloud>> {
    if config.reference_size == 0 {
        return Ok(None);
    }
    Ok(Some(sample_target(
        &config.target,
        config.reference_size,
        splitmix(seed ^ 0x5245_4645),
    )?))
}

fn reference_measure(config: &ExperimentConfig, seed: u64) -> Result<Option<DiscreteMeasure>> {
    Ok(reference_sample(config, seed)?.map(|c| c.empirical_measure()))
}

struct Cell {
    n: usize,
    rep: usize,
    k: Option<f64>,
}

fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &n in &config.n_grid {
        for k in config.k_choices() {
            for rep in 0..config.repetitions {
                out.push(Cell { n, rep, k });
            }
        }
    }
    out
}

fn run_cells<F>(config: &ExperimentConfig, f: F) -> Result<Vec<ExperimentRow>>
where
    F: Fn(&Cell, &SampleCloud) -> Result<(f64, f64, f64, Option<f64>)> + Sync,
{
    config.validate()?;
    cells(config)
        .par_iter()
        .map(|cell| {
            let start = Instant::now();
            let seed = data_seed(config.master_seed, cell.n, cell.rep);
            let cloud = sample_target(&config.target, cell.n, seed)?;
            let (k, k_lower, w1_emp, w1_target) = f(cell, &cloud)?;
            let ms = if config.record_timing {
                start.elapsed().as_millis() as u64
            } else {
                0
            };
            Ok(ExperimentRow {
                n: cell.n,
                k,
                k_lower,
                w1_emp,
                w1_target,
                seed,
                ms,
            })
        })
        .collect()
}

/// Optimal generator in one dimension, or the fixed-budget grid optimum
/// when `K` is below the lower bound.
fn one_dimensional_cell(
    config: &ExperimentConfig,
    cloud: &SampleCloud,
    cell: &Cell,
) -> Result<(f64, f64, f64, Option<f64>)> {
    let k_lower = k1_lower_bound(cloud)?;
    let k = match (cell.k, &config.k_rule) {
        (Some(k), _) => k,
        (None, KRule::MultipleOfLower { factor }) => factor * k_lower,
        (None, KRule::Absolute { .. }) => unreachable!("absolute rules always carry K"),
    };
    let reference = reference_measure(config, data_seed(config.master_seed, cell.n, cell.rep))?;
    let m = config.oracle_grid;
    if k >= k_lower && k > 0.0 {
        let opt = build_gstar_1d(cloud, k)?;
        let target = match &reference {
            Some(r) => Some(w1_exact(&opt.generator.pushforward_discretize(m)?, r)?),
            None => None,
        };
        Ok((k, k_lower, opt.w1_value, target))
    } else {
        let q = empirical_quantile_grid(cloud, m);
        let fit = fixed_k_optimum_1d(&q, k)?;
        let target = match &reference {
            Some(r) => Some(w1_exact(
                &DiscreteMeasure::from_counts(fit.fitted.clone(), 1)?,
                r,
            )?),
            None => None,
        };
        Ok((k, k_lower, fit.value, target))
    }
}

/// `F_n^{-1}((j + 1/2) / M)` for `j = 0..M`.
pub fn empirical_quantile_grid(cloud: &SampleCloud, m: usize) -> Vec<f64> {
    let mut xs = cloud.coords().to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    (0..m)
        .map(|j| {
            let p = (j as f64 + 0.5) / m as f64;
            let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
            xs[idx]
        })
        .collect()
}

/// Optimal generator in `R^d` along an exact walk (small `n`) or the
/// heuristic walk.
fn multivariate_cell(
    config: &ExperimentConfig,
    cloud: &SampleCloud,
    cell: &Cell,
) -> Result<(f64, f64, f64, Option<f64>)> {
    let walk_seed = cell_seed(config.master_seed, cell.n, cell.k.unwrap_or(0.0), cell.rep);
    let walk = if cloud.distinct().len() <= EXACT_SIZE_LIMIT {
        exact_covering_walk(cloud)?
    } else {
        heuristic_covering_walk(cloud, walk_seed)?
    };
    let k_lower = k2_lower_bound(cloud, &walk)?;
    let k = match (cell.k, &config.k_rule) {
        (Some(k), _) => k,
        (None, KRule::MultipleOfLower { factor }) => factor * k_lower,
        (None, KRule::Absolute { .. }) => unreachable!("absolute rules always carry K"),
    };
    if k < k_lower {
        bail!("K = {k} is below the lower bound {k_lower} for n = {}; the multivariate construction needs K >= K_2", cloud.len());
    }
    let w1_emp = w1_closed_form_md(cloud, &walk, k)?;
    let target = match reference_measure(config, data_seed(config.master_seed, cell.n, cell.rep))? {
        Some(r) => {
            let opt = wopt_core::multivariate::build_gstar_md(cloud, &walk, k)?;
            Some(w1_exact(
                &opt.generator.pushforward_discretize(config.oracle_grid)?,
                &r,
            )?)
        }
        None => None,
    };
    Ok((k, k_lower, w1_emp, target))
}

/// One row per `(n, K, repetition)` with the closed-form distance to the
/// empirical measure and the estimated distance to the target.
pub fn run_rates(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    if config.target.dim() == 1 {
        run_cells(config, |cell, cloud| {
            one_dimensional_cell(config, cloud, cell)
        })
    } else {
        run_cells(config, |cell, cloud| multivariate_cell(config, cloud, cell))
    }
}

/// `(n, K)` grid in one dimension with absolute budgets. Cells below the
/// lower bound use the fixed-budget grid optimum.
pub fn run_heatmap(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    ensure!(config.target.dim() == 1, "heat maps are one-dimensional");
    ensure!(
        matches!(config.k_rule, KRule::Absolute { .. }),
        "heat maps need an absolute K grid"
    );
    run_cells(config, |cell, cloud| {
        one_dimensional_cell(config, cloud, cell)
    })
}

/// Row fields usable as slope coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    N,
    K,
    KLower,
    W1Emp,
    W1Target,
}

impl Field {
    pub fn get(self, row: &ExperimentRow) -> Option<f64> {
        match self {
            Self::N => Some(row.n as f64),
            Self::K => Some(row.k),
            Self::KLower => Some(row.k_lower),
            Self::W1Emp => Some(row.w1_emp),
            Self::W1Target => row.w1_target,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeEstimate {
    pub slope: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Least-squares slope of `log median(y)` against `log x`, with a 95%
/// bootstrap interval from 1000 resamples of the repetitions.
pub fn estimate_slope(
    rows: &[ExperimentRow],
    x: Field,
    y: Field,
    seed: u64,
) -> Result<SlopeEstimate> {
    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for row in rows {
        let (Some(xv), Some(yv)) = (x.get(row), y.get(row)) else {
            continue;
        };
        if !(xv > 0.0 && yv > 0.0 && xv.is_finite() && yv.is_finite()) {
            continue;
        }
        match groups.iter_mut().find(|g| g.0 == xv) {
            Some(g) => g.1.push(yv),
            None => groups.push((xv, vec![yv])),
        }
    }
    ensure!(
        groups.len() >= 4,
        "need at least 4 distinct x values, found {}",
        groups.len()
    );
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    let fit = |samples: &[Vec<f64>]| {
        let pts: Vec<(f64, f64)> = groups
            .iter()
            .zip(samples)
            .map(|(g, ys)| (g.0.ln(), median(&mut ys.clone()).ln()))
            .collect();
        ols_slope(&pts)
    };
    let observed: Vec<Vec<f64>> = groups.iter().map(|g| g.1.clone()).collect();
    let slope = fit(&observed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boot: Vec<f64> = (0..1000)
        .map(|_| {
            let resampled: Vec<Vec<f64>> = observed
                .iter()
                .map(|ys| {
                    (0..ys.len())
                        .map(|_| ys[rng.random_range(0..ys.len())])
                        .collect()
                })
                .collect();
            fit(&resampled)
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    Ok(SlopeEstimate {
        slope,
        ci_low: boot[24],
        ci_high: boot[974],
    })
}
