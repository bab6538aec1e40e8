//! Semi-discrete transport onto the samples.
//!
//! A weight vector `w` splits space into additively weighted Voronoi cells
//! `{x : |x - X_i| - w_i <= |x - X_j| - w_j for all j}`. Mapping each cell to
//! its atom is an optimal transport map from a nonatomic `nu` onto the
//! measure it induces on the atoms; weights are *adapted* to `alpha` when
//! that induced measure is `alpha`. They maximize the concave dual
//!
//! ```text
//! Phi(w) = sum_i alpha_i w_i + E_nu[min_i (|x - X_i| - w_i)]
//! ```
//!
//! whose supergradient is `alpha_i - nu(cell_i)`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{compensated_sum, dist};
use crate::model::{GeneratorBuilder, PiecewiseLinearGenerator, SampleCloud};
use crate::{Error, Result, GEOM_TOL};

/// Cell membership of a point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellAssignment {
    Interior(usize),
    /// Sorted indices of all cells tied at the minimum (at least two).
    Boundary(Vec<usize>),
}

impl CellAssignment {
    /// Lowest index among the minimizing cells.
    pub fn first(&self) -> usize {
        match self {
            Self::Interior(i) => *i,
            Self::Boundary(set) => set[0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedVoronoi {
    atoms: SampleCloud,
    weights: Vec<f64>,
    target_masses: Vec<f64>,
}

impl WeightedVoronoi {
    /// Validates the inputs and shifts the weights so that `w_0 = 0`.
    pub fn new(atoms: SampleCloud, weights: Vec<f64>, target_masses: Vec<f64>) -> Result<Self> {
        let n = atoms.len();
        if atoms.has_duplicates() {
            return Err(Error::InvalidInput(
                "atoms must be pairwise distinct".into(),
            ));
        }
        if weights.len() != n || target_masses.len() != n {
            return Err(Error::InvalidInput(format!(
                "{n} atoms but {} weights and {} target masses",
                weights.len(),
                target_masses.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("non-finite weight".into()));
        }
        if target_masses.iter().any(|&a| !(a >= 0.0)) {
            return Err(Error::InvalidInput(
                "target masses must be nonnegative".into(),
            ));
        }
        let total = compensated_sum(target_masses.iter().copied());
        if libm::fabs(total - 1.0) > 1e-9 {
            return Err(Error::MassMismatch {
                left: total,
                right: 1.0,
            });
        }
        let w0 = weights[0];
        let weights = weights.into_iter().map(|w| w - w0).collect();
        Ok(Self {
            atoms,
            weights,
            target_masses,
        })
    }

    /// Zero weights and uniform target masses: the standard Voronoi diagram.
    pub fn uniform(atoms: SampleCloud) -> Result<Self> {
        let n = atoms.len();
        Self::new(atoms, vec![0.0; n], vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms.dim()
    }

    pub fn atoms(&self) -> &SampleCloud {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        self.atoms.point(i)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn target_masses(&self) -> &[f64] {
        &self.target_masses
    }

    /// `|x - X_i| - w_i`.
    #[inline]
    pub fn score(&self, x: &[f64], i: usize) -> f64 {
        dist(x, self.atoms.point(i)) - self.weights[i]
    }

    /// `min_i (|x - X_i| - w_i)` and the lowest minimizing index.
    pub fn best(&self, x: &[f64]) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for i in 0..self.len() {
            let s = self.score(x, i);
            if s < best.0 {
                best = (s, i);
            }
        }
        best
    }

    /// All cells whose score is within `tol` of the minimum.
    pub fn cell_of_point(&self, x: &[f64], tol: f64) -> CellAssignment {
        let scores: Vec<f64> = (0..self.len()).map(|i| self.score(x, i)).collect();
        let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
        let set: Vec<usize> = (0..self.len())
            .filter(|&i| scores[i] - min <= tol)
            .collect();
        if set.len() == 1 {
            CellAssignment::Interior(set[0])
        } else {
            CellAssignment::Boundary(set)
        }
    }

    /// The transport map: the atom index of `x`'s cell, lowest index on
    /// boundaries.
    pub fn transport_map_apply(&self, x: &[f64]) -> usize {
        self.cell_of_point(x, GEOM_TOL).first()
    }
}

/// Source of i.i.d. draws from a probability measure on `R^d`.
pub trait Sampler {
    fn dim(&self) -> usize;

    /// Whether the measure has atoms.
    fn is_atomic(&self) -> bool {
        false
    }

    fn sample_into(&self, rng: &mut ChaCha8Rng, out: &mut [f64]);
}

impl<S: Sampler + ?Sized> Sampler for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn is_atomic(&self) -> bool {
        (**self).is_atomic()
    }

    fn sample_into(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        (**self).sample_into(rng, out)
    }
}

impl<S: Sampler + ?Sized> Sampler for Box<S> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn is_atomic(&self) -> bool {
        (**self).is_atomic()
    }

    fn sample_into(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        (**self).sample_into(rng, out)
    }
}

/// Uniform law on an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl UniformBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidInput(
                "box corners must have the same positive dimension".into(),
            ));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite())
        {
            return Err(Error::InvalidInput(
                "box must have positive finite extent".into(),
            ));
        }
        Ok(Self { lo, hi })
    }

    /// `[0, 1]^d`.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![1.0; dim])
    }
}

impl Sampler for UniformBox {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn sample_into(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.lo[c] + (self.hi[c] - self.lo[c]) * rng.random::<f64>();
        }
    }
}

/// `G(U)` with `U` uniform on `[0, 1]`. Atomic whenever `G` has plateaus.
#[derive(Debug, Clone, PartialEq)]
pub struct PushforwardSampler {
    generator: PiecewiseLinearGenerator,
}

impl PushforwardSampler {
    pub fn new(generator: PiecewiseLinearGenerator) -> Self {
        Self { generator }
    }
}

impl Sampler for PushforwardSampler {
    fn dim(&self) -> usize {
        self.generator.dim()
    }

    fn is_atomic(&self) -> bool {
        self.generator.has_plateaus()
    }

    fn sample_into(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let u: f64 = rng.random();
        self.generator
            .evaluate_into(u, out)
            .expect("u lies in [0, 1)");
    }
}

/// `G(U)` conditioned on `U` falling outside the plateaus of `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitSampler {
    generator: PiecewiseLinearGenerator,
    /// Moving pieces as `(cumulative latent length, u0, u1)`.
    pieces: Vec<(f64, f64, f64)>,
}

impl TransitSampler {
    pub fn new(generator: PiecewiseLinearGenerator) -> Result<Self> {
        let mut pieces = Vec::new();
        let mut total = 0.0;
        for (u0, u1, a, b) in generator.segments() {
            if a != b {
                total += u1 - u0;
                pieces.push((total, u0, u1));
            }
        }
        if pieces.is_empty() {
            return Err(Error::InvalidInput("generator never moves".into()));
        }
        Ok(Self { generator, pieces })
    }

    /// Latent length of the moving part.
    pub fn transit_length(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.0)
    }
}

impl Sampler for TransitSampler {
    fn dim(&self) -> usize {
        self.generator.dim()
    }

    fn sample_into(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let r = rng.random::<f64>() * self.transit_length();
        let k = self
            .pieces
            .partition_point(|p| p.0 <= r)
            .min(self.pieces.len() - 1);
        let (end, u0, u1) = self.pieces[k];
        let u = (u1 - (end - r)).clamp(u0, u1);
        self.generator
            .evaluate_into(u, out)
            .expect("u lies in [0, 1]");
    }
}

/// Replaces every plateau by a tent that rises along the first coordinate at
/// slope `min(K, 1/m)` and comes back at its midpoint.
///
/// The result is still `K`-Lipschitz, has no plateaus, and stays within
/// `1/(2m)` of `G` everywhere, so its pushforward is nonatomic and
/// converges to that of `G` as `m` grows.
pub fn smooth_plateaus(g: &PiecewiseLinearGenerator, m: usize) -> Result<PiecewiseLinearGenerator> {
    if m == 0 {
        return Err(Error::InvalidInput(
            "smoothing parameter must be positive".into(),
        ));
    }
    let k = g.lipschitz_bound();
    let slope = k.min(1.0 / m as f64);
    let dim = g.dim();
    let mut builder = GeneratorBuilder::new(dim);
    builder.push(0.0, g.value(0));
    let mut peak = vec![0.0; dim];
    for (u0, u1, a, b) in g.segments() {
        if a == b {
            let mid = 0.5 * (u0 + u1);
            peak.copy_from_slice(a);
            peak[0] += slope * (mid - u0);
            builder.push(mid, &peak);
        }
        builder.push(u1, b);
    }
    builder.finish(k, 0.0)
}

/// Settings for [`adapted_weights`].
#[derive(Debug, Clone, PartialEq)]
pub struct AscentConfig {
    pub iterations: usize,
    pub batch: usize,
    /// Step size `a / (b + sqrt(t))`.
    pub step_a: f64,
    pub step_b: f64,
    /// Fresh draws used to measure the final mass residual.
    pub eval_samples: usize,
    /// Largest accepted `max_i |nu(cell_i) - alpha_i|`.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            iterations: 4000,
            batch: 256,
            step_a: 1.0,
            step_b: 10.0,
            eval_samples: 1_000_000,
            tolerance: 0.01,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedWeights {
    pub voronoi: WeightedVoronoi,
    /// Estimated cell masses on the evaluation draws.
    pub cell_masses: Vec<f64>,
    /// `max_i |cell_masses_i - alpha_i|`.
    pub residual: f64,
}

/// Stochastic supergradient ascent on the dual, with the iterate averaged
/// over the second half of the run.
///
/// The residual is measured on `eval_samples` draws from a separate random
/// stream; the call fails with [`Error::NotConverged`] if it exceeds the
/// tolerance.
pub fn adapted_weights<S: Sampler>(
    sampler: &S,
    atoms: &SampleCloud,
    alpha: &[f64],
    config: &AscentConfig,
) -> Result<AdaptedWeights> {
    if sampler.is_atomic() {
        return Err(Error::InvalidInput(
            "the source measure has atoms; smooth the generator's plateaus first".into(),
        ));
    }
    if sampler.dim() != atoms.dim() {
        return Err(Error::Dimension {
            expected: atoms.dim(),
            found: sampler.dim(),
        });
    }
    if config.iterations == 0 || config.batch == 0 || config.eval_samples == 0 {
        return Err(Error::InvalidInput(
            "iterations, batch and eval_samples must be positive".into(),
        ));
    }
    let n = atoms.len();
    let mut vor = WeightedVoronoi::new(atoms.clone(), vec![0.0; n], alpha.to_vec())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut x = vec![0.0; atoms.dim()];
    let mut counts = vec![0usize; n];
    let mut average = vec![0.0; n];
    let burn_in = config.iterations / 2;
    for t in 1..=config.iterations {
        counts.fill(0);
        for _ in 0..config.batch {
            sampler.sample_into(&mut rng, &mut x);
            counts[vor.best(&x).1] += 1;
        }
        let step = config.step_a / (config.step_b + libm::sqrt(t as f64));
        for i in 0..n {
            let grad = alpha[i] - counts[i] as f64 / config.batch as f64;
            vor.weights[i] += step * grad;
        }
        if t > burn_in {
            let seen = (t - burn_in) as f64;
            for i in 0..n {
                average[i] += (vor.weights[i] - average[i]) / seen;
            }
        }
    }
    let vor = WeightedVoronoi::new(atoms.clone(), average, alpha.to_vec())?;
    let cell_masses =
        cell_mass_estimate(sampler, &vor, config.eval_samples, eval_seed(config.seed));
    let residual = cell_masses
        .iter()
        .zip(alpha)
        .map(|(m, a)| libm::fabs(m - a))
        .fold(0.0, f64::max);
    if residual > config.tolerance {
        return Err(Error::NotConverged {
            iterations: config.iterations,
            residual,
        });
    }
    Ok(AdaptedWeights {
        voronoi: vor,
        cell_masses,
        residual,
    })
}

/// Seed of the held-out evaluation stream for a given ascent seed.
pub fn eval_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Fraction of `m` draws landing in each cell (lowest index on ties).
pub fn cell_mass_estimate<S: Sampler>(
    sampler: &S,
    vor: &WeightedVoronoi,
    m: usize,
    seed: u64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; sampler.dim()];
    let mut counts = vec![0usize; vor.len()];
    for _ in 0..m {
        sampler.sample_into(&mut rng, &mut x);
        counts[vor.best(&x).1] += 1;
    }
    counts.into_iter().map(|c| c as f64 / m as f64).collect()
}

/// Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
}

impl McEstimate {
    /// Mean and standard error of a stream of values (Welford).
    pub fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let (mut count, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
        for v in values {
            count += 1;
            let delta = v - mean;
            mean += delta / count as f64;
            m2 += delta * (v - mean);
        }
        let std_err = if count > 1 {
            libm::sqrt(m2 / (count - 1) as f64 / count as f64)
        } else {
            0.0
        };
        Self { mean, std_err }
    }
}

fn estimate<S: Sampler, F: FnMut(&[f64]) -> f64>(
    sampler: &S,
    m: usize,
    seed: u64,
    mut f: F,
) -> McEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; sampler.dim()];
    McEstimate::from_values((0..m).map(|_| {
        sampler.sample_into(&mut rng, &mut x);
        f(&x)
    }))
}

/// Mean transport distance `E|x - T(x)|` of the cell map.
pub fn transport_cost_estimate<S: Sampler>(
    sampler: &S,
    vor: &WeightedVoronoi,
    m: usize,
    seed: u64,
) -> McEstimate {
    estimate(sampler, m, seed, |x| {
        dist(x, vor.atom(vor.transport_map_apply(x)))
    })
}

/// Monte-Carlo value of the dual objective at `vor`'s weights.
pub fn dual_objective_estimate<S: Sampler>(
    sampler: &S,
    vor: &WeightedVoronoi,
    m: usize,
    seed: u64,
) -> McEstimate {
    let linear: f64 = vor
        .weights
        .iter()
        .zip(&vor.target_masses)
        .map(|(w, a)| w * a)
        .sum();
    let est = estimate(sampler, m, seed, |x| vor.best(x).0);
    McEstimate {
        mean: linear + est.mean,
        std_err: est.std_err,
    }
}
