//! Exact optimum for one-dimensional data.
//!
//! With sorted distinct samples `x_1 < ... < x_n` and `K >= n * max gap`, the
//! optimal generator pauses on every sample and crosses each gap at full
//! speed `K`, centred on latent time `i / n`. Its distance to the empirical
//! measure is `sum(gap^2) / (4K)`; the only other minimizer is its reflection
//! `u -> G(1 - u)`.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::geom::{compensated_sum, Total};
use crate::model::{GeneratorBuilder, PiecewiseLinearGenerator, SampleCloud};
use crate::{Error, Result};

/// The optimal generator for a one-dimensional cloud and its summary values.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateOptimum {
    /// Distinct samples in increasing order.
    pub sorted_samples: Vec<f64>,
    pub k: f64,
    /// `n * max gap` on the distinct samples.
    pub k_lower: f64,
    pub generator: PiecewiseLinearGenerator,
    /// `W_1(G#U, mu_n) = sum(gap^2) / (4K)`.
    pub w1_value: f64,
    /// Atom mass of the pushforward at each sorted sample.
    pub atom_masses: Vec<f64>,
}

impl UnivariateOptimum {
    /// Mass spent in transit, `(x_n - x_1) / K`.
    pub fn transit_mass(&self) -> f64 {
        let n = self.sorted_samples.len();
        (self.sorted_samples[n - 1] - self.sorted_samples[0]) / self.k
    }
}

fn sorted_distinct(cloud: &SampleCloud) -> Result<Vec<f64>> {
    if cloud.dim() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            found: cloud.dim(),
        });
    }
    let mut xs = cloud.distinct().coords().to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    Ok(xs)
}

fn lower_bound_sorted(xs: &[f64]) -> f64 {
    let max_gap = xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    xs.len() as f64 * max_gap
}

fn check_k(k: f64, k_lower: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidInput(format!(
            "Lipschitz constant must be positive, got {k}"
        )));
    }
    if k < k_lower {
        return Err(Error::LipschitzTooSmall { k, k_lower });
    }
    Ok(())
}

/// `n * max_i (x_(i+1) - x_(i))` over the distinct samples; `0` for a single
/// distinct point.
pub fn k1_lower_bound(cloud: &SampleCloud) -> Result<f64> {
    Ok(lower_bound_sorted(&sorted_distinct(cloud)?))
}

/// Builds the optimal generator for `K >= k1_lower_bound(cloud)`.
pub fn build_gstar_1d(cloud: &SampleCloud, k: f64) -> Result<UnivariateOptimum> {
    let xs = sorted_distinct(cloud)?;
    let k_lower = lower_bound_sorted(&xs);
    check_k(k, k_lower)?;
    let n = xs.len();
    let nf = n as f64;
    let gaps: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();

    let mut builder = GeneratorBuilder::new(1);
    builder.push(0.0, &[xs[0]]);
    for (i, &gap) in gaps.iter().enumerate() {
        let centre = (i + 1) as f64 / nf;
        let half = gap / (2.0 * k);
        builder.push(centre - half, &[xs[i]]);
        builder.push(centre + half, &[xs[i + 1]]);
    }
    builder.push(1.0, &[xs[n - 1]]);
    let generator = builder.finish(k, 1e-12)?;

    let atom_masses = (0..n)
        .map(|i| {
            let before = if i > 0 { gaps[i - 1] } else { 0.0 };
            let after = if i + 1 < n { gaps[i] } else { 0.0 };
            (1.0 / nf - (before + after) / (2.0 * k)).max(0.0)
        })
        .collect();
    let w1_value = w1_from_gaps(&gaps, k);
    Ok(UnivariateOptimum {
        sorted_samples: xs,
        k,
        k_lower,
        generator,
        w1_value,
        atom_masses,
    })
}

fn w1_from_gaps(gaps: &[f64], k: f64) -> f64 {
    gaps.iter().map(|g| g * g).sum::<f64>() / (4.0 * k)
}

/// `sum_i (x_(i+1) - x_(i))^2 / (4K)`.
pub fn w1_closed_form_1d(cloud: &SampleCloud, k: f64) -> Result<f64> {
    let xs = sorted_distinct(cloud)?;
    check_k(k, lower_bound_sorted(&xs))?;
    let gaps: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(w1_from_gaps(&gaps, k))
}

/// `u -> G(1 - u)`: the second minimizer when `G` is optimal.
pub fn reflect_generator(g: &PiecewiseLinearGenerator) -> PiecewiseLinearGenerator {
    g.reflect()
}

/// Solution of the fixed-budget grid problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedKFit {
    /// `(1/M) sum_j |g_j - q_j|` at the optimum.
    pub value: f64,
    pub fitted: Vec<f64>,
}

/// Best `K`-Lipschitz fit of a quantile grid in mean absolute deviation.
///
/// `q` holds target quantiles on a midpoint grid of size `M`; the fit `g`
/// satisfies `|g_(j+1) - g_j| <= K / M`. In one dimension the `W_1` distance
/// between `G#U` and the target equals the `L^1` distance between quantile
/// functions, and a monotone rearrangement never hurts, so this is the
/// fixed-`K` optimum against the grid target.
///
/// Solved exactly by a slope-trick dynamic program in `O(M log M)`.
pub fn fixed_k_optimum_1d(q: &[f64], k: f64) -> Result<FixedKFit> {
    let m = q.len();
    if m < 2 {
        return Err(Error::InvalidInput(
            "the quantile grid needs at least 2 points".into(),
        ));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "Lipschitz constant must be nonnegative, got {k}"
        )));
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite quantile".into()));
    }
    if q.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("quantile grid must be nondecreasing".into()));
    }
    let step = k / m as f64;

    // f_j(x) = min cost of the first j+1 terms with g_j = x, kept as two heaps
    // of slope breakpoints around its minimum
    let mut left: BinaryHeap<Total> = BinaryHeap::with_capacity(m + 1);
    let mut right: BinaryHeap<Reverse<Total>> = BinaryHeap::with_capacity(m + 1);
    let (mut shift_left, mut shift_right) = (0.0f64, 0.0f64);
    let mut min_cost = 0.0f64;
    let mut argmins = Vec::with_capacity(m);
    for (j, &target) in q.iter().enumerate() {
        if j > 0 {
            shift_left -= step;
            shift_right += step;
        }
        // + (x - target)^+
        if let Some(top) = left.peek() {
            min_cost += (top.0 + shift_left - target).max(0.0);
        }
        left.push(Total(target - shift_left));
        let moved = left.pop().map(|t| t.0 + shift_left).unwrap_or(target);
        right.push(Reverse(Total(moved - shift_right)));
        // + (target - x)^+
        if let Some(Reverse(top)) = right.peek() {
            min_cost += (target - (top.0 + shift_right)).max(0.0);
        }
        right.push(Reverse(Total(target - shift_right)));
        let moved = right.pop().map(|t| t.0 .0 + shift_right).unwrap_or(target);
        left.push(Total(moved - shift_left));

        argmins.push(left.peek().map(|t| t.0 + shift_left).unwrap_or(target));
    }

    let mut fitted = argmins.clone();
    for j in (0..m - 1).rev() {
        let next = fitted[j + 1];
        fitted[j] = argmins[j].clamp(next - step, next + step);
    }
    let cost = compensated_sum(fitted.iter().zip(q).map(|(g, t)| libm::fabs(g - t)));
    let scale = q.iter().fold(1.0f64, |a, v| a.max(libm::fabs(*v))) * m as f64;
    if libm::fabs(cost - min_cost) > 1e-9 * scale {
        return Err(Error::Construction(format!(
            "backtracked fit costs {cost}, dynamic program reported {min_cost}"
        )));
    }
    Ok(FixedKFit {
        value: cost / m as f64,
        fitted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cloud(xs: &[f64]) -> SampleCloud {
        SampleCloud::from_scalars(xs).unwrap()
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(k1_lower_bound(&cloud(&[0.0, 1.0])).unwrap(), 2.0);
        assert_eq!(
            k1_lower_bound(&cloud(&[1.0, 2.0, 4.0, 7.0, 9.0])).unwrap(),
            15.0
        );
        assert_eq!(k1_lower_bound(&cloud(&[0.0, 0.0, 1.0])).unwrap(), 2.0);
        assert_eq!(k1_lower_bound(&cloud(&[3.5])).unwrap(), 0.0);
    }

    #[test]
    fn lower_bound_rejects_multivariate_cloud() {
        let c = SampleCloud::from_points(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(k1_lower_bound(&c), Err(Error::Dimension { .. })));
    }

    #[test]
    fn two_point_construction() {
        let opt = build_gstar_1d(&cloud(&[0.0, 1.0]), 2.0).unwrap();
        let g = &opt.generator;
        assert_eq!(g.breakpoints(), &[0.0, 0.25, 0.75, 1.0]);
        assert_eq!(g.values(), &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(opt.w1_value, 0.125);
    }

    #[test]
    fn five_point_construction() {
        let opt = build_gstar_1d(&cloud(&[7.0, 1.0, 9.0, 2.0, 4.0]), 25.0).unwrap();
        assert_eq!(opt.sorted_samples, vec![1.0, 2.0, 4.0, 7.0, 9.0]);
        let expected = [0.18, 0.14, 0.10, 0.10, 0.16];
        for (m, e) in opt.atom_masses.iter().zip(expected) {
            assert!((m - e).abs() < 1e-12);
        }
        assert!((opt.transit_mass() - 0.32).abs() < 1e-15);
        assert!((opt.w1_value - 0.18).abs() < 1e-15);
        assert!((opt.generator.evaluate(0.2).unwrap()[0] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn single_point_is_constant() {
        let opt = build_gstar_1d(&cloud(&[4.0, 4.0]), 3.0).unwrap();
        assert_eq!(opt.w1_value, 0.0);
        assert_eq!(opt.atom_masses, vec![1.0]);
        assert_eq!(opt.generator.evaluate(0.3).unwrap(), vec![4.0]);
    }

    #[test]
    fn budget_below_bound_is_rejected_with_bound() {
        let err = build_gstar_1d(&cloud(&[1.0, 2.0, 4.0, 7.0, 9.0]), 14.0).unwrap_err();
        assert_eq!(
            err,
            Error::LipschitzTooSmall {
                k: 14.0,
                k_lower: 15.0
            }
        );
        assert!(w1_closed_form_1d(&cloud(&[0.0, 1.0]), 1.0).is_err());
    }

    #[test]
    fn budget_at_bound_degenerates_widest_plateau() {
        let opt = build_gstar_1d(&cloud(&[0.0, 1.0, 2.0]), 3.0).unwrap();
        assert_eq!(opt.atom_masses[1], 0.0);
        assert!(opt.generator.validate_lipschitz(3.0, 1000).unwrap().ok);
    }

    #[test]
    fn fixed_k_examples() {
        let m = 400;
        let q: Vec<f64> = (0..m).map(|j| (j as f64 + 0.5) / m as f64).collect();
        assert!(fixed_k_optimum_1d(&q, 1.0).unwrap().value < 1e-12);
        let flat = fixed_k_optimum_1d(&q, 0.0).unwrap();
        assert!((flat.value - 0.25).abs() <= 1.0 / m as f64);
        let half = fixed_k_optimum_1d(&q, 0.5).unwrap();
        assert!((half.value - 0.125).abs() <= 2.0 / m as f64);
    }

    #[test]
    fn fixed_k_rejects_unsorted_grid() {
        assert!(matches!(
            fixed_k_optimum_1d(&[0.0, 1.0, 0.5], 1.0),
            Err(Error::Domain(_))
        ));
    }
}
