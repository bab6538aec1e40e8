//! Optimal generator in `R^d` along a covering walk.
//!
//! The generator follows the walk `sigma`, pausing at every visit of `X_i`
//! for a dwell time `phi(i)` and travelling between consecutive points at
//! speed `K`. Dwell times are chosen so that every sample's standard Voronoi
//! cell receives latent time exactly `1/n`, which gives
//! `W_1 = cost(sigma) / (4K)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::geom::{compensated_sum, dist, point_segment_dist, sq_dist};
use crate::model::{GeneratorBuilder, PiecewiseLinearGenerator, SampleCloud};
use crate::path::{visit_half_lengths, WalkSolution};
use crate::semidiscrete::{CellAssignment, WeightedVoronoi};
use crate::{Error, Result, GEOM_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateOptimum {
    pub walk: WalkSolution,
    pub k: f64,
    /// Pause length per visit, indexed by distinct sample.
    pub dwell: Vec<f64>,
    /// Latent time of arrival at each walk position.
    pub arrivals: Vec<f64>,
    pub generator: PiecewiseLinearGenerator,
    pub w1_value: f64,
    /// `visits(i) * dwell(i)`.
    pub atom_masses: Vec<f64>,
    pub k_lower: f64,
}

impl MultivariateOptimum {
    /// Latent time spent moving, `sum |step| / K`.
    pub fn transit_mass(&self) -> f64 {
        1.0 - compensated_sum(self.atom_masses.iter().copied())
    }
}

fn lower_bound_from_sums(n: usize, sums: &[f64]) -> f64 {
    n as f64 * sums.iter().fold(0.0f64, |a, &b| a.max(b))
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

/// `phi(i) = (1/n - S_i / K) / visits(i)`, where `S_i` sums the half
/// distances to the walk neighbours over all visits of `i`.
pub fn dwell_times(cloud: &SampleCloud, walk: &WalkSolution, k: f64) -> Result<Vec<f64>> {
    let sums = visit_half_lengths(cloud, walk)?;
    let n = sums.len();
    check_k(k, lower_bound_from_sums(n, &sums))?;
    let visits = walk.visits(n);
    let nf = n as f64;
    sums.iter()
        .zip(&visits)
        .enumerate()
        .map(|(i, (&s, v))| {
            let phi = (1.0 / nf - s / k) / v.len() as f64;
            if phi < -1e-12 {
                return Err(Error::Construction(format!(
                    "negative dwell time {phi} at sample {i}"
                )));
            }
            Ok(phi.max(0.0))
        })
        .collect()
}

pub fn build_gstar_md(
    cloud: &SampleCloud,
    walk: &WalkSolution,
    k: f64,
) -> Result<MultivariateOptimum> {
    let dwell = dwell_times(cloud, walk, k)?;
    let sums = visit_half_lengths(cloud, walk)?;
    let cloud = cloud.distinct();
    let n = cloud.len();
    let k_lower = lower_bound_from_sums(n, &sums);
    let order = &walk.order;

    let mut builder = GeneratorBuilder::new(cloud.dim());
    let mut arrivals = Vec::with_capacity(order.len());
    // arrival times telescope, so accumulate the increments exactly
    let mut increments: Vec<f64> = Vec::with_capacity(2 * order.len());
    for (pos, &i) in order.iter().enumerate() {
        let v = compensated_sum(increments.iter().copied());
        arrivals.push(v);
        let p = cloud.point(i);
        builder.push(v, p);
        increments.push(dwell[i]);
        let leave = compensated_sum(increments.iter().copied());
        builder.push(leave, p);
        if let Some(&j) = order.get(pos + 1) {
            let step = dist(p, cloud.point(j));
            if step == 0.0 {
                return Err(Error::Construction(format!(
                    "walk steps from {i} to the coincident point {j}"
                )));
            }
            increments.push(step / k);
        }
    }
    let end = compensated_sum(increments.iter().copied());
    if libm::fabs(end - 1.0) > 1e-9 {
        return Err(Error::Construction(format!(
            "latent schedule covers [0, {end}] instead of [0, 1]"
        )));
    }
    let generator = builder.finish(k, 1e-9)?;
    let visits = walk.visits(n);
    let atom_masses = dwell
        .iter()
        .zip(&visits)
        .map(|(phi, v)| phi * v.len() as f64)
        .collect();
    Ok(MultivariateOptimum {
        walk: walk.clone(),
        k,
        dwell,
        arrivals,
        generator,
        w1_value: walk.cost / (4.0 * k),
        atom_masses,
        k_lower,
    })
}

/// `cost(sigma) / (4K)`, valid for `K` at or above the walk's lower bound.
pub fn w1_closed_form_md(cloud: &SampleCloud, walk: &WalkSolution, k: f64) -> Result<f64> {
    let sums = visit_half_lengths(cloud, walk)?;
    check_k(k, lower_bound_from_sums(sums.len(), &sums))?;
    Ok(walk.cost / (4.0 * k))
}

/// Latent time spent in each standard Voronoi cell, integrated exactly.
///
/// Also checks that the first half of every transit stays in the cell of its
/// starting sample and the second half in the cell of its target (64 points
/// per half). Fails if an occupancy misses `1/n` by more than `1e-6`.
pub fn voronoi_occupancy(opt: &MultivariateOptimum, cloud: &SampleCloud) -> Result<Vec<f64>> {
    let cloud = cloud.distinct();
    let n = cloud.len();
    let occ = opt.generator.voronoi_occupancy(&cloud)?;
    let target = 1.0 / n as f64;
    if let Some((i, o)) = occ
        .iter()
        .enumerate()
        .find(|(_, &o)| libm::fabs(o - target) > 1e-6)
    {
        return Err(Error::Construction(format!(
            "sample {i} receives latent time {o}, expected {target}"
        )));
    }

    let dim = cloud.dim();
    let mut p = vec![0.0; dim];
    for w in opt.walk.order.windows(2) {
        let (a, b) = (cloud.point(w[0]), cloud.point(w[1]));
        for s in 0..128 {
            let t = (s as f64 + 0.5) / 128.0;
            for c in 0..dim {
                p[c] = a[c] + t * (b[c] - a[c]);
            }
            let owner = if t < 0.5 { w[0] } else { w[1] };
            let own = sq_dist(&p, cloud.point(owner));
            let nearest = cloud
                .points()
                .map(|x| sq_dist(&p, x))
                .fold(f64::INFINITY, f64::min);
            if libm::sqrt(own) - libm::sqrt(nearest) > GEOM_TOL {
                return Err(Error::Construction(format!(
                    "transit {} -> {} leaves the cell of {owner} at t = {t}",
                    w[0], w[1]
                )));
            }
        }
    }
    Ok(occ)
}

/// A maximal latent interval mapped into a cell without reaching its centre.
#[derive(Debug, Clone, PartialEq)]
pub struct LipCircViolation {
    pub cell: usize,
    pub u_start: f64,
    pub u_end: f64,
    /// Closest approach of `G` to the cell centre on that interval.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipCircReport {
    pub ok: bool,
    pub violation: Option<LipCircViolation>,
}

/// Checks that every excursion of `G` into a weighted cell passes through
/// the cell's atom (within `1e-6`).
///
/// Excursions are detected on a grid of `grid + 1` latent points; points on a
/// cell boundary split excursions. Each excursion is widened by one grid step
/// on both sides before measuring the closest approach, so excursions that
/// reach the centre just outside the sampled range still count.
pub fn check_lip_circ(
    g: &PiecewiseLinearGenerator,
    vor: &WeightedVoronoi,
    grid: usize,
) -> Result<LipCircReport> {
    if g.dim() != vor.dim() {
        return Err(Error::Dimension {
            expected: vor.dim(),
            found: g.dim(),
        });
    }
    let grid = grid.max(1);
    let h = 1.0 / grid as f64;
    let mut x = vec![0.0; g.dim()];
    let mut run: Option<(usize, f64, f64)> = None;
    let mut runs = Vec::new();
    for s in 0..=grid {
        let u = if s == grid { 1.0 } else { s as f64 * h };
        g.evaluate_into(u, &mut x)?;
        match vor.cell_of_point(&x, GEOM_TOL) {
            CellAssignment::Interior(i) => match &mut run {
                Some((c, _, end)) if *c == i => *end = u,
                _ => {
                    if let Some(r) = run.take() {
                        runs.push(r);
                    }
                    run = Some((i, u, u));
                }
            },
            CellAssignment::Boundary(_) => {
                if let Some(r) = run.take() {
                    runs.push(r);
                }
            }
        }
    }
    if let Some(r) = run {
        runs.push(r);
    }
    for (cell, u_first, u_last) in runs {
        let lo = (u_first - h).max(0.0);
        let hi = (u_last + h).min(1.0);
        let gap = closest_approach(g, vor.atom(cell), lo, hi)?;
        if gap > 1e-6 {
            return Ok(LipCircReport {
                ok: false,
                violation: Some(LipCircViolation {
                    cell,
                    u_start: u_first,
                    u_end: u_last,
                    gap,
                }),
            });
        }
    }
    Ok(LipCircReport {
        ok: true,
        violation: None,
    })
}

/// `min_{u in [lo, hi]} |G(u) - x|`.
fn closest_approach(g: &PiecewiseLinearGenerator, x: &[f64], lo: f64, hi: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    let (mut a, mut b) = (vec![0.0; g.dim()], vec![0.0; g.dim()]);
    for (u0, u1, _, _) in g.segments() {
        let (s, e) = (u0.max(lo), u1.min(hi));
        if s > e {
            continue;
        }
        g.evaluate_into(s, &mut a)?;
        g.evaluate_into(e, &mut b)?;
        best = best.min(point_segment_dist(x, &a, &b));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{exact_covering_walk, k2_lower_bound};

    fn star() -> SampleCloud {
        let h = libm::sqrt(3.0) / 2.0;
        SampleCloud::from_points(&[[0.0, 0.0], [1.0, 0.0], [-0.5, h], [-0.5, -h]]).unwrap()
    }

    fn star_walk() -> WalkSolution {
        WalkSolution::from_order(&star(), vec![1, 0, 2, 0, 3], true).unwrap()
    }

    #[test]
    fn star_dwell_times() {
        let phi = dwell_times(&star(), &star_walk(), 16.0).unwrap();
        assert!((phi[0] - 1.0 / 16.0).abs() < 1e-15);
        let opt = build_gstar_md(&star(), &star_walk(), 16.0).unwrap();
        assert!((opt.atom_masses[0] - 0.125).abs() < 1e-15);
        assert!((opt.w1_value - 1.0 / 16.0).abs() < 1e-15);
        assert!((opt.k_lower - 8.0).abs() < 1e-12);
    }

    #[test]
    fn star_at_lower_bound_has_no_pause_at_centre() {
        let phi = dwell_times(&star(), &star_walk(), 8.0).unwrap();
        assert!(phi[0].abs() < 1e-15);
        let opt = build_gstar_md(&star(), &star_walk(), 8.0).unwrap();
        assert!(opt.generator.validate_lipschitz(8.0, 1000).unwrap().ok);
    }

    #[test]
    fn below_lower_bound_is_rejected() {
        let err = build_gstar_md(&star(), &star_walk(), 7.9).unwrap_err();
        assert!(
            matches!(err, Error::LipschitzTooSmall { k_lower, .. } if (k_lower - 8.0).abs() < 1e-12)
        );
    }

    #[test]
    fn single_point() {
        let c = SampleCloud::from_points(&[[2.0, -1.0]]).unwrap();
        let w = exact_covering_walk(&c).unwrap();
        let opt = build_gstar_md(&c, &w, 1.0).unwrap();
        assert_eq!(opt.dwell, vec![1.0]);
        assert_eq!(opt.w1_value, 0.0);
        assert_eq!(opt.generator.evaluate(0.7).unwrap(), vec![2.0, -1.0]);
        assert_eq!(voronoi_occupancy(&opt, &c).unwrap(), vec![1.0]);
    }

    #[test]
    fn collinear_cloud_matches_one_dimensional_value() {
        let c =
            SampleCloud::from_points(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]).unwrap();
        let w = WalkSolution::from_order(&c, vec![0, 1, 2, 3], true).unwrap();
        assert_eq!(k2_lower_bound(&c, &w).unwrap(), 4.0);
        let opt = build_gstar_md(&c, &w, 4.0).unwrap();
        assert_eq!(opt.w1_value, 3.0 / 16.0);
        for o in voronoi_occupancy(&opt, &c).unwrap() {
            assert!((o - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn arrivals_telescope_to_one() {
        let opt = build_gstar_md(&star(), &star_walk(), 20.0).unwrap();
        let last = *opt.walk.order.last().unwrap();
        assert!((opt.arrivals.last().unwrap() + opt.dwell[last] - 1.0).abs() < 1e-12);
        let transit: f64 = opt.walk.euclidean_length(&star()) / 20.0;
        assert!((opt.transit_mass() - transit).abs() < 1e-12);
        for o in voronoi_occupancy(&opt, &star()).unwrap() {
            assert!((o - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn optimum_passes_through_every_centre() {
        let opt = build_gstar_md(&star(), &star_walk(), 16.0).unwrap();
        let vor = WeightedVoronoi::uniform(star()).unwrap();
        assert!(check_lip_circ(&opt.generator, &vor, 10_000).unwrap().ok);
    }

    #[test]
    fn straight_line_skipping_a_centre_fails() {
        let c = SampleCloud::from_points(&[[0.0, 0.0], [1.0, 0.5], [2.0, 0.0]]).unwrap();
        let g = PiecewiseLinearGenerator::new(2.0, vec![0.0, 1.0], vec![0.0, 0.0, 2.0, 0.0], 2)
            .unwrap();
        let vor = WeightedVoronoi::uniform(c).unwrap();
        let report = check_lip_circ(&g, &vor, 10_000).unwrap();
        assert!(!report.ok);
        let v = report.violation.unwrap();
        assert_eq!(v.cell, 1);
        assert!((v.gap - 0.5).abs() < 1e-9);
    }

    #[test]
    fn square_optimum() {
        let c =
            SampleCloud::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let w = exact_covering_walk(&c).unwrap();
        assert_eq!(k2_lower_bound(&c, &w).unwrap(), 4.0);
        assert_eq!(w1_closed_form_md(&c, &w, 12.0).unwrap(), 0.0625);
        assert_eq!(w1_closed_form_md(&c, &w, 24.0).unwrap(), 0.03125);
    }
}
