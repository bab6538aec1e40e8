//! Shared domain types: sample clouds, piecewise-linear generators and
//! finitely supported measures.

use alloc::borrow::Cow;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::geom::{compensated_sum, dist, lex_cmp, sq_dist};
use crate::{Error, Result, LATENT_TOL};

/// Groups indices of `coords` (rows of length `dim`) by exact equality.
///
/// Groups are ordered by their smallest index and each group is ascending.
fn group_equal_rows(coords: &[f64], dim: usize) -> Vec<Vec<usize>> {
    let n = coords.len() / dim;
    let row = |i: usize| &coords[i * dim..(i + 1) * dim];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lex_cmp(row(a), row(b)).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && lex_cmp(row(order[start]), row(order[end])) == Ordering::Equal {
            end += 1;
        }
        groups.push(order[start..end].to_vec());
        start = end;
    }
    groups.sort_by_key(|g| g[0]);
    groups
}

/// The observed sample `X_1..X_n` in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud {
    coords: Vec<f64>,
    dim: usize,
    duplicate_groups: Vec<Vec<usize>>,
}

impl SampleCloud {
    /// Builds a cloud from row-major coordinates.
    pub fn new(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(format!(
                "{} coordinates do not form a non-empty set of {dim}-dimensional points",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coordinate {bad}")));
        }
        let duplicate_groups = group_equal_rows(&coords, dim);
        Ok(Self {
            coords,
            dim,
            duplicate_groups,
        })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = points.first().map(|p| p.as_ref().len()).unwrap_or(0);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::new(coords, dim)
    }

    /// One-dimensional cloud.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::new(xs.to_vec(), 1)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> core::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Partition of the indices by exact coordinate equality.
    pub fn duplicate_groups(&self) -> &[Vec<usize>] {
        &self.duplicate_groups
    }

    pub fn has_duplicates(&self) -> bool {
        self.duplicate_groups.len() < self.len()
    }

    /// The cloud of distinct points, one representative per duplicate group
    /// in order of first occurrence.
    ///
    /// All constructions operate on this cloud; walk indices refer to it.
    pub fn distinct(&self) -> Cow<'_, SampleCloud> {
        if !self.has_duplicates() {
            return Cow::Borrowed(self);
        }
        let mut coords = Vec::with_capacity(self.duplicate_groups.len() * self.dim);
        for g in &self.duplicate_groups {
            coords.extend_from_slice(self.point(g[0]));
        }
        let duplicate_groups = (0..self.duplicate_groups.len()).map(|i| vec![i]).collect();
        Cow::Owned(SampleCloud {
            coords,
            dim: self.dim,
            duplicate_groups,
        })
    }

    /// The empirical measure `mu_n`: merged atoms with mass multiplicity / n.
    pub fn empirical_measure(&self) -> DiscreteMeasure {
        let n = self.len();
        let mut atoms = Vec::with_capacity(self.duplicate_groups.len() * self.dim);
        let mut masses = Vec::with_capacity(self.duplicate_groups.len());
        for g in &self.duplicate_groups {
            atoms.extend_from_slice(self.point(g[0]));
            masses.push(g.len() as f64 / n as f64);
        }
        DiscreteMeasure {
            atoms,
            masses,
            dim: self.dim,
        }
    }

    /// Applies `f` to every point.
    pub fn map_points<F: FnMut(&[f64]) -> Vec<f64>>(&self, mut f: F) -> Result<Self> {
        let pts: Vec<Vec<f64>> = self.points().map(f).collect();
        Self::from_points(&pts)
    }
}

/// A finitely supported probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    masses: Vec<f64>,
    dim: usize,
}

impl DiscreteMeasure {
    /// Validates the masses and merges duplicate atoms.
    ///
    /// Masses must be nonnegative and sum to 1 within `1e-12`.
    pub fn new(atoms: Vec<f64>, masses: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || atoms.len() != masses.len() * dim || masses.is_empty() {
            return Err(Error::InvalidInput(format!(
                "{} coordinates and {} masses are inconsistent with dimension {dim}",
                atoms.len(),
                masses.len()
            )));
        }
        if atoms.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite atom coordinate".into()));
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidInput(
                "masses must be finite and nonnegative".into(),
            ));
        }
        let total = compensated_sum(masses.iter().copied());
        if libm::fabs(total - 1.0) > 1e-12 {
            return Err(Error::InvalidInput(format!("masses sum to {total}, not 1")));
        }
        let groups = group_equal_rows(&atoms, dim);
        if groups.len() == masses.len() {
            return Ok(Self { atoms, masses, dim });
        }
        let mut merged_atoms = Vec::with_capacity(groups.len() * dim);
        let mut merged_masses = Vec::with_capacity(groups.len());
        for g in groups {
            merged_atoms.extend_from_slice(&atoms[g[0] * dim..(g[0] + 1) * dim]);
            merged_masses.push(compensated_sum(g.iter().map(|&i| masses[i])));
        }
        Ok(Self {
            atoms: merged_atoms,
            masses: merged_masses,
            dim,
        })
    }

    /// Merges duplicate atoms and assigns each distinct atom `count / total`.
    pub fn from_counts(atoms: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || atoms.is_empty() || !atoms.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput("empty or ragged atom list".into()));
        }
        if atoms.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite atom coordinate".into()));
        }
        let total = atoms.len() / dim;
        let groups = group_equal_rows(&atoms, dim);
        let mut merged_atoms = Vec::with_capacity(groups.len() * dim);
        let mut masses = Vec::with_capacity(groups.len());
        for g in groups {
            merged_atoms.extend_from_slice(&atoms[g[0] * dim..(g[0] + 1) * dim]);
            masses.push(g.len() as f64 / total as f64);
        }
        Ok(Self {
            atoms: merged_atoms,
            masses,
            dim,
        })
    }

    /// One-dimensional measure from `(atom, mass)` pairs.
    pub fn from_pairs_1d(pairs: &[(f64, f64)]) -> Result<Self> {
        let atoms = pairs.iter().map(|p| p.0).collect();
        let masses = pairs.iter().map(|p| p.1).collect();
        Self::new(atoms, masses, 1)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i * self.dim..(i + 1) * self.dim]
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.masses.iter().copied())
    }
}

/// Outcome of [`PiecewiseLinearGenerator::validate_lipschitz`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzReport {
    pub ok: bool,
    /// Largest observed `|G(u) - G(v)| / |u - v|`.
    pub max_ratio: f64,
}

/// A continuous piecewise-linear map `[0, 1] -> R^d` with Lipschitz bound `k`.
///
/// A plateau is a pair of consecutive breakpoints with equal values.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearGenerator {
    k: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    dim: usize,
}

impl PiecewiseLinearGenerator {
    /// `values` holds one row of `dim` coordinates per breakpoint.
    pub fn new(k: f64, breakpoints: Vec<f64>, values: Vec<f64>, dim: usize) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidInput(format!(
                "Lipschitz bound must be positive, got {k}"
            )));
        }
        if dim == 0 || breakpoints.len() < 2 || values.len() != breakpoints.len() * dim {
            return Err(Error::InvalidInput(
                "a generator needs at least two breakpoints with one value each".into(),
            ));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidInput(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite generator value".into()));
        }
        let g = Self {
            k,
            breakpoints,
            values,
            dim,
        };
        for j in 0..g.breakpoints.len() - 1 {
            let du = g.breakpoints[j + 1] - g.breakpoints[j];
            let dv = dist(g.value(j), g.value(j + 1));
            if !within_lipschitz(dv, du, k) {
                return Err(Error::InvalidInput(format!(
                    "segment {j} has slope {} above the bound {k}",
                    dv / du
                )));
            }
        }
        Ok(g)
    }

    /// The constant map `u -> point`.
    pub fn constant(point: &[f64], k: f64) -> Result<Self> {
        let mut values = point.to_vec();
        values.extend_from_slice(point);
        Self::new(k, vec![0.0, 1.0], values, point.len())
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn num_breakpoints(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn value(&self, j: usize) -> &[f64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear pieces as `(u_start, u_end, start_value, end_value)`.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, &[f64], &[f64])> + '_ {
        (0..self.breakpoints.len() - 1).map(move |j| {
            (
                self.breakpoints[j],
                self.breakpoints[j + 1],
                self.value(j),
                self.value(j + 1),
            )
        })
    }

    /// True if some piece of positive length is constant.
    pub fn has_plateaus(&self) -> bool {
        self.segments().any(|(_, _, a, b)| a == b)
    }

    /// Writes `G(u)` into `out`.
    pub fn evaluate_into(&self, u: f64, out: &mut [f64]) -> Result<()> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("latent value {u} outside [0, 1]")));
        }
        let m = self.breakpoints.len();
        // first index with breakpoint > u
        let hi = self.breakpoints.partition_point(|&b| b <= u);
        if hi == 0 || hi >= m {
            let j = if hi == 0 { 0 } else { m - 1 };
            out.copy_from_slice(self.value(j));
            return Ok(());
        }
        let j = hi - 1;
        let (u0, u1) = (self.breakpoints[j], self.breakpoints[j + 1]);
        let t = (u - u0) / (u1 - u0);
        let (a, b) = (self.value(j), self.value(j + 1));
        for i in 0..self.dim {
            out[i] = a[i] + t * (b[i] - a[i]);
        }
        Ok(())
    }

    pub fn evaluate(&self, u: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.evaluate_into(u, &mut out)?;
        Ok(out)
    }

    /// The map `u -> G(1 - u)`, which has the same pushforward measure.
    pub fn reflect(&self) -> Self {
        let m = self.breakpoints.len();
        let mut breakpoints: Vec<f64> = self.breakpoints.iter().rev().map(|u| 1.0 - u).collect();
        breakpoints[0] = 0.0;
        breakpoints[m - 1] = 1.0;
        let mut values = Vec::with_capacity(self.values.len());
        for j in (0..m).rev() {
            values.extend_from_slice(self.value(j));
        }
        Self {
            k: self.k,
            breakpoints,
            values,
            dim: self.dim,
        }
    }

    /// Midpoint-grid discretization of `G#U`: atoms `G((j - 1/2) / M)` with
    /// mass `1 / M`, duplicates merged.
    pub fn pushforward_discretize(&self, grid: usize) -> Result<DiscreteMeasure> {
        if grid == 0 {
            return Err(Error::InvalidInput("grid size must be at least 1".into()));
        }
        let mut atoms = vec![0.0; grid * self.dim];
        let mut seg = 0;
        let m = self.breakpoints.len();
        for (j, out) in atoms.chunks_exact_mut(self.dim).enumerate() {
            let u = (j as f64 + 0.5) / grid as f64;
            while seg + 2 < m && self.breakpoints[seg + 1] <= u {
                seg += 1;
            }
            let (u0, u1) = (self.breakpoints[seg], self.breakpoints[seg + 1]);
            let t = (u - u0) / (u1 - u0);
            let (a, b) = (self.value(seg), self.value(seg + 1));
            for i in 0..self.dim {
                out[i] = a[i] + t * (b[i] - a[i]);
            }
        }
        DiscreteMeasure::from_counts(atoms, self.dim)
    }

    /// Checks `|G(u) - G(v)| <= K |u - v| (1 + 1e-9)` on consecutive pairs of
    /// a uniform grid of `grid` points and on all pairs of breakpoints.
    ///
    /// Pairs closer than the latent tolerance may exceed the bound by the
    /// corresponding `K * 1e-12` displacement.
    pub fn validate_lipschitz(&self, k: f64, grid: usize) -> Result<LipschitzReport> {
        if grid < 2 {
            return Err(Error::InvalidInput("grid size must be at least 2".into()));
        }
        let mut ok = true;
        let mut max_ratio: f64 = 0.0;
        let mut check = |du: f64, dv: f64| {
            if du > 0.0 {
                max_ratio = max_ratio.max(dv / du);
            }
            ok &= within_lipschitz(dv, du, k);
        };
        let mut prev = self.evaluate(0.0)?;
        let mut cur = vec![0.0; self.dim];
        for j in 1..grid {
            let u = j as f64 / (grid - 1) as f64;
            self.evaluate_into(u, &mut cur)?;
            check(1.0 / (grid - 1) as f64, dist(&prev, &cur));
            core::mem::swap(&mut prev, &mut cur);
        }
        let m = self.breakpoints.len();
        for a in 0..m {
            for b in a + 1..m {
                let du = self.breakpoints[b] - self.breakpoints[a];
                check(du, dist(self.value(a), self.value(b)));
            }
        }
        Ok(LipschitzReport { ok, max_ratio })
    }

    /// Exact Lebesgue measure of `{u : X_i is a nearest site to G(u)}` for
    /// every site of `sites`.
    ///
    /// Each linear piece meets each standard Voronoi cell in an interval of
    /// the piece parameter; cost is `O(pieces * n^2)`.
    pub fn voronoi_occupancy(&self, sites: &SampleCloud) -> Result<Vec<f64>> {
        if sites.dim() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: sites.dim(),
            });
        }
        let n = sites.len();
        let norms: Vec<f64> = sites
            .points()
            .map(|p| sq_dist(p, &vec![0.0; p.len()]))
            .collect();
        let mut occ = vec![0.0; n];
        for (u0, u1, a, b) in self.segments() {
            for i in 0..n {
                let xi = sites.point(i);
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let xj = sites.point(j);
                    // |p - xi|^2 - |p - xj|^2 = alpha + beta * t along the piece
                    let mut alpha = norms[i] - norms[j];
                    let mut beta = 0.0;
                    for c in 0..self.dim {
                        let diff = xi[c] - xj[c];
                        alpha -= 2.0 * a[c] * diff;
                        beta -= 2.0 * (b[c] - a[c]) * diff;
                    }
                    if beta > 0.0 {
                        hi = hi.min(-alpha / beta);
                    } else if beta < 0.0 {
                        lo = lo.max(-alpha / beta);
                    } else if alpha > 0.0 {
                        hi = -1.0;
                    }
                    if hi <= lo {
                        break;
                    }
                }
                if hi > lo {
                    occ[i] += (hi - lo) * (u1 - u0);
                }
            }
        }
        Ok(occ)
    }
}

fn within_lipschitz(dv: f64, du: f64, k: f64) -> bool {
    dv <= k * du * (1.0 + 1e-9) || dv <= k * (du + LATENT_TOL)
}

/// Accumulates breakpoints, dropping pieces shorter than the latent
/// tolerance when they carry no displacement.
#[derive(Debug)]
pub(crate) struct GeneratorBuilder {
    dim: usize,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl GeneratorBuilder {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            dim,
            breakpoints: Vec::new(),
            values: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, u: f64, p: &[f64]) {
        if let Some(&last) = self.breakpoints.last() {
            let prev = &self.values[self.values.len() - self.dim..];
            if u - last <= LATENT_TOL && prev == p {
                return;
            }
        }
        self.breakpoints.push(u);
        self.values.extend_from_slice(p);
    }

    /// Snaps the last breakpoint to 1 (it must already be within `slack`).
    pub(crate) fn finish(mut self, k: f64, slack: f64) -> Result<PiecewiseLinearGenerator> {
        let last = *self.breakpoints.last().unwrap_or(&0.0);
        if libm::fabs(last - 1.0) > slack {
            return Err(Error::Construction(format!(
                "latent schedule ends at {last} instead of 1"
            )));
        }
        if let Some(b) = self.breakpoints.last_mut() {
            *b = 1.0;
        }
        if self.breakpoints.len() == 1 {
            let p = self.values.clone();
            return PiecewiseLinearGenerator::constant(&p, k);
        }
        PiecewiseLinearGenerator::new(k, self.breakpoints, self.values, self.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity() -> PiecewiseLinearGenerator {
        PiecewiseLinearGenerator::new(1.0, vec![0.0, 1.0], vec![0.0, 1.0], 1).unwrap()
    }

    #[test]
    fn evaluate_interpolates_and_hits_endpoints() {
        let g = identity();
        assert_eq!(g.evaluate(0.5).unwrap(), vec![0.5]);
        assert_eq!(g.evaluate(0.0).unwrap(), vec![0.0]);
        assert_eq!(g.evaluate(1.0).unwrap(), vec![1.0]);
    }

    #[test]
    fn evaluate_rejects_outside_unit_interval() {
        let g = identity();
        assert!(matches!(g.evaluate(-0.1), Err(Error::Domain(_))));
        assert!(matches!(g.evaluate(1.5), Err(Error::Domain(_))));
        assert!(matches!(g.evaluate(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn evaluate_is_exact_at_breakpoints() {
        let g = PiecewiseLinearGenerator::new(
            10.0,
            vec![0.0, 0.1, 0.37, 1.0],
            vec![0.3, 0.3, 1.1, 0.9],
            1,
        )
        .unwrap();
        for j in 0..4 {
            assert_eq!(g.evaluate(g.breakpoints()[j]).unwrap(), g.value(j));
        }
    }

    #[test]
    fn generator_rejects_bad_breakpoints() {
        assert!(PiecewiseLinearGenerator::new(1.0, vec![0.0, 0.5], vec![0.0, 0.1], 1).is_err());
        assert!(
            PiecewiseLinearGenerator::new(1.0, vec![0.0, 0.5, 0.5, 1.0], vec![0.0; 4], 1).is_err()
        );
        assert!(PiecewiseLinearGenerator::new(1.0, vec![0.0, 1.0], vec![0.0, 2.0], 1).is_err());
    }

    #[test]
    fn discretize_constant_and_identity() {
        let c = PiecewiseLinearGenerator::constant(&[3.0, -1.0], 1.0).unwrap();
        let m = c.pushforward_discretize(100).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.atom(0), &[3.0, -1.0]);
        assert_eq!(m.mass(0), 1.0);

        let m = identity().pushforward_discretize(2).unwrap();
        assert_eq!(m.atoms(), &[0.25, 0.75]);
        assert_eq!(m.masses(), &[0.5, 0.5]);
    }

    #[test]
    fn lipschitz_validation_reports_ratio() {
        let r = identity().validate_lipschitz(1.0, 50).unwrap();
        assert!(r.ok);
        assert!((r.max_ratio - 1.0).abs() < 1e-12);

        let steep = PiecewiseLinearGenerator::new(2.0, vec![0.0, 1.0], vec![0.0, 2.0], 1).unwrap();
        let r = steep.validate_lipschitz(1.0, 50).unwrap();
        assert!(!r.ok);
        assert!((r.max_ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reflection_swaps_endpoints() {
        let g = PiecewiseLinearGenerator::new(5.0, vec![0.0, 1.0], vec![1.0, 2.0, 4.0, 6.0], 2)
            .unwrap();
        let r = g.reflect();
        assert_eq!(r.value(0), &[4.0, 6.0]);
        assert_eq!(r.value(1), &[1.0, 2.0]);
        assert_eq!(r.reflect(), g);
    }

    #[test]
    fn duplicate_groups_partition_indices() {
        let c = SampleCloud::from_scalars(&[2.0, 0.0, 2.0, 1.0, 0.0]).unwrap();
        assert_eq!(c.duplicate_groups(), &[vec![0, 2], vec![1, 4], vec![3]]);
        let d = c.distinct();
        assert_eq!(d.coords(), &[2.0, 0.0, 1.0]);
        let mu = c.empirical_measure();
        assert_eq!(mu.masses(), &[0.4, 0.4, 0.2]);
    }

    #[test]
    fn negative_zero_is_a_duplicate_of_zero() {
        let c = SampleCloud::from_scalars(&[0.0, -0.0, 1.0]).unwrap();
        assert_eq!(c.distinct().len(), 2);
    }

    #[test]
    fn cloud_rejects_non_finite_and_empty() {
        assert!(SampleCloud::from_scalars(&[]).is_err());
        assert!(SampleCloud::from_scalars(&[1.0, f64::INFINITY]).is_err());
        assert!(SampleCloud::new(vec![1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn measure_merges_duplicates_and_checks_total() {
        let m = DiscreteMeasure::from_pairs_1d(&[(1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]).unwrap();
        assert_eq!(m.atoms(), &[1.0, 0.0]);
        assert_eq!(m.masses(), &[0.5, 0.5]);
        assert!(DiscreteMeasure::from_pairs_1d(&[(1.0, 0.5)]).is_err());
        assert!(DiscreteMeasure::from_pairs_1d(&[(1.0, 1.5), (2.0, -0.5)]).is_err());
    }

    #[test]
    fn occupancy_of_identity_against_two_sites() {
        let sites = SampleCloud::from_scalars(&[0.0, 1.0]).unwrap();
        let occ = identity().voronoi_occupancy(&sites).unwrap();
        assert!((occ[0] - 0.5).abs() < 1e-15 && (occ[1] - 0.5).abs() < 1e-15);
    }
}
