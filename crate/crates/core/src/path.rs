//! Shortest covering walks under squared Euclidean step lengths.
//!
//! A covering walk visits every sample at least once and may revisit points;
//! its cost is the sum of squared step lengths. Because squared lengths break
//! the triangle inequality, a walk can get cheaper by detouring through an
//! already visited sample. Taking the all-pairs closure of the squared metric
//! removes the revisits from the search: an optimal walk is an optimal
//! Hamiltonian path on closure costs with every closure edge re-expanded into
//! the samples it passes through.
//!
//! All indices refer to [`SampleCloud::distinct`].

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{dist, sq_dist, Total};
use crate::model::SampleCloud;
use crate::{Error, Result};

/// Largest distinct-point count accepted by [`exact_covering_walk`].
pub const EXACT_SIZE_LIMIT: usize = 14;

/// Above this size the heuristic uses a sparse closure instead of
/// Floyd-Warshall.
const DENSE_CLOSURE_LIMIT: usize = 300;

/// Candidate neighbours per point for the sparse closure.
const SPARSE_NEIGHBOURS: usize = 24;

/// Relative tolerance for cost ties.
const TIE_TOL: f64 = 1e-12;

/// A covering walk `sigma(1..n+k)` over sample indices.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSolution {
    pub order: Vec<usize>,
    /// Number of revisits, `order.len() - n`.
    pub k: usize,
    /// Sum of squared step lengths.
    pub cost: f64,
    /// Whether the walk is provably optimal.
    pub exact: bool,
}

impl WalkSolution {
    /// Builds a walk over `cloud.distinct()` and computes its cost.
    pub fn from_order(cloud: &SampleCloud, order: Vec<usize>, exact: bool) -> Result<Self> {
        let cloud = cloud.distinct();
        check_order(&cloud, &order)?;
        let cost = walk_cost(&cloud, &order);
        Ok(Self {
            k: order.len() - cloud.len(),
            order,
            cost,
            exact,
        })
    }

    /// Checks coverage, index range, the no-immediate-repeat rule, `k` and
    /// the stored cost (relative `1e-9`).
    pub fn validate(&self, cloud: &SampleCloud) -> Result<()> {
        let cloud = cloud.distinct();
        check_order(&cloud, &self.order)?;
        if self.k + cloud.len() != self.order.len() {
            return Err(Error::InvalidWalk(format!(
                "k = {} does not match {} steps over {} points",
                self.k,
                self.order.len(),
                cloud.len()
            )));
        }
        let cost = walk_cost(&cloud, &self.order);
        if libm::fabs(cost - self.cost) > 1e-9 * cost.max(1e-300) {
            return Err(Error::InvalidWalk(format!(
                "stored cost {} differs from recomputed {cost}",
                self.cost
            )));
        }
        Ok(())
    }

    pub fn reversed(&self) -> Self {
        let mut order = self.order.clone();
        order.reverse();
        Self {
            order,
            k: self.k,
            cost: self.cost,
            exact: self.exact,
        }
    }

    /// Positions of each index in the walk.
    pub fn visits(&self, n: usize) -> Vec<Vec<usize>> {
        let mut v = vec![Vec::new(); n];
        for (pos, &i) in self.order.iter().enumerate() {
            v[i].push(pos);
        }
        v
    }

    /// Sum of (unsquared) step lengths.
    pub fn euclidean_length(&self, cloud: &SampleCloud) -> f64 {
        let cloud = cloud.distinct();
        self.order
            .windows(2)
            .map(|w| dist(cloud.point(w[0]), cloud.point(w[1])))
            .sum()
    }
}

fn check_order(cloud: &SampleCloud, order: &[usize]) -> Result<()> {
    let n = cloud.len();
    if order.len() < n {
        return Err(Error::InvalidWalk(format!(
            "{} positions cannot cover {n} points",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n {
            return Err(Error::InvalidWalk(format!(
                "index {i} out of range for {n} points"
            )));
        }
        seen[i] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidWalk(format!(
            "point {missing} is never visited"
        )));
    }
    if let Some(w) = order.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidWalk(format!(
            "index {} repeats immediately",
            w[0]
        )));
    }
    Ok(())
}

fn walk_cost(cloud: &SampleCloud, order: &[usize]) -> f64 {
    order
        .windows(2)
        .map(|w| sq_dist(cloud.point(w[0]), cloud.point(w[1])))
        .sum()
}

/// All-pairs minimum walk costs under squared step lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureMatrix {
    n: usize,
    cost: Vec<f64>,
    /// `next[i * n + j]`: first hop after `i` on the witness walk to `j`.
    next: Vec<u32>,
}

impl ClosureMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.n + j]
    }

    /// Witness walk from `i` to `j`, excluding `i` and including `j`.
    pub fn expand(&self, i: usize, j: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = i;
        while cur != j {
            cur = self.next[cur * self.n + j] as usize;
            out.push(cur);
            debug_assert!(out.len() <= self.n);
        }
        out
    }
}

/// Floyd-Warshall closure of the squared metric, relaxing in ascending
/// index order. Among equal-cost witnesses the one with fewer hops is kept.
pub fn squared_metric_closure(cloud: &SampleCloud) -> ClosureMatrix {
    let cloud = cloud.distinct();
    let n = cloud.len();
    let mut cost = vec![0.0; n * n];
    let mut next = vec![0u32; n * n];
    let mut hops = vec![0u32; n * n];
    for i in 0..n {
        for j in 0..n {
            cost[i * n + j] = sq_dist(cloud.point(i), cloud.point(j));
            next[i * n + j] = j as u32;
            hops[i * n + j] = u32::from(i != j);
        }
    }
    for m in 0..n {
        for i in 0..n {
            if i == m {
                continue;
            }
            let cim = cost[i * n + m];
            for j in 0..n {
                if j == m || j == i {
                    continue;
                }
                let cand = cim + cost[m * n + j];
                let cur = cost[i * n + j];
                let cand_hops = hops[i * n + m] + hops[m * n + j];
                let better = cand < cur * (1.0 - TIE_TOL)
                    || (cand <= cur * (1.0 + TIE_TOL) && cand_hops < hops[i * n + j]);
                if better {
                    cost[i * n + j] = cand;
                    next[i * n + j] = next[i * n + m];
                    hops[i * n + j] = cand_hops;
                }
            }
        }
    }
    ClosureMatrix { n, cost, next }
}

/// Closure restricted to Gabriel edges found among each point's nearest
/// candidates. Shortest squared-length walks only use Gabriel edges, so the
/// result is exact whenever every Gabriel edge is among the candidates and an
/// upper bound otherwise.
fn sparse_closure(cloud: &SampleCloud, candidates: usize) -> ClosureMatrix {
    let n = cloud.len();
    let candidates = candidates.min(n - 1);
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut row: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        row.clear();
        row.extend(
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (sq_dist(cloud.point(i), cloud.point(j)), j)),
        );
        if candidates < row.len() {
            row.select_nth_unstable_by(candidates, |a, b| a.0.total_cmp(&b.0));
            row.truncate(candidates);
        }
        row.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (r, &(dij, j)) in row.iter().enumerate() {
            // any point inside the diametral ball of (i, j) is closer to i than j
            let blocked = row[..r].iter().any(|&(dim, m)| {
                dim + sq_dist(cloud.point(m), cloud.point(j)) < dij * (1.0 - TIE_TOL)
            });
            if !blocked {
                adjacency[i].push((j, dij));
                adjacency[j].push((i, dij));
            }
        }
    }
    for list in adjacency.iter_mut() {
        list.sort_by_key(|e| e.0);
        list.dedup_by(|a, b| a.0 == b.0);
    }

    let mut cost = vec![0.0; n * n];
    let mut next = vec![0u32; n * n];
    let mut dist_to = vec![f64::INFINITY; n];
    let mut parent = vec![u32::MAX; n];
    let mut heap = BinaryHeap::new();
    for target in 0..n {
        dist_to.fill(f64::INFINITY);
        parent.fill(u32::MAX);
        dist_to[target] = 0.0;
        heap.push(Reverse((Total(0.0), target)));
        while let Some(Reverse((Total(d), v))) = heap.pop() {
            if d > dist_to[v] {
                continue;
            }
            for &(w, c) in &adjacency[v] {
                let nd = d + c;
                if nd < dist_to[w] {
                    dist_to[w] = nd;
                    parent[w] = v as u32;
                    heap.push(Reverse((Total(nd), w)));
                }
            }
        }
        for v in 0..n {
            let direct = sq_dist(cloud.point(v), cloud.point(target));
            let idx = v * n + target;
            if v == target {
                cost[idx] = 0.0;
                next[idx] = target as u32;
            } else if dist_to[v] < direct {
                cost[idx] = dist_to[v];
                next[idx] = parent[v];
            } else {
                cost[idx] = direct;
                next[idx] = target as u32;
            }
        }
    }
    ClosureMatrix { n, cost, next }
}

/// Expands a Hamiltonian path on the closure into an explicit walk.
fn expand_path(closure: &ClosureMatrix, perm: &[usize]) -> Vec<usize> {
    let mut order = Vec::with_capacity(perm.len());
    order.push(perm[0]);
    for w in perm.windows(2) {
        order.extend(closure.expand(w[0], w[1]));
    }
    order
}

fn lexicographic_orientation(order: Vec<usize>) -> Vec<usize> {
    let mut rev = order.clone();
    rev.reverse();
    if rev < order {
        rev
    } else {
        order
    }
}

/// Optimal covering walk by Held-Karp on the closure (at most
/// [`EXACT_SIZE_LIMIT`] distinct points).
pub fn exact_covering_walk(cloud: &SampleCloud) -> Result<WalkSolution> {
    exact_covering_walk_with_limit(cloud, EXACT_SIZE_LIMIT)
}

pub fn exact_covering_walk_with_limit(cloud: &SampleCloud, limit: usize) -> Result<WalkSolution> {
    let cloud = cloud.distinct();
    let n = cloud.len();
    if n > limit || n > 20 {
        return Err(Error::SizeLimit {
            n,
            limit: limit.min(20),
            hint: "use heuristic_covering_walk",
        });
    }
    if n == 1 {
        return WalkSolution::from_order(&cloud, vec![0], true);
    }
    let closure = squared_metric_closure(&cloud);
    let perm = held_karp(n, |i, j| closure.cost(i, j));
    let order = lexicographic_orientation(expand_path(&closure, &perm));
    WalkSolution::from_order(&cloud, order, true)
}

/// Minimum-cost Hamiltonian path for a symmetric cost, `n <= 20`.
fn held_karp<F: Fn(usize, usize) -> f64>(n: usize, cost: F) -> Vec<usize> {
    let full = 1usize << n;
    let mut dp = vec![f64::INFINITY; full * n];
    let mut parent = vec![u8::MAX; full * n];
    for i in 0..n {
        dp[(1 << i) * n + i] = 0.0;
    }
    for mask in 1..full {
        for last in 0..n {
            if mask & (1 << last) == 0 {
                continue;
            }
            let base = dp[mask * n + last];
            if !base.is_finite() {
                continue;
            }
            for nxt in 0..n {
                if mask & (1 << nxt) != 0 {
                    continue;
                }
                let cand = base + cost(last, nxt);
                let slot = (mask | (1 << nxt)) * n + nxt;
                if cand < dp[slot] * (1.0 - TIE_TOL) || !dp[slot].is_finite() {
                    dp[slot] = cand;
                    parent[slot] = last as u8;
                }
            }
        }
    }
    let all = full - 1;
    let mut end = 0;
    for i in 1..n {
        if dp[all * n + i] < dp[all * n + end] * (1.0 - TIE_TOL) {
            end = i;
        }
    }
    let mut perm = Vec::with_capacity(n);
    let (mut mask, mut cur) = (all, end);
    loop {
        perm.push(cur);
        let p = parent[mask * n + cur];
        if p == u8::MAX {
            break;
        }
        mask &= !(1 << cur);
        cur = p as usize;
    }
    perm.reverse();
    perm
}

/// Exhaustive search over covering sequences of length at most `n + k_max`
/// with no immediate repeats. Ties resolve to the lexicographically smallest
/// sequence.
pub fn brute_force_walk(cloud: &SampleCloud, k_max: usize) -> Result<WalkSolution> {
    let cloud = cloud.distinct();
    let n = cloud.len();
    if n == 1 {
        return WalkSolution::from_order(&cloud, vec![0], true);
    }
    let max_len = n + k_max;
    let mut work = n as f64;
    for _ in 1..max_len {
        work *= (n - 1) as f64;
    }
    if work > 5e7 {
        return Err(Error::SizeLimit {
            n,
            limit: 7,
            hint: "brute force is only meant for tiny clouds",
        });
    }
    let sq: Vec<f64> = (0..n * n)
        .map(|ij| sq_dist(cloud.point(ij / n), cloud.point(ij % n)))
        .collect();

    struct Search<'a> {
        n: usize,
        max_len: usize,
        sq: &'a [f64],
        seq: Vec<usize>,
        counts: Vec<usize>,
        uncovered: usize,
        best: Option<(f64, Vec<usize>)>,
    }

    impl Search<'_> {
        fn dfs(&mut self, cost: f64) {
            if let Some((b, _)) = &self.best {
                if cost > b * (1.0 + TIE_TOL) {
                    return;
                }
            }
            if self.uncovered == 0 {
                let better = match &self.best {
                    None => true,
                    Some((b, s)) => {
                        cost < b * (1.0 - TIE_TOL) || (cost <= b * (1.0 + TIE_TOL) && self.seq < *s)
                    }
                };
                if better {
                    self.best = Some((cost, self.seq.clone()));
                }
            }
            if self.seq.len() == self.max_len || self.max_len - self.seq.len() < self.uncovered {
                return;
            }
            let last = *self.seq.last().unwrap();
            for nxt in 0..self.n {
                if nxt == last {
                    continue;
                }
                if self.counts[nxt] == 0 {
                    self.uncovered -= 1;
                }
                self.counts[nxt] += 1;
                self.seq.push(nxt);
                self.dfs(cost + self.sq[last * self.n + nxt]);
                self.seq.pop();
                self.counts[nxt] -= 1;
                if self.counts[nxt] == 0 {
                    self.uncovered += 1;
                }
            }
        }
    }

    let mut search = Search {
        n,
        max_len,
        sq: &sq,
        seq: Vec::with_capacity(max_len),
        counts: vec![0; n],
        uncovered: n,
        best: None,
    };
    for start in 0..n {
        search.seq.push(start);
        search.counts[start] = 1;
        search.uncovered = n - 1;
        search.dfs(0.0);
        search.seq.pop();
        search.counts[start] = 0;
    }
    let (_, order) = search.best.expect("a covering sequence always exists");
    WalkSolution::from_order(&cloud, order, true)
}

/// Nearest-neighbour start from a seeded random point, then 2-opt on the
/// closure Hamiltonian path, expansion of closure edges, and splitting of
/// any remaining step that has a sample inside its diametral ball.
pub fn heuristic_covering_walk(cloud: &SampleCloud, seed: u64) -> Result<WalkSolution> {
    let cloud = cloud.distinct();
    let n = cloud.len();
    if n == 1 {
        return WalkSolution::from_order(&cloud, vec![0], false);
    }
    let closure = if n <= DENSE_CLOSURE_LIMIT {
        squared_metric_closure(&cloud)
    } else {
        sparse_closure(&cloud, SPARSE_NEIGHBOURS)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = rng.random_range(0..n);
    let mut perm = nearest_neighbour_path(&closure, start);
    two_opt(&closure, &mut perm);
    let mut order = expand_path(&closure, &perm);
    split_non_gabriel_steps(&cloud, &mut order);
    WalkSolution::from_order(&cloud, order, false)
}

fn nearest_neighbour_path(closure: &ClosureMatrix, start: usize) -> Vec<usize> {
    let n = closure.len();
    let mut visited = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    let mut cur = start;
    visited[cur] = true;
    perm.push(cur);
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_cost = f64::INFINITY;
        for j in 0..n {
            if !visited[j] && closure.cost(cur, j) < best_cost {
                best = j;
                best_cost = closure.cost(cur, j);
            }
        }
        visited[best] = true;
        perm.push(best);
        cur = best;
    }
    perm
}

/// Neighbour-list 2-opt for an open path; both endpoints are free.
fn two_opt(closure: &ClosureMatrix, perm: &mut [usize]) {
    let n = perm.len();
    if n < 3 {
        return;
    }
    let list_len = (n - 1).min(12);
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|a| {
            let mut row: Vec<usize> = (0..n).filter(|&b| b != a).collect();
            row.sort_by(|&x, &y| {
                closure
                    .cost(a, x)
                    .total_cmp(&closure.cost(a, y))
                    .then(x.cmp(&y))
            });
            row.truncate(list_len);
            row
        })
        .collect();
    let mut pos = vec![0usize; n];
    for (p, &v) in perm.iter().enumerate() {
        pos[v] = p;
    }
    let c = |a: usize, b: usize| closure.cost(a, b);
    let scale = (0..n - 1)
        .map(|i| c(perm[i], perm[i + 1]))
        .sum::<f64>()
        .max(1e-300);
    let eps = 1e-12 * scale;
    let mut improved = true;
    let mut sweeps = 0;
    while improved && sweeps < 10_000 {
        improved = false;
        sweeps += 1;
        for i in 0..n {
            let a = perm[i];
            // forward: replace (a, succ) and (c, d) by (a, c) and (succ, d)
            if i + 1 < n {
                let b = perm[i + 1];
                for &cn in &neighbours[a] {
                    if c(a, cn) >= c(a, b) {
                        break;
                    }
                    let j = pos[cn];
                    if j <= i + 1 {
                        continue;
                    }
                    let (gain_d, loss_d) = if j + 1 < n {
                        let d = perm[j + 1];
                        (c(b, d), c(cn, d))
                    } else {
                        (0.0, 0.0)
                    };
                    let delta = c(a, cn) + gain_d - c(a, b) - loss_d;
                    if delta < -eps {
                        perm[i + 1..=j].reverse();
                        for p in i + 1..=j {
                            pos[perm[p]] = p;
                        }
                        improved = true;
                        break;
                    }
                }
            }
            // backward: replace (pred, a) and (e, c) by (c, a) and (e, pred)
            let i = pos[a];
            if i >= 1 {
                let b = perm[i - 1];
                for &cn in &neighbours[a] {
                    if c(a, cn) >= c(a, b) {
                        break;
                    }
                    let j = pos[cn];
                    if j + 1 >= i {
                        continue;
                    }
                    let (gain_e, loss_e) = if j >= 1 {
                        let e = perm[j - 1];
                        (c(e, b), c(e, cn))
                    } else {
                        (0.0, 0.0)
                    };
                    let delta = c(cn, a) + gain_e - c(b, a) - loss_e;
                    if delta < -eps {
                        perm[j..i].reverse();
                        for p in j..i {
                            pos[perm[p]] = p;
                        }
                        improved = true;
                        break;
                    }
                }
            }
        }
    }
}

/// Inserts, into every step `a -> b`, the sample minimizing
/// `|a - m|^2 + |m - b|^2` whenever that beats `|a - b|^2`.
fn split_non_gabriel_steps(cloud: &SampleCloud, order: &mut Vec<usize>) {
    let n = cloud.len();
    let mut out = Vec::with_capacity(order.len());
    out.push(order[0]);
    let mut pending: Vec<usize> = order[1..].iter().rev().copied().collect();
    while let Some(b) = pending.pop() {
        let a = *out.last().unwrap();
        let direct = sq_dist(cloud.point(a), cloud.point(b));
        let mut best = None;
        let mut best_cost = direct * (1.0 - TIE_TOL);
        for m in 0..n {
            if m == a || m == b {
                continue;
            }
            let via =
                sq_dist(cloud.point(a), cloud.point(m)) + sq_dist(cloud.point(m), cloud.point(b));
            if via < best_cost {
                best = Some(m);
                best_cost = via;
            }
        }
        match best {
            Some(m) => {
                pending.push(b);
                pending.push(m);
            }
            None => out.push(b),
        }
    }
    *order = out;
}

/// `n * max_i sum_{j in visits(i)} (|X_sigma(j-1) - X_i| + |X_sigma(j+1) - X_i|) / 2`
/// with the walk's endpoints duplicated at both ends.
///
/// Also checks that the bound dominates the walk's Euclidean length and, for
/// small clouds, the shortest Hamiltonian path length.
pub fn k2_lower_bound(cloud: &SampleCloud, walk: &WalkSolution) -> Result<f64> {
    let sums = visit_half_lengths(cloud, walk)?;
    let cloud = cloud.distinct();
    let n = cloud.len();
    let bound = n as f64 * sums.iter().fold(0.0f64, |a, &b| a.max(b));
    let length = walk.euclidean_length(&cloud);
    let slack = 1e-9 * length.max(1e-300);
    if bound + slack < length {
        return Err(Error::Construction(format!(
            "lower bound {bound} is below the walk length {length}"
        )));
    }
    if n <= EXACT_SIZE_LIMIT {
        let shortest = min_permutation_path_length(&cloud)?;
        if bound + slack < shortest {
            return Err(Error::Construction(format!(
                "lower bound {bound} is below the shortest Hamiltonian path {shortest}"
            )));
        }
    }
    Ok(bound)
}

/// Per-sample `sum_{j in visits(i)} (|prev - X_i| + |next - X_i|) / 2`.
pub(crate) fn visit_half_lengths(cloud: &SampleCloud, walk: &WalkSolution) -> Result<Vec<f64>> {
    walk.validate(cloud)?;
    let cloud = cloud.distinct();
    let n = cloud.len();
    let order = &walk.order;
    let last = order.len() - 1;
    let mut sums = vec![0.0; n];
    for (pos, &i) in order.iter().enumerate() {
        let prev = order[pos.saturating_sub(1)];
        let next = order[(pos + 1).min(last)];
        let xi = cloud.point(i);
        sums[i] += 0.5 * (dist(cloud.point(prev), xi) + dist(cloud.point(next), xi));
    }
    Ok(sums)
}

/// Length of the shortest path visiting every sample exactly once
/// (Euclidean, unsquared), by Held-Karp.
pub fn min_permutation_path_length(cloud: &SampleCloud) -> Result<f64> {
    let cloud = cloud.distinct();
    let n = cloud.len();
    if n > EXACT_SIZE_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: EXACT_SIZE_LIMIT,
            hint: "shortest Hamiltonian path is only computed for small clouds",
        });
    }
    if n == 1 {
        return Ok(0.0);
    }
    let perm = held_karp(n, |i, j| dist(cloud.point(i), cloud.point(j)));
    Ok(perm
        .windows(2)
        .map(|w| dist(cloud.point(w[0]), cloud.point(w[1])))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> SampleCloud {
        SampleCloud::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    pub(crate) fn star() -> SampleCloud {
        let h = libm::sqrt(3.0) / 2.0;
        SampleCloud::from_points(&[[0.0, 0.0], [1.0, 0.0], [-0.5, h], [-0.5, -h]]).unwrap()
    }

    #[test]
    fn closure_detours_through_midpoint() {
        let c = SampleCloud::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
        let cl = squared_metric_closure(&c);
        assert_eq!(cl.cost(0, 2), 2.0);
        assert_eq!(cl.expand(0, 2), vec![1, 2]);
    }

    #[test]
    fn closure_of_two_points_is_direct() {
        let c = SampleCloud::from_scalars(&[0.0, 3.0]).unwrap();
        let cl = squared_metric_closure(&c);
        assert_eq!(cl.cost(0, 1), 9.0);
        assert_eq!(cl.expand(0, 1), vec![1]);
    }

    #[test]
    fn closure_tie_keeps_direct_diagonal() {
        let cl = squared_metric_closure(&square());
        assert_eq!(cl.cost(0, 2), 2.0);
        assert_eq!(cl.expand(0, 2), vec![2]);
    }

    #[test]
    fn square_walk() {
        let w = exact_covering_walk(&square()).unwrap();
        assert_eq!(w.cost, 3.0);
        assert_eq!(w.k, 0);
        assert!(w.exact);
    }

    #[test]
    fn star_walk_revisits_centre() {
        let w = exact_covering_walk(&star()).unwrap();
        assert!((w.cost - 4.0).abs() < 1e-12);
        assert_eq!(w.k, 1);
        assert_eq!(w.order.iter().filter(|&&i| i == 0).count(), 2);
        let b = brute_force_walk(&star(), 2).unwrap();
        assert!((b.cost - 4.0).abs() < 1e-12);
        let hp = held_karp(4, |i, j| sq_dist(star().point(i), star().point(j)));
        let hp_cost: f64 = hp
            .windows(2)
            .map(|w| sq_dist(star().point(w[0]), star().point(w[1])))
            .sum();
        assert!((hp_cost - 5.0).abs() < 1e-12);
    }

    #[test]
    fn single_point_walk() {
        let c = SampleCloud::from_points(&[[1.0, 2.0]]).unwrap();
        let w = exact_covering_walk(&c).unwrap();
        assert_eq!(w.order, vec![0]);
        assert_eq!((w.k, w.cost), (0, 0.0));
        assert_eq!(k2_lower_bound(&c, &w).unwrap(), 0.0);
    }

    #[test]
    fn collinear_brute_force_is_sorted() {
        let c = SampleCloud::from_scalars(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        let w = brute_force_walk(&c, 2).unwrap();
        assert_eq!(w.order, vec![0, 1, 2, 3]);
        assert_eq!((w.cost, w.k), (3.0, 0));
    }

    #[test]
    fn two_point_brute_force() {
        let c = SampleCloud::from_scalars(&[5.0, 2.0]).unwrap();
        let w = brute_force_walk(&c, 2).unwrap();
        assert_eq!(w.order, vec![0, 1]);
        assert_eq!(w.cost, 9.0);
    }

    #[test]
    fn size_limits() {
        let xs: Vec<f64> = (0..15).map(|i| i as f64).collect();
        let c = SampleCloud::from_scalars(&xs).unwrap();
        assert!(matches!(
            exact_covering_walk(&c),
            Err(Error::SizeLimit { .. })
        ));
        assert!(matches!(
            brute_force_walk(&c, 2),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn k2_examples() {
        let c = SampleCloud::from_scalars(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        let w = WalkSolution::from_order(&c, vec![0, 1, 2, 3], true).unwrap();
        assert_eq!(k2_lower_bound(&c, &w).unwrap(), 4.0);
        let s = star();
        let w = WalkSolution::from_order(&s, vec![1, 0, 2, 0, 3], true).unwrap();
        assert!((k2_lower_bound(&s, &w).unwrap() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_walks_are_rejected() {
        let c = SampleCloud::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            WalkSolution::from_order(&c, vec![0, 1], true),
            Err(Error::InvalidWalk(_))
        ));
        assert!(matches!(
            WalkSolution::from_order(&c, vec![0, 1, 1, 2], true),
            Err(Error::InvalidWalk(_))
        ));
        assert!(matches!(
            WalkSolution::from_order(&c, vec![0, 1, 3], true),
            Err(Error::InvalidWalk(_))
        ));
        let mut w = WalkSolution::from_order(&c, vec![0, 1, 2], true).unwrap();
        w.cost = 7.0;
        assert!(matches!(k2_lower_bound(&c, &w), Err(Error::InvalidWalk(_))));
    }

    #[test]
    fn heuristic_sorts_collinear_points() {
        let xs: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let c = SampleCloud::from_scalars(&xs).unwrap();
        for seed in 0..10 {
            let w = heuristic_covering_walk(&c, seed).unwrap();
            assert_eq!(w.cost, 8.0, "seed {seed}: {:?}", w.order);
            assert_eq!(w.k, 0);
            assert!(!w.exact);
        }
    }

    #[test]
    fn sparse_closure_matches_dense_on_small_cloud() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<[f64; 2]> = (0..40).map(|_| [rng.random(), rng.random()]).collect();
        let c = SampleCloud::from_points(&pts).unwrap();
        let dense = squared_metric_closure(&c);
        let sparse = sparse_closure(&c, 39);
        for i in 0..40 {
            for j in 0..40 {
                assert!((dense.cost(i, j) - sparse.cost(i, j)).abs() <= 1e-12);
            }
        }
    }
}
