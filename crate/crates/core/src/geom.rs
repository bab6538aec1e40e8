//! Small Euclidean helpers on coordinate slices.

use core::cmp::Ordering;

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(sq_dist(a, b))
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(a.iter().map(|x| x * x).sum())
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_dist(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut ab2 = 0.0;
    let mut dot = 0.0;
    for i in 0..p.len() {
        let e = b[i] - a[i];
        ab2 += e * e;
        dot += (p[i] - a[i]) * e;
    }
    if ab2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot / ab2).clamp(0.0, 1.0);
    let mut s = 0.0;
    for i in 0..p.len() {
        let q = a[i] + t * (b[i] - a[i]) - p[i];
        s += q * q;
    }
    libm::sqrt(s)
}

/// Lexicographic order on coordinate slices (`-0.0 == 0.0`).
pub fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).unwrap_or_else(|| x.total_cmp(y)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// `f64` with a total order, for heaps and sorting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Total(pub f64);

impl Eq for Total {}

impl PartialOrd for Total {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Total {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Neumaier compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if libm::fabs(sum) >= libm::fabs(v) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_distance_cases() {
        assert_eq!(
            point_segment_dist(&[0.5, 1.0], &[0.0, 0.0], &[1.0, 0.0]),
            1.0
        );
        assert_eq!(
            point_segment_dist(&[2.0, 0.0], &[0.0, 0.0], &[1.0, 0.0]),
            1.0
        );
        assert_eq!(
            point_segment_dist(&[3.0, 4.0], &[0.0, 0.0], &[0.0, 0.0]),
            5.0
        );
    }

    #[test]
    fn compensated_sum_of_many_small_terms() {
        let m = 100_000;
        let s = compensated_sum((0..m).map(|_| 1.0 / m as f64));
        assert!((s - 1.0).abs() < 1e-15);
    }
}
