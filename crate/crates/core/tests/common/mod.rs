#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wopt_core::{PiecewiseLinearGenerator, SampleCloud};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize, scale: f64) -> SampleCloud {
    let coords: Vec<f64> = (0..n * dim).map(|_| scale * rng.random::<f64>()).collect();
    SampleCloud::new(coords, dim).unwrap()
}

/// A random `K`-Lipschitz generator: random latent breakpoints, and values
/// that move toward random targets at speed at most `K`.
pub fn random_lipschitz_generator(
    rng: &mut ChaCha8Rng,
    k: f64,
    pieces: usize,
    lo: &[f64],
    hi: &[f64],
) -> PiecewiseLinearGenerator {
    let dim = lo.len();
    let mut us: Vec<f64> = (0..pieces - 1).map(|_| rng.random::<f64>()).collect();
    us.push(0.0);
    us.push(1.0);
    us.sort_by(f64::total_cmp);
    us.dedup();
    let mut values = Vec::with_capacity(us.len() * dim);
    let mut cur: Vec<f64> = (0..dim).map(|c| rng.random_range(lo[c]..=hi[c])).collect();
    values.extend_from_slice(&cur);
    for w in us.windows(2) {
        let target: Vec<f64> = (0..dim).map(|c| rng.random_range(lo[c]..=hi[c])).collect();
        let gap: f64 = target
            .iter()
            .zip(&cur)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        // random speed, possibly a pause
        let speed = if rng.random_bool(0.3) {
            0.0
        } else {
            k * rng.random::<f64>()
        };
        let reach = speed * (w[1] - w[0]);
        let t = if gap > 0.0 {
            (reach / gap).min(1.0) * (1.0 - 1e-12)
        } else {
            0.0
        };
        for c in 0..dim {
            cur[c] += t * (target[c] - cur[c]);
        }
        values.extend_from_slice(&cur);
    }
    PiecewiseLinearGenerator::new(k, us, values, dim).unwrap()
}
