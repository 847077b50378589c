use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Point;

pub const DEFAULT_SEED: u64 = 42;

/// Sampling region: `x` uniform in the cube `[-x_half_width, x_half_width]^n`,
/// `y` uniform on the annulus `y_inner <= |y| <= y_outer`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub count: usize,
    pub seed: u64,
    pub x_half_width: f64,
    pub y_inner: f64,
    pub y_outer: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            count: 50,
            seed: DEFAULT_SEED,
            x_half_width: 1.0,
            y_inner: 0.5,
            y_outer: 2.0,
        }
    }
}

impl SampleConfig {
    pub fn new(count: usize, seed: u64) -> Self {
        SampleConfig {
            count,
            seed,
            ..Default::default()
        }
    }

    pub fn points(&self, n: usize) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (a, b) = (self.y_inner.powi(n as i32), self.y_outer.powi(n as i32));
        (0..self.count)
            .map(|_| {
                let x = (0..n)
                    .map(|_| rng.random_range(-self.x_half_width..=self.x_half_width))
                    .collect();
                let dir = loop {
                    let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                    let norm = g.iter().map(|c| c * c).sum::<f64>().sqrt();
                    if norm > 1e-12 {
                        break g.into_iter().map(|c| c / norm).collect::<Vec<_>>();
                    }
                };
                // radius distributed so that points are uniform in volume
                let u: f64 = rng.random();
                let r = (a + u * (b - a)).powf(1.0 / n as f64);
                let y = dir.into_iter().map(|c| c * r).collect();
                Point { x, y }
            })
            .collect()
    }
}

/// `count` deterministic points in dimension `n` on the default region.
pub fn sample_points(n: usize, count: usize, seed: u64) -> Vec<Point> {
    SampleConfig::new(count, seed).points(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_inside_region() {
        let a = sample_points(3, 40, 7);
        assert_eq!(a, sample_points(3, 40, 7));
        assert_ne!(a, sample_points(3, 40, 8));
        for p in &a {
            let r = p.y_norm();
            assert!((0.5 - 1e-12..=2.0 + 1e-12).contains(&r));
            assert!(p.x.iter().all(|c| c.abs() <= 1.0));
        }
    }
}
