use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::path::PathSignal;

/// Nodal values of one Brownian path on the dyadic grids `2^{-k} T`,
/// `k = 0..=level`, built by midpoint (bridge) refinement. The normals are
/// consumed level by level, so every level is a restriction of the next.
fn dyadic_values(horizon: f64, level: u32, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z: f64 = rng.sample(StandardNormal);
    let mut levels = vec![vec![0.0, horizon.sqrt() * z]];
    for k in 1..=level {
        let prev = levels.last().unwrap();
        let dt = horizon / (1u64 << (k - 1)) as f64;
        let sd = (dt / 4.0).sqrt();
        let mut next = Vec::with_capacity(2 * prev.len() - 1);
        for w in prev.windows(2) {
            let z: f64 = rng.sample(StandardNormal);
            next.push(w[0]);
            next.push(0.5 * (w[0] + w[1]) + sd * z);
        }
        next.push(*prev.last().unwrap());
        levels.push(next);
    }
    levels
}

/// Piecewise-linear interpolation of a standard Brownian sample on the
/// dyadic grid of mesh `2^{-level} T`.
pub fn sample_brownian(horizon: f64, level: u32, seed: u64) -> PathSignal {
    let vals = dyadic_values(horizon, level, seed).pop().unwrap();
    PathSignal::from_uniform(horizon, vals).expect("dyadic grid is valid")
}

/// All levels `0..=max_level` of the same Brownian sample.
pub fn sample_brownian_levels(horizon: f64, max_level: u32, seed: u64) -> Vec<PathSignal> {
    dyadic_values(horizon, max_level, seed)
        .into_iter()
        .map(|v| PathSignal::from_uniform(horizon, v).expect("dyadic grid is valid"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::sup_distance;

    #[test]
    fn starts_at_zero_and_is_deterministic() {
        let a = sample_brownian(1.0, 6, 3);
        assert_eq!(a.eval(0.0), 0.0);
        assert_eq!(a.times().len(), 65);
        assert_eq!(a, sample_brownian(1.0, 6, 3));
        assert_ne!(a, sample_brownian(1.0, 6, 4));
    }

    #[test]
    fn levels_are_consistent() {
        let levels = sample_brownian_levels(2.0, 8, 11);
        for k in 0..8 {
            let coarse = &levels[k];
            let fine = &levels[k + 1];
            for (i, t) in coarse.times().iter().enumerate() {
                assert_eq!(fine.values()[2 * i], coarse.values()[i]);
                assert_eq!(fine.eval(*t), coarse.eval(*t));
            }
        }
        assert_eq!(levels[5], sample_brownian(2.0, 5, 11));
    }

    #[test]
    fn refinement_distance_is_largest_midpoint_offset() {
        let levels = sample_brownian_levels(1.0, 7, 5);
        for k in 0..7 {
            let fine = levels[k + 1].values();
            let offsets = (0..levels[k].segments())
                .map(|i| (fine[2 * i + 1] - 0.5 * (fine[2 * i] + fine[2 * i + 2])).abs())
                .fold(0.0, f64::max);
            let d = sup_distance(&levels[k], &levels[k + 1], 1.0).unwrap();
            assert!((d - offsets).abs() <= 1e-15 * (1.0 + d));
        }
    }

    #[test]
    fn refinement_distance_decreases_on_average() {
        let mut mean = [0.0; 5];
        for seed in 0..20 {
            let levels = sample_brownian_levels(1.0, 9, seed);
            for (j, n) in (1..=5).enumerate() {
                mean[j] += sup_distance(&levels[n], &levels[n + 4], 1.0).unwrap() / 20.0;
            }
        }
        assert!(mean.windows(2).all(|w| w[1] < w[0]), "{mean:?}");
    }

    #[test]
    fn increments_have_brownian_variance() {
        let p = sample_brownian(1.0, 14, 1);
        let v = p.values();
        let dt = 1.0 / (v.len() - 1) as f64;
        let qv: f64 = v.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
        // Quadratic variation of a Brownian path on [0, 1] concentrates at 1.
        assert!((qv - 1.0).abs() < 0.05, "{qv} (dt={dt})");
    }
}
