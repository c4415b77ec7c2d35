//! Random streams and distribution helpers.
//!
//! Every simulator draws from `ChaCha8Rng` seeded with a 64-bit seed, so a
//! given `(params, T, seed)` reproduces the same output on any platform.
//! Sub-streams for Monte Carlo runs are derived with the SplitMix64 finaliser.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::gamma_ur;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `(sweep_index, seed_index)` under `master`.
pub fn derive_seed(master: u64, sweep_index: u64, seed_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ sweep_index.wrapping_mul(GOLDEN)) ^ seed_index)
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

pub fn normal_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

pub fn normal_sf(x: f64) -> f64 {
    std_normal().sf(x)
}

/// Standard normal quantile; `±∞` at the endpoints.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        std_normal().inverse_cdf(p)
    }
}

/// Upper tail `P(χ²_dof > x)` through the regularised upper incomplete gamma.
pub fn chi_squared_sf(x: f64, dof: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if !x.is_finite() {
        return 0.0;
    }
    gamma_ur(dof as f64 / 2.0, x / 2.0).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<u64> = (0..5)
            .map({
                let mut r = rng_from_seed(7);
                move |_| r.random()
            })
            .collect();
        let b: Vec<u64> = (0..5)
            .map({
                let mut r = rng_from_seed(7);
                move |_| r.random()
            })
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..10)
            .flat_map(|i| (0..10).map(move |j| derive_seed(1, i, j)))
            .collect();
        assert_eq!(s.len(), 100);
        assert_eq!(derive_seed(3, 4, 5), derive_seed(3, 4, 5));
    }

    #[test]
    fn chi_squared_tail_known_values() {
        // 95% quantiles of chi-squared with 1 and 2 dof
        assert!((chi_squared_sf(3.841458820694124, 1) - 0.05).abs() < 1e-10);
        assert!((chi_squared_sf(5.991464547107979, 2) - 0.05).abs() < 1e-10);
        // dof 2 has a closed form exp(-x/2)
        for x in [0.1, 1.0, 7.5, 30.0] {
            let exact = (-x / 2.0f64).exp();
            assert!(((chi_squared_sf(x, 2) - exact) / exact).abs() < 1e-10);
        }
        assert_eq!(chi_squared_sf(0.0, 3), 1.0);
    }

    #[test]
    fn normal_quantile_inverts_cdf() {
        for p in [1e-6, 0.001, 0.05, 0.3, 0.5, 0.9, 0.999] {
            assert!((normal_cdf(normal_quantile(p)) - p).abs() < 1e-9 * p.max(1e-3));
        }
        assert!((normal_quantile(0.05) + 1.6448536269514722).abs() < 1e-9);
    }
}
