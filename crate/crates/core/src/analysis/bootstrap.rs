//! Percentile bootstrap for the mean.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BootstrapError {
    #[error("cannot bootstrap an empty sample")]
    Empty,
    #[error("confidence level must be in (0, 1), got {0}")]
    Level(f64),
    #[error("need at least one resample")]
    NoResamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapSettings {
    pub level: f64,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        Self {
            level: 0.95,
            resamples: 1000,
            seed: 0,
        }
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Arithmetic mean. A constant sample returns its value exactly so that it
/// agrees with the collapsed interval.
pub fn sample_mean(values: &[f64]) -> Option<f64> {
    let first = *values.first()?;
    if values.iter().all(|v| *v == first) {
        return Some(first);
    }
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

/// Percentile confidence interval of the sample mean from `resamples`
/// with-replacement resamples. Deterministic for a given seed.
pub fn bootstrap_ci(values: &[f64], level: f64, resamples: usize, seed: u64) -> Result<(f64, f64), BootstrapError> {
    if values.is_empty() {
        return Err(BootstrapError::Empty);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(BootstrapError::Level(level));
    }
    if resamples == 0 {
        return Err(BootstrapError::NoResamples);
    }
    let first = values[0];
    if values.iter().all(|v| *v == first) {
        return Ok((first, first));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let mut sum = 0.0;
            for _ in 0..n {
                sum += values[rng.random_range(0..n)];
            }
            sum / n as f64
        })
        .collect();
    means.sort_unstable_by(f64::total_cmp);
    let alpha = 1.0 - level;
    Ok((quantile(&means, alpha / 2.0), quantile(&means, 1.0 - alpha / 2.0)))
}

impl BootstrapSettings {
    pub fn ci(&self, values: &[f64]) -> Result<(f64, f64), BootstrapError> {
        bootstrap_ci(values, self.level, self.resamples, self.seed)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn degenerate_samples() {
        assert_eq!(bootstrap_ci(&[0.3], 0.95, 1000, 1).unwrap(), (0.3, 0.3));
        assert_eq!(bootstrap_ci(&[0.2; 18], 0.95, 1000, 1).unwrap(), (0.2, 0.2));
        assert!(matches!(bootstrap_ci(&[], 0.95, 1000, 1), Err(BootstrapError::Empty)));
        assert!(matches!(
            bootstrap_ci(&[1.0], 1.0, 1000, 1),
            Err(BootstrapError::Level(_))
        ));
        assert!(matches!(
            bootstrap_ci(&[1.0], 0.9, 0, 1),
            Err(BootstrapError::NoResamples)
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let values: Vec<f64> = (0..30).map(|i| (i % 7) as f64 / 7.0).collect();
        assert_eq!(
            bootstrap_ci(&values, 0.95, 500, 9).unwrap(),
            bootstrap_ci(&values, 0.95, 500, 9).unwrap()
        );
    }

    #[test]
    fn brackets_the_mean_of_a_spread_sample() {
        let values: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let (lo, hi) = bootstrap_ci(&values, 0.95, 2000, 3).unwrap();
        assert!(lo < 49.5 && 49.5 < hi);
        // standard error is about 2.9, so the interval is roughly +-5.7
        assert!(hi - lo > 8.0 && hi - lo < 15.0, "{lo} {hi}");
    }

    #[test]
    fn quantile_interpolates() {
        let s = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(quantile(&s, 0.0), 0.0);
        assert_eq!(quantile(&s, 1.0), 3.0);
        assert!((quantile(&s, 0.5) - 1.5).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn bounds_within_sample_range(values in proptest::collection::vec(0.0f64..1.0, 1..40), seed in any::<u64>()) {
            let (lo, hi) = bootstrap_ci(&values, 0.95, 200, seed).unwrap();
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= hi);
            prop_assert!(lo >= min - 1e-12 && hi <= max + 1e-12);
        }
    }
}
