use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use super::bootstrap::{sample_mean, BootstrapError, BootstrapSettings};
use super::observation::NoveltyObservation;
use crate::collection::stream_seed;

/// Which past observations feed each rolled point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "size")]
pub enum Window {
    /// The `n` most recent scored observations, including the current one.
    Count(usize),
    /// Observations captured within the given number of minutes up to and
    /// including the current one.
    Minutes(i64),
}

impl Default for Window {
    fn default() -> Self {
        Window::Count(18)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RolledPoint {
    pub window_end: DateTime<Utc>,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    /// Fewer than two observations; the interval collapses to the mean.
    pub degenerate: bool,
}

/// Rolling mean and bootstrap interval at every scored observation of one
/// group. Discarded observations are skipped. Input need not be sorted.
///
/// Window values are sorted before aggregation, so a point depends only on
/// the multiset of values in its window.
pub fn rolling_series(
    observations: &[NoveltyObservation],
    window: Window,
    bootstrap: BootstrapSettings,
) -> Result<Vec<RolledPoint>, BootstrapError> {
    let mut scored: Vec<(DateTime<Utc>, f64)> = observations
        .iter()
        .filter_map(|o| o.novelty.map(|v| (o.captured_at, v)))
        .collect();
    scored.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut points = Vec::with_capacity(scored.len());
    let mut start = 0usize;
    for end in 0..scored.len() {
        let window_end = scored[end].0;
        match window {
            Window::Count(n) => start = (end + 1).saturating_sub(n.max(1)),
            Window::Minutes(minutes) => {
                let horizon = window_end - TimeDelta::minutes(minutes);
                while scored[start].0 <= horizon {
                    start += 1;
                }
            }
        }
        let mut values: Vec<f64> = scored[start..=end].iter().map(|(_, v)| *v).collect();
        values.sort_unstable_by(f64::total_cmp);
        let mean = sample_mean(&values).unwrap_or(f64::NAN);
        let degenerate = values.len() < 2;
        let (ci_low, ci_high) = if degenerate {
            (mean, mean)
        } else {
            let settings = bootstrap.with_seed(stream_seed(bootstrap.seed, end as u64));
            let (lo, hi) = settings.ci(&values)?;
            (lo.min(mean), hi.max(mean))
        };
        points.push(RolledPoint {
            window_end,
            mean,
            ci_low,
            ci_high,
            n: values.len(),
            degenerate,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::period::Period;
    use crate::metric::{Browser, Engine, Region};
    use chrono::TimeZone;

    fn series(values: &[Option<f64>]) -> Vec<NoveltyObservation> {
        let start = Utc.with_ymd_and_hms(2020, 11, 3, 12, 31, 0).unwrap();
        values
            .iter()
            .enumerate()
            .map(|(i, v)| NoveltyObservation {
                region: Region::Oregon,
                engine: Engine::Google,
                browser: Browser::Chrome,
                query_term: "joe biden".into(),
                category: None,
                agent_id: "a".into(),
                round_index: i as u64,
                captured_at: start + TimeDelta::minutes(21 * i as i64),
                period: Period::I,
                novelty: *v,
            })
            .collect()
    }

    #[test]
    fn constant_series_collapses() {
        let obs = series(&[Some(0.2); 30]);
        let points = rolling_series(&obs, Window::Count(18), BootstrapSettings::default()).unwrap();
        assert_eq!(points.len(), 30);
        let last = points.last().unwrap();
        assert_eq!(last.n, 18);
        assert!((last.mean - 0.2).abs() < 1e-12);
        assert_eq!((last.ci_low, last.ci_high), (last.mean, last.mean));
        assert!(points[0].degenerate);
        assert!(!points[1].degenerate);
    }

    #[test]
    fn alternating_series_averages_half() {
        let values: Vec<Option<f64>> = (0..36).map(|i| Some((i % 2) as f64)).collect();
        let points = rolling_series(&series(&values), Window::Count(18), BootstrapSettings::default()).unwrap();
        for p in &points[17..] {
            assert!((p.mean - 0.5).abs() < 1e-12);
            assert!(p.ci_low <= p.mean && p.mean <= p.ci_high);
        }
    }

    #[test]
    fn discarded_rounds_skipped() {
        let obs = series(&[Some(0.1), None, Some(0.3), None]);
        let points = rolling_series(&obs, Window::Count(18), BootstrapSettings::default()).unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[1].n, 2);
        assert!((points[1].mean - 0.2).abs() < 1e-12);
    }

    #[test]
    fn duration_window() {
        let values: Vec<Option<f64>> = (0..40).map(|i| Some(i as f64 / 40.0)).collect();
        let points = rolling_series(&series(&values), Window::Minutes(360), BootstrapSettings::default()).unwrap();
        // 360 / 21 = 17.1, so 18 rounds fit in (t - 6h, t]
        assert_eq!(points.last().unwrap().n, 18);
        assert_eq!(points[5].n, 6);
    }

    #[test]
    fn permutation_within_window_is_invisible() {
        let a = series(&[Some(0.1), Some(0.7), Some(0.3), Some(0.9)]);
        let mut b = a.clone();
        // same timestamps, values swapped between two observations
        let (x, y) = (b[1].novelty, b[2].novelty);
        b[1].novelty = y;
        b[2].novelty = x;
        let pa = rolling_series(&a, Window::Count(18), BootstrapSettings::default()).unwrap();
        let pb = rolling_series(&b, Window::Count(18), BootstrapSettings::default()).unwrap();
        assert_eq!(pa.last(), pb.last());
    }
}
