//! Report bundle: summaries, rolled series, unique counts and the
//! long-format export, all as plain data files.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::bootstrap::{sample_mean, BootstrapError, BootstrapSettings};
use super::observation::{export_long_format, LongFormatError, NoveltyObservation};
use super::period::{Period, PeriodBoundaries};
use super::rolling::{rolling_series, Window};
use super::unique::{histories_up_to, pooled_unique_count, ratio_from_counts, Cutoff};
use crate::collection::{slug, stream_seed};
use crate::metric::{MetricError, RoundSnapshot};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no observations to report on")]
    NoObservations,
    #[error(transparent)]
    Bootstrap(#[from] BootstrapError),
    #[error(transparent)]
    Export(#[from] LongFormatError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("replaying snapshots for unique counts: {0}")]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSettings {
    pub boundaries: PeriodBoundaries,
    pub window: Window,
    pub bootstrap: BootstrapSettings,
    /// Only rounds captured at or before this count toward unique items.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unique_cutoff: Option<DateTime<Utc>>,
}

/// In-memory report files keyed by relative path.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReportBundle {
    files: BTreeMap<String, Vec<u8>>,
}

impl ReportBundle {
    pub fn insert(&mut self, path: impl Into<String>, contents: Vec<u8>) {
        self.files.insert(path.into(), contents);
    }

    pub fn files(&self) -> &BTreeMap<String, Vec<u8>> {
        &self.files
    }

    pub fn get(&self, path: &str) -> Option<&[u8]> {
        self.files.get(path).map(Vec::as_slice)
    }

    /// Writes every file under `dir`, each through a temporary file renamed
    /// into place.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        for (relative, contents) in &self.files {
            let target = dir.join(relative);
            let parent = target.parent().unwrap_or(dir);
            std::fs::create_dir_all(parent)?;
            let name = target.file_name().and_then(|n| n.to_str()).unwrap_or("file");
            let temp = parent.join(format!(".{name}.tmp"));
            std::fs::write(&temp, contents)?;
            std::fs::rename(&temp, &target)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SummaryRow {
    engine: String,
    region: String,
    query: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    period: Option<Period>,
    n: usize,
    discarded: usize,
    mean: f64,
    ci_low: f64,
    ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct UniqueRow {
    engine: String,
    region: String,
    query: String,
    agents: usize,
    unique_items: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct RatioRow {
    engine: String,
    region: String,
    query_a: String,
    query_b: String,
    count_a: usize,
    count_b: usize,
    ratio: Option<f64>,
    ratio_2dp: Option<String>,
}

#[derive(Debug, Serialize)]
struct SummaryJson<'a> {
    settings: &'a ReportSettings,
    observations: usize,
    discarded: usize,
    by_term: &'a [SummaryRow],
    by_period: &'a [SummaryRow],
    #[serde(skip_serializing_if = "Option::is_none")]
    unique_items: Option<&'a [UniqueRow]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratios: Option<&'a [RatioRow]>,
}

type GroupKey = (String, String, String);

fn group_key(o: &NoveltyObservation) -> GroupKey {
    (o.engine.to_string(), o.region.to_string(), o.query_term.clone())
}

fn summarize(
    key: &GroupKey,
    period: Option<Period>,
    group: &[&NoveltyObservation],
    bootstrap: BootstrapSettings,
) -> Result<Option<SummaryRow>, ReportError> {
    let mut values: Vec<f64> = group.iter().filter_map(|o| o.novelty).collect();
    let discarded = group.len() - values.len();
    if values.is_empty() {
        return Ok(None);
    }
    values.sort_unstable_by(f64::total_cmp);
    let mean = sample_mean(&values).unwrap_or(f64::NAN);
    let (lo, hi) = bootstrap.ci(&values)?;
    Ok(Some(SummaryRow {
        engine: key.0.clone(),
        region: key.1.clone(),
        query: key.2.clone(),
        period,
        n: values.len(),
        discarded,
        mean,
        ci_low: lo.min(mean),
        ci_high: hi.max(mean),
    }))
}

fn to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> Result<Vec<u8>, ReportError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(!rows.is_empty())
        .from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| ReportError::Csv(e.into_error().into()))
}

/// Builds the full report. Periods are reassigned from `settings.boundaries`.
/// Unique-item sections are included only when `snapshots` is given.
pub fn build_report(
    observations: &[NoveltyObservation],
    snapshots: Option<&[RoundSnapshot]>,
    settings: &ReportSettings,
) -> Result<ReportBundle, ReportError> {
    if observations.is_empty() {
        return Err(ReportError::NoObservations);
    }
    let mut obs: Vec<NoveltyObservation> = observations.to_vec();
    for o in &mut obs {
        o.period = settings.boundaries.assign(o.captured_at);
    }
    obs.sort_by(|a, b| {
        (group_key(a), &a.agent_id, a.round_index, a.captured_at).cmp(&(
            group_key(b),
            &b.agent_id,
            b.round_index,
            b.captured_at,
        ))
    });

    let mut by_group: BTreeMap<GroupKey, Vec<&NoveltyObservation>> = BTreeMap::new();
    let mut by_period: BTreeMap<(GroupKey, Period), Vec<&NoveltyObservation>> = BTreeMap::new();
    for o in &obs {
        by_group.entry(group_key(o)).or_default().push(o);
        by_period.entry((group_key(o), o.period)).or_default().push(o);
    }

    let boot = settings.bootstrap;
    let mut term_rows = Vec::new();
    for (i, (key, group)) in by_group.iter().enumerate() {
        let seeded = boot.with_seed(stream_seed(boot.seed, i as u64));
        term_rows.extend(summarize(key, None, group, seeded)?);
    }
    let mut period_rows = Vec::new();
    for (i, ((key, period), group)) in by_period.iter().enumerate() {
        let seeded = boot.with_seed(stream_seed(boot.seed ^ 0x5045_5249_4f44, i as u64));
        period_rows.extend(summarize(key, Some(*period), group, seeded)?);
    }

    let mut bundle = ReportBundle::default();
    bundle.insert(
        "term_summary.csv",
        to_csv(
            &term_rows,
            &[
                "engine",
                "region",
                "query",
                "n",
                "discarded",
                "mean",
                "ci_low",
                "ci_high",
            ],
        )?,
    );
    bundle.insert(
        "period_summary.csv",
        to_csv(
            &period_rows,
            &[
                "engine",
                "region",
                "query",
                "period",
                "n",
                "discarded",
                "mean",
                "ci_low",
                "ci_high",
            ],
        )?,
    );

    for (i, (key, group)) in by_group.iter().enumerate() {
        let owned: Vec<NoveltyObservation> = group.iter().map(|o| (*o).clone()).collect();
        let seeded = boot.with_seed(stream_seed(boot.seed ^ 0x524f_4c4c, i as u64));
        let points = rolling_series(&owned, settings.window, seeded)?;
        let name = format!("rolling/{}__{}__{}.csv", slug(&key.0), slug(&key.1), slug(&key.2));
        bundle.insert(
            name,
            to_csv(&points, &["window_end", "mean", "ci_low", "ci_high", "n", "degenerate"])?,
        );
    }

    let mut unique_rows = None;
    let mut ratio_rows = None;
    if let Some(snapshots) = snapshots {
        let cutoff = settings.unique_cutoff.map_or(Cutoff::All, Cutoff::Time);
        let histories = histories_up_to(snapshots, cutoff)?;
        let uniques: Vec<UniqueRow> = histories
            .iter()
            .map(|(k, hs)| UniqueRow {
                engine: k.engine.to_string(),
                region: k.region.to_string(),
                query: k.query_term.clone(),
                agents: hs.len(),
                unique_items: pooled_unique_count(hs),
            })
            .collect();
        let mut ratios = Vec::new();
        for a in &uniques {
            for b in &uniques {
                if a.engine != b.engine || a.region != b.region || a.query >= b.query {
                    continue;
                }
                let ratio = ratio_from_counts(a.unique_items, b.unique_items).ok();
                ratios.push(RatioRow {
                    engine: a.engine.clone(),
                    region: a.region.clone(),
                    query_a: a.query.clone(),
                    query_b: b.query.clone(),
                    count_a: a.unique_items,
                    count_b: b.unique_items,
                    ratio: ratio.map(|r| r.ratio),
                    ratio_2dp: ratio.map(|r| r.to_string()),
                });
            }
        }
        bundle.insert(
            "unique_items.csv",
            to_csv(&uniques, &["engine", "region", "query", "agents", "unique_items"])?,
        );
        bundle.insert(
            "candidate_ratios.csv",
            to_csv(
                &ratios,
                &[
                    "engine",
                    "region",
                    "query_a",
                    "query_b",
                    "count_a",
                    "count_b",
                    "ratio",
                    "ratio_2dp",
                ],
            )?,
        );
        unique_rows = Some(uniques);
        ratio_rows = Some(ratios);
    }

    let mut long = Vec::new();
    export_long_format(&mut long, &obs)?;
    bundle.insert("long_format.csv", long);

    let summary = SummaryJson {
        settings,
        observations: obs.len(),
        discarded: obs.iter().filter(|o| o.is_discarded()).count(),
        by_term: &term_rows,
        by_period: &period_rows,
        unique_items: unique_rows.as_deref(),
        ratios: ratio_rows.as_deref(),
    };
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    bundle.insert("summary.json", json);
    Ok(bundle)
}
