use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::thread;

use chrono::{DateTime, TimeDelta, Utc};
use serde::Serialize;
use thiserror::Error;

use super::fetch::{FetchRequest, Fetcher};
use super::plan::{FireEvent, SchedulePlan};
use crate::ingest::{parse_serp, write_snapshot, ProfileSet, RejectedItem};
use crate::metric::{RoundSnapshot, RoundStatus, SnapshotMeta, DEFAULT_EXPECTED_COUNT};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("no engine profile for engine {0:?}")]
    NoProfile(String),
    #[error("writing snapshot log {path} failed ({source}); partial log left at {partial}")]
    LogWrite {
        path: String,
        partial: String,
        #[source]
        source: std::io::Error,
    },
}

pub trait Clock: Sync {
    fn now(&self) -> DateTime<Utc>;
    fn wait_until(&self, at: DateTime<Utc>);
}

/// Wall clock; waits by sleeping.
#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }

    fn wait_until(&self, at: DateTime<Utc>) {
        if let Ok(delay) = (at - Utc::now()).to_std() {
            thread::sleep(delay);
        }
    }
}

/// Clock that jumps straight to each fire time. Used for replays.
#[derive(Debug)]
pub struct VirtualClock {
    now: Mutex<DateTime<Utc>>,
}

impl VirtualClock {
    pub fn starting_at(at: DateTime<Utc>) -> Self {
        Self { now: Mutex::new(at) }
    }
}

impl Clock for VirtualClock {
    fn now(&self) -> DateTime<Utc> {
        *self.now.lock().expect("clock lock")
    }

    fn wait_until(&self, at: DateTime<Utc>) {
        let mut now = self.now.lock().expect("clock lock");
        if at > *now {
            *now = at;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PageReject {
    pub agent_id: String,
    pub query_term: String,
    pub round_index: u64,
    #[serde(flatten)]
    pub item: RejectedItem,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CollectionSummary {
    pub fired: usize,
    pub complete: usize,
    pub incomplete: usize,
    pub missing: usize,
    pub warnings: Vec<String>,
    pub rejected_items: Vec<PageReject>,
    pub max_drift: TimeDelta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollectionOptions {
    pub expected_count: u32,
}

impl Default for CollectionOptions {
    fn default() -> Self {
        Self {
            expected_count: DEFAULT_EXPECTED_COUNT,
        }
    }
}

fn partial_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    out.with_file_name(name)
}

struct Outcome {
    snapshot: RoundSnapshot,
    warning: Option<String>,
    rejected: Vec<RejectedItem>,
}

/// Fires every search of `plan` on schedule and appends one record per
/// search to the snapshot log at `out`.
///
/// Searches due at the same instant run concurrently; their records are
/// appended in timetable order, so a replay produces the same log every run.
/// Failed fetches and unparseable pages become missing rounds with a
/// warning. The log is written to `<out>.partial` and renamed on success; a
/// write failure aborts and leaves the partial file behind.
pub fn run_collection(
    plan: &SchedulePlan,
    fetcher: &dyn Fetcher,
    profiles: &ProfileSet,
    clock: &dyn Clock,
    out: &Path,
    options: CollectionOptions,
) -> Result<CollectionSummary, RunError> {
    for agent in &plan.agents {
        if profiles.get(&agent.engine).is_none() {
            return Err(RunError::NoProfile(agent.engine.to_string()));
        }
    }
    let partial = partial_path(out);
    let write_err = |source| RunError::LogWrite {
        path: out.display().to_string(),
        partial: partial.display().to_string(),
        source,
    };
    let mut writer = BufWriter::new(File::create(&partial).map_err(write_err)?);
    let mut summary = CollectionSummary::default();

    let timetable = plan.timetable();
    for batch in timetable.chunk_by(|a, b| a.at == b.at) {
        let at = batch[0].at;
        clock.wait_until(at);
        let drift = clock.now() - at;
        if drift > summary.max_drift {
            summary.max_drift = drift;
        }

        let outcomes: Vec<Outcome> = thread::scope(|scope| {
            let handles: Vec<_> = batch
                .iter()
                .map(|event| scope.spawn(move || fire(plan, event, fetcher, profiles, clock, options)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("fetch worker panicked"))
                .collect()
        });

        for outcome in outcomes {
            summary.fired += 1;
            match outcome.snapshot.status {
                RoundStatus::Complete => summary.complete += 1,
                RoundStatus::Incomplete => summary.incomplete += 1,
                RoundStatus::Missing => summary.missing += 1,
            }
            summary.warnings.extend(outcome.warning);
            let meta = &outcome.snapshot.meta;
            summary
                .rejected_items
                .extend(outcome.rejected.into_iter().map(|item| PageReject {
                    agent_id: meta.agent_id.clone(),
                    query_term: meta.query_term.clone(),
                    round_index: meta.round_index,
                    item,
                }));
            write_snapshot(&mut writer, &outcome.snapshot).map_err(write_err)?;
        }
        writer.flush().map_err(write_err)?;
    }

    writer.flush().map_err(write_err)?;
    drop(writer);
    std::fs::rename(&partial, out).map_err(write_err)?;
    Ok(summary)
}

fn fire(
    plan: &SchedulePlan,
    event: &FireEvent,
    fetcher: &dyn Fetcher,
    profiles: &ProfileSet,
    clock: &dyn Clock,
    options: CollectionOptions,
) -> Outcome {
    let agent = &plan.agents[event.agent_index];
    fetcher.clean_state(&agent.id);
    let meta = SnapshotMeta {
        agent_id: agent.id.clone(),
        engine: agent.engine.clone(),
        region: agent.region.clone(),
        browser: agent.browser.clone(),
        category: Some(agent.category.clone()),
        query_term: event.query_term.clone(),
        round_index: event.round_index,
        captured_at: clock.now(),
    };
    let request = FetchRequest {
        agent_id: &agent.id,
        engine: &agent.engine,
        region_hint: &agent.region,
        browser: &agent.browser,
        query_term: &event.query_term,
        round_index: event.round_index,
        scheduled_at: event.at,
    };
    let coords = format!("{}/{}/round {}", agent.id, event.query_term, event.round_index);
    let missing = |meta: SnapshotMeta, warning: String| Outcome {
        snapshot: RoundSnapshot::missing(meta, options.expected_count),
        warning: Some(warning),
        rejected: Vec::new(),
    };

    let html = match fetcher.fetch(&request) {
        Ok(html) => html,
        Err(err) => return missing(meta, format!("{coords}: fetch failed: {err}")),
    };
    let profile = profiles.get(&agent.engine).expect("profiles checked before the run");
    match parse_serp(&html, profile, meta.clone(), options.expected_count) {
        Ok(page) => Outcome {
            snapshot: page.snapshot,
            warning: None,
            rejected: page.rejected,
        },
        Err(err) => missing(meta, format!("{coords}: parse failed: {err}")),
    }
}
