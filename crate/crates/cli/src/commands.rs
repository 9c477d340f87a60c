use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serp_audit::analysis::{build_report, export_long_format, import_long_format};
use serp_audit::collection::{build_plan, simulate, FireEvent, SchedulePlan};
use serp_audit::ingest::{
    parse_serp, read_snapshots, write_rejects, write_snapshots, Archive, ParseError, ProfileSet, SnapshotLog,
};
use serp_audit::pipeline::observe_streams;
use serp_audit::{RoundSnapshot, RoundStatus};

use crate::config::{NoveltyRun, ParseRun, PlanRun, ReportRun, SimulateRun};
use crate::error::{warn, CliError};

pub const RUN_CONFIG_FILE: &str = "run_config.json";

/// Writes through a temporary sibling renamed into place.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::write_at(path, e))?;
    }
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    let temp = path.with_file_name(name);
    std::fs::write(&temp, contents).map_err(|e| CliError::write_at(path, e))?;
    std::fs::rename(&temp, path).map_err(|e| CliError::write_at(path, e))
}

fn sidecar(output: &Path, suffix: &str) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    output.with_file_name(name)
}

/// `x.snapshots.jsonl` -> `x.rejects.jsonl`; anything else gets a suffix.
pub fn rejects_path(output: &Path) -> PathBuf {
    let name = output.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    match name.strip_suffix(".snapshots.jsonl") {
        Some(stem) => output.with_file_name(format!("{stem}.rejects.jsonl")),
        None => sidecar(output, ".rejects.jsonl"),
    }
}

fn open_log(path: &Path) -> Result<SnapshotLog, CliError> {
    let file = File::open(path).map_err(|e| CliError::data_at(path, e))?;
    read_snapshots(BufReader::new(file)).map_err(|e| CliError::data_at(path, e))
}

fn report_log_rejects(path: &Path, log: &SnapshotLog) {
    for reject in &log.rejects {
        warn(
            "reject",
            &format!("{} line {}: {}", path.display(), reject.line, reject.reason),
        );
    }
}

#[derive(Serialize)]
struct PageReject<'a> {
    agent_id: &'a str,
    engine: String,
    query_term: &'a str,
    round_index: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    position: Option<u32>,
    reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    raw_url: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    raw_title: Option<String>,
}

fn parse_archive(run: &ParseRun, rejects: &mut Vec<u8>) -> Result<Vec<RoundSnapshot>, CliError> {
    let path = run
        .profiles
        .as_deref()
        .ok_or_else(|| CliError::Usage("parsing an archive needs --profiles".into()))?;
    let profiles = ProfileSet::load(path).map_err(|e| CliError::Config(e.to_string()))?;
    let archive = Archive::open(&run.input).map_err(|e| CliError::Data(e.to_string()))?;

    let mut snapshots = Vec::with_capacity(archive.entries().len());
    for entry in archive.entries() {
        let coords = format!("{}/{}/round {}", entry.agent_id, entry.query_term, entry.round_index);
        let profile = profiles.get(&entry.engine).ok_or_else(|| {
            CliError::Data(format!(
                "no engine profile for engine {:?} ({coords})",
                entry.engine.label()
            ))
        })?;
        let expected_count = entry.expected_count_or(run.expected_count);
        let mut reject = |position: Option<u32>, reason: String, raw_url, raw_title| {
            let line = PageReject {
                agent_id: &entry.agent_id,
                engine: entry.engine.to_string(),
                query_term: &entry.query_term,
                round_index: entry.round_index,
                file: entry.file.as_deref(),
                position,
                reason,
                raw_url,
                raw_title,
            };
            serde_json::to_writer(&mut *rejects, &line).expect("reject serializes");
            rejects.push(b'\n');
        };

        let html = match archive.read_page(entry) {
            Ok(Some(html)) => html,
            Ok(None) => {
                snapshots.push(RoundSnapshot::missing(entry.meta(), expected_count));
                continue;
            }
            Err(err) => {
                warn("page", &format!("{coords}: {err}"));
                reject(None, err.to_string(), None, None);
                snapshots.push(RoundSnapshot::missing(entry.meta(), expected_count));
                continue;
            }
        };
        match parse_serp(&html, profile, entry.meta(), expected_count) {
            Ok(page) => {
                for item in page.rejected {
                    reject(Some(item.position), item.reason, item.raw_url, item.raw_title);
                }
                snapshots.push(page.snapshot);
            }
            Err(ParseError::Profile(err)) => return Err(CliError::Config(err.to_string())),
            Err(err) => {
                warn("page", &format!("{coords}: {err}"));
                reject(None, err.to_string(), None, None);
                snapshots.push(RoundSnapshot::missing(entry.meta(), expected_count));
            }
        }
    }
    Ok(snapshots)
}

pub fn parse(run: ParseRun) -> Result<(), CliError> {
    let mut rejects = Vec::new();
    let log = if run.input.is_dir() {
        let snapshots = parse_archive(&run, &mut rejects)?;
        // round-trip through the reader for canonical order and gap filling
        let mut raw = Vec::new();
        write_snapshots(&mut raw, &snapshots).map_err(|e| CliError::Data(e.to_string()))?;
        read_snapshots(raw.as_slice()).map_err(|e| CliError::Data(e.to_string()))?
    } else {
        open_log(&run.input)?
    };
    report_log_rejects(&run.input, &log);
    write_rejects(&mut rejects, &log.rejects).map_err(|e| CliError::Data(e.to_string()))?;

    let mut out = Vec::new();
    write_snapshots(&mut out, log.snapshots()).map_err(|e| CliError::Data(e.to_string()))?;
    write_atomic(&run.output, &out)?;
    write_atomic(&rejects_path(&run.output), &rejects)?;
    write_atomic(&sidecar(&run.output, ".run_config.json"), &run.effective.to_json())?;

    let count = |status| log.snapshots().filter(|s| s.status == status).count();
    println!(
        "rounds={} items={} complete={} incomplete={} missing={} rejected={}",
        log.snapshots().count(),
        log.snapshots().map(|s| s.items.len()).sum::<usize>(),
        count(RoundStatus::Complete),
        count(RoundStatus::Incomplete),
        count(RoundStatus::Missing),
        rejects.iter().filter(|b| **b == b'\n').count(),
    );
    Ok(())
}

fn rescore(snapshot: &RoundSnapshot, expected_count: u32) -> Result<RoundSnapshot, CliError> {
    if snapshot.expected_count == expected_count {
        return Ok(snapshot.clone());
    }
    if snapshot.is_missing() {
        return Ok(RoundSnapshot::missing(snapshot.meta.clone(), expected_count));
    }
    RoundSnapshot::from_items(snapshot.meta.clone(), expected_count, snapshot.items.clone())
        .map_err(|e| CliError::Data(e.to_string()))
}

pub fn novelty(run: NoveltyRun) -> Result<(), CliError> {
    let mut log = open_log(&run.input)?;
    report_log_rejects(&run.input, &log);
    if let Some(n) = run.expected_count {
        for stream in &mut log.streams {
            stream.snapshots = stream
                .snapshots
                .iter()
                .map(|s| rescore(s, n))
                .collect::<Result<_, _>>()?;
        }
    }
    let observations = observe_streams(&log.streams, &run.boundaries).map_err(|e| CliError::data_at(&run.input, e))?;
    let mut out = Vec::new();
    export_long_format(&mut out, &observations).map_err(|e| CliError::Data(e.to_string()))?;
    write_atomic(&run.output, &out)?;
    write_atomic(&sidecar(&run.output, ".run_config.json"), &run.effective.to_json())?;

    let discarded = observations.iter().filter(|o| o.is_discarded()).count();
    println!(
        "streams={} observations={} scored={} discarded={} quarantined={}",
        log.streams.len(),
        observations.len(),
        observations.len() - discarded,
        discarded,
        log.rejects.len()
    );
    Ok(())
}

pub fn report(run: ReportRun) -> Result<(), CliError> {
    let file = File::open(&run.input).map_err(|e| CliError::data_at(&run.input, e))?;
    let observations = import_long_format(BufReader::new(file)).map_err(|e| CliError::data_at(&run.input, e))?;
    if observations.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no observations, nothing to report",
            run.input.display()
        )));
    }
    let snapshots: Option<Vec<RoundSnapshot>> = match &run.snapshots {
        Some(path) => {
            let log = open_log(path)?;
            report_log_rejects(path, &log);
            Some(log.snapshots().cloned().collect())
        }
        None => None,
    };
    let mut bundle = build_report(&observations, snapshots.as_deref(), &run.settings)
        .map_err(|e| CliError::data_at(&run.input, e))?;
    bundle.insert(RUN_CONFIG_FILE, run.effective.to_json());
    bundle
        .write_to(&run.output)
        .map_err(|e| CliError::write_at(&run.output, e))?;
    println!(
        "observations={} files={} out={}",
        observations.len(),
        bundle.files().len(),
        run.output.display()
    );
    Ok(())
}

pub fn simulate_cmd(run: SimulateRun) -> Result<(), CliError> {
    let (mut snapshots, mut ledger) =
        simulate(&run.simulation, run.seed, run.rounds).map_err(|e| CliError::Config(e.to_string()))?;
    // the reader's stream order, so `parse` passes the log through unchanged
    snapshots.sort_by(|a, b| {
        (&a.meta.agent_id, &a.meta.query_term, a.meta.round_index).cmp(&(
            &b.meta.agent_id,
            &b.meta.query_term,
            b.meta.round_index,
        ))
    });
    ledger
        .rounds
        .sort_by(|a, b| (&a.agent_id, &a.query_term, a.round_index).cmp(&(&b.agent_id, &b.query_term, b.round_index)));

    let mut log = Vec::new();
    write_snapshots(&mut log, &snapshots).map_err(|e| CliError::Data(e.to_string()))?;
    let mut truth = Vec::new();
    for round in &ledger.rounds {
        serde_json::to_writer(&mut truth, round).expect("ledger serializes");
        truth.push(b'\n');
    }
    write_atomic(&run.output.join("synthetic.snapshots.jsonl"), &log)?;
    write_atomic(&run.output.join("ledger.jsonl"), &truth)?;
    write_atomic(&run.output.join(RUN_CONFIG_FILE), &run.effective.to_json())?;
    println!(
        "streams={} rounds={} snapshots={} seed={} out={}",
        run.simulation.streams.len(),
        run.rounds,
        snapshots.len(),
        run.seed,
        run.output.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct TimetableRow<'a> {
    at: String,
    round_index: u64,
    agent_id: &'a str,
    engine: String,
    region: String,
    browser: String,
    category: &'a str,
    term_index: usize,
    query_term: &'a str,
}

fn timetable_rows<'a>(plan: &'a SchedulePlan, events: &'a [FireEvent]) -> impl Iterator<Item = TimetableRow<'a>> {
    events.iter().map(move |e| {
        let agent = &plan.agents[e.agent_index];
        TimetableRow {
            at: e.at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            round_index: e.round_index,
            agent_id: &agent.id,
            engine: agent.engine.to_string(),
            region: agent.region.to_string(),
            browser: agent.browser.to_string(),
            category: &agent.category,
            term_index: e.term_index,
            query_term: &e.query_term,
        }
    })
}

pub fn plan(run: PlanRun) -> Result<(), CliError> {
    let plan = build_plan(&run.plan).map_err(|e| CliError::Config(e.to_string()))?;
    let extension = match &run.plan.extension {
        Some(ext) => Some(
            plan.extend_until(ext.stop_at, &ext.categories)
                .map_err(|e| CliError::Config(e.to_string()))?,
        ),
        None => None,
    };

    let mut writer = csv::Writer::from_writer(Vec::new());
    let events = plan.timetable();
    let mut total = events.len();
    for row in timetable_rows(&plan, &events) {
        writer.serialize(row).map_err(|e| CliError::Data(e.to_string()))?;
    }
    if let Some(ext) = &extension {
        let events = ext.plan.timetable();
        total += events.len();
        for row in timetable_rows(&ext.plan, &events) {
            writer.serialize(row).map_err(|e| CliError::Data(e.to_string()))?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    write_atomic(&run.output, &bytes)?;
    write_atomic(&sidecar(&run.output, ".run_config.json"), &run.effective.to_json())?;
    println!(
        "rounds={} extension_rounds={} agents={} events={}",
        plan.round_count(),
        extension.as_ref().map_or(0, |e| e.additional_rounds),
        plan.agents.len(),
        total
    );
    Ok(())
}
