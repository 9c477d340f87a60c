//! Novelty observations and their long-format CSV form.

use std::io::{Read, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::period::{Period, PeriodBoundaries};
use crate::metric::{Browser, Engine, NoveltyResult, Region, RoundSnapshot};

/// One round's novelty with its full experimental coordinates. `novelty` is
/// `None` for a discarded round.
#[derive(Debug, Clone, PartialEq)]
pub struct NoveltyObservation {
    pub region: Region,
    pub engine: Engine,
    pub browser: Browser,
    pub query_term: String,
    pub category: Option<String>,
    pub agent_id: String,
    pub round_index: u64,
    pub captured_at: DateTime<Utc>,
    pub period: Period,
    pub novelty: Option<f64>,
}

impl NoveltyObservation {
    pub fn from_round(snapshot: &RoundSnapshot, result: NoveltyResult, boundaries: &PeriodBoundaries) -> Self {
        let meta = &snapshot.meta;
        Self {
            region: meta.region.clone(),
            engine: meta.engine.clone(),
            browser: meta.browser.clone(),
            query_term: meta.query_term.clone(),
            category: meta.category.clone(),
            agent_id: meta.agent_id.clone(),
            round_index: meta.round_index,
            captured_at: meta.captured_at,
            period: boundaries.assign(meta.captured_at),
            novelty: result.value(),
        }
    }

    pub fn is_discarded(&self) -> bool {
        self.novelty.is_none()
    }
}

pub const LONG_FORMAT_COLUMNS: [&str; 11] = [
    "region",
    "engine",
    "browser",
    "query",
    "category",
    "period",
    "round",
    "agent",
    "novelty",
    "discarded",
    "captured_at",
];

#[derive(Debug, Serialize, Deserialize)]
struct LongRow {
    region: String,
    engine: String,
    browser: String,
    query: String,
    category: Option<String>,
    period: String,
    round: u64,
    agent: String,
    novelty: Option<f64>,
    discarded: bool,
    captured_at: DateTime<Utc>,
}

#[derive(Debug, Error)]
pub enum LongFormatError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error("header must be {expected:?}, found {found:?}")]
    Header { expected: String, found: String },
}

/// Writes one row per observation under a fixed header (RFC 4180 quoting).
pub fn export_long_format<W: Write>(writer: W, observations: &[NoveltyObservation]) -> Result<(), LongFormatError> {
    let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    csv.write_record(LONG_FORMAT_COLUMNS)?;
    for obs in observations {
        csv.serialize(LongRow {
            region: obs.region.to_string(),
            engine: obs.engine.to_string(),
            browser: obs.browser.to_string(),
            query: obs.query_term.clone(),
            category: obs.category.clone(),
            period: obs.period.to_string(),
            round: obs.round_index,
            agent: obs.agent_id.clone(),
            novelty: obs.novelty,
            discarded: obs.is_discarded(),
            captured_at: obs.captured_at,
        })?;
    }
    csv.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn import_long_format<R: Read>(reader: R) -> Result<Vec<NoveltyObservation>, LongFormatError> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = csv.headers()?.clone();
    if header.iter().ne(LONG_FORMAT_COLUMNS) {
        return Err(LongFormatError::Header {
            expected: LONG_FORMAT_COLUMNS.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut out = Vec::new();
    for (i, row) in csv.deserialize::<LongRow>().enumerate() {
        let row_no = i + 2;
        let row = row?;
        let bad = |reason: &str| LongFormatError::Row {
            row: row_no,
            reason: reason.to_string(),
        };
        if row.discarded != row.novelty.is_none() {
            return Err(bad("discarded flag disagrees with novelty field"));
        }
        if let Some(v) = row.novelty {
            if !(0.0..=1.0).contains(&v) {
                return Err(bad("novelty outside [0, 1]"));
            }
        }
        let period: Period = row
            .period
            .parse()
            .map_err(|e: super::period::UnknownPeriod| bad(&e.to_string()))?;
        out.push(NoveltyObservation {
            region: Region::from(row.region),
            engine: Engine::from(row.engine),
            browser: Browser::from(row.browser),
            query_term: row.query,
            category: row.category.filter(|c| !c.is_empty()),
            agent_id: row.agent,
            round_index: row.round,
            captured_at: row.captured_at,
            period,
            novelty: row.novelty,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn obs(round: u64, novelty: Option<f64>) -> NoveltyObservation {
        NoveltyObservation {
            region: Region::Oregon,
            engine: Engine::Bing,
            browser: Browser::Chrome,
            query_term: "donald trump".into(),
            category: Some("us".into()),
            agent_id: "a,1".into(),
            round_index: round,
            captured_at: Utc.with_ymd_and_hms(2020, 11, 3, 12, 31, 0).unwrap(),
            period: Period::I,
            novelty,
        }
    }

    #[test]
    fn empty_is_header_only() {
        let mut buf = Vec::new();
        export_long_format(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "region,engine,browser,query,category,period,round,agent,novelty,discarded,captured_at\n"
        );
    }

    #[test]
    fn discarded_rows_have_empty_novelty_and_quoting() {
        let mut buf = Vec::new();
        export_long_format(&mut buf, &[obs(3, None), obs(4, Some(0.125))]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[1],
            "oregon,bing,chrome,donald trump,us,I,3,\"a,1\",,true,2020-11-03T12:31:00Z"
        );
        assert_eq!(
            lines[2],
            "oregon,bing,chrome,donald trump,us,I,4,\"a,1\",0.125,false,2020-11-03T12:31:00Z"
        );
    }

    #[test]
    fn bad_rows_rejected() {
        let text = "region,engine,browser,query,category,period,round,agent,novelty,discarded,captured_at\n\
                    oregon,bing,chrome,q,,I,1,a,0.5,true,2020-11-03T12:31:00Z\n";
        assert!(matches!(
            import_long_format(text.as_bytes()),
            Err(LongFormatError::Row { row: 2, .. })
        ));
        let text = "region,engine\noregon,bing\n";
        assert!(matches!(
            import_long_format(text.as_bytes()),
            Err(LongFormatError::Header { .. })
        ));
    }

    proptest! {
        #[test]
        fn export_import_round_trip(values in proptest::collection::vec(proptest::option::of(0.0f64..=1.0), 0..30)) {
            let observations: Vec<_> = values.iter().enumerate().map(|(i, v)| obs(i as u64, *v)).collect();
            let mut buf = Vec::new();
            export_long_format(&mut buf, &observations).unwrap();
            let back = import_long_format(buf.as_slice()).unwrap();
            prop_assert_eq!(back, observations);
        }
    }
}
