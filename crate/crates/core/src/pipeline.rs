//! Scoring whole snapshot streams.

use crate::analysis::{NoveltyObservation, PeriodBoundaries};
use crate::ingest::SnapshotStream;
use crate::metric::{AgentTermHistory, MetricError, NoveltyResult, RoundSnapshot};

/// Per-round results of one stream, `None` for missing rounds, plus the
/// final history.
pub fn score_stream(
    snapshots: &[RoundSnapshot],
) -> Result<(Vec<Option<NoveltyResult>>, Option<AgentTermHistory>), MetricError> {
    let Some(first) = snapshots.first() else {
        return Ok((Vec::new(), None));
    };
    let mut history = AgentTermHistory::for_snapshot(first);
    let results = snapshots
        .iter()
        .map(|s| history.observe(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((results, Some(history)))
}

/// One observation per non-missing round of every stream, in stream order.
pub fn observe_streams(
    streams: &[SnapshotStream],
    boundaries: &PeriodBoundaries,
) -> Result<Vec<NoveltyObservation>, MetricError> {
    let mut out = Vec::new();
    for stream in streams {
        let (results, _) = score_stream(&stream.snapshots)?;
        for (snapshot, result) in stream.snapshots.iter().zip(results) {
            if let Some(result) = result {
                out.push(NoveltyObservation::from_round(snapshot, result, boundaries));
            }
        }
    }
    Ok(out)
}
