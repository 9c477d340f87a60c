//! Turning raw captures into validated snapshot streams.

pub mod archive;
mod log;
mod normalize;
mod profile;
mod serp;

pub use archive::{Archive, ArchiveEntry, ArchiveError};
pub use log::{
    read_snapshots, write_rejects, write_snapshot, write_snapshots, LogError, RejectedRecord, SnapshotLog,
    SnapshotRecord, SnapshotStream, SCHEMA_VERSION,
};
pub use normalize::{normalize_title, normalize_url, NormalizeError};
pub use profile::{EngineProfile, ExtractionRule, ProfileError, ProfileSet};
pub use serp::{parse_serp, ParseError, ParsedPage, RejectedItem};
