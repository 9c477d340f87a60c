//! Producing snapshot streams: schedules, fetchers, replay and synthetic data.

mod fetch;
mod plan;
mod run;
mod simulation;
mod synthetic;

pub use fetch::{FetchError, FetchRequest, Fetcher, HttpFetcher, ReplayFetcher, DEFAULT_FETCH_TIMEOUT};
pub use plan::{build_plan, AgentSpec, Extension, ExtensionConfig, FireEvent, PlanConfig, PlanError, SchedulePlan};
pub use run::{
    run_collection, Clock, CollectionOptions, CollectionSummary, PageReject, RunError, SystemClock, VirtualClock,
};
pub use simulation::{simulate, stream_seed, SimulationConfig, StreamDefaults, StreamSpec};
pub use synthetic::{
    generate_stream, generate_synthetic, GroundTruthLedger, LedgerRound, StreamTemplate, SyntheticError,
    SyntheticStreamConfig,
};

pub(crate) use synthetic::slug;
