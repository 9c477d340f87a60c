//! Period segmentation, rolling means, bootstrap intervals, unique-item
//! ratios and the report bundle.

mod bootstrap;
mod observation;
mod period;
mod report;
mod rolling;
mod unique;

pub use bootstrap::{bootstrap_ci, sample_mean, BootstrapError, BootstrapSettings};
pub use observation::{
    export_long_format, import_long_format, LongFormatError, NoveltyObservation, LONG_FORMAT_COLUMNS,
};
pub use period::{assign_period, BoundaryOrderError, Period, PeriodBoundaries, UnknownPeriod};
pub use report::{build_report, ReportBundle, ReportError, ReportSettings};
pub use rolling::{rolling_series, RolledPoint, Window};
pub use unique::{
    histories_up_to, pooled_unique_count, ratio_from_counts, unique_item_ratio, ConditionKey, Cutoff, RatioError,
    UniqueRatio,
};
