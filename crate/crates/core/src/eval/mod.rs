//! Metrics, scenario curation, attack benchmarks, transfer matrices and plots.
pub mod benchmark;
pub mod curate;
pub mod metrics;
pub mod plot;
pub mod table;
pub mod transfer;

pub use benchmark::{run as run_benchmark, run_cell, summarize, CellResult, GroupSummary};
pub use curate::{curate, Curation};
pub use metrics::{score, MetricsRow, MetricsSummary};
pub use table::Table;
pub use transfer::{transfer, TransferMatrix};
