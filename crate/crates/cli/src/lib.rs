//! Command-line surface of the depth library: grouped-file ingestion,
//! depth reports and simulation tables.

pub mod app;
pub mod columns;
pub mod ingest;
pub mod report;

pub use app::run;
pub use columns::{parse_column_spec, ColumnRef};
pub use ingest::{ingest, ingest_bytes, Dataset, IngestError, IngestManifest, Layout};
pub use report::ReportRecord;
