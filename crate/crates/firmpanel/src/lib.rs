//! Firm-level panel processing: CSV ingestion, de-duplication, deflation,
//! longitudinal linkage, ZIP-based regions and the derived variables
//! (value added, labour productivity and its changes, return on capital,
//! investment rate, capital intensity).

pub mod clean;
pub mod derive;
pub mod error;
pub mod link;
pub mod pipeline;
pub mod record;
pub mod region;

pub use clean::{dedupe, deflate, DeflateReport, DeflatorTable, Deduped};
pub use derive::{derive, Accounting, DerivedPanel, DerivedRow, Exclusion, Variable, GROWTH_EPSILON};
pub use error::{Error, Result};
pub use link::{link_firms, FirmYear, LinkKind, Links};
pub use pipeline::{build_panel, PanelOutput};
pub use record::{ingest, ingest_reader, write_records, write_rejects, FirmRecord, IngestOptions, Ingested, Ownership, INPUT_COLUMNS};
pub use region::{assign_region, ZipMap, UNKNOWN_REGION};
