//! All stages in order: ingest, dedupe, deflate, region, link, derive.

use crate::clean::{dedupe, deflate, DeflateReport, DeflatorTable};
use crate::derive::{derive, Accounting, DerivedPanel};
use crate::link::{link_firms, Links};
use crate::record::{IngestReport, Ingested, Reject};
use crate::region::{assign_region, ZipMap};

#[derive(Debug, Clone, Default)]
pub struct PanelOutput {
    pub ingest: IngestReport,
    pub rejects: Vec<Reject>,
    pub duplicates: Vec<(String, i32)>,
    pub deflation: Option<DeflateReport>,
    pub unknown_region: usize,
    pub links: Links,
    pub panel: DerivedPanel,
    pub accounting: Accounting,
}

/// Runs the cleaning and derivation stages on ingested records. Deflation is
/// skipped without a table; regions default to unknown without a map.
pub fn build_panel(ingested: Ingested, deflators: Option<&DeflatorTable>, zipmap: Option<&ZipMap>) -> PanelOutput {
    let Ingested { records, rejects, report } = ingested;
    let mut deduped = dedupe(records);
    let deflation = deflators.map(|t| deflate(&mut deduped.records, t));
    let unknown_region = assign_region(&mut deduped.records, zipmap.unwrap_or(&ZipMap::default()));
    let links = link_firms(&deduped.records);
    let panel = derive(&deduped.records, &links);
    let accounting = Accounting::new(&panel, report.input_rows, report.rejected, deduped.duplicates.len());
    PanelOutput {
        ingest: report,
        rejects,
        duplicates: deduped.duplicates,
        deflation,
        unknown_region,
        links,
        panel,
        accounting,
    }
}
