//! ZIP-prefix region assignment.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::record::FirmRecord;

pub const UNKNOWN_REGION: &str = "unknown";

/// ZIP prefix → province table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ZipMap {
    // sorted by descending prefix length, so the first hit is the longest
    prefixes: Vec<(String, String)>,
}

#[derive(Deserialize)]
struct ZipRow {
    prefix: String,
    province: String,
}

impl ZipMap {
    pub fn new<I, S, T>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut prefixes: Vec<(String, String)> =
            entries.into_iter().map(|(p, v)| (p.into(), v.into())).filter(|(p, _)| !p.is_empty()).collect();
        prefixes.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        prefixes.dedup_by(|a, b| a.0 == b.0);
        Self { prefixes }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Unreadable { path: path.to_path_buf(), source })?;
        Self::from_reader(file)
    }

    /// CSV with columns prefix, province.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let rows = rdr.deserialize::<ZipRow>().collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self::new(rows.into_iter().map(|r| (r.prefix, r.province))))
    }

    /// Province for the longest matching prefix.
    pub fn lookup(&self, zip: &str) -> Option<&str> {
        let zip = zip.trim();
        if zip.is_empty() {
            return None;
        }
        self.prefixes.iter().find(|(p, _)| zip.starts_with(p.as_str())).map(|(_, v)| v.as_str())
    }

    pub fn len(&self) -> usize {
        self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty()
    }
}

/// Sets `region` on every record; unmatched ZIPs get [`UNKNOWN_REGION`].
/// Returns the number of unmatched records.
pub fn assign_region(records: &mut [FirmRecord], zipmap: &ZipMap) -> usize {
    let mut unknown = 0;
    for r in records.iter_mut() {
        let region = zipmap.lookup(&r.zip).unwrap_or_else(|| {
            unknown += 1;
            UNKNOWN_REGION
        });
        r.region = Some(region.to_owned());
    }
    if unknown > 0 {
        log::info!("{unknown} records without a region");
    }
    unknown
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn longest_prefix_wins() {
        let map = ZipMap::new([("3", "Zhejiang-wide"), ("31", "Zhejiang"), ("20", "Shanghai")]);
        assert_eq!(map.lookup("310005"), Some("Zhejiang"));
        assert_eq!(map.lookup("390000"), Some("Zhejiang-wide"));
        assert_eq!(map.lookup("200001"), Some("Shanghai"));
        assert_eq!(map.lookup("999999"), None);
        assert_eq!(map.lookup(""), None);
    }

    #[test]
    fn assign_marks_unknown() {
        let map = ZipMap::from_reader("prefix,province\n31,Zhejiang\n".as_bytes()).unwrap();
        let mut a = FirmRecord::new("A", 2000);
        a.zip = "310005".into();
        let b = FirmRecord::new("B", 2000);
        let mut rs = vec![a, b];
        assert_eq!(assign_region(&mut rs, &map), 1);
        assert_eq!(rs[0].region.as_deref(), Some("Zhejiang"));
        assert_eq!(rs[1].region.as_deref(), Some(UNKNOWN_REGION));
    }
}
