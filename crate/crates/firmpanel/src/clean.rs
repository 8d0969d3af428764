//! Duplicate removal and price deflation.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::record::FirmRecord;

#[derive(Debug, Clone, Default)]
pub struct Deduped {
    pub records: Vec<FirmRecord>,
    /// (firm_id, year) of every dropped repeat.
    pub duplicates: Vec<(String, i32)>,
}

/// Keeps the first record per (firm_id, year).
pub fn dedupe(records: Vec<FirmRecord>) -> Deduped {
    let mut seen = HashSet::with_capacity(records.len());
    let mut out = Deduped::default();
    for r in records {
        if seen.insert((r.firm_id.clone(), r.year)) {
            out.records.push(r);
        } else {
            log::debug!("duplicate firm-year {} {}", r.firm_id, r.year);
            out.duplicates.push((r.firm_id, r.year));
        }
    }
    if !out.duplicates.is_empty() {
        log::warn!("dropped {} duplicate firm-year rows", out.duplicates.len());
    }
    out
}

/// Industry price deflators keyed by (sector, year), base year = 1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DeflatorTable {
    map: HashMap<(String, i32), f64>,
}

#[derive(Deserialize)]
struct DeflatorRow {
    sector: String,
    year: i32,
    deflator: f64,
}

impl DeflatorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, sector: &str, year: i32, deflator: f64) -> Result<()> {
        if !(deflator > 0.0 && deflator.is_finite()) {
            return Err(Error::InvalidEntry { line: 0, reason: format!("deflator {deflator} for ({sector}, {year})") });
        }
        self.map.insert((sector.to_owned(), year), deflator);
        Ok(())
    }

    pub fn get(&self, sector: &str, year: i32) -> Option<f64> {
        self.map.get(&(sector.to_owned(), year)).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Unreadable { path: path.to_path_buf(), source })?;
        Self::from_reader(file)
    }

    /// CSV with columns sector, year, deflator.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut table = Self::new();
        for row in rdr.deserialize::<DeflatorRow>() {
            let row = row?;
            table.insert(&row.sector, row.year, row.deflator).map_err(|e| match e {
                Error::InvalidEntry { reason, .. } => Error::InvalidEntry { line: table.len() as u64 + 2, reason },
                other => other,
            })?;
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeflateReport {
    /// Records deflated with the fallback factor 1.
    pub missing: usize,
    pub missing_keys: BTreeSet<(String, i32)>,
}

/// Divides Q, II, W, Π and K by the (sector, year) deflator. A missing entry
/// leaves the record unchanged and is counted.
pub fn deflate(records: &mut [FirmRecord], table: &DeflatorTable) -> DeflateReport {
    let mut report = DeflateReport::default();
    for r in records.iter_mut() {
        let d = match table.get(&r.sector, r.year) {
            Some(d) => d,
            None => {
                report.missing += 1;
                report.missing_keys.insert((r.sector.clone(), r.year));
                1.0
            }
        };
        for v in [&mut r.output, &mut r.intermediate_input, &mut r.wages, &mut r.profits, &mut r.capital] {
            if let Some(x) = v.as_mut() {
                *x /= d;
            }
        }
    }
    if report.missing > 0 {
        log::warn!(
            "no deflator for {} records ({} sector-years); factor 1 used",
            report.missing,
            report.missing_keys.len()
        );
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, year: i32) -> FirmRecord {
        FirmRecord::new(id, year)
    }

    #[test]
    fn dedupe_keeps_first() {
        let mut a = rec("A", 2000);
        a.output = Some(1.0);
        let mut b = rec("A", 2000);
        b.output = Some(2.0);
        let out = dedupe(vec![a, b, rec("A", 2001)]);
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[0].output, Some(1.0));
        assert_eq!(out.duplicates, vec![("A".to_string(), 2000)]);
    }

    #[test]
    fn deflate_divides_money_not_labour() {
        let mut t = DeflatorTable::new();
        t.insert("C13", 2000, 1.25).unwrap();
        let mut r = rec("A", 2000);
        r.sector = "C13".into();
        r.output = Some(100.0);
        r.employment = Some(8.0);
        let mut other = rec("B", 2000);
        other.sector = "C99".into();
        other.output = Some(100.0);
        let mut rs = vec![r, other];
        let report = deflate(&mut rs, &t);
        assert_eq!(rs[0].output, Some(80.0));
        assert_eq!(rs[0].employment, Some(8.0));
        assert_eq!(rs[1].output, Some(100.0));
        assert_eq!(report.missing, 1);
    }

    #[test]
    fn deflator_table_rejects_nonpositive() {
        let text = "sector,year,deflator\nC13,2000,1.1\nC13,2001,0\n";
        assert!(matches!(DeflatorTable::from_reader(text.as_bytes()), Err(Error::InvalidEntry { line: 3, .. })));
        let ok = DeflatorTable::from_reader("sector,year,deflator\nC13, 2000, 1.1\n".as_bytes()).unwrap();
        assert_eq!(ok.get("C13", 2000), Some(1.1));
    }
}
