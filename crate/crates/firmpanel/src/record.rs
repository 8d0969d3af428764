//! Raw firm-year records and the CSV ingestion stage.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use csv::{ReaderBuilder, StringRecord, WriterBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input columns, in the order they are written.
pub const INPUT_COLUMNS: [&str; 13] = [
    "firm_id",
    "year",
    "phone",
    "zip",
    "founding_year",
    "sector",
    "ownership",
    "output",
    "intermediate_input",
    "wages",
    "profits",
    "employment",
    "capital",
];

// short names used in reject reasons
const FIELD_CODES: [&str; 13] = ["id", "year", "phone", "zip", "founding_year", "sector", "ownership", "Q", "II", "W", "Pi", "L", "K"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub enum Ownership {
    Soe,
    Collective,
    Shareholding,
    Private,
    Hmt,
    Foreign,
    #[default]
    Other,
}

impl Ownership {
    pub fn as_str(&self) -> &'static str {
        match self {
            Ownership::Soe => "SOE",
            Ownership::Collective => "collective",
            Ownership::Shareholding => "shareholding",
            Ownership::Private => "private",
            Ownership::Hmt => "HMT",
            Ownership::Foreign => "foreign",
            Ownership::Other => "other",
        }
    }
}

impl fmt::Display for Ownership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ownership {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "soe" => Ownership::Soe,
            "collective" => Ownership::Collective,
            "shareholding" => Ownership::Shareholding,
            "private" => Ownership::Private,
            "hmt" => Ownership::Hmt,
            "foreign" => Ownership::Foreign,
            "other" | "" => Ownership::Other,
            _ => return Err(()),
        })
    }
}

/// One firm-year row. Monetary fields are in currency units, `None` when the
/// source field was empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmRecord {
    pub firm_id: String,
    pub year: i32,
    pub phone: Option<String>,
    pub zip: String,
    pub founding_year: Option<i32>,
    pub sector: String,
    pub ownership: Ownership,
    pub output: Option<f64>,
    pub intermediate_input: Option<f64>,
    pub wages: Option<f64>,
    pub profits: Option<f64>,
    pub employment: Option<f64>,
    pub capital: Option<f64>,
    /// Province code, filled by [`crate::assign_region`].
    #[serde(skip)]
    pub region: Option<String>,
}

impl FirmRecord {
    /// Record with only identity fields set.
    pub fn new(firm_id: &str, year: i32) -> Self {
        Self {
            firm_id: firm_id.into(),
            year,
            phone: None,
            zip: String::new(),
            founding_year: None,
            sector: String::new(),
            ownership: Ownership::Other,
            output: None,
            intermediate_input: None,
            wages: None,
            profits: None,
            employment: None,
            capital: None,
            region: None,
        }
    }

    fn to_fields(&self) -> [String; 13] {
        let num = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        [
            self.firm_id.clone(),
            self.year.to_string(),
            self.phone.clone().unwrap_or_default(),
            self.zip.clone(),
            self.founding_year.map_or_else(String::new, |y| y.to_string()),
            self.sector.clone(),
            self.ownership.to_string(),
            num(self.output),
            num(self.intermediate_input),
            num(self.wages),
            num(self.profits),
            num(self.employment),
            num(self.capital),
        ]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Inclusive year range; rows outside are rejected.
    pub years: Option<(i32, i32)>,
}

/// Malformed input row with its reason code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    pub line: u64,
    pub row: Vec<String>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub input_rows: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub accepted_per_year: BTreeMap<i32, usize>,
    pub reject_reasons: BTreeMap<String, usize>,
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows read: {}", self.input_rows)?;
        writeln!(f, "accepted: {}", self.accepted)?;
        writeln!(f, "rejected: {}", self.rejected)?;
        for (year, n) in &self.accepted_per_year {
            writeln!(f, "  {year}: {n}")?;
        }
        for (reason, n) in &self.reject_reasons {
            writeln!(f, "  reject {reason}: {n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub records: Vec<FirmRecord>,
    pub rejects: Vec<Reject>,
    pub report: IngestReport,
}

impl Ingested {
    /// Records built in memory, all counted as accepted input rows.
    pub fn from_records(records: Vec<FirmRecord>) -> Self {
        let mut report = IngestReport { input_rows: records.len(), accepted: records.len(), ..IngestReport::default() };
        for rec in &records {
            *report.accepted_per_year.entry(rec.year).or_default() += 1;
        }
        Self { records, rejects: Vec::new(), report }
    }
}

pub fn ingest(path: &Path, options: &IngestOptions) -> Result<Ingested> {
    let file = File::open(path).map_err(|source| Error::Unreadable { path: path.to_path_buf(), source })?;
    ingest_reader(file, options)
}

pub fn ingest_reader<R: Read>(reader: R, options: &IngestOptions) -> Result<Ingested> {
    let mut rdr = ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let columns = column_map(&headers)?;

    let mut out = Ingested::default();
    for row in rdr.records() {
        let row = row?;
        out.report.input_rows += 1;
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&row, &columns, headers.len(), options) {
            Ok(rec) => {
                *out.report.accepted_per_year.entry(rec.year).or_default() += 1;
                out.records.push(rec);
            }
            Err(reason) => {
                *out.report.reject_reasons.entry(reason.clone()).or_default() += 1;
                out.rejects.push(Reject { line, row: row.iter().map(str::to_owned).collect(), reason });
            }
        }
    }
    out.report.accepted = out.records.len();
    out.report.rejected = out.rejects.len();
    log::info!("ingested {} rows: {} accepted, {} rejected", out.report.input_rows, out.report.accepted, out.report.rejected);
    Ok(out)
}

fn column_map(headers: &StringRecord) -> Result<[usize; 13]> {
    let mut seen = HashSet::new();
    for h in headers.iter() {
        if !seen.insert(h.trim()) {
            return Err(Error::SchemaMismatch(format!("duplicate column '{}'", h.trim())));
        }
    }
    let mut map = [0; 13];
    for (slot, name) in map.iter_mut().zip(INPUT_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::SchemaMismatch(format!("missing column '{name}'")))?;
    }
    Ok(map)
}

fn parse_row(row: &StringRecord, cols: &[usize; 13], width: usize, options: &IngestOptions) -> std::result::Result<FirmRecord, String> {
    if row.len() != width {
        return Err(format!("fields:{}", row.len()));
    }
    let field = |i: usize| row.get(cols[i]).unwrap_or("").trim();
    let number = |i: usize| -> std::result::Result<Option<f64>, String> {
        let s = field(i);
        if s.is_empty() {
            return Ok(None);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(format!("parse:{}", FIELD_CODES[i])),
        }
    };
    let year_of = |i: usize| -> std::result::Result<Option<i32>, String> {
        let s = field(i);
        if s.is_empty() {
            return Ok(None);
        }
        s.parse().map(Some).map_err(|_| format!("parse:{}", FIELD_CODES[i]))
    };

    let firm_id = field(0);
    if firm_id.is_empty() {
        return Err("missing:id".into());
    }
    let year = year_of(1)?.ok_or("missing:year")?;
    if let Some((lo, hi)) = options.years {
        if year < lo || year > hi {
            return Err("range:year".into());
        }
    }
    let ownership = field(6).parse().map_err(|_| "parse:ownership".to_string())?;
    let employment = number(11)?;
    if employment.is_some_and(|l| l < 0.0) {
        return Err("range:L".into());
    }
    let phone = Some(field(2)).filter(|s| !s.is_empty()).map(str::to_owned);
    Ok(FirmRecord {
        firm_id: firm_id.into(),
        year,
        phone,
        zip: field(3).into(),
        founding_year: year_of(4)?,
        sector: field(5).into(),
        ownership,
        output: number(7)?,
        intermediate_input: number(8)?,
        wages: number(9)?,
        profits: number(10)?,
        employment,
        capital: number(12)?,
        region: None,
    })
}

/// Writes records in the input schema.
pub fn write_records<W: Write>(writer: W, records: &[FirmRecord]) -> Result<()> {
    let mut w = WriterBuilder::new().from_writer(writer);
    w.write_record(INPUT_COLUMNS)?;
    for r in records {
        w.write_record(r.to_fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Reject file: the original row followed by the line number and reason.
pub fn write_rejects<W: Write>(writer: W, headers: &[&str], rejects: &[Reject]) -> Result<()> {
    let mut w = WriterBuilder::new().flexible(true).from_writer(writer);
    let mut head: Vec<&str> = headers.to_vec();
    head.extend(["line", "reason"]);
    w.write_record(&head)?;
    for r in rejects {
        let mut row = r.row.clone();
        row.push(r.line.to_string());
        row.push(r.reason.clone());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
