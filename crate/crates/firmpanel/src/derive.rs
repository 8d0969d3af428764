//! Derived productivity and financial variables per firm-year.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{FirmYear, Links};
use crate::record::FirmRecord;
use crate::region::UNKNOWN_REGION;

/// Below this |LP_{t−1}| the growth rate is not computed.
pub const GROWTH_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variable {
    Va,
    VaImputed,
    Lp,
    DeltaLp,
    LpGrowth,
    Roc,
    Ir,
    Ci,
}

impl Variable {
    pub const ALL: [Variable; 8] = [
        Variable::Va,
        Variable::VaImputed,
        Variable::Lp,
        Variable::DeltaLp,
        Variable::LpGrowth,
        Variable::Roc,
        Variable::Ir,
        Variable::Ci,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variable::Va => "VA",
            Variable::VaImputed => "VA_imputed",
            Variable::Lp => "LP",
            Variable::DeltaLp => "dLP",
            Variable::LpGrowth => "LP_growth",
            Variable::Roc => "ROC",
            Variable::Ir => "IR",
            Variable::Ci => "CI",
        }
    }

    fn index(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Variable::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s) || (s.eq_ignore_ascii_case("deltalp") && *v == Variable::DeltaLp))
            .ok_or_else(|| format!("unknown variable '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedRow {
    pub firm_id: String,
    pub year: i32,
    pub region: String,
    pub va: Option<f64>,
    pub va_imputed: Option<f64>,
    pub lp: Option<f64>,
    pub delta_lp: Option<f64>,
    pub lp_growth: Option<f64>,
    pub roc: Option<f64>,
    pub ir: Option<f64>,
    pub ci: Option<f64>,
}

impl DerivedRow {
    pub fn get(&self, v: Variable) -> Option<f64> {
        self.values()[v.index()]
    }

    fn values(&self) -> [Option<f64>; 8] {
        [self.va, self.va_imputed, self.lp, self.delta_lp, self.lp_growth, self.roc, self.ir, self.ci]
    }
}

/// A variable left undefined for a firm-year, with its reason code.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Exclusion {
    pub firm_id: String,
    pub year: i32,
    pub variable: Variable,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DerivedPanel {
    /// Sorted by (firm_id, year).
    pub rows: Vec<DerivedRow>,
    pub exclusions: Vec<Exclusion>,
}

type Derived = std::result::Result<f64, &'static str>;

struct Base {
    va: Derived,
    lp: Derived,
    capital: Option<f64>,
}

fn need(v: Option<f64>, reason: &'static str) -> Derived {
    v.ok_or(reason)
}

fn per_worker(num: Derived, l: Option<f64>) -> Derived {
    let num = num?;
    match l {
        None => Err("missing:L"),
        Some(l) if l == 0.0 => Err("zero:L"),
        Some(l) => Ok(num / l),
    }
}

fn base(r: &FirmRecord) -> Base {
    let va = need(r.output, "missing:Q").and_then(|q| Ok(q - need(r.intermediate_input, "missing:II")?));
    let lp = per_worker(va.map_err(|_| "missing:VA"), r.employment);
    Base { va, lp, capital: r.capital }
}

/// Computes every derived variable. Rows come out sorted, so the result does
/// not depend on input order.
pub fn derive(records: &[FirmRecord], links: &Links) -> DerivedPanel {
    let bases: HashMap<FirmYear, Base> = records.iter().map(|r| (FirmYear::new(&r.firm_id, r.year), base(r))).collect();

    let mut panel = DerivedPanel::default();
    for r in records {
        let fy = FirmYear::new(&r.firm_id, r.year);
        let b = &bases[&fy];
        let prev = links.previous(&fy).and_then(|p| bases.get(p));

        let va_imputed = need(r.wages, "missing:W").and_then(|w| Ok(w + need(r.profits, "missing:Pi")?));
        let delta_lp: Derived = match prev {
            None => Err("unlinked"),
            Some(p) => match (b.lp, p.lp) {
                (Err(_), _) => Err("missing:LP"),
                (_, Err(_)) => Err("missing:LP_prev"),
                (Ok(now), Ok(before)) => Ok(now - before),
            },
        };
        let lp_growth = delta_lp.and_then(|d| {
            let before = prev.and_then(|p| p.lp.ok()).ok_or("missing:LP_prev")?;
            if before.abs() < GROWTH_EPSILON {
                Err("singular:LP_prev")
            } else {
                Ok(d / before)
            }
        });
        let roc = need(r.profits, "missing:Pi").and_then(|pi| match b.capital {
            None => Err("missing:K"),
            Some(k) if k <= 0.0 => Err("nonpositive:K"),
            Some(k) => Ok(pi / k),
        });
        let ir = match prev {
            None => Err("unlinked"),
            Some(p) => need(b.capital, "missing:K").and_then(|k| match p.capital {
                None => Err("missing:K_prev"),
                Some(k0) if k0 <= 0.0 => Err("nonpositive:K_prev"),
                Some(k0) => Ok((k - k0) / k0),
            }),
        };
        let ci = per_worker(need(b.capital, "missing:K"), r.employment);

        let all: [Derived; 8] = [b.va, va_imputed, b.lp, delta_lp, lp_growth, roc, ir, ci];
        for (v, d) in Variable::ALL.iter().zip(&all) {
            if let Err(reason) = d {
                panel.exclusions.push(Exclusion { firm_id: r.firm_id.clone(), year: r.year, variable: *v, reason });
            }
        }
        let [va, va_imputed, lp, delta_lp, lp_growth, roc, ir, ci] = all.map(|d| d.ok());
        panel.rows.push(DerivedRow {
            firm_id: r.firm_id.clone(),
            year: r.year,
            region: r.region.clone().unwrap_or_else(|| UNKNOWN_REGION.to_owned()),
            va,
            va_imputed,
            lp,
            delta_lp,
            lp_growth,
            roc,
            ir,
            ci,
        });
    }
    panel.rows.sort_by(|a, b| (&a.firm_id, a.year).cmp(&(&b.firm_id, b.year)));
    panel.exclusions.sort();
    panel
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub derived: usize,
    pub dropped: BTreeMap<String, usize>,
}

impl Cell {
    pub fn dropped_total(&self) -> usize {
        self.dropped.values().sum()
    }
}

/// Observation counts per variable and year, with the rows lost before
/// derivation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Accounting {
    pub input_rows: usize,
    pub rejected: usize,
    pub duplicates: usize,
    pub cells: BTreeMap<Variable, BTreeMap<i32, Cell>>,
}

impl Accounting {
    pub fn new(panel: &DerivedPanel, input_rows: usize, rejected: usize, duplicates: usize) -> Self {
        let mut cells: BTreeMap<Variable, BTreeMap<i32, Cell>> = BTreeMap::new();
        for row in &panel.rows {
            for v in Variable::ALL {
                let cell = cells.entry(v).or_default().entry(row.year).or_default();
                if row.get(v).is_some() {
                    cell.derived += 1;
                }
            }
        }
        for e in &panel.exclusions {
            let cell = cells.entry(e.variable).or_default().entry(e.year).or_default();
            *cell.dropped.entry(e.reason.to_owned()).or_default() += 1;
        }
        Self { input_rows, rejected, duplicates, cells }
    }

    pub fn derived(&self, v: Variable, year: i32) -> usize {
        self.cells.get(&v).and_then(|m| m.get(&year)).map_or(0, |c| c.derived)
    }

    /// Per variable: rejected + duplicates + derived + dropped == input rows.
    pub fn is_conserved(&self) -> bool {
        Variable::ALL.iter().all(|v| {
            let inside: usize =
                self.cells.get(v).map_or(0, |m| m.values().map(|c| c.derived + c.dropped_total()).sum());
            self.rejected + self.duplicates + inside == self.input_rows
        })
    }

    fn years(&self) -> Vec<i32> {
        let mut ys: Vec<i32> = self.cells.values().flat_map(|m| m.keys().copied()).collect();
        ys.sort_unstable();
        ys.dedup();
        ys
    }

    /// Long format: variable, year, status, count.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["variable", "year", "status", "count"])?;
        w.write_record(["*", "*", "input", &self.input_rows.to_string()])?;
        w.write_record(["*", "*", "rejected", &self.rejected.to_string()])?;
        w.write_record(["*", "*", "duplicate", &self.duplicates.to_string()])?;
        for (v, years) in &self.cells {
            for (y, c) in years {
                w.write_record([v.as_str(), &y.to_string(), "derived", &c.derived.to_string()])?;
                for (reason, n) in &c.dropped {
                    w.write_record([v.as_str(), &y.to_string(), reason, &n.to_string()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for Accounting {
    /// Observations per variable (rows) and year (columns).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let years = self.years();
        write!(f, "{:<11}", "variable")?;
        for y in &years {
            write!(f, " {y:>9}")?;
        }
        writeln!(f)?;
        for (v, cells) in &self.cells {
            write!(f, "{:<11}", v.as_str())?;
            for y in &years {
                write!(f, " {:>9}", cells.get(y).map_or(0, |c| c.derived))?;
            }
            writeln!(f)?;
        }
        writeln!(f, "input rows {}, rejected {}, duplicates {}", self.input_rows, self.rejected, self.duplicates)
    }
}

const DERIVED_COLUMNS: [&str; 11] = ["firm_id", "year", "region", "VA", "VA_imputed", "LP", "dLP", "LP_growth", "ROC", "IR", "CI"];

pub fn write_derived<W: Write>(writer: W, panel: &DerivedPanel) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(DERIVED_COLUMNS)?;
    for r in &panel.rows {
        let mut rec = vec![r.firm_id.clone(), r.year.to_string(), r.region.clone()];
        rec.extend(r.values().iter().map(|v| v.map_or_else(String::new, |x| x.to_string())));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_derived_path(path: &Path) -> Result<DerivedPanel> {
    let file = File::open(path).map_err(|source| Error::Unreadable { path: path.to_path_buf(), source })?;
    read_derived(file)
}

/// Reads a panel written by [`write_derived`]; exclusions are not stored.
pub fn read_derived<R: Read>(reader: R) -> Result<DerivedPanel> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(DERIVED_COLUMNS) {
        return Err(Error::SchemaMismatch("derived panel header".into()));
    }
    let mut panel = DerivedPanel::default();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |what: &str| Error::InvalidEntry { line, reason: format!("cannot parse {what}") };
        let num = |i: usize| -> Result<Option<f64>> {
            let s = &row[i];
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(DERIVED_COLUMNS[i]))
            }
        };
        panel.rows.push(DerivedRow {
            firm_id: row[0].to_owned(),
            year: row[1].parse().map_err(|_| bad("year"))?,
            region: row[2].to_owned(),
            va: num(3)?,
            va_imputed: num(4)?,
            lp: num(5)?,
            delta_lp: num(6)?,
            lp_growth: num(7)?,
            roc: num(8)?,
            ir: num(9)?,
            ci: num(10)?,
        });
    }
    Ok(panel)
}
