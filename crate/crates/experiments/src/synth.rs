//! Synthetic firm panels whose labour productivity is a stable sample.
//!
//! The generator inverts the derivation: for every firm-year it draws LP,
//! picks a headcount L, sets VA = LP·L and splits it into output and
//! intermediate input, so deriving the panel returns the drawn LP up to
//! floating-point rounding.

use std::collections::BTreeMap;

use heavytail_core::rng::{key_stream, stream_rng};
use heavytail_core::stable::StableSampler;
use heavytail_core::StableParams;
use heavytail_panel::{FirmRecord, Ownership};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reference::LP_ROWS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthCell {
    pub year: i32,
    /// ZIP prefix of the region; `None` draws ZIPs from [`SynthSpec::zips`].
    pub region: Option<String>,
    pub params: StableParams,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub cells: Vec<SynthCell>,
    /// Share of a cell's firms carried over from the same region's cell one
    /// year earlier, which makes ΔLP chains.
    pub linkage: f64,
    #[serde(default)]
    pub zips: Vec<String>,
}

impl SynthSpec {
    /// National LP cells for 1998–2007 at the reference parameters, with
    /// counts multiplied by `scale`.
    pub fn lp_reference(scale: f64, linkage: f64) -> Result<Self> {
        let cells = LP_ROWS
            .iter()
            .map(|r| {
                Ok(SynthCell {
                    year: r.year,
                    region: None,
                    params: r.params()?,
                    count: ((r.n as f64 * scale).round() as usize).max(1),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { cells, linkage, zips: Vec::new() })
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.linkage) {
            return Err(Error::Config(format!("linkage {} outside [0, 1]", self.linkage)));
        }
        if self.cells.is_empty() {
            return Err(Error::Config("synthetic spec has no cells".into()));
        }
        if let Some(c) = self.cells.iter().find(|c| c.count == 0) {
            return Err(Error::Config(format!("cell {} {:?} has zero count", c.year, c.region)));
        }
        Ok(())
    }
}

const OWNERSHIP: [Ownership; 7] = [
    Ownership::Soe,
    Ownership::Collective,
    Ownership::Shareholding,
    Ownership::Private,
    Ownership::Hmt,
    Ownership::Foreign,
    Ownership::Other,
];

/// Time-invariant firm attributes, a pure function of the id.
fn identity(rec: &mut FirmRecord, region: Option<&str>, zips: &[String]) {
    let h = key_stream(&rec.firm_id);
    rec.phone = Some(format!("{:010}", h % 10_000_000_000));
    rec.zip = match region {
        Some(prefix) => {
            let width = 6usize.saturating_sub(prefix.len());
            format!("{prefix}{:0width$}", (h >> 8) % 10u64.pow(width as u32))
        }
        None if !zips.is_empty() => zips[(h >> 16) as usize % zips.len()].clone(),
        None => String::new(),
    };
    rec.sector = format!("C{:02}", 13 + (h >> 24) % 30);
    rec.ownership = OWNERSHIP[((h >> 32) % 7) as usize];
    rec.founding_year = Some(1950 + ((h >> 40) % 48) as i32);
}

/// Generates the panel. Each cell draws from its own stream, so the output
/// depends only on `spec` and `seed`.
pub fn synth_population(spec: &SynthSpec, seed: u64) -> Result<Vec<FirmRecord>> {
    spec.validate()?;
    let mut cells: Vec<&SynthCell> = spec.cells.iter().collect();
    cells.sort_by_key(|c| c.year);

    let mut pools: BTreeMap<(i32, String), Vec<String>> = BTreeMap::new();
    let mut out = Vec::with_capacity(cells.iter().map(|c| c.count).sum());
    for cell in cells {
        let label = cell.region.clone().unwrap_or_else(|| "all".into());
        let mut rng = stream_rng(seed, key_stream(&format!("synth/{}/{label}", cell.year)));

        let mut pool = pools.get(&(cell.year - 1, label.clone())).cloned().unwrap_or_default();
        let carried = ((spec.linkage * cell.count as f64).round() as usize).min(pool.len());
        for i in 0..carried {
            let j = rng.random_range(i..pool.len());
            pool.swap(i, j);
        }
        let mut ids: Vec<String> = pool.into_iter().take(carried).collect();
        ids.extend((0..cell.count - carried).map(|k| format!("{label}-{}-{k}", cell.year)));

        let sampler = StableSampler::new(cell.params);
        for id in &ids {
            let lp = sampler.draw(&mut rng);
            let l = f64::from(1u32 << rng.random_range(0..10u32));
            let va = lp * l;
            let ii = l * (0.05 + rng.random::<f64>());
            let wages = l * (0.01 + 0.05 * rng.random::<f64>());
            let capital = l * (0.1 + 2.0 * rng.random::<f64>());
            let mut rec = FirmRecord::new(id, cell.year);
            identity(&mut rec, cell.region.as_deref(), &spec.zips);
            rec.output = Some(ii + va);
            rec.intermediate_input = Some(ii);
            rec.wages = Some(wages);
            rec.profits = Some(va - wages);
            rec.employment = Some(l);
            rec.capital = Some(capital);
            out.push(rec);
        }
        pools.insert((cell.year, label), ids);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use heavytail_panel::{build_panel, ingest_reader, write_records, IngestOptions, Variable};

    fn single(linkage: f64) -> SynthSpec {
        let p = StableParams::new(1.2, 0.5, 0.1, 0.2).unwrap();
        SynthSpec {
            cells: (2000..2003).map(|year| SynthCell { year, region: Some("31".into()), params: p, count: 1 }).collect(),
            linkage,
            zips: vec![],
        }
    }

    #[test]
    fn single_firm_one_row_per_year() {
        let recs = synth_population(&single(1.0), 5).unwrap();
        assert_eq!(recs.len(), 3);
        assert!(recs.iter().all(|r| r.firm_id == recs[0].firm_id));
        assert_eq!(recs.iter().map(|r| r.year).collect::<Vec<_>>(), [2000, 2001, 2002]);
        assert!(recs[0].zip.starts_with("31") && recs[0].zip.len() == 6);
        let mut buf = Vec::new();
        write_records(&mut buf, &recs).unwrap();
        let back = ingest_reader(buf.as_slice(), &IngestOptions::default()).unwrap();
        assert_eq!(back.records.len(), 3);
        assert!(back.rejects.is_empty());
    }

    #[test]
    fn same_seed_same_bytes() {
        let spec = SynthSpec::lp_reference(0.002, 0.6).unwrap();
        let bytes = |seed| {
            let mut buf = Vec::new();
            write_records(&mut buf, &synth_population(&spec, seed).unwrap()).unwrap();
            buf
        };
        assert_eq!(bytes(11), bytes(11));
        assert_ne!(bytes(11), bytes(12));
    }

    #[test]
    fn derived_lp_is_the_drawn_sample() {
        let p = StableParams::new(1.1, 0.9, 0.2, 0.3).unwrap();
        let spec = SynthSpec { cells: vec![SynthCell { year: 2001, region: None, params: p, count: 500 }], linkage: 0.0, zips: vec![] };
        let recs = synth_population(&spec, 3).unwrap();
        let mut rng = stream_rng(3, key_stream("synth/2001/all"));
        let sampler = StableSampler::new(p);
        let mut buf = Vec::new();
        write_records(&mut buf, &recs).unwrap();
        let out = build_panel(ingest_reader(buf.as_slice(), &IngestOptions::default()).unwrap(), None, None);
        let by_id: BTreeMap<_, _> = out.panel.rows.iter().map(|r| (r.firm_id.clone(), r.get(Variable::Lp).unwrap())).collect();
        for rec in &recs {
            let lp = sampler.draw(&mut rng);
            let _ = rng.random_range(0..10u32);
            for _ in 0..3 {
                let _: f64 = rng.random();
            }
            let got = by_id[&rec.firm_id];
            assert!((got - lp).abs() <= 1e-12 * (1.0 + lp.abs()) * rec.employment.unwrap(), "{got} {lp}");
        }
    }

    #[test]
    fn linkage_builds_chains() {
        let spec = SynthSpec::lp_reference(0.01, 0.5).unwrap();
        let recs = synth_population(&spec, 1).unwrap();
        let out = build_panel(heavytail_panel::Ingested::from_records(recs), None, None);
        let dlp_1999 = out.accounting.derived(Variable::DeltaLp, 1999);
        assert!((dlp_1999 as f64 - 0.5 * 1475.0).abs() < 2.0, "{dlp_1999}");
        assert_eq!(out.accounting.derived(Variable::DeltaLp, 1998), 0);
    }
}
