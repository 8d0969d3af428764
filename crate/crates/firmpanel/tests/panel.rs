use std::collections::HashSet;
use std::path::PathBuf;

use heavytail_panel::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn build_fixture() -> PanelOutput {
    let ingested = ingest(&fixture("panel50.csv"), &IngestOptions::default()).unwrap();
    let deflators = DeflatorTable::from_path(&fixture("deflators.csv")).unwrap();
    let zips = ZipMap::from_path(&fixture("zipmap.csv")).unwrap();
    build_panel(ingested, Some(&deflators), Some(&zips))
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0),
        _ => false,
    }
}

#[test]
fn fixture_matches_rational_oracle() {
    let out = build_fixture();
    let expected = heavytail_panel::derive::read_derived_path(&fixture("panel50_expected.csv")).unwrap();
    assert_eq!(out.panel.rows.len(), expected.rows.len());
    for (got, want) in out.panel.rows.iter().zip(&expected.rows) {
        assert_eq!((&got.firm_id, got.year, &got.region), (&want.firm_id, want.year, &want.region));
        for v in Variable::ALL {
            assert!(close(got.get(v), want.get(v)), "{} {} {v}: {:?} vs {:?}", got.firm_id, got.year, got.get(v), want.get(v));
        }
    }
}

#[test]
fn fixture_accounting() {
    let out = build_fixture();
    let acc = &out.accounting;
    assert_eq!((acc.input_rows, acc.rejected, acc.duplicates), (50, 1, 1));
    assert!(acc.is_conserved());
    assert_eq!(out.rejects[0].reason, "parse:L");

    let mut rdr = csv::Reader::from_path(fixture("panel50_counts.csv")).unwrap();
    for row in rdr.records() {
        let row = row.unwrap();
        let v: Variable = row[0].parse().unwrap();
        let year: i32 = row[1].parse().unwrap();
        let n: usize = row[2].parse().unwrap();
        assert_eq!(acc.derived(v, year), n, "{v} {year}");
    }
    let text = acc.to_string();
    assert!(text.lines().next().unwrap().contains("2004"));
    let mut csv_out = Vec::new();
    acc.write_csv(&mut csv_out).unwrap();
    assert!(String::from_utf8(csv_out).unwrap().contains("LP,2002,zero:L,1"));
}

#[test]
fn fixture_links() {
    let out = build_fixture();
    assert_eq!(out.links.previous(&FirmYear::new("F09B", 2002)), Some(&FirmYear::new("F09", 2001)));
    assert_eq!(out.links.kind(&FirmYear::new("F09B", 2002)), Some(LinkKind::PhoneZip));
    assert_eq!(out.links.previous(&FirmYear::new("G2", 2002)), None);
    assert_eq!(out.links.ambiguities.len(), 1);
    assert_eq!(out.deflation.as_ref().unwrap().missing, 6);
    assert_eq!(out.unknown_region, 6);
}

#[test]
fn telescoping_over_linked_chains() {
    let out = build_fixture();
    let rows = &out.panel.rows;
    let mut checked = 0;
    for id in ["F01", "F02", "F03", "F04", "F06", "F07", "F08"] {
        let chain: Vec<_> = rows.iter().filter(|r| r.firm_id == id).collect();
        if chain.iter().any(|r| r.lp.is_none()) {
            continue;
        }
        let sum: f64 = chain[1..].iter().map(|r| r.delta_lp.unwrap()).sum();
        let direct = chain.last().unwrap().lp.unwrap() - chain[0].lp.unwrap();
        assert!((sum - direct).abs() <= 1e-12 * direct.abs().max(1.0), "{id}: {sum} vs {direct}");
        checked += 1;
    }
    assert!(checked >= 5);
    // a chain across an id change telescopes as well
    let f9: Vec<_> = rows.iter().filter(|r| r.firm_id.starts_with("F09")).collect();
    let sum: f64 = f9[1..].iter().map(|r| r.delta_lp.unwrap()).sum();
    assert_eq!(sum, f9[3].lp.unwrap() - f9[0].lp.unwrap());
}

#[test]
fn deflation_on_ten_rows() {
    let mut ingested = ingest(&fixture("panel50.csv"), &IngestOptions::default()).unwrap();
    let table = DeflatorTable::from_path(&fixture("deflators.csv")).unwrap();
    let mut first: Vec<FirmRecord> = ingested.records.drain(..10).collect();
    let report = deflate(&mut first, &table);
    assert_eq!(report.missing, 1);
    #[rustfmt::skip]
    let expected: [[Option<f64>; 5]; 10] = [
        [Some(653.0), Some(243.0), Some(126.0), Some(150.0), Some(315.0)],
        [Some(436.0), Some(104.8), Some(68.8), Some(0.8), Some(395.2)],
        [Some(130.5), Some(101.5), Some(48.0), Some(28.0), Some(174.0)],
        [Some(1190.0), Some(542.0), Some(34.0), Some(-36.0), Some(1420.0)],
        [Some(61.75), Some(34.5), Some(34.0), Some(7.25), Some(162.75)],
        [Some(406.0), Some(48.0), Some(71.0), Some(-39.0), Some(473.0)],
        [Some(393.6), Some(238.4), Some(98.4), Some(-30.4), Some(518.4)],
        [Some(437.0), Some(144.0), Some(57.0), Some(-28.0), Some(322.0)],
        [Some(358.0), Some(62.5), Some(46.0), Some(26.5), Some(52.5)],
        [Some(1226.0), Some(672.0), None, Some(224.0), Some(678.0)],
    ];
    for (r, e) in first.iter().zip(expected) {
        assert_eq!([r.output, r.intermediate_input, r.wages, r.profits, r.capital], e, "{} {}", r.firm_id, r.year);
    }
    assert_eq!(first[0].employment, Some(8.0));
}

#[test]
fn derive_is_order_independent_and_idempotent() {
    let ingested = ingest(&fixture("panel50.csv"), &IngestOptions::default()).unwrap();
    let zips = ZipMap::from_path(&fixture("zipmap.csv")).unwrap();
    let mut records = dedupe(ingested.records).records;
    assign_region(&mut records, &zips);
    let base = derive(&records, &link_firms(&records));
    assert_eq!(derive(&records, &link_firms(&records)), base);
    let mut rev = records.clone();
    rev.reverse();
    assert_eq!(derive(&rev, &link_firms(&rev)), base);
    let mut rot = records.clone();
    rot.rotate_left(17);
    assert_eq!(derive(&rot, &link_firms(&rot)), base);
}

#[test]
fn deflation_homogeneity() {
    let ingested = ingest(&fixture("panel50.csv"), &IngestOptions::default()).unwrap();
    let table = DeflatorTable::from_path(&fixture("deflators.csv")).unwrap();
    let c = 3.0;
    let mut scaled_table = DeflatorTable::new();
    let mut plain = dedupe(ingested.records).records;
    for r in &plain {
        let d = table.get(&r.sector, r.year).unwrap_or(1.0);
        scaled_table.insert(&r.sector, r.year, d * c).unwrap();
    }
    let mut scaled = plain.clone();
    for r in &mut scaled {
        for v in [&mut r.output, &mut r.intermediate_input, &mut r.wages, &mut r.profits, &mut r.capital] {
            if let Some(x) = v.as_mut() {
                *x *= c;
            }
        }
    }
    let mut money_only = scaled.clone();
    deflate(&mut plain, &table);
    deflate(&mut scaled, &scaled_table);
    deflate(&mut money_only, &table);
    let a = derive(&plain, &link_firms(&plain));
    let b = derive(&scaled, &link_firms(&scaled));
    let m = derive(&money_only, &link_firms(&money_only));
    for ((ra, rb), rm) in a.rows.iter().zip(&b.rows).zip(&m.rows) {
        for v in Variable::ALL {
            assert!(close(ra.get(v), rb.get(v)), "{v}");
        }
        for v in [Variable::Roc, Variable::Ir, Variable::LpGrowth] {
            assert!(close(ra.get(v), rm.get(v)), "{v}");
        }
        for v in [Variable::Va, Variable::Lp, Variable::Ci] {
            assert!(close(ra.get(v).map(|x| x * c), rm.get(v)), "{v}");
        }
    }
}

#[test]
fn dedupe_matches_distinct_key_count() {
    use std::fmt::Write;
    // 10^5 rows where every 33rd repeats an earlier key
    let mut records = Vec::with_capacity(100_000);
    let mut keys = HashSet::new();
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    for i in 0..100_000u64 {
        let (id, year) = if i % 33 == 32 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) % i;
            (j / 10, 2000 + (j % 10) as i32)
        } else {
            (i / 10, 2000 + (i % 10) as i32)
        };
        let mut name = String::new();
        write!(name, "N{id}").unwrap();
        keys.insert((name.clone(), year));
        records.push(FirmRecord::new(&name, year));
    }
    let out = dedupe(records);
    assert_eq!(out.records.len(), keys.len());
    assert_eq!(out.records.len() + out.duplicates.len(), 100_000);
    assert!(out.duplicates.len() > 2_000);
}

#[test]
fn unreadable_file() {
    assert!(matches!(
        ingest(&fixture("does-not-exist.csv"), &IngestOptions::default()),
        Err(Error::Unreadable { .. })
    ));
}
