//! One function per CLI verb. Each writes its outputs and a manifest into
//! the configured output directory and returns the written paths.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use heavytail_core::estimation::mcculloch_fit;
use heavytail_core::FittedModel;
use heavytail_panel::{
    build_panel, ingest, write_records, write_rejects, DeflatorTable, IngestOptions, LinkKind, Variable, ZipMap,
    INPUT_COLUMNS,
};
use serde::Serialize;

use crate::config::Config;
use crate::density::{density_export, DensitySeries};
use crate::error::{Error, Result};
use crate::fit_table::fit_table;
use crate::gclt::gclt_experiment;
use crate::synth::synth_population;
use crate::vardiv::variance_divergence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    Synth,
    Derive,
    Fit,
    Gof,
    Gclt,
    Vardiv,
    ExportDensity,
}

impl Verb {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verb::Synth => "synth",
            Verb::Derive => "derive",
            Verb::Fit => "fit",
            Verb::Gof => "gof",
            Verb::Gclt => "gclt",
            Verb::Vardiv => "vardiv",
            Verb::ExportDensity => "export-density",
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    verb: &'a str,
    seed: u64,
    versions: BTreeMap<&'static str, &'static str>,
    outputs: Vec<String>,
    config: &'a Config,
}

pub const SYNTH_PANEL: &str = "synth_panel.csv";
pub const DERIVED_PANEL: &str = "derived.csv";
pub const FIT_TABLE: &str = "fit_table.csv";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(Error::io(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(Error::io(path))?))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(Error::io(path))?;
    w.flush().map_err(Error::io(path))
}

fn write_manifest(cfg: &Config, verb: Verb, outputs: &[PathBuf]) -> Result<PathBuf> {
    let manifest = Manifest {
        verb: verb.as_str(),
        seed: cfg.seed,
        versions: BTreeMap::from([("heavytail", env!("CARGO_PKG_VERSION"))]),
        outputs: outputs.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect(),
        config: cfg,
    };
    let path = cfg.out(&format!("manifest-{}.json", verb.as_str()));
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_text(&path, &text)?;
    Ok(path)
}

pub fn run(verb: Verb, cfg: &Config) -> Result<Vec<PathBuf>> {
    let mut outputs = match verb {
        Verb::Synth => synth(cfg)?,
        Verb::Derive => derive(cfg)?,
        Verb::Fit => fit(cfg, false)?,
        Verb::Gof => fit(cfg, true)?,
        Verb::Gclt => gclt(cfg)?,
        Verb::Vardiv => vardiv(cfg)?,
        Verb::ExportDensity => export_density(cfg)?,
    };
    let manifest = write_manifest(cfg, verb, &outputs)?;
    outputs.push(manifest);
    Ok(outputs)
}

/// synth → derive → fit → gof.
pub fn run_pipeline(cfg: &Config) -> Result<Vec<PathBuf>> {
    let mut all = Vec::new();
    for verb in [Verb::Synth, Verb::Derive, Verb::Fit, Verb::Gof] {
        all.extend(run(verb, cfg)?);
    }
    Ok(all)
}

fn synth(cfg: &Config) -> Result<Vec<PathBuf>> {
    let records = synth_population(&cfg.synth.spec()?, cfg.seed)?;
    let path = cfg.out(SYNTH_PANEL);
    let mut w = create(&path)?;
    write_records(&mut w, &records)?;
    log::info!("wrote {} synthetic firm-years to {}", records.len(), path.display());
    Ok(vec![path])
}

fn derive(cfg: &Config) -> Result<Vec<PathBuf>> {
    let input = cfg.panel.input.clone().unwrap_or_else(|| cfg.out(SYNTH_PANEL));
    let options = IngestOptions { years: cfg.panel.years.map(|[a, b]| (a, b)) };
    let ingested = ingest(&input, &options)?;
    let deflators = cfg.panel.deflators.as_deref().map(DeflatorTable::from_path).transpose()?;
    let zipmap = cfg.panel.zipmap.as_deref().map(ZipMap::from_path).transpose()?;
    let out = build_panel(ingested, deflators.as_ref(), zipmap.as_ref());

    let derived = cfg.out(DERIVED_PANEL);
    heavytail_panel::derive::write_derived(create(&derived)?, &out.panel)?;
    let rejects = cfg.out("rejects.csv");
    write_rejects(create(&rejects)?, &INPUT_COLUMNS, &out.rejects)?;
    let accounting = cfg.out("accounting.csv");
    out.accounting.write_csv(create(&accounting)?)?;

    let mut report = String::new();
    report.push_str(&out.ingest.to_string());
    report.push_str(&format!("duplicates dropped: {}\n", out.duplicates.len()));
    if let Some(d) = &out.deflation {
        report.push_str(&format!("records without deflator: {} ({} sector-years)\n", d.missing, d.missing_keys.len()));
    }
    report.push_str(&format!("records without region: {}\n", out.unknown_region));
    report.push_str(&format!(
        "links: {} by id, {} by phone and zip, {} ambiguous contacts\n\n",
        out.links.count(LinkKind::Id),
        out.links.count(LinkKind::PhoneZip),
        out.links.ambiguities.len()
    ));
    report.push_str(&out.accounting.to_string());
    let text = cfg.out("accounting.txt");
    write_text(&text, &report)?;
    Ok(vec![derived, rejects, accounting, text])
}

fn load_derived(cfg: &Config) -> Result<heavytail_panel::DerivedPanel> {
    let path = cfg.panel.derived.clone().unwrap_or_else(|| cfg.out(DERIVED_PANEL));
    Ok(heavytail_panel::derive::read_derived_path(&path)?)
}

fn fit(cfg: &Config, gof_only: bool) -> Result<Vec<PathBuf>> {
    let panel = load_derived(cfg)?;
    let table = fit_table(&panel, &cfg.fit)?;
    if gof_only {
        let path = cfg.out("gof.csv");
        table.write_gof_csv(create(&path)?)?;
        Ok(vec![path])
    } else {
        let path = cfg.out(FIT_TABLE);
        table.write_csv(create(&path)?)?;
        Ok(vec![path])
    }
}

fn gclt(cfg: &Config) -> Result<Vec<PathBuf>> {
    let g = &cfg.gclt;
    let report = gclt_experiment(&g.component, &g.n_terms, g.n_sums, cfg.seed)?;
    let csv_path = cfg.out("gclt.csv");
    report.write_csv(create(&csv_path)?)?;
    let txt = cfg.out("gclt.txt");
    write_text(&txt, &report.to_string())?;
    Ok(vec![csv_path, txt])
}

fn vardiv(cfg: &Config) -> Result<Vec<PathBuf>> {
    let v = &cfg.vardiv;
    let report = variance_divergence(&v.params, &v.sizes, v.reps, cfg.seed)?;
    let csv_path = cfg.out("vardiv.csv");
    report.write_csv(create(&csv_path)?)?;
    let txt = cfg.out("vardiv.txt");
    write_text(&txt, &report.to_string())?;
    Ok(vec![csv_path, txt])
}

fn export_density(cfg: &Config) -> Result<Vec<PathBuf>> {
    let d = &cfg.density;
    let mut series: Vec<DensitySeries> = Vec::new();
    if let Some(name) = &d.variable {
        let variable = Variable::from_str(name).map_err(Error::Config)?;
        let panel = load_derived(cfg)?;
        let mut by_year: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
        for row in &panel.rows {
            if d.years.is_empty() || d.years.contains(&row.year) {
                if let Some(v) = row.get(variable) {
                    by_year.entry(row.year).or_default().push(v);
                }
            }
        }
        for (year, values) in by_year {
            let model = if d.fit {
                match mcculloch_fit(&values) {
                    Ok(p) => Some(FittedModel::Levy(p)),
                    Err(e) => {
                        log::warn!("{name} {year}: no fitted curve: {e}");
                        None
                    }
                }
            } else {
                None
            };
            series.push(DensitySeries { id: format!("{name}/{year}"), values: Some(values), model });
        }
    }
    series.extend(d.curves.iter().map(|c| DensitySeries { id: c.id.clone(), values: None, model: Some(c.model) }));
    let export = density_export(&series, &d.grid)?;
    let path = cfg.out("density.csv");
    export.write_csv(create(&path)?)?;
    let mass = cfg.out("density_mass.csv");
    let mut w = csv::Writer::from_writer(create(&mass)?);
    w.write_record(["series_id", "empirical_mass", "fitted_mass"])?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    for m in &export.masses {
        w.write_record([m.series_id.clone(), opt(m.empirical), opt(m.fitted)])?;
    }
    w.flush().map_err(Error::io(&mass))?;
    Ok(vec![path, mass])
}
