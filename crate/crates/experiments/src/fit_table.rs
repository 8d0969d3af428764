//! Per-subsample fits of both model families and the fit-table CSV.

use std::collections::BTreeMap;
use std::io::Write;

use heavytail_core::estimation::{fit_subsample_with, FitFlags, FitOutcome, McCullochOptions, SubsampleClass, SubsampleKey};
use heavytail_core::{Comparison, ModelKind};
use heavytail_panel::{DerivedPanel, Variable, UNKNOWN_REGION};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grouping {
    /// National, one subsample per year.
    Year,
    YearRegion,
    /// Per region, all years together.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Gates {
    pub national_year: usize,
    pub region_year: usize,
    pub pooled: usize,
}

impl Default for Gates {
    fn default() -> Self {
        Self {
            national_year: SubsampleClass::NationalYear.default_gate(),
            region_year: SubsampleClass::RegionYear.default_gate(),
            pooled: SubsampleClass::RegionPooled.default_gate(),
        }
    }
}

impl Gates {
    pub fn for_class(&self, class: SubsampleClass) -> usize {
        match class {
            SubsampleClass::NationalYear => self.national_year,
            SubsampleClass::RegionYear => self.region_year,
            SubsampleClass::RegionPooled => self.pooled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub variables: Vec<String>,
    pub groupings: Vec<Grouping>,
    pub models: Vec<ModelKind>,
    pub gates: Gates,
    /// Cap on |β̂| for the stable fits.
    pub beta_bound: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            variables: vec!["LP".into()],
            groupings: vec![Grouping::Year],
            models: ModelKind::ALL.to_vec(),
            gates: Gates::default(),
            beta_bound: heavytail_core::estimation::DEFAULT_BETA_BOUND,
        }
    }
}

impl FitConfig {
    pub fn parsed_variables(&self) -> Result<Vec<Variable>> {
        self.variables.iter().map(|v| v.parse().map_err(Error::Config)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.groupings.is_empty() {
            return Err(Error::Config("at least one grouping is required".into()));
        }
        if self.models.is_empty() || self.variables.is_empty() {
            return Err(Error::Config("fit needs at least one model and one variable".into()));
        }
        if !(self.beta_bound > 0.0 && self.beta_bound <= 1.0) {
            return Err(Error::Config(format!("beta_bound {} outside (0, 1]", self.beta_bound)));
        }
        self.parsed_variables().map(|_| ())
    }
}

/// Values of `variable` per subsample, in key order.
pub fn subsamples(panel: &DerivedPanel, variable: Variable, grouping: Grouping) -> Vec<(SubsampleKey, Vec<f64>)> {
    let name = variable.as_str();
    let mut groups: BTreeMap<SubsampleKey, Vec<f64>> = BTreeMap::new();
    for row in &panel.rows {
        let Some(v) = row.get(variable) else { continue };
        let key = match grouping {
            Grouping::Year => SubsampleKey::national(name, row.year),
            _ if row.region == UNKNOWN_REGION => continue,
            Grouping::YearRegion => SubsampleKey::region_year(name, row.year, &row.region),
            Grouping::Pooled => SubsampleKey::region_pooled(name, &row.region),
        };
        groups.entry(key).or_default().push(v);
    }
    if grouping == Grouping::Year {
        // years present in the panel but with no defined value still get a row
        for year in panel.rows.iter().map(|r| r.year) {
            groups.entry(SubsampleKey::national(name, year)).or_default();
        }
    }
    groups.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Skipped,
    Failed,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Skipped => "skipped",
            Status::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRow {
    pub key: SubsampleKey,
    pub model: ModelKind,
    pub params: Option<[f64; 4]>,
    pub n: usize,
    pub loglik: Option<f64>,
    pub aic: Option<f64>,
    pub sids: Option<f64>,
    pub comparison: Option<Comparison>,
    pub flags: FitFlags,
    pub status: Status,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FitTable {
    pub rows: Vec<FitRow>,
}

pub const FIT_COLUMNS: [&str; 17] = [
    "variable",
    "year",
    "region",
    "model",
    "alpha/kappa",
    "beta/h",
    "gamma/sigma",
    "delta/xi",
    "n",
    "loglik",
    "aic",
    "sids",
    "delta_sids",
    "delta_aic",
    "preferred",
    "flags",
    "status",
];

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn fit_one(key: &SubsampleKey, values: &[f64], models: &[ModelKind], gate: usize, opts: &McCullochOptions) -> Vec<FitRow> {
    let mut rows: Vec<FitRow> = models
        .iter()
        .map(|&model| {
            let blank = FitRow {
                key: key.clone(),
                model,
                params: None,
                n: values.len(),
                loglik: None,
                aic: None,
                sids: None,
                comparison: None,
                flags: FitFlags::default(),
                status: Status::Skipped,
            };
            match fit_subsample_with(values, key, model, gate, opts) {
                Ok(FitOutcome::Fitted(r)) => {
                    if r.flags.any() {
                        log::info!("{key} {model}: {}", r.flags.labels().join(","));
                    }
                    FitRow {
                        params: Some(r.model.values()),
                        loglik: Some(r.loglik),
                        aic: Some(r.aic),
                        sids: Some(r.sids),
                        flags: r.flags,
                        status: Status::Ok,
                        ..blank
                    }
                }
                Ok(FitOutcome::Skipped { .. }) => blank,
                Err(e) => {
                    log::warn!("{key} {model}: fit failed: {e}");
                    FitRow { status: Status::Failed, ..blank }
                }
            }
        })
        .collect();
    let score = |m: ModelKind| {
        rows.iter().find(|r| r.model == m && r.status == Status::Ok).map(|r| heavytail_core::ModelScore {
            sids: r.sids.unwrap_or(f64::NAN),
            aic: r.aic.unwrap_or(f64::NAN),
            loglik: r.loglik.unwrap_or(f64::NAN),
        })
    };
    if let (Some(l), Some(a)) = (score(ModelKind::Levy), score(ModelKind::Aep)) {
        let c = Comparison::from_scores(l, a);
        for r in &mut rows {
            r.comparison = Some(c);
        }
    }
    rows
}

/// Fits every configured (variable, grouping, subsample) × model.
pub fn fit_table(panel: &DerivedPanel, config: &FitConfig) -> Result<FitTable> {
    config.validate()?;
    let opts = McCullochOptions { beta_bound: config.beta_bound };
    let mut tasks = Vec::new();
    for variable in config.parsed_variables()? {
        for &grouping in &config.groupings {
            tasks.extend(subsamples(panel, variable, grouping));
        }
    }
    let results = parallel::map(&tasks, |(key, values)| {
        fit_one(key, values, &config.models, config.gates.for_class(key.class()), &opts)
    });
    Ok(FitTable { rows: results.into_iter().flatten().collect() })
}

impl FitTable {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(FIT_COLUMNS)?;
        for r in &self.rows {
            let p = r.params.map_or([None; 4], |p| p.map(Some));
            let c = r.comparison;
            w.write_record([
                r.key.variable.clone(),
                r.key.year_label(),
                r.key.region_label().to_owned(),
                r.model.to_string(),
                fmt_opt(p[0]),
                fmt_opt(p[1]),
                fmt_opt(p[2]),
                fmt_opt(p[3]),
                r.n.to_string(),
                fmt_opt(r.loglik),
                fmt_opt(r.aic),
                fmt_opt(r.sids),
                fmt_opt(c.map(|c| c.delta_sids)),
                fmt_opt(c.map(|c| c.delta_aic)),
                c.map_or_else(String::new, |c| c.preferred.to_string()),
                r.flags.labels().join(";"),
                r.status.as_str().to_owned(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Fitted rows of one model, in table order.
    pub fn fitted(&self, model: ModelKind) -> impl Iterator<Item = &FitRow> {
        self.rows.iter().filter(move |r| r.model == model && r.status == Status::Ok)
    }

    /// Model comparison per subsample: both SIDS and AIC, their differences
    /// and the preferred family.
    pub fn write_gof_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "variable", "year", "region", "n", "sids_levy", "sids_aep", "aic_levy", "aic_aep", "delta_sids", "delta_aic", "preferred",
        ])?;
        for r in self.rows.iter().filter(|r| r.model == ModelKind::Levy) {
            let Some(c) = r.comparison else { continue };
            w.write_record([
                r.key.variable.clone(),
                r.key.year_label(),
                r.key.region_label().to_owned(),
                r.n.to_string(),
                c.levy.sids.to_string(),
                c.aep.sids.to_string(),
                c.levy.aic.to_string(),
                c.aep.aic.to_string(),
                c.delta_sids.to_string(),
                c.delta_aic.to_string(),
                c.preferred.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use heavytail_panel::DerivedRow;

    fn row(id: usize, year: i32, region: &str, lp: f64) -> DerivedRow {
        DerivedRow {
            firm_id: format!("F{id}"),
            year,
            region: region.into(),
            va: None,
            va_imputed: None,
            lp: Some(lp),
            delta_lp: None,
            lp_growth: None,
            roc: None,
            ir: None,
            ci: None,
        }
    }

    #[test]
    fn grouping_keys() {
        let panel = DerivedPanel {
            rows: vec![row(1, 2000, "ZJ", 1.0), row(2, 2000, UNKNOWN_REGION, 2.0), row(3, 2001, "ZJ", 3.0)],
            exclusions: vec![],
        };
        let national = subsamples(&panel, Variable::Lp, Grouping::Year);
        assert_eq!(national.len(), 2);
        assert_eq!(national[0].1, vec![1.0, 2.0]);
        let regional = subsamples(&panel, Variable::Lp, Grouping::YearRegion);
        assert_eq!(regional.len(), 2);
        assert!(regional.iter().all(|(k, _)| k.region.as_deref() == Some("ZJ")));
        let pooled = subsamples(&panel, Variable::Lp, Grouping::Pooled);
        assert_eq!(pooled, vec![(SubsampleKey::region_pooled("LP", "ZJ"), vec![1.0, 3.0])]);
        let none = subsamples(&panel, Variable::DeltaLp, Grouping::Year);
        assert!(none.iter().all(|(_, v)| v.is_empty()));
    }

    #[test]
    fn small_region_is_skipped() {
        let panel = DerivedPanel { rows: (0..50).map(|i| row(i, 2000, "ZJ", i as f64)).collect(), exclusions: vec![] };
        let cfg = FitConfig { groupings: vec![Grouping::YearRegion], ..FitConfig::default() };
        let t = fit_table(&panel, &cfg).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|r| r.status == Status::Skipped && r.n == 50));
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(",skipped"));
        assert!(text.starts_with("variable,year,region,model,alpha/kappa"));
    }

    #[test]
    fn empty_groupings_rejected() {
        let cfg = FitConfig { groupings: vec![], ..FitConfig::default() };
        assert!(fit_table(&DerivedPanel::default(), &cfg).is_err());
        let cfg = FitConfig { variables: vec!["XYZ".into()], ..FitConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
