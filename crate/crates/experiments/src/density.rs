//! Density series on a uniform grid for semi-log plotting.

use std::io::Write;

use heavytail_core::FittedModel;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 || !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::Config(format!("empty density grid {self:?}")));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points).map(|i| if i + 1 == self.points { self.hi } else { self.lo + i as f64 * h }).collect()
    }
}

/// One curve: raw values for the histogram, a fitted model, or both.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySeries {
    pub id: String,
    pub values: Option<Vec<f64>>,
    pub model: Option<FittedModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityRow {
    pub series_id: String,
    pub x: f64,
    pub empirical: Option<f64>,
    pub fitted: Option<f64>,
}

/// Trapezoid integrals of each column over the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesMass {
    pub series_id: String,
    pub empirical: Option<f64>,
    pub fitted: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DensityExport {
    pub rows: Vec<DensityRow>,
    pub masses: Vec<SeriesMass>,
}

fn trapezoid(h: f64, ys: &[f64]) -> f64 {
    let inner: f64 = ys.iter().sum();
    h * (inner - 0.5 * (ys[0] + ys[ys.len() - 1]))
}

/// Fixed-width histogram with bins centred on the grid nodes.
fn histogram(values: &[f64], grid: &GridSpec) -> Vec<f64> {
    let h = grid.step();
    let mut counts = vec![0usize; grid.points];
    for &v in values {
        let pos = ((v - grid.lo) / h + 0.5).floor();
        if pos >= 0.0 && pos < grid.points as f64 {
            counts[pos as usize] += 1;
        }
    }
    let scale = 1.0 / (values.len().max(1) as f64 * h);
    counts.into_iter().map(|c| c as f64 * scale).collect()
}

pub fn density_export(series: &[DensitySeries], grid: &GridSpec) -> Result<DensityExport> {
    grid.validate()?;
    let xs = grid.nodes();
    let mut out = DensityExport::default();
    for s in series {
        let empirical = s.values.as_ref().map(|v| histogram(v, grid));
        let fitted = match &s.model {
            Some(m) => {
                let prepared = m.prepare()?;
                Some(xs.iter().map(|&x| prepared.pdf(x)).collect::<heavytail_core::Result<Vec<f64>>>()?)
            }
            None => None,
        };
        out.masses.push(SeriesMass {
            series_id: s.id.clone(),
            empirical: empirical.as_deref().map(|e| trapezoid(grid.step(), e)),
            fitted: fitted.as_deref().map(|f| trapezoid(grid.step(), f)),
        });
        for (i, &x) in xs.iter().enumerate() {
            out.rows.push(DensityRow {
                series_id: s.id.clone(),
                x,
                empirical: empirical.as_ref().map(|e| e[i]),
                fitted: fitted.as_ref().map(|f| f[i]),
            });
        }
    }
    Ok(out)
}

impl DensityExport {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["series_id", "x", "empirical", "fitted"])?;
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        for r in &self.rows {
            w.write_record([r.series_id.clone(), r.x.to_string(), opt(r.empirical), opt(r.fitted)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn series(&self, id: &str) -> impl Iterator<Item = &DensityRow> {
        let id = id.to_owned();
        self.rows.iter().filter(move |r| r.series_id == id)
    }

    /// Grid node with the highest fitted density.
    pub fn fitted_mode(&self, id: &str) -> Option<f64> {
        self.series(id)
            .filter_map(|r| r.fitted.map(|f| (r.x, f)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(x, _)| x)
    }
}
