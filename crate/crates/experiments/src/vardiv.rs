//! Growth of the sample variance with sample size under infinite variance.

use std::fmt;
use std::io::Write;

use heavytail_core::rng::{key_stream, stream_rng};
use heavytail_core::stable::StableSampler;
use heavytail_core::{Error as CoreError, StableParams};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::parallel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SizeRow {
    pub size: usize,
    pub median_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub params: StableParams,
    pub reps: usize,
    pub rows: Vec<SizeRow>,
    /// Least-squares slope of ln(median variance) on ln(size).
    pub slope: f64,
    /// (2 − α)/(2α)
    pub exponent_half: f64,
    /// 2/α − 1, from Var ~ N^{2/α}/N
    pub exponent_full: f64,
}

impl DivergenceReport {
    pub fn strictly_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].median_variance > w[0].median_variance)
    }
}

fn sample_variance(sampler: &StableSampler, n: usize, seed: u64, stream: u64) -> f64 {
    let mut rng = stream_rng(seed, stream);
    let (mut mean, mut m2) = (0.0, 0.0);
    for k in 1..=n {
        let x = sampler.draw(&mut rng);
        let d = x - mean;
        mean += d / k as f64;
        m2 += d * (x - mean);
    }
    m2 / (n - 1) as f64
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Median sample variance over `reps` draws at each size.
pub fn variance_divergence(params: &StableParams, sizes: &[usize], reps: usize, seed: u64) -> Result<DivergenceReport> {
    if params.alpha() >= 2.0 {
        return Err(CoreError::Domain("variance is finite at alpha = 2".into()).into());
    }
    if sizes.len() < 2 || sizes.iter().any(|&n| n < 2) || reps == 0 {
        return Err(Error::Config("need at least two sizes of 2 or more and one replicate".into()));
    }
    let sampler = StableSampler::new(*params);
    let tasks: Vec<(usize, usize)> = sizes.iter().flat_map(|&n| (0..reps).map(move |r| (n, r))).collect();
    let vars = parallel::map(&tasks, |&(n, r)| sample_variance(&sampler, n, seed, key_stream(&format!("vardiv/{n}/{r}"))));
    let rows: Vec<SizeRow> = sizes
        .iter()
        .zip(vars.chunks(reps))
        .map(|(&size, v)| SizeRow { size, median_variance: median(v.to_vec()) })
        .collect();
    let lx: Vec<f64> = rows.iter().map(|r| (r.size as f64).ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.median_variance.ln()).collect();
    let a = params.alpha();
    Ok(DivergenceReport {
        params: *params,
        reps,
        slope: slope(&lx, &ly),
        exponent_half: (2.0 - a) / (2.0 * a),
        exponent_full: 2.0 / a - 1.0,
        rows,
    })
}

impl DivergenceReport {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["size", "median_variance"])?;
        for r in &self.rows {
            w.write_record([r.size.to_string(), r.median_variance.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for DivergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(f, "stable({}, {}, {}, {}), {} replicates", p.alpha(), p.beta(), p.gamma(), p.delta(), self.reps)?;
        writeln!(f, "{:>10} {:>16}", "size", "median variance")?;
        for r in &self.rows {
            writeln!(f, "{:>10} {:>16.6e}", r.size, r.median_variance)?;
        }
        writeln!(f, "measured log-log slope: {:.4}", self.slope)?;
        writeln!(f, "predicted (2-a)/(2a):   {:.4}", self.exponent_half)?;
        writeln!(f, "predicted 2/a-1:        {:.4}", self.exponent_full)?;
        writeln!(f, "strictly increasing:    {}", self.strictly_increasing())
    }
}
