//! Convergence of normalized i.i.d. sums to a stable law.

use std::fmt;
use std::io::Write;

use heavytail_core::aep::AepSampler;
use heavytail_core::estimation::{empirical_quantiles, mcculloch_estimate, FitFlags};
use heavytail_core::rng::{key_stream, stream_rng, StreamRng};
use heavytail_core::stable::StableSampler;
use heavytail_core::{AepParams, StableParams};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;

/// Summand distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Component {
    /// Uniform on (−½, ½].
    Uniform,
    /// Symmetric Pareto: ±U^{−1/tail}, |x| ≥ 1.
    Pareto { tail: f64 },
    Stable { params: StableParams },
    Aep { params: AepParams },
}

impl Component {
    pub fn label(&self) -> String {
        match self {
            Component::Uniform => "uniform".into(),
            Component::Pareto { tail } => format!("pareto({tail})"),
            Component::Stable { params: p } => {
                format!("stable({}, {}, {}, {})", p.alpha(), p.beta(), p.gamma(), p.delta())
            }
            Component::Aep { params: p } => format!("aep({}, {}, {}, {})", p.kappa(), p.h(), p.sigma(), p.xi()),
        }
    }
}

enum Draw {
    Uniform,
    Pareto(f64),
    Stable(StableSampler),
    Aep(AepSampler),
}

impl Draw {
    fn new(c: &Component) -> Result<Self> {
        Ok(match *c {
            Component::Uniform => Draw::Uniform,
            Component::Pareto { tail } => {
                if !(tail > 0.0) {
                    return Err(Error::Config(format!("Pareto tail {tail} must be positive")));
                }
                Draw::Pareto(-1.0 / tail)
            }
            Component::Stable { params } => Draw::Stable(StableSampler::new(params)),
            Component::Aep { params } => Draw::Aep(AepSampler::new(params)),
        })
    }

    fn sample(&self, rng: &mut StreamRng) -> f64 {
        match self {
            Draw::Uniform => 0.5 - rng.random::<f64>(),
            Draw::Pareto(exponent) => {
                let u = 1.0 - rng.random::<f64>();
                let x = u.powf(*exponent);
                if rng.random::<bool>() {
                    x
                } else {
                    -x
                }
            }
            Draw::Stable(s) => s.draw(rng),
            Draw::Aep(s) => s.draw(rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GcltRow {
    pub n_terms: usize,
    pub n_sums: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub flags: FitFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GcltReport {
    pub component: String,
    pub rows: Vec<GcltRow>,
}

const CHUNK: usize = 1000;

/// Sums of `n` draws, `n_sums` of them, in chunks with their own streams.
pub fn sums(component: &Component, n: usize, n_sums: usize, seed: u64) -> Result<Vec<f64>> {
    let draw = Draw::new(component)?;
    let chunks: Vec<usize> = (0..n_sums.div_ceil(CHUNK)).collect();
    let parts = parallel::map(&chunks, |&c| {
        let mut rng = stream_rng(seed, key_stream(&format!("gclt/{n}/{c}")));
        let len = CHUNK.min(n_sums - c * CHUNK);
        (0..len).map(|_| (0..n).map(|_| draw.sample(&mut rng)).sum::<f64>()).collect::<Vec<f64>>()
    });
    Ok(parts.concat())
}

/// Fitted stable parameters of the sums for each entry of `n_terms`, after
/// centring by the median and scaling by the interquartile range.
pub fn gclt_experiment(component: &Component, n_terms: &[usize], n_sums: usize, seed: u64) -> Result<GcltReport> {
    if n_terms.is_empty() || n_terms.contains(&0) {
        return Err(Error::Config("n_terms must be nonempty and positive".into()));
    }
    let mut rows = Vec::with_capacity(n_terms.len());
    for &n in n_terms {
        let s = sums(component, n, n_sums, seed)?;
        let q = empirical_quantiles(&s)?;
        let iqr = q.q75 - q.q25;
        let normalized: Vec<f64> = s.iter().map(|x| (x - q.q50) / iqr).collect();
        let est = mcculloch_estimate(&normalized)?;
        let p = est.params;
        log::info!("gclt {} n={n}: alpha {:.4}", component.label(), p.alpha());
        rows.push(GcltRow {
            n_terms: n,
            n_sums,
            alpha: p.alpha(),
            beta: p.beta(),
            gamma: p.gamma(),
            delta: p.delta(),
            flags: est.flags,
        });
    }
    Ok(GcltReport { component: component.label(), rows })
}

impl GcltReport {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["component", "n_terms", "n_sums", "alpha", "beta", "gamma", "delta", "flags"])?;
        for r in &self.rows {
            w.write_record([
                self.component.clone(),
                r.n_terms.to_string(),
                r.n_sums.to_string(),
                r.alpha.to_string(),
                r.beta.to_string(),
                r.gamma.to_string(),
                r.delta.to_string(),
                r.flags.labels().join(";"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for GcltReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "normalized sums of {}", self.component)?;
        writeln!(f, "{:>8} {:>8} {:>8} {:>8}", "n_terms", "alpha", "beta", "gamma")?;
        for r in &self.rows {
            writeln!(f, "{:>8} {:>8.4} {:>8.4} {:>8.4}", r.n_terms, r.alpha, r.beta, r.gamma)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_are_deterministic_and_chunked() {
        let a = sums(&Component::Uniform, 3, 2500, 1).unwrap();
        let b = sums(&Component::Uniform, 3, 2500, 1).unwrap();
        assert_eq!(a.len(), 2500);
        assert_eq!(a, b);
        assert!(a.iter().all(|x| x.abs() <= 1.5));
    }

    #[test]
    fn pareto_support() {
        let s = sums(&Component::Pareto { tail: 1.5 }, 1, 5000, 2).unwrap();
        assert!(s.iter().all(|x| x.abs() >= 1.0));
        let neg = s.iter().filter(|x| **x < 0.0).count();
        assert!((neg as f64 / 5000.0 - 0.5).abs() < 0.03);
    }

    #[test]
    fn stable_components_stay_stable() {
        let c = Component::Stable { params: StableParams::new(1.1, 0.0, 1.0, 0.0).unwrap() };
        let r = gclt_experiment(&c, &[1, 10], 20_000, 5).unwrap();
        for row in &r.rows {
            assert!((row.alpha - 1.1).abs() < 0.05, "{row:?}");
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(gclt_experiment(&Component::Uniform, &[], 2000, 1).is_err());
        assert!(sums(&Component::Pareto { tail: 0.0 }, 1, 10, 1).is_err());
    }
}
