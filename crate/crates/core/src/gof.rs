//! Goodness of fit: binned Kullback–Leibler divergence, the Soofi ID score,
//! log-likelihood and AIC, and the two-model preference rule.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FittedModel, PreparedModel, PARAMETER_COUNT};

/// Number of equal-probability bins.
pub const DEFAULT_BINS: usize = 200;
/// Model quantiles bounding the binned support.
pub const CLIP: (f64, f64) = (0.001, 0.999);
/// A fit counts as acceptable above this score.
pub const SIDS_THRESHOLD: f64 = 95.0;

/// Empirical and model bin probabilities over shared edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedDensityPair {
    edges: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    /// Fraction of the sample that fell outside the clipped support.
    outside: f64,
}

impl BinnedDensityPair {
    /// Normalizes `p` and `q` over the bins; rejects mismatched lengths,
    /// negative entries and model zeros under empirical mass.
    pub fn new(edges: Vec<f64>, p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.len() != q.len() || edges.len() != p.len() + 1 {
            return Err(Error::Precondition("edges must have one more entry than p and q".into()));
        }
        if p.iter().chain(q.iter()).any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Precondition("bin probabilities must be finite and nonnegative".into()));
        }
        let sp: f64 = p.iter().sum();
        if sp <= 0.0 {
            return Err(Error::EmptySupport);
        }
        if let Some(bin) = (0..p.len()).find(|&i| p[i] > 0.0 && q[i] == 0.0) {
            return Err(Error::SupportMismatch { bin });
        }
        let sq: f64 = q.iter().sum();
        let p = p.iter().map(|v| v / sp).collect();
        let q = q.iter().map(|v| v / sq).collect();
        Ok(Self { edges, p, q, outside: 0.0 })
    }

    /// Bins the sample on `bins` equal-probability intervals of the model
    /// between its [`CLIP`] quantiles.
    pub fn from_model(sample: &[f64], model: &PreparedModel, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Precondition("at least one bin is required".into()));
        }
        let width = (CLIP.1 - CLIP.0) / bins as f64;
        let edges = (0..=bins)
            .map(|k| model.quantile(CLIP.0 + width * k as f64))
            .collect::<Result<Vec<f64>>>()?;
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let below = |x: f64| sorted.partition_point(|v| *v < x);
        let cuts: Vec<usize> = edges.iter().map(|e| below(*e)).collect();
        let counts: Vec<f64> = cuts.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
        let inside: f64 = counts.iter().sum();
        let outside = if sorted.is_empty() { 0.0 } else { 1.0 - inside / sorted.len() as f64 };
        let mut pair = Self::new(edges, counts, vec![1.0; bins])?;
        pair.outside = outside;
        Ok(pair)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }
    pub fn p(&self) -> &[f64] {
        &self.p
    }
    pub fn q(&self) -> &[f64] {
        &self.q
    }
    pub fn outside_mass(&self) -> f64 {
        self.outside
    }
}

/// D_KL(p‖q) in nats, with 0·ln 0 = 0.
pub fn kl_divergence(pair: &BinnedDensityPair) -> Result<f64> {
    if !pair.p.iter().any(|v| *v > 0.0) {
        return Err(Error::EmptySupport);
    }
    let mut d = 0.0;
    for (i, (p, q)) in pair.p.iter().zip(&pair.q).enumerate() {
        if *p > 0.0 {
            if *q <= 0.0 {
                return Err(Error::SupportMismatch { bin: i });
            }
            d += p * (p / q).ln();
        }
    }
    Ok(d.max(0.0))
}

/// SIDS = 100·exp(−D_KL); 100 is a perfect match.
pub fn sids_from_kl(kl: f64) -> f64 {
    100.0 * (-kl).exp()
}

pub fn soofi_id_score(pair: &BinnedDensityPair) -> Result<f64> {
    Ok(sids_from_kl(kl_divergence(pair)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLikelihood {
    pub value: f64,
    /// Set when the sample was empty and the value is the conventional 0.
    pub empty: bool,
}

pub fn log_likelihood(model: &PreparedModel, sample: &[f64]) -> Result<LogLikelihood> {
    if sample.is_empty() {
        return Ok(LogLikelihood { value: 0.0, empty: true });
    }
    let mut total = 0.0;
    for x in sample {
        if !x.is_finite() {
            return Err(Error::Precondition(format!("log-likelihood requires finite values, got {x}")));
        }
        total += model.log_pdf(*x)?;
    }
    Ok(LogLikelihood { value: total, empty: false })
}

/// AIC = 2k − 2 ln L.
pub fn aic(loglik: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Precondition("parameter count must be at least 1".into()));
    }
    Ok(2.0 * k as f64 - 2.0 * loglik)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub sids: f64,
    pub aic: f64,
    pub loglik: f64,
}

impl ModelScore {
    /// Bins, scores and computes the likelihood of `model` on `sample`.
    pub fn evaluate(model: &PreparedModel, sample: &[f64]) -> Result<Self> {
        let pair = BinnedDensityPair::from_model(sample, model, DEFAULT_BINS)?;
        let sids = soofi_id_score(&pair)?;
        let loglik = log_likelihood(model, sample)?.value;
        Ok(Self { sids, aic: aic(loglik, PARAMETER_COUNT)?, loglik })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preferred {
    Levy,
    Aep,
    Even,
    None,
}

impl Preferred {
    pub fn label(&self) -> &'static str {
        match self {
            Preferred::Levy => "levy",
            Preferred::Aep => "aep",
            Preferred::Even => "even",
            Preferred::None => "-",
        }
    }
}

impl fmt::Display for Preferred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Preference between two scored fits.
///
/// Only fits with SIDS above [`SIDS_THRESHOLD`] qualify. With one
/// qualifying fit it wins; with two, a fit better on both SIDS and AIC wins
/// and anything else is even.
pub fn preference(levy: &ModelScore, aep: &ModelScore) -> Preferred {
    let (lq, aq) = (levy.sids > SIDS_THRESHOLD, aep.sids > SIDS_THRESHOLD);
    match (lq, aq) {
        (false, false) => Preferred::None,
        (true, false) => Preferred::Levy,
        (false, true) => Preferred::Aep,
        (true, true) => {
            if levy.sids > aep.sids && levy.aic < aep.aic {
                Preferred::Levy
            } else if aep.sids > levy.sids && aep.aic < levy.aic {
                Preferred::Aep
            } else {
                Preferred::Even
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub levy: ModelScore,
    pub aep: ModelScore,
    /// SIDS_Lévy − SIDS_AEP
    pub delta_sids: f64,
    /// AIC_Lévy − AIC_AEP
    pub delta_aic: f64,
    pub preferred: Preferred,
}

impl Comparison {
    pub fn from_scores(levy: ModelScore, aep: ModelScore) -> Self {
        Self {
            levy,
            aep,
            delta_sids: levy.sids - aep.sids,
            delta_aic: levy.aic - aep.aic,
            preferred: preference(&levy, &aep),
        }
    }
}

pub fn compare_models(sample: &[f64], levy_fit: &FittedModel, aep_fit: &FittedModel) -> Result<Comparison> {
    let levy = ModelScore::evaluate(&levy_fit.prepare()?, sample)?;
    let aep = ModelScore::evaluate(&aep_fit.prepare()?, sample)?;
    Ok(Comparison::from_scores(levy, aep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aep::AepParams;
    use crate::stable::StableParams;
    use approx::assert_abs_diff_eq;

    fn pair(p: &[f64], q: &[f64]) -> BinnedDensityPair {
        let edges = (0..=p.len()).map(|i| i as f64).collect();
        BinnedDensityPair::new(edges, p.to_vec(), q.to_vec()).unwrap()
    }

    #[test]
    fn kl_examples() {
        let same = pair(&[0.2, 0.3, 0.5], &[0.2, 0.3, 0.5]);
        assert_eq!(kl_divergence(&same).unwrap(), 0.0);
        assert_eq!(soofi_id_score(&same).unwrap(), 100.0);
        let two = pair(&[0.5, 0.5], &[0.25, 0.75]);
        let expected = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert_abs_diff_eq!(kl_divergence(&two).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.1438, epsilon = 1e-4);
        let zero_p = pair(&[0.0, 1.0], &[0.5, 0.5]);
        assert_abs_diff_eq!(kl_divergence(&zero_p).unwrap(), 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn support_errors() {
        let edges = vec![0.0, 1.0, 2.0];
        assert!(matches!(
            BinnedDensityPair::new(edges.clone(), vec![0.5, 0.5], vec![1.0, 0.0]),
            Err(Error::SupportMismatch { bin: 1 })
        ));
        assert!(matches!(BinnedDensityPair::new(edges, vec![0.0, 0.0], vec![0.5, 0.5]), Err(Error::EmptySupport)));
    }

    #[test]
    fn sids_of_gaussian_shift() {
        // N(0,1) vs N(1,1): D_KL = 1/2, binned finely
        let n = 4000;
        let (lo, hi) = (-12.0, 13.0);
        let w = (hi - lo) / n as f64;
        let phi = |x: f64, m: f64| (-(x - m) * (x - m) / 2.0).exp();
        let mid: Vec<f64> = (0..n).map(|i| lo + w * (i as f64 + 0.5)).collect();
        let p: Vec<f64> = mid.iter().map(|x| phi(*x, 0.0)).collect();
        let q: Vec<f64> = mid.iter().map(|x| phi(*x, 1.0)).collect();
        let edges = (0..=n).map(|i| lo + w * i as f64).collect();
        let pair = BinnedDensityPair::new(edges, p, q).unwrap();
        assert_abs_diff_eq!(kl_divergence(&pair).unwrap(), 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(soofi_id_score(&pair).unwrap(), 60.65, epsilon = 0.01);
    }

    #[test]
    fn sids_decreases_with_kl() {
        let mut prev = 100.0;
        for k in 1..50 {
            let s = sids_from_kl(k as f64 * 0.1);
            assert!(s < prev && s >= 0.0);
            prev = s;
        }
    }

    #[test]
    fn loglik_examples() {
        let g = FittedModel::Levy(StableParams::standard(2.0, 0.0).unwrap()).prepare().unwrap();
        let ll = log_likelihood(&g, &[0.0]).unwrap();
        assert_abs_diff_eq!(ll.value, -1.2655, epsilon = 1e-4);
        assert_abs_diff_eq!(ll.value, -(2.0 * std::f64::consts::PI.sqrt()).ln(), epsilon = 1e-8);
        let lap = FittedModel::Aep(AepParams::laplace(1.0, 0.0).unwrap()).prepare().unwrap();
        let ll = log_likelihood(&lap, &[0.0, 1.0, -1.0]).unwrap();
        assert_abs_diff_eq!(ll.value, 3.0 * 0.5f64.ln() - 2.0, epsilon = 1e-12);
        let empty = log_likelihood(&lap, &[]).unwrap();
        assert_eq!(empty, LogLikelihood { value: 0.0, empty: true });
    }

    #[test]
    fn aic_examples() {
        assert_eq!(aic(0.0, 4).unwrap(), 8.0);
        assert_eq!(aic(-100.0, 4).unwrap(), 208.0);
        assert!(aic(1.0, 0).is_err());
        // equal k: ΔAIC = −2 ΔlnL
        let (a, b) = (-1234.5, -1300.25);
        assert_abs_diff_eq!(aic(a, 4).unwrap() - aic(b, 4).unwrap(), -2.0 * (a - b), epsilon = 1e-9);
    }

    #[test]
    fn aic_ranking_ignores_common_shift() {
        let (a, b) = (-500.0, -520.0);
        let c = 37.5;
        assert_eq!(aic(a, 4).unwrap() < aic(b, 4).unwrap(), aic(a + c, 4).unwrap() < aic(b + c, 4).unwrap());
    }

    fn score(sids: f64, aic: f64) -> ModelScore {
        ModelScore { sids, aic, loglik: 4.0 - aic / 2.0 }
    }

    #[test]
    fn preference_table() {
        // (Lévy SIDS, AIC, AEP SIDS, AIC, expected) from published goodness-of-fit rows.
        // Three ΔLP rows (2005–2007) label Lévy although the criteria
        // disagree; they contradict the stated rule and are not listed.
        let rows = [
            (98.78, 880.11, 88.71, 913.49, Preferred::Levy),
            (98.10, 803.04, 93.86, 845.21, Preferred::Levy),
            (99.76, 1249.25, 99.14, 1320.87, Preferred::Levy),
            (98.45, 884.45, 95.01, 927.27, Preferred::Levy),
            (96.75, 1012.76, 95.21, 1071.37, Preferred::Levy),
            (94.48, 1322.04, 94.48, 1357.34, Preferred::None),
            (99.22, 824.87, 98.95, 852.95, Preferred::Levy),
            (92.99, 919.04, 96.53, 960.82, Preferred::Aep),
            (98.86, 920.60, 99.79, 961.19, Preferred::Even),
            (99.06, 973.09, 99.11, 1017.00, Preferred::Even),
            (95.28, 1062.73, 97.86, 1072.13, Preferred::Even),
            (96.63, 1063.87, 94.74, 1095.59, Preferred::Levy),
            (94.48, 1350.69, 85.73, 1408.57, Preferred::None),
            (88.00, 1786.06, 77.35, 1810.14, Preferred::None),
            (95.30, 1243.37, 90.81, 1293.24, Preferred::Levy),
        ];
        for (ls, la, as_, aa, want) in rows {
            let c = Comparison::from_scores(score(ls, la), score(as_, aa));
            assert_eq!(c.preferred, want, "{ls} {la} {as_} {aa}");
        }
        let c = Comparison::from_scores(score(98.78, 880.11), score(88.71, 913.49));
        assert_abs_diff_eq!(c.delta_sids, 10.07, epsilon = 1e-9);
        assert_abs_diff_eq!(c.delta_aic, -33.38, epsilon = 1e-9);
        let same = score(97.0, 500.0);
        assert_eq!(preference(&same, &same), Preferred::Even);
    }

    #[test]
    fn model_binning_gives_uniform_q() {
        let p = AepParams::laplace(1.0, 0.0).unwrap();
        let m = FittedModel::Aep(p).prepare().unwrap();
        let xs = crate::aep::sample(&p, 50_000, 1).unwrap();
        let pair = BinnedDensityPair::from_model(&xs, &m, DEFAULT_BINS).unwrap();
        assert!(pair.q().iter().all(|q| (q - 1.0 / 200.0).abs() < 1e-15));
        assert_abs_diff_eq!(pair.p().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!((pair.outside_mass() - 0.002).abs() < 0.001);
        assert!(soofi_id_score(&pair).unwrap() > 99.0);
    }

    #[test]
    fn sids_invariant_under_affine_rescaling() {
        let p = AepParams::new(0.8, 1.3, 1.0, 0.5).unwrap();
        let xs = crate::aep::sample(&p, 20_000, 2).unwrap();
        let fit = FittedModel::Aep(AepParams::new(0.85, 1.25, 1.05, 0.45).unwrap());
        let s1 = soofi_id_score(&BinnedDensityPair::from_model(&xs, &fit.prepare().unwrap(), 200).unwrap()).unwrap();
        let (a, b) = (3.0, -7.0);
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let scaled = AepParams::new(0.85, 1.25, 1.05 * a, 0.45 * a + b).unwrap();
        let pair = BinnedDensityPair::from_model(&ys, &FittedModel::Aep(scaled).prepare().unwrap(), 200).unwrap();
        assert_abs_diff_eq!(soofi_id_score(&pair).unwrap(), s1, epsilon = 1e-9);
    }
}
