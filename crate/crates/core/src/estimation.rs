//! Quantile-based estimation of stable parameters (McCulloch, 1986) and
//! per-subsample fitting of both model families.
//!
//! The index statistics
//!
//! ```text
//! ν_α = (q95 − q05)/(q75 − q25)      ν_β = (q95 + q05 − 2 q50)/(q95 − q05)
//! ```
//!
//! are mapped through McCulloch's tables to (α, β); the scale comes from the
//! interquartile range and the location from the median. McCulloch's
//! location ζ is continuous in α and equals the S0 location, and his scale is
//! the common γ, so no conversion beyond sign handling is needed.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::aep;
use crate::error::{Error, Result};
use crate::gof::{Comparison, ModelScore};
use crate::model::{FittedModel, ModelKind};
use crate::stable::StableParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileSummary {
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
    pub n: usize,
}

/// Type-7 quantile of sorted data: linear interpolation between order
/// statistics at position (n − 1)p.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub const MIN_QUANTILE_SAMPLE: usize = 5;

pub fn empirical_quantiles(sample: &[f64]) -> Result<QuantileSummary> {
    if sample.len() < MIN_QUANTILE_SAMPLE {
        return Err(Error::TooFewObservations { got: sample.len(), required: MIN_QUANTILE_SAMPLE });
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("quantiles require finite values".into()));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    Ok(QuantileSummary {
        q05: quantile_type7(&x, 0.05),
        q25: quantile_type7(&x, 0.25),
        q50: quantile_type7(&x, 0.50),
        q75: quantile_type7(&x, 0.75),
        q95: quantile_type7(&x, 0.95),
        n: x.len(),
    })
}

// McCulloch (1986), Tables III and IV: rows ν_α, columns ν_β.
const NU_ALPHA: [f64; 15] = [2.439, 2.5, 2.6, 2.7, 2.8, 3.0, 3.2, 3.5, 4.0, 5.0, 6.0, 8.0, 10.0, 15.0, 25.0];
const NU_BETA: [f64; 7] = [0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0];

#[rustfmt::skip]
const PSI1: [[f64; 7]; 15] = [
    [2.000, 2.000, 2.000, 2.000, 2.000, 2.000, 2.000],
    [1.916, 1.924, 1.924, 1.924, 1.924, 1.924, 1.924],
    [1.808, 1.813, 1.829, 1.829, 1.829, 1.829, 1.829],
    [1.729, 1.730, 1.737, 1.745, 1.745, 1.745, 1.745],
    [1.664, 1.663, 1.663, 1.668, 1.676, 1.676, 1.676],
    [1.563, 1.560, 1.553, 1.548, 1.547, 1.547, 1.547],
    [1.484, 1.480, 1.471, 1.460, 1.448, 1.438, 1.438],
    [1.391, 1.386, 1.378, 1.364, 1.337, 1.318, 1.318],
    [1.279, 1.273, 1.266, 1.250, 1.210, 1.184, 1.150],
    [1.128, 1.121, 1.114, 1.101, 1.067, 1.027, 0.973],
    [1.029, 1.021, 1.014, 1.004, 0.974, 0.935, 0.874],
    [0.896, 0.892, 0.884, 0.883, 0.855, 0.823, 0.769],
    [0.818, 0.812, 0.806, 0.801, 0.780, 0.756, 0.691],
    [0.698, 0.695, 0.692, 0.689, 0.676, 0.656, 0.597],
    [0.593, 0.590, 0.588, 0.586, 0.579, 0.563, 0.513],
];

#[rustfmt::skip]
const PSI2: [[f64; 7]; 15] = [
    [0.0, 2.160, 1.000, 1.000, 1.000, 1.000, 1.000],
    [0.0, 1.592, 3.390, 1.000, 1.000, 1.000, 1.000],
    [0.0, 0.759, 1.800, 1.000, 1.000, 1.000, 1.000],
    [0.0, 0.482, 1.048, 1.694, 1.000, 1.000, 1.000],
    [0.0, 0.360, 0.760, 1.232, 2.229, 1.000, 1.000],
    [0.0, 0.253, 0.518, 0.823, 1.575, 1.000, 1.000],
    [0.0, 0.203, 0.410, 0.632, 1.244, 1.906, 1.000],
    [0.0, 0.165, 0.332, 0.499, 0.943, 1.560, 1.000],
    [0.0, 0.136, 0.271, 0.404, 0.689, 1.230, 2.195],
    [0.0, 0.109, 0.216, 0.323, 0.539, 0.827, 1.917],
    [0.0, 0.096, 0.190, 0.284, 0.472, 0.693, 1.759],
    [0.0, 0.082, 0.163, 0.243, 0.412, 0.601, 1.596],
    [0.0, 0.074, 0.147, 0.220, 0.377, 0.546, 1.482],
    [0.0, 0.064, 0.128, 0.191, 0.330, 0.478, 1.362],
    [0.0, 0.056, 0.112, 0.167, 0.285, 0.428, 1.274],
];

// Tables V and VII: rows α from 2 down to 0.5, columns β.
const ALPHA: [f64; 16] = [2.0, 1.9, 1.8, 1.7, 1.6, 1.5, 1.4, 1.3, 1.2, 1.1, 1.0, 0.9, 0.8, 0.7, 0.6, 0.5];
const BETA: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[rustfmt::skip]
const PHI3: [[f64; 5]; 16] = [
    [1.908, 1.908, 1.908, 1.908, 1.908],
    [1.914, 1.915, 1.916, 1.918, 1.921],
    [1.921, 1.922, 1.927, 1.936, 1.947],
    [1.927, 1.930, 1.943, 1.961, 1.987],
    [1.933, 1.940, 1.962, 1.997, 2.043],
    [1.939, 1.952, 1.988, 2.045, 2.116],
    [1.946, 1.967, 2.022, 2.106, 2.211],
    [1.955, 1.984, 2.067, 2.188, 2.333],
    [1.965, 2.007, 2.125, 2.294, 2.491],
    [1.980, 2.040, 2.205, 2.435, 2.696],
    [2.000, 2.085, 2.311, 2.624, 2.973],
    [2.040, 2.149, 2.461, 2.886, 3.356],
    [2.098, 2.244, 2.676, 3.265, 3.912],
    [2.189, 2.392, 3.004, 3.844, 4.775],
    [2.337, 2.634, 3.542, 4.808, 6.247],
    [2.588, 3.073, 4.534, 6.636, 9.144],
];

#[rustfmt::skip]
const PHI5: [[f64; 5]; 16] = [
    [0.0,  0.000,  0.000,  0.000,  0.000],
    [0.0, -0.017, -0.032, -0.049, -0.064],
    [0.0, -0.030, -0.061, -0.092, -0.123],
    [0.0, -0.043, -0.088, -0.132, -0.179],
    [0.0, -0.056, -0.111, -0.170, -0.232],
    [0.0, -0.066, -0.134, -0.206, -0.283],
    [0.0, -0.075, -0.154, -0.241, -0.335],
    [0.0, -0.084, -0.173, -0.276, -0.390],
    [0.0, -0.090, -0.192, -0.310, -0.447],
    [0.0, -0.095, -0.208, -0.346, -0.508],
    [0.0, -0.098, -0.223, -0.380, -0.576],
    [0.0, -0.099, -0.237, -0.424, -0.652],
    [0.0, -0.096, -0.250, -0.469, -0.742],
    [0.0, -0.089, -0.262, -0.520, -0.853],
    [0.0, -0.078, -0.272, -0.581, -0.997],
    [0.0, -0.061, -0.279, -0.659, -1.198],
];

/// Position of `v` on a monotone grid as (cell, fraction); clamps outside.
fn locate(grid: &[f64], v: f64) -> (usize, f64, bool) {
    let n = grid.len();
    let ascending = grid[n - 1] > grid[0];
    let key = |x: f64| if ascending { x } else { -x };
    let (kv, first, last) = (key(v), key(grid[0]), key(grid[n - 1]));
    if kv <= first {
        return (0, 0.0, kv < first);
    }
    if kv >= last {
        return (n - 2, 1.0, kv > last);
    }
    let i = grid.partition_point(|g| key(*g) <= kv).saturating_sub(1).min(n - 2);
    let t = (kv - key(grid[i])) / (key(grid[i + 1]) - key(grid[i]));
    (i, t, false)
}

/// Bilinear interpolation; the flag reports clamping to the table edge.
fn bilinear<const C: usize>(rows: &[f64], cols: &[f64; C], table: &[[f64; C]], r: f64, c: f64) -> (f64, bool) {
    let (i, s, ri) = locate(rows, r);
    let (j, t, ci) = locate(cols, c);
    let v = (1.0 - s) * ((1.0 - t) * table[i][j] + t * table[i][j + 1])
        + s * ((1.0 - t) * table[i + 1][j] + t * table[i + 1][j + 1]);
    (v, ri || ci)
}

/// Conditions met while fitting: table lookups for the stable model,
/// the attainable-region fallback for the AEP.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitFlags {
    /// ν_α or ν_β fell outside the tabulated grid.
    pub outside_table: bool,
    /// ν_α below the Gaussian value; α set to 2.
    pub gaussian_boundary: bool,
    pub alpha_clamped: bool,
    /// |β̂| reached the bound; read it as censored, the skew is at least this large.
    pub beta_clamped: bool,
    /// Sample L-moment ratios were unattainable; the nearest AEP shape was used.
    #[serde(default)]
    pub lmoments_projected: bool,
}

impl FitFlags {
    pub fn any(&self) -> bool {
        self.outside_table || self.gaussian_boundary || self.alpha_clamped || self.beta_clamped || self.lmoments_projected
    }

    pub fn labels(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.outside_table {
            v.push("outside-table");
        }
        if self.gaussian_boundary {
            v.push("gaussian-boundary");
        }
        if self.alpha_clamped {
            v.push("alpha-clamped");
        }
        if self.beta_clamped {
            v.push("beta-clamped");
        }
        if self.lmoments_projected {
            v.push("lmoments-projected");
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McCullochEstimate {
    pub params: StableParams,
    pub flags: FitFlags,
}

pub const MIN_MCCULLOCH_SAMPLE: usize = 1000;

/// Default cap on |β̂|.
///
/// Bilinear interpolation in the coarse ν_β grid pushes strongly skewed
/// samples onto β = 1 before the true skew gets there (β = 0.95 at α = 1
/// already maps to 1 from exact quantiles). A totally skewed law near α = 1
/// has a bounded or super-exponentially thin short tail, so every
/// observation on that side scores a log density of -∞ or close to it.
pub const DEFAULT_BETA_BOUND: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McCullochOptions {
    /// |β̂| is clamped to this value, in (0, 1], and flagged.
    pub beta_bound: f64,
}

impl Default for McCullochOptions {
    fn default() -> Self {
        Self { beta_bound: DEFAULT_BETA_BOUND }
    }
}

/// Stable parameters (S0) from five sample quantiles, default options.
pub fn mcculloch_from_quantiles(qs: &QuantileSummary) -> Result<McCullochEstimate> {
    mcculloch_from_quantiles_with(qs, &McCullochOptions::default())
}

pub fn mcculloch_from_quantiles_with(qs: &QuantileSummary, opts: &McCullochOptions) -> Result<McCullochEstimate> {
    if !(opts.beta_bound > 0.0 && opts.beta_bound <= 1.0) {
        return Err(Error::Precondition(format!("beta bound {} outside (0, 1]", opts.beta_bound)));
    }
    let iqr = qs.q75 - qs.q25;
    if !(iqr > 0.0) {
        return Err(Error::DegenerateSpread);
    }
    let nu_alpha = (qs.q95 - qs.q05) / iqr;
    let nu_beta = (qs.q95 + qs.q05 - 2.0 * qs.q50) / (qs.q95 - qs.q05);
    let sign = if nu_beta < 0.0 { -1.0 } else { 1.0 };
    let mut flags = FitFlags::default();

    let (mut alpha, mut beta) = if nu_alpha < NU_ALPHA[0] {
        // at α = 2 the law does not depend on β
        flags.gaussian_boundary = true;
        (2.0, 0.0)
    } else {
        let (a, fa) = bilinear(&NU_ALPHA, &NU_BETA, &PSI1, nu_alpha, nu_beta.abs());
        let (b, _) = bilinear(&NU_ALPHA, &NU_BETA, &PSI2, nu_alpha, nu_beta.abs());
        flags.outside_table = fa;
        (a, sign * b)
    };
    if alpha < 0.5 {
        alpha = 0.5;
        flags.alpha_clamped = true;
    } else if alpha > 2.0 {
        alpha = 2.0;
        flags.alpha_clamped = true;
    }
    if beta.abs() > opts.beta_bound {
        beta = beta.signum() * opts.beta_bound;
        flags.beta_clamped = true;
    }
    let (phi3, _) = bilinear(&ALPHA, &BETA, &PHI3, alpha, beta.abs());
    let (phi5, _) = bilinear(&ALPHA, &BETA, &PHI5, alpha, beta.abs());
    let gamma = iqr / phi3;
    let zeta = qs.q50 + gamma * beta.signum() * phi5;
    Ok(McCullochEstimate { params: StableParams::new(alpha, beta, gamma, zeta)?, flags })
}

pub fn mcculloch_estimate(sample: &[f64]) -> Result<McCullochEstimate> {
    mcculloch_estimate_with(sample, &McCullochOptions::default())
}

pub fn mcculloch_estimate_with(sample: &[f64], opts: &McCullochOptions) -> Result<McCullochEstimate> {
    if sample.len() < MIN_MCCULLOCH_SAMPLE {
        return Err(Error::TooFewObservations { got: sample.len(), required: MIN_MCCULLOCH_SAMPLE });
    }
    mcculloch_from_quantiles_with(&empirical_quantiles(sample)?, opts)
}

/// McCulloch fit in the S0 parametrization.
pub fn mcculloch_fit(sample: &[f64]) -> Result<StableParams> {
    Ok(mcculloch_estimate(sample)?.params)
}

/// Which minimum-size gate applies to a subsample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsampleClass {
    NationalYear,
    RegionYear,
    RegionPooled,
}

impl SubsampleClass {
    pub fn default_gate(&self) -> usize {
        match self {
            SubsampleClass::NationalYear => 10_000,
            SubsampleClass::RegionYear => 5_000,
            SubsampleClass::RegionPooled => 1_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubsampleKey {
    pub variable: String,
    pub year: Option<i32>,
    /// `None` for national subsamples.
    pub region: Option<String>,
}

impl SubsampleKey {
    pub fn national(variable: &str, year: i32) -> Self {
        Self { variable: variable.into(), year: Some(year), region: None }
    }

    pub fn region_year(variable: &str, year: i32, region: &str) -> Self {
        Self { variable: variable.into(), year: Some(year), region: Some(region.into()) }
    }

    pub fn region_pooled(variable: &str, region: &str) -> Self {
        Self { variable: variable.into(), year: None, region: Some(region.into()) }
    }

    pub fn class(&self) -> SubsampleClass {
        match (&self.year, &self.region) {
            (Some(_), None) => SubsampleClass::NationalYear,
            (Some(_), Some(_)) => SubsampleClass::RegionYear,
            (None, _) => SubsampleClass::RegionPooled,
        }
    }

    pub fn year_label(&self) -> String {
        self.year.map_or_else(|| "all".into(), |y| y.to_string())
    }

    pub fn region_label(&self) -> &str {
        self.region.as_deref().unwrap_or("all")
    }

    /// Stream id for seeded work on this subsample.
    pub fn stream(&self) -> u64 {
        crate::rng::key_stream(&self.to_string())
    }
}

impl fmt::Display for SubsampleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.variable, self.year_label(), self.region_label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub key: SubsampleKey,
    pub model: FittedModel,
    pub n: usize,
    pub sids: f64,
    pub aic: f64,
    pub loglik: f64,
    /// Table-clamping conditions from the stable estimator.
    pub flags: FitFlags,
    /// Sample fraction outside the clipped binning support.
    pub outside_mass: f64,
}

impl FitResult {
    pub fn score(&self) -> ModelScore {
        ModelScore { sids: self.sids, aic: self.aic, loglik: self.loglik }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FitOutcome {
    Fitted(FitResult),
    Skipped { key: SubsampleKey, n: usize, required: usize },
}

impl FitOutcome {
    pub fn fitted(&self) -> Option<&FitResult> {
        match self {
            FitOutcome::Fitted(r) => Some(r),
            FitOutcome::Skipped { .. } => None,
        }
    }
}

/// Fits `model` to `values` when the subsample passes its size gate.
pub fn fit_subsample(values: &[f64], key: &SubsampleKey, model: ModelKind) -> Result<FitOutcome> {
    fit_subsample_gated(values, key, model, key.class().default_gate())
}

pub fn fit_subsample_gated(values: &[f64], key: &SubsampleKey, model: ModelKind, gate: usize) -> Result<FitOutcome> {
    fit_subsample_with(values, key, model, gate, &McCullochOptions::default())
}

pub fn fit_subsample_with(
    values: &[f64],
    key: &SubsampleKey,
    model: ModelKind,
    gate: usize,
    opts: &McCullochOptions,
) -> Result<FitOutcome> {
    if values.len() < gate {
        return Ok(FitOutcome::Skipped { key: key.clone(), n: values.len(), required: gate });
    }
    let (fitted, flags) = match model {
        ModelKind::Levy => {
            let est = mcculloch_estimate_with(values, opts)?;
            (FittedModel::Levy(est.params), est.flags)
        }
        ModelKind::Aep => {
            // heavy enough tails push the sample ratios past every AEP shape;
            // comparing models still needs the closest member of the family
            let (params, projected) = match aep::fit_lmoments(values) {
                Ok(p) => (p, false),
                Err(crate::Error::SolverFailure { .. }) => (aep::fit_lmoments_nearest(values)?, true),
                Err(e) => return Err(e),
            };
            (FittedModel::Aep(params), FitFlags { lmoments_projected: projected, ..FitFlags::default() })
        }
    };
    let prepared = fitted.prepare()?;
    let pair = crate::gof::BinnedDensityPair::from_model(values, &prepared, crate::gof::DEFAULT_BINS)?;
    let sids = crate::gof::soofi_id_score(&pair)?;
    let loglik = crate::gof::log_likelihood(&prepared, values)?.value;
    let aic = crate::gof::aic(loglik, crate::model::PARAMETER_COUNT)?;
    Ok(FitOutcome::Fitted(FitResult {
        key: key.clone(),
        model: fitted,
        n: values.len(),
        sids,
        aic,
        loglik,
        flags,
        outside_mass: pair.outside_mass(),
    }))
}

/// Both families fitted to one subsample, with their comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedFit {
    pub levy: FitResult,
    pub aep: FitResult,
    pub comparison: Comparison,
}

/// Fits both models; `Ok(None)` when the gate skips the subsample.
pub fn fit_both(values: &[f64], key: &SubsampleKey, gate: usize) -> Result<Option<PairedFit>> {
    let levy = fit_subsample_gated(values, key, ModelKind::Levy, gate)?;
    let aep = fit_subsample_gated(values, key, ModelKind::Aep, gate)?;
    match (levy, aep) {
        (FitOutcome::Fitted(levy), FitOutcome::Fitted(aep)) => {
            let comparison = Comparison::from_scores(levy.score(), aep.score());
            Ok(Some(PairedFit { levy, aep, comparison }))
        }
        _ => Ok(None),
    }
}
