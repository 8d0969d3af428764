//! The two competing model families behind one interface.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aep::{self, AepParams};
use crate::error::{Error, Result};
use crate::stable::{self, DensityGrid, StableParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Levy,
    Aep,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Levy, ModelKind::Aep];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Levy => "levy",
            ModelKind::Aep => "aep",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "levy" | "stable" => Ok(ModelKind::Levy),
            "aep" => Ok(ModelKind::Aep),
            other => Err(Error::InvalidParameter(format!("unknown model '{other}'"))),
        }
    }
}

/// Fitted parameters of either family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum FittedModel {
    Levy(StableParams),
    Aep(AepParams),
}

/// Both families have four free parameters.
pub const PARAMETER_COUNT: usize = 4;

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            FittedModel::Levy(_) => ModelKind::Levy,
            FittedModel::Aep(_) => ModelKind::Aep,
        }
    }

    /// (α, β, γ, δ) or (κ, h, σ, ξ).
    pub fn values(&self) -> [f64; 4] {
        match self {
            FittedModel::Levy(p) => [p.alpha(), p.beta(), p.gamma(), p.delta()],
            FittedModel::Aep(p) => [p.kappa(), p.h(), p.sigma(), p.xi()],
        }
    }

    /// Evaluator for many queries; tabulates the stable density once.
    pub fn prepare(&self) -> Result<PreparedModel> {
        Ok(match self {
            FittedModel::Levy(p) => PreparedModel::Levy(DensityGrid::new(p)?),
            FittedModel::Aep(p) => PreparedModel::Aep(*p),
        })
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        match self {
            FittedModel::Levy(p) => stable::pdf(p, x),
            FittedModel::Aep(p) => Ok(aep::pdf(p, x)),
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        match self {
            FittedModel::Levy(p) => stable::cdf(p, x),
            FittedModel::Aep(p) => Ok(aep::cdf(p, x)),
        }
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        match self {
            FittedModel::Levy(p) => stable::quantile(p, q),
            FittedModel::Aep(p) => aep::quantile(p, q),
        }
    }
}

#[derive(Debug, Clone)]
pub enum PreparedModel {
    Levy(DensityGrid),
    Aep(AepParams),
}

impl PreparedModel {
    pub fn model(&self) -> FittedModel {
        match self {
            PreparedModel::Levy(g) => FittedModel::Levy(*g.params()),
            PreparedModel::Aep(p) => FittedModel::Aep(*p),
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        match self {
            PreparedModel::Levy(g) => g.pdf(x),
            PreparedModel::Aep(p) => Ok(aep::pdf(p, x)),
        }
    }

    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        match self {
            PreparedModel::Levy(g) => g.log_pdf(x),
            PreparedModel::Aep(p) => Ok(aep::log_pdf(p, x)),
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        match self {
            PreparedModel::Levy(g) => g.cdf(x),
            PreparedModel::Aep(p) => Ok(aep::cdf(p, x)),
        }
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        match self {
            PreparedModel::Levy(g) => g.quantile(q),
            PreparedModel::Aep(p) => aep::quantile(p, q),
        }
    }
}
