//! Heavy-tail statistics: Lévy alpha-stable and asymmetric exponential power
//! (AEP) distributions, McCulloch quantile estimation, L-moment fitting and
//! information-theoretic goodness of fit.
//!
//! Stable laws use Nolan's S0 parametrization throughout. Densities are
//! obtained by numerical inversion of the characteristic function; see
//! [`stable`] for the routing between the real-axis Fourier integral and the
//! integral representation used in the tails.

pub mod aep;
pub mod error;
pub mod estimation;
pub mod gof;
pub mod model;
pub mod quad;
pub mod rng;
pub mod stable;

pub use aep::AepParams;
pub use error::{Error, Result};
pub use estimation::{FitOutcome, FitResult, QuantileSummary, SubsampleClass, SubsampleKey};
pub use gof::{BinnedDensityPair, Comparison, ModelScore, Preferred};
pub use model::{FittedModel, ModelKind};
pub use stable::{DensityGrid, StableParams};
