//! Lévy alpha-stable distribution in Nolan's S0 parametrization.
//!
//! The characteristic function is
//!
//! ```text
//! α ≠ 1: φ(s) = exp(−γ^α|s|^α [1 + iβ tan(πα/2) sgn(s) ((γ|s|)^{1−α} − 1)] + iδs)
//! α = 1: φ(s) = exp(−γ|s| [1 + iβ (2/π) sgn(s) ln(γ|s|)] + iδs)
//! ```
//!
//! This is the same expression as Nolan's published S0 form (the correction
//! term `(γ|s|)^{1−α} − 1` is what makes the family continuous at α = 1).
//!
//! Density and distribution function are obtained numerically, on the
//! standardized variable `z = (x − δ)/γ`:
//!
//! - `|z| ≤ 10`, or close to the mode-shift point ζ = −β tan(πα/2): the
//!   real-axis inverse Fourier integral (Gil-Pelaez for the CDF), adaptive
//!   Gauss–Kronrod.
//! - elsewhere: Zolotarev's integral representation, which is the same
//!   inversion integral taken along its steepest-descent path and stays
//!   accurate deep in the power-law tails.

mod fourier;
mod grid;
mod sampler;
mod zolotarev;

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

pub use grid::DensityGrid;
pub use sampler::{sample, sample_into, StableSampler};

/// Below this distance from one the α = 1 branch of the characteristic
/// function is used.
pub const ALPHA_ONE_TOL: f64 = 1e-6;

/// Standardized half-width of the region handled by real-axis inversion.
pub const CENTRAL_HALF_WIDTH: f64 = 10.0;

/// Probability tolerance guaranteed when inverting the CDF.
pub const QUANTILE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStable")]
pub struct StableParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
}

#[derive(Deserialize)]
struct RawStable {
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
}

impl TryFrom<RawStable> for StableParams {
    type Error = Error;

    fn try_from(r: RawStable) -> Result<Self> {
        Self::new(r.alpha, r.beta, r.gamma, r.delta)
    }
}

impl StableParams {
    /// Rejects α ∉ (0, 2], |β| > 1, γ ≤ 0 and non-finite values.
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 2], got {alpha}")));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!("beta must lie in [-1, 1], got {beta}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be positive and finite, got {gamma}")));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("delta must be finite, got {delta}")));
        }
        Ok(Self { alpha, beta, gamma, delta })
    }

    /// Standard form S0(α, β, 1, 0).
    pub fn standard(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 1.0, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_alpha_one(&self) -> bool {
        (self.alpha - 1.0).abs() < ALPHA_ONE_TOL
    }

    /// Law of `a·X + b`: S0(α, sign(a)β, |a|γ, aδ + b).
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        if a == 0.0 {
            return Err(Error::InvalidParameter("affine scale must be nonzero".into()));
        }
        Self::new(self.alpha, a.signum() * self.beta, a.abs() * self.gamma, a * self.delta + b)
    }

    pub(crate) fn standardize(&self, x: f64) -> f64 {
        (x - self.delta) / self.gamma
    }

    /// ζ = −β tan(πα/2); zero on the α = 1 branch.
    pub(crate) fn zeta(&self) -> f64 {
        if self.is_alpha_one() {
            0.0
        } else {
            -self.beta * (PI * self.alpha / 2.0).tan()
        }
    }

    /// Edge of the support in standardized units for α < 1, |β| = 1.
    fn support_edge(&self) -> Option<(f64, bool)> {
        if self.alpha < 1.0 && !self.is_alpha_one() && self.beta.abs() == 1.0 {
            // β = 1: support [ζ, ∞); β = −1: (−∞, ζ]
            Some((self.zeta(), self.beta > 0.0))
        } else {
            None
        }
    }

    fn outside_support(&self, z: f64) -> bool {
        match self.support_edge() {
            Some((edge, true)) => z <= edge,
            Some((edge, false)) => z >= edge,
            None => false,
        }
    }

    fn use_fourier(&self, z: f64) -> bool {
        if z.abs() <= CENTRAL_HALF_WIDTH {
            return true;
        }
        if self.is_alpha_one() {
            // the Zolotarev α = 1 form needs β ≠ 0; Cauchy tails are closed-form
            return false;
        }
        (z - self.zeta()).abs() < 0.5
    }
}

/// Characteristic function φ(s) = E[exp(isX)].
pub fn char_fn(p: &StableParams, s: f64) -> Complex64 {
    if s == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let gs = p.gamma * s.abs();
    let sgn = s.signum();
    let skew = if p.is_alpha_one() {
        p.beta * FRAC_2_PI * sgn * gs.ln()
    } else {
        // (γ|s|)^{1−α} − 1, kept accurate near α = 1
        let corr = ((1.0 - p.alpha) * gs.ln()).exp_m1();
        p.beta * (PI * p.alpha / 2.0).tan() * sgn * corr
    };
    let scale = if p.is_alpha_one() { gs } else { gs.powf(p.alpha) };
    let exponent = Complex64::new(-scale, -scale * skew + p.delta * s);
    exponent.exp()
}

/// Probability density at `x`.
pub fn pdf(p: &StableParams, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Precondition(format!("pdf requires finite x, got {x}")));
    }
    Ok(standard_pdf(p, p.standardize(x))? / p.gamma)
}

pub(crate) fn standard_pdf(p: &StableParams, z: f64) -> Result<f64> {
    if p.outside_support(z) {
        return Ok(0.0);
    }
    let f = if p.use_fourier(z) {
        fourier::pdf(p.alpha, p.beta, p.is_alpha_one(), z)?
    } else if p.is_alpha_one() && p.beta == 0.0 {
        1.0 / (PI * (1.0 + z * z))
    } else {
        zolotarev::pdf(p.alpha, p.beta, p.is_alpha_one(), z)?
    };
    Ok(f.max(0.0))
}

/// Distribution function at `x`.
pub fn cdf(p: &StableParams, x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Precondition("cdf requires x not NaN".into()));
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    if x == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    standard_cdf(p, p.standardize(x))
}

pub(crate) fn standard_cdf(p: &StableParams, z: f64) -> Result<f64> {
    if let Some((edge, right)) = p.support_edge() {
        if right && z <= edge {
            return Ok(0.0);
        }
        if !right && z >= edge {
            return Ok(1.0);
        }
    }
    let f = if p.use_fourier(z) {
        fourier::cdf(p.alpha, p.beta, p.is_alpha_one(), z)?
    } else if p.is_alpha_one() && p.beta == 0.0 {
        0.5 + z.atan() / PI
    } else {
        zolotarev::cdf(p.alpha, p.beta, p.is_alpha_one(), z)?
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Quantile function: the `x` with `cdf(x) = q`.
///
/// Root-finds on the numerical CDF to [`QUANTILE_TOL`] in probability.
pub fn quantile(p: &StableParams, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Precondition(format!("quantile requires 0 < q < 1, got {q}")));
    }
    Ok(p.delta + p.gamma * standard_quantile(p, q)?)
}

pub(crate) fn standard_quantile(p: &StableParams, q: f64) -> Result<f64> {
    let err = std::cell::RefCell::new(None);
    let g = |z: f64| match standard_cdf(p, z) {
        Ok(v) => v - q,
        Err(e) => {
            *err.borrow_mut() = Some(e);
            0.0
        }
    };
    // bracket outwards from the centre
    let (mut lo, mut hi) = (-1.0, 1.0);
    let (mut glo, mut ghi) = (g(lo), g(hi));
    let mut steps = 0;
    while glo > 0.0 {
        hi = lo;
        ghi = glo;
        lo *= 4.0;
        glo = g(lo);
        steps += 1;
        if steps > 160 || !lo.is_finite() {
            return Err(Error::RootBracketFailure { q });
        }
    }
    while ghi < 0.0 {
        lo = hi;
        glo = ghi;
        hi *= 4.0;
        ghi = g(hi);
        steps += 1;
        if steps > 160 || !hi.is_finite() {
            return Err(Error::RootBracketFailure { q });
        }
    }
    if let Some(e) = err.borrow_mut().take() {
        return Err(e);
    }
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    // Brent on x; the convergence test is on |F(x) − q|
    let mut conv = ProbabilityConvergence { tol: 1e-4 * QUANTILE_TOL, max_iter: 200 };
    let root = roots::find_root_brent(lo, hi, g, &mut conv).map_err(|_| Error::RootBracketFailure { q })?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(root)
}

struct ProbabilityConvergence {
    tol: f64,
    max_iter: usize,
}

impl roots::Convergency<f64> for ProbabilityConvergence {
    fn is_root_found(&mut self, y: f64) -> bool {
        y.abs() < self.tol
    }
    /// The bracket test keeps tails accurate in x, where a probability
    /// residual alone would leave a wide interval.
    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        let scale = x1.abs().max(x2.abs()).max(1.0);
        (x1 - x2).abs() <= 1e-12 * scale
    }
    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter >= self.max_iter
    }
}

/// Constant `C` of the power-law asymptote `C·|x − δ|^{−(α+1)}` on the
/// given side (`right = true` for x → +∞).
pub fn tail_constant(p: &StableParams, right: bool) -> Result<f64> {
    if p.alpha >= 2.0 {
        return Err(Error::Domain("alpha = 2 has Gaussian tails, no power law".into()));
    }
    let a = p.alpha;
    let c_alpha = (PI * a / 2.0).sin() * gamma(a) / PI;
    let side = if right { 1.0 + p.beta } else { 1.0 - p.beta };
    Ok(a * p.gamma.powf(a) * c_alpha * side)
}

/// Power-law tail asymptote of the density.
pub fn tail_density(p: &StableParams, x: f64) -> Result<f64> {
    let c = tail_constant(p, x >= p.delta)?;
    Ok(c * (x - p.delta).abs().powf(-(p.alpha + 1.0)))
}
