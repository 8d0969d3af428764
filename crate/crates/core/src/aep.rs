//! Four-parameter asymmetric exponential power (AEP) distribution.
//!
//! ```text
//! f(x) = κh / (σ(1 + κ²)Γ(1/h)) · exp(−(κ^{sgn(x−ξ)} |x − ξ| / σ)^h)
//! ```
//!
//! The left branch carries mass κ²/(1 + κ²). On either side `(|x − ξ|/s)^h`
//! is Gamma(1/h) distributed, which gives the CDF through the regularized
//! incomplete Gamma function and an exact sampler.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::rng::{open01, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAep")]
pub struct AepParams {
    kappa: f64,
    h: f64,
    sigma: f64,
    xi: f64,
}

#[derive(Deserialize)]
struct RawAep {
    kappa: f64,
    h: f64,
    sigma: f64,
    xi: f64,
}

impl TryFrom<RawAep> for AepParams {
    type Error = Error;

    fn try_from(r: RawAep) -> Result<Self> {
        Self::new(r.kappa, r.h, r.sigma, r.xi)
    }
}

impl AepParams {
    pub fn new(kappa: f64, h: f64, sigma: f64, xi: f64) -> Result<Self> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(kappa) {
            return Err(Error::InvalidParameter(format!("kappa must be positive and finite, got {kappa}")));
        }
        if !positive(h) {
            return Err(Error::InvalidParameter(format!("h must be positive and finite, got {h}")));
        }
        if !positive(sigma) {
            return Err(Error::InvalidParameter(format!("sigma must be positive and finite, got {sigma}")));
        }
        if !xi.is_finite() {
            return Err(Error::InvalidParameter(format!("xi must be finite, got {xi}")));
        }
        Ok(Self { kappa, h, sigma, xi })
    }

    /// Laplace law with location `xi` and scale `sigma`.
    pub fn laplace(sigma: f64, xi: f64) -> Result<Self> {
        Self::new(1.0, 1.0, sigma, xi)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Probability of the branch left of ξ.
    pub fn left_mass(&self) -> f64 {
        let k2 = self.kappa * self.kappa;
        k2 / (1.0 + k2)
    }

    fn log_norm(&self) -> f64 {
        (self.kappa * self.h / (self.sigma * (1.0 + self.kappa * self.kappa))).ln() - ln_gamma(1.0 / self.h)
    }

    /// Scale of the Gamma variable on each side: |x − ξ| = s · T^{1/h}.
    fn side_scale(&self, left: bool) -> f64 {
        if left {
            self.sigma * self.kappa
        } else {
            self.sigma / self.kappa
        }
    }
}

pub fn log_pdf(p: &AepParams, x: f64) -> f64 {
    let d = x - p.xi;
    let k = if d < 0.0 { 1.0 / p.kappa } else { p.kappa };
    p.log_norm() - (k * d.abs() / p.sigma).powf(p.h)
}

pub fn pdf(p: &AepParams, x: f64) -> f64 {
    log_pdf(p, x).exp()
}

pub fn cdf(p: &AepParams, x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    let a = 1.0 / p.h;
    let d = x - p.xi;
    if d < 0.0 {
        let t = (-d / p.side_scale(true)).powf(p.h);
        p.left_mass() * upper_q(a, t)
    } else {
        let t = (d / p.side_scale(false)).powf(p.h);
        1.0 - (1.0 - p.left_mass()) * upper_q(a, t)
    }
}

/// Q(a, t), with the endpoints handled explicitly.
fn upper_q(a: f64, t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t == f64::INFINITY {
        0.0
    } else {
        gamma_ur(a, t)
    }
}

pub fn quantile(p: &AepParams, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Precondition(format!("quantile requires 0 < q < 1, got {q}")));
    }
    let pl = p.left_mass();
    // upper-tail probability of the Gamma variable on the relevant side
    let (left, tail) = if q < pl { (true, q / pl) } else { (false, (1.0 - q) / (1.0 - pl)) };
    let t = gamma_upper_inverse(1.0 / p.h, tail)?;
    let d = p.side_scale(left) * t.powf(1.0 / p.h);
    Ok(if left { p.xi - d } else { p.xi + d })
}

/// Solve Q(a, t) = tail for t ≥ 0 by bracketed Brent iteration on ln t.
fn gamma_upper_inverse(a: f64, tail: f64) -> Result<f64> {
    if tail >= 1.0 {
        return Ok(0.0);
    }
    let g = |v: f64| upper_q(a, v.exp()) - tail;
    let (mut lo, mut hi) = (-5.0f64, 5.0f64);
    while g(lo) < 0.0 {
        lo -= 10.0;
        if lo < -1e4 {
            return Ok(0.0);
        }
    }
    while g(hi) > 0.0 {
        hi += 5.0;
        if hi > 50.0 {
            return Err(Error::RootBracketFailure { q: tail });
        }
    }
    let mut conv = roots::SimpleConvergency { eps: 1e-14, max_iter: 200 };
    roots::find_root_brent(lo, hi, g, &mut conv)
        .map(f64::exp)
        .map_err(|_| Error::RootBracketFailure { q: tail })
}

/// Exact sampler: pick a side by its mass, then draw `T ~ Gamma(1/h)` and
/// place the point at distance `s · T^{1/h}` from ξ.
#[derive(Debug, Clone)]
pub struct AepSampler {
    params: AepParams,
    gamma: Gamma<f64>,
}

impl AepSampler {
    pub fn new(params: AepParams) -> Self {
        let gamma = Gamma::new(1.0 / params.h, 1.0).expect("shape and scale are positive");
        Self { params, gamma }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let p = &self.params;
        let left = open01(rng) < p.left_mass();
        let t: f64 = self.gamma.sample(rng);
        let d = p.side_scale(left) * t.powf(1.0 / p.h);
        if left {
            p.xi - d
        } else {
            p.xi + d
        }
    }
}

pub fn sample(p: &AepParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Precondition("sample size must be positive".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let s = AepSampler::new(*p);
    Ok((0..n).map(|_| s.draw(&mut rng)).collect())
}

/// Unbiased sample L-moments l₁..l₄ from probability-weighted moments.
pub fn sample_lmoments(values: &[f64]) -> Result<[f64; 4]> {
    if values.len() < 4 {
        return Err(Error::TooFewObservations { got: values.len(), required: 4 });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("L-moments require finite values".into()));
    }
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut b = [0.0; 4];
    for (i, v) in x.iter().enumerate() {
        let i = i as f64;
        let w1 = i / (n - 1.0);
        let w2 = w1 * (i - 1.0) / (n - 2.0);
        let w3 = w2 * (i - 2.0) / (n - 3.0);
        b[0] += v;
        b[1] += w1 * v;
        b[2] += w2 * v;
        b[3] += w3 * v;
    }
    for v in b.iter_mut() {
        *v /= n;
    }
    Ok(pwm_to_lmoments(b))
}

fn pwm_to_lmoments(b: [f64; 4]) -> [f64; 4] {
    [
        b[0],
        2.0 * b[1] - b[0],
        6.0 * b[2] - 6.0 * b[1] + b[0],
        20.0 * b[3] - 30.0 * b[2] + 12.0 * b[1] - b[0],
    ]
}

/// Theoretical L-moments λ₁..λ₄.
///
/// Computed as probability-weighted moments β_r = E[X F(X)^r], integrating
/// over the Gamma variable of each branch on a logarithmic scale.
pub fn lmoments(p: &AepParams) -> Result<[f64; 4]> {
    let a = 1.0 / p.h;
    let pl = p.left_mass();
    let lg = ln_gamma(a);
    let opts = QuadOptions::default().with_tol(1e-14, 1e-12).with_panels(16);
    // t = e^v; the Gamma(a) density times |x| ∝ t^{1/h} gives t^{2a} e^{−t}
    let lo = -45.0 / a;
    let hi = (80.0 + 10.0 * a).ln();
    let mut b = [0.0; 4];
    for (r, slot) in b.iter_mut().enumerate() {
        let side = |left: bool| -> Result<f64> {
            let s = p.side_scale(left);
            let f = |v: f64| {
                let t = v.exp();
                let w = (2.0 * a * v - t - lg).exp();
                let q = upper_q(a, t);
                let cdf = if left { pl * q } else { 1.0 - (1.0 - pl) * q };
                w * cdf.powi(r as i32)
            };
            Ok(s * integrate(f, lo, hi, &opts)?.value)
        };
        let left = side(true)?;
        let right = side(false)?;
        *slot = p.xi * if r == 0 { 1.0 } else { 1.0 / (r as f64 + 1.0) } + pl * -left + (1.0 - pl) * right;
    }
    Ok(pwm_to_lmoments(b))
}

/// L-moment fit of all four parameters.
///
/// The ratios τ₃ = λ₃/λ₂ and τ₄ = λ₄/λ₂ depend on (κ, h) alone, so the
/// shape is found first by a two-dimensional solve and σ, ξ then follow
/// from λ₂ and λ₁.
pub fn fit_lmoments(values: &[f64]) -> Result<AepParams> {
    fit_shape(values, true)
}

/// As [`fit_lmoments`], but when the ratios lie outside the attainable region
/// the shape minimising the distance to (τ₃, τ₄) is used instead of failing.
/// σ and ξ still match λ₂ and λ₁ exactly.
pub fn fit_lmoments_nearest(values: &[f64]) -> Result<AepParams> {
    fit_shape(values, false)
}

fn fit_shape(values: &[f64], strict: bool) -> Result<AepParams> {
    if values.len() < MIN_FIT_SIZE {
        return Err(Error::TooFewObservations { got: values.len(), required: MIN_FIT_SIZE });
    }
    let l = sample_lmoments(values)?;
    let failure = |reason: &str, t3: f64, t4: f64| Error::SolverFailure { l2: l[1], t3, t4, reason: reason.into() };
    if !(l[1] > 0.0) {
        return Err(failure("second L-moment is zero", f64::NAN, f64::NAN));
    }
    let (t3, t4) = (l[2] / l[1], l[3] / l[1]);
    let target = [t3, t4];
    let (shape, resid) = solve_shape(target).map_err(|_| failure("shape solver did not converge", t3, t4))?;
    if strict && !(resid < SHAPE_TOL) {
        return Err(failure("L-moment ratios outside the attainable region", t3, t4));
    }
    if !resid.is_finite() {
        return Err(failure("no attainable shape found", t3, t4));
    }
    let unit = AepParams::new(shape[0].exp(), shape[1].exp(), 1.0, 0.0)?;
    let lm = lmoments(&unit)?;
    let sigma = l[1] / lm[1];
    let xi = l[0] - sigma * lm[0];
    AepParams::new(unit.kappa, unit.h, sigma, xi)
}

/// Minimum sample size accepted by [`fit_lmoments`].
pub const MIN_FIT_SIZE: usize = 100;

const SHAPE_TOL: f64 = 1e-9;
const LN_KAPPA_RANGE: (f64, f64) = (-4.0, 4.0);
const LN_H_RANGE: (f64, f64) = (-3.0, 3.5);

fn ratios(v: [f64; 2]) -> Option<[f64; 2]> {
    let p = AepParams::new(v[0].exp(), v[1].exp(), 1.0, 0.0).ok()?;
    let l = lmoments(&p).ok()?;
    Some([l[2] / l[1], l[3] / l[1]])
}

fn in_range(v: [f64; 2]) -> bool {
    (LN_KAPPA_RANGE.0..=LN_KAPPA_RANGE.1).contains(&v[0]) && (LN_H_RANGE.0..=LN_H_RANGE.1).contains(&v[1])
}

fn residual(v: [f64; 2], target: [f64; 2]) -> f64 {
    if !in_range(v) {
        return f64::INFINITY;
    }
    match ratios(v) {
        Some(r) => ((r[0] - target[0]).powi(2) + (r[1] - target[1]).powi(2)).sqrt(),
        None => f64::INFINITY,
    }
}

/// Solve τ(ln κ, ln h) = target; returns the point and its residual norm.
fn solve_shape(target: [f64; 2]) -> Result<([f64; 2], f64)> {
    // coarse start
    let mut best = ([0.0, 0.0], f64::INFINITY);
    for i in 0..9 {
        for j in 0..11 {
            let v = [-2.0 + 0.5 * i as f64, -2.0 + 0.45 * j as f64];
            let r = residual(v, target);
            if r < best.1 {
                best = (v, r);
            }
        }
    }
    let first = newton(best.0, target);
    if first.1 < SHAPE_TOL {
        return Ok(first);
    }
    let start = if first.1 < best.1 { first.0 } else { best.0 };
    let nm = nelder_mead(|v| residual(v, target), start, 0.25, 4000);
    let polished = newton(nm.0, target);
    Ok(if polished.1 < nm.1 { polished } else { nm })
}

fn newton(mut v: [f64; 2], target: [f64; 2]) -> ([f64; 2], f64) {
    let mut r = residual(v, target);
    for _ in 0..60 {
        if r < SHAPE_TOL * 1e-2 || !r.is_finite() {
            break;
        }
        let Some(f0) = ratios(v) else { break };
        let e = [f0[0] - target[0], f0[1] - target[1]];
        let h = 1e-6;
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let mut w = v;
            w[k] += h;
            let Some(fk) = ratios(w) else { return (v, r) };
            jac[0][k] = (fk[0] - f0[0]) / h;
            jac[1][k] = (fk[1] - f0[1]) / h;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let step = [
            (jac[1][1] * e[0] - jac[0][1] * e[1]) / det,
            (-jac[1][0] * e[0] + jac[0][0] * e[1]) / det,
        ];
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let w = [v[0] - lambda * step[0], v[1] - lambda * step[1]];
            let rw = residual(w, target);
            if rw < r {
                v = w;
                r = rw;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (v, r)
}

/// Nelder–Mead simplex minimisation in two dimensions.
fn nelder_mead<F: Fn([f64; 2]) -> f64>(f: F, start: [f64; 2], scale: f64, max_eval: usize) -> ([f64; 2], f64) {
    let mut pts = [start, [start[0] + scale, start[1]], [start[0], start[1] + scale]];
    let mut vals = pts.map(&f);
    let mut evals = 3;
    while evals < max_eval {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|a, b| vals[*a].total_cmp(&vals[*b]));
        pts = idx.map(|i| pts[i]);
        vals = idx.map(|i| vals[i]);
        if (vals[2] - vals[0]).abs() < 1e-15 && vals[0].is_finite() {
            break;
        }
        let c = [(pts[0][0] + pts[1][0]) / 2.0, (pts[0][1] + pts[1][1]) / 2.0];
        let along = |t: f64| [c[0] + t * (pts[2][0] - c[0]), c[1] + t * (pts[2][1] - c[1])];
        let xr = along(-1.0);
        let fr = f(xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(xe);
            evals += 1;
            if fe < fr {
                pts[2] = xe;
                vals[2] = fe;
            } else {
                pts[2] = xr;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            pts[2] = xr;
            vals[2] = fr;
        } else {
            let xc = if fr < vals[2] { along(-0.5) } else { along(0.5) };
            let fc = f(xc);
            evals += 1;
            if fc < vals[2].min(fr) {
                pts[2] = xc;
                vals[2] = fc;
            } else {
                for k in 1..3 {
                    pts[k] = [(pts[k][0] + pts[0][0]) / 2.0, (pts[k][1] + pts[0][1]) / 2.0];
                    vals[k] = f(pts[k]);
                }
                evals += 2;
            }
        }
    }
    let best = (0..3).min_by(|a, b| vals[*a].total_cmp(&vals[*b])).unwrap_or(0);
    (pts[best], vals[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn validation() {
        assert!(AepParams::new(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(AepParams::new(1.0, -1.0, 1.0, 0.0).is_err());
        assert!(AepParams::new(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(AepParams::new(1.0, 1.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn density_examples() {
        let lap = AepParams::laplace(1.0, 0.0).unwrap();
        assert_abs_diff_eq!(pdf(&lap, 0.0), 0.5, epsilon = 1e-15);
        let p = AepParams::new(1.0, 2.0, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(pdf(&p, 0.0), 1.0 / PI.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn laplace_reduction_is_exact() {
        let p = AepParams::laplace(1.7, -0.4).unwrap();
        for i in 0..41 {
            let x = -10.0 + 0.5 * i as f64;
            let exact = (-(x + 0.4f64).abs() / 1.7).exp() / (2.0 * 1.7);
            assert!((pdf(&p, x) - exact).abs() <= 1e-12);
        }
    }

    #[test]
    fn normalization() {
        let p = AepParams::new(0.5, 1.2, 0.3, 0.1).unwrap();
        let opts = QuadOptions::default().with_tol(1e-13, 1e-12);
        let left = integrate(|x| pdf(&p, x), -40.0, 0.1, &opts).unwrap().value;
        let right = integrate(|x| pdf(&p, x), 0.1, 20.0, &opts).unwrap().value;
        assert!((left + right - 1.0).abs() < 1e-6);
        assert!((left - p.left_mass()).abs() < 1e-6);
    }

    #[test]
    fn cdf_examples() {
        let lap = AepParams::laplace(1.0, 0.0).unwrap();
        assert_abs_diff_eq!(cdf(&lap, 0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(cdf(&lap, 1.0), 1.0 - (-1.0f64).exp() / 2.0, epsilon = 1e-14);
        let p = AepParams::new(2.0, 1.0, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(cdf(&p, 0.0), 0.8, epsilon = 1e-15);
        let s = AepParams::new(1.0, 0.7, 2.0, 1.0).unwrap();
        for d in [0.3, 2.0, 9.0] {
            assert_abs_diff_eq!(cdf(&s, 1.0 - d), 1.0 - cdf(&s, 1.0 + d), epsilon = 1e-14);
        }
    }

    #[test]
    fn cdf_matches_integrated_density() {
        let p = AepParams::new(0.6, 1.5, 0.8, 0.2).unwrap();
        let opts = QuadOptions::default().with_tol(1e-14, 1e-12);
        for x in [-3.0, -0.5, 0.2, 1.0, 2.5] {
            let num = integrate(|t| pdf(&p, t), -60.0, x, &opts.with_panels(8)).unwrap().value;
            assert!((num - cdf(&p, x)).abs() < 1e-10, "{x}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let p = AepParams::new(0.45, 0.43, 0.03, 0.24).unwrap();
        for q in [1e-4, 0.01, 0.3, 0.5, 0.8, 0.999] {
            let x = quantile(&p, q).unwrap();
            assert!((cdf(&p, x) - q).abs() < 1e-11, "{q}");
        }
        assert!(quantile(&p, 0.0).is_err());
    }

    #[test]
    fn sampler_examples() {
        let lap = AepParams::laplace(1.0, 0.0).unwrap();
        let xs = sample(&lap, 1_000_000, 3).unwrap();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let mad = xs.iter().map(|x| x.abs()).sum::<f64>() / n;
        assert!(mean.abs() < 0.005, "{mean}");
        assert!((mad - 1.0).abs() < 0.01, "{mad}");
        let p = AepParams::new(2.0, 1.0, 1.0, 0.0).unwrap();
        let xs = sample(&p, 1_000_000, 4).unwrap();
        let below = xs.iter().filter(|x| **x < 0.0).count() as f64 / n;
        assert!((below - 0.8).abs() < 0.002, "{below}");
        assert!(sample(&p, 0, 1).is_err());
        assert_eq!(sample(&p, 10, 9).unwrap(), sample(&p, 10, 9).unwrap());
    }

    #[test]
    fn laplace_lmoments() {
        // Laplace(0, 1): λ₂ = 3/4, τ₃ = 0, τ₄ = 17/72
        let l = lmoments(&AepParams::laplace(1.0, 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(l[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l[1], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(l[2], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l[3] / l[1], 17.0 / 72.0, epsilon = 1e-11);
    }

    #[test]
    fn gaussian_lmoments() {
        // h = 2, κ = 1 is N(0, σ²/2); λ₂ = s/√π and τ₄ ≈ 0.122602
        let l = lmoments(&AepParams::new(1.0, 2.0, 2.0f64.sqrt(), 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(l[1], 1.0 / PI.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(l[3] / l[1], 0.122_601_719_540_890_9, epsilon = 1e-9);
    }

    #[test]
    fn sample_lmoments_match_theory() {
        let p = AepParams::new(0.7, 0.8, 1.3, -0.5).unwrap();
        let xs = sample(&p, 1_000_000, 21).unwrap();
        let l = sample_lmoments(&xs).unwrap();
        let t = lmoments(&p).unwrap();
        for r in 0..4 {
            assert!((l[r] - t[r]).abs() <= 0.01 * t[r].abs().max(t[1]), "r={r}: {} {}", l[r], t[r]);
        }
    }

    #[test]
    fn fit_recovers_laplace() {
        let xs = sample(&AepParams::laplace(1.0, 0.0).unwrap(), 100_000, 5).unwrap();
        let f = fit_lmoments(&xs).unwrap();
        assert!((f.kappa() - 1.0).abs() < 0.02, "{f:?}");
        assert!((f.h() - 1.0).abs() < 0.05, "{f:?}");
        assert!((f.sigma() - 1.0).abs() < 0.02, "{f:?}");
        assert!(f.xi().abs() < 0.01, "{f:?}");
    }

    #[test]
    fn fit_matches_sample_lmoments() {
        let truth = AepParams::new(0.45, 0.43, 0.03, 0.24).unwrap();
        let xs = sample(&truth, 100_000, 8).unwrap();
        let f = fit_lmoments(&xs).unwrap();
        let l = sample_lmoments(&xs).unwrap();
        let t = lmoments(&f).unwrap();
        for r in 0..4 {
            assert!((l[r] - t[r]).abs() < 1e-8 * l[1].max(1.0), "r={r}");
        }
        for (got, want) in [(f.kappa(), 0.45), (f.h(), 0.43), (f.sigma(), 0.03), (f.xi(), 0.24)] {
            assert!((got / want - 1.0).abs() < 0.1, "{f:?}");
        }
    }

    #[test]
    fn degenerate_fits_fail() {
        let flat = vec![3.0; 500];
        assert!(matches!(fit_lmoments(&flat), Err(Error::SolverFailure { .. })));
        assert!(matches!(fit_lmoments(&[1.0; 50]), Err(Error::TooFewObservations { .. })));
        assert!(fit_lmoments_nearest(&flat).is_err());
    }

    #[test]
    fn unattainable_ratios_project() {
        // Pareto quantiles with tail 0.5: τ₃ and τ₄ near 1 are beyond every AEP shape
        let xs: Vec<f64> = (1..=2000).map(|i| (i as f64 / 2001.0).powi(-2)).collect();
        assert!(matches!(fit_lmoments(&xs), Err(Error::SolverFailure { .. })));
        let p = fit_lmoments_nearest(&xs).unwrap();
        assert!(p.h() < 1.0, "{p:?}");
        let l = sample_lmoments(&xs).unwrap();
        let t = lmoments(&p).unwrap();
        assert!((t[1] / l[1] - 1.0).abs() < 1e-9 && (t[0] - l[0]).abs() < 1e-9 * l[1]);
    }

    #[test]
    fn log_density_linear_in_tail_for_h_one() {
        let p = AepParams::new(0.7, 1.0, 1.0, 0.0).unwrap();
        for side in [-1.0, 1.0] {
            let xs: Vec<f64> = (0..10).map(|i| side * (5.0 + i as f64)).collect();
            for w in xs.windows(3) {
                let d2 = log_pdf(&p, w[0]) - 2.0 * log_pdf(&p, w[1]) + log_pdf(&p, w[2]);
                assert!(d2.abs() < 1e-12);
            }
        }
    }
}
