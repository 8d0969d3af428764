//! Chambers–Mallows–Stuck generator, in Weron's corrected form, mapped to S0.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::StableParams;
use crate::error::{Error, Result};
use crate::rng::{open01, stream_rng};

/// Precomputed constants for repeated draws from one law.
#[derive(Debug, Clone, Copy)]
pub struct StableSampler {
    params: StableParams,
    /// B = arctan(β tan(πα/2))/α
    b: f64,
    /// S = (1 + β² tan²(πα/2))^{1/(2α)}
    s: f64,
    zeta: f64,
}

impl StableSampler {
    pub fn new(params: StableParams) -> Self {
        let (alpha, beta) = (params.alpha(), params.beta());
        let (b, s, zeta) = if params.is_alpha_one() {
            (0.0, 1.0, 0.0)
        } else {
            let t = beta * (PI * alpha / 2.0).tan();
            (t.atan() / alpha, (1.0 + t * t).powf(1.0 / (2.0 * alpha)), -t)
        };
        Self { params, b, s, zeta }
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    /// One draw of the standardized S0(α, β, 1, 0) variable.
    fn standard<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let alpha = self.params.alpha();
        let beta = self.params.beta();
        let v = PI * (open01(rng) - 0.5);
        let w: f64 = Exp1.sample(rng);
        if self.params.is_alpha_one() {
            let a = FRAC_PI_2 + beta * v;
            FRAC_2_PI * (a * v.tan() - beta * (FRAC_PI_2 * w * v.cos() / a).ln())
        } else {
            let avb = alpha * (v + self.b);
            let x1 = self.s * avb.sin() / v.cos().powf(1.0 / alpha)
                * ((v - avb).cos() / w).powf((1.0 - alpha) / alpha);
            // S1 draw shifted onto the S0 location
            x1 + self.zeta
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.params.delta() + self.params.gamma() * self.standard(rng)
    }
}

/// `n` independent draws using the ChaCha stream `(seed, 0)`.
pub fn sample(params: &StableParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Precondition("sample size must be positive".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let mut out = vec![0.0; n];
    sample_into(params, &mut rng, &mut out);
    Ok(out)
}

/// Fill `out` with draws from `rng`.
pub fn sample_into<R: Rng + ?Sized>(params: &StableParams, rng: &mut R, out: &mut [f64]) {
    let sampler = StableSampler::new(*params);
    for x in out.iter_mut() {
        *x = sampler.draw(rng);
    }
}
