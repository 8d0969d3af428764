//! Per-year stable fits of national labour productivity, 1998–2007. Used as
//! ground truth for synthetic panels and round-trip checks.

use heavytail_core::{Result, StableParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub year: i32,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub n: usize,
}

impl ReferenceRow {
    pub fn params(&self) -> Result<StableParams> {
        StableParams::new(self.alpha, self.beta, self.gamma, self.delta)
    }
}

const fn row(year: i32, alpha: f64, beta: f64, gamma: f64, delta: f64, n: usize) -> ReferenceRow {
    ReferenceRow { year, alpha, beta, gamma, delta, n }
}

/// (α, β, γ, δ) in S0 and the subsample size, by year.
pub const LP_ROWS: [ReferenceRow; 10] = [
    row(1998, 1.00, 0.95, 0.11, 0.11, 140_372),
    row(1999, 1.06, 0.95, 0.12, 0.13, 147_492),
    row(2000, 0.97, 0.95, 0.14, 0.14, 145_724),
    row(2001, 1.08, 0.95, 0.15, 0.18, 157_083),
    row(2002, 1.08, 0.95, 0.17, 0.20, 167_723),
    row(2003, 1.04, 0.95, 0.21, 0.28, 11_288),
    row(2004, 1.06, 0.95, 0.20, 0.25, 265_218),
    row(2005, 1.03, 0.95, 0.25, 0.30, 260_200),
    row(2006, 1.00, 0.95, 0.30, 0.36, 287_854),
    row(2007, 0.99, 0.95, 0.36, 0.43, 321_390),
];

pub fn lp_row(year: i32) -> Option<&'static ReferenceRow> {
    LP_ROWS.iter().find(|r| r.year == year)
}
