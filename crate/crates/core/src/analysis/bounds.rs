use serde::{Deserialize, Serialize};

use crate::schedules::is_n_large;

/// `(k / 4b) · lg(n / k) − (k + 1) / b`: any deterministic oblivious
/// algorithm needs more than this many steps. May be negative (vacuous).
pub fn deterministic_lower_bound(n: u64, k: u64, b: u32) -> f64 {
    let (n, k, b) = (n as f64, k as f64, b as f64);
    k / (4.0 * b) * (n / k).log2() - (k + 1.0) / b
}

/// Upper-bound shapes with all hidden constants set to 1. Only the growth
/// in `n`, `k`, `b` and `p` is meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBounds {
    /// `k · lg n · lg^(1/b) k`.
    pub general: f64,
    /// `(k / b) · lg n · lg(b lg n)`, present only when `b > lg(128 b lg n)`.
    pub modified: Option<f64>,
    /// `general / lg(1/p)`, present only when `0 < p < 1`.
    pub general_jammed: Option<f64>,
    /// `modified / lg(1/p)`.
    pub modified_jammed: Option<f64>,
}

pub fn deterministic_upper_bounds(n: u64, k: u64, b: u32, p: f64) -> UpperBounds {
    let lg_n = (n as f64).log2();
    let kf = k as f64;
    let bf = b as f64;
    let general = kf * lg_n * (kf.log2()).powf(1.0 / bf);
    let modified = (n <= u32::MAX as u64 && is_n_large(n as u32, b))
        .then(|| kf / bf * lg_n * (bf * lg_n).log2());
    let jam = (p > 0.0 && p < 1.0).then(|| 1.0 / (1.0 / p).log2());
    UpperBounds {
        general,
        modified,
        general_jammed: jam.map(|f| f * general),
        modified_jammed: jam.and_then(|f| modified.map(|m| f * m)),
    }
}
