//! Combinatorial diagnostics and exhaustive oracles.

mod bounds;
mod census;
mod isolation;
mod selectivity;

pub use bounds::{deterministic_lower_bound, deterministic_upper_bounds, UpperBounds};
pub use census::{classify_interval, psi, stage_census, IntervalClass, LightVariant, StageCensus};
pub use isolation::{
    first_isolated, scan_isolated, verify_waking_small, IsolatedPosition, PatternFamily,
    WakingVerdict,
};
pub use selectivity::{
    check_selective, find_blocking_activation, QuerySequence, SelectivityVerdict, SetFamily,
    SubsetSizes,
};

/// Default cap on the number of cases an exhaustive oracle may enumerate.
pub const DEFAULT_BUDGET: u128 = 1 << 24;

/// Binomial coefficient, saturating.
pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::binomial;

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(16, 4), 1820);
        assert_eq!(binomial(24, 12), 2_704_156);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(5, 0), 1);
    }
}
