//! Isolated positions and the small-scale waking-array oracle.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::binomial;
use super::selectivity::SubsetSizes;
use crate::error::{Error, Result};
use crate::model::{ActivationPattern, ChannelId, NetworkConfig, StationId, TimeStep};
use crate::schedules::TransmissionArray;

/// Largest `n` for simultaneous-activation enumeration.
pub const MAX_SIMULTANEOUS_N: u32 = 16;
/// Largest `n` and window for staggered enumeration.
pub const MAX_STAGGERED_N: u32 = 8;
pub const MAX_STAGGER_WINDOW: u64 = 3;

/// A `(time, channel)` pair at which exactly one active station has bit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IsolatedPosition {
    pub time: TimeStep,
    pub channel: ChannelId,
    pub station: StationId,
}

fn check_pattern(array: &TransmissionArray, pattern: &ActivationPattern) -> Result<()> {
    pattern.validate_for(&NetworkConfig {
        n: array.n(),
        b: array.b(),
        jam_prob: 0.0,
    })
}

/// The isolated station on channel `beta` at time `t`, if any.
fn isolated_at(
    array: &TransmissionArray,
    pattern: &ActivationPattern,
    t: TimeStep,
    beta: u32,
) -> Option<StationId> {
    let mut found = None;
    for (u, sigma) in pattern.active_at(t) {
        let j = t - sigma;
        if j < array.length() && array.bit_unchecked(u.0, beta, j) {
            if found.is_some() {
                return None;
            }
            found = Some(u);
        }
    }
    found
}

/// Every isolated position with `time ≤ horizon`, sorted by (time, channel).
pub fn scan_isolated(
    array: &TransmissionArray,
    pattern: &ActivationPattern,
    horizon: TimeStep,
) -> Result<Vec<IsolatedPosition>> {
    check_pattern(array, pattern)?;
    let mut out = Vec::new();
    for t in 0..=horizon {
        for beta in 1..=array.b() {
            if let Some(station) = isolated_at(array, pattern, t, beta) {
                out.push(IsolatedPosition {
                    time: t,
                    channel: ChannelId(beta),
                    station,
                });
            }
        }
    }
    Ok(out)
}

/// The earliest isolated position within the horizon.
pub fn first_isolated(
    array: &TransmissionArray,
    pattern: &ActivationPattern,
    horizon: TimeStep,
) -> Result<Option<IsolatedPosition>> {
    check_pattern(array, pattern)?;
    Ok(first_isolated_unchecked(array, pattern, horizon))
}

fn first_isolated_unchecked(
    array: &TransmissionArray,
    pattern: &ActivationPattern,
    horizon: TimeStep,
) -> Option<IsolatedPosition> {
    // Nobody transmits after the last schedule ends.
    let end = horizon.min((pattern.last_activation() + array.length()).saturating_sub(1));
    if array.length() == 0 {
        return None;
    }
    (0..=end).find_map(|t| {
        (1..=array.b()).find_map(|beta| {
            isolated_at(array, pattern, t, beta).map(|station| IsolatedPosition {
                time: t,
                channel: ChannelId(beta),
                station,
            })
        })
    })
}

/// Activation patterns enumerated by [`verify_waking_small`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PatternFamily {
    /// Every candidate subset activated together at step 0.
    Simultaneous { sizes: SubsetSizes },
    /// Every candidate subset with every offset vector in `[0, window]`
    /// whose minimum is 0.
    Staggered { window: u64, sizes: SubsetSizes },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum WakingVerdict {
    Verified { patterns: u64 },
    Counterexample { pattern: ActivationPattern },
}

impl WakingVerdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, WakingVerdict::Verified { .. })
    }
}

fn offset_vectors(len: usize, window: u64) -> impl Iterator<Item = Vec<u64>> {
    (0..len)
        .map(|_| 0..=window)
        .multi_cartesian_product()
        .filter(|v| v.iter().min() == Some(&0))
}

fn pattern_count(n: u32, k: u32, family: PatternFamily) -> u128 {
    match family {
        PatternFamily::Simultaneous { sizes } => {
            sizes.sizes(k).map(|s| binomial(n as u64, s as u64)).sum()
        }
        PatternFamily::Staggered { window, sizes } => sizes
            .sizes(k)
            .map(|s| {
                let offsets =
                    (window as u128 + 1).saturating_pow(s) - (window as u128).saturating_pow(s);
                binomial(n as u64, s as u64).saturating_mul(offsets)
            })
            .sum(),
    }
}

/// Checks that every pattern in `family` (over subsets of at most `k`
/// stations of the array's `n`) has an isolated position at some
/// `time ≤ horizon`. Returns the first failing pattern otherwise.
pub fn verify_waking_small(
    array: &TransmissionArray,
    k: u32,
    horizon: TimeStep,
    family: PatternFamily,
    budget: u128,
) -> Result<WakingVerdict> {
    let n = array.n();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} outside [1, {n}]")));
    }
    let (sizes, window) = match family {
        PatternFamily::Simultaneous { sizes } => {
            if n > MAX_SIMULTANEOUS_N {
                return Err(Error::invalid(format!(
                    "simultaneous enumeration supports n <= {MAX_SIMULTANEOUS_N}, got {n}"
                )));
            }
            (sizes, 0)
        }
        PatternFamily::Staggered { window, sizes } => {
            if n > MAX_STAGGERED_N || window > MAX_STAGGER_WINDOW {
                return Err(Error::invalid(format!(
                    "staggered enumeration supports n <= {MAX_STAGGERED_N} and window <= \
                     {MAX_STAGGER_WINDOW}, got n = {n}, window = {window}"
                )));
            }
            (sizes, window)
        }
    };
    let needed = pattern_count(n, k, family);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut checked = 0u64;
    for s in sizes.sizes(k) {
        for set in (1..=n).combinations(s as usize) {
            for offsets in offset_vectors(set.len(), window) {
                let pattern = ActivationPattern::new(
                    set.iter()
                        .zip(&offsets)
                        .map(|(&u, &o)| (StationId(u), o))
                        .collect(),
                )
                .expect("offsets have minimum 0");
                checked += 1;
                if first_isolated_unchecked(array, &pattern, horizon).is_none() {
                    return Ok(WakingVerdict::Counterexample { pattern });
                }
            }
        }
    }
    Ok(WakingVerdict::Verified { patterns: checked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::DEFAULT_BUDGET;
    use crate::schedules::{ScaleConstant, SectionSchedule};

    fn sched(n: u32, b: u32) -> SectionSchedule {
        SectionSchedule::general(n, b, ScaleConstant::integer(1).unwrap()).unwrap()
    }

    fn rows(n: u32, rows: &[&str]) -> TransmissionArray {
        let len = rows[0].len() as u64;
        TransmissionArray::from_fn(sched(n, 1), len, |u, _, j| {
            rows[(u.0 - 1) as usize].as_bytes()[j as usize] == b'1'
        })
        .unwrap()
    }

    fn simultaneous(n: u32) -> ActivationPattern {
        ActivationPattern::simultaneous((1..=n).map(StationId)).unwrap()
    }

    const EXACT: PatternFamily = PatternFamily::Simultaneous {
        sizes: SubsetSizes::Exactly,
    };

    #[test]
    fn zero_array_has_no_isolated_positions() {
        let a = TransmissionArray::zeros(sched(4, 2), 8).unwrap();
        assert!(scan_isolated(&a, &simultaneous(4), 20).unwrap().is_empty());
    }

    #[test]
    fn lone_bit_is_isolated() {
        let a = TransmissionArray::from_fn(sched(4, 2), 8, |u, beta, j| {
            u.0 == 1 && beta.0 == 1 && j == 0
        })
        .unwrap();
        let p = ActivationPattern::simultaneous([StationId(1)]).unwrap();
        assert_eq!(
            scan_isolated(&a, &p, 10).unwrap(),
            vec![IsolatedPosition {
                time: 0,
                channel: ChannelId(1),
                station: StationId(1)
            }]
        );
    }

    #[test]
    fn collision_then_isolation() {
        let a = rows(3, &["10", "10", "01"]);
        assert_eq!(
            scan_isolated(&a, &simultaneous(3), 5).unwrap(),
            vec![IsolatedPosition {
                time: 1,
                channel: ChannelId(1),
                station: StationId(3)
            }]
        );
        assert_eq!(first_isolated(&a, &simultaneous(3), 0).unwrap(), None);
    }

    #[test]
    fn pattern_outside_array_is_rejected() {
        let a = rows(3, &["10", "10", "01"]);
        let p = ActivationPattern::simultaneous([StationId(4)]).unwrap();
        assert!(scan_isolated(&a, &p, 3).is_err());
    }

    #[test]
    fn round_robin_singletons_verify() {
        let a =
            TransmissionArray::from_fn(sched(4, 1), 4, |u, _, j| j == (u.0 - 1) as u64).unwrap();
        let v = verify_waking_small(&a, 4, 4, EXACT, DEFAULT_BUDGET).unwrap();
        assert_eq!(v, WakingVerdict::Verified { patterns: 1 });
        let all = PatternFamily::Simultaneous {
            sizes: SubsetSizes::UpTo,
        };
        assert_eq!(
            verify_waking_small(&a, 4, 4, all, DEFAULT_BUDGET).unwrap(),
            WakingVerdict::Verified { patterns: 15 }
        );
    }

    #[test]
    fn identical_rows_fail() {
        let a = rows(2, &["0110", "0110"]);
        let v = verify_waking_small(&a, 2, 4, EXACT, DEFAULT_BUDGET).unwrap();
        assert_eq!(
            v,
            WakingVerdict::Counterexample {
                pattern: simultaneous(2)
            }
        );
    }

    #[test]
    fn single_station_needs_only_one_bit() {
        let a = rows(3, &["0001", "0100", "1000"]);
        assert!(verify_waking_small(&a, 1, 3, EXACT, DEFAULT_BUDGET)
            .unwrap()
            .is_verified());
        // station 1's only bit is at position 3
        assert!(!verify_waking_small(&a, 1, 2, EXACT, DEFAULT_BUDGET)
            .unwrap()
            .is_verified());
    }

    #[test]
    fn staggered_family_counts_and_counterexamples() {
        // Identical rows collide under simultaneous activation, but a shift
        // of one step separates them.
        let a = rows(2, &["1100", "1100"]);
        let stag = PatternFamily::Staggered {
            window: 1,
            sizes: SubsetSizes::Exactly,
        };
        match verify_waking_small(&a, 2, 8, stag, DEFAULT_BUDGET).unwrap() {
            WakingVerdict::Counterexample { pattern } => assert_eq!(pattern, simultaneous(2)),
            v => panic!("unexpected {v:?}"),
        }
        let stag2 = PatternFamily::Staggered {
            window: 2,
            sizes: SubsetSizes::Exactly,
        };
        // round robin collides when station 1 starts one step after station 2
        let rr =
            TransmissionArray::from_fn(sched(4, 1), 4, |u, _, j| j == (u.0 - 1) as u64).unwrap();
        match verify_waking_small(&rr, 2, 10, stag2, DEFAULT_BUDGET).unwrap() {
            WakingVerdict::Counterexample { pattern } => {
                assert_eq!(
                    pattern.iter().collect::<Vec<_>>(),
                    vec![(StationId(1), 1), (StationId(2), 0)]
                )
            }
            v => panic!("unexpected {v:?}"),
        }
        let lead = TransmissionArray::from_fn(sched(2, 1), 4, |u, _, _| u.0 == 1).unwrap();
        let v = verify_waking_small(&lead, 2, 10, stag2, DEFAULT_BUDGET).unwrap();
        // one pair, 3^2 - 2^2 offset vectors with minimum 0
        assert_eq!(v, WakingVerdict::Verified { patterns: 5 });
    }

    #[test]
    fn limits_are_enforced() {
        let a = TransmissionArray::zeros(sched(20, 1), 4).unwrap();
        assert!(matches!(
            verify_waking_small(&a, 2, 4, EXACT, DEFAULT_BUDGET),
            Err(Error::InvalidInput(_))
        ));
        let b = TransmissionArray::zeros(sched(12, 1), 4).unwrap();
        assert!(matches!(
            verify_waking_small(&b, 6, 4, EXACT, 100),
            Err(Error::BudgetExceeded {
                needed: 924,
                budget: 100
            })
        ));
        let stag = PatternFamily::Staggered {
            window: 4,
            sizes: SubsetSizes::Exactly,
        };
        let c = TransmissionArray::zeros(sched(8, 1), 4).unwrap();
        assert!(verify_waking_small(&c, 2, 4, stag, DEFAULT_BUDGET).is_err());
        assert!(verify_waking_small(&c, 0, 4, EXACT, DEFAULT_BUDGET).is_err());
    }
}
