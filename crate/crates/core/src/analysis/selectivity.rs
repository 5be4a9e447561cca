//! Selective families, query sequences and blocking activations.
//!
//! All searches enumerate candidate sets in a fixed order (size ascending,
//! then lexicographic), so the returned witness is always the smallest one.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::binomial;
use crate::error::{Error, Result};
use crate::model::{ChannelId, StationId, TransmissionDecision};
use crate::schedules::TransmissionArray;

/// Largest ground set the exhaustive oracles accept.
pub const MAX_ORACLE_N: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetSizes {
    /// Subsets of exactly `k` elements.
    Exactly,
    /// Subsets of `1..=k` elements.
    UpTo,
}

impl SubsetSizes {
    pub(crate) fn sizes(self, k: u32) -> std::ops::RangeInclusive<u32> {
        match self {
            SubsetSizes::Exactly => k..=k,
            SubsetSizes::UpTo => 1..=k,
        }
    }
}

/// A family of subsets of `[n]`, stored as bitmasks (bit `x - 1` for element `x`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFamily {
    n: u32,
    members: Vec<u32>,
}

impl SetFamily {
    pub fn new<I, S>(n: u32, members: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = u32>,
    {
        if n == 0 || n > 32 {
            return Err(Error::invalid(format!(
                "set family ground set [1, {n}] unsupported"
            )));
        }
        let members = members
            .into_iter()
            .map(|set| {
                set.into_iter().try_fold(0u32, |mask, x| {
                    if x == 0 || x > n {
                        Err(Error::invalid(format!("element {x} outside [1, {n}]")))
                    } else {
                        Ok(mask | 1 << (x - 1))
                    }
                })
            })
            .collect::<Result<_>>()?;
        Ok(SetFamily { n, members })
    }

    pub fn singletons(n: u32) -> Result<Self> {
        Self::new(n, (1..=n).map(|x| [x]))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn masks(&self) -> &[u32] {
        &self.members
    }

    pub fn members(&self) -> Vec<BTreeSet<u32>> {
        self.members.iter().map(|&m| mask_to_set(m)).collect()
    }
}

fn mask_to_set(mask: u32) -> BTreeSet<u32> {
    (0..32)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| i + 1)
        .collect()
}

fn to_mask(set: &[u32]) -> u32 {
    set.iter().fold(0, |m, &x| m | 1 << (x - 1))
}

/// A sequence of queries; query `i` is the set of (station, channel) pairs
/// transmitting at step `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySequence {
    n: u32,
    b: u32,
    queries: Vec<BTreeSet<TransmissionDecision>>,
}

impl QuerySequence {
    pub fn new(n: u32, b: u32, queries: Vec<BTreeSet<TransmissionDecision>>) -> Result<Self> {
        for d in queries.iter().flatten() {
            if d.station.0 == 0 || d.station.0 > n || d.channel.0 == 0 || d.channel.0 > b {
                return Err(Error::invalid(format!(
                    "query pair ({}, {}) outside [1, {n}] x [1, {b}]",
                    d.station, d.channel
                )));
            }
        }
        Ok(QuerySequence { n, b, queries })
    }

    /// The queries induced by the first `len` positions of `array` under
    /// simultaneous activation.
    pub fn from_array_prefix(array: &TransmissionArray, len: u64) -> Result<Self> {
        let len = len.min(array.length());
        let queries = (0..len)
            .map(|j| {
                let mut q = BTreeSet::new();
                for u in 1..=array.n() {
                    for beta in 1..=array.b() {
                        if array.bit_unchecked(u, beta, j) {
                            q.insert(TransmissionDecision::new(u, beta));
                        }
                    }
                }
                q
            })
            .collect();
        Self::new(array.n(), array.b(), queries)
    }

    /// One single-channel query per family member, in order.
    pub fn from_family(family: &SetFamily) -> Self {
        let queries = family
            .members()
            .into_iter()
            .map(|set| {
                set.into_iter()
                    .map(|x| TransmissionDecision::new(x, 1))
                    .collect()
            })
            .collect();
        QuerySequence {
            n: family.n,
            b: 1,
            queries,
        }
    }

    /// Every station transmits on channel 1 at every one of `steps` steps.
    pub fn all_transmit(n: u32, steps: usize) -> Self {
        let q: BTreeSet<_> = (1..=n).map(|u| TransmissionDecision::new(u, 1)).collect();
        QuerySequence {
            n,
            b: 1,
            queries: vec![q; steps],
        }
    }

    /// Station `u` transmits alone on channel 1 at step `u - 1`.
    pub fn round_robin(n: u32) -> Self {
        QuerySequence {
            n,
            b: 1,
            queries: (1..=n)
                .map(|u| [TransmissionDecision::new(u, 1)].into_iter().collect())
                .collect(),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn queries(&self) -> &[BTreeSet<TransmissionDecision>] {
        &self.queries
    }

    /// `Q_{i,β}`: stations querying channel `β` at step `i`.
    pub fn channel_set(&self, i: usize, beta: ChannelId) -> BTreeSet<StationId> {
        self.queries[i]
            .iter()
            .filter(|d| d.channel == beta)
            .map(|d| d.station)
            .collect()
    }

    /// The set family formed by `Q_{i,β}` over all steps `i`.
    pub fn channel_family(&self, beta: ChannelId) -> SetFamily {
        SetFamily {
            n: self.n,
            members: (0..self.queries.len())
                .map(|i| {
                    self.channel_set(i, beta)
                        .iter()
                        .fold(0, |m, u| m | 1 << (u.0 - 1))
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum SelectivityVerdict {
    Selective,
    /// No member meets `witness` in exactly one element.
    NotSelective {
        witness: Vec<StationId>,
    },
}

impl SelectivityVerdict {
    pub fn is_selective(&self) -> bool {
        matches!(self, SelectivityVerdict::Selective)
    }
}

fn check_oracle_size(n: u32, k: u32, sizes: SubsetSizes, budget: u128) -> Result<()> {
    if n > MAX_ORACLE_N {
        return Err(Error::invalid(format!(
            "exhaustive oracle supports n <= {MAX_ORACLE_N}, got {n}"
        )));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} outside [1, {n}]")));
    }
    let needed: u128 = sizes.sizes(k).map(|s| binomial(n as u64, s as u64)).sum();
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(())
}

fn candidates(n: u32, k: u32, sizes: SubsetSizes) -> impl Iterator<Item = Vec<u32>> {
    sizes
        .sizes(k)
        .flat_map(move |s| (1..=n).combinations(s as usize))
}

/// Exhaustively checks whether every candidate subset `A` of `[n]` is met
/// by some member in exactly one element.
pub fn check_selective(
    family: &SetFamily,
    k: u32,
    sizes: SubsetSizes,
    budget: u128,
) -> Result<SelectivityVerdict> {
    check_oracle_size(family.n, k, sizes, budget)?;
    for set in candidates(family.n, k, sizes) {
        let a = to_mask(&set);
        if !family.members.iter().any(|&m| (m & a).count_ones() == 1) {
            return Ok(SelectivityVerdict::NotSelective {
                witness: set.into_iter().map(StationId).collect(),
            });
        }
    }
    Ok(SelectivityVerdict::Selective)
}

/// Searches for `k` stations which, activated together at step 0, are never
/// heard during the first `t_limit` queries: at every step and channel they
/// meet the query in zero or at least two stations.
pub fn find_blocking_activation(
    queries: &QuerySequence,
    k: u32,
    t_limit: usize,
    budget: u128,
) -> Result<Option<Vec<StationId>>> {
    check_oracle_size(queries.n, k, SubsetSizes::Exactly, budget)?;
    let steps = t_limit.min(queries.len());
    let masks: Vec<u32> = (0..steps)
        .flat_map(|i| {
            (1..=queries.b).map(move |beta| {
                queries.queries[i]
                    .iter()
                    .filter(|d| d.channel.0 == beta)
                    .fold(0u32, |m, d| m | 1 << (d.station.0 - 1))
            })
        })
        .collect();
    for set in candidates(queries.n, k, SubsetSizes::Exactly) {
        let x = to_mask(&set);
        if masks.iter().all(|&m| (m & x).count_ones() != 1) {
            return Ok(Some(set.into_iter().map(StationId).collect()));
        }
    }
    Ok(None)
}
