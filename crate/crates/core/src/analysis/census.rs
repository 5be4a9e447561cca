//! Stage census `W_i(j)`, the potential Ψ and balanced/light intervals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActivationPattern, TimeStep};
use crate::schedules::{SectionSchedule, StageIndex};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StageCensus {
    pub time: TimeStep,
    /// `|W_i(time)|` for every stage with at least one station.
    pub counts: BTreeMap<StageIndex, u64>,
    /// `|W(time)|`, including exhausted stations.
    pub total_active: u64,
    /// Active stations whose local position is past the last stage.
    pub exhausted: u64,
}

impl StageCensus {
    pub fn count(&self, stage: StageIndex) -> u64 {
        self.counts.get(&stage).copied().unwrap_or(0)
    }

    /// Stations in stages `1..=stage`.
    pub fn count_up_to(&self, stage: StageIndex) -> u64 {
        self.counts.range(..=stage).map(|(_, c)| c).sum()
    }

    pub fn merge(&self, other: &StageCensus) -> StageCensus {
        let mut counts = self.counts.clone();
        for (&s, &c) in &other.counts {
            *counts.entry(s).or_default() += c;
        }
        StageCensus {
            time: self.time,
            counts,
            total_active: self.total_active + other.total_active,
            exhausted: self.exhausted + other.exhausted,
        }
    }
}

pub fn stage_census(
    pattern: &ActivationPattern,
    schedule: &SectionSchedule,
    time: TimeStep,
) -> StageCensus {
    let mut census = StageCensus {
        time,
        ..Default::default()
    };
    for (_, sigma) in pattern.active_at(time) {
        census.total_active += 1;
        match schedule.stage_of_position(time - sigma) {
            Ok(stage) => *census.counts.entry(stage).or_default() += 1,
            Err(_) => census.exhausted += 1,
        }
    }
    census
}

fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// `Ψ = Σ_{ω=1}^{⌈lg k⌉} |W_ω| / 2^ω`.
pub fn psi(census: &StageCensus, k_cap: u64) -> f64 {
    let top = ceil_log2(k_cap);
    if top == 0 {
        return 0.0;
    }
    census
        .counts
        .range(StageIndex(1)..=StageIndex(top))
        .map(|(s, &c)| c as f64 / 2f64.powi(s.0 as i32))
        .sum()
}

/// Upper limit on Ψ in the second light-interval condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LightVariant {
    /// `Ψ ≤ 128 · ω`.
    General,
    /// `Ψ ≤ 128 · lg n`, used with many channels.
    ManyChannels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalClass {
    pub t1: TimeStep,
    pub t2: TimeStep,
    pub omega: StageIndex,
    pub balanced: bool,
    pub light: bool,
    /// Minimum and maximum of Ψ over the interval.
    pub psi_range: (f64, f64),
}

/// Classifies `[t1, t2]` (inclusive) against stage `omega`.
///
/// Balanced: the interval has exactly `φ(ω − 1)` steps and at every step
/// `2^ω ≤ |W_ω| ≤ 2^(ω+2)` while no station is in a later stage. Exhausted
/// stations count as being in a later stage.
///
/// Light: balanced, `|W_1 ∪ … ∪ W_ω| ≤ 2^(ω+4)` at every step, and at least
/// `φ(ω − 2)` steps (0 when `ω < 2`) have `1 ≤ Ψ ≤ limit`.
pub fn classify_interval(
    pattern: &ActivationPattern,
    schedule: &SectionSchedule,
    t1: TimeStep,
    t2: TimeStep,
    omega: StageIndex,
    k_cap: u64,
    variant: LightVariant,
) -> Result<IntervalClass> {
    if t1 > t2 {
        return Err(Error::invalid(format!("empty interval [{t1}, {t2}]")));
    }
    let top = ceil_log2(k_cap);
    if omega.0 == 0 || omega.0 > top {
        return Err(Error::invalid(format!(
            "stage {} outside [1, {top}]",
            omega.0
        )));
    }
    let w = omega.0;
    let size = t2 - t1 + 1;
    let size_ok = schedule.phi(w - 1).map(|p| p == size).unwrap_or(false);
    let psi_needed = if w >= 2 {
        schedule.phi(w - 2).unwrap_or(u64::MAX)
    } else {
        0
    };
    let psi_limit = match variant {
        LightVariant::General => 128.0 * w as f64,
        LightVariant::ManyChannels => 128.0 * (schedule.n() as f64).log2().max(1.0),
    };
    let lo = 2u64.saturating_pow(w);
    let hi = 2u64.saturating_pow(w + 2);
    let light_cap = 2u64.saturating_pow(w + 4);

    let mut every_step_balanced = true;
    let mut union_ok = true;
    let mut psi_hits = 0u64;
    let (mut psi_min, mut psi_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in t1..=t2 {
        let census = stage_census(pattern, schedule, j);
        let in_omega = census.count(omega);
        let later = census
            .counts
            .range(StageIndex(w + 1)..)
            .map(|(_, c)| c)
            .sum::<u64>()
            + census.exhausted;
        every_step_balanced &= lo <= in_omega && in_omega <= hi && later == 0;
        union_ok &= census.count_up_to(omega) <= light_cap;
        let value = psi(&census, k_cap);
        psi_min = psi_min.min(value);
        psi_max = psi_max.max(value);
        if (1.0..=psi_limit).contains(&value) {
            psi_hits += 1;
        }
    }
    let balanced = size_ok && every_step_balanced;
    Ok(IntervalClass {
        t1,
        t2,
        omega,
        balanced,
        light: balanced && union_ok && psi_hits >= psi_needed,
        psi_range: (psi_min, psi_max),
    })
}
