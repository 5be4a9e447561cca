//! Round semantics of a multi-channel single-hop radio network.
//!
//! A round is evaluated channel by channel: a channel delivers a message iff
//! exactly one station transmits on it and it is not jammed. Silence,
//! collisions and jamming all produce the same [`ChannelFeedback::Nothing`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Global time step, counted from the first spontaneous activation.
pub type TimeStep = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StationId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChannelId(pub u32);

impl fmt::Display for StationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The static world: `n` stations, `b` channels, jamming probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub n: u32,
    pub b: u32,
    #[serde(default)]
    pub jam_prob: f64,
}

impl NetworkConfig {
    pub fn new(n: u32, b: u32, jam_prob: f64) -> Result<Self> {
        let net = NetworkConfig { n, b, jam_prob };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("station count n must be at least 1"));
        }
        if self.b == 0 {
            return Err(Error::invalid("channel count b must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.jam_prob) {
            return Err(Error::invalid(format!(
                "jamming probability {} is outside [0, 1)",
                self.jam_prob
            )));
        }
        Ok(())
    }

    pub fn check_station(&self, u: StationId) -> Result<()> {
        if u.0 == 0 || u.0 > self.n {
            return Err(Error::invalid(format!(
                "station {} outside [1, {}]",
                u.0, self.n
            )));
        }
        Ok(())
    }

    pub fn check_channel(&self, beta: ChannelId) -> Result<()> {
        if beta.0 == 0 || beta.0 > self.b {
            return Err(Error::invalid(format!(
                "channel {} outside [1, {}]",
                beta.0, self.b
            )));
        }
        Ok(())
    }

    pub fn channels(&self) -> impl Iterator<Item = ChannelId> {
        (1..=self.b).map(ChannelId)
    }

    pub fn stations(&self) -> impl Iterator<Item = StationId> {
        (1..=self.n).map(StationId)
    }
}

/// Activation times σ_u chosen by the adversary. The earliest activation is
/// always at time 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    try_from = "Vec<(StationId, TimeStep)>",
    into = "Vec<(StationId, TimeStep)>"
)]
pub struct ActivationPattern {
    activations: BTreeMap<StationId, TimeStep>,
}

impl ActivationPattern {
    pub fn new(activations: BTreeMap<StationId, TimeStep>) -> Result<Self> {
        match activations.values().min() {
            None => Err(Error::invalid("activation pattern activates no station")),
            Some(&0) => {
                if activations.keys().any(|u| u.0 == 0) {
                    return Err(Error::invalid("station ids start at 1"));
                }
                Ok(ActivationPattern { activations })
            }
            Some(&m) => Err(Error::invalid(format!(
                "earliest activation is at {m}; global time starts at the first activation"
            ))),
        }
    }

    /// Shifts arbitrary activation times so that the earliest one is 0.
    pub fn anchored(activations: impl IntoIterator<Item = (StationId, TimeStep)>) -> Result<Self> {
        let map: BTreeMap<_, _> = activations.into_iter().collect();
        let min = map.values().copied().min().unwrap_or(0);
        Self::new(map.into_iter().map(|(u, t)| (u, t - min)).collect())
    }

    pub fn simultaneous(stations: impl IntoIterator<Item = StationId>) -> Result<Self> {
        Self::new(stations.into_iter().map(|u| (u, 0)).collect())
    }

    pub fn validate_for(&self, net: &NetworkConfig) -> Result<()> {
        self.activations
            .keys()
            .try_for_each(|&u| net.check_station(u))
    }

    pub fn sigma(&self, u: StationId) -> Option<TimeStep> {
        self.activations.get(&u).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (StationId, TimeStep)> + '_ {
        self.activations.iter().map(|(&u, &t)| (u, t))
    }

    /// Stations in W(t), i.e. with σ_u ≤ t, in increasing id order.
    pub fn active_at(&self, t: TimeStep) -> impl Iterator<Item = (StationId, TimeStep)> + '_ {
        self.iter().filter(move |&(_, s)| s <= t)
    }

    pub fn len(&self) -> usize {
        self.activations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activations.is_empty()
    }

    pub fn last_activation(&self) -> TimeStep {
        self.activations.values().copied().max().unwrap_or(0)
    }
}

impl TryFrom<Vec<(StationId, TimeStep)>> for ActivationPattern {
    type Error = Error;

    fn try_from(v: Vec<(StationId, TimeStep)>) -> Result<Self> {
        let len = v.len();
        let map: BTreeMap<_, _> = v.into_iter().collect();
        if map.len() != len {
            return Err(Error::invalid("station listed twice in activation pattern"));
        }
        Self::new(map)
    }
}

impl From<ActivationPattern> for Vec<(StationId, TimeStep)> {
    fn from(p: ActivationPattern) -> Self {
        p.activations.into_iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TransmissionDecision {
    pub station: StationId,
    pub channel: ChannelId,
}

impl TransmissionDecision {
    pub fn new(station: u32, channel: u32) -> Self {
        TransmissionDecision {
            station: StationId(station),
            channel: ChannelId(channel),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelFeedback {
    Heard(StationId),
    Nothing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub time: TimeStep,
    pub per_channel: Vec<ChannelFeedback>,
    pub jammed_channels: Vec<ChannelId>,
}

impl RoundOutcome {
    pub fn feedback(&self, beta: ChannelId) -> ChannelFeedback {
        self.per_channel[(beta.0 - 1) as usize]
    }

    /// First channel (lowest index) on which a message was heard.
    pub fn heard(&self) -> Option<(ChannelId, StationId)> {
        self.per_channel
            .iter()
            .enumerate()
            .find_map(|(i, f)| match f {
                ChannelFeedback::Heard(v) => Some((ChannelId(i as u32 + 1), *v)),
                ChannelFeedback::Nothing => None,
            })
    }
}

#[derive(Clone, Copy)]
enum Slot {
    Empty,
    One(StationId),
    Many,
}

/// Evaluates one round. Duplicate decisions for the same (station, channel)
/// count as a single transmission.
pub fn evaluate_round(
    net: &NetworkConfig,
    time: TimeStep,
    decisions: &[TransmissionDecision],
    jammed: &[ChannelId],
) -> Result<RoundOutcome> {
    let mut slots = vec![Slot::Empty; net.b as usize];
    for d in decisions {
        net.check_station(d.station)?;
        net.check_channel(d.channel)?;
        let slot = &mut slots[(d.channel.0 - 1) as usize];
        *slot = match *slot {
            Slot::Empty => Slot::One(d.station),
            Slot::One(v) if v == d.station => Slot::One(v),
            _ => Slot::Many,
        };
    }
    let mut jammed_channels = jammed.to_vec();
    for &beta in &jammed_channels {
        net.check_channel(beta)?;
        slots[(beta.0 - 1) as usize] = Slot::Many;
    }
    jammed_channels.sort_unstable();
    jammed_channels.dedup();
    let per_channel = slots
        .into_iter()
        .map(|s| match s {
            Slot::One(v) => ChannelFeedback::Heard(v),
            _ => ChannelFeedback::Nothing,
        })
        .collect();
    Ok(RoundOutcome {
        time,
        per_channel,
        jammed_channels,
    })
}

/// Channels jammed at `time`: each independently with probability
/// `net.jam_prob`, as a pure function of `(seed, time, channel)`.
///
/// Draws are threshold comparisons of a fixed uniform per (time, channel),
/// so for the same seed the jammed set only grows as `jam_prob` grows.
pub fn draw_jammed_channels(net: &NetworkConfig, time: TimeStep, seed: u64) -> Vec<ChannelId> {
    if net.jam_prob <= 0.0 {
        return Vec::new();
    }
    net.channels()
        .filter(|beta| {
            rng::bernoulli(
                rng::keyed(seed, Domain::Jamming, &[time, beta.0 as u64]),
                net.jam_prob,
            )
        })
        .collect()
}

pub fn is_wakeup(outcome: &RoundOutcome) -> bool {
    outcome.heard().is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn net(n: u32, b: u32) -> NetworkConfig {
        NetworkConfig::new(n, b, 0.0).unwrap()
    }

    fn d(v: u32, beta: u32) -> TransmissionDecision {
        TransmissionDecision::new(v, beta)
    }

    #[test]
    fn singleton_is_heard() {
        let out = evaluate_round(&net(8, 3), 0, &[d(3, 1)], &[]).unwrap();
        assert_eq!(out.per_channel[0], ChannelFeedback::Heard(StationId(3)));
        assert_eq!(out.per_channel[1], ChannelFeedback::Nothing);
        assert_eq!(out.per_channel[2], ChannelFeedback::Nothing);
        assert!(is_wakeup(&out));
    }

    #[test]
    fn collision_is_nothing() {
        let out = evaluate_round(&net(8, 2), 0, &[d(2, 1), d(5, 1)], &[]).unwrap();
        assert_eq!(out.per_channel[0], ChannelFeedback::Nothing);
        assert!(!is_wakeup(&out));
    }

    #[test]
    fn jammed_singleton_is_nothing() {
        let out = evaluate_round(&net(8, 2), 0, &[d(3, 1)], &[ChannelId(1)]).unwrap();
        assert_eq!(out.per_channel[0], ChannelFeedback::Nothing);
        assert_eq!(out.jammed_channels, vec![ChannelId(1)]);
    }

    #[test]
    fn collision_and_success_coexist() {
        let out = evaluate_round(&net(8, 2), 4, &[d(2, 1), d(5, 1), d(7, 2)], &[]).unwrap();
        assert_eq!(out.per_channel[0], ChannelFeedback::Nothing);
        assert_eq!(out.per_channel[1], ChannelFeedback::Heard(StationId(7)));
        assert_eq!(out.heard(), Some((ChannelId(2), StationId(7))));
    }

    #[test]
    fn two_heard_channels_wake() {
        let out = evaluate_round(&net(8, 2), 0, &[d(1, 1), d(4, 2)], &[]).unwrap();
        assert!(is_wakeup(&out));
        assert_eq!(out.per_channel[1], ChannelFeedback::Heard(StationId(4)));
    }

    #[test]
    fn silent_round_is_not_wakeup() {
        let out = evaluate_round(&net(4, 3), 0, &[], &[]).unwrap();
        assert!(!is_wakeup(&out));
    }

    #[test]
    fn out_of_range_ids_are_rejected() {
        assert!(matches!(
            evaluate_round(&net(4, 2), 0, &[d(5, 1)], &[]),
            Err(Error::InvalidInput(_))
        ));
        assert!(evaluate_round(&net(4, 2), 0, &[d(0, 1)], &[]).is_err());
        assert!(evaluate_round(&net(4, 2), 0, &[d(1, 3)], &[]).is_err());
        assert!(evaluate_round(&net(4, 2), 0, &[], &[ChannelId(3)]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(NetworkConfig::new(0, 1, 0.0).is_err());
        assert!(NetworkConfig::new(1, 0, 0.0).is_err());
        assert!(NetworkConfig::new(1, 1, 1.0).is_err());
        assert!(NetworkConfig::new(1, 1, -0.1).is_err());
        assert!(NetworkConfig::new(1, 1, 0.99).is_ok());
    }

    #[test]
    fn pattern_anchoring() {
        let p = ActivationPattern::anchored([(StationId(1), 5), (StationId(2), 7)]).unwrap();
        assert_eq!(p.sigma(StationId(1)), Some(0));
        assert_eq!(p.sigma(StationId(2)), Some(2));
        assert!(ActivationPattern::new([(StationId(1), 3)].into_iter().collect()).is_err());
        assert!(ActivationPattern::new(BTreeMap::new()).is_err());
        assert!(ActivationPattern::simultaneous([StationId(0)]).is_err());
        let back: ActivationPattern =
            serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<ActivationPattern>("[[1,2]]").is_err());
    }

    #[test]
    fn jamming_zero_is_empty_and_deterministic() {
        let quiet = net(4, 4);
        assert!((0..1000).all(|t| draw_jammed_channels(&quiet, t, 9).is_empty()));
        let noisy = NetworkConfig::new(4, 4, 0.5).unwrap();
        for t in 0..100 {
            assert_eq!(
                draw_jammed_channels(&noisy, t, 9),
                draw_jammed_channels(&noisy, t, 9)
            );
        }
    }

    #[test]
    fn jamming_frequency_matches_probability() {
        let noisy = NetworkConfig::new(4, 4, 0.5).unwrap();
        let draws = 100_000u64;
        let mut hits = [0u64; 4];
        for t in 0..draws {
            for beta in draw_jammed_channels(&noisy, t, 12345) {
                hits[(beta.0 - 1) as usize] += 1;
            }
        }
        let sigma = (0.25f64 / draws as f64).sqrt();
        for h in hits {
            let freq = h as f64 / draws as f64;
            assert!((freq - 0.5).abs() <= 3.0 * sigma, "freq {freq}");
        }
    }

    proptest! {
        #[test]
        fn channel_relabeling_commutes(
            decisions in prop::collection::vec((1u32..=5, 1u32..=3), 0..8),
            jammed in prop::collection::vec(1u32..=3, 0..3),
            perm_idx in 0usize..6,
        ) {
            let perms = [[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]];
            let perm = perms[perm_idx];
            let relabel = |c: u32| perm[(c - 1) as usize];
            let nw = net(5, 3);
            let ds: Vec<_> = decisions.iter().map(|&(v, c)| d(v, c)).collect();
            let js: Vec<_> = jammed.iter().map(|&c| ChannelId(c)).collect();
            let base = evaluate_round(&nw, 0, &ds, &js).unwrap();
            let ds2: Vec<_> = decisions.iter().map(|&(v, c)| d(v, relabel(c))).collect();
            let js2: Vec<_> = jammed.iter().map(|&c| ChannelId(relabel(c))).collect();
            let moved = evaluate_round(&nw, 0, &ds2, &js2).unwrap();
            for c in 1..=3 {
                prop_assert_eq!(base.feedback(ChannelId(c)), moved.feedback(ChannelId(relabel(c))));
            }
        }

        #[test]
        fn jamming_never_creates_success(
            decisions in prop::collection::vec((1u32..=4, 1u32..=3), 0..8),
            jammed in prop::collection::vec(1u32..=3, 0..3),
            extra in 1u32..=3,
        ) {
            let nw = net(4, 3);
            let ds: Vec<_> = decisions.iter().map(|&(v, c)| d(v, c)).collect();
            let js: Vec<_> = jammed.iter().map(|&c| ChannelId(c)).collect();
            let mut more = js.clone();
            more.push(ChannelId(extra));
            let a = evaluate_round(&nw, 0, &ds, &js).unwrap();
            let b = evaluate_round(&nw, 0, &ds, &more).unwrap();
            for c in 1..=3 {
                if a.feedback(ChannelId(c)) == ChannelFeedback::Nothing {
                    prop_assert_eq!(b.feedback(ChannelId(c)), ChannelFeedback::Nothing);
                }
            }
            prop_assert_eq!(b.feedback(ChannelId(extra)), ChannelFeedback::Nothing);
        }

        #[test]
        fn anchored_patterns_start_at_zero(times in prop::collection::vec(0u64..1000, 1..10)) {
            let p = ActivationPattern::anchored(
                times.iter().enumerate().map(|(i, &t)| (StationId(i as u32 + 1), t)),
            ).unwrap();
            prop_assert_eq!(p.iter().map(|(_, t)| t).min(), Some(0));
        }
    }
}
