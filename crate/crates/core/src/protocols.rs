//! Round-by-round execution of the randomized Channel-Screening protocol
//! and of the oblivious array-driven Wake-Up protocol.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    draw_jammed_channels, evaluate_round, ActivationPattern, ChannelId, NetworkConfig,
    RoundOutcome, StationId, TimeStep, TransmissionDecision,
};
use crate::rng::{self, Domain};
use crate::schedules::TransmissionArray;

/// Multiplier applied to the round bound λ when no explicit cap is given.
pub const DEFAULT_T_MAX_FACTOR: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeningConfig {
    /// Known bound on the number of activated stations.
    pub k: u32,
    /// Target failure probability; only used to derive the default cap.
    pub epsilon: f64,
    /// Simulation cap in time steps; `None` means `64 · λ(k, b, ε)`.
    #[serde(default)]
    pub t_max: Option<u64>,
    #[serde(default)]
    pub record_trace: bool,
}

impl ScreeningConfig {
    pub fn new(k: u32, epsilon: f64) -> Self {
        ScreeningConfig {
            k,
            epsilon,
            t_max: None,
            record_trace: false,
        }
    }

    pub fn with_t_max(mut self, t_max: u64) -> Self {
        self.t_max = Some(t_max);
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn resolved_t_max(&self, b: u32) -> Result<u64> {
        match self.t_max {
            Some(0) => Err(Error::invalid("t_max must be positive")),
            Some(t) => Ok(t),
            None => Ok(DEFAULT_T_MAX_FACTOR * screening_round_bound(self.k, b, self.epsilon)?),
        }
    }
}

/// One simulated round: who transmitted where, and what the channels reported.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRound {
    pub decisions: Vec<TransmissionDecision>,
    pub outcome: RoundOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationResult {
    /// Global time step of the first heard message.
    pub wakeup_time: Option<TimeStep>,
    /// Channel and sender of the first heard message.
    pub heard: Option<(ChannelId, StationId)>,
    pub trace: Option<Vec<TraceRound>>,
    pub rounds_executed: u64,
    pub rng_seed: u64,
    pub truncated: bool,
}

/// `⌈2e · k^(1/b) · ln(1/ε)⌉`, the number of rounds after which
/// Channel-Screening has failed with probability at most `ε`.
pub fn screening_round_bound(k: u32, b: u32, epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon {epsilon} outside (0, 1)")));
    }
    if k == 0 || b == 0 {
        return Err(Error::invalid("k and b must be positive"));
    }
    let lambda = 2.0 * std::f64::consts::E * (k as f64).powf(1.0 / b as f64) * (1.0 / epsilon).ln();
    Ok(lambda.ceil() as u64)
}

/// Per-channel transmission probabilities `k^(-β/b)` for `β = 1..=b`.
pub fn screening_probabilities(k: u32, b: u32) -> Vec<f64> {
    (1..=b)
        .map(|beta| (k as f64).powf(-(beta as f64) / b as f64))
        .collect()
}

/// Appends the Channel-Screening decisions of every station in `active` at
/// time `t`. Each (station, time, channel) draw is keyed independently, so
/// adding channels never changes the draws of existing ones.
pub fn screening_decisions(
    active: impl IntoIterator<Item = StationId>,
    probs: &[f64],
    seed: u64,
    t: TimeStep,
    out: &mut Vec<TransmissionDecision>,
) {
    for u in active {
        for (i, &p) in probs.iter().enumerate() {
            let beta = i as u64 + 1;
            if rng::bernoulli(
                rng::keyed(seed, Domain::Screening, &[u.0 as u64, t, beta]),
                p,
            ) {
                out.push(TransmissionDecision {
                    station: u,
                    channel: ChannelId(beta as u32),
                });
            }
        }
    }
}

struct Runner<'a> {
    net: &'a NetworkConfig,
    seed: u64,
    trace: Option<Vec<TraceRound>>,
    decisions: Vec<TransmissionDecision>,
}

impl<'a> Runner<'a> {
    fn new(net: &'a NetworkConfig, seed: u64, record_trace: bool) -> Self {
        Runner {
            net,
            seed,
            trace: record_trace.then(Vec::new),
            decisions: Vec::new(),
        }
    }

    /// Evaluates the round whose decisions were collected; returns true on wake-up.
    fn step(&mut self, t: TimeStep) -> Result<Option<(ChannelId, StationId)>> {
        let jammed = draw_jammed_channels(self.net, t, self.seed);
        let outcome = evaluate_round(self.net, t, &self.decisions, &jammed)?;
        let heard = outcome.heard();
        if let Some(trace) = &mut self.trace {
            trace.push(TraceRound {
                decisions: std::mem::take(&mut self.decisions),
                outcome,
            });
        }
        self.decisions.clear();
        Ok(heard)
    }

    fn finish(
        self,
        rounds: u64,
        woke: Option<(TimeStep, (ChannelId, StationId))>,
    ) -> SimulationResult {
        SimulationResult {
            wakeup_time: woke.map(|w| w.0),
            heard: woke.map(|w| w.1),
            trace: self.trace,
            rounds_executed: rounds,
            rng_seed: self.seed,
            truncated: woke.is_none(),
        }
    }
}

/// Runs Channel-Screening: every active station transmits on channel `β`
/// with probability `k^(-β/b)`, on all channels concurrently, until some
/// channel delivers a message or `t_max` steps have elapsed.
pub fn run_channel_screening(
    net: &NetworkConfig,
    pattern: &ActivationPattern,
    cfg: &ScreeningConfig,
    seed: u64,
) -> Result<SimulationResult> {
    net.validate()?;
    pattern.validate_for(net)?;
    if cfg.k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let t_max = cfg.resolved_t_max(net.b)?;
    let probs = screening_probabilities(cfg.k, net.b);
    let mut runner = Runner::new(net, seed, cfg.record_trace);
    for t in 0..t_max {
        let mut decisions = std::mem::take(&mut runner.decisions);
        screening_decisions(
            pattern.active_at(t).map(|(u, _)| u),
            &probs,
            seed,
            t,
            &mut decisions,
        );
        runner.decisions = decisions;
        if let Some(heard) = runner.step(t)? {
            return Ok(runner.finish(t + 1, Some((t, heard))));
        }
    }
    Ok(runner.finish(t_max, None))
}

fn check_dimensions(net: &NetworkConfig, array: &TransmissionArray) -> Result<()> {
    if array.n() != net.n || array.b() != net.b {
        return Err(Error::invalid(format!(
            "array is for n={}, b={} but the network has n={}, b={}",
            array.n(),
            array.b(),
            net.n,
            net.b
        )));
    }
    Ok(())
}

/// Runs the oblivious Wake-Up protocol driven by `array`: station `u`
/// transmits on channel `β` at global step `t` iff `T(u, β, t - σ_u) = 1`.
/// Stations fall silent once their local position reaches the array length.
/// `seed` only drives jamming.
pub fn run_wakeup_array(
    net: &NetworkConfig,
    pattern: &ActivationPattern,
    array: &TransmissionArray,
    seed: u64,
) -> Result<SimulationResult> {
    simulate_array(net, pattern, array, seed, false)
}

/// [`run_wakeup_array`] with a full trace of every round.
pub fn trace_wakeup_array(
    net: &NetworkConfig,
    pattern: &ActivationPattern,
    array: &TransmissionArray,
    seed: u64,
) -> Result<SimulationResult> {
    simulate_array(net, pattern, array, seed, true)
}

fn simulate_array(
    net: &NetworkConfig,
    pattern: &ActivationPattern,
    array: &TransmissionArray,
    seed: u64,
    record_trace: bool,
) -> Result<SimulationResult> {
    net.validate()?;
    pattern.validate_for(net)?;
    check_dimensions(net, array)?;
    let len = array.length();
    let end = pattern.last_activation() + len;
    let mut runner = Runner::new(net, seed, record_trace);
    for t in 0..end {
        for (u, sigma) in pattern.active_at(t) {
            let j = t - sigma;
            if j >= len {
                continue;
            }
            for beta in 1..=net.b {
                if array.bit_unchecked(u.0, beta, j) {
                    runner.decisions.push(TransmissionDecision {
                        station: u,
                        channel: ChannelId(beta),
                    });
                }
            }
        }
        if let Some(heard) = runner.step(t)? {
            return Ok(runner.finish(t + 1, Some((t, heard))));
        }
    }
    Ok(runner.finish(end, None))
}
