//! Seeded Monte Carlo experiments and their reports.
//!
//! Seeding: trial `i` of an experiment uses `trial_seed(base_seed, i)`
//! (see [`crate::rng`]). From that seed two independent sub-seeds are
//! derived, one for the activation pattern and one for the protocol's coin
//! flips and jamming. Changing `jam_prob` or the overlays therefore never
//! changes the pattern or the protocol draws of any trial.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    deterministic_upper_bounds, verify_waking_small, PatternFamily, WakingVerdict,
};
use crate::error::{Error, Result};
use crate::model::{ActivationPattern, NetworkConfig, StationId, TimeStep};
use crate::protocols::{
    run_channel_screening, run_wakeup_array, screening_round_bound, ScreeningConfig,
    SimulationResult,
};
use crate::rng::{self, Domain};
use crate::schedules::{ScaleConstant, ScheduleKind, SectionSchedule, TransmissionArray};

pub const CSV_HEADER: &str = "trial,seed,wakeup_time,truncated,rounds";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProtocolSpec {
    Screening {
        k: u32,
        epsilon: f64,
    },
    ArrayGeneral {
        #[serde(default)]
        c: ScaleConstant,
        array_seed: u64,
        #[serde(default)]
        length: Option<u64>,
    },
    ArrayModified {
        #[serde(default)]
        c: ScaleConstant,
        array_seed: u64,
        #[serde(default)]
        length: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PatternSpec {
    /// `k` distinct stations chosen uniformly, all activated at step 0.
    Simultaneous { k: u32 },
    /// `k` distinct stations with activation offsets uniform in `[0, window]`,
    /// shifted so the earliest is 0.
    Staggered { window: u64, k: u32 },
    /// The same pattern in every trial.
    Explicit { activations: ActivationPattern },
}

/// A bound to compare wake-up times against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Overlay {
    /// `⌈2e k^(1/b) ln(1/ε)⌉` with the experiment's `b`.
    ScreeningRound {
        k: u32,
        epsilon: f64,
    },
    /// General deterministic shape value (jammed variant when `p > 0`).
    GeneralShape {
        k: u32,
    },
    /// Many-channel deterministic shape value (jammed variant when `p > 0`).
    ModifiedShape {
        k: u32,
    },
    Fixed {
        rounds: f64,
    },
}

impl Overlay {
    pub fn label(&self) -> String {
        match self {
            Overlay::ScreeningRound { k, epsilon } => {
                format!("screening-round(k={k},eps={epsilon})")
            }
            Overlay::GeneralShape { k } => format!("general-shape(k={k})"),
            Overlay::ModifiedShape { k } => format!("modified-shape(k={k})"),
            Overlay::Fixed { rounds } => format!("fixed({rounds})"),
        }
    }

    pub fn evaluate(&self, net: &NetworkConfig) -> Result<Option<f64>> {
        let p = net.jam_prob;
        Ok(match *self {
            Overlay::ScreeningRound { k, epsilon } => {
                Some(screening_round_bound(k, net.b, epsilon)? as f64)
            }
            Overlay::GeneralShape { k } => {
                let u = deterministic_upper_bounds(net.n as u64, k as u64, net.b, p);
                Some(if p > 0.0 {
                    u.general_jammed.unwrap_or(u.general)
                } else {
                    u.general
                })
            }
            Overlay::ModifiedShape { k } => {
                let u = deterministic_upper_bounds(net.n as u64, k as u64, net.b, p);
                if p > 0.0 {
                    u.modified_jammed
                } else {
                    u.modified
                }
            }
            Overlay::Fixed { rounds } => Some(rounds),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputPaths {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub protocol: ProtocolSpec,
    pub net: NetworkConfig,
    pub pattern: PatternSpec,
    pub trials: u64,
    pub base_seed: u64,
    /// Cap for Channel-Screening; arrays stop when their schedules end.
    #[serde(default)]
    pub t_max: Option<u64>,
    #[serde(default)]
    pub overlays: Vec<Overlay>,
    #[serde(default)]
    pub output: OutputPaths,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.net.validate()?;
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        match &self.pattern {
            PatternSpec::Simultaneous { k } | PatternSpec::Staggered { k, .. } => {
                if *k == 0 || *k > self.net.n {
                    return Err(Error::invalid(format!(
                        "pattern k = {k} outside [1, {}]",
                        self.net.n
                    )));
                }
            }
            PatternSpec::Explicit { activations } => activations.validate_for(&self.net)?,
        }
        if let ProtocolSpec::Screening { k, epsilon } = self.protocol {
            if k == 0 {
                return Err(Error::invalid("screening k must be at least 1"));
            }
            screening_round_bound(k, self.net.b, epsilon)?;
        }
        if self.t_max == Some(0) {
            return Err(Error::invalid("t_max must be positive"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The array used by array protocols, or `None` for Channel-Screening.
    pub fn build_array(&self) -> Result<Option<TransmissionArray>> {
        let (kind, c, seed, length) = match self.protocol {
            ProtocolSpec::Screening { .. } => return Ok(None),
            ProtocolSpec::ArrayGeneral {
                c,
                array_seed,
                length,
            } => (ScheduleKind::General, c, array_seed, length),
            ProtocolSpec::ArrayModified {
                c,
                array_seed,
                length,
            } => (ScheduleKind::Modified, c, array_seed, length),
        };
        let schedule = SectionSchedule::new(kind, self.net.n, self.net.b, c)?;
        let length = length.unwrap_or(schedule.span());
        Ok(Some(TransmissionArray::sample_with_length(
            schedule, seed, length,
        )?))
    }
}

/// The activation pattern of one trial, derived from its seed.
pub fn draw_pattern(spec: &PatternSpec, n: u32, trial_seed: u64) -> Result<ActivationPattern> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng::sub_seed(trial_seed, Domain::Pattern));
    match spec {
        PatternSpec::Simultaneous { k } => ActivationPattern::simultaneous(
            sample(&mut rng, n as usize, *k as usize)
                .into_vec()
                .into_iter()
                .map(|i| StationId(i as u32 + 1)),
        ),
        PatternSpec::Staggered { window, k } => {
            let stations = sample(&mut rng, n as usize, *k as usize).into_vec();
            let acts: Vec<_> = stations
                .into_iter()
                .map(|i| (StationId(i as u32 + 1), rng.gen_range(0..=*window)))
                .collect();
            ActivationPattern::anchored(acts)
        }
        PatternSpec::Explicit { activations } => Ok(activations.clone()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub wakeup_time: Option<TimeStep>,
    pub truncated: bool,
    pub rounds: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p50: TimeStep,
    pub p90: TimeStep,
    pub p95: TimeStep,
    pub p99: TimeStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exceedance {
    pub label: String,
    pub bound: Option<f64>,
    /// Trials with `wakeup_time ≥ bound`, truncated trials included.
    pub exceeding: u64,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: u64,
    pub completed: u64,
    pub truncated: u64,
    pub quantiles: Option<Quantiles>,
    pub mean_wakeup_time: Option<f64>,
    pub exceedance: Vec<Exceedance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub summary: Summary,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
    /// Wall-clock time; kept out of the serialized report so that reports
    /// are reproducible byte for byte.
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Nearest-rank quantile of sorted data: the `⌈q·N⌉`-th smallest value.
pub fn nearest_rank(sorted: &[u64], q: f64) -> Option<u64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Some(sorted[rank - 1])
}

pub fn summarize(
    records: &[TrialRecord],
    net: &NetworkConfig,
    overlays: &[Overlay],
) -> Result<Summary> {
    let mut times: Vec<u64> = records.iter().filter_map(|r| r.wakeup_time).collect();
    times.sort_unstable();
    let quantiles = (!times.is_empty()).then(|| Quantiles {
        p50: nearest_rank(&times, 0.50).unwrap(),
        p90: nearest_rank(&times, 0.90).unwrap(),
        p95: nearest_rank(&times, 0.95).unwrap(),
        p99: nearest_rank(&times, 0.99).unwrap(),
    });
    let mean_wakeup_time =
        (!times.is_empty()).then(|| times.iter().sum::<u64>() as f64 / times.len() as f64);
    let exceedance = overlays
        .iter()
        .map(|o| {
            let bound = o.evaluate(net)?;
            let exceeding = bound.map_or(0, |b| {
                records
                    .iter()
                    .filter(|r| r.wakeup_time.is_none_or(|t| t as f64 >= b))
                    .count() as u64
            });
            Ok(Exceedance {
                label: o.label(),
                bound,
                exceeding,
                rate: bound.map(|_| exceeding as f64 / records.len() as f64),
            })
        })
        .collect::<Result<_>>()?;
    Ok(Summary {
        trials: records.len() as u64,
        completed: times.len() as u64,
        truncated: records.iter().filter(|r| r.truncated).count() as u64,
        quantiles,
        mean_wakeup_time,
        exceedance,
    })
}

fn run_trial(
    spec: &ExperimentSpec,
    array: Option<&TransmissionArray>,
    trial: u64,
) -> Result<TrialRecord> {
    let seed = rng::trial_seed(spec.base_seed, trial);
    let pattern = draw_pattern(&spec.pattern, spec.net.n, seed)?;
    let protocol_seed = rng::sub_seed(seed, Domain::Protocol);
    let result: SimulationResult = match (&spec.protocol, array) {
        (ProtocolSpec::Screening { k, epsilon }, _) => {
            let cfg = ScreeningConfig {
                k: *k,
                epsilon: *epsilon,
                t_max: spec.t_max,
                record_trace: false,
            };
            run_channel_screening(&spec.net, &pattern, &cfg, protocol_seed)?
        }
        (_, Some(array)) => run_wakeup_array(&spec.net, &pattern, array, protocol_seed)?,
        (_, None) => unreachable!("array protocols always build an array"),
    };
    Ok(TrialRecord {
        trial,
        seed,
        wakeup_time: result.wakeup_time,
        truncated: result.truncated,
        rounds: result.rounds_executed,
    })
}

/// Runs the experiment and writes the CSV and JSON outputs named in `spec`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let report = simulate_experiment(spec)?;
    write_outputs(&report, &spec.output)?;
    Ok(report)
}

/// Runs the experiment without touching the filesystem.
pub fn simulate_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let start = Instant::now();
    let array = spec.build_array()?;
    let records = (0..spec.trials)
        .into_par_iter()
        .map(|i| run_trial(spec, array.as_ref(), i))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&records, &spec.net, &spec.overlays)?;
    Ok(ExperimentReport {
        spec: spec.clone(),
        summary,
        records,
        elapsed: start.elapsed(),
    })
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let t = r.wakeup_time.map(|t| t.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{}",
                r.trial, r.seed, t, r.truncated, r.rounds
            )
            .expect("writing to a String");
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Wake-up times in rounds (`wakeup_time + 1`) of completed trials.
    pub fn rounds_to_wake(&self) -> impl Iterator<Item = u64> + '_ {
        self.records
            .iter()
            .filter_map(|r| r.wakeup_time.map(|t| t + 1))
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

pub fn write_outputs(report: &ExperimentReport, output: &OutputPaths) -> Result<()> {
    if let Some(csv) = &output.csv {
        write_file(csv, &report.to_csv())?;
    }
    if let Some(json) = &output.json {
        write_file(json, &report.to_json())?;
    }
    Ok(())
}

/// Parses a CSV produced by [`ExperimentReport::to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Config("unexpected CSV header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::Config(format!("malformed CSV row {}: {line:?}", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad());
            }
            Ok(TrialRecord {
                trial: f[0].parse().map_err(|_| bad())?,
                seed: f[1].parse().map_err(|_| bad())?,
                wakeup_time: if f[2].is_empty() {
                    None
                } else {
                    Some(f[2].parse().map_err(|_| bad())?)
                },
                truncated: f[3].parse().map_err(|_| bad())?,
                rounds: f[4].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub report: ExperimentReport,
    /// `(p95(p) + 1) / (p95(0) + 1)`: ratio of 95th-percentile wake-up
    /// times measured in rounds.
    pub p95_ratio: Option<f64>,
}

/// Runs `spec` once per jamming probability with identical trial seeds.
/// The `p = 0` baseline is always computed for the percentile ratio.
pub fn jamming_sweep(spec: &ExperimentSpec, ps: &[f64]) -> Result<Vec<SweepRow>> {
    let at = |p: f64| -> Result<ExperimentReport> {
        let mut s = spec.clone();
        s.net.jam_prob = p;
        s.output = OutputPaths::default();
        simulate_experiment(&s)
    };
    let baseline = at(0.0)?;
    let base_p95 = baseline.summary.quantiles.map(|q| q.p95);
    ps.iter()
        .map(|&p| {
            let report = if p == 0.0 { baseline.clone() } else { at(p)? };
            let p95_ratio = match (report.summary.quantiles, base_p95) {
                (Some(q), Some(b)) => Some((q.p95 + 1) as f64 / (b + 1) as f64),
                _ => None,
            };
            Ok(SweepRow {
                p,
                report,
                p95_ratio,
            })
        })
        .collect()
}

/// Writes one CSV per sweep row (`<stem>-p<index>.<ext>`) and a single JSON
/// document with every row's summary.
pub fn write_sweep_outputs(rows: &[SweepRow], output: &OutputPaths) -> Result<()> {
    if let Some(csv) = &output.csv {
        for (i, row) in rows.iter().enumerate() {
            let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("trials");
            let ext = csv.extension().and_then(|s| s.to_str()).unwrap_or("csv");
            write_file(
                &csv.with_file_name(format!("{stem}-p{i}.{ext}")),
                &row.report.to_csv(),
            )?;
        }
    }
    if let Some(json) = &output.json {
        let mut s = serde_json::to_string_pretty(rows).expect("sweep serializes");
        s.push('\n');
        write_file(json, &s)?;
    }
    Ok(())
}

/// Parameters of the randomized arrays tried by [`generate_and_verify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayParams {
    pub kind: ScheduleKind,
    pub n: u32,
    pub b: u32,
    pub c: ScaleConstant,
    #[serde(default)]
    pub length: Option<u64>,
}

impl ArrayParams {
    pub fn schedule(&self) -> Result<SectionSchedule> {
        SectionSchedule::new(self.kind, self.n, self.b, self.c)
    }

    pub fn sample(&self, seed: u64) -> Result<TransmissionArray> {
        let schedule = self.schedule()?;
        let length = self.length.unwrap_or(schedule.span());
        TransmissionArray::sample_with_length(schedule, seed, length)
    }
}

/// `γ_{min(⌈lg k⌉ + 1, L)}`: the end of the stage by which `k` simultaneously
/// activated stations should have been isolated.
pub fn default_horizon(schedule: &SectionSchedule, k: u32) -> u64 {
    let lg_k = if k <= 1 {
        0
    } else {
        32 - (k - 1).leading_zeros()
    };
    schedule
        .gamma((lg_k + 1).min(schedule.max_stage()))
        .expect("stage index is in range")
}

/// Seed of the `attempt`-th (0-based) array tried by [`generate_and_verify`].
pub fn attempt_seed(base_seed: u64, attempt: u32) -> u64 {
    rng::keyed(base_seed, Domain::ArrayAttempt, &[attempt as u64])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttemptStats {
    pub attempts: u32,
    pub passes: u32,
    pub pass_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenerateOutcome {
    Found {
        array: TransmissionArray,
        array_seed: u64,
        /// 1-based index of the first passing attempt.
        attempt: u32,
        stats: AttemptStats,
    },
    Exhausted {
        last_counterexample: Option<ActivationPattern>,
        stats: AttemptStats,
    },
}

impl GenerateOutcome {
    pub fn stats(&self) -> AttemptStats {
        match self {
            GenerateOutcome::Found { stats, .. } | GenerateOutcome::Exhausted { stats, .. } => {
                *stats
            }
        }
    }
}

/// Samples `attempts` arrays with derived seeds and verifies each one
/// exhaustively against `family`. All attempts are evaluated so that the
/// pass fraction is exact; the first passing array is returned.
pub fn generate_and_verify(
    params: &ArrayParams,
    k: u32,
    horizon: Option<u64>,
    family: PatternFamily,
    attempts: u32,
    base_seed: u64,
    budget: u128,
) -> Result<GenerateOutcome> {
    let schedule = params.schedule()?;
    let horizon = horizon.unwrap_or_else(|| default_horizon(&schedule, k));
    let verdicts = (0..attempts)
        .into_par_iter()
        .map(|a| {
            let array = params.sample(attempt_seed(base_seed, a))?;
            verify_waking_small(&array, k, horizon, family, budget)
        })
        .collect::<Result<Vec<_>>>()?;
    let passes = verdicts.iter().filter(|v| v.is_verified()).count() as u32;
    let stats = AttemptStats {
        attempts,
        passes,
        pass_fraction: if attempts == 0 {
            0.0
        } else {
            passes as f64 / attempts as f64
        },
    };
    match verdicts.iter().position(WakingVerdict::is_verified) {
        Some(i) => {
            let array_seed = attempt_seed(base_seed, i as u32);
            Ok(GenerateOutcome::Found {
                array: params.sample(array_seed)?,
                array_seed,
                attempt: i as u32 + 1,
                stats,
            })
        }
        None => Ok(GenerateOutcome::Exhausted {
            last_counterexample: verdicts.into_iter().last().and_then(|v| match v {
                WakingVerdict::Counterexample { pattern } => Some(pattern),
                WakingVerdict::Verified { .. } => None,
            }),
            stats,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{SubsetSizes, DEFAULT_BUDGET};

    fn screening_spec(k: u32, n: u32, b: u32, trials: u64) -> ExperimentSpec {
        ExperimentSpec {
            protocol: ProtocolSpec::Screening { k, epsilon: 0.05 },
            net: NetworkConfig::new(n, b, 0.0).unwrap(),
            pattern: PatternSpec::Simultaneous { k },
            trials,
            base_seed: 11,
            t_max: None,
            overlays: vec![Overlay::ScreeningRound { k, epsilon: 0.05 }],
            output: OutputPaths::default(),
        }
    }

    #[test]
    fn nearest_rank_quantiles() {
        let v: Vec<u64> = (1..=100).collect();
        assert_eq!(nearest_rank(&v, 0.5), Some(50));
        assert_eq!(nearest_rank(&v, 0.95), Some(95));
        assert_eq!(nearest_rank(&v, 0.99), Some(99));
        assert_eq!(nearest_rank(&[7], 0.99), Some(7));
        assert_eq!(nearest_rank(&[], 0.5), None);
    }

    #[test]
    fn single_trial_k_one() {
        let report = simulate_experiment(&screening_spec(1, 8, 2, 1)).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.records[0].wakeup_time, Some(0));
        assert_eq!(report.summary.quantiles.unwrap().p50, 0);
    }

    #[test]
    fn reports_are_reproducible() {
        let spec = screening_spec(16, 32, 2, 200);
        let a = simulate_experiment(&spec).unwrap();
        let b = simulate_experiment(&spec).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn json_summary_agrees_with_csv() {
        let mut spec = screening_spec(32, 32, 1, 300);
        spec.t_max = Some(40);
        let report = simulate_experiment(&spec).unwrap();
        let rows = parse_csv(&report.to_csv()).unwrap();
        assert_eq!(rows, report.records);
        let parsed: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        let recomputed = summarize(&rows, &spec.net, &spec.overlays).unwrap();
        let from_json: Summary = serde_json::from_value(parsed["summary"].clone()).unwrap();
        assert_eq!(from_json, recomputed);
    }

    #[test]
    fn truncations_are_counted_apart() {
        // k = 1 with two simultaneous stations always collides.
        let mut spec = screening_spec(1, 4, 1, 20);
        spec.pattern = PatternSpec::Simultaneous { k: 2 };
        spec.t_max = Some(10);
        let report = simulate_experiment(&spec).unwrap();
        assert_eq!(report.summary.truncated, 20);
        assert_eq!(report.summary.completed, 0);
        assert_eq!(report.summary.quantiles, None);
        assert_eq!(report.summary.exceedance[0].rate, Some(1.0));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = screening_spec(4, 8, 1, 0);
        assert!(simulate_experiment(&spec).is_err());
        spec.trials = 1;
        spec.pattern = PatternSpec::Simultaneous { k: 9 };
        assert!(simulate_experiment(&spec).is_err());
        assert!(matches!(
            ExperimentSpec::from_json("{"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn patterns_are_seeded() {
        let spec = PatternSpec::Staggered { window: 5, k: 4 };
        let a = draw_pattern(&spec, 16, 9).unwrap();
        assert_eq!(a, draw_pattern(&spec, 16, 9).unwrap());
        assert_eq!(a.len(), 4);
        assert_eq!(a.iter().map(|(_, t)| t).min(), Some(0));
        assert!(a.iter().all(|(_, t)| t <= 5));
    }

    #[test]
    fn sweep_keeps_patterns_paired() {
        let mut spec = screening_spec(8, 16, 2, 100);
        spec.pattern = PatternSpec::Simultaneous { k: 8 };
        let rows = jamming_sweep(&spec, &[0.0, 0.5]).unwrap();
        assert_eq!(
            rows[0].report.to_csv(),
            simulate_experiment(&spec).unwrap().to_csv()
        );
        let seeds = |r: &SweepRow| r.report.records.iter().map(|t| t.seed).collect::<Vec<_>>();
        assert_eq!(seeds(&rows[0]), seeds(&rows[1]));
        assert_eq!(rows[0].p95_ratio, Some(1.0));
    }

    #[test]
    fn small_generate_and_verify() {
        let params = ArrayParams {
            kind: ScheduleKind::General,
            n: 4,
            b: 1,
            c: ScaleConstant::DEFAULT,
            length: None,
        };
        let fam = PatternFamily::Simultaneous {
            sizes: SubsetSizes::Exactly,
        };
        match generate_and_verify(&params, 1, None, fam, 5, 1, DEFAULT_BUDGET).unwrap() {
            GenerateOutcome::Found { attempt, stats, .. } => {
                assert_eq!(attempt, 1);
                assert_eq!(stats.passes, 5);
            }
            other => panic!("unexpected {other:?}"),
        }
        match generate_and_verify(&params, 1, None, fam, 0, 1, DEFAULT_BUDGET).unwrap() {
            GenerateOutcome::Exhausted {
                last_counterexample,
                stats,
            } => {
                assert_eq!(last_counterexample, None);
                assert_eq!(stats.attempts, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn generate_exhaustion_carries_counterexample() {
        // Horizon 0 with k = 2: stage-1 bits are fair coins, but a pair of
        // stations must differ at position 0 for all 6 pairs, which fails.
        let params = ArrayParams {
            kind: ScheduleKind::General,
            n: 4,
            b: 1,
            c: ScaleConstant::DEFAULT,
            length: None,
        };
        let fam = PatternFamily::Simultaneous {
            sizes: SubsetSizes::Exactly,
        };
        match generate_and_verify(&params, 2, Some(0), fam, 3, 1, DEFAULT_BUDGET).unwrap() {
            GenerateOutcome::Exhausted {
                last_counterexample,
                stats,
            } => {
                assert!(last_counterexample.is_some());
                assert_eq!(stats.passes, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn horizon_caps_at_last_stage() {
        let s = SectionSchedule::general(16, 2, ScaleConstant::DEFAULT).unwrap();
        assert_eq!(default_horizon(&s, 4), s.gamma(3).unwrap());
        assert_eq!(default_horizon(&s, 1), s.gamma(1).unwrap());
        assert_eq!(default_horizon(&s, 16), s.gamma(4).unwrap());
    }
}
