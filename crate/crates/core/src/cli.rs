//! The `wakeup` command line.
//!
//! Exit codes: 0 on success, 1 on a runtime failure, 2 on a usage error
//! (bad flag or invalid parameter), 3 on an unreadable or malformed config.
//! Errors are reported on stderr as one JSON object per line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    check_selective, deterministic_lower_bound, deterministic_upper_bounds,
    find_blocking_activation, verify_waking_small, PatternFamily, QuerySequence,
    SelectivityVerdict, SetFamily, SubsetSizes, WakingVerdict, DEFAULT_BUDGET,
};
use crate::error::{Error, Result};
use crate::harness::{
    draw_pattern, jamming_sweep, run_experiment, write_sweep_outputs, ExperimentSpec, PatternSpec,
};
use crate::model::{ChannelFeedback, NetworkConfig};
use crate::protocols::{
    run_channel_screening, screening_round_bound, trace_wakeup_array, ScreeningConfig,
    SimulationResult,
};
use crate::schedules::{
    is_n_large, load_array_from_path, save_array_to_path, ScaleConstant, ScheduleKind,
    SectionSchedule, TransmissionArray,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "wakeup",
    version,
    about = "Wake-up protocols on multi-channel radio networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one protocol instance and print a trace summary.
    Simulate(SimulateArgs),
    /// Sample a randomized transmission array and save it.
    GenArray(GenArrayArgs),
    /// Run the exhaustive oracles.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Run a Monte Carlo experiment (or a jamming sweep) from a JSON config.
    Bench(BenchArgs),
    /// Print the closed-form bounds.
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Screening,
    General,
    Modified,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    General,
    Modified,
}

impl From<KindArg> for ScheduleKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::General => ScheduleKind::General,
            KindArg::Modified => ScheduleKind::Modified,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exactly,
    UpTo,
}

impl From<ModeArg> for SubsetSizes {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exactly => SubsetSizes::Exactly,
            ModeArg::UpTo => SubsetSizes::UpTo,
        }
    }
}

fn parse_scale(s: &str) -> std::result::Result<ScaleConstant, String> {
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim().parse(), b.trim().parse()),
        None => (s.trim().parse(), Ok(1)),
    };
    match (num, den) {
        (Ok(n), Ok(d)) => ScaleConstant::new(n, d).map_err(|e| e.to_string()),
        _ => Err(format!(
            "expected an integer or a ratio like 3/2, got {s:?}"
        )),
    }
}

#[derive(Debug, Args)]
struct ArraySource {
    /// Load the array from a file instead of sampling one.
    #[arg(long)]
    array: Option<PathBuf>,
    /// Scaling constant c (integer or ratio).
    #[arg(long, default_value = "4", value_parser = parse_scale)]
    c: ScaleConstant,
    #[arg(long, default_value_t = 0)]
    array_seed: u64,
}

impl ArraySource {
    fn resolve(&self, kind: ScheduleKind, n: u32, b: u32) -> Result<TransmissionArray> {
        match &self.array {
            Some(path) => load_array_from_path(path),
            None => Ok(TransmissionArray::sample(
                SectionSchedule::new(kind, n, b, self.c)?,
                self.array_seed,
            )),
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "screening")]
    protocol: ProtocolArg,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    b: u32,
    /// Activation bound known to Channel-Screening (defaults to --active).
    #[arg(long)]
    k: Option<u32>,
    /// Number of activated stations (defaults to --k, then n).
    #[arg(long)]
    active: Option<u32>,
    /// Activation window; 0 activates everyone at step 0.
    #[arg(long, default_value_t = 0)]
    window: u64,
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long)]
    t_max: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print every round.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    source: ArraySource,
}

#[derive(Debug, Args)]
struct GenArrayArgs {
    #[arg(long, value_enum, default_value = "general")]
    kind: KindArg,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    b: u32,
    #[arg(long, default_value = "4", value_parser = parse_scale)]
    c: ScaleConstant,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Array length; defaults to the full schedule span.
    #[arg(long)]
    length: Option<u64>,
    /// Store every bit instead of only the seed.
    #[arg(long)]
    explicit: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Check whether a set family is (n,k)-selective.
    Selective(SelectiveArgs),
    /// Check that an array isolates a station for every small activation pattern.
    Waking(WakingArgs),
    /// Search for k stations that a query schedule never isolates.
    Blocking(BlockingArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Singletons,
    Sets,
}

#[derive(Debug, Args)]
struct SelectiveArgs {
    #[arg(long, value_enum, default_value = "sets")]
    family: FamilyArg,
    /// Members for `--family sets`, e.g. "1,2;3,4".
    #[arg(long, default_value = "")]
    sets: String,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long, value_enum, default_value = "exactly")]
    mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

#[derive(Debug, Args)]
struct WakingArgs {
    #[arg(long, value_enum, default_value = "general")]
    kind: KindArg,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    b: u32,
    #[arg(long)]
    k: u32,
    /// Last time step searched; defaults to the array length.
    #[arg(long)]
    horizon: Option<u64>,
    /// Enumerate staggered activations within this window.
    #[arg(long)]
    window: Option<u64>,
    #[arg(long, value_enum, default_value = "up-to")]
    mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    #[command(flatten)]
    source: ArraySource,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QueryArg {
    AllTransmit,
    RoundRobin,
    Array,
}

#[derive(Debug, Args)]
struct BlockingArgs {
    #[arg(long, value_enum)]
    schedule: QueryArg,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    b: u32,
    #[arg(long)]
    k: u32,
    /// Number of steps considered; defaults to the whole schedule.
    #[arg(long)]
    t_limit: Option<usize>,
    /// Steps of the all-transmit schedule.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum, default_value = "general")]
    kind: KindArg,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    #[command(flatten)]
    source: ArraySource,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated jamming probabilities for a paired sweep.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<f64>>,
    /// Override the CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Override the JSON output path.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: u64,
    #[arg(long, default_value_t = 1)]
    b: u32,
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
}

/// Runs the CLI with `args` (including the program name).
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    report(err, "usage", &e.to_string());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let (kind, code) = match &e {
                Error::Config(_) => ("config", EXIT_CONFIG),
                Error::InvalidInput(_) | Error::BudgetExceeded { .. } => ("usage", EXIT_USAGE),
                Error::Format { .. } => ("format", EXIT_FAILURE),
                _ => ("runtime", EXIT_FAILURE),
            };
            report(err, kind, &e.to_string());
            code
        }
    }
}

fn report(err: &mut dyn Write, kind: &str, message: &str) {
    let line = serde_json::json!({ "error": kind, "message": message.trim_end() });
    let _ = writeln!(err, "{line}");
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Simulate(a) => simulate(a, out),
        Command::GenArray(a) => gen_array(a, out),
        Command::Verify(v) => match v {
            VerifyCommand::Selective(a) => verify_selective(a, out),
            VerifyCommand::Waking(a) => verify_waking(a, out),
            VerifyCommand::Blocking(a) => verify_blocking(a, out),
        },
        Command::Bench(a) => bench(a, out, err),
        Command::Bounds(a) => bounds(a, out),
    }
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let net = NetworkConfig::new(a.n, a.b, a.p)?;
    let active = a.active.or(a.k).unwrap_or(a.n);
    if active == 0 || active > a.n {
        return Err(Error::invalid(format!(
            "--active {active} outside [1, {}]",
            a.n
        )));
    }
    let pattern_spec = if a.window == 0 {
        PatternSpec::Simultaneous { k: active }
    } else {
        PatternSpec::Staggered {
            window: a.window,
            k: active,
        }
    };
    let pattern = draw_pattern(&pattern_spec, a.n, a.seed)?;
    let result: SimulationResult = match a.protocol {
        ProtocolArg::Screening => {
            let cfg = ScreeningConfig {
                k: a.k.unwrap_or(active),
                epsilon: a.epsilon,
                t_max: a.t_max,
                record_trace: true,
            };
            run_channel_screening(&net, &pattern, &cfg, a.seed)?
        }
        ProtocolArg::General | ProtocolArg::Modified => {
            let kind = if matches!(a.protocol, ProtocolArg::General) {
                ScheduleKind::General
            } else {
                ScheduleKind::Modified
            };
            let array = a.source.resolve(kind, a.n, a.b)?;
            trace_wakeup_array(&net, &pattern, &array, a.seed)?
        }
    };
    let acts: Vec<String> = pattern.iter().map(|(u, t)| format!("{u}@{t}")).collect();
    writeln!(out, "activations: {}", acts.join(" "))?;
    if a.trace {
        for round in result.trace.iter().flatten() {
            let tx: Vec<String> = round
                .decisions
                .iter()
                .map(|d| format!("{}:{}", d.station, d.channel))
                .collect();
            let fb: Vec<String> = round
                .outcome
                .per_channel
                .iter()
                .map(|f| match f {
                    ChannelFeedback::Heard(v) => format!("heard({v})"),
                    ChannelFeedback::Nothing => "-".to_string(),
                })
                .collect();
            writeln!(
                out,
                "t={} tx=[{}] feedback=[{}]",
                round.outcome.time,
                tx.join(" "),
                fb.join(" ")
            )?;
        }
    }
    match (result.wakeup_time, result.heard) {
        (Some(t), Some((beta, v))) => {
            writeln!(out, "woke up at t={t}: station {v} heard on channel {beta}")?
        }
        _ => writeln!(
            out,
            "no wake-up; truncated after {} rounds",
            result.rounds_executed
        )?,
    }
    writeln!(out, "rounds: {}", result.rounds_executed)?;
    Ok(())
}

fn gen_array(a: GenArrayArgs, out: &mut dyn Write) -> Result<()> {
    let schedule = SectionSchedule::new(a.kind.into(), a.n, a.b, a.c)?;
    let length = a.length.unwrap_or(schedule.span());
    let mut array = TransmissionArray::sample_with_length(schedule, a.seed, length)?;
    if a.explicit {
        array = array.materialize()?;
    }
    save_array_to_path(&array, &a.out)?;
    let s = array.schedule();
    let phis: Vec<String> = (0..=s.max_stage() + 1)
        .map(|i| s.phi(i).unwrap().to_string())
        .collect();
    writeln!(
        out,
        "wrote {} array n={} b={} c={} length={} ({}) to {}",
        s.kind(),
        s.n(),
        s.b(),
        s.c(),
        array.length(),
        if array.is_lazy() {
            "seeded"
        } else {
            "explicit"
        },
        a.out.display()
    )?;
    writeln!(out, "phi: {}", phis.join(" "))?;
    let clamped = array.clamped_cells();
    if !clamped.is_empty() {
        writeln!(
            out,
            "clamped probability cells (stage, channel): {}",
            clamped.len()
        )?;
    }
    Ok(())
}

fn parse_sets(text: &str) -> Result<Vec<Vec<u32>>> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|member| {
            member
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::invalid(format!("bad set element {x:?}")))
                })
                .collect()
        })
        .collect()
}

fn verify_selective(a: SelectiveArgs, out: &mut dyn Write) -> Result<()> {
    let family = match a.family {
        FamilyArg::Singletons => SetFamily::singletons(a.n)?,
        FamilyArg::Sets => SetFamily::new(a.n, parse_sets(&a.sets)?)?,
    };
    match check_selective(&family, a.k, a.mode.into(), a.budget)? {
        SelectivityVerdict::Selective => writeln!(out, "selective")?,
        SelectivityVerdict::NotSelective { witness } => {
            let w: Vec<String> = witness.iter().map(ToString::to_string).collect();
            writeln!(out, "not selective; witness {{{}}}", w.join(","))?
        }
    }
    Ok(())
}

fn verify_waking(a: WakingArgs, out: &mut dyn Write) -> Result<()> {
    let array = a.source.resolve(a.kind.into(), a.n, a.b)?;
    let family = match a.window {
        Some(window) => PatternFamily::Staggered {
            window,
            sizes: a.mode.into(),
        },
        None => PatternFamily::Simultaneous {
            sizes: a.mode.into(),
        },
    };
    let horizon = a.horizon.unwrap_or(array.length());
    match verify_waking_small(&array, a.k, horizon, family, a.budget)? {
        WakingVerdict::Verified { patterns } => writeln!(
            out,
            "waking; {patterns} activation patterns checked up to t={horizon}"
        )?,
        WakingVerdict::Counterexample { pattern } => {
            let acts: Vec<String> = pattern.iter().map(|(u, t)| format!("{u}@{t}")).collect();
            writeln!(out, "not waking; counterexample {}", acts.join(" "))?
        }
    }
    Ok(())
}

fn verify_blocking(a: BlockingArgs, out: &mut dyn Write) -> Result<()> {
    let queries = match a.schedule {
        QueryArg::AllTransmit => QuerySequence::all_transmit(a.n, a.steps.unwrap_or(a.n as usize)),
        QueryArg::RoundRobin => QuerySequence::round_robin(a.n),
        QueryArg::Array => {
            let array = a.source.resolve(a.kind.into(), a.n, a.b)?;
            QuerySequence::from_array_prefix(&array, array.length())?
        }
    };
    let t_limit = a.t_limit.unwrap_or(queries.len());
    match find_blocking_activation(&queries, a.k, t_limit, a.budget)? {
        Some(x) => {
            let w: Vec<String> = x.iter().map(ToString::to_string).collect();
            writeln!(out, "blocking set {{{}}}", w.join(","))?
        }
        None => writeln!(out, "no blocking set of size {}", a.k)?,
    }
    Ok(())
}

fn bench(a: BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut spec = ExperimentSpec::load(&a.config)?;
    if a.csv.is_some() {
        spec.output.csv = a.csv;
    }
    if a.json.is_some() {
        spec.output.json = a.json;
    }
    match a.sweep {
        None => {
            let report = run_experiment(&spec)?;
            let s = &report.summary;
            writeln!(
                out,
                "trials: {} completed: {} truncated: {}",
                s.trials, s.completed, s.truncated
            )?;
            if let Some(q) = s.quantiles {
                writeln!(
                    out,
                    "wakeup_time p50={} p90={} p95={} p99={}",
                    q.p50, q.p90, q.p95, q.p99
                )?;
            }
            for e in &s.exceedance {
                match (e.bound, e.rate) {
                    (Some(b), Some(r)) => writeln!(out, "{}: bound {b} exceeded by {r}", e.label)?,
                    _ => writeln!(out, "{}: not applicable", e.label)?,
                }
            }
            writeln!(err, "elapsed: {:.3}s", report.elapsed.as_secs_f64())?;
        }
        Some(ps) => {
            for &p in &ps {
                if !(0.0..1.0).contains(&p) {
                    return Err(Error::invalid(format!(
                        "jamming probability {p} outside [0, 1)"
                    )));
                }
            }
            let rows = jamming_sweep(&spec, &ps)?;
            write_sweep_outputs(&rows, &spec.output)?;
            for row in &rows {
                let p95 = row.report.summary.quantiles.map(|q| q.p95.to_string());
                writeln!(
                    out,
                    "p={} completed={} p95={} ratio={}",
                    row.p,
                    row.report.summary.completed,
                    p95.unwrap_or_else(|| "-".into()),
                    row.p95_ratio
                        .map(|r| format!("{r:.3}"))
                        .unwrap_or_else(|| "-".into())
                )?;
            }
        }
    }
    Ok(())
}

fn bounds(a: BoundsArgs, out: &mut dyn Write) -> Result<()> {
    if a.k == 0 || a.k > a.n || a.b == 0 {
        return Err(Error::invalid("need 1 <= k <= n and b >= 1"));
    }
    if !(0.0..1.0).contains(&a.p) {
        return Err(Error::invalid(format!("p = {} outside [0, 1)", a.p)));
    }
    let lower = deterministic_lower_bound(a.n, a.k, a.b);
    writeln!(
        out,
        "n={} k={} b={} p={} epsilon={}",
        a.n, a.k, a.b, a.p, a.epsilon
    )?;
    if lower > 0.0 {
        writeln!(out, "lower bound (deterministic oblivious): {lower}")?;
    } else {
        writeln!(
            out,
            "lower bound (deterministic oblivious): {lower} (bound vacuous)"
        )?;
    }
    let k32 = u32::try_from(a.k).map_err(|_| Error::invalid("k too large"))?;
    writeln!(
        out,
        "screening rounds (lambda): {}",
        screening_round_bound(k32, a.b, a.epsilon)?
    )?;
    let u = deterministic_upper_bounds(a.n, a.k, a.b, a.p);
    let show = |v: Option<f64>, why: &str| {
        v.map(|x| format!("{x:.3}"))
            .unwrap_or_else(|| format!("n/a ({why})"))
    };
    let many = u32::try_from(a.n)
        .map(|n| is_n_large(n, a.b))
        .unwrap_or(false);
    let many_why = if many { "" } else { "b <= log2(128 b lg n)" };
    writeln!(out, "general shape: {:.3}", u.general)?;
    writeln!(out, "modified shape: {}", show(u.modified, many_why))?;
    writeln!(
        out,
        "general shape, jammed: {}",
        show(u.general_jammed, "p = 0")
    )?;
    let mj_why = if u.modified.is_none() {
        many_why
    } else {
        "p = 0"
    };
    writeln!(
        out,
        "modified shape, jammed: {}",
        show(u.modified_jammed, mj_why)
    )?;
    Ok(())
}
