//! Transmission arrays and their section geometry.
//!
//! Positions of a `(u, β)`-schedule are split into stages of geometrically
//! growing length. Stage `i` covers `[γ_{i-1}, γ_i)` with `γ_0 = 0` and
//! `γ_i = φ(i + 1)`, for `i = 1..=L` where `L = ⌈lg n⌉`.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelId, NetworkConfig, StationId};
use crate::rng::{self, Domain};

/// Slack subtracted before taking a ceiling so that values which are
/// mathematically integral do not round up because of float noise.
const CEIL_EPS: f64 = 1e-9;

/// Largest explicit array (in bits) we are willing to materialize.
pub const MAX_EXPLICIT_BITS: u64 = 1 << 34;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    General,
    Modified,
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleKind::General => f.write_str("general"),
            ScheduleKind::Modified => f.write_str("modified"),
        }
    }
}

/// The scaling constant `c`, stored as a rational so that array files
/// reproduce the exact geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScaleConstant {
    pub num: u32,
    pub den: u32,
}

impl ScaleConstant {
    pub const DEFAULT: ScaleConstant = ScaleConstant { num: 4, den: 1 };

    pub fn new(num: u32, den: u32) -> Result<Self> {
        let c = ScaleConstant { num, den };
        c.validate()?;
        Ok(c)
    }

    pub fn integer(c: u32) -> Result<Self> {
        Self::new(c, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.den == 0 || self.num < self.den {
            return Err(Error::invalid(format!(
                "scaling constant {}/{} must be a rational >= 1",
                self.num, self.den
            )));
        }
        Ok(())
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Default for ScaleConstant {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for ScaleConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// `lg n`, clamped to at least 1 so a one-station network still has a stage.
fn lg(n: u32) -> f64 {
    (n as f64).log2().max(1.0)
}

/// `log2(128 · b · lg n)`.
fn group_log(n: u32, b: u32) -> f64 {
    (128.0 * b as f64 * lg(n)).log2()
}

/// Whether `b > log2(128 · b · lg n)`, the regime of modified arrays.
pub fn is_n_large(n: u32, b: u32) -> bool {
    b as f64 > group_log(n, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StageIndex(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BitProbability {
    pub value: f64,
    /// The raw formula exceeded 1 and was clamped.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionSchedule {
    kind: ScheduleKind,
    n: u32,
    b: u32,
    c: ScaleConstant,
    /// φ(0), φ(1), ..., φ(L + 1).
    phi: Vec<u64>,
}

impl SectionSchedule {
    pub fn new(kind: ScheduleKind, n: u32, b: u32, c: ScaleConstant) -> Result<Self> {
        NetworkConfig::new(n, b, 0.0)?;
        c.validate()?;
        if kind == ScheduleKind::Modified && !is_n_large(n, b) {
            return Err(Error::invalid(format!(
                "modified schedule needs b > log2(128 b lg n); b = {b}, n = {n} gives {:.3}",
                group_log(n, b)
            )));
        }
        let stages = lg(n).ceil() as u32;
        let lg_n = lg(n);
        let cv = c.value();
        let mut phi = Vec::with_capacity(stages as usize + 2);
        phi.push(0);
        for i in 1..=stages + 1 {
            let x = match kind {
                ScheduleKind::General => {
                    cv * 2f64.powi(i as i32) * (i as f64).powf(1.0 / b as f64) * lg_n
                }
                ScheduleKind::Modified => {
                    cv * (2f64.powi(i as i32) / b as f64) * lg_n * group_log(n, b)
                }
            };
            if !x.is_finite() || x > u64::MAX as f64 / 2.0 {
                return Err(Error::invalid("section boundary overflows"));
            }
            phi.push((x - CEIL_EPS).ceil() as u64);
        }
        if let Some(w) = phi.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "section boundaries are not strictly increasing at i = {w}: {:?}",
                phi
            )));
        }
        Ok(SectionSchedule { kind, n, b, c, phi })
    }

    pub fn general(n: u32, b: u32, c: ScaleConstant) -> Result<Self> {
        Self::new(ScheduleKind::General, n, b, c)
    }

    pub fn modified(n: u32, b: u32, c: ScaleConstant) -> Result<Self> {
        Self::new(ScheduleKind::Modified, n, b, c)
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn c(&self) -> ScaleConstant {
        self.c
    }

    /// Number of stages `L = ⌈lg n⌉`.
    pub fn max_stage(&self) -> u32 {
        self.phi.len() as u32 - 2
    }

    pub fn phi(&self, i: u32) -> Result<u64> {
        self.phi.get(i as usize).copied().ok_or_else(|| {
            Error::invalid(format!(
                "phi index {i} outside [0, {}]",
                self.max_stage() + 1
            ))
        })
    }

    /// `γ_0 = 0`, `γ_i = φ(i + 1)` for `1 ≤ i ≤ L`.
    pub fn gamma(&self, i: u32) -> Result<u64> {
        if i == 0 {
            Ok(0)
        } else if i <= self.max_stage() {
            self.phi(i + 1)
        } else {
            Err(Error::invalid(format!(
                "gamma index {i} outside [0, {}]",
                self.max_stage()
            )))
        }
    }

    /// Total number of positions covered by all stages, `γ_L = φ(L + 1)`.
    pub fn span(&self) -> u64 {
        *self.phi.last().expect("phi has at least two entries")
    }

    pub fn stage_range(&self, stage: StageIndex) -> Result<Range<u64>> {
        self.check_stage(stage)?;
        Ok(self.gamma(stage.0 - 1)?..self.gamma(stage.0)?)
    }

    pub fn stage_of_position(&self, j: u64) -> Result<StageIndex> {
        if j >= self.span() {
            return Err(Error::OutOfSchedule {
                position: j,
                length: self.span(),
            });
        }
        // γ_1..γ_L are phi[2..]; count the boundaries at or below j.
        let passed = self.phi[2..].partition_point(|&g| g <= j);
        Ok(StageIndex(passed as u32 + 1))
    }

    /// Modulus of the channel grouping `β* = β mod m` for modified arrays.
    pub fn channel_modulus(&self) -> u32 {
        group_log(self.n, self.b).ceil() as u32
    }

    fn check_stage(&self, stage: StageIndex) -> Result<()> {
        if stage.0 == 0 || stage.0 > self.max_stage() {
            return Err(Error::invalid(format!(
                "stage {} outside [1, {}]",
                stage.0,
                self.max_stage()
            )));
        }
        Ok(())
    }

    fn check_channel(&self, beta: ChannelId) -> Result<()> {
        if beta.0 == 0 || beta.0 > self.b {
            return Err(Error::invalid(format!(
                "channel {} outside [1, {}]",
                beta.0, self.b
            )));
        }
        Ok(())
    }

    /// `2^-i · i^(-β/b)` for regular arrays.
    pub fn regular_bit_probability(&self, stage: StageIndex, beta: ChannelId) -> Result<f64> {
        if self.kind != ScheduleKind::General {
            return Err(Error::invalid(
                "regular bit probability needs a general schedule",
            ));
        }
        self.check_stage(stage)?;
        self.check_channel(beta)?;
        let i = stage.0 as f64;
        Ok(2f64.powi(-(stage.0 as i32)) * i.powf(-(beta.0 as f64) / self.b as f64))
    }

    /// `b · 2^(-i - β*)` for modified arrays, clamped to 1.
    pub fn modified_bit_probability(
        &self,
        stage: StageIndex,
        beta: ChannelId,
    ) -> Result<BitProbability> {
        if self.kind != ScheduleKind::Modified {
            return Err(Error::invalid(
                "modified bit probability needs a modified schedule",
            ));
        }
        self.check_stage(stage)?;
        self.check_channel(beta)?;
        let beta_star = beta.0 % self.channel_modulus();
        let raw = self.b as f64 * 2f64.powi(-((stage.0 + beta_star) as i32));
        Ok(BitProbability {
            value: raw.min(1.0),
            clamped: raw > 1.0,
        })
    }

    pub fn bit_probability(&self, stage: StageIndex, beta: ChannelId) -> Result<BitProbability> {
        match self.kind {
            ScheduleKind::General => Ok(BitProbability {
                value: self.regular_bit_probability(stage, beta)?,
                clamped: false,
            }),
            ScheduleKind::Modified => self.modified_bit_probability(stage, beta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum BitSource {
    Lazy { seed: u64 },
    Explicit { bytes: Vec<u8> },
}

/// Bits `T(u, β, j)` for stations `1..=n`, channels `1..=b` and positions
/// `0..length`.
#[derive(Debug, Clone)]
pub struct TransmissionArray {
    schedule: SectionSchedule,
    length: u64,
    source: BitSource,
    /// Bernoulli parameter per (stage, channel), row-major by stage.
    probs: Vec<f64>,
}

impl PartialEq for TransmissionArray {
    fn eq(&self, other: &Self) -> bool {
        self.schedule == other.schedule
            && self.length == other.length
            && self.source == other.source
    }
}

fn explicit_bits(schedule: &SectionSchedule, length: u64) -> Result<u64> {
    (schedule.n as u64)
        .checked_mul(schedule.b as u64)
        .and_then(|x| x.checked_mul(length))
        .filter(|&bits| bits <= MAX_EXPLICIT_BITS)
        .ok_or_else(|| Error::invalid("explicit array is too large to materialize"))
}

impl TransmissionArray {
    fn build(schedule: SectionSchedule, length: u64, source: BitSource) -> Result<Self> {
        if length > schedule.span() {
            return Err(Error::invalid(format!(
                "array length {length} exceeds the schedule span {}",
                schedule.span()
            )));
        }
        let mut probs = Vec::with_capacity((schedule.max_stage() * schedule.b) as usize);
        for i in 1..=schedule.max_stage() {
            for beta in 1..=schedule.b {
                probs.push(
                    schedule
                        .bit_probability(StageIndex(i), ChannelId(beta))?
                        .value,
                );
            }
        }
        Ok(TransmissionArray {
            schedule,
            length,
            source,
            probs,
        })
    }

    /// A randomized array of full length whose bits are derived from `seed`.
    pub fn sample(schedule: SectionSchedule, seed: u64) -> Self {
        let length = schedule.span();
        Self::build(schedule, length, BitSource::Lazy { seed }).expect("full span is valid")
    }

    pub fn sample_with_length(schedule: SectionSchedule, seed: u64, length: u64) -> Result<Self> {
        Self::build(schedule, length, BitSource::Lazy { seed })
    }

    /// An explicit array filled by `f(u, β, j)`.
    pub fn from_fn(
        schedule: SectionSchedule,
        length: u64,
        mut f: impl FnMut(StationId, ChannelId, u64) -> bool,
    ) -> Result<Self> {
        let bits = explicit_bits(&schedule, length)?;
        let mut bytes = vec![0u8; bits.div_ceil(8) as usize];
        let mut idx = 0u64;
        for u in 1..=schedule.n {
            for beta in 1..=schedule.b {
                for j in 0..length {
                    if f(StationId(u), ChannelId(beta), j) {
                        bytes[(idx / 8) as usize] |= 1 << (idx % 8);
                    }
                    idx += 1;
                }
            }
        }
        Self::build(schedule, length, BitSource::Explicit { bytes })
    }

    pub fn zeros(schedule: SectionSchedule, length: u64) -> Result<Self> {
        Self::from_fn(schedule, length, |_, _, _| false)
    }

    /// An explicit copy of this array.
    pub fn materialize(&self) -> Result<Self> {
        Self::from_fn(self.schedule.clone(), self.length, |u, beta, j| {
            self.bit_unchecked(u.0, beta.0, j)
        })
    }

    pub fn schedule(&self) -> &SectionSchedule {
        &self.schedule
    }

    pub fn kind(&self) -> ScheduleKind {
        self.schedule.kind
    }

    pub fn n(&self) -> u32 {
        self.schedule.n
    }

    pub fn b(&self) -> u32 {
        self.schedule.b
    }

    pub fn length(&self) -> u64 {
        self.length
    }

    pub fn seed(&self) -> Option<u64> {
        match self.source {
            BitSource::Lazy { seed } => Some(seed),
            BitSource::Explicit { .. } => None,
        }
    }

    pub fn is_lazy(&self) -> bool {
        self.seed().is_some()
    }

    /// (stage, channel) cells whose modified-array probability was clamped to 1.
    pub fn clamped_cells(&self) -> Vec<(StageIndex, ChannelId)> {
        let mut out = Vec::new();
        for i in 1..=self.schedule.max_stage() {
            for beta in 1..=self.schedule.b {
                let (s, c) = (StageIndex(i), ChannelId(beta));
                if matches!(self.schedule.bit_probability(s, c), Ok(p) if p.clamped) {
                    out.push((s, c));
                }
            }
        }
        out
    }

    pub fn bit(&self, u: StationId, beta: ChannelId, j: u64) -> Result<bool> {
        if j >= self.length {
            return Err(Error::OutOfSchedule {
                position: j,
                length: self.length,
            });
        }
        if u.0 == 0 || u.0 > self.schedule.n {
            return Err(Error::invalid(format!(
                "station {} outside [1, {}]",
                u.0, self.schedule.n
            )));
        }
        self.schedule.check_channel(beta)?;
        Ok(self.bit_unchecked(u.0, beta.0, j))
    }

    /// Bit lookup for callers that already validated the coordinates.
    #[inline]
    pub(crate) fn bit_unchecked(&self, u: u32, beta: u32, j: u64) -> bool {
        match &self.source {
            BitSource::Explicit { bytes } => {
                let idx =
                    ((u as u64 - 1) * self.schedule.b as u64 + (beta as u64 - 1)) * self.length + j;
                bytes[(idx / 8) as usize] >> (idx % 8) & 1 == 1
            }
            BitSource::Lazy { seed } => {
                let stage = self
                    .schedule
                    .stage_of_position(j)
                    .expect("position below length is inside the span");
                let p = self.probs[((stage.0 - 1) * self.schedule.b + (beta - 1)) as usize];
                rng::bernoulli(
                    rng::keyed(*seed, Domain::ArrayBit, &[u as u64, beta as u64, j]),
                    p,
                )
            }
        }
    }
}

pub const MAGIC: &[u8; 8] = b"WAKEARR1";
pub const HEADER_LEN: usize = 36;

/// Writes `array` in the binary array format:
///
/// ```text
/// offset  size  field
///      0     8  magic "WAKEARR1"
///      8     1  kind: 0 = general, 1 = modified
///      9     1  source: 0 = lazy (seed follows), 1 = explicit (bits follow)
///     10     2  reserved, zero
///     12     4  n          (u32, little-endian)
///     16     4  b          (u32, little-endian)
///     20     4  c numerator   (u32, little-endian)
///     24     4  c denominator (u32, little-endian)
///     28     8  length ℓ   (u64, little-endian)
///     36     -  lazy: seed (u64, little-endian)
///               explicit: ⌈n·b·ℓ / 8⌉ bytes, bit index ((u-1)·b + (β-1))·ℓ + j,
///               bit k of a byte holds index 8·byte + k
/// ```
pub fn save_array(array: &TransmissionArray, mut w: impl Write) -> Result<()> {
    let s = &array.schedule;
    let mut header = Vec::with_capacity(HEADER_LEN + 8);
    header.extend_from_slice(MAGIC);
    header.push(match s.kind {
        ScheduleKind::General => 0,
        ScheduleKind::Modified => 1,
    });
    header.push(if array.is_lazy() { 0 } else { 1 });
    header.extend_from_slice(&[0, 0]);
    header.extend_from_slice(&s.n.to_le_bytes());
    header.extend_from_slice(&s.b.to_le_bytes());
    header.extend_from_slice(&s.c.num.to_le_bytes());
    header.extend_from_slice(&s.c.den.to_le_bytes());
    header.extend_from_slice(&array.length.to_le_bytes());
    w.write_all(&header)?;
    match &array.source {
        BitSource::Lazy { seed } => w.write_all(&seed.to_le_bytes())?,
        BitSource::Explicit { bytes } => w.write_all(bytes)?,
    }
    w.flush()?;
    Ok(())
}

fn read_u32(buf: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(buf[at..at + 4].try_into().expect("4 bytes"))
}

fn read_u64(buf: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(buf[at..at + 8].try_into().expect("8 bytes"))
}

pub fn load_array(mut r: impl Read) -> Result<TransmissionArray> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    parse_array(&buf)
}

pub fn parse_array(buf: &[u8]) -> Result<TransmissionArray> {
    if buf.len() < MAGIC.len() {
        return Err(Error::format(buf.len() as u64, "truncated magic"));
    }
    if buf[..7] == MAGIC[..7] && buf[7] != MAGIC[7] {
        return Err(Error::format(
            7,
            format!("unsupported format version {:?}", buf[7] as char),
        ));
    }
    if &buf[..8] != MAGIC {
        return Err(Error::format(0, "bad magic, not a transmission array file"));
    }
    if buf.len() < HEADER_LEN {
        return Err(Error::format(buf.len() as u64, "truncated header"));
    }
    let kind = match buf[8] {
        0 => ScheduleKind::General,
        1 => ScheduleKind::Modified,
        k => return Err(Error::format(8, format!("unknown schedule kind {k}"))),
    };
    let explicit = match buf[9] {
        0 => false,
        1 => true,
        s => return Err(Error::format(9, format!("unknown bit source {s}"))),
    };
    if buf[10] != 0 || buf[11] != 0 {
        return Err(Error::format(10, "reserved bytes are not zero"));
    }
    let n = read_u32(buf, 12);
    let b = read_u32(buf, 16);
    let c = ScaleConstant {
        num: read_u32(buf, 20),
        den: read_u32(buf, 24),
    };
    let length = read_u64(buf, 28);
    let schedule = SectionSchedule::new(kind, n, b, c)
        .map_err(|e| Error::format(12, format!("bad schedule parameters: {e}")))?;
    if length > schedule.span() {
        return Err(Error::format(
            28,
            format!("length {length} exceeds schedule span {}", schedule.span()),
        ));
    }
    let payload = &buf[HEADER_LEN..];
    let source = if explicit {
        let bits =
            explicit_bits(&schedule, length).map_err(|e| Error::format(12, e.to_string()))?;
        let expected = bits.div_ceil(8) as usize;
        if payload.len() != expected {
            return Err(Error::format(
                HEADER_LEN as u64,
                format!(
                    "payload has {} bytes but n={n}, b={b}, length={length} needs {expected}",
                    payload.len()
                ),
            ));
        }
        BitSource::Explicit {
            bytes: payload.to_vec(),
        }
    } else {
        if payload.len() != 8 {
            return Err(Error::format(
                HEADER_LEN as u64,
                format!(
                    "lazy array needs an 8-byte seed, found {} bytes",
                    payload.len()
                ),
            ));
        }
        BitSource::Lazy {
            seed: read_u64(buf, HEADER_LEN),
        }
    };
    TransmissionArray::build(schedule, length, source)
}

pub fn save_array_to_path(array: &TransmissionArray, path: impl AsRef<Path>) -> Result<()> {
    save_array(array, BufWriter::new(File::create(path)?))
}

pub fn load_array_from_path(path: impl AsRef<Path>) -> Result<TransmissionArray> {
    load_array(BufReader::new(File::open(path)?))
}

impl TransmissionArray {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        save_array(self, &mut out).expect("writing to a Vec cannot fail");
        out
    }
}
