//! Monte-Carlo FER/BER harness, result emission and the hardware memory
//! estimator.
//!
//! Frames are decoded in parallel batches, but every frame draws from its
//! own generator `(seed, point, frame)` and the stop rules are applied while
//! scanning outcomes in frame order, so counters do not depend on the
//! number of workers.

use std::fmt;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{frame_rng, AwgnChannel, QuantMode, QuantizationSpec};
use crate::construction::{bec_construct, load_reliability_csv, PolarCode, ReliabilityVector, MAX_DEPTH};
use crate::encoder::encode;
use crate::error::{PolarError, Result};
use crate::fastnodes::{memory_footprint, FastScDecoder, NodeLimits};
use crate::list::{ListDecoder, LpsclConfig};
use crate::llr::{FixedDomain, FloatDomain, LlrDomain};
use crate::sc::ScDecoder;

/// BEC design erasure probability used when none is given. Chosen so that
/// the length-1024 half-rate code matches standardized-sequence FER at 2-3 dB.
pub const DEFAULT_BEC_EPSILON: f64 = 0.29;

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(PolarError::Config(msg.into()))
}

/// Where the reliability vector comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConstructionSource {
    Bec(f64),
    Csv(PathBuf),
}

impl ConstructionSource {
    pub fn load(&self, n: u32) -> Result<ReliabilityVector> {
        let v = match self {
            ConstructionSource::Bec(eps) => bec_construct(n, *eps)?.1,
            ConstructionSource::Csv(path) => {
                let file = std::fs::File::open(path)
                    .map_err(|e| PolarError::Config(format!("cannot open {}: {e}", path.display())))?;
                load_reliability_csv(file)?
            }
        };
        if v.depth() != n {
            return config_err(format!("reliability vector has length {}, expected {}", v.len(), 1usize << n));
        }
        Ok(v)
    }
}

impl Default for ConstructionSource {
    fn default() -> Self {
        ConstructionSource::Bec(DEFAULT_BEC_EPSILON)
    }
}

impl fmt::Display for ConstructionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstructionSource::Bec(eps) => write!(f, "bec:{eps}"),
            ConstructionSource::Csv(p) => write!(f, "csv:{}", p.display()),
        }
    }
}

impl FromStr for ConstructionSource {
    type Err = PolarError;

    /// `bec:<epsilon>` or `csv:<path>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("bec", eps)) => {
                let eps: f64 = eps.parse().map_err(|_| PolarError::Config(format!("bad epsilon {eps:?}")))?;
                Ok(ConstructionSource::Bec(eps))
            }
            Some(("csv", path)) if !path.is_empty() => Ok(ConstructionSource::Csv(path.into())),
            _ => config_err(format!("construction must be bec:<eps> or csv:<path>, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Sc,
    Scl,
    Lpscl,
    FastSc,
    FastLpscl,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 5] =
        [DecoderKind::Sc, DecoderKind::Scl, DecoderKind::Lpscl, DecoderKind::FastSc, DecoderKind::FastLpscl];

    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Sc => "sc",
            DecoderKind::Scl => "scl",
            DecoderKind::Lpscl => "lpscl",
            DecoderKind::FastSc => "fast-sc",
            DecoderKind::FastLpscl => "fast-lpscl",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = PolarError;

    fn from_str(s: &str) -> Result<Self> {
        DecoderKind::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| PolarError::Config(format!("unknown decoder {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Code depth, `N = 2^n`.
    pub n: u32,
    pub ks: Vec<usize>,
    pub decoder: DecoderKind,
    pub l_max: usize,
    /// `L_t` of the top stages, root first (LPSCL only).
    pub top_lists: Vec<usize>,
    pub partitions: usize,
    pub ebn0_db: Vec<f64>,
    pub max_frames: u64,
    pub max_frame_errors: Option<u64>,
    pub seed: u64,
    pub quant: QuantizationSpec,
    pub limits: NodeLimits,
    /// Type-I..V nodes (fast SC only).
    pub extended: bool,
    pub construction: ConstructionSource,
    /// Drop the channel noise while keeping the LLR scaling.
    pub noiseless: bool,
    /// Worker threads; `0` uses every available core.
    pub workers: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 10,
            ks: vec![512],
            decoder: DecoderKind::Scl,
            l_max: 4,
            top_lists: vec![2, 2],
            partitions: 4,
            ebn0_db: vec![2.0],
            max_frames: 100_000,
            max_frame_errors: Some(100),
            seed: 0,
            quant: QuantizationSpec { mode: QuantMode::Float, ..QuantizationSpec::default() },
            limits: NodeLimits::hardware(),
            extended: false,
            construction: ConstructionSource::default(),
            noiseless: false,
            workers: 0,
        }
    }
}

impl SimConfig {
    /// List configuration implied by the decoder kind.
    pub fn list_config(&self) -> LpsclConfig {
        match self.decoder {
            DecoderKind::Lpscl | DecoderKind::FastLpscl => LpsclConfig {
                l_max: self.l_max,
                partitions: self.partitions,
                top_lists: self.top_lists.clone(),
            },
            _ => LpsclConfig::scl(self.l_max),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_DEPTH {
            return config_err(format!("n = {} outside 1..={MAX_DEPTH}", self.n));
        }
        let len = 1usize << self.n;
        if self.ks.is_empty() || self.ks.iter().any(|&k| k == 0 || k > len) {
            return config_err(format!("every K must lie in 1..={len}, got {:?}", self.ks));
        }
        if self.ebn0_db.is_empty() || self.ebn0_db.iter().any(|x| !x.is_finite()) {
            return config_err("at least one finite Eb/N0 point is required");
        }
        if self.max_frames == 0 {
            return config_err("max_frames must be at least 1");
        }
        if self.max_frame_errors == Some(0) {
            return config_err("max_frame_errors must be at least 1");
        }
        if self.quant.mode == QuantMode::Fixed {
            self.quant.validate().map_err(|e| PolarError::Config(e.to_string()))?;
        }
        self.limits.validate()?;
        if self.extended && self.decoder != DecoderKind::FastSc {
            return config_err("Type-I..V nodes are only available with fast-sc");
        }
        if matches!(self.decoder, DecoderKind::Scl | DecoderKind::Lpscl | DecoderKind::FastLpscl) {
            self.list_config().validate(self.n)?;
        }
        if let ConstructionSource::Bec(eps) = self.construction {
            if !(eps > 0.0 && eps < 1.0) {
                return config_err(format!("BEC epsilon {eps} outside (0, 1)"));
            }
        }
        Ok(())
    }

    /// FNV-1a of the JSON form, as a stable fingerprint for result files.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in json {
            h = (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// Anything that turns channel LLRs into `u_hat` plus a step count.
pub trait FrameDecoder {
    fn decode_frame(&mut self, llrs: &[f64]) -> Result<(Vec<u8>, usize)>;
}

impl<D: LlrDomain> FrameDecoder for ScDecoder<D> {
    fn decode_frame(&mut self, llrs: &[f64]) -> Result<(Vec<u8>, usize)> {
        let out = self.decode(llrs)?;
        Ok((out.u_hat, out.steps))
    }
}

impl<D: LlrDomain> FrameDecoder for FastScDecoder<D> {
    fn decode_frame(&mut self, llrs: &[f64]) -> Result<(Vec<u8>, usize)> {
        let out = self.decode(llrs)?;
        Ok((out.u_hat, out.steps))
    }
}

impl<D: LlrDomain> FrameDecoder for ListDecoder<D> {
    fn decode_frame(&mut self, llrs: &[f64]) -> Result<(Vec<u8>, usize)> {
        let out = self.decode(llrs)?;
        Ok((out.u_hat, out.steps))
    }
}

fn build_with<D: LlrDomain + 'static>(d: D, cfg: &SimConfig, code: &PolarCode) -> Result<Box<dyn FrameDecoder>> {
    let code = code.clone();
    Ok(match cfg.decoder {
        DecoderKind::Sc => Box::new(ScDecoder::new(d, code)),
        DecoderKind::Scl | DecoderKind::Lpscl => Box::new(ListDecoder::new(d, code, cfg.list_config())?),
        DecoderKind::FastSc => Box::new(FastScDecoder::new(d, code, cfg.limits, cfg.extended)?),
        DecoderKind::FastLpscl => Box::new(ListDecoder::fast(d, code, cfg.list_config(), cfg.limits)?),
    })
}

/// Decoder instance for one worker.
pub fn build_decoder(cfg: &SimConfig, code: &PolarCode) -> Result<Box<dyn FrameDecoder>> {
    match cfg.quant.mode {
        QuantMode::Float => build_with(FloatDomain::min_sum(), cfg, code),
        QuantMode::Fixed => build_with(FixedDomain::new(cfg.quant), cfg, code),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct FrameOutcome {
    bit_errors: u64,
    steps: u64,
}

fn simulate_frame(
    dec: &mut dyn FrameDecoder,
    code: &PolarCode,
    channel: &AwgnChannel,
    seed: u64,
    stream: u64,
    frame: u64,
) -> Result<FrameOutcome> {
    let mut rng = frame_rng(seed, stream, frame);
    let mut u = vec![0u8; code.len()];
    for i in code.mask().info_positions() {
        u[i] = rng.random_range(0..2);
    }
    let x = encode(&u, code.bit_reversed())?;
    let llrs = channel.transmit(&x, &mut rng);
    let (u_hat, steps) = dec.decode_frame(&llrs)?;
    let bit_errors = code.mask().info_positions().filter(|&i| u_hat[i] != u[i]).count() as u64;
    Ok(FrameOutcome { bit_errors, steps: steps as u64 })
}

/// Counters of one `(K, Eb/N0)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub k: usize,
    pub ebn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    pub mean_steps: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub decoder: DecoderKind,
    #[serde(rename = "N")]
    pub len: usize,
    pub seed: u64,
    pub config_hash: String,
    pub version: String,
    pub points: Vec<PointResult>,
}

impl SimResult {
    pub fn rows(&self) -> Vec<ResultRow> {
        self.points
            .iter()
            .map(|p| ResultRow {
                decoder: self.decoder.to_string(),
                len: self.len,
                k: p.k,
                ebn0_db: p.ebn0_db,
                frames: p.frames,
                frame_errors: p.frame_errors,
                bit_errors: p.bit_errors,
                fer: p.fer,
                ber: p.ber,
                mean_steps: p.mean_steps,
                seed: self.seed,
            })
            .collect()
    }
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub decoder: String,
    #[serde(rename = "N")]
    pub len: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub ebn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    pub mean_steps: f64,
    pub seed: u64,
}

pub const CSV_HEADER: [&str; 11] =
    ["decoder", "N", "K", "ebn0_db", "frames", "frame_errors", "bit_errors", "fer", "ber", "mean_steps", "seed"];

fn run_point(cfg: &SimConfig, code: &PolarCode, ebn0: f64, stream: u64, threads: usize) -> Result<PointResult> {
    let start = Instant::now();
    let mut channel = AwgnChannel::new(ebn0, code.rate())?;
    if cfg.noiseless {
        channel = channel.noiseless();
    }
    let batch = (16 * threads as u64).max(64);
    let (mut frames, mut frame_errors, mut bit_errors, mut steps) = (0u64, 0u64, 0u64, 0u64);
    let mut next = 0u64;
    'outer: while next < cfg.max_frames {
        let end = (next + batch).min(cfg.max_frames);
        let outcomes: Vec<Result<FrameOutcome>> = (next..end)
            .into_par_iter()
            .map_init(
                || build_decoder(cfg, code),
                |dec, frame| match dec {
                    Ok(d) => simulate_frame(d.as_mut(), code, &channel, cfg.seed, stream, frame),
                    Err(e) => Err(e.clone()),
                },
            )
            .collect();
        next = end;
        for outcome in outcomes {
            let o = outcome?;
            frames += 1;
            steps += o.steps;
            bit_errors += o.bit_errors;
            frame_errors += u64::from(o.bit_errors > 0);
            if cfg.max_frame_errors.is_some_and(|m| frame_errors >= m) {
                break 'outer;
            }
        }
    }
    let k = code.k();
    Ok(PointResult {
        k,
        ebn0_db: ebn0,
        frames,
        frame_errors,
        bit_errors,
        fer: frame_errors as f64 / frames as f64,
        ber: bit_errors as f64 / (frames as f64 * k as f64),
        mean_steps: steps as f64 / frames as f64,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs every `(K, Eb/N0)` point of `cfg`, K-major.
pub fn run_monte_carlo(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let v = Arc::new(cfg.construction.load(cfg.n)?);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| PolarError::Config(format!("cannot start workers: {e}")))?;
    let threads = pool.current_num_threads();
    let mut points = Vec::new();
    let mut stream = 0u64;
    for &k in &cfg.ks {
        let code = PolarCode::new(v.clone(), k)?;
        for &ebn0 in &cfg.ebn0_db {
            points.push(pool.install(|| run_point(cfg, &code, ebn0, stream, threads))?);
            stream += 1;
        }
    }
    Ok(SimResult {
        decoder: cfg.decoder,
        len: 1 << cfg.n,
        seed: cfg.seed,
        config_hash: cfg.fingerprint(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = PolarError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => config_err(format!("unknown output format {s:?}")),
        }
    }
}

fn csv_err(e: csv::Error) -> PolarError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.kind() {
        csv::ErrorKind::Io(_) => PolarError::Io(e.to_string()),
        _ => PolarError::Format { line, message: e.to_string() },
    }
}

pub fn emit_results<W: Write>(result: &SimResult, format: OutputFormat, mut out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(CSV_HEADER).map_err(csv_err)?;
            for row in result.rows() {
                w.serialize(row).map_err(csv_err)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, result).map_err(|e| PolarError::Io(e.to_string()))?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn parse_results_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(PolarError::Format { line: 1, message: format!("unexpected header {header:?}") });
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn parse_results_json(text: &str) -> Result<SimResult> {
    serde_json::from_str(text).map_err(|e| PolarError::Format { line: e.line(), message: e.to_string() })
}

/// Set of code rates a memory-based decoder has to store schedules for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateSet {
    Five,
    Ten,
    Twenty,
    /// Every `K` from 12 (or 1 for tiny codes) to `N`.
    All,
}

impl RateSet {
    pub const ALL: [RateSet; 4] = [RateSet::Five, RateSet::Ten, RateSet::Twenty, RateSet::All];

    fn fractions(self) -> &'static [(usize, usize)] {
        const FIVE: [(usize, usize); 5] = [(1, 12), (1, 6), (1, 3), (1, 2), (2, 3)];
        const TEN: [(usize, usize); 10] =
            [(1, 16), (1, 12), (1, 8), (1, 6), (1, 4), (1, 3), (1, 2), (2, 3), (5, 6), (7, 8)];
        const TWENTY: [(usize, usize); 20] = [
            (1, 24),
            (1, 16),
            (1, 12),
            (1, 8),
            (1, 6),
            (1, 5),
            (1, 4),
            (5, 16),
            (1, 3),
            (3, 8),
            (2, 5),
            (1, 2),
            (3, 5),
            (5, 8),
            (2, 3),
            (11, 16),
            (3, 4),
            (4, 5),
            (5, 6),
            (7, 8),
        ];
        match self {
            RateSet::Five => &FIVE,
            RateSet::Ten => &TEN,
            RateSet::Twenty => &TWENTY,
            RateSet::All => &[],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RateSet::Five => "5",
            RateSet::Ten => "10",
            RateSet::Twenty => "20",
            RateSet::All => "all",
        }
    }

    /// Information lengths `floor(N r)` (at least 1), ascending and distinct.
    pub fn ks(self, len: usize) -> Vec<usize> {
        let mut ks: Vec<usize> = match self {
            RateSet::All => (12.min(len)..=len).collect(),
            _ => self.fractions().iter().map(|&(a, b)| (len * a / b).max(1)).collect(),
        };
        ks.sort_unstable();
        ks.dedup();
        ks
    }
}

impl FromStr for RateSet {
    type Err = PolarError;

    fn from_str(s: &str) -> Result<Self> {
        RateSet::ALL
            .into_iter()
            .find(|r| r.label() == s)
            .ok_or_else(|| PolarError::Config(format!("rate set must be 5, 10, 20 or all, got {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HwParams {
    /// Code length `N`.
    pub len: usize,
    /// Parallel processing elements.
    pub n_pe: usize,
    /// LLR word width.
    pub q_llr: u32,
    pub lists: LpsclConfig,
    /// Bits per stored operation (node type + node stage).
    pub bits_per_entry: u32,
}

impl HwParams {
    /// `N = 1024`, 64 PEs, 6-bit LLRs, `P = 4`, `L_max = 4`, `L_10 = L_9 = 2`.
    pub fn reference() -> Self {
        Self { len: 1024, n_pe: 64, q_llr: 6, lists: LpsclConfig::reference(), bits_per_entry: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateSetFootprint {
    pub rates: String,
    pub codes: usize,
    /// F, G and node operations.
    pub entries: u64,
    pub bits: u64,
    /// Node operations alone, for schedules that leave F/G implicit.
    pub node_entries: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HwEstimate {
    pub n_pe: usize,
    pub high_depth: usize,
    pub low_depth: usize,
    /// LLR memory over all stages and list instances.
    pub llr_memory_bits: u64,
    /// Storing `v` only: `N ceil(log2 N)` bits.
    pub mem_ext_proposed: u64,
    /// Storing one operation list per supported rate.
    pub mem_ext_memory_based: Vec<RateSetFootprint>,
}

/// Memory model of the partitioned list decoder and of the external
/// schedule storage of a memory-based fast decoder.
pub fn hw_estimate(
    v: &ReliabilityVector,
    params: &HwParams,
    rate_sets: &[RateSet],
    limits: &NodeLimits,
) -> Result<HwEstimate> {
    let len = params.len;
    if v.len() != len {
        return config_err(format!("reliability vector has length {}, expected {len}", v.len()));
    }
    let n = v.depth();
    let pe = params.n_pe;
    if !pe.is_power_of_two() || pe < 2 || 4 * pe > len {
        return config_err(format!("N_PE = {pe} must be a power of two in [2, N/4]"));
    }
    params.lists.validate(n)?;
    limits.validate()?;

    let high_depth = len / pe - 2;
    let low_depth = 2 * pe - 2;

    // stage t keeps 2^(t-1) LLRs, replicated once per path alive at that stage
    let layers = params.lists.partitions.trailing_zeros();
    let copies = |t: u32| if t > n - layers { params.lists.top_lists[(n - t) as usize] } else { params.lists.l_max };
    let q = u64::from(params.q_llr);
    let pe_log = pe.trailing_zeros();
    let mut llr_memory_bits = 0u64;
    for j in 0..n {
        let words_bits = if j > pe_log {
            (1u64 << j) * q
        } else if j < pe_log {
            (pe as u64 >> j) * q
        } else {
            0
        };
        llr_memory_bits += words_bits * copies(j + 1) as u64;
    }

    let mut mem_ext_memory_based = Vec::new();
    for &set in rate_sets {
        let ks = set.ks(len);
        let report = memory_footprint(v, ks.iter().copied(), limits, false, params.bits_per_entry)?;
        mem_ext_memory_based.push(RateSetFootprint {
            rates: set.label().to_string(),
            codes: ks.len(),
            entries: report.total_entries,
            bits: report.total_bits,
            node_entries: report.node_entries,
        });
    }
    Ok(HwEstimate {
        n_pe: pe,
        high_depth,
        low_depth,
        llr_memory_bits,
        mem_ext_proposed: len as u64 * u64::from(n),
        mem_ext_memory_based,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(decoder: DecoderKind) -> SimConfig {
        SimConfig {
            n: 6,
            ks: vec![32],
            decoder,
            top_lists: vec![2, 2],
            ebn0_db: vec![1.0],
            max_frames: 200,
            max_frame_errors: None,
            seed: 3,
            workers: 1,
            ..SimConfig::default()
        }
    }

    #[test]
    fn noiseless_runs_are_error_free() {
        for d in DecoderKind::ALL {
            let cfg = SimConfig { noiseless: true, ..small(d) };
            let r = run_monte_carlo(&cfg).unwrap();
            assert_eq!(r.points[0].frame_errors, 0, "{d}");
            assert_eq!(r.points[0].frames, 200);
        }
    }

    #[test]
    fn sc_steps_are_exact() {
        let r = run_monte_carlo(&small(DecoderKind::Sc)).unwrap();
        assert_eq!(r.points[0].mean_steps, 126.0);
    }

    #[test]
    fn stop_on_errors() {
        let cfg = SimConfig { max_frame_errors: Some(5), ebn0_db: vec![-2.0], ..small(DecoderKind::Sc) };
        let r = run_monte_carlo(&cfg).unwrap();
        assert_eq!(r.points[0].frame_errors, 5);
        assert!(r.points[0].frames < 200);
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            SimConfig { ks: vec![0], ..small(DecoderKind::Sc) },
            SimConfig { ks: vec![65], ..small(DecoderKind::Sc) },
            SimConfig { max_frames: 0, ..small(DecoderKind::Sc) },
            SimConfig { extended: true, ..small(DecoderKind::FastLpscl) },
            SimConfig { top_lists: vec![8, 8], ..small(DecoderKind::Lpscl) },
            SimConfig { construction: ConstructionSource::Bec(1.5), ..small(DecoderKind::Sc) },
        ];
        for cfg in bad {
            assert!(matches!(run_monte_carlo(&cfg), Err(PolarError::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let r = SimResult {
            decoder: DecoderKind::Sc,
            len: 8,
            seed: 0,
            config_hash: String::new(),
            version: String::new(),
            points: vec![],
        };
        let mut buf = Vec::new();
        emit_results(&r, OutputFormat::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), CSV_HEADER.join(",") + "\n");
    }

    #[test]
    fn parse_names() {
        assert_eq!("fast-lpscl".parse::<DecoderKind>().unwrap(), DecoderKind::FastLpscl);
        assert_eq!("bec:0.3".parse::<ConstructionSource>().unwrap(), ConstructionSource::Bec(0.3));
        assert!("gauss:1".parse::<ConstructionSource>().is_err());
        assert_eq!("all".parse::<RateSet>().unwrap(), RateSet::All);
    }

    #[test]
    fn rate_sets() {
        assert_eq!(RateSet::Five.ks(1024), vec![85, 170, 341, 512, 682]);
        assert_eq!(RateSet::All.ks(1024).len(), 1013);
        assert_eq!(RateSet::Ten.ks(1024).len(), 10);
        assert_eq!(RateSet::Twenty.ks(1024).len(), 20);
    }

    #[test]
    fn reference_memory_depths() {
        let v = bec_construct(10, 0.5).unwrap().1;
        let hw = hw_estimate(&v, &HwParams::reference(), &[RateSet::Five], &NodeLimits::hardware()).unwrap();
        assert_eq!((hw.high_depth, hw.low_depth), (14, 126));
        assert_eq!(hw.mem_ext_proposed, 10240);
        let bad = HwParams { n_pe: 512, ..HwParams::reference() };
        assert!(hw_estimate(&v, &bad, &[], &NodeLimits::hardware()).is_err());
    }
}
