//! `polar-flex`: simulation, operation lists, memory estimates and
//! self-verification from the command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use polar_flex_core::fastnodes::IdentificationReport;
use polar_flex_core::*;
use std::result::Result;

const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "polar-flex", version, about = "Rate-flexible polar code decoders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo FER/BER simulation
    Sim(SimArgs),
    /// Print the operation list of one code
    Oplist(OplistArgs),
    /// Hardware memory estimate
    Hwest(HwestArgs),
    /// Cross-check node identification and fast decoders
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CodeArgs {
    /// Code length N
    #[arg(long = "n", default_value_t = 1024)]
    len: usize,
    /// Reliability source: bec:<epsilon> or csv:<path>
    #[arg(long, default_value_t = ConstructionSource::default().to_string())]
    construction: String,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Information lengths, comma separated
    #[arg(long, default_value = "512")]
    k: String,
    /// sc, scl, lpscl, fast-sc or fast-lpscl
    #[arg(long, default_value = "scl")]
    decoder: String,
    #[arg(long, default_value_t = 4)]
    lmax: usize,
    /// Top-stage list sizes, root first
    #[arg(long, default_value = "2,2")]
    ltop: String,
    /// Partitioning factor
    #[arg(long, default_value_t = 4)]
    p: usize,
    /// Eb/N0 points in dB: a list `1,2,3` or a range `start:step:stop`
    #[arg(long, default_value = "2.0")]
    ebn0: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// float or fixed
    #[arg(long, default_value = "float")]
    quant: String,
    #[arg(long, default_value_t = 100_000)]
    max_frames: u64,
    /// Stop a point after this many frame errors (0 disables)
    #[arg(long, default_value_t = 100)]
    max_errors: u64,
    /// Type-I..V nodes (fast-sc only)
    #[arg(long)]
    extended: bool,
    /// Special-node size limits: hardware or unlimited
    #[arg(long, default_value = "hardware")]
    limits: String,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Transmit without noise
    #[arg(long)]
    noiseless: bool,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json; defaults to the output file extension, else csv
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct OplistArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    extended: bool,
    /// Special-node size limits: hardware or unlimited
    #[arg(long, default_value = "unlimited")]
    limits: String,
}

#[derive(Args)]
struct HwestArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, default_value_t = 64)]
    npe: usize,
    /// Rate sets, comma separated: 5, 10, 20, all
    #[arg(long, default_value = "5,10,20,all")]
    rates: String,
    #[arg(long, default_value_t = 6)]
    q_llr: u32,
    #[arg(long, default_value_t = 4)]
    lmax: usize,
    #[arg(long, default_value = "2,2")]
    ltop: String,
    #[arg(long, default_value_t = 4)]
    p: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "bec:0.5")]
    construction: String,
    /// Largest code length checked
    #[arg(long, default_value_t = 1024)]
    nmax: usize,
    /// Noisy frames per decoder comparison
    #[arg(long, default_value_t = 20)]
    frames: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Config(String),
    Verify(String),
    Other(String),
}

impl From<PolarError> for Failure {
    fn from(e: PolarError) -> Self {
        match e {
            PolarError::Config(_) | PolarError::Domain(_) | PolarError::Format { .. } => Failure::Config(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

fn config<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Config(msg.into()))
}

fn depth_of(len: usize) -> Result<u32, Failure> {
    if len < 2 || !len.is_power_of_two() {
        return config(format!("code length {len} is not a power of two >= 2"));
    }
    Ok(len.trailing_zeros())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Failure> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| Failure::Config(format!("bad {what} {x:?}"))))
        .collect()
}

/// `a,b,c` or an inclusive range `start:step:stop`.
fn parse_ebn0(s: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 1 {
        return parse_list(s, "Eb/N0");
    }
    let [a, step, b] = parts[..] else {
        return config(format!("Eb/N0 range must be start:step:stop, got {s:?}"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| Failure::Config(format!("bad Eb/N0 {x:?}")));
    let (a, step, b) = (num(a)?, num(step)?, num(b)?);
    if step.is_nan() || step <= 0.0 || b < a {
        return config(format!("empty Eb/N0 range {s:?}"));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| a + step * i as f64).collect())
}

fn parse_limits(s: &str) -> Result<NodeLimits, Failure> {
    match s {
        "hardware" => Ok(NodeLimits::hardware()),
        "unlimited" => Ok(NodeLimits::unlimited()),
        _ => config(format!("limits must be hardware or unlimited, got {s:?}")),
    }
}

fn lists(lmax: usize, ltop: &str, p: usize) -> Result<LpsclConfig, Failure> {
    Ok(LpsclConfig { l_max: lmax, partitions: p, top_lists: parse_list(ltop, "list size")? })
}

fn sim(a: SimArgs) -> Result<(), Failure> {
    let quant_mode = match a.quant.as_str() {
        "float" => QuantMode::Float,
        "fixed" => QuantMode::Fixed,
        q => return config(format!("quant must be float or fixed, got {q:?}")),
    };
    let cfg = SimConfig {
        n: depth_of(a.code.len)?,
        ks: parse_list(&a.k, "K")?,
        decoder: a.decoder.parse()?,
        l_max: a.lmax,
        top_lists: parse_list(&a.ltop, "list size")?,
        partitions: a.p,
        ebn0_db: parse_ebn0(&a.ebn0)?,
        max_frames: a.max_frames,
        max_frame_errors: (a.max_errors > 0).then_some(a.max_errors),
        seed: a.seed,
        quant: QuantizationSpec { mode: quant_mode, ..QuantizationSpec::default() },
        limits: parse_limits(&a.limits)?,
        extended: a.extended,
        construction: a.code.construction.parse()?,
        noiseless: a.noiseless,
        workers: a.workers,
    };
    let format = match (&a.format, &a.out) {
        (Some(f), _) => f.parse()?,
        (None, Some(p)) if p.extension().is_some_and(|e| e == "json") => OutputFormat::Json,
        _ => OutputFormat::Csv,
    };
    cfg.validate()?;
    let result = run_monte_carlo(&cfg)?;
    match a.out {
        Some(path) => emit_results(&result, format, BufWriter::new(File::create(path)?))?,
        None => emit_results(&result, format, io::stdout().lock())?,
    }
    Ok(())
}

fn oplist(a: OplistArgs) -> Result<(), Failure> {
    let n = depth_of(a.code.len)?;
    let source: ConstructionSource = a.code.construction.parse()?;
    let code = PolarCode::new(Arc::new(source.load(n)?), a.k)?;
    let ops = generate_operation_list(&code, &parse_limits(&a.limits)?, a.extended);
    io::stdout().lock().write_all(ops.serialize().as_bytes())?;
    Ok(())
}

fn hwest(a: HwestArgs) -> Result<(), Failure> {
    let n = depth_of(a.code.len)?;
    let source: ConstructionSource = a.code.construction.parse()?;
    let v = source.load(n)?;
    let params = HwParams { len: a.code.len, n_pe: a.npe, q_llr: a.q_llr, lists: lists(a.lmax, &a.ltop, a.p)?, bits_per_entry: 8 };
    let sets: Vec<RateSet> = parse_list(&a.rates, "rate set")?;
    let est = hw_estimate(&v, &params, &sets, &NodeLimits::hardware())?;
    let mut out = io::stdout().lock();
    if a.json {
        serde_json::to_writer_pretty(&mut out, &est).map_err(|e| Failure::Other(e.to_string()))?;
        writeln!(out)?;
    } else {
        writeln!(out, "N_PE                    {}", est.n_pe)?;
        writeln!(out, "high stage depth        {}", est.high_depth)?;
        writeln!(out, "low stage depth         {}", est.low_depth)?;
        writeln!(out, "LLR memory bits         {}", est.llr_memory_bits)?;
        writeln!(out, "Mem_ext proposed        {}", est.mem_ext_proposed)?;
        for m in &est.mem_ext_memory_based {
            writeln!(
                out,
                "Mem_ext memory-based    {} rates: {} codes, {} entries, {} bits ({} node entries)",
                m.rates, m.codes, m.entries, m.bits, m.node_entries
            )?;
        }
    }
    Ok(())
}

fn report_identification(n: u32, r: &IdentificationReport, problems: &mut Vec<String>) {
    println!("identification n={n}: {} queries, {} ambiguous, {} mismatches", r.checked, r.ambiguous, r.mismatches.len());
    for m in r.mismatches.iter().take(5) {
        problems.push(format!(
            "n={n} K={} stage {} offset {}: identified {} but pattern is {}",
            m.k, m.stage, m.offset, m.identified, m.fullscan
        ));
    }
    if r.ambiguous > 0 {
        problems.push(format!("n={n}: {} nodes fire more than one predicate", r.ambiguous));
    }
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    let nmax = depth_of(a.nmax)?;
    let source: ConstructionSource = a.construction.parse()?;
    let depths: Vec<u32> = match source {
        ConstructionSource::Csv(_) => vec![nmax],
        ConstructionSource::Bec(_) => (1..=nmax).collect(),
    };
    let mut problems = Vec::new();
    for n in depths {
        let v = Arc::new(source.load(n)?);
        let len = v.len();
        let report = verify_identification(&v, 0..=len)?;
        report_identification(n, &report, &mut problems);

        let (mut sc_diff, mut list_diff, mut compared) = (0u64, 0u64, 0u64);
        let cfg = if len >= 4 { LpsclConfig::reference() } else { LpsclConfig::scl(4) };
        for k in [len / 4, len / 2, 3 * len / 4].into_iter().filter(|&k| k > 0) {
            let code = PolarCode::new(v.clone(), k)?;
            let channel = AwgnChannel::new(1.0, code.rate())?;
            for frame in 0..a.frames {
                let mut rng = frame_rng(a.seed, u64::from(n), frame);
                let x = encode(&vec![0; len], true)?;
                let llr = channel.transmit(&x, &mut rng);
                let sc = sc_decode(&llr, &code)?;
                let fast = fast_decode(&llr, &code, &NodeLimits::basic_unlimited(), &FastMode::Sc, false)?;
                sc_diff += u64::from(sc.u_hat != fast.u_hat);
                let slow = lpscl_decode(&llr, &code, &cfg)?;
                let fast = fast_decode(&llr, &code, &NodeLimits::hardware(), &FastMode::List(cfg.clone()), false)?;
                list_diff += u64::from(slow.u_hat != fast.u_hat);
                compared += 1;
            }
        }
        println!("decoders n={n}: {compared} frames, {sc_diff} fast-SC and {list_diff} fast-LPSCL differences");
        if sc_diff + list_diff > 0 {
            problems.push(format!("n={n}: fast decoders differ from conventional ones"));
        }
    }
    if problems.is_empty() {
        println!("verification passed");
        Ok(())
    } else {
        Err(Failure::Verify(problems.join("\n")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sim(a) => sim(a),
        Command::Oplist(a) => oplist(a),
        Command::Hwest(a) => hwest(a),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Verify(m)) => {
            eprintln!("verification failed:\n{m}");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::FAILURE
        }
    }
}
