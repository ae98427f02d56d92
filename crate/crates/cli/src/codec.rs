use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use fec_core::btc::{btc_decode, product_encode, BtcConfig, HammingCodeId, ProductBlock};
use fec_core::conv::{cc_encode, viterbi_decode, TrellisSpec, ViterbiConfig};
use fec_core::ctc::{ctc_encode, turbo_decode, CtcCode, CtcLlrs, TurboConfig};
use fec_core::interleave::{
    build_parallel_schedule, ctc_interleave_table, subblock_addresses, HarqCombiner, ScheduleOutcome, SdRequest,
};
use fec_core::ldpc::{
    ldpc_decode, parse_alist, parse_qc, CnMode, EarlyStop, LdpcConfig, LdpcEncoder, Schedule, TannerGraph,
};
use fec_core::params::{BtcParams, CcParams, CtcParams, LdpcParams, ParamSet, SdParams, StandardTables};
use fec_core::sim::CtcChain;
use fec_core::types::{bits_to_couples, count_bit_errors, couples_to_bits, Bit};

use crate::io::{load_param_file, output, read_bits, read_llrs, write_lines, CliResult};
use crate::{CodeArg, Files};

#[derive(Subcommand)]
pub enum EncodeCmd {
    /// Zero-tail convolutional code.
    Cc {
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        #[command(flatten)]
        files: Files,
    },
    /// Duo-binary turbo code; input is 2N bits `A0 B0 A1 B1 ...`.
    Ctc {
        #[arg(long, value_name = "FILE")]
        params: PathBuf,
        /// Emit the subpacket `N_SCH,m,SPID` instead of the six streams.
        #[arg(long, value_name = "N_SCH,m,SPID")]
        chain: Option<String>,
        #[command(flatten)]
        files: Files,
    },
    /// Square extended-Hamming product code.
    Btc {
        #[arg(long, value_enum)]
        code: CodeArg,
        #[command(flatten)]
        files: Files,
    },
    /// LDPC code from an alist or QC description.
    Ldpc {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        files: Files,
    },
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    /// Parity-check matrix: `.alist`, otherwise a QC base-matrix file.
    #[arg(long, value_name = "FILE", required_unless_present = "params", conflicts_with = "params")]
    pub graph: Option<PathBuf>,
    /// LDPC parameter set (graph path relative to the file).
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ModeArg {
    Spa,
    Ms,
    Nms,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ScheduleArg {
    Flooding,
    Layered,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum StopArg {
    None,
    Syndrome,
    Stability,
}

#[derive(Subcommand)]
pub enum DecodeCmd {
    /// Sliding-window Viterbi.
    Cc {
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        #[arg(long, default_value_t = ViterbiConfig::default().window)]
        window: usize,
        #[arg(long, default_value_t = 2, value_parser = parse_radix)]
        radix: u8,
        #[command(flatten)]
        files: Files,
    },
    /// Max-log-MAP turbo decoding; input is 6N LLRs `A B Y1 W1 Y2 W2`, stream by stream.
    Ctc {
        #[arg(long, value_name = "FILE")]
        params: PathBuf,
        #[arg(long, default_value_t = 8)]
        iters: usize,
        /// SISO count (1, 2 or 4); chosen from N when omitted.
        #[arg(long)]
        parallel: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        ext_scale: f64,
        /// Input is the subpacket `N_SCH,m,SPID` rather than the six streams.
        #[arg(long, value_name = "N_SCH,m,SPID")]
        chain: Option<String>,
        /// Transmitted bits; adds per-half-iteration BER lines.
        #[arg(long, value_name = "FILE")]
        reference: Option<PathBuf>,
        #[command(flatten)]
        files: Files,
    },
    /// Chase-Pyndiah product decoding; input is the (n+1)^2 block, row-major.
    Btc {
        #[arg(long, value_enum, required_unless_present = "params")]
        code: Option<CodeArg>,
        #[arg(long, default_value_t = 8)]
        half_iters: usize,
        #[arg(long, default_value_t = 4)]
        p: usize,
        /// BTC parameter set; overrides the flags above.
        #[arg(long, value_name = "FILE")]
        params: Option<PathBuf>,
        #[command(flatten)]
        files: Files,
    },
    /// Belief propagation; prints the codeword then a summary comment.
    Ldpc {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value = "nms")]
        mode: ModeArg,
        #[arg(long, default_value_t = CnMode::DEFAULT_NMS_FACTOR)]
        factor: f64,
        #[arg(long, value_enum, default_value = "layered")]
        schedule: ScheduleArg,
        #[arg(long, default_value_t = 40)]
        max_iters: usize,
        #[arg(long, value_enum, default_value = "syndrome")]
        early_stop: StopArg,
        #[command(flatten)]
        files: Files,
    },
}

#[derive(Subcommand)]
pub enum AddrgenCmd {
    /// CTC interleaver addresses, or a parallel-access report.
    Ctc {
        #[arg(long, value_name = "FILE")]
        params: PathBuf,
        /// Check the P-SISO schedule instead of listing addresses.
        #[arg(long, value_name = "P")]
        check_collisions: Option<usize>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Subblock interleaver addresses; the first line reports N_M.
    Subblock {
        /// Subblock or CTC parameter set.
        #[arg(long, value_name = "FILE")]
        params: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
pub struct SdArgs {
    /// SD request: block size and one entry per subpacket.
    #[arg(long, value_name = "FILE")]
    req: PathBuf,
    /// Concatenated received subpackets; without it, prints lengths and offsets.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

macro_rules! family {
    ($path:expr, $variant:ident) => {{
        let path: &Path = $path;
        match load_param_file(path)? {
            ParamSet::$variant(p) => p,
            other => {
                return Err(format!(
                    "{}: expected a {} parameter set, found {}",
                    path.display(),
                    stringify!($variant).to_lowercase(),
                    other.family()
                )
                .into())
            }
        }
    }};
}

pub fn load_cc(path: &Path) -> CliResult<CcParams> {
    Ok(family!(path, Cc))
}

pub fn load_ctc(path: &Path) -> CliResult<CtcParams> {
    Ok(family!(path, Ctc))
}

pub fn load_btc(path: &Path) -> CliResult<BtcParams> {
    Ok(family!(path, Btc))
}

pub fn load_ldpc(path: &Path) -> CliResult<LdpcParams> {
    Ok(family!(path, Ldpc))
}

fn load_sd(path: &Path) -> CliResult<SdParams> {
    Ok(family!(path, Sd))
}

pub fn btc_config(p: &BtcParams) -> BtcConfig {
    BtcConfig { half_iterations: p.half_iterations, alpha: p.alpha.clone(), beta: p.beta.clone(), p: p.p }
}

/// The standard weight schedule cut or padded to `h` half-iterations.
fn btc_flags_config(h: usize, p: usize) -> BtcConfig {
    let std = BtcConfig::standard();
    let pick = |v: &[f64], i: usize| v.get(i).or(v.last()).copied().unwrap_or(1.0);
    BtcConfig {
        half_iterations: h,
        alpha: (0..h).map(|i| pick(&std.alpha, i)).collect(),
        beta: (0..h).map(|i| pick(&std.beta, i)).collect(),
        p,
    }
}

fn graph_from_file(path: &Path) -> CliResult<TannerGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let g = if path.extension().is_some_and(|e| e == "alist") { parse_alist(&text)? } else { parse_qc(&text)? };
    Ok(g)
}

/// Loads the graph and, when given, the parameter-set decoder settings.
pub fn load_graph(args: &GraphArgs) -> CliResult<(TannerGraph, Option<LdpcParams>)> {
    match (&args.graph, &args.params) {
        (Some(g), _) => Ok((graph_from_file(g)?, None)),
        (None, Some(p)) => {
            let params = load_ldpc(p)?;
            Ok((params.graph.load(p.parent())?, Some(params)))
        }
        (None, None) => Err("one of --graph or --params is required".into()),
    }
}

pub fn ldpc_config(p: &LdpcParams) -> LdpcConfig {
    LdpcConfig { mode: p.mode, schedule: p.schedule, max_iters: p.max_iters, early_stop: p.early_stop }
}

/// Parses `N_SCH,m,SPID`.
pub fn parse_chain(spec: &str) -> CliResult<[usize; 3]> {
    let parts = spec
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| format!("--chain {spec:?}: {e}"))?;
    <[usize; 3]>::try_from(parts).map_err(|_| format!("--chain expects N_SCH,m,SPID, got {spec:?}").into())
}

/// Subblock interleaving plus symbol selection for one CTC parameter set.
pub fn chain_for(p: &CtcParams, spec: &str) -> CliResult<CtcChain> {
    let [n_sch, m, spid] = parse_chain(spec)?;
    let (sb_m, sb_j) = match p.subblock {
        Some(s) => (s.m, s.j),
        None => {
            let e = StandardTables::builtin().subblock_entry(p.n)?;
            (e.m, e.j)
        }
    };
    Ok(CtcChain {
        sd: SdRequest::new(p.n, n_sch, m, spid)?,
        addresses: subblock_addresses(p.n, sb_m, sb_j)?.addresses().to_vec(),
    })
}

pub fn parse_radix(s: &str) -> Result<u8, String> {
    match s {
        "2" => Ok(2),
        "4" => Ok(4),
        _ => Err(format!("radix must be 2 or 4, got {s}")),
    }
}

fn expect_len(what: &str, got: usize, expected: usize) -> CliResult<()> {
    if got != expected {
        return Err(format!("{what}: expected {expected} values, got {got}").into());
    }
    Ok(())
}

pub fn encode(cmd: EncodeCmd) -> CliResult<()> {
    let (bits, out): (Vec<Bit>, Option<PathBuf>) = match cmd {
        EncodeCmd::Cc { spec, files } => {
            let trellis = TrellisSpec::from_params(&load_cc(&spec)?)?;
            (cc_encode(&read_bits(&files.input)?, &trellis)?, files.out)
        }
        EncodeCmd::Ctc { params, chain, files } => {
            let p = load_ctc(&params)?;
            let code = CtcCode::from_params(&p)?;
            let info = read_bits(&files.input)?;
            expect_len("CTC information bits", info.len(), 2 * p.n)?;
            let cw = ctc_encode(&bits_to_couples(&info)?, &code)?;
            let coded = match chain {
                Some(c) => chain_for(&p, &c)?.transmit(cw.streams())?,
                None => cw.streams().concat(),
            };
            (coded, files.out)
        }
        EncodeCmd::Btc { code, files } => {
            let id = HammingCodeId::from(code);
            (product_encode(&read_bits(&files.input)?, id, id)?, files.out)
        }
        EncodeCmd::Ldpc { graph, files } => {
            let (g, _) = load_graph(&graph)?;
            (LdpcEncoder::new(&g).encode(&read_bits(&files.input)?)?, files.out)
        }
    };
    let mut w = output(out.as_deref())?;
    write_lines(&mut *w, &bits)?;
    Ok(w.flush()?)
}

pub fn decode(cmd: DecodeCmd) -> CliResult<()> {
    match cmd {
        DecodeCmd::Cc { spec, window, radix, files } => {
            let trellis = TrellisSpec::from_params(&load_cc(&spec)?)?;
            let cfg = ViterbiConfig { window, radix, mode: None };
            let bits = viterbi_decode(&read_llrs(&files.input)?, &trellis, &cfg)?;
            let mut w = output(files.out.as_deref())?;
            write_lines(&mut *w, &bits)?;
            Ok(w.flush()?)
        }
        DecodeCmd::Ctc { params, iters, parallel, window, ext_scale, chain, reference, files } => {
            let p = load_ctc(&params)?;
            let code = CtcCode::from_params(&p)?;
            let received = read_llrs(&files.input)?;
            let llrs = match chain {
                Some(c) => chain_for(&p, &c)?.receive(&received)?,
                None => {
                    expect_len("CTC LLRs", received.len(), 6 * p.n)?;
                    let s: Vec<Vec<f64>> = received.chunks(p.n).map(<[f64]>::to_vec).collect();
                    CtcLlrs::from_streams(<[Vec<f64>; 6]>::try_from(s).expect("six streams"))
                }
            };
            let cfg = TurboConfig { iterations: iters, parallelism: parallel, window, ext_scale };
            let out = turbo_decode(&llrs, &code, &cfg)?;
            let mut w = output(files.out.as_deref())?;
            for c in &out.couples {
                writeln!(w, "{}{}", c.a, c.b)?;
            }
            writeln!(w, "# parallelism={} window={}", out.parallelism, out.window)?;
            if let Some(r) = reference {
                let truth = read_bits(&r)?;
                expect_len("reference bits", truth.len(), 2 * p.n)?;
                writeln!(w, "# iteration,half,bit_errors,ber")?;
                for (h, half) in out.half_iterations.iter().enumerate() {
                    let errors = count_bit_errors(&couples_to_bits(&half.decisions), &truth);
                    let ber = errors as f64 / truth.len() as f64;
                    writeln!(w, "# {},{},{errors},{ber:.6e}", h / 2 + 1, h % 2 + 1)?;
                }
            }
            Ok(w.flush()?)
        }
        DecodeCmd::Btc { code, half_iters, p, params, files } => {
            let (id, cfg) = match params {
                Some(path) => {
                    let bp = load_btc(&path)?;
                    (bp.code, btc_config(&bp))
                }
                None => (code.expect("clap enforces --code").into(), btc_flags_config(half_iters, p)),
            };
            let block = ProductBlock::square(id, read_llrs(&files.input)?)?;
            let out = btc_decode(&block, &cfg)?;
            let mut w = output(files.out.as_deref())?;
            write_lines(&mut *w, &out.info)?;
            Ok(w.flush()?)
        }
        DecodeCmd::Ldpc { graph, mode, factor, schedule, max_iters, early_stop, files } => {
            let (g, params) = load_graph(&graph)?;
            let cfg = match params {
                Some(p) => ldpc_config(&p),
                None => LdpcConfig {
                    mode: match mode {
                        ModeArg::Spa => CnMode::Spa,
                        ModeArg::Ms => CnMode::MinSum,
                        ModeArg::Nms => CnMode::NormalizedMinSum { factor },
                    },
                    schedule: match schedule {
                        ScheduleArg::Flooding => Schedule::Flooding,
                        ScheduleArg::Layered => Schedule::Layered,
                    },
                    max_iters,
                    early_stop: match early_stop {
                        StopArg::None => EarlyStop::None,
                        StopArg::Syndrome => EarlyStop::Syndrome,
                        StopArg::Stability => EarlyStop::Stability,
                    },
                },
            };
            let out = ldpc_decode(&g, &read_llrs(&files.input)?, &cfg)?;
            let mut w = output(files.out.as_deref())?;
            write_lines(&mut *w, &out.bits)?;
            writeln!(w, "# iterations={} termination={:?}", out.iterations, out.termination)?;
            Ok(w.flush()?)
        }
    }
}

pub fn addrgen(cmd: AddrgenCmd) -> CliResult<()> {
    match cmd {
        AddrgenCmd::Ctc { params, check_collisions, out } => {
            let p = load_ctc(&params)?;
            let table = ctc_interleave_table(p.n, p.p0, p.p_prime)?;
            let mut w = output(out.as_deref())?;
            match check_collisions {
                None => write_lines(&mut *w, table.forward())?,
                Some(par) => match build_parallel_schedule(&table, par)? {
                    ScheduleOutcome::CollisionFree(s) => {
                        let shift = s.shift.map_or("none".to_string(), |d| format!("{d:?}").to_lowercase());
                        writeln!(w, "# N={} P={par}: collision-free, shift={shift}", p.n)?;
                    }
                    ScheduleOutcome::Collisions(r) => {
                        writeln!(w, "# N={} P={par}: {} collisions", p.n, r.collisions.len())?;
                        writeln!(w, "cycle,bank,sisos")?;
                        for c in &r.collisions {
                            let sisos: Vec<String> = c.sisos.iter().map(usize::to_string).collect();
                            writeln!(w, "{},{},{}", c.cycle, c.bank, sisos.join(" "))?;
                        }
                    }
                },
            }
            Ok(w.flush()?)
        }
        AddrgenCmd::Subblock { params, out } => {
            let (n, m, j) = match load_param_file(&params)? {
                ParamSet::Subblock(s) => (s.n, s.m, s.j),
                ParamSet::Ctc(c) => match c.subblock {
                    Some(s) => (c.n, s.m, s.j),
                    None => {
                        let e = StandardTables::builtin().subblock_entry(c.n)?;
                        (c.n, e.m, e.j)
                    }
                },
                other => {
                    return Err(format!("expected a subblock or ctc parameter set, found {}", other.family()).into())
                }
            };
            let a = subblock_addresses(n, m, j)?;
            let mut w = output(out.as_deref())?;
            writeln!(w, "# N={n} m={m} J={j} N_M={}", a.tentative)?;
            write_lines(&mut *w, a.addresses())?;
            Ok(w.flush()?)
        }
    }
}

pub fn sd(args: SdArgs) -> CliResult<()> {
    let p = load_sd(&args.req)?;
    let reqs = p.subpackets.iter().map(|s| SdRequest::new(p.n, s.n_sch, s.m, s.spid)).collect::<Result<Vec<_>, _>>()?;
    let mut w = output(args.out.as_deref())?;
    match args.input {
        None => {
            writeln!(w, "subpacket,N_SCH,m,SPID,length,start")?;
            for (k, r) in reqs.iter().enumerate() {
                writeln!(w, "{k},{},{},{},{},{}", r.n_sch, r.m, r.spid, r.length(), r.start())?;
            }
        }
        Some(path) => {
            let received = read_llrs(&path)?;
            let total: usize = reqs.iter().map(SdRequest::length).sum();
            expect_len("received subpackets", received.len(), total)?;
            let mut combiner = HarqCombiner::new(p.n);
            let mut offset = 0;
            for r in &reqs {
                combiner.add(&received[offset..offset + r.length()], r)?;
                offset += r.length();
            }
            write_lines(&mut *w, combiner.block())?;
        }
    }
    Ok(w.flush()?)
}
