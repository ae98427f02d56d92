//! Monte-Carlo BER/FER measurement over a BPSK/AWGN channel.
//!
//! Every block draws its data and noise from its own ChaCha8 stream (selected by
//! the block index under the run seed), so results do not depend on the number of
//! worker threads. The same seed reuses the same blocks at every Eb/N0 point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::btc::{btc_decode, product_encode, BtcConfig, HammingCodeId, ProductBlock};
use crate::conv::{cc_encode, viterbi_decode, TrellisSpec, ViterbiConfig};
use crate::ctc::{ctc_encode, turbo_decode, CtcCode, CtcLlrs, TurboConfig};
use crate::error::{FecError, Result};
use crate::interleave::{
    subblock_addresses, subblock_deinterleave, subblock_interleave, symbol_deselect, symbol_select, SdRequest,
    SubblockLayout,
};
use crate::ldpc::{ldpc_decode, LdpcConfig, LdpcEncoder, TannerGraph};
use crate::params::StandardTables;
use crate::types::{bits_to_couples, bpsk, couples_to_bits, hard_bit, Bit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelConfig {
    pub ebno_db: f64,
    /// Information bits per transmitted bit.
    pub rate: f64,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(FecError::invalid("rate", format!("must lie in (0, 1], got {}", self.rate)));
        }
        if !self.ebno_db.is_finite() {
            return Err(FecError::invalid("ebno_db", "must be finite"));
        }
        Ok(())
    }

    /// Noise variance `1 / (2·R·10^(Eb/N0 / 10))`.
    pub fn sigma2(&self) -> f64 {
        1.0 / (2.0 * self.rate * 10f64.powf(self.ebno_db / 10.0))
    }
}

/// Generator for block `block` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// BPSK over AWGN with noise variance `sigma2`, returned as LLRs `2y/σ²`.
pub fn awgn_llr_rng<R: Rng + ?Sized>(bits: &[Bit], sigma2: f64, rng: &mut R) -> Vec<f64> {
    let sigma = sigma2.sqrt();
    bits.iter()
        .map(|&b| {
            let n: f64 = StandardNormal.sample(rng);
            2.0 * (bpsk(b) + sigma * n) / sigma2
        })
        .collect()
}

/// Channel LLRs for `bits` using stream 0 of the configured seed.
pub fn awgn_llr(bits: &[Bit], cfg: &ChannelConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    Ok(awgn_llr_rng(bits, cfg.sigma2(), &mut block_rng(cfg.seed, 0)))
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<Bit> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

/// Rate matching for the CTC receive chain: subblock interleaving and symbol
/// selection at the transmitter, their inverses at the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct CtcChain {
    pub sd: SdRequest,
    pub addresses: Vec<usize>,
}

impl CtcChain {
    /// Chain for a standard block size with the given subpacket.
    pub fn standard(n: usize, n_sch: usize, m: usize, spid: usize) -> Result<Self> {
        let e = StandardTables::builtin().subblock_entry(n)?;
        Ok(CtcChain {
            sd: SdRequest::new(n, n_sch, m, spid)?,
            addresses: subblock_addresses(n, e.m, e.j)?.addresses().to_vec(),
        })
    }

    pub fn transmit<T: Copy + Default>(&self, streams: [&[T]; 6]) -> Result<Vec<T>> {
        let block = subblock_interleave(streams, &self.addresses)?;
        symbol_select(&block, &self.sd)
    }

    pub fn receive(&self, received: &[f64]) -> Result<CtcLlrs> {
        let block = symbol_deselect(received, &self.sd)?;
        let layout = SubblockLayout::from_received(&block, self.addresses.len())?;
        Ok(CtcLlrs::from_blocks(&subblock_deinterleave(&layout, &self.addresses)?))
    }
}

/// A code under test together with its decoder settings.
#[derive(Debug, Clone)]
pub enum SimCode {
    Uncoded { n: usize },
    Cc { spec: TrellisSpec, info_len: usize, viterbi: ViterbiConfig },
    Ctc { code: CtcCode, turbo: TurboConfig, chain: Option<CtcChain> },
    Btc { code: HammingCodeId, cfg: BtcConfig },
    Ldpc { graph: TannerGraph, encoder: LdpcEncoder, cfg: LdpcConfig },
}

/// Errors and effort for one decoded block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOutcome {
    pub bit_errors: u64,
    pub frame_error: bool,
    pub iterations: f64,
    /// Bit errors after each decoding stage (half-iteration), when the decoder has them.
    pub stage_errors: Vec<u64>,
}

fn errors(a: &[Bit], b: &[Bit]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

impl SimCode {
    pub fn name(&self) -> &'static str {
        match self {
            SimCode::Uncoded { .. } => "uncoded",
            SimCode::Cc { .. } => "cc",
            SimCode::Ctc { .. } => "ctc",
            SimCode::Btc { .. } => "btc",
            SimCode::Ldpc { .. } => "ldpc",
        }
    }

    pub fn info_len(&self) -> usize {
        match self {
            SimCode::Uncoded { n } => *n,
            SimCode::Cc { info_len, .. } => *info_len,
            SimCode::Ctc { code, .. } => 2 * code.n,
            SimCode::Btc { code, .. } => code.k() * code.k(),
            SimCode::Ldpc { encoder, .. } => encoder.k(),
        }
    }

    /// Bits put on the channel per block.
    pub fn coded_len(&self) -> usize {
        match self {
            SimCode::Uncoded { n } => *n,
            SimCode::Cc { spec, info_len, .. } => (info_len + spec.tail_len()) * spec.outputs(),
            SimCode::Ctc { code, chain: None, .. } => 6 * code.n,
            SimCode::Ctc { chain: Some(c), .. } => c.sd.length(),
            SimCode::Btc { code, .. } => code.extended_length() * code.extended_length(),
            SimCode::Ldpc { encoder, .. } => encoder.n(),
        }
    }

    pub fn rate(&self) -> f64 {
        (self.info_len() as f64 / self.coded_len() as f64).min(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.info_len() == 0 {
            return Err(FecError::invalid("block", "no information bits"));
        }
        Ok(())
    }

    /// Encodes random data from `rng`, transmits it and decodes.
    pub fn run_block(&self, rng: &mut ChaCha8Rng, sigma2: f64) -> Result<BlockOutcome> {
        let info = random_bits(rng, self.info_len());
        let single = |decoded: &[Bit], iterations: f64| {
            let e = errors(&info, decoded);
            BlockOutcome { bit_errors: e, frame_error: e > 0, iterations, stage_errors: vec![e] }
        };
        match self {
            SimCode::Uncoded { .. } => {
                let llr = awgn_llr_rng(&info, sigma2, rng);
                Ok(single(&llr.iter().map(|&l| hard_bit(l)).collect::<Vec<_>>(), 0.0))
            }
            SimCode::Cc { spec, viterbi, .. } => {
                let cw = cc_encode(&info, spec)?;
                let llr = awgn_llr_rng(&cw, sigma2, rng);
                Ok(single(&viterbi_decode(&llr, spec, viterbi)?, 1.0))
            }
            SimCode::Ctc { code, turbo, chain } => {
                let pairs = bits_to_couples(&info)?;
                let cw = ctc_encode(&pairs, code)?;
                let llrs = match chain {
                    None => {
                        let s = cw.streams().map(|s| awgn_llr_rng(s, sigma2, rng));
                        CtcLlrs::from_streams(s)
                    }
                    Some(c) => c.receive(&awgn_llr_rng(&c.transmit(cw.streams())?, sigma2, rng))?,
                };
                let out = turbo_decode(&llrs, code, turbo)?;
                let stage_errors =
                    out.half_iterations.iter().map(|h| errors(&info, &couples_to_bits(&h.decisions))).collect();
                let e = errors(&info, &couples_to_bits(&out.couples));
                Ok(BlockOutcome {
                    bit_errors: e,
                    frame_error: e > 0,
                    iterations: turbo.iterations as f64,
                    stage_errors,
                })
            }
            SimCode::Btc { code, cfg } => {
                let cw = product_encode(&info, *code, *code)?;
                let llr = awgn_llr_rng(&cw, sigma2, rng);
                let out = btc_decode(&ProductBlock::square(*code, llr)?, cfg)?;
                let stage_errors = out.per_half_iteration.iter().map(|d| errors(&info, d)).collect();
                let e = errors(&info, &out.info);
                Ok(BlockOutcome {
                    bit_errors: e,
                    frame_error: e > 0,
                    iterations: cfg.half_iterations as f64 / 2.0,
                    stage_errors,
                })
            }
            SimCode::Ldpc { graph, encoder, cfg } => {
                let cw = encoder.encode(&info)?;
                let llr = awgn_llr_rng(&cw, sigma2, rng);
                let out = ldpc_decode(graph, &llr, cfg)?;
                Ok(single(&encoder.extract_info(&out.bits), out.iterations as f64))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub ebno_db: Vec<f64>,
    pub seed: u64,
    /// Fixed block count per point; `None` applies the bit and frame-error limits.
    pub blocks: Option<u64>,
    pub max_bits: u64,
    pub max_frame_errors: u64,
    /// Blocks decoded between stopping-rule checks.
    pub batch: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { ebno_db: vec![0.0], seed: 1, blocks: None, max_bits: 10_000_000, max_frame_errors: 100, batch: 64 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.blocks == Some(0) {
            return Err(FecError::invalid("blocks", "must be at least 1"));
        }
        if self.blocks.is_none() && (self.max_bits == 0 || self.max_frame_errors == 0) {
            return Err(FecError::invalid("stopping rule", "limits must be positive"));
        }
        if self.batch == 0 {
            return Err(FecError::invalid("batch", "must be at least 1"));
        }
        if self.ebno_db.is_empty() {
            return Err(FecError::EmptyInput);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerPoint {
    pub ebno_db: f64,
    pub blocks: u64,
    pub info_bits: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub mean_iters: f64,
    /// BER after each half-iteration for iterative decoders.
    pub stage_ber: Vec<f64>,
    /// Set when the decoder failed and the point was aborted.
    pub error: Option<String>,
}

pub const CSV_HEADER: &str = "code,params_hash,ebno_db,blocks,bit_errors,frame_errors,ber,fer,mean_iters";

impl BerPoint {
    /// One CSV row, or a `#` diagnostic line for an aborted point.
    pub fn csv_row(&self, code: &str, params_hash: &str) -> String {
        match &self.error {
            Some(e) => format!("# {code},{params_hash},{:.3},aborted: {e}", self.ebno_db),
            None => format!(
                "{code},{params_hash},{:.3},{},{},{},{:.6e},{:.6e},{:.4}",
                self.ebno_db, self.blocks, self.bit_errors, self.frame_errors, self.ber, self.fer, self.mean_iters
            ),
        }
    }
}

/// Worker cap from `FEC_THREADS`, if set to a positive integer.
pub fn configured_threads() -> Option<usize> {
    std::env::var("FEC_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn run_point(code: &SimCode, cfg: &SimConfig, ebno_db: f64) -> BerPoint {
    let ch = ChannelConfig { ebno_db, rate: code.rate(), seed: cfg.seed };
    let sigma2 = ch.sigma2();
    let info_len = code.info_len() as u64;
    let (mut blocks, mut bit_errors, mut frame_errors) = (0u64, 0u64, 0u64);
    let mut iters = 0.0;
    let mut stages: Vec<u64> = Vec::new();
    let mut error = None;
    loop {
        let remaining = match cfg.blocks {
            Some(total) => total - blocks,
            None => cfg.batch,
        };
        let n = remaining.min(cfg.batch);
        if n == 0 {
            break;
        }
        let results: Vec<Result<BlockOutcome>> =
            (blocks..blocks + n).into_par_iter().map(|b| code.run_block(&mut block_rng(cfg.seed, b), sigma2)).collect();
        for r in results {
            match r {
                Ok(o) => {
                    bit_errors += o.bit_errors;
                    frame_errors += u64::from(o.frame_error);
                    iters += o.iterations;
                    if stages.len() < o.stage_errors.len() {
                        stages.resize(o.stage_errors.len(), 0);
                    }
                    stages.iter_mut().zip(&o.stage_errors).for_each(|(s, e)| *s += e);
                    blocks += 1;
                }
                Err(e) => {
                    error.get_or_insert(e.to_string());
                }
            }
        }
        if error.is_some() {
            break;
        }
        if cfg.blocks.is_none() && (blocks * info_len >= cfg.max_bits || frame_errors >= cfg.max_frame_errors) {
            break;
        }
    }
    let bits = (blocks * info_len).max(1) as f64;
    BerPoint {
        ebno_db,
        blocks,
        info_bits: blocks * info_len,
        bit_errors,
        frame_errors,
        ber: bit_errors as f64 / bits,
        fer: frame_errors as f64 / blocks.max(1) as f64,
        mean_iters: iters / blocks.max(1) as f64,
        stage_ber: stages.iter().map(|&s| s as f64 / bits).collect(),
        error,
    }
}

/// Runs every Eb/N0 point in order, handing each finished point to `emit`.
pub fn run_ber(code: &SimCode, cfg: &SimConfig, mut emit: impl FnMut(&BerPoint)) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    code.validate()?;
    for &e in &cfg.ebno_db {
        ChannelConfig { ebno_db: e, rate: code.rate(), seed: cfg.seed }.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(configured_threads().unwrap_or(0))
        .build()
        .map_err(|e| FecError::invalid("FEC_THREADS", e.to_string()))?;
    let mut points = Vec::with_capacity(cfg.ebno_db.len());
    for &e in &cfg.ebno_db {
        let p = pool.install(|| run_point(code, cfg, e));
        emit(&p);
        points.push(p);
    }
    Ok(points)
}

/// Parses `a:b:step` (inclusive) or a single value.
pub fn parse_ebno_range(s: &str) -> Result<Vec<f64>> {
    let bad = || FecError::invalid("ebno", format!("expected a:b:step or a number, got {s:?}"));
    let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    match parts.as_slice() {
        [a] if a.is_finite() => Ok(vec![*a]),
        [a, b, step] if a.is_finite() && b.is_finite() && *step > 0.0 && a <= b => {
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| ((a + i as f64 * step) * 1e9).round() / 1e9).collect())
        }
        _ => Err(bad()),
    }
}
