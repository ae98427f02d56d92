//! Shared fixtures for the decoder benchmarks: one noisy block per code family,
//! drawn from the same per-block streams the BER harness uses.

use fec_core::btc::{product_encode, HammingCodeId, ProductBlock};
use fec_core::conv::{cc_encode, TrellisSpec};
use fec_core::ctc::{ctc_encode, CtcCode, CtcLlrs};
use fec_core::ldpc::{parse_qc, LdpcEncoder, TannerGraph};
use fec_core::sim::{awgn_llr_rng, block_rng, ChannelConfig};
use fec_core::types::{bits_to_couples, Bit};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0xBE7C;

fn channel(ebno_db: f64, rate: f64) -> (ChaCha8Rng, f64) {
    let sigma2 = ChannelConfig { ebno_db, rate, seed: SEED }.sigma2();
    (block_rng(SEED, 0), sigma2)
}

fn bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<Bit> {
    (0..n).map(|_| rng.random_range(0..2)).collect()
}

/// Rate-1/2 K=7 code, `info_len` bits plus tail.
pub fn cc_block(info_len: usize, ebno_db: f64) -> (TrellisSpec, Vec<f64>) {
    let spec = TrellisSpec::wimax_64_state();
    let (mut rng, sigma2) = channel(ebno_db, 0.5);
    let cw = cc_encode(&bits(&mut rng, info_len), &spec).expect("non-empty block");
    let llrs = awgn_llr_rng(&cw, sigma2, &mut rng);
    (spec, llrs)
}

/// Rate-1/3 turbo block of `n` couples.
pub fn ctc_block(n: usize, ebno_db: f64) -> (CtcCode, CtcLlrs) {
    let code = CtcCode::standard(n).expect("supported block size");
    let (mut rng, sigma2) = channel(ebno_db, 1.0 / 3.0);
    let pairs = bits_to_couples(&bits(&mut rng, 2 * n)).expect("even length");
    let cw = ctc_encode(&pairs, &code).expect("valid block");
    let llrs = CtcLlrs::from_streams(cw.streams().map(|s| awgn_llr_rng(s, sigma2, &mut rng)));
    (code, llrs)
}

pub fn btc_block(code: HammingCodeId, ebno_db: f64) -> ProductBlock {
    let (k, n) = (code.k(), code.extended_length());
    let (mut rng, sigma2) = channel(ebno_db, (k * k) as f64 / (n * n) as f64);
    let cw = product_encode(&bits(&mut rng, k * k), code, code).expect("matching length");
    ProductBlock::square(code, awgn_llr_rng(&cw, sigma2, &mut rng)).expect("matching length")
}

/// The shipped rate-1/2 QC code (n = 384).
pub fn qc_graph() -> TannerGraph {
    parse_qc(include_str!("../../../configs/ldpc/qc_384_r12.txt")).expect("shipped graph parses")
}

pub fn ldpc_block(g: &TannerGraph, ebno_db: f64) -> Vec<f64> {
    let enc = LdpcEncoder::new(g);
    let (mut rng, sigma2) = channel(ebno_db, enc.k() as f64 / enc.n() as f64);
    let cw = enc.encode(&bits(&mut rng, enc.k())).expect("matching length");
    awgn_llr_rng(&cw, sigma2, &mut rng)
}
