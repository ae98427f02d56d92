//! Noiseless encode/decode round trips for every code family.

use fec_core::btc::{btc_decode, product_encode, BtcConfig, HammingCodeId, ProductBlock};
use fec_core::conv::{cc_encode, viterbi_decode, TrellisSpec, ViterbiConfig};
use fec_core::ctc::{ctc_encode, turbo_decode, CtcCode, CtcLlrs, TurboConfig};
use fec_core::ldpc::{ldpc_decode, parse_qc, LdpcConfig, LdpcEncoder, Termination};
use fec_core::params::StandardTables;
use fec_core::types::{bits_to_couples, bpsk, Bit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<Bit> {
    (0..n).map(|_| rng.random_range(0..2)).collect()
}

fn noiseless(bits: &[Bit]) -> Vec<f64> {
    bits.iter().map(|&b| 10.0 * bpsk(b)).collect()
}

#[test]
fn cc() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let specs = [TrellisSpec::wimax_64_state(), TrellisSpec::new(3, &[0o7, 0o5], Some(0o7)).unwrap()];
    for spec in &specs {
        for radix in [2, 4] {
            let info = random_bits(&mut rng, 333);
            let cw = cc_encode(&info, spec).unwrap();
            let cfg = ViterbiConfig { window: 32, radix, mode: None };
            assert_eq!(viterbi_decode(&noiseless(&cw), spec, &cfg).unwrap(), info);
        }
    }
}

#[test]
fn ctc_every_standard_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in StandardTables::builtin().supported_n() {
        let code = CtcCode::standard(n).unwrap();
        let pairs = bits_to_couples(&random_bits(&mut rng, 2 * n)).unwrap();
        let cw = ctc_encode(&pairs, &code).unwrap();
        let llrs = CtcLlrs::from_streams(cw.streams().map(noiseless));
        // N=108 has no collision-free parallel schedule; it is decoded with one SISO.
        let parallelism = if n == 108 { Some(1) } else { None };
        let cfg = TurboConfig { iterations: 1, parallelism, ..Default::default() };
        assert_eq!(turbo_decode(&llrs, &code, &cfg).unwrap().couples, pairs, "N={n}");
    }
}

#[test]
fn btc_every_code() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for code in HammingCodeId::ALL {
        let info = random_bits(&mut rng, code.k() * code.k());
        let cw = product_encode(&info, code, code).unwrap();
        let out = btc_decode(&ProductBlock::square(code, noiseless(&cw)).unwrap(), &BtcConfig::standard()).unwrap();
        assert_eq!(out.info, info, "{code}");
        assert_eq!(out.per_half_iteration[0], info);
    }
}

#[test]
fn ldpc_qc_code() {
    let text =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/ldpc/qc_384_r12.txt")).unwrap();
    let g = parse_qc(&text).unwrap();
    let enc = LdpcEncoder::new(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let info = random_bits(&mut rng, enc.k());
    let cw = enc.encode(&info).unwrap();
    let out = ldpc_decode(&g, &noiseless(&cw), &LdpcConfig::default()).unwrap();
    assert_eq!(out.bits, cw);
    assert_eq!(out.iterations, 1);
    assert_eq!(out.termination, Termination::Syndrome);
    assert_eq!(enc.extract_info(&out.bits), info);
}
