//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Oracles here are written from the definitions (register-level encoders,
//! exhaustive enumeration, closed forms) rather than by calling the library's
//! own helpers, so each check compares two independent routes.

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use fec_core::archmodel::{
    btc_required_clock, ceil_mhz, ctc_throughput, sd_required_clock, subblock_throughput, sweep_fig11, BtcQuery,
    CtcQuery, Fig11Config,
};
use fec_core::btc::{
    btc_decode, chase_search, elementary_siso, product_encode, BtcConfig, ExtHammingCode, HammingCodeId, ProductBlock,
};
use fec_core::conv::{cc_encode, viterbi_decode, TrellisSpec, ViterbiConfig};
use fec_core::ctc::{
    ctc_encode, siso_window, turbo_decode, CtcCode, CtcLlrs, DuoTrellis, Extrinsic, TurboConfig, STATES,
};
use fec_core::interleave::{
    build_parallel_schedule, ctc_interleave_direct, ctc_interleave_table, select_parallelism, subblock_addresses,
    ScheduleOutcome,
};
use fec_core::ldpc::{
    ldpc_decode, parse_alist, parse_qc, CnMode, EarlyStop, LdpcConfig, LdpcEncoder, Schedule, TannerGraph,
};
use fec_core::params::StandardTables;
use fec_core::sim::{awgn_llr_rng, block_rng, run_ber, ChannelConfig, SimCode, SimConfig};
use fec_core::types::{bits_to_couples, couples_to_bits, Bit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: fec_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn within(what: &str, t: Instant, limit: Duration) -> Result<(), String> {
    let el = t.elapsed();
    ensure(el <= limit, || format!("{what} took {el:.1?}, limit {limit:?}"))
}

fn noiseless(bits: &[Bit]) -> Vec<f64> {
    bits.iter().map(|&b| if b == 0 { 8.0 } else { -8.0 }).collect()
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<Bit> {
    (0..n).map(|_| rng.random_range(0..2)).collect()
}

// ---------------------------------------------------------------- 1

fn throughput_anchors() -> Outcome {
    let mut clocks = Vec::new();
    for (code, want) in [(HammingCodeId::H15_11, 84.0), (HammingCodeId::H31_26, 31.0), (HammingCodeId::H63_57, 14.0)] {
        let mhz = ceil_mhz(lib(btc_required_clock(&BtcQuery::square(code, 4.5, 1.0), 75e6))?);
        ensure(mhz == want, || format!("BTC {code:?}: {mhz} MHz, expected {want}"))?;
        clocks.push(format!("{mhz}"));
    }

    let ctc = |p: usize, f_clk: f64| {
        lib(ctc_throughput(&CtcQuery { k: 2.0, n_t: 480.0, iterations: 8.0, sp: 1.0, w: 32.0, p, id_oh: 0.0, f_clk }))
    };
    let p4 = ctc(4, 150e6)?.asymptotic;
    let p1 = ctc(1, 600e6)?.asymptotic;
    ensure(rel(p4, 75e6) < 1e-12, || format!("CTC P=4 at 150 MHz gives {p4}"))?;
    ensure(rel(p1, 75e6) < 1e-12, || format!("CTC P=1 at 600 MHz gives {p1}"))?;

    let sd4 = lib(sd_required_clock(4.0, 225e6))?;
    let sd1 = lib(sd_required_clock(1.0, 225e6))?;
    ensure(rel(sd4, 112.5e6) < 1e-12 && ceil_mhz(sd4) == 113.0, || format!("SD p=4 needs {sd4} Hz"))?;
    ensure(rel(sd1, 450e6) < 1e-12 && ceil_mhz(sd1) == 450.0, || format!("SD p=1 needs {sd1} Hz"))?;

    let sub = lib(subblock_throughput(50e6))?;
    ensure(rel(sub, 225e6) < 1e-12, || format!("subblock at 50 MHz gives {sub}"))?;

    Ok(format!(
        "BTC {{{}}} MHz; CTC 75 Mb/s at 150/600 MHz; SD {} -> {} MHz, {} MHz; subblock {} MLLR/s",
        clocks.join(", "),
        sd4 / 1e6,
        ceil_mhz(sd4),
        sd1 / 1e6,
        sub / 1e6
    ))
}

// ---------------------------------------------------------------- 2

fn fig11_sweep() -> Outcome {
    let cfg = Fig11Config::default();
    ensure(
        cfg.f_clk == 200e6 && cfg.w == 32.0 && cfg.iterations == 8.0 && cfg.sp == 1.0 && cfg.target == 75e6,
        || format!("unexpected operating point {cfg:?}"),
    )?;
    let sweep = lib(sweep_fig11(&cfg))?;
    for p in [1, 2] {
        let curve = sweep.curve(p).ok_or(format!("no P={p} curve"))?;
        ensure(curve.iter().all(|r| !r.meets_target), || format!("P={p} reaches the target"))?;
    }
    let p4 = sweep.curve(4).ok_or("no P=4 curve")?;
    let first = p4.iter().find(|r| r.meets_target).ok_or("P=4 never meets the target")?;
    ensure(first.n == 480, || format!("P=4 first meets the target at N={}", first.n))?;

    // Closed form at the crossing: k·N·f / (2I·SP·(N/P + W)).
    let direct = 2.0 * 480.0 * 200e6 / (2.0 * 8.0 * (480.0 / 4.0 + 32.0));
    ensure(rel(first.throughput, direct) < 1e-12, || format!("N=480 P=4: {} vs {direct}", first.throughput))?;
    ensure(rel(first.throughput, 78.9e6) <= 1e-3, || {
        format!("N=480 P=4: {} not within 0.1% of 78.9 Mb/s", first.throughput)
    })?;

    for row in &sweep.actual {
        let p = lib(select_parallelism(row.n))?;
        let fixed = sweep.curve(p).and_then(|c| c.iter().find(|r| r.n == row.n)).ok_or("missing point")?;
        ensure(row.p == p && row.throughput == fixed.throughput, || format!("actual curve off at N={}", row.n))?;
    }
    Ok(format!("only P=4 meets 75 Mb/s, first at N=480 with {:.3} Mb/s", first.throughput / 1e6))
}

// ---------------------------------------------------------------- 3

fn reverse_bits(y: usize, m: u32) -> usize {
    (0..m).fold(0, |acc, i| acc | (((y >> i) & 1) << (m - 1 - i)))
}

fn subblock_worst_case() -> Outcome {
    let tables = StandardTables::builtin();
    let mut n144 = None;
    for e in &tables.subblock {
        let got = lib(subblock_addresses(e.n, e.m, e.j))?;
        // Reference generator: T_k = 2^m (k mod J) + BRO_m(floor(k/J)), pruned to < N.
        let mut expect = Vec::with_capacity(e.n);
        let mut k = 0;
        while expect.len() < e.n {
            let t = (1 << e.m) * (k % e.j) + reverse_bits(k / e.j, e.m);
            if t < e.n {
                expect.push(t);
            }
            k += 1;
        }
        ensure(got.addresses() == expect.as_slice(), || format!("N={}: address list differs", e.n))?;
        ensure(got.tentative == k, || format!("N={}: N_M {} vs {k}", e.n, got.tentative))?;
        let mut sorted = expect.clone();
        sorted.sort_unstable();
        ensure(sorted.iter().copied().eq(0..e.n), || format!("N={}: not a bijection", e.n))?;
        let bound = (4 * e.n).div_ceil(3) + 1;
        ensure(k <= bound, || format!("N={}: N_M={k} exceeds {bound}", e.n))?;
        if e.n == 144 {
            n144 = Some(k);
        }
    }
    ensure(n144 == Some(191), || format!("N=144 gives N_M={n144:?}"))?;
    Ok(format!("N=144 -> N_M=191; {} block sizes bijective and within ceil(4N/3)+1", tables.subblock.len()))
}

// ---------------------------------------------------------------- 4

fn parallel_interleaver() -> Outcome {
    let tables = StandardTables::builtin();
    let mut free = 0;
    for n in tables.supported_n() {
        let e = lib(tables.interleaver_entry(n))?;
        let pp = e.p_prime();
        let table = lib(ctc_interleave_table(n, e.p0, pp))?;
        let formula: Vec<usize> = (0..n).map(|j| (e.p0 * j + pp[j % 4]) % n).collect();
        ensure(table.forward() == formula.as_slice(), || format!("N={n}: incremental table differs from the formula"))?;
        ensure(ctc_interleave_direct(n, e.p0, pp) == formula, || format!("N={n}: direct table differs"))?;

        let mandated = lib(select_parallelism(n))?;
        for p in [1, 2, 4] {
            if n % p != 0 {
                continue;
            }
            let seg = n / p;
            // Bank of every access, from the table alone.
            let banks: Vec<Vec<usize>> =
                (0..seg).map(|t| (0..p).map(|k| formula[t + k * seg] / seg).collect()).collect();
            let clash = banks.iter().any(|b| (0..p).any(|i| (i + 1..p).any(|j| b[i] == b[j])));
            let outcome = lib(build_parallel_schedule(&table, p))?;
            ensure(outcome.is_collision_free() == !clash, || format!("N={n} P={p}: collision verdict differs"))?;
            if p == mandated {
                ensure(!clash, || format!("N={n}: mandated P={p} collides"))?;
            }
            if n == 108 && p > 1 {
                ensure(clash, || format!("N=108 P={p}: no collision found"))?;
            }
            if let ScheduleOutcome::CollisionFree(s) = outcome {
                free += 1;
                let rot = |sign: isize| {
                    banks.iter().all(|b| {
                        (0..p).all(|k| b[k] == (b[0] as isize + sign * k as isize).rem_euclid(p as isize) as usize)
                    })
                };
                ensure(rot(1) || rot(-1), || format!("N={n} P={p}: circular shift fails"))?;
                ensure(s.shift.is_some(), || format!("N={n} P={p}: schedule reports no shift"))?;
                for (t, c) in s.cycles.iter().enumerate() {
                    ensure(c.bank == banks[t], || format!("N={n} P={p}: bank mismatch at cycle {t}"))?;
                }
            }
        }
    }
    Ok(format!("direct = incremental for all N; mandated P collision-free; N=108 collides at P=2,4; shift holds in {free} free schedules"))
}

// ---------------------------------------------------------------- 5

/// Feed-forward encoder: register `u·2^(K-1) | s`, outputs `parity(reg & g)`.
fn ref_cc_encode(bits: &[Bit], k: u32, gens: &[u32]) -> Vec<Bit> {
    let mut s = 0u32;
    let mut out = Vec::new();
    for &u in bits.iter().chain(std::iter::repeat_n(&0, (k - 1) as usize)) {
        let reg = ((u as u32) << (k - 1)) | s;
        out.extend(gens.iter().map(|&g| ((reg & g).count_ones() & 1) as Bit));
        s = reg >> 1;
    }
    out
}

fn ml_decode(llrs: &[f64], len: usize, k: u32, gens: &[u32]) -> Vec<Bit> {
    let mut best = (f64::NEG_INFINITY, 0usize);
    for word in 0..1usize << len {
        let bits: Vec<Bit> = (0..len).map(|i| ((word >> i) & 1) as Bit).collect();
        let corr: f64 =
            ref_cc_encode(&bits, k, gens).iter().zip(llrs).map(|(&c, &l)| if c == 0 { l } else { -l }).sum();
        if corr > best.0 {
            best = (corr, word);
        }
    }
    (0..len).map(|i| ((best.1 >> i) & 1) as Bit).collect()
}

fn viterbi_vs_ml() -> Result<String, String> {
    let t = Instant::now();
    let spec = TrellisSpec::wimax_64_state();
    let gens = [0o171, 0o133];
    let sigma2 = ChannelConfig { ebno_db: 1.0, rate: 0.5, seed: 0 }.sigma2();
    let results: Vec<Result<bool, String>> = (0..1000u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = block_rng(501, trial);
            let len = rng.random_range(6..=16);
            let bits = random_bits(&mut rng, len);
            let coded = ref_cc_encode(&bits, 7, &gens);
            ensure(lib(cc_encode(&bits, &spec))? == coded, || format!("trial {trial}: encoder differs"))?;
            let llrs = awgn_llr_rng(&coded, sigma2, &mut rng);
            let radix = if trial % 2 == 0 { 2 } else { 4 };
            let got = lib(viterbi_decode(&llrs, &spec, &ViterbiConfig { radix, ..ViterbiConfig::default() }))?;
            let ml = ml_decode(&llrs, len, 7, &gens);
            ensure(got == ml, || format!("trial {trial} (radix {radix}, {len} bits) disagrees with ML"))?;
            Ok(got != bits)
        })
        .collect();
    let mut corrected = 0;
    for r in results {
        corrected += usize::from(r?);
    }
    within("Viterbi oracle", t, Duration::from_secs(10))?;
    Ok(format!("Viterbi = ML on 1000/1000 ({corrected} blocks with ML errors)"))
}

fn ctc_trellis() -> Result<DuoTrellis, String> {
    let t = StandardTables::builtin();
    lib(DuoTrellis::new(&t.constituent, t.circulation.clone()))
}

fn siso_vs_enumeration() -> Result<String, String> {
    let t = Instant::now();
    let tr = ctc_trellis()?;
    let n = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(502);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let ch: Vec<[f64; 4]> = (0..n).map(|_| [0; 4].map(|_: u8| rng.random_range(-4.0..4.0))).collect();
        let ap: Vec<Extrinsic> = (0..n).map(|_| [0; 3].map(|_: u8| rng.random_range(-2.0..2.0))).collect();
        let a0 = [0; STATES].map(|_: u8| rng.random_range(-3.0..0.0));
        let b0 = [0; STATES].map(|_: u8| rng.random_range(-3.0..0.0));
        let out = siso_window(&tr, &ch, &ap, a0, b0, 1.0);

        // Every path: start state, four couples; metric = borders + sum of couple and parity terms.
        let mut best = vec![[f64::NEG_INFINITY; 4]; n];
        for s0 in 0..STATES {
            for seq in 0..256usize {
                let us: Vec<usize> = (0..n).map(|k| (seq >> (2 * k)) & 3).collect();
                let (mut s, mut m) = (s0, a0[s0]);
                for (k, &u) in us.iter().enumerate() {
                    let (y, w) = tr.parity(s, u);
                    let bits = [(u >> 1) as f64, (u & 1) as f64, y as f64, w as f64];
                    m += if u == 0 { 0.0 } else { ap[k][u - 1] };
                    m -= (0..4).map(|i| bits[i] * ch[k][i]).sum::<f64>();
                    s = tr.next_state(s, u);
                }
                m += b0[s];
                for (k, &u) in us.iter().enumerate() {
                    best[k][u] = best[k][u].max(m);
                }
            }
        }
        for k in 0..n {
            for u in 1..4 {
                let app = best[k][u] - best[k][0];
                let sys = -((u >> 1) as f64) * ch[k][0] - (u & 1) as f64 * ch[k][1];
                let ext = app - ap[k][u - 1] - sys;
                worst = worst.max((out.app[k][u] - app).abs()).max((out.extrinsic[k][u - 1] - ext).abs());
            }
        }
    }
    ensure(worst <= 1e-9, || format!("SISO deviates from enumeration by {worst:e}"))?;
    within("SISO oracle", t, Duration::from_secs(1))?;
    Ok(format!("SISO = enumeration on N=4 (max |d| {worst:.1e})"))
}

fn ctc_noisy_llrs(code: &CtcCode, ebno_db: f64, seed: u64, block: u64) -> Result<(Vec<Bit>, CtcLlrs), String> {
    let sigma2 = ChannelConfig { ebno_db, rate: 1.0 / 3.0, seed }.sigma2();
    let mut rng = block_rng(seed, block);
    let info = random_bits(&mut rng, 2 * code.n);
    let cw = lib(ctc_encode(&lib(bits_to_couples(&info))?, code))?;
    let llrs = CtcLlrs::from_streams(cw.streams().map(|s| awgn_llr_rng(s, sigma2, &mut rng)));
    Ok((info, llrs))
}

fn parallel_turbo_equivalence() -> Result<String, String> {
    let t = Instant::now();
    let code = lib(CtcCode::standard(480))?;
    let run = |llrs: &CtcLlrs, p: usize| {
        lib(turbo_decode(llrs, &code, &TurboConfig { parallelism: Some(p), ..TurboConfig::default() }))
    };
    let mut differing_blocks = 0;
    for b in 0..100 {
        let (info, llrs) = ctc_noisy_llrs(&code, 0.5, 503, b)?;
        let (one, four) = (run(&llrs, 1)?, run(&llrs, 4)?);
        ensure(one.window == four.window && four.parallelism == 4, || "window or P not as requested".into())?;
        ensure(one.couples == four.couples, || format!("block {b}: decisions differ"))?;
        ensure(one.half_iterations == four.half_iterations, || format!("block {b}: intermediate state differs"))?;
        differing_blocks += usize::from(couples_to_bits(&one.couples) != info);
    }
    within("P=4 vs P=1", t, Duration::from_secs(60))?;
    Ok(format!("P=4 == P=1 bitwise on 100 noisy N=480 blocks ({differing_blocks} with residual errors)"))
}

fn chase_vs_codebook() -> Result<String, String> {
    let t = Instant::now();
    let code = lib(ExtHammingCode::new(4))?;
    let len = code.len();
    let book: Vec<u64> = (0..1u64 << code.k()).map(|i| code.encode_word(i)).collect();
    let sign = |w: u64, j: usize| if (w >> j) & 1 == 0 { 1.0 } else { -1.0 };
    let dist = |r: &[f64], w: u64| (0..len).map(|j| (r[j] - sign(w, j)).powi(2)).sum::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(504);
    let (mut compared, mut worst) = (0usize, 0.0f64);
    for trial in 0..1000 {
        let sent = book[rng.random_range(0..book.len())];
        let r: Vec<f64> = (0..len).map(|j| sign(sent, j) + 0.7 * rng.sample::<f64, _>(StandardNormal)).collect();
        let chase = lib(chase_search(&r, &code, 4))?;
        let (w, d) = elementary_siso(&r, &chase, 0.5);
        let in_list = |c: u64| chase.list.iter().any(|&(x, _)| x == c);

        let dstar = *book.iter().min_by(|&&a, &&b| dist(&r, a).total_cmp(&dist(&r, b))).unwrap();
        if !in_list(dstar) {
            continue;
        }
        ensure(chase.decision == dstar, || format!("trial {trial}: list contains ML word but decides otherwise"))?;
        for j in 0..len {
            let cstar = *book
                .iter()
                .filter(|&&c| sign(c, j) != sign(dstar, j))
                .min_by(|&&a, &&b| dist(&r, a).total_cmp(&dist(&r, b)))
                .unwrap();
            if !in_list(cstar) {
                continue;
            }
            let want = (dist(&r, cstar) - dist(&r, dstar)) / 4.0 * sign(dstar, j) - r[j];
            ensure(d[j] == sign(dstar, j), || format!("trial {trial}: decision sign at {j}"))?;
            worst = worst.max((w[j] - want).abs());
            compared += 1;
        }
    }
    ensure(worst <= 1e-9, || format!("Chase soft output deviates by {worst:e}"))?;
    ensure(compared > 1000, || format!("only {compared} positions comparable"))?;
    within("Chase oracle", t, Duration::from_secs(30))?;
    Ok(format!("Chase = full codebook on (16,11), {compared} positions over 1000 trials"))
}

fn load_alist(name: &str) -> Result<TannerGraph, String> {
    let text = std::fs::read_to_string(configs().join("ldpc").join(name)).map_err(|e| e.to_string())?;
    lib(parse_alist(&text))
}

fn spa_vs_marginals() -> Result<String, String> {
    let t = Instant::now();
    let g = load_alist("tree_10.alist")?;
    let h = g.dense();
    let b = g.vars();
    ensure(b <= 12, || format!("tree code has {b} bits"))?;
    ensure(g.edge_count() == b + g.checks() - 1, || "graph has a cycle or is disconnected".into())?;
    let words: Vec<Vec<u8>> = (0..1u32 << b)
        .map(|w| (0..b).map(|j| ((w >> j) & 1) as u8).collect::<Vec<u8>>())
        .filter(|c| h.iter().all(|row| row.iter().zip(c).map(|(&x, &y)| x & y).sum::<u8>() % 2 == 0))
        .collect();
    let cfg =
        LdpcConfig { mode: CnMode::Spa, schedule: Schedule::Flooding, max_iters: 2 * b, early_stop: EarlyStop::None };
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let lambda: Vec<f64> = (0..b).map(|_| rng.random_range(-3.0..3.0)).collect();
        let out = lib(ldpc_decode(&g, &lambda, &cfg))?;
        for j in 0..b {
            let (mut p0, mut p1) = (0.0, 0.0);
            for c in &words {
                let weight: f64 =
                    c.iter().zip(&lambda).map(|(&x, &l)| if x == 0 { l / 2.0 } else { -l / 2.0 }).sum::<f64>().exp();
                if c[j] == 0 {
                    p0 += weight;
                } else {
                    p1 += weight;
                }
            }
            worst = worst.max((out.posterior[j] - (p0 / p1).ln()).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("SPA deviates from marginals by {worst:e}"))?;
    within("SPA oracle", t, Duration::from_secs(5))?;
    Ok(format!("SPA = marginals on the {b}-bit tree (max |d| {worst:.1e})"))
}

fn oracle_equivalences() -> Outcome {
    let parts = [
        viterbi_vs_ml()?,
        siso_vs_enumeration()?,
        parallel_turbo_equivalence()?,
        chase_vs_codebook()?,
        spa_vs_marginals()?,
    ];
    Ok(parts.join("; "))
}

// ---------------------------------------------------------------- 6

fn load_qc() -> Result<TannerGraph, String> {
    let text = std::fs::read_to_string(configs().join("ldpc/qc_384_r12.txt")).map_err(|e| e.to_string())?;
    lib(parse_qc(&text))
}

fn round_trips() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(601);
    let mut count = 0;
    for gens in [[0o171, 0o133], [0o7, 0o5]] {
        let k = if gens[0] == 0o171 { 7 } else { 3 };
        let spec = lib(TrellisSpec::new(k, &gens, None))?;
        for radix in [2, 4] {
            let bits = random_bits(&mut rng, 300);
            let llrs = noiseless(&lib(cc_encode(&bits, &spec))?);
            let got = lib(viterbi_decode(&llrs, &spec, &ViterbiConfig { window: 32, radix, mode: None }))?;
            ensure(got == bits, || format!("CC K={k} radix {radix} round trip"))?;
            count += 1;
        }
    }
    for n in StandardTables::builtin().supported_n() {
        let code = lib(CtcCode::standard(n))?;
        let bits = random_bits(&mut rng, 2 * n);
        let cw = lib(ctc_encode(&lib(bits_to_couples(&bits))?, &code))?;
        let llrs = CtcLlrs::from_streams(cw.streams().map(noiseless));
        let out = lib(turbo_decode(&llrs, &code, &TurboConfig::default()))?;
        ensure(couples_to_bits(&out.couples) == bits, || format!("CTC N={n} round trip"))?;
        count += 1;
    }
    for id in HammingCodeId::ALL {
        let bits = random_bits(&mut rng, id.k() * id.k());
        let cw = lib(product_encode(&bits, id, id))?;
        let out = lib(btc_decode(&lib(ProductBlock::square(id, noiseless(&cw)))?, &BtcConfig::standard()))?;
        ensure(out.info == bits, || format!("BTC {id:?} round trip"))?;
        count += 1;
    }
    for g in [load_qc()?, load_alist("hamming_7_4.alist")?] {
        let enc = LdpcEncoder::new(&g);
        let bits = random_bits(&mut rng, enc.k());
        let cw = lib(enc.encode(&bits))?;
        let out = lib(ldpc_decode(&g, &noiseless(&cw), &LdpcConfig::default()))?;
        ensure(out.bits == cw && enc.extract_info(&out.bits) == bits, || format!("LDPC n={} round trip", g.vars()))?;
        count += 1;
    }
    Ok(format!("{count} noiseless round trips exact"))
}

fn sweep(code: &SimCode, ebno_db: f64, seed: u64, blocks: u64) -> Result<fec_core::sim::BerPoint, String> {
    let cfg = SimConfig { ebno_db: vec![ebno_db], seed, blocks: Some(blocks), ..SimConfig::default() };
    let p = lib(run_ber(code, &cfg, |_| {}))?.remove(0);
    match &p.error {
        Some(e) => Err(format!("point aborted: {e}")),
        None => Ok(p),
    }
}

fn cc_gain() -> Result<String, String> {
    let cc = SimCode::Cc { spec: TrellisSpec::wimax_64_state(), info_len: 1000, viterbi: ViterbiConfig::default() };
    let coded = sweep(&cc, 4.0, 602, 100)?;
    let uncoded = sweep(&SimCode::Uncoded { n: 1000 }, 4.0, 602, 100)?;
    ensure(coded.info_bits >= 100_000 && uncoded.info_bits >= 100_000, || "too few bits".into())?;
    ensure(uncoded.bit_errors > 0, || "uncoded run saw no errors".into())?;
    ensure(coded.ber * 10.0 <= uncoded.ber, || format!("CC BER {:e} vs uncoded {:e}", coded.ber, uncoded.ber))?;
    Ok(format!("CC {:.1e} vs uncoded {:.2e} at 4 dB", coded.ber, uncoded.ber))
}

fn ctc_monotone() -> Result<String, String> {
    let code = SimCode::Ctc { code: lib(CtcCode::standard(240))?, turbo: TurboConfig::default(), chain: None };
    let p = sweep(&code, 0.75, 603, 10_000)?;
    let per_iter: Vec<f64> = p.stage_ber.iter().skip(1).step_by(2).copied().collect();
    ensure(per_iter.len() == 8, || format!("{} iterations recorded", per_iter.len()))?;
    ensure(per_iter.windows(2).all(|w| w[1] <= w[0]), || format!("BER per iteration not monotone: {per_iter:?}"))?;
    ensure(per_iter[7] < per_iter[0], || "no improvement over iterations".into())?;
    Ok(format!("CTC N=240 0.75 dB, 10k blocks: BER {:.2e} -> {:.2e} non-increasing", per_iter[0], per_iter[7]))
}

fn ldpc_checks() -> Result<String, String> {
    let g = load_qc()?;
    let enc = LdpcEncoder::new(&g);
    let sigma2 = ChannelConfig { ebno_db: 2.0, rate: enc.k() as f64 / enc.n() as f64, seed: 0 }.sigma2();
    let mut stopped = 0;
    for schedule in [Schedule::Flooding, Schedule::Layered] {
        let with = LdpcConfig { schedule, ..LdpcConfig::default() };
        let without = LdpcConfig { early_stop: EarlyStop::None, ..with };
        for b in 0..300 {
            let mut rng = block_rng(604, b);
            let cw = lib(enc.encode(&random_bits(&mut rng, enc.k())))?;
            let llr = awgn_llr_rng(&cw, sigma2, &mut rng);
            let (a, z) = (lib(ldpc_decode(&g, &llr, &with))?, lib(ldpc_decode(&g, &llr, &without))?);
            ensure(a.bits == z.bits, || format!("{schedule:?} block {b}: syndrome stop changed decisions"))?;
            stopped += usize::from(a.iterations < with.max_iters);
        }
    }
    let mean = |schedule| -> Result<f64, String> {
        let code = SimCode::Ldpc {
            graph: g.clone(),
            encoder: enc.clone(),
            cfg: LdpcConfig { schedule, ..LdpcConfig::default() },
        };
        Ok(sweep(&code, 2.0, 605, 1000)?.mean_iters)
    };
    let (layered, flooding) = (mean(Schedule::Layered)?, mean(Schedule::Flooding)?);
    ensure(layered <= flooding, || format!("layered {layered} > flooding {flooding} mean iterations"))?;
    Ok(format!(
        "LDPC syndrome stop preserved decisions on 600 blocks ({stopped} stopped early); mean iterations layered {layered:.2} <= flooding {flooding:.2}"
    ))
}

fn ber_properties() -> Outcome {
    let t = Instant::now();
    let parts = [round_trips()?, cc_gain()?, ctc_monotone()?, ldpc_checks()?];
    within("BER properties", t, Duration::from_secs(600))?;
    Ok(parts.join("; "))
}

// ---------------------------------------------------------------- 7

fn fec(args: &[&str], threads: Option<&str>) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fec"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("FEC_THREADS", n),
        None => cmd.env_remove("FEC_THREADS"),
    };
    let out = cmd.output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("fec {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))?;
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let c = configs();
    let cfg = |p: &str| c.join(p).to_string_lossy().into_owned();
    let runs: Vec<(&str, Vec<String>)> = vec![
        ("uncoded", vec!["--ebno".into(), "0:4:2".into()]),
        (
            "cc",
            vec![
                "--params".into(),
                cfg("cc/wimax_171_133.json"),
                "--ebno".into(),
                "1:2:1".into(),
                "--blocks".into(),
                "40".into(),
            ],
        ),
        (
            "ctc",
            vec![
                "--params".into(),
                cfg("ctc/n240.json"),
                "--ebno".into(),
                "0.5:1:0.5".into(),
                "--blocks".into(),
                "60".into(),
            ],
        ),
        (
            "ctc",
            vec![
                "--params".into(),
                cfg("ctc/n480.json"),
                "--chain".into(),
                "30,2,0".into(),
                "--ebno".into(),
                "1".into(),
                "--blocks".into(),
                "20".into(),
            ],
        ),
        (
            "btc",
            vec![
                "--params".into(),
                cfg("btc/h15_11.json"),
                "--ebno".into(),
                "2:3:1".into(),
                "--blocks".into(),
                "100".into(),
            ],
        ),
        (
            "ldpc",
            vec![
                "--params".into(),
                cfg("ldpc/qc_384_layered.json"),
                "--ebno".into(),
                "1.5".into(),
                "--blocks".into(),
                "100".into(),
            ],
        ),
    ];
    let mut files = 0;
    for (i, (code, extra)) in runs.iter().enumerate() {
        let mut read = Vec::new();
        for (rep, threads) in [(0, None), (1, None), (2, Some("1")), (3, Some("3"))] {
            let out = dir.path().join(format!("{i}_{rep}.csv"));
            let out_s = out.to_string_lossy().into_owned();
            let mut args = vec!["ber", "--code", code, "--seed", "42", "--out", &out_s];
            args.extend(extra.iter().map(String::as_str));
            fec(&args, threads)?;
            read.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        ensure(read.iter().all(|r| r == &read[0]), || format!("{code} run {i}: CSV differs between repeats"))?;
        ensure(String::from_utf8_lossy(&read[0]).lines().skip(1).all(|l| !l.starts_with('#')), || {
            format!("{code} run {i}: aborted point")
        })?;
        files += read.len();
    }
    let noisy = |seed: &str| {
        let args = ["ber", "--code", "uncoded", "--ebno", "0", "--blocks", "3", "--seed", seed];
        fec(&args, None)
    };
    ensure(noisy("1")? != noisy("2")?, || "seed has no effect".into())?;
    let fig = fec(&["archmodel", "fig11", "--csv"], None)?;
    ensure(fig == fec(&["archmodel", "fig11", "--csv"], None)?, || "archmodel CSV differs".into())?;
    Ok(format!("{files} BER CSVs byte-identical across repeats and FEC_THREADS; archmodel CSV stable"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("throughput anchors", throughput_anchors),
        ("block-size throughput sweep", fig11_sweep),
        ("subblock worst case", subblock_worst_case),
        ("parallel interleaver", parallel_interleaver),
        ("oracle equivalences", oracle_equivalences),
        ("functional BER properties", ber_properties),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {}. {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
