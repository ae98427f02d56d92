//! Closed-form throughput and processing-power models of the decoder architectures.
//! Frequencies are in Hz, throughputs in bits (or LLRs) per second.

use serde::{Deserialize, Serialize};

use crate::btc::HammingCodeId;
use crate::error::{FecError, Result};
use crate::interleave::select_parallelism;
use crate::params::StandardTables;

fn positive(field: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(FecError::invalid(field, format!("must be positive and finite, got {x}")))
    }
}

fn non_negative(field: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(FecError::invalid(field, format!("must be non-negative and finite, got {x}")))
    }
}

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let e = digits - 1 - x.abs().log10().floor() as i32;
    if e >= 0 {
        let scale = 10f64.powi(e);
        (x * scale).round() / scale
    } else {
        let scale = 10f64.powi(-e);
        (x / scale).round() * scale
    }
}

/// Rounds a frequency up to whole MHz.
pub fn ceil_mhz(f: f64) -> f64 {
    (f / 1e6 - 1e-9).ceil()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViterbiQuery {
    /// Information bits per trellis step.
    pub k: f64,
    pub n_t: f64,
    /// Look-ahead steps per cycle (2 for radix-4).
    pub m: f64,
    pub w: f64,
    pub f_clk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Throughput {
    pub exact: f64,
    pub asymptotic: f64,
}

/// `T = k·N_T·f / (N_T/M + W)`, tending to `f·M·k`.
pub fn viterbi_throughput(q: &ViterbiQuery) -> Result<Throughput> {
    positive("k", q.k)?;
    positive("n_t", q.n_t)?;
    positive("m", q.m)?;
    non_negative("w", q.w)?;
    positive("f_clk", q.f_clk)?;
    Ok(Throughput { exact: q.k * q.n_t * q.f_clk / (q.n_t / q.m + q.w), asymptotic: q.f_clk * q.m * q.k })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtcQuery {
    pub k1: f64,
    pub k2: f64,
    pub n1: f64,
    pub n2: f64,
    /// Half-iterations per decoded block (may be fractional).
    pub h: f64,
    pub f_clk: f64,
}

impl BtcQuery {
    /// Square product of a Hamming code, sized by its base length.
    pub fn square(code: HammingCodeId, h: f64, f_clk: f64) -> Self {
        let (n, k) = (code.n() as f64, code.k() as f64);
        BtcQuery { k1: k, k2: k, n1: n, n2: n, h, f_clk }
    }

    fn validate(&self) -> Result<()> {
        for (f, x) in [("k1", self.k1), ("k2", self.k2), ("n1", self.n1), ("n2", self.n2), ("h", self.h)] {
            positive(f, x)?;
        }
        positive("f_clk", self.f_clk)
    }
}

/// Half-iteration form `T = k1·k2·f / (h·(n1+n2))`.
pub fn btc_throughput(q: &BtcQuery) -> Result<f64> {
    q.validate()?;
    Ok(q.k1 * q.k2 * q.f_clk / (q.h * (q.n1 + q.n2)))
}

/// Iteration form `T = k1·k2·f / (I·2(n1+n2))`.
pub fn btc_throughput_iterations(q: &BtcQuery, iterations: f64) -> Result<f64> {
    q.validate()?;
    positive("iterations", iterations)?;
    Ok(q.k1 * q.k2 * q.f_clk / (iterations * 2.0 * (q.n1 + q.n2)))
}

/// Clock needed to reach `target` bits/s; `q.f_clk` is ignored.
pub fn btc_required_clock(q: &BtcQuery, target: f64) -> Result<f64> {
    positive("target", target)?;
    let unit = btc_throughput(&BtcQuery { f_clk: 1.0, ..*q })?;
    Ok(target / unit)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtcQuery {
    /// Bits per trellis step (2 for double-binary).
    pub k: f64,
    pub n_t: f64,
    pub iterations: f64,
    /// Cycles per trellis step.
    pub sp: f64,
    pub w: f64,
    pub p: usize,
    #[serde(default)]
    pub id_oh: f64,
    pub f_clk: f64,
}

/// `T = k·N_T·f / (2I·[SP·(N_T/P + W) + ID_oh])`, tending to `k·P·f / (2I·SP)`.
/// With `P = 1` this is the single-SISO form.
pub fn ctc_throughput(q: &CtcQuery) -> Result<Throughput> {
    positive("k", q.k)?;
    positive("n_t", q.n_t)?;
    positive("iterations", q.iterations)?;
    if !(q.sp.is_finite() && q.sp >= 1.0) {
        return Err(FecError::invalid("sp", "must be at least 1"));
    }
    non_negative("w", q.w)?;
    non_negative("id_oh", q.id_oh)?;
    positive("f_clk", q.f_clk)?;
    if !matches!(q.p, 1 | 2 | 4) {
        return Err(FecError::invalid("p", format!("P={} is not one of 1, 2, 4", q.p)));
    }
    let p = q.p as f64;
    Ok(Throughput {
        exact: q.k * q.n_t * q.f_clk / (2.0 * q.iterations * (q.sp * (q.n_t / p + q.w) + q.id_oh)),
        asymptotic: q.k * p * q.f_clk / (2.0 * q.iterations * q.sp),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdpcQuery {
    /// Tanner-graph edges.
    pub edges: f64,
    /// Target throughput in bits/s.
    pub d: f64,
    pub i_max: f64,
    /// Information bits per codeword.
    pub k: f64,
    pub f_clk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProcessingPower {
    pub p_c: f64,
    /// Lower bound on messages exchanged per cycle.
    pub messages: f64,
}

/// `P_c = ε·D·i_MAX / (K·f)`.
pub fn ldpc_processing_power(q: &LdpcQuery) -> Result<ProcessingPower> {
    positive("edges", q.edges)?;
    positive("d", q.d)?;
    non_negative("i_max", q.i_max)?;
    positive("k", q.k)?;
    positive("f_clk", q.f_clk)?;
    let p_c = q.edges * q.d * q.i_max / (q.k * q.f_clk);
    Ok(ProcessingPower { p_c, messages: 2.0 * p_c })
}

/// Symbol deselection with `p` LLRs written per cycle: `T = p·f/2`.
pub fn sd_throughput(p: f64, f_clk: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(FecError::invalid("p", "must be at least 1"));
    }
    positive("f_clk", f_clk)?;
    Ok(p * f_clk / 2.0)
}

pub fn sd_required_clock(p: f64, target: f64) -> Result<f64> {
    positive("target", target)?;
    Ok(target / sd_throughput(p, 1.0)?)
}

/// Six LLRs per cycle over at most 4N/3 cycles for 6N outputs: `T = 4.5·f`.
pub fn subblock_throughput(f_clk: f64) -> Result<f64> {
    positive("f_clk", f_clk)?;
    Ok(4.5 * f_clk)
}

pub fn subblock_required_clock(target: f64) -> Result<f64> {
    positive("target", target)?;
    Ok(target / 4.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig11Config {
    pub f_clk: f64,
    pub w: f64,
    pub iterations: f64,
    pub sp: f64,
    pub k: f64,
    pub target: f64,
    pub n_list: Vec<usize>,
}

impl Default for Fig11Config {
    fn default() -> Self {
        Fig11Config {
            f_clk: 200e6,
            w: 32.0,
            iterations: 8.0,
            sp: 1.0,
            k: 2.0,
            target: 75e6,
            n_list: StandardTables::builtin().supported_n(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub p: usize,
    pub throughput: f64,
    pub meets_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub target: f64,
    /// One curve per P in 1, 2, 4.
    pub curves: Vec<(usize, Vec<SweepRow>)>,
    /// Throughput with the block-size-dependent P.
    pub actual: Vec<SweepRow>,
    /// Smallest N meeting the target, per P.
    pub first_meeting: Vec<(usize, Option<usize>)>,
}

impl SweepResult {
    pub fn curve(&self, p: usize) -> Option<&[SweepRow]> {
        self.curves.iter().find(|(q, _)| *q == p).map(|(_, rows)| rows.as_slice())
    }

    /// `curve,n,p,throughput_bps,meets_target` with `curve` one of `P1`, `P2`, `P4`, `actual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("curve,n,p,throughput_bps,meets_target\n");
        let named = self
            .curves
            .iter()
            .map(|(p, rows)| (format!("P{p}"), rows))
            .chain(std::iter::once(("actual".to_string(), &self.actual)));
        for (name, rows) in named {
            for r in rows {
                out.push_str(&format!("{name},{},{},{:.6},{}\n", r.n, r.p, r.throughput, r.meets_target));
            }
        }
        out
    }
}

pub fn sweep_fig11(cfg: &Fig11Config) -> Result<SweepResult> {
    positive("target", cfg.target)?;
    if cfg.n_list.is_empty() {
        return Err(FecError::EmptyInput);
    }
    let row = |n: usize, p: usize| -> Result<SweepRow> {
        let t = ctc_throughput(&CtcQuery {
            k: cfg.k,
            n_t: n as f64,
            iterations: cfg.iterations,
            sp: cfg.sp,
            w: cfg.w,
            p,
            id_oh: 0.0,
            f_clk: cfg.f_clk,
        })?
        .exact;
        Ok(SweepRow { n, p, throughput: t, meets_target: t >= cfg.target })
    };
    let mut curves = Vec::new();
    let mut first_meeting = Vec::new();
    for p in [1, 2, 4] {
        let rows = cfg.n_list.iter().map(|&n| row(n, p)).collect::<Result<Vec<_>>>()?;
        first_meeting.push((p, rows.iter().find(|r| r.meets_target).map(|r| r.n)));
        curves.push((p, rows));
    }
    let actual = cfg.n_list.iter().map(|&n| row(n, select_parallelism(n).unwrap_or(1))).collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { target: cfg.target, curves, actual, first_meeting })
}
