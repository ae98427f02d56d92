//! Binary convolutional codes: trellis construction from octal polynomials, a
//! zero-tail encoder and a sliding-window Viterbi decoder (radix 2 or 4).

use serde::{Deserialize, Serialize};

use crate::error::{FecError, Result};
use crate::params::{CcParams, Octal};
use crate::types::{check_finite, Bit};

/// Trellis of a rate-1/n binary convolutional code.
///
/// Polynomials use MSB = current register input. State `s` holds the previous
/// `K-1` register bits, most recent in the MSB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrellisSpec {
    constraint_length: u32,
    generators: Vec<u32>,
    feedback: Option<u32>,
    next_state: Vec<[usize; 2]>,
    output: Vec<[usize; 2]>,
    /// Incoming edges per state as `(predecessor, input bit)`, lower predecessor first.
    preds: Vec<[(usize, Bit); 2]>,
}

fn parity(x: u32) -> u32 {
    x.count_ones() & 1
}

impl TrellisSpec {
    pub fn new(constraint_length: u32, generators: &[u32], feedback: Option<u32>) -> Result<Self> {
        CcParams {
            constraint_length,
            generators: generators.iter().map(|&g| Octal(g)).collect(),
            feedback: feedback.map(Octal),
        }
        .validate()?;
        let k = constraint_length;
        let states = 1usize << (k - 1);
        let mut next_state = vec![[0; 2]; states];
        let mut output = vec![[0; 2]; states];
        let mut incoming: Vec<Vec<(usize, Bit)>> = vec![Vec::new(); states];
        for s in 0..states {
            for u in 0..2u32 {
                let w = match feedback {
                    Some(f) => u ^ parity(f & (states as u32 - 1) & s as u32),
                    None => u,
                };
                let reg = (w << (k - 1)) | s as u32;
                let mut pattern = 0;
                for (i, &g) in generators.iter().enumerate() {
                    pattern |= (parity(reg & g) as usize) << i;
                }
                let ns = (reg >> 1) as usize;
                next_state[s][u as usize] = ns;
                output[s][u as usize] = pattern;
                incoming[ns].push((s, u as Bit));
            }
        }
        let preds = incoming
            .into_iter()
            .map(|mut v| {
                v.sort();
                [v[0], v[1]]
            })
            .collect();
        Ok(TrellisSpec { constraint_length, generators: generators.to_vec(), feedback, next_state, output, preds })
    }

    pub fn from_params(p: &CcParams) -> Result<Self> {
        let gens: Vec<u32> = p.generators.iter().map(|g| g.0).collect();
        TrellisSpec::new(p.constraint_length, &gens, p.feedback.map(|f| f.0))
    }

    /// The 64-state rate-1/2 code with generators 171/133.
    pub fn wimax_64_state() -> Self {
        TrellisSpec::new(7, &[0o171, 0o133], None).expect("valid polynomials")
    }

    pub fn constraint_length(&self) -> u32 {
        self.constraint_length
    }

    pub fn states(&self) -> usize {
        self.next_state.len()
    }

    /// Coded bits per input bit.
    pub fn outputs(&self) -> usize {
        self.generators.len()
    }

    pub fn tail_len(&self) -> usize {
        self.constraint_length as usize - 1
    }

    pub fn is_recursive(&self) -> bool {
        self.feedback.is_some()
    }

    pub fn next_state(&self, s: usize, u: Bit) -> usize {
        self.next_state[s][u as usize]
    }

    /// Output pattern on edge `(s, u)`: bit `i` is the bit of generator `i`.
    pub fn output(&self, s: usize, u: Bit) -> usize {
        self.output[s][u as usize]
    }

    pub fn predecessors(&self, s: usize) -> [(usize, Bit); 2] {
        self.preds[s]
    }

    /// Input that drives `s` toward the zero state (0 for feedforward codes).
    pub fn flush_input(&self, s: usize) -> Bit {
        match self.feedback {
            Some(f) => parity(f & (self.states() as u32 - 1) & s as u32) as Bit,
            None => 0,
        }
    }
}

/// Encodes from the zero state and appends `K-1` tail bits that return the
/// encoder to zero. Output is interleaved per step: `c1, c2, ...`.
pub fn cc_encode(bits: &[Bit], spec: &TrellisSpec) -> Result<Vec<Bit>> {
    if bits.is_empty() {
        return Err(FecError::EmptyInput);
    }
    let n = spec.outputs();
    let mut out = Vec::with_capacity(n * (bits.len() + spec.tail_len()));
    let mut s = 0;
    let push = |s: &mut usize, u: Bit, out: &mut Vec<Bit>| {
        let pat = spec.output(*s, u);
        for i in 0..n {
            out.push(((pat >> i) & 1) as Bit);
        }
        *s = spec.next_state(*s, u);
    };
    for &b in bits {
        push(&mut s, b & 1, &mut out);
    }
    for _ in 0..spec.tail_len() {
        let u = spec.flush_input(s);
        push(&mut s, u, &mut out);
    }
    debug_assert_eq!(s, 0);
    Ok(out)
}

/// Correlation metric of every output pattern for one trellis step; pattern bit
/// `i` set means `c_{i+1} = 1`, which contributes `-l_i`.
pub fn branch_metrics(llrs: &[f64]) -> Vec<f64> {
    (0..1usize << llrs.len())
        .map(|pat| llrs.iter().enumerate().map(|(i, &l)| if (pat >> i) & 1 == 1 { -l } else { l }).sum())
        .collect()
}

/// Rate-1/2 form, indexed `[2*c2 + c1]`.
pub fn branch_metrics_pair(l1: f64, l2: f64) -> [f64; 4] {
    [l1 + l2, -l1 + l2, l1 - l2, -l1 - l2]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MetricMode {
    Unnormalized,
    /// Metrics kept modulo `modulus` (a power of two); compared by wrapped difference.
    Wrapping {
        modulus: f64,
    },
}

impl MetricMode {
    fn wrap(self, x: f64) -> f64 {
        match self {
            MetricMode::Unnormalized => x,
            MetricMode::Wrapping { modulus } => x - modulus * (x / modulus).round(),
        }
    }

    /// `a` beats `b`.
    pub fn greater(self, a: f64, b: f64) -> bool {
        match self {
            MetricMode::Unnormalized => a > b,
            MetricMode::Wrapping { .. } => self.wrap(a - b) > 0.0,
        }
    }
}

/// Path metrics `Γ_n^S`, one per state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMetrics {
    pub values: Vec<f64>,
    pub mode: MetricMode,
}

impl StateMetrics {
    /// State 0 at 0, every other state at `-offset`.
    pub fn zero_start(states: usize, offset: f64, mode: MetricMode) -> Self {
        let mut values = vec![mode.wrap(-offset); states];
        values[0] = 0.0;
        StateMetrics { values, mode }
    }

    pub fn best_state(&self) -> usize {
        let mut best = 0;
        for s in 1..self.values.len() {
            if self.mode.greater(self.values[s], self.values[best]) {
                best = s;
            }
        }
        best
    }
}

/// One radix-2 add-compare-select step. Decision 0 selects the lower-indexed
/// predecessor; ties go to it.
pub fn acs_update(metrics: &StateMetrics, gammas: &[f64], spec: &TrellisSpec) -> (StateMetrics, Vec<u8>) {
    let mode = metrics.mode;
    let mut values = Vec::with_capacity(spec.states());
    let mut decisions = Vec::with_capacity(spec.states());
    for s in 0..spec.states() {
        let [(p0, u0), (p1, u1)] = spec.preds[s];
        let m0 = mode.wrap(metrics.values[p0] + gammas[spec.output(p0, u0)]);
        let m1 = mode.wrap(metrics.values[p1] + gammas[spec.output(p1, u1)]);
        if mode.greater(m1, m0) {
            values.push(m1);
            decisions.push(1);
        } else {
            values.push(m0);
            decisions.push(0);
        }
    }
    (StateMetrics { values, mode }, decisions)
}

/// Two trellis steps merged into one four-way ACS. Decision `2*i2 + i1` names
/// the predecessor `i2` at the intermediate step and `i1` before it; candidates
/// are scanned in that order and the first maximum wins.
pub fn acs_update_radix4(
    metrics: &StateMetrics,
    g1: &[f64],
    g2: &[f64],
    spec: &TrellisSpec,
) -> (StateMetrics, Vec<u8>) {
    let mode = metrics.mode;
    let mut values = Vec::with_capacity(spec.states());
    let mut decisions = Vec::with_capacity(spec.states());
    for s in 0..spec.states() {
        let mut best = (f64::NAN, 0u8);
        for (i2, &(mid, u2)) in spec.preds[s].iter().enumerate() {
            for (i1, &(p, u1)) in spec.preds[mid].iter().enumerate() {
                let m = mode.wrap(mode.wrap(metrics.values[p] + g1[spec.output(p, u1)]) + g2[spec.output(mid, u2)]);
                let d = (2 * i2 + i1) as u8;
                if d == 0 || mode.greater(m, best.0) {
                    best = (m, d);
                }
            }
        }
        values.push(best.0);
        decisions.push(best.1);
    }
    (StateMetrics { values, mode }, decisions)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViterbiConfig {
    pub window: usize,
    pub radix: u8,
    /// `None` selects wrapping with a modulus sized from the input.
    pub mode: Option<MetricMode>,
}

impl Default for ViterbiConfig {
    fn default() -> Self {
        ViterbiConfig { window: 48, radix: 2, mode: None }
    }
}

/// Survivor decisions `d_n^S` of the undecided part of the trellis, one row per
/// ACS recursion. A radix-4 row covers two trellis steps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DecisionWindow {
    /// Trellis step of the first row.
    pub start: usize,
    pub rows: Vec<Vec<u8>>,
    pub widths: Vec<usize>,
}

impl DecisionWindow {
    fn push(&mut self, row: Vec<u8>, width: usize) {
        self.rows.push(row);
        self.widths.push(width);
    }

    /// Drops the oldest rows covering `steps` trellis steps.
    fn release(&mut self, steps: usize) {
        let mut covered = 0;
        let mut r = 0;
        while covered < steps {
            covered += self.widths[r];
            r += 1;
        }
        self.rows.drain(..r);
        self.widths.drain(..r);
        self.start += covered;
    }

    /// Traces back from `state` after the last row, returning the input bits of
    /// every stored step in time order.
    pub fn traceback(&self, spec: &TrellisSpec, mut state: usize) -> Vec<Bit> {
        let mut rev = Vec::new();
        for r in (0..self.rows.len()).rev() {
            let d = self.rows[r][state];
            if self.widths[r] == 2 {
                let (i2, i1) = ((d >> 1) as usize, (d & 1) as usize);
                let (mid, u2) = spec.preds[state][i2];
                let (p, u1) = spec.preds[mid][i1];
                rev.push(u2);
                rev.push(u1);
                state = p;
            } else {
                let (p, u) = spec.preds[state][d as usize];
                rev.push(u);
                state = p;
            }
        }
        rev.reverse();
        rev
    }
}

/// Sliding-window Viterbi decoding of a zero-tail terminated block.
///
/// Whenever `2W` steps of undecided decisions are stored, a traceback over them
/// starts from the best-metric state and the oldest `W` bits are released. The
/// final traceback starts from state 0. Returns the information bits.
pub fn viterbi_decode(llrs: &[f64], spec: &TrellisSpec, cfg: &ViterbiConfig) -> Result<Vec<Bit>> {
    check_finite(llrs)?;
    let n = spec.outputs();
    if llrs.is_empty() {
        return Err(FecError::EmptyInput);
    }
    if !llrs.len().is_multiple_of(n) {
        return Err(FecError::invalid("llrs", format!("count {} is not a multiple of {n}", llrs.len())));
    }
    let steps = llrs.len() / n;
    if steps <= spec.tail_len() {
        return Err(FecError::invalid("llrs", "block shorter than the tail"));
    }
    if cfg.window == 0 {
        return Err(FecError::invalid("window", "must be positive"));
    }
    match cfg.radix {
        2 => {}
        4 if cfg.window.is_multiple_of(2) => {}
        4 => return Err(FecError::invalid("window", "radix 4 needs an even window")),
        _ => return Err(FecError::invalid("radix", "must be 2 or 4")),
    }

    // Largest per-step spread between branch metrics bounds the survivor spread.
    let range = llrs.chunks(n).map(|c| 2.0 * c.iter().map(|l| l.abs()).sum::<f64>()).fold(0.0, f64::max);
    let offset = spec.tail_len() as f64 * range + 1.0;
    let mode = cfg.mode.unwrap_or_else(|| {
        let bound = 4.0 * (offset + spec.tail_len() as f64 * range);
        MetricMode::Wrapping { modulus: 2f64.powi(bound.log2().ceil() as i32 + 1) }
    });

    let gammas: Vec<Vec<f64>> = llrs.chunks(n).map(branch_metrics).collect();
    let w = cfg.window;
    let mut metrics = StateMetrics::zero_start(spec.states(), offset, mode);
    let mut window = DecisionWindow::default();
    let mut decoded: Vec<Bit> = Vec::with_capacity(steps);
    let mut t = 0;
    while t < steps {
        let (next, dec, width) = if cfg.radix == 4 && t + 1 < steps {
            let (m, d) = acs_update_radix4(&metrics, &gammas[t], &gammas[t + 1], spec);
            (m, d, 2)
        } else {
            let (m, d) = acs_update(&metrics, &gammas[t], spec);
            (m, d, 1)
        };
        metrics = next;
        window.push(dec, width);
        t += width;
        if t - window.start >= 2 * w && t < steps {
            let bits = window.traceback(spec, metrics.best_state());
            decoded.extend_from_slice(&bits[..w]);
            window.release(w);
        }
    }
    let bits = window.traceback(spec, 0);
    decoded.extend_from_slice(&bits);
    decoded.truncate(steps - spec.tail_len());
    Ok(decoded)
}
