//! Double-binary 8-state convolutional turbo code: tail-biting encoder with
//! circulation states and an iterative max-log-MAP decoder.

mod decode;
mod siso;

pub use decode::{default_window, turbo_decode, window_grid, CtcLlrs, HalfIteration, TurboConfig, TurboOutput};
pub use siso::{
    compute_gamma, gamma_index, siso_half_iteration, siso_window, Extrinsic, SisoWindowState, WindowOutput, STATES,
};

use serde::{Deserialize, Serialize};

use crate::error::{FecError, Result};
use crate::interleave::{ctc_interleave_couples, ctc_interleave_table, PermutationTable};
use crate::params::{CirculationTable, CtcParams, DuoBinaryTaps};
use crate::types::{Bit, Couple};

/// One trellis transition: `(start, u) -> end` emitting parities `(y, w)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub start: usize,
    pub u: usize,
    pub end: usize,
    pub y: Bit,
    pub w: Bit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuoTrellis {
    next: Vec<[usize; 4]>,
    parity: Vec<[(Bit, Bit); 4]>,
    circulation: CirculationTable,
}

impl DuoTrellis {
    /// Builds the transition tables from tap vectors. State bit `s[0]` is the MSB.
    pub fn new(taps: &DuoBinaryTaps, circulation: CirculationTable) -> Result<Self> {
        taps.validate()?;
        let v = taps.memory();
        if 1 << v != STATES {
            return Err(FecError::invalid("constituent.feedback", format!("decoder supports {STATES} states")));
        }
        circulation.validate(STATES)?;
        let mut next = vec![[0; 4]; STATES];
        let mut parity = vec![[(0, 0); 4]; STATES];
        for st in 0..STATES {
            let s: Vec<u8> = (0..v).map(|i| ((st >> (v - 1 - i)) & 1) as u8).collect();
            for u in 0..4 {
                let (a, b) = ((u >> 1) as u8 & 1, u as u8 & 1);
                let mut x = (a & taps.input_a[0]) ^ (b & taps.input_b[0]);
                for i in 0..v {
                    x ^= taps.feedback[i] & s[i];
                }
                let mut ns = vec![x];
                for i in 1..v {
                    ns.push(s[i - 1] ^ (a & taps.input_a[i]) ^ (b & taps.input_b[i]));
                }
                let par = |t: &[u8]| (0..v).fold(x & t[0], |acc, i| acc ^ (t[i + 1] & s[i]));
                next[st][u] = ns.iter().fold(0usize, |acc, &bit| (acc << 1) | bit as usize);
                parity[st][u] = (par(&taps.parity_y), par(&taps.parity_w));
            }
        }
        Ok(DuoTrellis { next, parity, circulation })
    }

    pub fn from_params(p: &CtcParams) -> Result<Self> {
        DuoTrellis::new(&p.constituent, p.circulation.clone())
    }

    pub fn states(&self) -> usize {
        STATES
    }

    pub fn next_state(&self, s: usize, u: usize) -> usize {
        self.next[s][u]
    }

    pub fn parity(&self, s: usize, u: usize) -> (Bit, Bit) {
        self.parity[s][u]
    }

    pub fn edge(&self, s: usize, u: usize) -> Edge {
        let (y, w) = self.parity[s][u];
        Edge { start: s, u, end: self.next[s][u], y, w }
    }

    /// All 32 transitions, ordered by start state then couple.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..STATES).flat_map(move |s| (0..4).map(move |u| self.edge(s, u)))
    }

    /// Final state after encoding `pairs` from state `start`.
    pub fn run(&self, start: usize, pairs: &[Couple]) -> usize {
        pairs.iter().fold(start, |s, c| self.next[s][c.value()])
    }

    /// `S_c` for a block of `n` couples whose zero-start run ends in `final_state`.
    pub fn circulation_state(&self, n: usize, final_state: usize) -> Result<usize> {
        self.circulation.lookup(n, final_state)
    }
}

/// Encoder output: six bit streams of N bits each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtcCodeword {
    pub a: Vec<Bit>,
    pub b: Vec<Bit>,
    pub y1: Vec<Bit>,
    pub w1: Vec<Bit>,
    pub y2: Vec<Bit>,
    pub w2: Vec<Bit>,
    /// Circulation states of the two constituent encoders.
    pub circulation: [usize; 2],
}

impl CtcCodeword {
    /// Streams in the order A, B, Y1, W1, Y2, W2.
    pub fn streams(&self) -> [&[Bit]; 6] {
        [&self.a, &self.b, &self.y1, &self.w1, &self.y2, &self.w2]
    }
}

/// Tail-biting constituent encoding: returns parities and the circulation state.
pub fn constituent_encode(trellis: &DuoTrellis, pairs: &[Couple]) -> Result<(Vec<Bit>, Vec<Bit>, usize)> {
    let final_zero = trellis.run(0, pairs);
    let sc = trellis.circulation_state(pairs.len(), final_zero)?;
    let (mut y, mut w) = (Vec::with_capacity(pairs.len()), Vec::with_capacity(pairs.len()));
    let mut s = sc;
    for c in pairs {
        let (py, pw) = trellis.parity(s, c.value());
        y.push(py);
        w.push(pw);
        s = trellis.next_state(s, c.value());
    }
    if s != sc {
        return Err(FecError::invalid("circulation", format!("encoder ended in {s}, expected circulation state {sc}")));
    }
    Ok((y, w, sc))
}

/// Everything the CTC encoder and decoder need for one block size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtcCode {
    pub n: usize,
    pub trellis: DuoTrellis,
    pub table: PermutationTable,
}

impl CtcCode {
    pub fn from_params(p: &CtcParams) -> Result<Self> {
        p.validate()?;
        Ok(CtcCode { n: p.n, trellis: DuoTrellis::from_params(p)?, table: ctc_interleave_table(p.n, p.p0, p.p_prime)? })
    }

    /// Code for a block size from the shipped standard tables.
    pub fn standard(n: usize) -> Result<Self> {
        CtcCode::from_params(&crate::params::StandardTables::builtin().ctc_params(n)?)
    }
}

pub fn ctc_encode(pairs: &[Couple], code: &CtcCode) -> Result<CtcCodeword> {
    if pairs.len() != code.n {
        return Err(FecError::LengthMismatch { what: "couples", expected: code.n, got: pairs.len() });
    }
    let (y1, w1, s1) = constituent_encode(&code.trellis, pairs)?;
    let inter = ctc_interleave_couples(&code.table, pairs);
    let (y2, w2, s2) = constituent_encode(&code.trellis, &inter)?;
    Ok(CtcCodeword {
        a: pairs.iter().map(|c| c.a).collect(),
        b: pairs.iter().map(|c| c.b).collect(),
        y1,
        w1,
        y2,
        w2,
        circulation: [s1, s2],
    })
}
