use rayon::prelude::*;
use serde::Serialize;

use super::siso::{siso_window, Extrinsic, SisoWindowState, WindowOutput};
use super::CtcCode;
use crate::error::{FecError, Result};
use crate::interleave::{build_parallel_schedule, select_parallelism, DeinterleavedBlocks, ScheduleOutcome};
use crate::types::{check_finite, Couple};

/// Channel LLRs of the six coded streams, each N long.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CtcLlrs {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub y1: Vec<f64>,
    pub w1: Vec<f64>,
    pub y2: Vec<f64>,
    pub w2: Vec<f64>,
}

impl CtcLlrs {
    pub fn from_streams(s: [Vec<f64>; 6]) -> Self {
        let [a, b, y1, w1, y2, w2] = s;
        CtcLlrs { a, b, y1, w1, y2, w2 }
    }

    pub fn from_blocks(d: &DeinterleavedBlocks) -> Self {
        CtcLlrs {
            a: d.a.clone(),
            b: d.b.clone(),
            y1: d.y1().to_vec(),
            w1: d.w1().to_vec(),
            y2: d.y2().to_vec(),
            w2: d.w2().to_vec(),
        }
    }

    fn streams(&self) -> [&[f64]; 6] {
        [&self.a, &self.b, &self.y1, &self.w1, &self.y2, &self.w2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurboConfig {
    pub iterations: usize,
    /// Number of SISOs; `None` picks the size-dependent default (1 for non-standard N).
    pub parallelism: Option<usize>,
    /// Window width; `None` applies [`default_window`].
    pub window: Option<usize>,
    pub ext_scale: f64,
}

impl Default for TurboConfig {
    fn default() -> Self {
        TurboConfig { iterations: 8, parallelism: None, window: None, ext_scale: 1.0 }
    }
}

/// Largest width up to 32 that divides N/4 (or N/2, N when 4 does not divide N), so
/// the window grid is the same for every P. Falls back to 32 with a ragged last
/// window when no divisor of at least 8 exists.
pub fn default_window(n: usize) -> usize {
    let span = [4, 2, 1].into_iter().find(|p| n.is_multiple_of(*p)).map_or(n, |p| n / p);
    match (8..=32.min(span)).rev().find(|w| span % w == 0) {
        Some(w) => w,
        None if span < 8 => span.max(1),
        None => 32,
    }
}

/// `(start, len)` of every window: each of the P segments is cut into windows of
/// width `w`, the last one possibly shorter.
pub fn window_grid(n: usize, p: usize, w: usize) -> Vec<(usize, usize)> {
    let seg = n / p;
    (0..p).flat_map(|k| (0..seg).step_by(w).map(move |s| (k * seg + s, w.min(seg - s)))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfIteration {
    /// Hard decisions in natural order.
    pub decisions: Vec<Couple>,
    /// Extrinsic memory contents after the half-iteration, in natural order.
    pub extrinsic: Vec<Extrinsic>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurboOutput {
    pub couples: Vec<Couple>,
    pub half_iterations: Vec<HalfIteration>,
    pub parallelism: usize,
    pub window: usize,
}

/// Extrinsic memory split into P banks of N/P entries.
struct BankedMemory {
    banks: Vec<Vec<Extrinsic>>,
}

impl BankedMemory {
    fn natural(&self) -> Vec<Extrinsic> {
        self.banks.concat()
    }
}

fn swap_ext(e: Extrinsic) -> Extrinsic {
    [e[1], e[0], e[2]]
}

/// Runs one constituent decoder: every segment's windows on its own worker, then
/// the borders are handed over for the next iteration.
fn half_iteration(
    code: &CtcCode,
    ch: &[[f64; 4]],
    apriori: &[Extrinsic],
    borders: &mut SisoWindowState,
    grid: &[(usize, usize)],
    p: usize,
    scale: f64,
) -> Vec<WindowOutput> {
    let per_segment = grid.len() / p;
    let inherited: &SisoWindowState = borders;
    let outputs: Vec<WindowOutput> = grid
        .par_chunks(per_segment)
        .enumerate()
        .flat_map_iter(|(k, windows)| {
            windows.iter().enumerate().map(move |(i, &(s, l))| {
                let w = k * per_segment + i;
                siso_window(
                    &code.trellis,
                    &ch[s..s + l],
                    &apriori[s..s + l],
                    inherited.alpha[w],
                    inherited.beta[w],
                    scale,
                )
            })
        })
        .collect();
    borders.inherit(&outputs);
    outputs
}

/// Iterative decoding with `P` SISOs sharing a banked extrinsic memory. In the
/// natural half-iteration SISO-k owns bank k; in the interleaved one the banks come
/// from the parallel address schedule, which must be collision free.
pub fn turbo_decode(llrs: &CtcLlrs, code: &CtcCode, cfg: &TurboConfig) -> Result<TurboOutput> {
    let n = code.n;
    for s in llrs.streams() {
        if s.len() != n {
            return Err(FecError::LengthMismatch { what: "CTC LLR stream", expected: n, got: s.len() });
        }
        check_finite(s)?;
    }
    if cfg.iterations == 0 {
        return Err(FecError::invalid("iterations", "must be at least 1"));
    }
    if !cfg.ext_scale.is_finite() {
        return Err(FecError::invalid("ext_scale", "must be finite"));
    }
    let p = match cfg.parallelism {
        Some(p) => p,
        None => select_parallelism(n).unwrap_or(1),
    };
    let schedule = match build_parallel_schedule(&code.table, p)? {
        ScheduleOutcome::CollisionFree(s) => s,
        ScheduleOutcome::Collisions(report) => {
            let c = &report.collisions[0];
            return Err(FecError::Collision { iteration: 0, cycle: c.cycle, bank: c.bank, sisos: c.sisos.clone() });
        }
    };
    let w = cfg.window.unwrap_or_else(|| default_window(n));
    if w == 0 {
        return Err(FecError::invalid("window", "must be positive"));
    }
    let seg = n / p;
    let grid = window_grid(n, p, w);
    let table = code.table.forward();

    let ch1: Vec<[f64; 4]> = (0..n).map(|i| [llrs.a[i], llrs.b[i], llrs.y1[i], llrs.w1[i]]).collect();
    let ch2: Vec<[f64; 4]> = (0..n)
        .map(|j| {
            let i = table[j];
            let (la, lb) = if i % 2 == 1 { (llrs.b[i], llrs.a[i]) } else { (llrs.a[i], llrs.b[i]) };
            [la, lb, llrs.y2[j], llrs.w2[j]]
        })
        .collect();
    // (bank, adx) read by the SISO handling interleaved position j.
    let inter_access: Vec<(usize, usize)> = (0..n).map(|j| schedule.access(j % seg, j / seg)).collect();

    let mut mem = BankedMemory { banks: vec![vec![[0.0; 3]; seg]; p] };
    let mut borders = [SisoWindowState::new(grid.len()), SisoWindowState::new(grid.len())];
    let mut halves = Vec::with_capacity(2 * cfg.iterations);
    let mut decisions = vec![Couple::default(); n];

    for _ in 0..cfg.iterations {
        let apriori: Vec<Extrinsic> = (0..n).map(|i| mem.banks[i / seg][i % seg]).collect();
        let outs = half_iteration(code, &ch1, &apriori, &mut borders[0], &grid, p, cfg.ext_scale);
        for (&(s, _), out) in grid.iter().zip(&outs) {
            for (t, (e, u)) in out.extrinsic.iter().zip(out.decisions()).enumerate() {
                let i = s + t;
                mem.banks[i / seg][i % seg] = *e;
                decisions[i] = Couple::from_value(u);
            }
        }
        halves.push(HalfIteration { decisions: decisions.clone(), extrinsic: mem.natural() });

        let apriori: Vec<Extrinsic> = (0..n)
            .map(|j| {
                let (bank, adx) = inter_access[j];
                let e = mem.banks[bank][adx];
                if table[j] % 2 == 1 {
                    swap_ext(e)
                } else {
                    e
                }
            })
            .collect();
        let outs = half_iteration(code, &ch2, &apriori, &mut borders[1], &grid, p, cfg.ext_scale);
        for (&(s, _), out) in grid.iter().zip(&outs) {
            for (t, (e, u)) in out.extrinsic.iter().zip(out.decisions()).enumerate() {
                let j = s + t;
                let (bank, adx) = inter_access[j];
                let odd = table[j] % 2 == 1;
                mem.banks[bank][adx] = if odd { swap_ext(*e) } else { *e };
                let c = Couple::from_value(u);
                decisions[table[j]] = if odd { c.swapped() } else { c };
            }
        }
        halves.push(HalfIteration { decisions: decisions.clone(), extrinsic: mem.natural() });
    }

    Ok(TurboOutput { couples: decisions, half_iterations: halves, parallelism: p, window: w })
}
