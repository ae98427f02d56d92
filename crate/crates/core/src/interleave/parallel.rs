use serde::Serialize;

use super::PermutationTable;
use crate::error::{FecError, Result};
use crate::params::StandardTables;

fn check_parallelism(n: usize, p: usize) -> Result<()> {
    if !matches!(p, 1 | 2 | 4) {
        return Err(FecError::invalid("P", format!("P={p} is not one of 1, 2, 4")));
    }
    if !n.is_multiple_of(p) {
        return Err(FecError::invalid("P", format!("N={n} is not a multiple of P={p}")));
    }
    Ok(())
}

/// Splits a scrambled address into `(adx, idx0)`: the location inside a bank of
/// `N/P` entries and the bank index, using the compare-subtract cascade.
pub fn parallel_split(i: usize, n: usize, p: usize) -> Result<(usize, usize)> {
    check_parallelism(n, p)?;
    if i >= n {
        return Err(FecError::AddressOutOfRange { address: i, n });
    }
    let segment = n >> p.trailing_zeros();
    let mut adx = i;
    let mut bank = 0;
    while adx >= segment {
        adx -= segment;
        bank += 1;
    }
    Ok((adx, bank))
}

/// Parallelism mandated per block size: 1 up to N=180, 2 for 192..=240, 4 from 480.
pub fn select_parallelism(n: usize) -> Result<usize> {
    if !StandardTables::builtin().supports(n) {
        return Err(FecError::UnsupportedBlockSize(n));
    }
    match n {
        0..=180 => Ok(1),
        192..=240 => Ok(2),
        480..=2400 => Ok(4),
        _ => Err(FecError::UnsupportedBlockSize(n)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftDirection {
    /// `idx_t^k = (idx_t^0 + k) mod P`
    Plus,
    /// `idx_t^k = (idx_t^0 - k) mod P`
    Minus,
    /// P <= 2: both signs describe the same rotation.
    Either,
}

/// Banks and in-bank addresses touched by the P SISOs in one cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleAccess {
    pub adx: Vec<usize>,
    pub bank: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParallelSchedule {
    pub p: usize,
    pub segment: usize,
    pub cycles: Vec<CycleAccess>,
    /// Rotation that relates every SISO's bank to SISO-0's, when one holds at every cycle.
    pub shift: Option<ShiftDirection>,
    /// All SISOs use the same in-bank address at every cycle.
    pub common_address: bool,
}

impl ParallelSchedule {
    /// `(bank, adx)` accessed by `siso` at `cycle`.
    pub fn access(&self, cycle: usize, siso: usize) -> (usize, usize) {
        let c = &self.cycles[cycle];
        (c.bank[siso], c.adx[siso])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Collision {
    pub cycle: usize,
    pub bank: usize,
    pub sisos: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollisionReport {
    pub p: usize,
    pub collisions: Vec<Collision>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ScheduleOutcome {
    CollisionFree(ParallelSchedule),
    Collisions(CollisionReport),
}

impl ScheduleOutcome {
    pub fn is_collision_free(&self) -> bool {
        matches!(self, ScheduleOutcome::CollisionFree(_))
    }
}

/// At cycle `t`, SISO-`k` reads scrambled address `table[t + k*N/P]`. Reports every
/// cycle where two SISOs land in the same bank.
pub fn build_parallel_schedule(table: &PermutationTable, p: usize) -> Result<ScheduleOutcome> {
    let n = table.len();
    check_parallelism(n, p)?;
    let segment = n / p;
    let mut cycles = Vec::with_capacity(segment);
    let mut collisions = Vec::new();
    for t in 0..segment {
        let mut adx = Vec::with_capacity(p);
        let mut bank = Vec::with_capacity(p);
        for k in 0..p {
            let (a, b) = parallel_split(table.forward()[t + k * segment], n, p)?;
            adx.push(a);
            bank.push(b);
        }
        for b in 0..p {
            let sisos: Vec<usize> = (0..p).filter(|&k| bank[k] == b).collect();
            if sisos.len() > 1 {
                collisions.push(Collision { cycle: t, bank: b, sisos });
            }
        }
        cycles.push(CycleAccess { adx, bank });
    }
    if !collisions.is_empty() {
        return Ok(ScheduleOutcome::Collisions(CollisionReport { p, collisions }));
    }

    let holds = |sign: isize| {
        cycles.iter().all(|c| {
            (0..p).all(|k| {
                let expect = (c.bank[0] as isize + sign * k as isize).rem_euclid(p as isize) as usize;
                c.bank[k] == expect
            })
        })
    };
    let shift = match (holds(1), holds(-1)) {
        (true, true) => Some(ShiftDirection::Either),
        (true, false) => Some(ShiftDirection::Plus),
        (false, true) => Some(ShiftDirection::Minus),
        (false, false) => None,
    };
    let common_address = cycles.iter().all(|c| c.adx.iter().all(|&a| a == c.adx[0]));
    Ok(ScheduleOutcome::CollisionFree(ParallelSchedule { p, segment, cycles, shift, common_address }))
}
