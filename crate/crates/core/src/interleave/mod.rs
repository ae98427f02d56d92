//! Address generation for the CTC receive chain: the two-step CTC interleaver and
//! its parallel (banked) view, the subblock deinterleaver, and symbol deselection.

mod parallel;
mod sd;
mod subblock;

pub use parallel::{
    build_parallel_schedule, parallel_split, select_parallelism, Collision, CollisionReport, CycleAccess,
    ParallelSchedule, ScheduleOutcome, ShiftDirection,
};
pub use sd::{symbol_deselect, symbol_select, HarqCombiner, SdRequest};
pub use subblock::{
    bit_reverse, subblock_addresses, subblock_deinterleave, subblock_interleave, DeinterleavedBlocks,
    SubblockAddresses, SubblockLayout,
};

use serde::Serialize;

use crate::error::{FecError, Result};
use crate::params::gcd;
use crate::types::Couple;

/// Which generator produced a permutation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Generator {
    Ctc { p0: usize, p_prime: [usize; 4] },
    Subblock { m: u32, j: usize },
    Explicit,
}

/// A verified bijection on `0..n`. `forward[j]` is the source address read for
/// output position `j`, so `interleave(x)[j] = x[forward[j]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationTable {
    forward: Vec<usize>,
    inverse: Vec<usize>,
    generator: Generator,
}

impl PermutationTable {
    pub fn new(forward: Vec<usize>, generator: Generator) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (j, &i) in forward.iter().enumerate() {
            if i >= n {
                return Err(FecError::NotBijective { n, reason: format!("address {i} at position {j} out of range") });
            }
            if inverse[i] != usize::MAX {
                return Err(FecError::NotBijective {
                    n,
                    reason: format!("address {i} produced at positions {} and {j}", inverse[i]),
                });
            }
            inverse[i] = j;
        }
        Ok(PermutationTable { forward, inverse, generator })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn interleave<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.len());
        self.forward.iter().map(|&i| x[i]).collect()
    }

    pub fn deinterleave<T: Copy + Default>(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.len());
        let mut x = vec![T::default(); y.len()];
        for (j, &i) in self.forward.iter().enumerate() {
            x[i] = y[j];
        }
        x
    }
}

/// CTC interleaver step 2, computed incrementally with an accumulator and
/// compare-subtract reductions: `i = ((P0*j mod N) + (P'_{j mod 4} mod N)) mod N`.
pub fn ctc_interleave_table(n: usize, p0: usize, p_prime: [usize; 4]) -> Result<PermutationTable> {
    if n == 0 {
        return Err(FecError::invalid("n", "must be positive"));
    }
    if gcd(p0, n) != 1 {
        return Err(FecError::invalid("P0", format!("gcd(P0={p0}, N={n}) != 1")));
    }
    let step = p0 % n;
    let offsets = p_prime.map(|p| p % n);
    let mut acc = 0usize;
    let mut forward = Vec::with_capacity(n);
    for j in 0..n {
        let mut i = acc + offsets[j & 3];
        if i >= n {
            i -= n;
        }
        forward.push(i);
        acc += step;
        if acc >= n {
            acc -= n;
        }
    }
    PermutationTable::new(forward, Generator::Ctc { p0, p_prime })
}

/// CTC interleaver step 2 by direct evaluation of `(P0*j + P'_{j mod 4}) mod N`.
pub fn ctc_interleave_direct(n: usize, p0: usize, p_prime: [usize; 4]) -> Vec<usize> {
    (0..n).map(|j| ((p0 as u128 * j as u128 + p_prime[j % 4] as u128) % n as u128) as usize).collect()
}

/// CTC interleaver step 1: exchange `A` and `B` of every couple at an odd address.
pub fn couple_swap(pairs: &[Couple]) -> Vec<Couple> {
    pairs.iter().enumerate().map(|(i, c)| if i % 2 == 1 { c.swapped() } else { *c }).collect()
}

/// Full CTC interleaving of a couple sequence: position `j` receives the couple
/// at `i = table[j]`, swapped when `i` is odd.
pub fn ctc_interleave_couples(table: &PermutationTable, pairs: &[Couple]) -> Vec<Couple> {
    table.forward().iter().map(|&i| if i % 2 == 1 { pairs[i].swapped() } else { pairs[i] }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::StandardTables;
    use proptest::prelude::*;

    #[test]
    fn n8_example() {
        let t = ctc_interleave_table(8, 3, [1, 0, 0, 3]).unwrap();
        assert_eq!(t.forward(), &[1, 3, 6, 4, 5, 7, 2, 0]);
    }

    #[test]
    fn n4_identity() {
        let t = ctc_interleave_table(4, 1, [0; 4]).unwrap();
        assert_eq!(t.forward(), &[0, 1, 2, 3]);
    }

    #[test]
    fn incremental_matches_direct_for_all_standard_sizes() {
        for e in &StandardTables::builtin().ctc_interleaver {
            let t = ctc_interleave_table(e.n, e.p0, e.p_prime()).unwrap();
            assert_eq!(t.forward(), ctc_interleave_direct(e.n, e.p0, e.p_prime()).as_slice(), "N={}", e.n);
        }
    }

    #[test]
    fn non_bijective_rejected() {
        // gcd(P0, N) = 1 but the offsets collide.
        assert!(matches!(ctc_interleave_table(8, 1, [0, 1, 0, 0]), Err(FecError::NotBijective { .. })));
        assert!(ctc_interleave_table(8, 2, [0; 4]).is_err());
    }

    #[test]
    fn couple_swap_examples() {
        let x = [Couple::new(0, 1), Couple::new(1, 0)];
        assert_eq!(couple_swap(&x), vec![Couple::new(0, 1), Couple::new(0, 1)]);
        assert_eq!(couple_swap(&x[..1]), x[..1].to_vec());
    }

    proptest! {
        #[test]
        fn couple_swap_is_involution(bits in proptest::collection::vec((0u8..2, 0u8..2), 0..64)) {
            let pairs: Vec<Couple> = bits.iter().map(|&(a, b)| Couple::new(a, b)).collect();
            prop_assert_eq!(couple_swap(&couple_swap(&pairs)), pairs);
        }

        #[test]
        fn deinterleave_inverts_interleave(seed in 0usize..17, data in proptest::collection::vec(-5.0f64..5.0, 2400)) {
            let e = StandardTables::builtin().ctc_interleaver[seed];
            let t = ctc_interleave_table(e.n, e.p0, e.p_prime()).unwrap();
            let x = &data[..e.n];
            prop_assert_eq!(t.deinterleave(&t.interleave(x)), x.to_vec());
            for (j, &i) in t.forward().iter().enumerate() {
                prop_assert_eq!(t.inverse()[i], j);
            }
        }
    }
}
