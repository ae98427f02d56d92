use super::{Generator, PermutationTable};
use crate::error::{FecError, Result};

/// Bit-reversed `m`-bit value of `y`.
pub fn bit_reverse(y: usize, m: u32) -> usize {
    if m == 0 {
        return 0;
    }
    ((y as u64).reverse_bits() >> (64 - m)) as usize
}

/// Output of the address generator: the kept addresses plus the number of
/// tentative addresses `N_M` generated to obtain them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubblockAddresses {
    pub table: PermutationTable,
    pub tentative: usize,
}

impl SubblockAddresses {
    pub fn addresses(&self) -> &[usize] {
        self.table.forward()
    }
}

/// Emits `T_k = 2^m (k mod J) + BRO_m(floor(k/J))`, discarding `T_k >= N`, until `N`
/// addresses have been kept.
pub fn subblock_addresses(n: usize, m: u32, j: usize) -> Result<SubblockAddresses> {
    if n == 0 {
        return Err(FecError::invalid("n", "must be positive"));
    }
    if !(3..=10).contains(&m) {
        return Err(FecError::invalid("m", "must lie in [3, 10]"));
    }
    if j == 0 || (1usize << m) * j < n {
        return Err(FecError::invalid("J", format!("2^m * J must cover N={n}")));
    }
    let mut kept = Vec::with_capacity(n);
    // k mod J and floor(k/J) as two chained counters
    let (mut col, mut row) = (0usize, 0usize);
    let mut k = 0usize;
    while kept.len() < n {
        let t = (col << m) + bit_reverse(row, m);
        if t < n {
            kept.push(t);
        }
        k += 1;
        col += 1;
        if col == j {
            col = 0;
            row += 1;
        }
    }
    Ok(SubblockAddresses { table: PermutationTable::new(kept, Generator::Subblock { m, j })?, tentative: k })
}

/// Six received subblocks of N LLRs each, in the order A, B, Y1, W1, Y2, W2.
#[derive(Debug, Clone, PartialEq)]
pub struct SubblockLayout {
    n: usize,
    subblocks: [Vec<f64>; 6],
}

impl SubblockLayout {
    pub const A: usize = 0;
    pub const B: usize = 1;
    pub const Y1: usize = 2;
    pub const W1: usize = 3;
    pub const Y2: usize = 4;
    pub const W2: usize = 5;

    pub fn new(subblocks: [Vec<f64>; 6]) -> Result<Self> {
        let n = subblocks[0].len();
        if n == 0 {
            return Err(FecError::EmptyInput);
        }
        for s in &subblocks {
            if s.len() != n {
                return Err(FecError::LengthMismatch { what: "subblock", expected: n, got: s.len() });
            }
        }
        Ok(SubblockLayout { n, subblocks })
    }

    /// Splits a 6N transmitted block `A | B | Y1,Y2 muxed | W1,W2 muxed`.
    pub fn from_received(block: &[f64], n: usize) -> Result<Self> {
        if block.len() != 6 * n {
            return Err(FecError::LengthMismatch { what: "received block", expected: 6 * n, got: block.len() });
        }
        let demux = |macro_block: &[f64], phase: usize| -> Vec<f64> {
            macro_block.iter().skip(phase).step_by(2).copied().collect()
        };
        let (y, w) = (&block[2 * n..4 * n], &block[4 * n..]);
        SubblockLayout::new([
            block[..n].to_vec(),
            block[n..2 * n].to_vec(),
            demux(y, 0),
            demux(w, 0),
            demux(y, 1),
            demux(w, 1),
        ])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn subblock(&self, idx: usize) -> &[f64] {
        &self.subblocks[idx]
    }

    pub fn total_len(&self) -> usize {
        self.subblocks.iter().map(Vec::len).sum()
    }
}

/// Deinterleaved output: A and B stored separately, Y1/Y2 and W1/W2 multiplexed
/// symbol by symbol into 2N macro-blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct DeinterleavedBlocks {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub y_macro: Vec<f64>,
    pub w_macro: Vec<f64>,
}

impl DeinterleavedBlocks {
    pub fn total_len(&self) -> usize {
        self.a.len() + self.b.len() + self.y_macro.len() + self.w_macro.len()
    }

    pub fn y1(&self) -> Vec<f64> {
        self.y_macro.iter().step_by(2).copied().collect()
    }

    pub fn y2(&self) -> Vec<f64> {
        self.y_macro.iter().skip(1).step_by(2).copied().collect()
    }

    pub fn w1(&self) -> Vec<f64> {
        self.w_macro.iter().step_by(2).copied().collect()
    }

    pub fn w2(&self) -> Vec<f64> {
        self.w_macro.iter().skip(1).step_by(2).copied().collect()
    }
}

fn mux(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).flat_map(|(&p, &q)| [p, q]).collect()
}

/// Writes LLR `i` of every subblock to address `addresses[i]`.
pub fn subblock_deinterleave(layout: &SubblockLayout, addresses: &[usize]) -> Result<DeinterleavedBlocks> {
    let n = layout.n;
    if addresses.len() != n {
        return Err(FecError::LengthMismatch { what: "address list", expected: n, got: addresses.len() });
    }
    let table = PermutationTable::new(addresses.to_vec(), Generator::Explicit)?;
    let out: Vec<Vec<f64>> = layout.subblocks.iter().map(|s| table.deinterleave(s)).collect();
    Ok(DeinterleavedBlocks {
        a: out[SubblockLayout::A].clone(),
        b: out[SubblockLayout::B].clone(),
        y_macro: mux(&out[SubblockLayout::Y1], &out[SubblockLayout::Y2]),
        w_macro: mux(&out[SubblockLayout::W1], &out[SubblockLayout::W2]),
    })
}

/// Transmitter-side counterpart: interleaves six natural-order streams
/// (A, B, Y1, W1, Y2, W2) and emits the 6N block `A | B | Y1Y2 | W1W2`.
pub fn subblock_interleave<T: Copy + Default>(streams: [&[T]; 6], addresses: &[usize]) -> Result<Vec<T>> {
    let n = addresses.len();
    for s in &streams {
        if s.len() != n {
            return Err(FecError::LengthMismatch { what: "subblock", expected: n, got: s.len() });
        }
    }
    let table = PermutationTable::new(addresses.to_vec(), Generator::Explicit)?;
    let int: Vec<Vec<T>> = streams.iter().map(|s| table.interleave(s)).collect();
    let mut out = Vec::with_capacity(6 * n);
    out.extend_from_slice(&int[SubblockLayout::A]);
    out.extend_from_slice(&int[SubblockLayout::B]);
    for i in 0..n {
        out.push(int[SubblockLayout::Y1][i]);
        out.push(int[SubblockLayout::Y2][i]);
    }
    for i in 0..n {
        out.push(int[SubblockLayout::W1][i]);
        out.push(int[SubblockLayout::W2][i]);
    }
    Ok(out)
}
