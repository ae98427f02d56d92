use super::TannerGraph;
use crate::error::{FecError, Result};
use crate::types::Bit;

/// Systematic encoder derived from the reduced row echelon form of `H` over GF(2).
/// Information bits occupy the non-pivot columns.
#[derive(Debug, Clone)]
pub struct LdpcEncoder {
    n: usize,
    info_cols: Vec<usize>,
    /// For each pivot row: its pivot column and the info-column dependencies.
    pivots: Vec<(usize, Vec<usize>)>,
}

impl LdpcEncoder {
    pub fn new(g: &TannerGraph) -> Self {
        let n = g.vars();
        let words = n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = g
            .dense()
            .iter()
            .map(|r| {
                let mut w = vec![0u64; words];
                for (v, &x) in r.iter().enumerate() {
                    if x != 0 {
                        w[v / 64] |= 1 << (v % 64);
                    }
                }
                w
            })
            .collect();
        let bit = |w: &[u64], v: usize| (w[v / 64] >> (v % 64)) & 1 == 1;
        let mut pivot_cols = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            let Some(p) = (rank..rows.len()).find(|&r| bit(&rows[r], col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && bit(row, col) {
                    for (a, b) in row.iter_mut().zip(&pivot) {
                        *a ^= b;
                    }
                }
            }
            pivot_cols.push(col);
            rank += 1;
        }
        let is_pivot: Vec<bool> = (0..n).map(|c| pivot_cols.contains(&c)).collect();
        let info_cols: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let pivots = pivot_cols
            .iter()
            .enumerate()
            .map(|(r, &pc)| (pc, info_cols.iter().copied().filter(|&c| bit(&rows[r], c)).collect()))
            .collect();
        LdpcEncoder { n, info_cols, pivots }
    }

    pub fn k(&self) -> usize {
        self.info_cols.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_cols
    }

    pub fn encode(&self, info: &[Bit]) -> Result<Vec<Bit>> {
        if info.len() != self.k() {
            return Err(FecError::LengthMismatch { what: "LDPC information", expected: self.k(), got: info.len() });
        }
        let mut cw = vec![0u8; self.n];
        for (&c, &b) in self.info_cols.iter().zip(info) {
            cw[c] = b & 1;
        }
        for (pc, deps) in &self.pivots {
            cw[*pc] = deps.iter().fold(0, |acc, &c| acc ^ cw[c]);
        }
        Ok(cw)
    }

    pub fn extract_info(&self, codeword: &[Bit]) -> Vec<Bit> {
        self.info_cols.iter().map(|&c| codeword[c]).collect()
    }
}
