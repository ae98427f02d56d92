//! Block turbo (product) codes built from extended Hamming codes, decoded with
//! the Chase list search and the Pyndiah soft-output rule.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FecError, Result};
use crate::types::{check_finite, Bit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HammingCodeId {
    H15_11,
    H31_26,
    H63_57,
}

impl HammingCodeId {
    pub const ALL: [HammingCodeId; 3] = [HammingCodeId::H15_11, HammingCodeId::H31_26, HammingCodeId::H63_57];

    pub fn m(self) -> u32 {
        match self {
            HammingCodeId::H15_11 => 4,
            HammingCodeId::H31_26 => 5,
            HammingCodeId::H63_57 => 6,
        }
    }

    /// Base (non-extended) length.
    pub fn n(self) -> usize {
        (1 << self.m()) - 1
    }

    pub fn k(self) -> usize {
        self.n() - self.m() as usize
    }

    pub fn extended_length(self) -> usize {
        self.n() + 1
    }

    pub fn code(self) -> ExtHammingCode {
        ExtHammingCode::new(self.m()).expect("m in range")
    }
}

impl fmt::Display for HammingCodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H{}_{}", self.n(), self.k())
    }
}

impl std::str::FromStr for HammingCodeId {
    type Err = FecError;

    fn from_str(s: &str) -> Result<Self> {
        HammingCodeId::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| FecError::invalid("code", format!("unknown code {s:?}; expected H15_11, H31_26 or H63_57")))
    }
}

/// Systematic extended Hamming code of length `2^m`.
///
/// Positions `0..k` carry information, `k..n` the Hamming parities, `n` the
/// overall parity. Position `i < n` has parity-check column `column(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtHammingCode {
    m: u32,
    columns: Vec<u32>,
    /// Inverse of `columns`: position of each nonzero syndrome.
    position_of: Vec<usize>,
}

impl ExtHammingCode {
    pub fn new(m: u32) -> Result<Self> {
        if !(2..=6).contains(&m) {
            return Err(FecError::invalid("m", "extended Hamming codes need 2 <= m <= 6"));
        }
        let n = (1usize << m) - 1;
        let mut columns: Vec<u32> = (1..=n as u32).filter(|c| !c.is_power_of_two()).collect();
        columns.extend((0..m).map(|i| 1u32 << i));
        let mut position_of = vec![usize::MAX; n + 1];
        for (i, &c) in columns.iter().enumerate() {
            position_of[c as usize] = i;
        }
        Ok(ExtHammingCode { m, columns, position_of })
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }

    pub fn k(&self) -> usize {
        self.n() - self.m as usize
    }

    pub fn len(&self) -> usize {
        self.n() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn column(&self, i: usize) -> u32 {
        self.columns[i]
    }

    fn syndrome(&self, word: u64) -> u32 {
        let mut s = 0;
        for (i, &c) in self.columns.iter().enumerate() {
            if (word >> i) & 1 == 1 {
                s ^= c;
            }
        }
        s
    }

    /// All parity checks, including the overall parity, are satisfied.
    pub fn is_codeword(&self, word: u64) -> bool {
        self.syndrome(word) == 0 && word.count_ones().is_multiple_of(2)
    }

    /// Encodes `k` information bits packed LSB-first.
    pub fn encode_word(&self, info: u64) -> u64 {
        let k = self.k();
        let info = info & ((1u64 << k) - 1);
        let mut s = 0;
        for i in 0..k {
            if (info >> i) & 1 == 1 {
                s ^= self.columns[i];
            }
        }
        let mut word = info | ((s as u64) << k);
        if word.count_ones() % 2 == 1 {
            word |= 1 << self.n();
        }
        word
    }

    /// Hard-decision decoding: single-error syndrome correction followed by
    /// overall-parity repair. Always returns a codeword.
    pub fn decode_hard(&self, word: u64) -> u64 {
        let mut w = word;
        let s = self.syndrome(w);
        if s != 0 {
            w ^= 1 << self.position_of[s as usize];
        }
        if w.count_ones() % 2 == 1 {
            w ^= 1 << self.n();
        }
        w
    }

    pub fn unpack(&self, word: u64) -> Vec<Bit> {
        (0..self.len()).map(|i| ((word >> i) & 1) as Bit).collect()
    }

    pub fn pack(bits: &[Bit]) -> u64 {
        bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | (((b & 1) as u64) << i))
    }
}

pub fn ext_hamming_encode(info: &[Bit], code: &ExtHammingCode) -> Result<Vec<Bit>> {
    if info.len() != code.k() {
        return Err(FecError::LengthMismatch { what: "information bits", expected: code.k(), got: info.len() });
    }
    Ok(code.unpack(code.encode_word(ExtHammingCode::pack(info))))
}

/// `+1` for bit 0, `-1` for bit 1.
fn sign_of(word: u64, j: usize) -> f64 {
    if (word >> j) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Squared Euclidean distance between `r` and the `±1` image of `word`.
pub fn distance(r: &[f64], word: u64) -> f64 {
    r.iter().enumerate().map(|(j, &x)| (x - sign_of(word, j)).powi(2)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaseResult {
    /// Minimum-distance codeword of the list.
    pub decision: u64,
    /// Distinct candidate codewords with their squared distances to `r`.
    pub list: Vec<(u64, f64)>,
}

impl ChaseResult {
    /// Decision in the `±1` alphabet.
    pub fn decision_signs(&self, len: usize) -> Vec<f64> {
        (0..len).map(|j| sign_of(self.decision, j)).collect()
    }

    /// Closest listed codeword whose bit `j` maps to `sign`, if any.
    pub fn nearest_with(&self, j: usize, sign: f64) -> Option<(u64, f64)> {
        self.list.iter().filter(|(c, _)| sign_of(*c, j) == sign).copied().fold(
            None,
            |best: Option<(u64, f64)>, cand| match best {
                Some(b) if b.1 <= cand.1 => Some(b),
                _ => Some(cand),
            },
        )
    }

    /// Whether a codeword with the opposite bit exists at each position.
    pub fn competitors(&self, len: usize) -> Vec<bool> {
        (0..len).map(|j| self.list.iter().any(|(c, _)| (c ^ self.decision) >> j & 1 == 1)).collect()
    }
}

/// Chase-II search over the `p` least reliable positions of `r`.
pub fn chase_search(r: &[f64], code: &ExtHammingCode, p: usize) -> Result<ChaseResult> {
    if r.len() != code.len() {
        return Err(FecError::LengthMismatch { what: "Chase input", expected: code.len(), got: r.len() });
    }
    check_finite(r)?;
    if p == 0 || p > code.len().min(16) {
        return Err(FecError::invalid("p", "must be in 1..=min(n+1, 16)"));
    }
    let hard = r.iter().enumerate().fold(0u64, |acc, (j, &x)| if x < 0.0 { acc | (1 << j) } else { acc });
    let mut order: Vec<usize> = (0..r.len()).collect();
    order.sort_by(|&a, &b| r[a].abs().total_cmp(&r[b].abs()).then(a.cmp(&b)));
    let lrp = &order[..p];

    let mut words: Vec<u64> = (0..1u32 << p)
        .map(|pattern| {
            let mut test = hard;
            for (bit, &pos) in lrp.iter().enumerate() {
                if (pattern >> bit) & 1 == 1 {
                    test ^= 1 << pos;
                }
            }
            code.decode_hard(test)
        })
        .collect();
    words.sort_unstable();
    words.dedup();
    debug_assert!(words.iter().all(|&w| code.is_codeword(w)));

    let list: Vec<(u64, f64)> = words.into_iter().map(|w| (w, distance(r, w))).collect();
    let decision = list.iter().fold(list[0], |best, &c| if c.1 < best.1 { c } else { best }).0;
    Ok(ChaseResult { decision, list })
}

/// Soft output of one constituent decoding: reliabilities from the two nearest
/// competitors where both exist, `beta * d_j` elsewhere. Returns `(w, d)`.
pub fn elementary_siso(r: &[f64], chase: &ChaseResult, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let d = chase.decision_signs(r.len());
    let d_dist = chase.list.iter().find(|(c, _)| *c == chase.decision).map(|c| c.1).unwrap_or(f64::NAN);
    let w = (0..r.len())
        .map(|j| match chase.nearest_with(j, -d[j]) {
            Some((_, comp)) => {
                let (plus, minus) = if d[j] > 0.0 { (d_dist, comp) } else { (comp, d_dist) };
                (minus - plus) / 4.0 - r[j]
            }
            None => beta * d[j],
        })
        .collect();
    (w, d)
}

/// Channel observations of one product codeword, `(n1+1) x (n2+1)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductBlock {
    pub row_code: HammingCodeId,
    pub col_code: HammingCodeId,
    pub r: Vec<f64>,
}

impl ProductBlock {
    pub fn new(row_code: HammingCodeId, col_code: HammingCodeId, llrs: Vec<f64>) -> Result<Self> {
        let expected = row_code.extended_length() * col_code.extended_length();
        if llrs.len() != expected {
            return Err(FecError::LengthMismatch { what: "product block", expected, got: llrs.len() });
        }
        check_finite(&llrs)?;
        Ok(ProductBlock { row_code, col_code, r: llrs })
    }

    pub fn square(code: HammingCodeId, llrs: Vec<f64>) -> Result<Self> {
        ProductBlock::new(code, code, llrs)
    }

    /// Number of rows, the column code length.
    pub fn rows(&self) -> usize {
        self.col_code.extended_length()
    }

    pub fn cols(&self) -> usize {
        self.row_code.extended_length()
    }

    pub fn info_len(&self) -> usize {
        self.row_code.k() * self.col_code.k()
    }
}

/// Encodes `k1 * k2` information bits (row-major, `k1` rows of `k2`): rows
/// with the row code, then every column with the column code.
pub fn product_encode(info: &[Bit], row_code: HammingCodeId, col_code: HammingCodeId) -> Result<Vec<Bit>> {
    let (rc, cc) = (row_code.code(), col_code.code());
    let (k1, k2) = (cc.k(), rc.k());
    if info.len() != k1 * k2 {
        return Err(FecError::LengthMismatch { what: "product information", expected: k1 * k2, got: info.len() });
    }
    let (n1, n2) = (cc.len(), rc.len());
    let mut out = vec![0u8; n1 * n2];
    for i in 0..k1 {
        let row = ext_hamming_encode(&info[i * k2..(i + 1) * k2], &rc)?;
        out[i * n2..(i + 1) * n2].copy_from_slice(&row);
    }
    for j in 0..n2 {
        let col: Vec<Bit> = (0..k1).map(|i| out[i * n2 + j]).collect();
        let coded = ext_hamming_encode(&col, &cc)?;
        for i in 0..n1 {
            out[i * n2 + j] = coded[i];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtcConfig {
    pub half_iterations: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub p: usize,
}

impl BtcConfig {
    pub fn standard() -> Self {
        BtcConfig {
            half_iterations: 8,
            alpha: vec![0.0, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0, 1.0],
            beta: vec![0.2, 0.4, 0.6, 0.8, 1.0, 1.0, 1.0, 1.0],
            p: 4,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.half_iterations == 0 {
            return Err(FecError::invalid("half_iterations", "must be at least 1"));
        }
        if self.alpha.len() != self.half_iterations || self.beta.len() != self.half_iterations {
            return Err(FecError::invalid("alpha/beta", "one entry per half-iteration"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BtcOutput {
    pub info: Vec<Bit>,
    /// Information bits decided after each half-iteration.
    pub per_half_iteration: Vec<Vec<Bit>>,
}

fn mean_abs(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum::<f64>() / x.len() as f64
}

/// Iterative row/column decoding. Channel values are scaled to unit mean
/// magnitude and the extrinsic matrix to unit mean magnitude before weighting
/// by `alpha`.
pub fn btc_decode(block: &ProductBlock, cfg: &BtcConfig) -> Result<BtcOutput> {
    cfg.validate()?;
    let (rc, cc) = (block.row_code.code(), block.col_code.code());
    let (rows, cols) = (block.rows(), block.cols());
    let scale = mean_abs(&block.r);
    let r_ch: Vec<f64> = if scale > 0.0 { block.r.iter().map(|x| x / scale).collect() } else { block.r.clone() };
    let mut w = vec![0.0; rows * cols];
    let mut d = vec![1.0; rows * cols];
    let mut per_half = Vec::with_capacity(cfg.half_iterations);
    for h in 0..cfg.half_iterations {
        let wn = mean_abs(&w);
        let a = if wn > 0.0 { cfg.alpha[h] / wn } else { 0.0 };
        let r_in: Vec<f64> = r_ch.iter().zip(&w).map(|(r, x)| r + a * x).collect();
        let along_rows = h % 2 == 0;
        let (count, len, code) = if along_rows { (rows, cols, &rc) } else { (cols, rows, &cc) };
        let index = |v: usize, t: usize| if along_rows { v * cols + t } else { t * cols + v };
        for v in 0..count {
            let vec: Vec<f64> = (0..len).map(|t| r_in[index(v, t)]).collect();
            let chase = chase_search(&vec, code, cfg.p)?;
            let (wv, dv) = elementary_siso(&vec, &chase, cfg.beta[h]);
            for t in 0..len {
                w[index(v, t)] = wv[t];
                d[index(v, t)] = dv[t];
            }
        }
        per_half.push(extract_info(&d, cc.k(), rc.k(), cols));
    }
    Ok(BtcOutput { info: per_half.last().cloned().unwrap_or_default(), per_half_iteration: per_half })
}

fn extract_info(d: &[f64], k1: usize, k2: usize, cols: usize) -> Vec<Bit> {
    let mut out = Vec::with_capacity(k1 * k2);
    for i in 0..k1 {
        for j in 0..k2 {
            out.push(u8::from(d[i * cols + j] < 0.0));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn codebook(code: &ExtHammingCode) -> Vec<u64> {
        (0..1u64 << code.k()).map(|i| code.encode_word(i)).collect()
    }

    #[test]
    fn code_dimensions() {
        for id in HammingCodeId::ALL {
            let c = id.code();
            assert_eq!((c.n(), c.k(), c.len()), (id.n(), id.k(), id.extended_length()));
        }
        assert_eq!("h31_26".parse::<HammingCodeId>().unwrap(), HammingCodeId::H31_26);
        assert!("H7_4".parse::<HammingCodeId>().is_err());
    }

    #[test]
    fn zero_info_encodes_to_zero() {
        let c = HammingCodeId::H15_11.code();
        assert_eq!(ext_hamming_encode(&[0; 11], &c).unwrap(), vec![0; 16]);
        assert!(ext_hamming_encode(&[0; 10], &c).is_err());
    }

    #[test]
    fn unit_vectors_give_generator_rows() {
        // Generator row i: e_i, then the bits of column i, then the overall parity.
        let c = HammingCodeId::H15_11.code();
        for i in 0..11 {
            let mut info = vec![0u8; 11];
            info[i] = 1;
            let mut row = info.clone();
            let col = c.column(i);
            row.extend((0..4).map(|b| ((col >> b) & 1) as u8));
            let weight: u8 = row.iter().sum();
            row.push(weight % 2);
            assert_eq!(ext_hamming_encode(&info, &c).unwrap(), row);
        }
    }

    #[test]
    fn minimum_distance_is_four() {
        for m in [3, 4] {
            let c = ExtHammingCode::new(m).unwrap();
            let min = codebook(&c).iter().skip(1).map(|w| w.count_ones()).min().unwrap();
            assert_eq!(min, 4);
            assert!(codebook(&c).iter().all(|&w| w.count_ones() % 2 == 0 && c.is_codeword(w)));
        }
    }

    #[test]
    fn hard_decoder_fixes_single_errors() {
        let c = HammingCodeId::H31_26.code();
        let w = c.encode_word(0x2ab_cdef);
        for j in 0..c.len() {
            assert_eq!(c.decode_hard(w ^ (1 << j)), w);
        }
    }

    #[test]
    fn chase_on_clean_codeword() {
        let c = HammingCodeId::H15_11.code();
        let w = c.encode_word(0b101_1001_0110);
        let r: Vec<f64> = (0..16).map(|j| 10.0 * sign_of(w, j)).collect();
        let res = chase_search(&r, &c, 4).unwrap();
        assert_eq!(res.decision, w);
        assert!(res.list.iter().any(|(x, _)| *x == w));
    }

    #[test]
    fn chase_decision_is_list_minimum() {
        let c = HammingCodeId::H15_11.code();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let w = c.encode_word(rng.random());
            let r: Vec<f64> = (0..16).map(|j| sign_of(w, j) + rng.random_range(-1.2..1.2)).collect();
            let res = chase_search(&r, &c, 4).unwrap();
            let min = res.list.iter().map(|&(x, _)| distance(&r, x)).fold(f64::MAX, f64::min);
            assert_eq!(distance(&r, res.decision), min);
            assert!(res.list.iter().all(|&(x, _)| c.is_codeword(x)));
        }
    }

    #[test]
    fn full_flip_set_gives_true_ml() {
        let c = ExtHammingCode::new(3).unwrap();
        let book = codebook(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..300 {
            let r: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
            let ml = *book.iter().min_by(|&&a, &&b| distance(&r, a).total_cmp(&distance(&r, b))).unwrap();
            assert_eq!(chase_search(&r, &c, 8).unwrap().decision, ml);
        }
    }

    #[test]
    fn reliability_from_constructed_competitors() {
        // Two-word list over an 8-bit code, distances 2 and 6 from r.
        let c = ExtHammingCode::new(3).unwrap();
        let plus = 0u64;
        let minus = c.encode_word(0b0111);
        let r = vec![0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let chase = ChaseResult { decision: plus, list: vec![(plus, 2.0), (minus, 6.0)] };
        let j = (0..8).find(|&j| (minus >> j) & 1 == 1).unwrap();
        let (w, d) = elementary_siso(&r, &chase, 0.5);
        assert_eq!(d[j], 1.0);
        assert!((w[j] - (1.0 - r[j])).abs() < 1e-12);
        let untouched = (0..8).find(|&j| (minus >> j) & 1 == 0).unwrap();
        assert_eq!(w[untouched], 0.5);
    }

    #[test]
    fn missing_competitor_uses_beta() {
        let r = vec![-1.0; 8];
        let all_ones = ExtHammingCode::new(3).unwrap().encode_word(0b1111);
        let chase = ChaseResult { decision: all_ones, list: vec![(all_ones, 0.0)] };
        let (w, d) = elementary_siso(&r, &chase, 0.6);
        assert!(d.iter().all(|&x| x == -1.0));
        assert!(w.iter().all(|&x| x == -0.6));
    }

    fn noiseless_block(id: HammingCodeId, seed: u64) -> (Vec<Bit>, ProductBlock) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let info: Vec<Bit> = (0..id.k() * id.k()).map(|_| rng.random_range(0..2)).collect();
        let coded = product_encode(&info, id, id).unwrap();
        let llrs = coded.iter().map(|&b| if b == 0 { 4.0 } else { -4.0 }).collect();
        (info, ProductBlock::square(id, llrs).unwrap())
    }

    #[test]
    fn product_codeword_rows_and_columns_are_codewords() {
        let id = HammingCodeId::H15_11;
        let c = id.code();
        let (_, block) = noiseless_block(id, 1);
        let bits: Vec<Bit> = block.r.iter().map(|&x| u8::from(x < 0.0)).collect();
        for i in 0..16 {
            assert!(c.is_codeword(ExtHammingCode::pack(&bits[i * 16..(i + 1) * 16])));
            let col: Vec<Bit> = (0..16).map(|t| bits[t * 16 + i]).collect();
            assert!(c.is_codeword(ExtHammingCode::pack(&col)));
        }
    }

    #[test]
    fn noiseless_decode_all_codes() {
        for (s, id) in HammingCodeId::ALL.into_iter().enumerate() {
            let (info, block) = noiseless_block(id, s as u64);
            let out = btc_decode(&block, &BtcConfig::standard()).unwrap();
            assert_eq!(out.per_half_iteration[0], info);
            assert_eq!(out.info, info);
        }
    }

    #[test]
    fn single_error_fixed_in_first_half_iteration() {
        let id = HammingCodeId::H15_11;
        let (info, mut block) = noiseless_block(id, 11);
        block.r[3 * 16 + 5] = -block.r[3 * 16 + 5];
        let out = btc_decode(&block, &BtcConfig::standard()).unwrap();
        assert_eq!(out.per_half_iteration[0], info);
    }

    proptest! {
        #[test]
        fn negating_input_negates_outputs(seed in any::<u64>()) {
            let c = HammingCodeId::H15_11.code();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r: Vec<f64> = (0..16).map(|_| rng.random_range(-2.0..2.0)).collect();
            let neg: Vec<f64> = r.iter().map(|x| -x).collect();
            let (w1, d1) = elementary_siso(&r, &chase_search(&r, &c, 4).unwrap(), 0.5);
            let (w2, d2) = elementary_siso(&neg, &chase_search(&neg, &c, 4).unwrap(), 0.5);
            for j in 0..16 {
                prop_assert_eq!(d1[j], -d2[j]);
                prop_assert!((w1[j] + w2[j]).abs() < 1e-12);
            }
        }
    }
}
