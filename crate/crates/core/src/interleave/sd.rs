use serde::{Deserialize, Serialize};

use crate::error::{FecError, Result};
use crate::types::check_finite;

/// One HARQ subpacket descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdRequest {
    pub n: usize,
    pub n_sch: usize,
    pub m: usize,
    pub spid: usize,
}

impl SdRequest {
    pub fn new(n: usize, n_sch: usize, m: usize, spid: usize) -> Result<Self> {
        if n == 0 {
            return Err(FecError::invalid("n", "must be positive"));
        }
        if !(1..=480).contains(&n_sch) {
            return Err(FecError::invalid("N_SCH", "must lie in [1, 480]"));
        }
        if !matches!(m, 2 | 4 | 6) {
            return Err(FecError::invalid("m", "modulation order must be 2, 4 or 6"));
        }
        if spid > 3 {
            return Err(FecError::invalid("SPID", "must lie in 0..=3"));
        }
        let req = SdRequest { n, n_sch, m, spid };
        if req.length() > 4 * req.block_len() {
            return Err(FecError::invalid(
                "N_SCH",
                format!("L={} exceeds the x4 repetition capacity {}", req.length(), 4 * req.block_len()),
            ));
        }
        Ok(req)
    }

    /// 6N, the decoder-side block size.
    pub fn block_len(&self) -> usize {
        6 * self.n
    }

    /// `L = 48 * m * N_SCH`.
    pub fn length(&self) -> usize {
        48 * self.m * self.n_sch
    }

    /// `L` through the shift-add form: `(2x + x) << 5`, `(2x + x) << 6` or `(8x + x) << 5`.
    pub fn length_shift_add(&self) -> usize {
        let x = self.n_sch;
        match self.m {
            2 => ((x << 1) + x) << 5,
            4 => ((x << 1) + x) << 6,
            6 => ((x << 3) + x) << 5,
            _ => unreachable!("validated in SdRequest::new"),
        }
    }

    /// `F = (SPID * L) mod 6N`, without the multiplication.
    pub fn start(&self) -> usize {
        let l = self.length_shift_add();
        let six_n = self.block_len();
        match self.spid {
            0 => 0,
            1 => l % six_n,
            2 => (l << 1) % six_n,
            3 => ((l << 1) + l) % six_n,
            _ => unreachable!("validated in SdRequest::new"),
        }
    }

    pub fn start_direct(&self) -> usize {
        (self.spid * self.length()) % self.block_len()
    }
}

/// Maps the L received LLRs of one subpacket onto the 6N decoder block:
/// zero-initialized, written from F with wraparound, repeats combined by addition.
pub fn symbol_deselect(received: &[f64], req: &SdRequest) -> Result<Vec<f64>> {
    let mut out = vec![0.0; req.block_len()];
    accumulate(&mut out, received, req)?;
    Ok(out)
}

fn accumulate(out: &mut [f64], received: &[f64], req: &SdRequest) -> Result<()> {
    let l = req.length();
    if received.len() != l {
        return Err(FecError::LengthMismatch { what: "subpacket LLRs", expected: l, got: received.len() });
    }
    check_finite(received)?;
    let six_n = req.block_len();
    let mut pos = req.start();
    for &x in received {
        out[pos] += x;
        pos += 1;
        if pos == six_n {
            pos = 0;
        }
    }
    Ok(())
}

/// Transmitter side: the L values sent for one subpacket, read from F with wraparound.
pub fn symbol_select<T: Copy>(block: &[T], req: &SdRequest) -> Result<Vec<T>> {
    if block.len() != req.block_len() {
        return Err(FecError::LengthMismatch { what: "6N block", expected: req.block_len(), got: block.len() });
    }
    let six_n = req.block_len();
    let start = req.start();
    Ok((0..req.length()).map(|i| block[(start + i) % six_n]).collect())
}

/// Combines several subpackets of the same block.
#[derive(Debug, Clone)]
pub struct HarqCombiner {
    n: usize,
    block: Vec<f64>,
}

impl HarqCombiner {
    pub fn new(n: usize) -> Self {
        HarqCombiner { n, block: vec![0.0; 6 * n] }
    }

    pub fn add(&mut self, received: &[f64], req: &SdRequest) -> Result<()> {
        if req.n != self.n {
            return Err(FecError::invalid("n", "subpacket belongs to a different block size"));
        }
        accumulate(&mut self.block, received, req)
    }

    pub fn block(&self) -> &[f64] {
        &self.block
    }

    pub fn into_block(self) -> Vec<f64> {
        self.block
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spid0_starts_at_zero() {
        let r = SdRequest::new(48, 3, 4, 0).unwrap();
        assert_eq!(r.start(), 0);
    }

    #[test]
    fn length_forms_agree() {
        let r = SdRequest::new(48, 1, 2, 0).unwrap();
        assert_eq!(r.length(), 96);
        assert_eq!(r.length_shift_add(), 96);
        for m in [2, 4, 6] {
            for n_sch in 1..=480 {
                if let Ok(r) = SdRequest::new(2400, n_sch, m, 0) {
                    assert_eq!(r.length(), r.length_shift_add());
                }
            }
        }
    }

    #[test]
    fn spid2_start() {
        let r = SdRequest::new(48, 1, 2, 2).unwrap();
        assert_eq!(r.start(), 192);
        for spid in 0..4 {
            for n_sch in 1..=6 {
                let r = SdRequest::new(48, n_sch, 4, spid).unwrap();
                assert_eq!(r.start(), r.start_direct());
            }
        }
    }

    #[test]
    fn request_validation() {
        assert!(SdRequest::new(48, 0, 2, 0).is_err());
        assert!(SdRequest::new(48, 481, 2, 0).is_err());
        assert!(SdRequest::new(48, 1, 3, 0).is_err());
        assert!(SdRequest::new(48, 1, 2, 4).is_err());
        // L = 48*6*5 = 1440 > 4*288
        assert!(SdRequest::new(48, 5, 6, 0).is_err());
    }

    #[test]
    fn single_full_transmission_is_identity() {
        // 6N = 288 = 48 * 6 * 1
        let r = SdRequest::new(48, 1, 6, 0).unwrap();
        let rx: Vec<f64> = (0..288).map(|i| i as f64 + 0.5).collect();
        assert_eq!(symbol_deselect(&rx, &r).unwrap(), rx);
    }

    #[test]
    fn puncturing_leaves_zeros_and_wraps() {
        // L = 96 of 288, starting at 192 -> fills 192..288
        let r = SdRequest::new(48, 1, 2, 2).unwrap();
        let out = symbol_deselect(&vec![1.0; 96], &r).unwrap();
        assert!(out[..192].iter().all(|&x| x == 0.0));
        assert!(out[192..].iter().all(|&x| x == 1.0));
        // SPID 3: F = 288 mod 288 = 0
        let r3 = SdRequest::new(48, 1, 2, 3).unwrap();
        assert_eq!(r3.start(), 0);
    }

    #[test]
    fn repetition_is_combined() {
        // L = 48*4*3 = 576 = 2 * 288
        let r = SdRequest::new(48, 3, 4, 1).unwrap();
        let rx = vec![0.25; 576];
        let out = symbol_deselect(&rx, &r).unwrap();
        assert!(out.iter().all(|&x| x == 0.5));
    }

    #[test]
    fn combining_twice_doubles() {
        let r = SdRequest::new(48, 1, 6, 0).unwrap();
        let rx: Vec<f64> = (0..288).map(|i| (i as f64).sin()).collect();
        let mut c = HarqCombiner::new(48);
        c.add(&rx, &r).unwrap();
        c.add(&rx, &r).unwrap();
        for (o, x) in c.block().iter().zip(&rx) {
            assert_eq!(*o, 2.0 * x);
        }
    }

    #[test]
    fn select_then_deselect_positions() {
        let r = SdRequest::new(24, 1, 2, 1).unwrap();
        let block: Vec<f64> = (0..144).map(|i| i as f64).collect();
        let tx = symbol_select(&block, &r).unwrap();
        assert_eq!(tx.len(), 96);
        assert_eq!(tx[0], 96.0);
        assert_eq!(tx[48], 0.0);
        let rx = symbol_deselect(&tx, &r).unwrap();
        for (i, &x) in rx.iter().enumerate() {
            let covered = !(48..96).contains(&i);
            assert_eq!(x, if covered { i as f64 } else { 0.0 });
        }
    }

    #[test]
    fn wrong_length_rejected() {
        let r = SdRequest::new(48, 1, 2, 0).unwrap();
        assert!(symbol_deselect(&[0.0; 95], &r).is_err());
        assert!(symbol_deselect(&[f64::NAN; 96], &r).is_err());
    }
}
