//! Code-parameter configuration: one JSON document per code instance, tagged by
//! `family`, plus the shipped table of standard constants.
//!
//! ```json
//! { "family": "subblock", "n": 144, "m": 6, "J": 3 }
//! ```

use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::btc::HammingCodeId;
use crate::error::{FecError, Result};
use crate::interleave;
use crate::ldpc::{CnMode, EarlyStop, GraphSource, Schedule};

/// Polynomial written in octal in config files (`"171"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Octal(pub u32);

impl Serialize for Octal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:o}", self.0))
    }
}

impl<'de> Deserialize<'de> for Octal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        u32::from_str_radix(s.trim(), 8)
            .map(Octal)
            .map_err(|e| serde::de::Error::custom(format!("bad octal polynomial {s:?}: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcParams {
    pub constraint_length: u32,
    /// Feedforward taps, MSB = current register input.
    pub generators: Vec<Octal>,
    /// Feedback taps for recursive codes (MSB must be set).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<Octal>,
}

/// Tap description of a double-binary recursive constituent encoder with
/// memory `v = feedback.len()`.
///
/// The node value is `x = A*input_a[0] ^ B*input_b[0] ^ sum(feedback[i] * s[i])`;
/// register `i > 0` loads `s[i-1] ^ A*input_a[i] ^ B*input_b[i]`; the parities are
/// `x*parity[0] ^ sum(parity[i+1] * s[i])`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuoBinaryTaps {
    pub feedback: Vec<u8>,
    pub input_a: Vec<u8>,
    pub input_b: Vec<u8>,
    pub parity_y: Vec<u8>,
    pub parity_w: Vec<u8>,
}

impl DuoBinaryTaps {
    pub fn memory(&self) -> usize {
        self.feedback.len()
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.feedback.len();
        if !(1..=4).contains(&v) {
            return Err(FecError::invalid("constituent.feedback", "memory must be 1..=4"));
        }
        let checks: [(&str, &Vec<u8>, usize); 4] = [
            ("constituent.input_a", &self.input_a, v),
            ("constituent.input_b", &self.input_b, v),
            ("constituent.parity_y", &self.parity_y, v + 1),
            ("constituent.parity_w", &self.parity_w, v + 1),
        ];
        for (field, taps, len) in checks {
            if taps.len() != len {
                return Err(FecError::invalid(field, format!("expected {len} taps, got {}", taps.len())));
            }
        }
        let all = [&self.feedback, &self.input_a, &self.input_b, &self.parity_y, &self.parity_w];
        if all.iter().any(|t| t.iter().any(|&b| b > 1)) {
            return Err(FecError::invalid("constituent", "taps must be 0 or 1"));
        }
        Ok(())
    }
}

/// Circulation-state lookup: `rows[(N mod period) - 1][final_state] = S_c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CirculationTable {
    pub period: usize,
    pub rows: Vec<Vec<u8>>,
}

impl CirculationTable {
    pub fn validate(&self, states: usize) -> Result<()> {
        if self.period < 2 || self.rows.len() != self.period - 1 {
            return Err(FecError::invalid("circulation.rows", "need period-1 rows"));
        }
        for row in &self.rows {
            let mut seen = vec![false; states];
            if row.len() != states {
                return Err(FecError::invalid("circulation.rows", format!("rows need {states} entries")));
            }
            for &s in row {
                let s = s as usize;
                if s >= states || std::mem::replace(&mut seen[s], true) {
                    return Err(FecError::invalid("circulation.rows", "each row must permute the states"));
                }
            }
        }
        Ok(())
    }

    pub fn lookup(&self, n: usize, final_state: usize) -> Result<usize> {
        let r = n % self.period;
        if r == 0 {
            return Err(FecError::invalid("n", format!("N={n} is a multiple of the circulation period")));
        }
        Ok(self.rows[r - 1][final_state] as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubblockConsts {
    pub m: u32,
    #[serde(rename = "J")]
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtcParams {
    /// Block size in couples.
    pub n: usize,
    #[serde(rename = "P0")]
    pub p0: usize,
    /// Offsets added for `j mod 4 = 0, 1, 2, 3`.
    #[serde(rename = "P_prime")]
    pub p_prime: [usize; 4],
    pub constituent: DuoBinaryTaps,
    pub circulation: CirculationTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subblock: Option<SubblockConsts>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubblockParams {
    pub n: usize,
    pub m: u32,
    #[serde(rename = "J")]
    pub j: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubpacketParams {
    #[serde(rename = "N_SCH")]
    pub n_sch: usize,
    pub m: usize,
    #[serde(rename = "SPID")]
    pub spid: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdParams {
    pub n: usize,
    pub subpackets: Vec<SubpacketParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BtcParams {
    pub code: HammingCodeId,
    pub half_iterations: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub p: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdpcParams {
    pub graph: GraphSource,
    pub mode: CnMode,
    pub schedule: Schedule,
    pub max_iters: usize,
    pub early_stop: EarlyStop,
}

/// A validated, immutable parameter set for one code instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ParamSet {
    Cc(CcParams),
    Ctc(CtcParams),
    Subblock(SubblockParams),
    Sd(SdParams),
    Btc(BtcParams),
    Ldpc(LdpcParams),
}

impl ParamSet {
    pub fn family(&self) -> &'static str {
        match self {
            ParamSet::Cc(_) => "cc",
            ParamSet::Ctc(_) => "ctc",
            ParamSet::Subblock(_) => "subblock",
            ParamSet::Sd(_) => "sd",
            ParamSet::Btc(_) => "btc",
            ParamSet::Ldpc(_) => "ldpc",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ParamSet::Cc(p) => p.validate(),
            ParamSet::Ctc(p) => p.validate(),
            ParamSet::Subblock(p) => validate_subblock(p.n, p.m, p.j),
            ParamSet::Sd(p) => p.validate(),
            ParamSet::Btc(p) => p.validate(),
            ParamSet::Ldpc(p) => p.validate(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ParamSet serializes")
    }

    /// Short stable digest of the canonical serialization.
    pub fn digest(&self) -> String {
        digest_text(&serde_json::to_string(self).expect("ParamSet serializes"))
    }
}

/// First 8 bytes of SHA-256 over `text`, as hex.
pub fn digest_text(text: &str) -> String {
    use sha2::{Digest, Sha256};
    let hash = Sha256::digest(text.as_bytes());
    hash[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses and validates one config document.
pub fn load_params(text: &str) -> Result<ParamSet> {
    let params: ParamSet = serde_json::from_str(text).map_err(map_serde_error)?;
    params.validate()?;
    Ok(params)
}

fn map_serde_error(e: serde_json::Error) -> FecError {
    let msg = e.to_string();
    if let Some(rest) = msg.strip_prefix("missing field `") {
        if let Some(end) = rest.find('`') {
            return FecError::MissingField(rest[..end].to_string());
        }
    }
    FecError::Parse(e)
}

impl CcParams {
    pub fn validate(&self) -> Result<()> {
        let k = self.constraint_length;
        if !(2..=7).contains(&k) {
            return Err(FecError::invalid("constraint_length", "supported range is 2..=7"));
        }
        if self.generators.is_empty() {
            return Err(FecError::MissingField("generators".into()));
        }
        let limit = 1u32 << k;
        for g in &self.generators {
            if g.0 == 0 || g.0 >= limit {
                return Err(FecError::invalid("generators", format!("{:o} does not fit constraint length {k}", g.0)));
            }
        }
        if let Some(f) = self.feedback {
            if f.0 >= limit || f.0 & (limit >> 1) == 0 {
                return Err(FecError::invalid("feedback", "must fit the constraint length and tap the input"));
            }
        }
        Ok(())
    }
}

impl CtcParams {
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if !(4..=2400).contains(&n) || !n.is_multiple_of(2) {
            return Err(FecError::UnsupportedBlockSize(n));
        }
        self.constituent.validate()?;
        self.circulation.validate(1 << self.constituent.memory())?;
        if n.is_multiple_of(self.circulation.period) {
            return Err(FecError::invalid("n", "N must not be a multiple of the circulation period"));
        }
        if gcd(self.p0, n) != 1 {
            return Err(FecError::invalid("P0", format!("gcd(P0={}, N={n}) != 1", self.p0)));
        }
        interleave::ctc_interleave_table(n, self.p0, self.p_prime)?;
        if let Some(sb) = self.subblock {
            validate_subblock(n, sb.m, sb.j)?;
        }
        Ok(())
    }
}

fn validate_subblock(n: usize, m: u32, j: usize) -> Result<()> {
    if n == 0 {
        return Err(FecError::invalid("n", "must be positive"));
    }
    if !(3..=10).contains(&m) {
        return Err(FecError::invalid("m", "must lie in [3, 10]"));
    }
    if j == 0 {
        return Err(FecError::invalid("J", "must be positive"));
    }
    if (1usize << m) * j < n {
        return Err(FecError::invalid("J", format!("2^m * J = {} < N = {n}", (1usize << m) * j)));
    }
    Ok(())
}

impl SdParams {
    pub fn validate(&self) -> Result<()> {
        if self.subpackets.is_empty() {
            return Err(FecError::MissingField("subpackets".into()));
        }
        for sp in &self.subpackets {
            interleave::SdRequest::new(self.n, sp.n_sch, sp.m, sp.spid)?;
        }
        Ok(())
    }
}

impl BtcParams {
    pub fn validate(&self) -> Result<()> {
        if self.half_iterations == 0 {
            return Err(FecError::invalid("half_iterations", "must be at least 1"));
        }
        if self.alpha.len() != self.half_iterations {
            return Err(FecError::invalid("alpha", "one entry per half-iteration"));
        }
        if self.beta.len() != self.half_iterations {
            return Err(FecError::invalid("beta", "one entry per half-iteration"));
        }
        if self.alpha.iter().chain(&self.beta).any(|x| !x.is_finite()) {
            return Err(FecError::invalid("alpha/beta", "weights must be finite"));
        }
        if self.p == 0 || self.p > self.code.extended_length().min(12) {
            return Err(FecError::invalid("p", "must be in 1..=min(n+1, 12)"));
        }
        Ok(())
    }
}

impl LdpcParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(FecError::invalid("max_iters", "must be at least 1"));
        }
        if let CnMode::NormalizedMinSum { factor } = self.mode {
            if !(factor > 0.0 && factor <= 1.0) {
                return Err(FecError::invalid("mode.factor", "must lie in (0, 1]"));
            }
        }
        if self.graph.path().as_os_str().is_empty() {
            return Err(FecError::invalid("graph.path", "must not be empty"));
        }
        Ok(())
    }
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtcInterleaverEntry {
    pub n: usize,
    pub p0: usize,
    pub p1: usize,
    pub p2: usize,
    pub p3: usize,
}

impl CtcInterleaverEntry {
    /// The per-`(j mod 4)` offsets `(1, 1+N/2+P1, 1+P2, 1+N/2+P3)`.
    pub fn p_prime(&self) -> [usize; 4] {
        let h = self.n / 2;
        [1, 1 + h + self.p1, 1 + self.p2, 1 + h + self.p3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubblockEntry {
    pub n: usize,
    pub m: u32,
    pub j: usize,
}

/// Standard-defined constants, shipped as `configs/wimax_tables.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardTables {
    pub constituent: DuoBinaryTaps,
    pub circulation: CirculationTable,
    pub ctc_interleaver: Vec<CtcInterleaverEntry>,
    pub subblock: Vec<SubblockEntry>,
}

static BUILTIN: OnceLock<StandardTables> = OnceLock::new();

impl StandardTables {
    pub fn from_json(text: &str) -> Result<Self> {
        let t: StandardTables = serde_json::from_str(text)?;
        t.constituent.validate()?;
        t.circulation.validate(1 << t.constituent.memory())?;
        Ok(t)
    }

    /// The tables compiled in from `configs/wimax_tables.json`.
    pub fn builtin() -> &'static StandardTables {
        BUILTIN.get_or_init(|| {
            StandardTables::from_json(include_str!("../../../configs/wimax_tables.json"))
                .expect("shipped tables are valid")
        })
    }

    /// Supported CTC block sizes, ascending.
    pub fn supported_n(&self) -> Vec<usize> {
        self.ctc_interleaver.iter().map(|e| e.n).collect()
    }

    pub fn supports(&self, n: usize) -> bool {
        self.ctc_interleaver.iter().any(|e| e.n == n)
    }

    pub fn interleaver_entry(&self, n: usize) -> Result<&CtcInterleaverEntry> {
        self.ctc_interleaver.iter().find(|e| e.n == n).ok_or(FecError::UnsupportedBlockSize(n))
    }

    pub fn subblock_entry(&self, n: usize) -> Result<&SubblockEntry> {
        self.subblock.iter().find(|e| e.n == n).ok_or(FecError::UnsupportedBlockSize(n))
    }

    /// A full, validated CTC parameter set for one supported `n`.
    pub fn ctc_params(&self, n: usize) -> Result<CtcParams> {
        let e = self.interleaver_entry(n)?;
        let sb = self.subblock_entry(n).ok();
        let params = CtcParams {
            n,
            p0: e.p0,
            p_prime: e.p_prime(),
            constituent: self.constituent.clone(),
            circulation: self.circulation.clone(),
            subblock: sb.map(|s| SubblockConsts { m: s.m, j: s.j }),
        };
        params.validate()?;
        Ok(params)
    }
}
