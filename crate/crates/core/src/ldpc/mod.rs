//! LDPC decoding on explicit Tanner graphs: sum-product through Ψ, plain and
//! normalized min-sum check updates, flooding and layered schedules.

mod encode;
mod graph;

pub use encode::LdpcEncoder;
pub use graph::{parse_alist, parse_qc, to_alist, TannerGraph};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FecError, Result};
use crate::types::{check_finite, Bit};

/// Lower input clamp for Ψ.
pub const PSI_FLOOR: f64 = 1e-9;

/// `Ψ(x) = -ln(tanh(x/2))`, its own inverse on positive reals.
pub fn psi(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(FecError::invalid("x", "Ψ is defined for positive inputs only"));
    }
    Ok(psi_clamped(x))
}

fn psi_clamped(x: f64) -> f64 {
    let x = x.max(PSI_FLOOR);
    (2.0 / x.exp_m1()).ln_1p()
}

/// Largest value Ψ can return.
pub fn psi_cap() -> f64 {
    psi_clamped(PSI_FLOOR)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "lowercase")]
pub enum GraphSource {
    Alist { path: PathBuf },
    Qc { path: PathBuf },
}

impl GraphSource {
    pub fn path(&self) -> &Path {
        match self {
            GraphSource::Alist { path } | GraphSource::Qc { path } => path,
        }
    }

    /// Loads the graph, resolving a relative path against `base`.
    pub fn load(&self, base: Option<&Path>) -> Result<TannerGraph> {
        let path = match base {
            Some(b) if self.path().is_relative() => b.join(self.path()),
            _ => self.path().to_path_buf(),
        };
        let text = std::fs::read_to_string(&path)?;
        match self {
            GraphSource::Alist { .. } => parse_alist(&text),
            GraphSource::Qc { .. } => parse_qc(&text),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CnMode {
    Spa,
    MinSum,
    NormalizedMinSum { factor: f64 },
}

impl CnMode {
    pub const DEFAULT_NMS_FACTOR: f64 = 0.75;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    Flooding,
    Layered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EarlyStop {
    None,
    Syndrome,
    Stability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Syndrome,
    Stable,
    MaxIterations,
}

/// Messages and decisions of one decoding run.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState {
    pub lambda: Vec<f64>,
    /// VN-to-CN messages per edge.
    pub q: Vec<f64>,
    /// CN-to-VN messages per edge.
    pub r: Vec<f64>,
    pub iteration: usize,
    pub decisions: Vec<Bit>,
    pub termination: Option<Termination>,
}

impl DecoderState {
    pub fn new(g: &TannerGraph, lambda: &[f64]) -> Result<Self> {
        if lambda.len() != g.vars() {
            return Err(FecError::LengthMismatch { what: "LDPC channel LLRs", expected: g.vars(), got: lambda.len() });
        }
        check_finite(lambda)?;
        Ok(DecoderState {
            lambda: lambda.to_vec(),
            q: vec![0.0; g.edge_count()],
            r: vec![0.0; g.edge_count()],
            iteration: 0,
            decisions: lambda.iter().map(|&l| u8::from(l < 0.0)).collect(),
            termination: None,
        })
    }

    /// `Λ_j`: channel value plus every incoming check message.
    pub fn posterior(&self, g: &TannerGraph, j: usize) -> f64 {
        self.lambda[j] + g.vn_edges(j).iter().map(|&e| self.r[e]).sum::<f64>()
    }
}

/// `Q_ji = λ_j + Σ R_αj` over every check `α` of VN `j` except `i`.
pub fn vn_update(state: &mut DecoderState, g: &TannerGraph, j: usize) {
    let edges = g.vn_edges(j);
    for &e in edges {
        let others: f64 = edges.iter().filter(|&&x| x != e).map(|&x| state.r[x]).sum();
        state.q[e] = state.lambda[j] + others;
    }
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// New check-to-variable messages of CN `i` from its current `Q` inputs.
pub fn cn_update(state: &mut DecoderState, g: &TannerGraph, i: usize, mode: CnMode) {
    let edges = g.cn_edges(i);
    let out = cn_messages(&edges.iter().map(|&e| state.q[e]).collect::<Vec<_>>(), mode);
    for (&e, r) in edges.iter().zip(out) {
        state.r[e] = r;
    }
}

/// Exclusion-set rule: sign is the product of the other signs, magnitude is
/// `Ψ(Σ Ψ|Q|)` or the minimum other magnitude (times `factor` when normalized).
pub fn cn_messages(q: &[f64], mode: CnMode) -> Vec<f64> {
    (0..q.len())
        .map(|t| {
            let others = q.iter().enumerate().filter(|&(u, _)| u != t).map(|(_, &x)| x);
            let s: f64 = others.clone().map(sign).product();
            let mag = match mode {
                CnMode::Spa => {
                    let total: f64 = others.map(|x| psi_clamped(x.abs())).sum();
                    if total == 0.0 {
                        psi_cap()
                    } else {
                        psi_clamped(total)
                    }
                }
                CnMode::MinSum | CnMode::NormalizedMinSum { .. } => {
                    let m = others.map(f64::abs).fold(f64::INFINITY, f64::min);
                    let m = if m.is_finite() { m } else { psi_cap() };
                    match mode {
                        CnMode::NormalizedMinSum { factor } => factor * m,
                        _ => m,
                    }
                }
            };
            s * mag
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdpcConfig {
    pub mode: CnMode,
    pub schedule: Schedule,
    pub max_iters: usize,
    pub early_stop: EarlyStop,
}

impl Default for LdpcConfig {
    fn default() -> Self {
        LdpcConfig {
            mode: CnMode::NormalizedMinSum { factor: CnMode::DEFAULT_NMS_FACTOR },
            schedule: Schedule::Layered,
            max_iters: 40,
            early_stop: EarlyStop::Syndrome,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdpcOutput {
    pub bits: Vec<Bit>,
    pub iterations: usize,
    pub termination: Termination,
    /// `Λ_j` after the last iteration.
    pub posterior: Vec<f64>,
}

/// Runs one full iteration of the configured schedule.
pub fn iterate(state: &mut DecoderState, g: &TannerGraph, cfg: &LdpcConfig) {
    match cfg.schedule {
        Schedule::Flooding => {
            for j in 0..g.vars() {
                vn_update(state, g, j);
            }
            for i in 0..g.checks() {
                cn_update(state, g, i, cfg.mode);
            }
        }
        Schedule::Layered => {
            // Λ is kept implicit: Q_ji = Λ_j - R_ij, refreshed after each layer.
            let mut post: Vec<f64> = (0..g.vars()).map(|j| state.posterior(g, j)).collect();
            for layer in g.layers() {
                for &i in layer {
                    for &e in g.cn_edges(i) {
                        state.q[e] = post[g.edge(e).0] - state.r[e];
                    }
                    cn_update(state, g, i, cfg.mode);
                    for &e in g.cn_edges(i) {
                        post[g.edge(e).0] = state.q[e] + state.r[e];
                    }
                }
            }
        }
    }
    state.iteration += 1;
}

pub fn ldpc_decode(g: &TannerGraph, llrs: &[f64], cfg: &LdpcConfig) -> Result<LdpcOutput> {
    if cfg.max_iters == 0 {
        return Err(FecError::invalid("max_iters", "must be at least 1"));
    }
    let mut state = DecoderState::new(g, llrs)?;
    let mut posterior = Vec::new();
    while state.iteration < cfg.max_iters {
        iterate(&mut state, g, cfg);
        posterior = (0..g.vars()).map(|j| state.posterior(g, j)).collect();
        let decisions: Vec<Bit> = posterior.iter().map(|&l| u8::from(l < 0.0)).collect();
        let stable = decisions == state.decisions;
        state.decisions = decisions;
        match cfg.early_stop {
            EarlyStop::Syndrome if g.syndrome_ok(&state.decisions) => {
                state.termination = Some(Termination::Syndrome);
                break;
            }
            EarlyStop::Stability if stable && state.iteration > 1 => {
                state.termination = Some(Termination::Stable);
                break;
            }
            _ => {}
        }
    }
    Ok(LdpcOutput {
        bits: state.decisions,
        iterations: state.iteration,
        termination: state.termination.unwrap_or(Termination::MaxIterations),
        posterior,
    })
}
