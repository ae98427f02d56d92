use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use fec_core::conv::{TrellisSpec, ViterbiConfig};
use fec_core::ctc::{CtcCode, TurboConfig};
use fec_core::ldpc::{to_alist, LdpcEncoder};
use fec_core::params::{digest_text, ParamSet};
use fec_core::sim::{parse_ebno_range, run_ber, SimCode, SimConfig, CSV_HEADER};
use serde_json::{json, Value};

use crate::codec::{
    btc_config, chain_for, ldpc_config, load_btc, load_cc, load_ctc, load_graph, parse_radix, GraphArgs,
};
use crate::io::{output, CliResult};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Cc,
    Ctc,
    Btc,
    Ldpc,
    Uncoded,
}

#[derive(Args)]
pub struct BerArgs {
    #[arg(long, value_enum)]
    code: Family,
    /// Parameter set for the chosen family (not used by `uncoded`).
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
    /// `a:b:step` in dB, inclusive, or a single value.
    #[arg(long, value_name = "RANGE")]
    ebno: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Fixed number of blocks per point instead of the stopping rule.
    #[arg(long)]
    blocks: Option<u64>,
    #[arg(long, default_value_t = SimConfig::default().max_bits)]
    max_bits: u64,
    #[arg(long, default_value_t = SimConfig::default().max_frame_errors)]
    max_frame_errors: u64,
    /// Information bits per block for `cc` and `uncoded`.
    #[arg(long, default_value_t = 1000)]
    info_len: usize,
    /// Viterbi traceback window.
    #[arg(long)]
    window: Option<usize>,
    /// Viterbi radix (2 or 4).
    #[arg(long, default_value_t = 2, value_parser = parse_radix)]
    radix: u8,
    /// Turbo iterations.
    #[arg(long, default_value_t = 8)]
    iters: usize,
    /// Turbo SISO count; chosen from N when omitted.
    #[arg(long)]
    parallel: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    ext_scale: f64,
    /// Route CTC blocks through subblock interleaving and symbol selection of subpacket `N_SCH,m,SPID`.
    #[arg(long, value_name = "N_SCH,m,SPID")]
    chain: Option<String>,
}

fn params_path(args: &BerArgs) -> CliResult<&PathBuf> {
    args.params.as_ref().ok_or_else(|| format!("--code {:?} needs --params", args.code).into())
}

/// The code plus a canonical description of everything that shapes the results.
fn build(args: &BerArgs) -> CliResult<(SimCode, Value)> {
    Ok(match args.code {
        Family::Uncoded => (SimCode::Uncoded { n: args.info_len }, json!({ "n": args.info_len })),
        Family::Cc => {
            let p = load_cc(params_path(args)?)?;
            let viterbi = ViterbiConfig {
                window: args.window.unwrap_or(ViterbiConfig::default().window),
                radix: args.radix,
                mode: None,
            };
            let code = SimCode::Cc { spec: TrellisSpec::from_params(&p)?, info_len: args.info_len, viterbi };
            (code, json!({ "params": ParamSet::Cc(p), "info_len": args.info_len, "viterbi": viterbi }))
        }
        Family::Ctc => {
            let p = load_ctc(params_path(args)?)?;
            let chain = args.chain.as_deref().map(|c| chain_for(&p, c)).transpose()?;
            let turbo = TurboConfig {
                iterations: args.iters,
                parallelism: args.parallel,
                window: args.window,
                ext_scale: args.ext_scale,
            };
            let desc = json!({
                "params": ParamSet::Ctc(p.clone()),
                "iterations": turbo.iterations,
                "parallelism": turbo.parallelism,
                "window": turbo.window,
                "ext_scale": turbo.ext_scale,
                "chain": args.chain,
            });
            (SimCode::Ctc { code: CtcCode::from_params(&p)?, turbo, chain }, desc)
        }
        Family::Btc => {
            let p = load_btc(params_path(args)?)?;
            let code = SimCode::Btc { code: p.code, cfg: btc_config(&p) };
            (code, json!({ "params": ParamSet::Btc(p) }))
        }
        Family::Ldpc => {
            let (graph, params) = load_graph(&GraphArgs { graph: None, params: Some(params_path(args)?.clone()) })?;
            let p = params.expect("loaded from a parameter set");
            let desc = json!({ "params": ParamSet::Ldpc(p.clone()), "graph": digest_text(&to_alist(&graph)) });
            let encoder = LdpcEncoder::new(&graph);
            (SimCode::Ldpc { graph, encoder, cfg: ldpc_config(&p) }, desc)
        }
    })
}

pub fn run(args: BerArgs) -> CliResult<()> {
    let (code, desc) = build(&args)?;
    let hash = digest_text(&serde_json::to_string(&json!({ "code": code.name(), "config": desc }))?);
    let cfg = SimConfig {
        ebno_db: parse_ebno_range(&args.ebno)?,
        seed: args.seed,
        blocks: args.blocks,
        max_bits: args.max_bits,
        max_frame_errors: args.max_frame_errors,
        ..SimConfig::default()
    };
    let mut w = output(args.out.as_deref())?;
    writeln!(w, "{CSV_HEADER}")?;
    w.flush()?;
    let mut write_err = None;
    run_ber(&code, &cfg, |p| {
        let r = writeln!(w, "{}", p.csv_row(code.name(), &hash)).and_then(|_| w.flush());
        if let Err(e) = r {
            write_err.get_or_insert(e);
        }
    })?;
    match write_err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}
