use std::io::Write;

use clap::{Args, Subcommand};
use fec_core::archmodel::{
    btc_required_clock, btc_throughput, ceil_mhz, ctc_throughput, ldpc_processing_power, round_sig, sd_required_clock,
    sd_throughput, subblock_required_clock, subblock_throughput, sweep_fig11, viterbi_throughput, BtcQuery, CtcQuery,
    Fig11Config, LdpcQuery, ViterbiQuery,
};
use fec_core::btc::HammingCodeId;
use serde_json::{json, Value};

use crate::io::{output, CliResult};
use crate::CodeArg;

#[derive(Args)]
pub struct ArchArgs {
    #[command(subcommand)]
    model: Model,
    /// JSON output (default).
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// CSV output: a header row, then one row per result.
    #[arg(long, global = true)]
    csv: bool,
}

/// Frequencies are in Hz and throughputs in bits (or LLRs) per second.
#[derive(Subcommand)]
enum Model {
    /// Columns: k,n_t,m,w,f_clk_hz,throughput_bps,asymptotic_bps
    Viterbi {
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 1000.0)]
        n_t: f64,
        /// Trellis steps per cycle (2 for radix-4).
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long, default_value_t = 32.0)]
        w: f64,
        #[arg(long, default_value_t = 100e6)]
        f_clk: f64,
    },
    /// Columns: code,n,k,h,f_clk_hz,throughput_bps,target_bps,required_clock_hz,required_clock_mhz
    Btc {
        /// Every code when omitted.
        #[arg(long, value_enum)]
        code: Option<CodeArg>,
        /// Half-iterations per block.
        #[arg(long, default_value_t = 4.5)]
        h: f64,
        #[arg(long, default_value_t = 100e6)]
        f_clk: f64,
        #[arg(long, default_value_t = 75e6)]
        target: f64,
    },
    /// Columns: k,n_t,iterations,sp,w,p,id_oh,f_clk_hz,throughput_bps,asymptotic_bps,target_bps,required_clock_hz,asymptotic_clock_hz
    Ctc {
        #[arg(long, default_value_t = 2.0)]
        k: f64,
        #[arg(long, default_value_t = 480.0)]
        n_t: f64,
        #[arg(long, default_value_t = 8.0)]
        iters: f64,
        #[arg(long, default_value_t = 1.0)]
        sp: f64,
        #[arg(long, default_value_t = 32.0)]
        w: f64,
        #[arg(long, default_value_t = 4)]
        p: usize,
        #[arg(long, default_value_t = 0.0)]
        id_oh: f64,
        #[arg(long, default_value_t = 200e6)]
        f_clk: f64,
        #[arg(long, default_value_t = 75e6)]
        target: f64,
    },
    /// Columns: edges,d_bps,i_max,k,f_clk_hz,p_c,messages
    Ldpc {
        #[arg(long, default_value_t = 7000.0)]
        edges: f64,
        /// Target throughput.
        #[arg(long, default_value_t = 75e6)]
        d: f64,
        #[arg(long, default_value_t = 10.0)]
        i_max: f64,
        #[arg(long, default_value_t = 1152.0)]
        k: f64,
        #[arg(long, default_value_t = 200e6)]
        f_clk: f64,
    },
    /// Columns: p,f_clk_hz,throughput_llr_s,target_llr_s,required_clock_hz,required_clock_mhz
    Sd {
        /// LLRs written per cycle.
        #[arg(long, default_value_t = 4.0)]
        p: f64,
        #[arg(long, default_value_t = 100e6)]
        f_clk: f64,
        #[arg(long, default_value_t = 225e6)]
        target: f64,
    },
    /// Columns: f_clk_hz,throughput_llr_s,target_llr_s,required_clock_hz
    Subblock {
        #[arg(long, default_value_t = 50e6)]
        f_clk: f64,
        #[arg(long, default_value_t = 225e6)]
        target: f64,
    },
    /// Columns: curve,n,p,throughput_bps,meets_target
    Fig11 {
        #[arg(long, default_value_t = 200e6)]
        f_clk: f64,
        #[arg(long, default_value_t = 32.0)]
        w: f64,
        #[arg(long, default_value_t = 8.0)]
        iters: f64,
        #[arg(long, default_value_t = 1.0)]
        sp: f64,
        #[arg(long, default_value_t = 75e6)]
        target: f64,
    },
}

type Row = Vec<(&'static str, Value)>;

/// Clock values keep four significant digits.
fn hz(f: f64) -> Value {
    json!(round_sig(f, 4))
}

fn rows(model: Model) -> CliResult<Vec<Row>> {
    Ok(match model {
        Model::Viterbi { k, n_t, m, w, f_clk } => {
            let t = viterbi_throughput(&ViterbiQuery { k, n_t, m, w, f_clk })?;
            vec![vec![
                ("k", json!(k)),
                ("n_t", json!(n_t)),
                ("m", json!(m)),
                ("w", json!(w)),
                ("f_clk_hz", json!(f_clk)),
                ("throughput_bps", json!(t.exact)),
                ("asymptotic_bps", json!(t.asymptotic)),
            ]]
        }
        Model::Btc { code, h, f_clk, target } => {
            let codes = match code {
                Some(c) => vec![HammingCodeId::from(c)],
                None => HammingCodeId::ALL.to_vec(),
            };
            codes
                .into_iter()
                .map(|id| -> CliResult<Row> {
                    let q = BtcQuery::square(id, h, f_clk);
                    let f = btc_required_clock(&q, target)?;
                    Ok(vec![
                        ("code", json!(format!("{id:?}"))),
                        ("n", json!(id.n())),
                        ("k", json!(id.k())),
                        ("h", json!(h)),
                        ("f_clk_hz", json!(f_clk)),
                        ("throughput_bps", json!(btc_throughput(&q)?)),
                        ("target_bps", json!(target)),
                        ("required_clock_hz", hz(f)),
                        ("required_clock_mhz", json!(ceil_mhz(f))),
                    ])
                })
                .collect::<CliResult<_>>()?
        }
        Model::Ctc { k, n_t, iters, sp, w, p, id_oh, f_clk, target } => {
            let q = CtcQuery { k, n_t, iterations: iters, sp, w, p, id_oh, f_clk };
            let t = ctc_throughput(&q)?;
            let unit = ctc_throughput(&CtcQuery { f_clk: 1.0, ..q })?;
            vec![vec![
                ("k", json!(k)),
                ("n_t", json!(n_t)),
                ("iterations", json!(iters)),
                ("sp", json!(sp)),
                ("w", json!(w)),
                ("p", json!(p)),
                ("id_oh", json!(id_oh)),
                ("f_clk_hz", json!(f_clk)),
                ("throughput_bps", json!(t.exact)),
                ("asymptotic_bps", json!(t.asymptotic)),
                ("target_bps", json!(target)),
                ("required_clock_hz", hz(target / unit.exact)),
                ("asymptotic_clock_hz", hz(target / unit.asymptotic)),
            ]]
        }
        Model::Ldpc { edges, d, i_max, k, f_clk } => {
            let pc = ldpc_processing_power(&LdpcQuery { edges, d, i_max, k, f_clk })?;
            vec![vec![
                ("edges", json!(edges)),
                ("d_bps", json!(d)),
                ("i_max", json!(i_max)),
                ("k", json!(k)),
                ("f_clk_hz", json!(f_clk)),
                ("p_c", json!(pc.p_c)),
                ("messages", json!(pc.messages)),
            ]]
        }
        Model::Sd { p, f_clk, target } => {
            let f = sd_required_clock(p, target)?;
            vec![vec![
                ("p", json!(p)),
                ("f_clk_hz", json!(f_clk)),
                ("throughput_llr_s", json!(sd_throughput(p, f_clk)?)),
                ("target_llr_s", json!(target)),
                ("required_clock_hz", hz(f)),
                ("required_clock_mhz", json!(ceil_mhz(f))),
            ]]
        }
        Model::Subblock { f_clk, target } => vec![vec![
            ("f_clk_hz", json!(f_clk)),
            ("throughput_llr_s", json!(subblock_throughput(f_clk)?)),
            ("target_llr_s", json!(target)),
            ("required_clock_hz", hz(subblock_required_clock(target)?)),
        ]],
        Model::Fig11 { .. } => unreachable!("handled by the sweep path"),
    })
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn run(args: ArchArgs) -> CliResult<()> {
    let mut w = output(None)?;
    if let Model::Fig11 { f_clk, w: win, iters, sp, target } = args.model {
        let cfg = Fig11Config { f_clk, w: win, iterations: iters, sp, target, ..Fig11Config::default() };
        let sweep = sweep_fig11(&cfg)?;
        if args.csv {
            write!(w, "{}", sweep.to_csv())?;
        } else {
            writeln!(w, "{}", serde_json::to_string_pretty(&sweep)?)?;
        }
        return Ok(w.flush()?);
    }
    let rows = rows(args.model)?;
    if args.csv {
        let header: Vec<&str> = rows[0].iter().map(|(k, _)| *k).collect();
        writeln!(w, "{}", header.join(","))?;
        for r in &rows {
            let cells: Vec<String> = r.iter().map(|(_, v)| csv_cell(v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
    } else {
        let objects: Vec<Value> =
            rows.into_iter().map(|r| Value::Object(r.into_iter().map(|(k, v)| (k.to_string(), v)).collect())).collect();
        writeln!(w, "{}", serde_json::to_string_pretty(&objects)?)?;
    }
    Ok(w.flush()?)
}
