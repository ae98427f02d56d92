//! `fec`: encode, decode, address generation, throughput models and BER sweeps.

mod arch;
mod ber;
mod codec;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fec_core::btc::HammingCodeId;

#[derive(Parser)]
#[command(name = "fec", version, about = "Channel coding toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode one block of information bits.
    Encode {
        #[command(subcommand)]
        code: codec::EncodeCmd,
    },
    /// Decode one block of channel LLRs (positive favours 0).
    Decode {
        #[command(subcommand)]
        code: codec::DecodeCmd,
    },
    /// Print interleaver address lists and collision reports.
    Addrgen {
        #[command(subcommand)]
        kind: codec::AddrgenCmd,
    },
    /// Symbol deselection and HARQ combining.
    Sd(codec::SdArgs),
    /// Throughput and clock-rate models.
    Archmodel(arch::ArchArgs),
    /// Monte-Carlo BER/FER sweep over Eb/N0.
    Ber(ber::BerArgs),
}

/// Shared input/output file flags.
#[derive(Args, Debug, Clone)]
pub struct Files {
    /// Input file, one value per line (`#` starts a comment).
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeArg {
    #[value(name = "H15_11")]
    H15_11,
    #[value(name = "H31_26")]
    H31_26,
    #[value(name = "H63_57")]
    H63_57,
}

impl From<CodeArg> for HammingCodeId {
    fn from(c: CodeArg) -> Self {
        match c {
            CodeArg::H15_11 => HammingCodeId::H15_11,
            CodeArg::H31_26 => HammingCodeId::H31_26,
            CodeArg::H63_57 => HammingCodeId::H63_57,
        }
    }
}

fn init_threads() -> io::CliResult<()> {
    if let Some(n) = fec_core::sim::configured_threads() {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> io::CliResult<()> {
    init_threads()?;
    match cli.command {
        Command::Encode { code } => codec::encode(code),
        Command::Decode { code } => codec::decode(code),
        Command::Addrgen { kind } => codec::addrgen(kind),
        Command::Sd(args) => codec::sd(args),
        Command::Archmodel(args) => arch::run(args),
        Command::Ber(args) => ber::run(args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fec: {e}");
            ExitCode::FAILURE
        }
    }
}
