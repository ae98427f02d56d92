use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use fec_core::params::{load_params, ParamSet};
use fec_core::types::{check_finite, Bit};

pub type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

/// Whitespace-separated tokens, skipping `#` comments.
fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(|l| l.split('#').next().unwrap_or("")).flat_map(str::split_whitespace)
}

pub fn read_llrs(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let values = tokens(&text)
        .map(|t| t.parse::<f64>().map_err(|e| format!("{}: bad LLR {t:?}: {e}", path.display())))
        .collect::<Result<Vec<_>, _>>()?;
    check_finite(&values)?;
    Ok(values)
}

/// Bits as `0`/`1` tokens, or runs of them such as `0110`.
pub fn read_bits(path: &Path) -> CliResult<Vec<Bit>> {
    let text = std::fs::read_to_string(path)?;
    let mut bits = Vec::new();
    for t in tokens(&text) {
        for c in t.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                _ => return Err(format!("{}: bad bit {c:?}", path.display()).into()),
            }
        }
    }
    Ok(bits)
}

pub fn load_param_file(path: &Path) -> CliResult<ParamSet> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(load_params(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

/// Writes to `path`, or stdout when absent.
pub fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

pub fn write_lines<T: std::fmt::Display>(out: &mut dyn Write, items: &[T]) -> CliResult<()> {
    for x in items {
        writeln!(out, "{x}")?;
    }
    Ok(())
}
