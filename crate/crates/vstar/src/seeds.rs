//! Seed-file format: UTF-8, one seed per line, with `\n`, `\t`, `\\` and
//! `\xHH` escapes so seeds may contain newlines and raw bytes.

use std::path::Path;

use crate::error::{Error, Result};

pub fn decode_line(line: &str) -> Result<String> {
    let mut out = String::with_capacity(line.len());
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('\\') => out.push('\\'),
            Some('x') => {
                let hi = chars.next();
                let lo = chars.next();
                let (Some(hi), Some(lo)) = (hi, lo) else {
                    return Err(Error::Config(format!("truncated \\x escape in {line:?}")));
                };
                let byte = u8::from_str_radix(&format!("{hi}{lo}"), 16)
                    .map_err(|_| Error::Config(format!("bad \\x escape in {line:?}")))?;
                out.push(byte as char);
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown escape \\{} in {line:?}",
                    other.map(String::from).unwrap_or_default()
                )))
            }
        }
    }
    Ok(out)
}

pub fn encode_line(seed: &str) -> String {
    let mut out = String::with_capacity(seed.len());
    for c in seed.chars() {
        match c {
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\x{:02x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Reads a seed file; blank lines are skipped.
pub fn read_seed_file(path: &Path) -> Result<Vec<String>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut seeds = Vec::new();
    for line in text.lines() {
        if line.is_empty() {
            continue;
        }
        seeds.push(decode_line(line)?);
    }
    Ok(seeds)
}

pub fn write_seed_file(path: &Path, seeds: &[String]) -> Result<()> {
    let mut text = String::new();
    for s in seeds {
        text.push_str(&encode_line(s));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}
