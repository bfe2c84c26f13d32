//! Deterministic CSV/JSON emission with provenance metadata.
//!
//! Every table starts with `#`-prefixed metadata lines (tool version, the
//! exact invocation, a digest of the configuration actually used, units),
//! then a single header row. Floats are printed as `{:.12e}` so repeated
//! runs of the same invocation are byte-identical and diffable.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

/// Units line for the abstract models (rates set the clock).
pub const RATE_UNITS: &str =
    "dimensionless; times are in units of the inverse base rate, frequencies in the base rate";
/// Units line for the spin-chain and cavity tables.
pub const ZETA_UNITS: &str =
    "frequencies in units of zeta (nearest-neighbour dipolar coupling); lengths in 1/zeta";

/// Scientific-notation float field, 13 significant digits.
pub fn fsci(x: f64) -> String {
    format!("{x:.12e}")
}

/// A CSV (or JSON) sink: a file when `--out` was given, stdout otherwise.
pub struct Sink {
    w: Box<dyn Write>,
}

impl Sink {
    pub fn create(out: &Option<PathBuf>) -> Result<Self> {
        let w: Box<dyn Write> = match out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path)
                    .with_context(|| format!("cannot create output file {}", path.display()))?,
            )),
            None => Box::new(std::io::stdout()),
        };
        Ok(Sink { w })
    }

    /// `# key = value` metadata line.
    pub fn meta(&mut self, key: &str, value: impl Display) -> Result<()> {
        writeln!(self.w, "# {key} = {value}")?;
        Ok(())
    }

    /// Free-form `# ...` comment line.
    pub fn note(&mut self, text: &str) -> Result<()> {
        writeln!(self.w, "# {text}")?;
        Ok(())
    }

    pub fn header(&mut self, columns: &[&str]) -> Result<()> {
        writeln!(self.w, "{}", columns.join(","))?;
        Ok(())
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        writeln!(self.w, "{}", fields.join(","))?;
        Ok(())
    }

    pub fn raw(&mut self, text: &str) -> Result<()> {
        self.w.write_all(text.as_bytes())?;
        Ok(())
    }

    /// Flush buffered output; call once a table is complete so write errors
    /// surface instead of being swallowed on drop.
    pub fn finish(mut self) -> Result<()> {
        self.w.flush().context("flushing output")?;
        Ok(())
    }

    /// Standard provenance block: tool, invocation, config identity, units.
    pub fn provenance(&mut self, config: Option<(&str, &str)>, units: &str) -> Result<()> {
        self.meta("tool", format_args!("aqec {}", env!("CARGO_PKG_VERSION")))?;
        let invocation: Vec<String> = std::env::args().skip(1).collect();
        self.meta("invocation", invocation.join(" "))?;
        if let Some((origin, text)) = config {
            self.meta("config", origin)?;
            self.meta("config_sha256", format_args!("{:x}", Sha256::digest(text.as_bytes())))?;
        }
        self.meta("units", units)
    }
}
