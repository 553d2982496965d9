//! Published energy tables used as regression targets.
//!
//! The cells live in `fixtures/tables.tsv` and are checked against a pinned
//! SHA-256 digest before they are parsed, so an edited fixture fails loudly
//! instead of silently moving a target.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pair::ParticlePair;
use crate::potentials::PotentialModel;

pub const TABLES_TSV: &str = include_str!("../fixtures/tables.tsv");

pub const TABLES_SHA256: &str = "0773ec00473ec7c1cb2d03d36fa8f566b191f9fa179f8b55b72e9f185ddce23c";

/// Which method produced a published cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellSource {
    /// Shifted-l expansion results (the values this crate reproduces).
    Slet,
    /// Exact Coulomb energies.
    Exact,
    /// Square-root Hamiltonian, for context only.
    SquareRoot,
    /// Integral method, for context only.
    Integral,
    /// Miller's method, for context only.
    Miller,
}

impl CellSource {
    /// Comparison columns solve a different equation and are never targets.
    pub fn is_comparison(self) -> bool {
        matches!(self, Self::SquareRoot | Self::Integral | Self::Miller)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Slet => "slet",
            Self::Exact => "exact",
            Self::SquareRoot => "square_root",
            Self::Integral => "integral",
            Self::Miller => "miller",
        }
    }
}

impl fmt::Display for CellSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CellSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "slet" => Self::Slet,
            "exact" => Self::Exact,
            "square_root" => Self::SquareRoot,
            "integral" => Self::Integral,
            "miller" => Self::Miller,
            other => return Err(Error::InvalidInput(format!("unknown cell source '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureCell {
    pub table: u8,
    pub source: CellSource,
    pub n: u32,
    pub l: u32,
    /// GeV.
    pub value: f64,
    /// Decimal places as printed.
    pub decimals: u32,
}

/// Physical setup behind one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableConfig {
    pub table: u8,
    pub potential: PotentialModel,
    pub m: f64,
    /// Acceptance tolerance on the shifted-l cells (GeV).
    pub tolerance: f64,
    pub n_max: u32,
    pub l_max: u32,
}

impl TableConfig {
    pub fn pair(&self) -> ParticlePair {
        ParticlePair::equal(self.m).expect("table masses are positive")
    }
}

pub fn table_config(table: u8) -> Result<TableConfig> {
    match table {
        1 => Ok(TableConfig {
            table,
            potential: PotentialModel::coulomb(0.25),
            m: 1.45,
            tolerance: 1e-5,
            n_max: 5,
            l_max: 0,
        }),
        2 => Ok(TableConfig {
            table,
            potential: PotentialModel::oscillator(1.0),
            m: 1.31,
            tolerance: 5e-4,
            n_max: 4,
            l_max: 2,
        }),
        3 => Ok(TableConfig {
            table,
            potential: PotentialModel::cornell(0.25, 0.18),
            m: 1.45,
            tolerance: 5e-4,
            n_max: 4,
            l_max: 2,
        }),
        other => Err(Error::InvalidInput(format!(
            "table must be 1, 2 or 3, got {other}"
        ))),
    }
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn verify_checksum() -> Result<()> {
    let actual = sha256_hex(TABLES_TSV);
    if actual != TABLES_SHA256 {
        return Err(Error::InternalInconsistency(format!(
            "fixture checksum mismatch: expected {TABLES_SHA256}, got {actual}"
        )));
    }
    Ok(())
}

/// Parses tab-separated `table source n l value` lines; `#` starts a comment.
pub fn parse_cells(text: &str) -> Result<Vec<FixtureCell>> {
    let bad = |line: usize, what: &str| Error::InvalidInput(format!("fixture line {line}: {what}"));
    let mut cells = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [table, source, n, l, value] = fields[..] else {
            return Err(bad(i + 1, "expected five tab-separated fields"));
        };
        let decimals = value.split_once('.').map_or(0, |(_, d)| d.len() as u32);
        cells.push(FixtureCell {
            table: table.parse().map_err(|_| bad(i + 1, "table"))?,
            source: source.parse()?,
            n: n.parse().map_err(|_| bad(i + 1, "n"))?,
            l: l.parse().map_err(|_| bad(i + 1, "l"))?,
            value: value.parse().map_err(|_| bad(i + 1, "value"))?,
            decimals,
        });
    }
    Ok(cells)
}

/// All published cells, after the checksum check.
pub fn cells() -> Result<Vec<FixtureCell>> {
    verify_checksum()?;
    parse_cells(TABLES_TSV)
}

pub fn table_cells(table: u8, source: CellSource) -> Result<Vec<FixtureCell>> {
    table_config(table)?;
    Ok(cells()?
        .into_iter()
        .filter(|c| c.table == table && c.source == source)
        .collect())
}

/// Published value at `(table, source, n, l)`, if any.
pub fn lookup(table: u8, source: CellSource, n: u32, l: u32) -> Result<Option<f64>> {
    Ok(table_cells(table, source)?
        .into_iter()
        .find(|c| c.n == n && c.l == l)
        .map(|c| c.value))
}
