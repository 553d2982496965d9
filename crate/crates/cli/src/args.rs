use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use slet_core::{Error, ParticlePair, PotentialModel, QuantumNumbers, Result};

#[derive(Debug, Parser)]
#[command(
    name = "slet",
    version,
    about = "Semi-relativistic two-body bound states: shifted-l expansion and a finite-difference check"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for one or more (n, l) levels.
    Solve(RunArgs),
    /// Recompute a published table and report the per-cell divergence.
    Table(TableArgs),
    /// Compare the expansion with the finite-difference solution.
    Compare(RunArgs),
    /// Dump every intermediate quantity of the expansion.
    Breakdown(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Slet,
    Oracle,
    Both,
    ClosedForm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Slet => "slet",
            Self::Oracle => "oracle",
            Self::Both => "both",
            Self::ClosedForm => "closed-form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Potential, e.g. `cornell:alpha=0.25,b=0.18` or `custom:-0.3*r^-1+0.2*r`.
    #[arg(long)]
    pub potential: Option<String>,
    /// First constituent mass (GeV).
    #[arg(long)]
    pub m1: Option<f64>,
    /// Second constituent mass (GeV); defaults to m1.
    #[arg(long)]
    pub m2: Option<f64>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub l: Option<u32>,
    /// Inclusive radial range, `a..b`.
    #[arg(long)]
    pub n_range: Option<String>,
    /// Inclusive orbital range, `a..b`.
    #[arg(long)]
    pub l_range: Option<String>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `key=value` file with the same keys as the long flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Drop the (v/c)² terms.
    #[arg(long)]
    pub nonrelativistic: bool,
    /// Include every intermediate of the expansion.
    #[arg(long)]
    pub breakdown: bool,
    /// `lo,hi` search interval for r0 (GeV⁻¹).
    #[arg(long)]
    pub r0_bracket: Option<String>,
    /// Finite-difference grid size.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Outer edge of the finite-difference grid (GeV⁻¹).
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Oscillator basis for the perturbation series.
    #[arg(long)]
    pub pt_basis: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    /// Table number: 1 (Coulomb), 2 (oscillator) or 3 (Cornell).
    pub table: u8,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully resolved request.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub potential_spec: String,
    pub potential: PotentialModel,
    pub pair: ParticlePair,
    pub levels: Vec<QuantumNumbers>,
    pub method: Method,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub breakdown: bool,
    pub r0_bracket: Option<(f64, f64)>,
    pub grid_points: Option<usize>,
    pub rmax: Option<f64>,
    pub pt_basis: Option<usize>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn parse_range(text: &str) -> Result<(u32, u32)> {
    let text = text.trim();
    let (a, b) = text
        .split_once("..=")
        .or_else(|| text.split_once(".."))
        .or_else(|| text.split_once('-'))
        .unwrap_or((text, text));
    let a: u32 = a.trim().parse().map_err(|_| invalid(format!("bad range '{text}'")))?;
    let b: u32 = b.trim().parse().map_err(|_| invalid(format!("bad range '{text}'")))?;
    if b < a {
        return Err(invalid(format!("empty range '{text}'")));
    }
    Ok((a, b))
}

fn parse_pair(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| invalid(format!("expected 'lo,hi', got '{text}'")))?;
    let lo = a.trim().parse().map_err(|_| invalid(format!("bad number '{a}'")))?;
    let hi = b.trim().parse().map_err(|_| invalid(format!("bad number '{b}'")))?;
    Ok((lo, hi))
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| invalid(format!("config: bad value '{value}' for '{key}'")))
}

impl RunArgs {
    /// Fills every flag left unset on the command line from a config file.
    pub fn merge_config(mut self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_config(&text, &path)?;
        Ok(self)
    }

    fn apply_config(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                invalid(format!("{}:{}: expected key=value", path.display(), i + 1))
            })?;
            let key = key.trim().trim_start_matches("--").replace('_', "-");
            let value = value.trim();
            match key.as_str() {
                "potential" => {
                    self.potential.get_or_insert_with(|| value.to_string());
                }
                "m1" => set(&mut self.m1, parse_value(&key, value)?),
                "m2" => set(&mut self.m2, parse_value(&key, value)?),
                "n" => set(&mut self.n, parse_value(&key, value)?),
                "l" => set(&mut self.l, parse_value(&key, value)?),
                "n-range" => set(&mut self.n_range, value.to_string()),
                "l-range" => set(&mut self.l_range, value.to_string()),
                "method" => set(
                    &mut self.method,
                    Method::from_str(value, true).map_err(|_| invalid(format!("config: bad method '{value}'")))?,
                ),
                "format" => set(
                    &mut self.format,
                    Format::from_str(value, true).map_err(|_| invalid(format!("config: bad format '{value}'")))?,
                ),
                "out" => set(&mut self.out, PathBuf::from(value)),
                "nonrelativistic" => self.nonrelativistic |= parse_value::<bool>(&key, value)?,
                "breakdown" => self.breakdown |= parse_value::<bool>(&key, value)?,
                "r0-bracket" => set(&mut self.r0_bracket, value.to_string()),
                "grid-points" => set(&mut self.grid_points, parse_value(&key, value)?),
                "rmax" => set(&mut self.rmax, parse_value(&key, value)?),
                "pt-basis" => set(&mut self.pt_basis, parse_value(&key, value)?),
                other => {
                    return Err(invalid(format!(
                        "{}:{}: unknown key '{other}'",
                        path.display(),
                        i + 1
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn into_manifest(self, default_method: Method) -> Result<Manifest> {
        let args = self.merge_config()?;
        let spec = args
            .potential
            .clone()
            .ok_or_else(|| invalid("--potential is required"))?;
        let potential: PotentialModel = spec.parse()?;
        let m1 = args.m1.ok_or_else(|| invalid("--m1 is required"))?;
        let m2 = args.m2.unwrap_or(m1);
        let mut pair = ParticlePair::new(m1, m2)?;
        if args.nonrelativistic {
            pair = pair.nonrelativistic();
        }
        let ns = match (&args.n_range, args.n) {
            (Some(_), Some(_)) => return Err(invalid("give either --n or --n-range, not both")),
            (Some(r), None) => parse_range(r)?,
            (None, n) => (n.unwrap_or(0), n.unwrap_or(0)),
        };
        let ls = match (&args.l_range, args.l) {
            (Some(_), Some(_)) => return Err(invalid("give either --l or --l-range, not both")),
            (Some(r), None) => parse_range(r)?,
            (None, l) => (l.unwrap_or(0), l.unwrap_or(0)),
        };
        let mut levels = Vec::new();
        for n in ns.0..=ns.1 {
            for l in ls.0..=ls.1 {
                levels.push(QuantumNumbers::new(n, l));
            }
        }
        let r0_bracket = args.r0_bracket.as_deref().map(parse_pair).transpose()?;
        Ok(Manifest {
            potential_spec: spec,
            potential,
            pair,
            levels,
            method: args.method.unwrap_or(default_method),
            format: args.format.unwrap_or(Format::Text),
            out: args.out,
            breakdown: args.breakdown,
            r0_bracket,
            grid_points: args.grid_points,
            rmax: args.rmax,
            pt_basis: args.pt_basis,
        })
    }
}

fn set<T>(slot: &mut Option<T>, value: T) {
    if slot.is_none() {
        *slot = Some(value);
    }
}
