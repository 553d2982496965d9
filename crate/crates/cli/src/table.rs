use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use slet_core::fixtures::{self, CellSource, FixtureCell, TableConfig};
use slet_core::slet::{self, coulomb_closed_form, coulomb_reference};
use slet_core::{PotentialModel, QuantumNumbers, Result, SolverSettings};

use crate::args::Format;
use crate::output::{opt6, opt_full, sig6, text_table, to_csv, to_json};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub n: u32,
    pub l: u32,
    pub computed: Option<f64>,
    pub printed: f64,
    /// Decimal places of the printed value.
    pub decimals: u32,
    /// computed − printed.
    pub diff: Option<f64>,
    pub within: bool,
    /// Read-only comparison columns.
    pub context: Vec<(CellSource, f64)>,
    pub error: Option<String>,
}

/// Extra rows shown next to the Coulomb table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoulombExtras {
    pub n: u32,
    pub exact: f64,
    pub exact_printed: Option<f64>,
    /// Fully corrected value from the general pipeline; diagnostic only.
    pub general: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub table: u8,
    pub potential: String,
    pub m: f64,
    pub tolerance: f64,
    pub cells: Vec<TableCell>,
    pub coulomb: Vec<CoulombExtras>,
    pub divergent: usize,
}

fn context_for(all: &[FixtureCell], table: u8, n: u32, l: u32) -> Vec<(CellSource, f64)> {
    all.iter()
        .filter(|c| c.table == table && c.n == n && c.l == l && c.source.is_comparison())
        .map(|c| (c.source, c.value))
        .collect()
}

fn computed_value(cfg: &TableConfig, n: u32, l: u32) -> Result<f64> {
    match cfg.potential {
        PotentialModel::Coulomb { alpha } => Ok(coulomb_closed_form(cfg.m, alpha, n)?.e0),
        _ => Ok(slet::solve(
            &cfg.potential,
            &cfg.pair(),
            QuantumNumbers::new(n, l),
            &SolverSettings::default(),
        )?
        .binding_energy),
    }
}

pub fn run_table(table: u8) -> Result<TableReport> {
    let cfg = fixtures::table_config(table)?;
    let all = fixtures::cells()?;
    let targets: Vec<FixtureCell> = all
        .iter()
        .filter(|c| c.table == table && c.source == CellSource::Slet)
        .copied()
        .collect();
    let cells: Vec<TableCell> = targets
        .par_iter()
        .map(|c| {
            let result = computed_value(&cfg, c.n, c.l);
            let computed = result.as_ref().ok().copied();
            let diff = computed.map(|v| v - c.value);
            TableCell {
                n: c.n,
                l: c.l,
                computed,
                printed: c.value,
                decimals: c.decimals,
                diff,
                within: diff.is_some_and(|d| d.abs() <= cfg.tolerance),
                context: context_for(&all, table, c.n, c.l),
                error: result.err().map(|e| e.to_string()),
            }
        })
        .collect();

    let coulomb = match cfg.potential {
        PotentialModel::Coulomb { alpha } => (0..=cfg.n_max)
            .into_par_iter()
            .map(|n| {
                let exact = coulomb_reference(cfg.m, alpha, n)?.exact_mass - 2.0 * cfg.m;
                let exact_printed = all
                    .iter()
                    .find(|c| c.table == table && c.source == CellSource::Exact && c.n == n)
                    .map(|c| c.value);
                let general = slet::solve(
                    &cfg.potential,
                    &cfg.pair(),
                    QuantumNumbers::new(n, 0),
                    &SolverSettings::default(),
                )
                .ok()
                .map(|s| s.binding_energy);
                Ok(CoulombExtras {
                    n,
                    exact,
                    exact_printed,
                    general,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        _ => Vec::new(),
    };

    let divergent = cells.iter().filter(|c| !c.within).count();
    Ok(TableReport {
        table,
        potential: cfg.potential.to_string(),
        m: cfg.m,
        tolerance: cfg.tolerance,
        cells,
        coulomb,
        divergent,
    })
}

/// The listed cells, or `None` when every cell is within tolerance.
pub fn divergence_error(report: &TableReport) -> Option<String> {
    let bad: Vec<String> = report
        .cells
        .iter()
        .filter(|c| !c.within)
        .map(|c| match (c.diff, &c.error) {
            (Some(d), _) => format!("(n={}, l={}) diff {d:+.3e}", c.n, c.l),
            (None, Some(e)) => format!("(n={}, l={}) failed: {e}", c.n, c.l),
            (None, None) => format!("(n={}, l={})", c.n, c.l),
        })
        .collect();
    (!bad.is_empty()).then(|| {
        format!(
            "table {}: {} of {} cells outside {:e} GeV: {}",
            report.table,
            bad.len(),
            report.cells.len(),
            report.tolerance,
            bad.join(", ")
        )
    })
}

fn rounded(v: Option<f64>, decimals: u32) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.*}", decimals as usize))
}

fn context_text(ctx: &[(CellSource, f64)]) -> String {
    ctx.iter()
        .map(|(s, v)| format!("{s}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn coulomb_layout(report: &TableReport) -> String {
    let mut header = vec!["row".to_string()];
    header.extend(report.cells.iter().map(|c| format!("n={}", c.n)));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = vec![
        std::iter::once("E_no".to_string())
            .chain(report.cells.iter().map(|c| rounded(c.computed, c.decimals)))
            .collect::<Vec<_>>(),
        std::iter::once("E_no printed".to_string())
            .chain(report.cells.iter().map(|c| format!("{:.*}", c.decimals as usize, c.printed)))
            .collect(),
        std::iter::once("exact".to_string())
            .chain(report.coulomb.iter().map(|x| sig6(x.exact)))
            .collect(),
        std::iter::once("exact printed".to_string())
            .chain(report.coulomb.iter().map(|x| x.exact_printed.map_or_else(|| "-".into(), |v| v.to_string())))
            .collect(),
        std::iter::once("full pipeline".to_string())
            .chain(report.coulomb.iter().map(|x| opt6(x.general)))
            .collect(),
    ];
    for source in [CellSource::SquareRoot, CellSource::Integral] {
        rows.push(
            std::iter::once(source.to_string())
                .chain(report.cells.iter().map(|c| {
                    c.context
                        .iter()
                        .find(|(s, _)| *s == source)
                        .map_or_else(|| "-".into(), |(_, v)| v.to_string())
                }))
                .collect(),
        );
    }
    text_table(&header, &rows)
}

fn grid_layout(report: &TableReport) -> String {
    let header = ["n", "l", "computed", "printed", "context"];
    let rows: Vec<Vec<String>> = report
        .cells
        .iter()
        .map(|c| {
            vec![
                c.n.to_string(),
                c.l.to_string(),
                rounded(c.computed, c.decimals),
                format!("{:.*}", c.decimals as usize, c.printed),
                context_text(&c.context),
            ]
        })
        .collect();
    text_table(&header, &rows)
}

pub fn render(report: &TableReport, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => {
            let header = [
                "table",
                "n",
                "l",
                "computed_GeV",
                "printed_GeV",
                "diff_GeV",
                "tolerance_GeV",
                "within",
                "context",
            ];
            let rows: Vec<Vec<String>> = report
                .cells
                .iter()
                .map(|c| {
                    vec![
                        report.table.to_string(),
                        c.n.to_string(),
                        c.l.to_string(),
                        opt_full(c.computed),
                        c.printed.to_string(),
                        opt_full(c.diff),
                        report.tolerance.to_string(),
                        c.within.to_string(),
                        context_text(&c.context),
                    ]
                })
                .collect();
            to_csv(&header, &rows)
        }
        Format::Text => {
            let mut out = format!(
                "table {}: {}  m1 = m2 = {} GeV  tolerance {:e} GeV\n",
                report.table, report.potential, report.m, report.tolerance
            );
            out.push_str(&if report.coulomb.is_empty() {
                grid_layout(report)
            } else {
                coulomb_layout(report)
            });
            out.push_str("\ndivergence (computed - printed)\n");
            let rows: Vec<Vec<String>> = report
                .cells
                .iter()
                .map(|c| {
                    vec![
                        c.n.to_string(),
                        c.l.to_string(),
                        opt6(c.computed),
                        c.printed.to_string(),
                        c.diff.map_or_else(|| "-".into(), |d| format!("{d:+.3e}")),
                        if c.within { "ok" } else { "DIVERGENT" }.to_string(),
                    ]
                })
                .collect();
            out.push_str(&text_table(&["n", "l", "computed", "printed", "diff", "status"], &rows));
            out.push_str(&format!(
                "{} of {} cells within tolerance\n",
                report.cells.len() - report.divergent,
                report.cells.len()
            ));
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coulomb_table_is_within_tolerance() {
        let r = run_table(1).unwrap();
        assert_eq!(r.cells.len(), 6);
        assert_eq!(r.coulomb.len(), 6);
        assert_eq!(r.divergent, 0);
        assert!(divergence_error(&r).is_none());
        for x in &r.coulomb {
            assert!((x.exact - x.exact_printed.unwrap()).abs() <= 1e-6);
        }
        let text = render(&r, Format::Text).unwrap();
        assert!(text.contains("E_no printed"));
        assert!(text.contains("6 of 6 cells within tolerance"));
    }

    #[test]
    fn unknown_table() {
        assert!(run_table(7).is_err());
    }
}
