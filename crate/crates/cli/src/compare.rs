use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use slet_core::fixtures::{self, CellSource};
use slet_core::{Error, QuantumNumbers, Result};

use crate::args::{Format, Manifest, Method};
use crate::output::{opt6, opt_full, text_table, to_csv, to_json};
use crate::run::{closed_form_pair, run_oracle, run_slet, Record};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureValue {
    pub table: u8,
    pub source: CellSource,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub n: u32,
    pub l: u32,
    pub slet: Option<f64>,
    pub oracle: Option<f64>,
    /// SLET − oracle.
    pub diff: Option<f64>,
    /// Closed-form Coulomb E0, equal masses and l = 0 only.
    pub e0_closed_form: Option<f64>,
    /// `leading_energy` at the closed-form geometry.
    pub e0_leading: Option<f64>,
    pub fixtures: Vec<FixtureValue>,
    pub status: String,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub compared: usize,
    pub max_abs_diff: Option<f64>,
    pub mean_abs_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub potential: String,
    pub m1: f64,
    pub m2: f64,
    pub nonrelativistic: bool,
    pub rows: Vec<CompareRow>,
    pub summary: CompareSummary,
}

/// Published tables whose setup matches the manifest.
fn matching_tables(m: &Manifest) -> Vec<u8> {
    if m.pair.is_nonrelativistic() || m.pair.m1() != m.pair.m2() {
        return Vec::new();
    }
    (1..=3)
        .filter(|&t| {
            fixtures::table_config(t)
                .map(|c| c.potential == m.potential && c.m == m.pair.m1())
                .unwrap_or(false)
        })
        .collect()
}

fn fixture_values(tables: &[u8], qn: QuantumNumbers) -> Result<Vec<FixtureValue>> {
    if tables.is_empty() {
        return Ok(Vec::new());
    }
    Ok(fixtures::cells()?
        .into_iter()
        .filter(|c| tables.contains(&c.table) && c.n == qn.n && c.l == qn.l)
        .map(|c| FixtureValue {
            table: c.table,
            source: c.source,
            value: c.value,
        })
        .collect())
}

fn row(m: &Manifest, qn: QuantumNumbers, tables: &[u8]) -> Result<(CompareRow, Vec<Record>)> {
    let (s, o) = rayon::join(|| run_slet(m, qn), || run_oracle(m, qn));
    let diff = match (s.binding_energy, o.binding_energy) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    let closed = closed_form_pair(m, qn);
    let errors: Vec<String> = [&s, &o]
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("{}: {e}", r.method.as_str())))
        .collect();
    let status = [&s, &o]
        .iter()
        .find(|r| r.status != "ok")
        .map_or_else(|| "ok".to_string(), |r| r.status.clone());
    let row = CompareRow {
        n: qn.n,
        l: qn.l,
        slet: s.binding_energy,
        oracle: o.binding_energy,
        diff,
        e0_closed_form: closed.map(|c| c.0),
        e0_leading: closed.map(|c| c.1),
        fixtures: fixture_values(tables, qn)?,
        status,
        errors,
    };
    Ok((row, vec![s, o]))
}

/// SLET against the oracle at every level; failed solves still produce a row.
pub fn run_compare(m: &Manifest) -> Result<(CompareReport, Vec<Record>)> {
    if m.method != Method::Both {
        return Err(Error::InvalidInput(format!(
            "compare runs both methods; got --method {}",
            m.method.as_str()
        )));
    }
    let tables = matching_tables(m);
    let results: Vec<(CompareRow, Vec<Record>)> = m
        .levels
        .par_iter()
        .map(|&qn| row(m, qn, &tables))
        .collect::<Result<_>>()?;
    let (rows, records): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let diffs: Vec<f64> = rows.iter().filter_map(|r| r.diff.map(f64::abs)).collect();
    let summary = CompareSummary {
        compared: diffs.len(),
        max_abs_diff: diffs.iter().copied().reduce(f64::max),
        mean_abs_diff: (!diffs.is_empty()).then(|| diffs.iter().sum::<f64>() / diffs.len() as f64),
    };
    let report = CompareReport {
        potential: m.potential_spec.clone(),
        m1: m.pair.m1(),
        m2: m.pair.m2(),
        nonrelativistic: m.pair.is_nonrelativistic(),
        rows,
        summary,
    };
    Ok((report, records.into_iter().flatten().collect()))
}

/// Printed values are shown as printed.
fn fixture_text(values: &[FixtureValue]) -> String {
    values
        .iter()
        .map(|f| format!("{}={}", f.source, f.value))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn render(report: &CompareReport, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => {
            let header = [
                "potential",
                "m1",
                "m2",
                "n",
                "l",
                "E_slet_GeV",
                "E_oracle_GeV",
                "diff_GeV",
                "E0_closed_form_GeV",
                "E0_leading_GeV",
                "fixtures",
                "status",
            ];
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        report.potential.clone(),
                        report.m1.to_string(),
                        report.m2.to_string(),
                        r.n.to_string(),
                        r.l.to_string(),
                        opt_full(r.slet),
                        opt_full(r.oracle),
                        opt_full(r.diff),
                        opt_full(r.e0_closed_form),
                        opt_full(r.e0_leading),
                        fixture_text(&r.fixtures),
                        r.status.clone(),
                    ]
                })
                .collect();
            to_csv(&header, &rows)
        }
        Format::Text => {
            let with_closed = report.rows.iter().any(|r| r.e0_closed_form.is_some());
            let with_fixtures = report.rows.iter().any(|r| !r.fixtures.is_empty());
            let mut header = vec!["n", "l", "SLET (GeV)", "oracle (GeV)", "diff"];
            if with_closed {
                header.extend(["E0 closed", "E0 leading"]);
            }
            if with_fixtures {
                header.push("printed");
            }
            header.push("status");
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    let mut row = vec![
                        r.n.to_string(),
                        r.l.to_string(),
                        opt6(r.slet),
                        opt6(r.oracle),
                        r.diff.map_or_else(|| "-".into(), |d| format!("{d:+.3e}")),
                    ];
                    if with_closed {
                        row.push(opt6(r.e0_closed_form));
                        row.push(opt6(r.e0_leading));
                    }
                    if with_fixtures {
                        row.push(fixture_text(&r.fixtures));
                    }
                    row.push(r.status.clone());
                    row
                })
                .collect();
            let mut out = format!(
                "potential {}  m1 = {} GeV  m2 = {} GeV{}\n",
                report.potential,
                report.m1,
                report.m2,
                if report.nonrelativistic { "  (nonrelativistic)" } else { "" }
            );
            out.push_str(&text_table(&header, &rows));
            let s = &report.summary;
            out.push_str(&format!(
                "compared {} levels: max |diff| = {}, mean |diff| = {}\n",
                s.compared,
                s.max_abs_diff.map_or_else(|| "-".into(), |d| format!("{d:.3e}")),
                s.mean_abs_diff.map_or_else(|| "-".into(), |d| format!("{d:.3e}")),
            ));
            for r in &report.rows {
                for e in &r.errors {
                    out.push_str(&format!("({}, {}) {e}\n", r.n, r.l));
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::RunArgs;

    #[test]
    fn coulomb_rows_carry_closed_form_and_fixtures() {
        let m = RunArgs {
            potential: Some("coulomb:alpha=0.25".into()),
            m1: Some(1.45),
            n_range: Some("0..1".into()),
            method: Some(Method::Both),
            ..RunArgs::default()
        }
        .into_manifest(Method::Both)
        .unwrap();
        let (report, records) = run_compare(&m).unwrap();
        assert_eq!(records.len(), 4);
        assert_eq!(report.summary.compared, 2);
        for r in &report.rows {
            let (cf, lead) = (r.e0_closed_form.unwrap(), r.e0_leading.unwrap());
            assert!((cf - lead).abs() <= 1e-10 * cf.abs());
            assert!(r.fixtures.iter().any(|f| f.source == CellSource::Slet));
            assert!(r.diff.unwrap().abs() < 1e-3);
        }
        let text = render(&report, Format::Text).unwrap();
        assert!(text.contains("max |diff|"));
    }

    #[test]
    fn other_methods_are_rejected() {
        let m = RunArgs {
            potential: Some("oscillator:k=1".into()),
            m1: Some(1.31),
            ..RunArgs::default()
        }
        .into_manifest(Method::Slet)
        .unwrap();
        assert!(run_compare(&m).is_err());
    }
}
