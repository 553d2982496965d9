use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use slet_core::{Error, Result};

use crate::run::Record;

pub const CSV_HEADER: [&str; 14] = [
    "potential",
    "m1",
    "m2",
    "n",
    "l",
    "method",
    "E_binding_GeV",
    "M_GeV",
    "r0",
    "Q",
    "omega",
    "alpha1",
    "alpha2",
    "status",
];

fn io_error(e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("cannot write output: {e}"))
}

/// Six significant digits.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

pub fn opt6(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), sig6)
}

/// Full precision; empty when absent.
pub fn opt_full(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(io_error),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(io_error)?;
            stdout.flush().map_err(io_error)
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InternalInconsistency(format!("json encoding failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Rows of strings through the csv writer, so fields with commas get quoted.
pub fn to_csv<H: AsRef<[u8]>>(header: &[H], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(io_error)?;
    for row in rows {
        w.write_record(row).map_err(io_error)?;
    }
    let bytes = w.into_inner().map_err(io_error)?;
    String::from_utf8(bytes).map_err(io_error)
}

pub fn records_csv(records: &[Record]) -> Result<String> {
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.potential.clone(),
                r.m1.to_string(),
                r.m2.to_string(),
                r.n.to_string(),
                r.l.to_string(),
                r.method.as_str().to_string(),
                opt_full(r.binding_energy),
                opt_full(r.mass),
                opt_full(r.r0),
                opt_full(r.q),
                opt_full(r.omega),
                opt_full(r.alpha1),
                opt_full(r.alpha2),
                r.status.clone(),
            ]
        })
        .collect();
    to_csv(&CSV_HEADER, &rows)
}

/// Left-aligned first column, right-aligned rest.
pub fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.zip(&widths).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            let pad = w - cell.chars().count();
            if i == 0 {
                s.push_str(cell);
                s.extend(std::iter::repeat(' ').take(pad));
            } else {
                s.extend(std::iter::repeat(' ').take(pad));
                s.push_str(cell);
            }
        }
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };
    let mut out = line(&mut header.iter().copied());
    for row in rows {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
    }
    out
}

pub fn records_text(records: &[Record]) -> String {
    let header = [
        "method", "n", "l", "E (GeV)", "M (GeV)", "r0", "Q", "omega", "alpha1", "alpha2", "status",
    ];
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.method.as_str().to_string(),
                r.n.to_string(),
                r.l.to_string(),
                opt6(r.binding_energy),
                opt6(r.mass),
                opt6(r.r0),
                opt6(r.q),
                opt6(r.omega),
                opt6(r.alpha1),
                opt6(r.alpha2),
                r.status.clone(),
            ]
        })
        .collect();
    let mut out = String::new();
    if let Some(first) = records.first() {
        out.push_str(&format!(
            "potential {}  m1 = {} GeV  m2 = {} GeV\n",
            first.potential, first.m1, first.m2
        ));
    }
    out.push_str(&text_table(&header, &rows));
    for r in records {
        if let Some(err) = &r.error {
            out.push_str(&format!("({}, {}) {}: {err}\n", r.n, r.l, r.method.as_str()));
        }
        if let Some(s) = &r.breakdown {
            out.push_str(&breakdown_text(s));
        }
    }
    out
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| sig6(*v)).collect::<Vec<_>>().join(", ")
}

pub fn breakdown_text(s: &slet_core::SletSolution) -> String {
    let d = &s.diagnostics;
    let mut out = format!("\nbreakdown n = {}, l = {}\n", s.qn.n, s.qn.l);
    let mut kv = |k: &str, v: String| out.push_str(&format!("  {k:<22}{v}\n"));
    kv("r0", sig6(s.r0));
    kv("V(r0)", sig6(s.v_at_r0));
    kv("Q", sig6(s.q));
    kv("omega", sig6(s.omega));
    kv("xi", sig6(s.xi));
    kv("beta", sig6(s.beta));
    kv("lbar", sig6(s.lbar));
    kv("E0", sig6(s.e0));
    kv("eps_1..4", list(&s.eps));
    kv("delta_1..6", list(&s.delta));
    kv("eps_bar", list(&s.eps_bar));
    kv("delta_bar", list(&s.delta_bar));
    kv("alpha1", sig6(s.alpha1));
    kv("alpha1 (closed form)", sig6(d.alpha1_closed_form));
    kv("alpha2", sig6(s.alpha2));
    kv("c1, c3", format!("{:e}, {:e}", d.c1, d.c3));
    kv("E2", sig6(s.e2));
    kv("E3", sig6(s.e3));
    kv("E2 term", sig6(s.e2_term));
    kv("E3 term", sig6(s.e3_term));
    kv("E", sig6(s.binding_energy));
    kv("M", sig6(s.mass));
    kv("r0 iterations", d.r0_iterations.to_string());
    kv("F(r0)", format!("{:e}", d.r0_residual));
    kv("r0 roots", list(&d.r0_roots));
    kv("|sqrt(Q)-lbar|/lbar", format!("{:e}", d.q_lbar_mismatch));
    kv("PT basis", d.pt_basis_size.to_string());
    kv("denominator D", sig6(d.denominator));
    for w in &d.warnings {
        kv("warning", w.clone());
    }
    out
}
