use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use slet_core::oracle::{self, OracleSettings, RadialGrid};
use slet_core::slet::{self, coulomb_closed_form, leading_energy};
use slet_core::{Error, ErrorKind, PotentialModel, QuantumNumbers, Result, SletSolution, SolverSettings};

use crate::args::{Manifest, Method};

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::InvalidInput => 2,
        ErrorKind::Convergence => 3,
        ErrorKind::Unphysical => 4,
        ErrorKind::Internal => 1,
    }
}

pub fn status_label(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::InvalidInput => "invalid_input",
        ErrorKind::Convergence => "convergence",
        ErrorKind::Unphysical => "unphysical",
        ErrorKind::Internal => "internal",
    }
}

/// Finite values only; JSON has no representation for the rest.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub eigenvalue: f64,
    pub node_count: u32,
    pub outer_iterations: usize,
    pub residual: f64,
    pub grid_points: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub warnings: Vec<String>,
}

/// One solve of one method at one (n, l).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub potential: String,
    pub m1: f64,
    pub m2: f64,
    pub n: u32,
    pub l: u32,
    pub method: Method,
    pub binding_energy: Option<f64>,
    pub mass: Option<f64>,
    pub r0: Option<f64>,
    pub q: Option<f64>,
    pub omega: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub status: String,
    pub error: Option<String>,
    pub breakdown: Option<SletSolution>,
    pub oracle: Option<OracleSummary>,
    #[serde(skip)]
    pub kind: Option<ErrorKind>,
}

impl Record {
    fn blank(m: &Manifest, qn: QuantumNumbers, method: Method) -> Self {
        Self {
            potential: m.potential_spec.clone(),
            m1: m.pair.m1(),
            m2: m.pair.m2(),
            n: qn.n,
            l: qn.l,
            method,
            binding_energy: None,
            mass: None,
            r0: None,
            q: None,
            omega: None,
            alpha1: None,
            alpha2: None,
            status: "ok".into(),
            error: None,
            breakdown: None,
            oracle: None,
            kind: None,
        }
    }

    fn failed(mut self, err: &Error) -> Self {
        let kind = err.kind();
        self.status = status_label(kind).into();
        self.error = Some(err.to_string());
        self.kind = Some(kind);
        self
    }
}

pub fn solver_settings(m: &Manifest) -> SolverSettings {
    let mut s = SolverSettings::default();
    if let Some(b) = m.r0_bracket {
        s.r0_bracket = b;
    }
    s.pt_basis_size = m.pt_basis;
    s
}

pub fn oracle_grid(m: &Manifest, qn: QuantumNumbers) -> Result<RadialGrid> {
    let base = oracle::default_grid(&m.potential, &m.pair, qn)?;
    RadialGrid::new(
        base.r_min,
        m.rmax.unwrap_or(base.r_max),
        m.grid_points.unwrap_or(base.point_count),
        base.kind,
    )
}

pub fn run_slet(m: &Manifest, qn: QuantumNumbers) -> Record {
    let rec = Record::blank(m, qn, Method::Slet);
    match slet::solve(&m.potential, &m.pair, qn, &solver_settings(m)) {
        Ok(s) => Record {
            binding_energy: finite(s.binding_energy),
            mass: finite(s.mass),
            r0: finite(s.r0),
            q: finite(s.q),
            omega: finite(s.omega),
            alpha1: finite(s.alpha1),
            alpha2: finite(s.alpha2),
            breakdown: m.breakdown.then_some(s),
            ..rec
        },
        Err(e) => rec.failed(&e),
    }
}

pub fn run_oracle(m: &Manifest, qn: QuantumNumbers) -> Record {
    let rec = Record::blank(m, qn, Method::Oracle);
    let result = oracle_grid(m, qn).and_then(|grid| {
        oracle::solve_selfconsistent(&m.potential, &m.pair, qn, &grid, &OracleSettings::default())
            .map(|s| (grid, s))
    });
    match result {
        Ok((grid, s)) => Record {
            binding_energy: finite(s.binding_energy),
            mass: finite(s.mass),
            oracle: Some(OracleSummary {
                eigenvalue: s.eigenvalue,
                node_count: s.node_count,
                outer_iterations: s.outer_iterations,
                residual: s.residual,
                grid_points: grid.point_count,
                r_min: grid.r_min,
                r_max: grid.r_max,
                warnings: s.warnings,
            }),
            ..rec
        },
        Err(e) => rec.failed(&e),
    }
}

/// `(α, m)` when the closed-form Coulomb result applies.
fn equal_mass_coulomb(m: &Manifest) -> Option<(f64, f64)> {
    match m.potential {
        PotentialModel::Coulomb { alpha } if m.pair.m1() == m.pair.m2() => Some((alpha, m.pair.m1())),
        _ => None,
    }
}

pub fn run_closed_form(m: &Manifest, qn: QuantumNumbers) -> Record {
    let rec = Record::blank(m, qn, Method::ClosedForm);
    let Some((alpha, mass)) = equal_mass_coulomb(m) else {
        return rec.failed(&Error::InvalidInput(
            "closed-form results exist only for coulomb with m1 = m2".into(),
        ));
    };
    if qn.l != 0 {
        return rec.failed(&Error::InvalidInput("closed-form results exist only for l = 0".into()));
    }
    if m.pair.is_nonrelativistic() {
        return rec.failed(&Error::InvalidInput(
            "closed-form results are relativistic; drop --nonrelativistic".into(),
        ));
    }
    match coulomb_closed_form(mass, alpha, qn.n) {
        Ok(cf) => Record {
            binding_energy: finite(cf.e0),
            mass: finite(cf.mass),
            r0: finite(cf.r0),
            q: finite(cf.q),
            ..rec
        },
        Err(e) => rec.failed(&e),
    }
}

fn methods(method: Method) -> &'static [Method] {
    match method {
        Method::Both => &[Method::Slet, Method::Oracle],
        Method::Slet => &[Method::Slet],
        Method::Oracle => &[Method::Oracle],
        Method::ClosedForm => &[Method::ClosedForm],
    }
}

/// Every (level, method) pair, in (n, l) order then method order.
pub fn run_solve(m: &Manifest) -> Vec<Record> {
    let jobs: Vec<(QuantumNumbers, Method)> = m
        .levels
        .iter()
        .flat_map(|&qn| methods(m.method).iter().map(move |&me| (qn, me)))
        .collect();
    jobs.par_iter()
        .map(|&(qn, method)| match method {
            Method::Slet => run_slet(m, qn),
            Method::Oracle => run_oracle(m, qn),
            Method::ClosedForm => run_closed_form(m, qn),
            Method::Both => unreachable!("expanded above"),
        })
        .collect()
}

/// Exit code of the first failed record, in output order.
pub fn first_failure(records: &[Record]) -> Option<i32> {
    records.iter().find_map(|r| r.kind.map(exit_code))
}

/// Closed-form E0 next to `leading_energy` evaluated at the closed-form geometry.
pub fn closed_form_pair(m: &Manifest, qn: QuantumNumbers) -> Option<(f64, f64)> {
    let (alpha, mass) = equal_mass_coulomb(m)?;
    if qn.l != 0 || m.pair.is_nonrelativistic() {
        return None;
    }
    let cf = coulomb_closed_form(mass, alpha, qn.n).ok()?;
    let e0 = leading_energy(&m.potential, &m.pair, cf.r0, cf.q).ok()?;
    Some((cf.e0, e0))
}
