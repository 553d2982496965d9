//! Finite-difference solution of the reduced radial equation
//!
//! ```text
//! [−(1/2μ) d²/dr² + l(l+1)/(2μr²) + V − V²/2η + E·V/η] R = (E + E²/2η) R
//! ```
//!
//! For a trial `E` the left side is a linear operator whose `n`-th eigenvalue
//! `λ_n(E)` is found by Sturm counting. The energy then solves
//! `g(E) = λ_n(E) − E − E²/2η = 0`.
//!
//! The default grid is uniform in `x = ln r` with `R = √r·y`, which turns the
//! problem into the symmetric pencil
//!
//! ```text
//! −(1/2μ) y″ + [(l+½)²/(2μ) + U r²] y = λ r² y
//! ```
//!
//! and resolves the short-distance region of Coulomb-like potentials with
//! second-order accuracy. A plain uniform grid in `r` is also available.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage, StageExt};
use crate::pair::ParticlePair;
use crate::potentials::PotentialModel;
use crate::roots::{brent, Tolerance};
use crate::slet::QuantumNumbers;

pub const MIN_POINTS: usize = 500;
pub const DEFAULT_POINTS: usize = 4000;
pub const DEFAULT_R_MIN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    #[default]
    Logarithmic,
    Uniform,
}

/// Interior nodes of `(r_min, r_max)`; the wavefunction vanishes at both
/// ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub point_count: usize,
    pub kind: GridKind,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, point_count: usize, kind: GridKind) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "grid needs 0 < r_min < r_max, got r_min = {r_min}, r_max = {r_max}"
            )));
        }
        if point_count < MIN_POINTS {
            return Err(Error::InvalidInput(format!(
                "grid needs at least {MIN_POINTS} points, got {point_count}"
            )));
        }
        Ok(Self {
            r_min,
            r_max,
            point_count,
            kind,
        })
    }

    /// Spacing in `r` (uniform) or in `ln r` (logarithmic).
    pub fn step(&self) -> f64 {
        let intervals = (self.point_count + 1) as f64;
        match self.kind {
            GridKind::Uniform => (self.r_max - self.r_min) / intervals,
            GridKind::Logarithmic => (self.r_max / self.r_min).ln() / intervals,
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        let h = self.step();
        (1..=self.point_count)
            .map(|i| match self.kind {
                GridKind::Uniform => self.r_min + h * i as f64,
                GridKind::Logarithmic => self.r_min * (h * i as f64).exp(),
            })
            .collect()
    }
}

/// Discretised `H(E) − λ·B` with `H` symmetric tridiagonal (constant
/// off-diagonal) and `B` diagonal and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveOperator {
    pub kind: GridKind,
    pub step: f64,
    pub mu: f64,
    pub radii: Vec<f64>,
    /// `U = V − V²/2η + E·V/η` (with the high-barrier cap, see
    /// [`effective_operator`]).
    pub potential: Vec<f64>,
    pub diagonal: Vec<f64>,
    pub off_diagonal: f64,
    pub weight: Vec<f64>,
    l: u32,
}

/// `H(E_trial)` on `grid`.
///
/// Where `V > E + η` the expansion behind `γ` has turned over (`U` would
/// decrease again with growing `V`), which lets a confining potential grow a
/// spurious outer well. There `U` is held at `E + E²/2η + η/2`, a barrier
/// above the level being sought.
pub fn effective_operator(
    potential: &PotentialModel,
    pair: &ParticlePair,
    l: u32,
    e_trial: f64,
    grid: &RadialGrid,
) -> Result<EffectiveOperator> {
    let mu = pair.mu();
    let eta = pair.eta();
    let radii = grid.radii();
    let h = grid.step();
    let cap = e_trial + e_trial * e_trial / (2.0 * eta) + 0.5 * eta;
    let mut u = Vec::with_capacity(radii.len());
    for &r in &radii {
        let v = potential.evaluate(r)?;
        let value = if v > e_trial + eta {
            cap
        } else {
            v - v * v / (2.0 * eta) + e_trial * v / eta
        };
        u.push(value);
    }
    let lf = l as f64;
    let (diagonal, weight, off_diagonal) = match grid.kind {
        GridKind::Uniform => {
            let kin = 1.0 / (mu * h * h);
            let diag = radii
                .iter()
                .zip(&u)
                .map(|(&r, &u)| kin + lf * (lf + 1.0) / (2.0 * mu * r * r) + u)
                .collect();
            (diag, vec![1.0; radii.len()], -0.5 * kin)
        }
        GridKind::Logarithmic => {
            let kin = 1.0 / (mu * h * h);
            let cent = (lf + 0.5).powi(2) / (2.0 * mu);
            let diag = radii
                .iter()
                .zip(&u)
                .map(|(&r, &u)| kin + cent + u * r * r)
                .collect();
            let weight = radii.iter().map(|r| r * r).collect();
            (diag, weight, -0.5 * kin)
        }
    };
    Ok(EffectiveOperator {
        kind: grid.kind,
        step: h,
        mu,
        radii,
        potential: u,
        diagonal,
        off_diagonal,
        weight,
        l,
    })
}

impl EffectiveOperator {
    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    /// Largest `h_local·k_local` over the grid for a level at `lambda`, with
    /// `k² = 2μ(λ − U − l(l+1)/2μr²)`. Values above about 0.5 mean the
    /// wavefunction oscillates too fast for the grid.
    pub fn resolution(&self, lambda: f64) -> f64 {
        let lf = self.l as f64;
        self.radii
            .iter()
            .zip(&self.potential)
            .map(|(&r, &u)| {
                let kinetic = lambda - u - lf * (lf + 1.0) / (2.0 * self.mu * r * r);
                let k = (2.0 * self.mu * kinetic.max(0.0)).sqrt();
                let h = match self.kind {
                    GridKind::Uniform => self.step,
                    GridKind::Logarithmic => r * self.step,
                };
                h * k
            })
            .fold(0.0, f64::max)
    }
}

/// Number of eigenvalues of the pencil below `lambda`.
pub fn sturm_count(op: &EffectiveOperator, lambda: f64) -> usize {
    let off2 = op.off_diagonal * op.off_diagonal;
    let mut count = 0;
    let mut q = 1.0;
    for (i, (&a, &b)) in op.diagonal.iter().zip(&op.weight).enumerate() {
        q = a - lambda * b - if i > 0 { off2 / q } else { 0.0 };
        if q == 0.0 {
            q = -f64::MIN_POSITIVE;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `(n+1)`-th smallest eigenvalue, by bisection on [`sturm_count`].
pub fn nth_eigenvalue(op: &EffectiveOperator, n: usize) -> Result<f64> {
    if n >= op.len() {
        return Err(Error::InvalidInput(format!(
            "eigenvalue index {n} exceeds the grid size {}",
            op.len()
        )));
    }
    // Gershgorin bound for B^{-1/2} A B^{-1/2}.
    let off = op.off_diagonal.abs();
    let w = &op.weight;
    let mut lo = f64::INFINITY;
    for i in 0..op.len() {
        let mut radius = 0.0;
        if i > 0 {
            radius += off / (w[i] * w[i - 1]).sqrt();
        }
        if i + 1 < op.len() {
            radius += off / (w[i] * w[i + 1]).sqrt();
        }
        lo = lo.min(op.diagonal[i] / w[i] - radius);
    }
    let mut hi = lo.abs().max(1.0);
    let mut doublings = 0;
    while sturm_count(op, hi) <= n {
        hi = 2.0 * hi.abs() + 1.0;
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(Error::EigenvalueBisection { index: n });
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(op, mid) > n {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    if !lambda.is_finite() {
        return Err(Error::EigenvalueBisection { index: n });
    }
    Ok(lambda)
}

/// Eigenvector of `lambda` by inverse iteration, returned as samples of `R`
/// normalised to `∫R² dr = 1`.
pub fn eigenvector(op: &EffectiveOperator, lambda: f64) -> Vec<f64> {
    let n = op.len();
    let shift = lambda + 1e-12 * lambda.abs().max(1.0);
    let mut y = vec![1.0; n];
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for _ in 0..3 {
        // Thomas algorithm for (A − σB) x = y.
        let off = op.off_diagonal;
        let mut pivot = op.diagonal[0] - shift * op.weight[0];
        if pivot == 0.0 {
            pivot = f64::MIN_POSITIVE;
        }
        c[0] = off / pivot;
        d[0] = y[0] / pivot;
        for i in 1..n {
            let mut p = op.diagonal[i] - shift * op.weight[i] - off * c[i - 1];
            if p == 0.0 {
                p = f64::MIN_POSITIVE;
            }
            c[i] = off / p;
            d[i] = (y[i] - off * d[i - 1]) / p;
        }
        y[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = d[i] - c[i] * y[i + 1];
        }
        let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 0.0 && scale.is_finite() {
            y.iter_mut().for_each(|v| *v /= scale);
        }
    }
    let norm: f64 = y
        .iter()
        .zip(&op.weight)
        .map(|(v, w)| w * v * v)
        .sum::<f64>()
        * op.step;
    let norm = norm.sqrt();
    y.iter()
        .zip(&op.radii)
        .map(|(v, &r)| {
            let value = v / norm;
            match op.kind {
                GridKind::Uniform => value,
                GridKind::Logarithmic => value * r.sqrt(),
            }
        })
        .collect()
}

/// Interior sign changes, ignoring samples below `1e-6` of the peak.
pub fn count_nodes(samples: &[f64]) -> u32 {
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-6 * peak;
    let mut last = 0.0f64;
    let mut nodes = 0;
    for &v in samples.iter().filter(|v| v.abs() > floor) {
        if last != 0.0 && v.signum() != last.signum() {
            nodes += 1;
        }
        last = v;
    }
    nodes
}

/// Result of the inverse-square check at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FallToCenter {
    /// `s` in `s/(2μr²)`, the total inverse-square strength.
    pub strength: f64,
    /// `s + 1/4`; positive means the spectrum is bounded below.
    pub margin: f64,
}

/// For `V ~ c/r` near the origin, `−V²/2η` adds `−c²/(2ηr²)`, so the net
/// inverse-square strength is `s = l(l+1) − μc²/η`. The problem is sound
/// iff `s > −1/4`. Any term more singular than `1/r` makes `−V²/2η` beat the
/// centrifugal barrier outright.
pub fn fall_to_center_check(
    potential: &PotentialModel,
    pair: &ParticlePair,
    l: u32,
) -> Result<FallToCenter> {
    let lf = l as f64;
    let centrifugal = lf * (lf + 1.0);
    let mu = pair.mu();
    let eta = pair.eta();
    let terms = potential.terms();
    let singular = |p: f64| terms.iter().any(|t| t.coefficient != 0.0 && t.power < p);

    let strength = if pair.is_nonrelativistic() {
        // Only V itself is singular: r⁻² adds 2μc, anything steeper and
        // attractive is unbounded.
        let steep_attractive = terms
            .iter()
            .any(|t| t.coefficient < 0.0 && t.power < -2.0);
        if steep_attractive {
            f64::NEG_INFINITY
        } else {
            let c2: f64 = terms
                .iter()
                .filter(|t| t.power == -2.0)
                .map(|t| t.coefficient)
                .sum();
            centrifugal + 2.0 * mu * c2
        }
    } else if singular(-1.0) {
        f64::NEG_INFINITY
    } else {
        let c = potential.inverse_r_coefficient();
        centrifugal - mu * c * c / eta
    };
    let margin = strength + 0.25;
    if !(margin > 0.0) {
        return Err(Error::SupercriticalCoupling { strength });
    }
    Ok(FallToCenter { strength, margin })
}

/// Characteristic length `L` of the potential, from balancing `1/(μL²)`
/// against each term.
fn length_scale(potential: &PotentialModel, mu: f64) -> Option<f64> {
    let scales: Vec<f64> = match *potential {
        PotentialModel::Coulomb { alpha } => vec![1.0 / (mu * alpha.abs())],
        PotentialModel::Oscillator { k } => vec![(mu * k.abs()).powf(-0.25)],
        PotentialModel::Linear { b } => vec![(mu * b.abs()).powf(-1.0 / 3.0)],
        PotentialModel::CoulombPlusLinear { alpha, b } => vec![
            1.0 / (mu * alpha.abs()),
            (mu * b.abs()).powf(-1.0 / 3.0),
        ],
        PotentialModel::Custom { ref terms } => terms
            .iter()
            .filter(|t| t.power != -2.0)
            .map(|t| (mu * t.coefficient.abs()).powf(-1.0 / (t.power + 2.0)))
            .collect(),
    };
    scales
        .into_iter()
        .filter(|s| s.is_finite() && *s > 0.0)
        .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.max(s))))
}

/// Log grid from `1e-8` to `40·L·(n+l+1)²` with 4000 points, where `L` is
/// the largest of `1/(μα)`, `(μb)^(−1/3)` and `(μk)^(−1/4)` present.
pub fn default_grid(
    potential: &PotentialModel,
    pair: &ParticlePair,
    qn: QuantumNumbers,
) -> Result<RadialGrid> {
    let length = length_scale(potential, pair.mu()).ok_or_else(|| {
        Error::InvalidInput(format!("no length scale for potential {potential}"))
    })?;
    let k = (qn.n + qn.l + 1) as f64;
    RadialGrid::new(
        DEFAULT_R_MIN,
        40.0 * length * k * k,
        DEFAULT_POINTS,
        GridKind::Logarithmic,
    )
}

/// `[−0.9η, max(1, 50·ε)]` with `ε = 1/(μL²)` the natural energy unit.
/// Below `−η` the factor `1 + E/η` changes sign and `g` acquires unphysical
/// roots.
pub fn default_window(potential: &PotentialModel, pair: &ParticlePair) -> Result<(f64, f64)> {
    let mu = pair.mu();
    let length = length_scale(potential, mu).ok_or_else(|| {
        Error::InvalidInput(format!("no length scale for potential {potential}"))
    })?;
    let unit = 1.0 / (mu * length * length);
    let lo = if pair.is_nonrelativistic() {
        -1e3 * unit
    } else {
        -0.9 * pair.eta()
    };
    Ok((lo, (50.0 * unit).max(1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    /// Energy window for the sign-change scan; `None` uses [`default_window`].
    pub window: Option<(f64, f64)>,
    pub scan_points: usize,
    /// Stop when `|g(E)|` falls below this (GeV).
    pub tolerance: f64,
    pub max_iterations: usize,
    pub check_nodes: bool,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            window: None,
            scan_points: 120,
            tolerance: 1e-10,
            max_iterations: 200,
            check_nodes: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub qn: QuantumNumbers,
    pub binding_energy: f64,
    pub mass: f64,
    /// `λ_n` at the converged energy.
    pub eigenvalue: f64,
    pub node_count: u32,
    /// Grid including both end points.
    pub radii: Vec<f64>,
    /// `R_nl` on `radii`; zero at both ends.
    pub wavefunction: Vec<f64>,
    pub outer_iterations: usize,
    pub residual: f64,
    pub fall_to_center: FallToCenter,
    pub warnings: Vec<String>,
}

/// `E` with `λ_n(E) = E + E²/2η`. The window is scanned upward and the first
/// `+ → −` change of `g` is refined with Brent's method.
pub fn solve_selfconsistent(
    potential: &PotentialModel,
    pair: &ParticlePair,
    qn: QuantumNumbers,
    grid: &RadialGrid,
    settings: &OracleSettings,
) -> Result<OracleSolution> {
    let ftc = fall_to_center_check(potential, pair, qn.l).stage(Stage::FallToCenter)?;
    let n = qn.n as usize;
    let eta = pair.eta();
    let lambda_at = |e: f64| -> Result<f64> {
        let op = effective_operator(potential, pair, qn.l, e, grid)?;
        nth_eigenvalue(&op, n)
    };
    let g = |e: f64| -> Result<f64> { Ok(lambda_at(e)? - e - e * e / (2.0 * eta)) };

    let (energy, iterations, residual) = if pair.is_nonrelativistic() {
        let e = lambda_at(0.0).stage(Stage::Eigenvalue)?;
        (e, 1, 0.0)
    } else {
        let (lo, hi) = match settings.window {
            Some(w) => w,
            None => default_window(potential, pair).stage(Stage::EnergyScan)?,
        };
        let points = settings.scan_points.max(2);
        let mut sweep = Vec::with_capacity(points + 1);
        let mut bracket = None;
        for i in 0..=points {
            let e = lo + (hi - lo) * i as f64 / points as f64;
            let value = g(e).stage(Stage::Eigenvalue)?;
            if let Some(&(pe, pg)) = sweep.last() {
                if pg > 0.0 && value <= 0.0 {
                    bracket = Some((pe, e));
                    sweep.push((e, value));
                    break;
                }
            }
            sweep.push((e, value));
        }
        let Some((a, b)) = bracket else {
            let stride = (sweep.len() / 12).max(1);
            let dump = sweep
                .iter()
                .step_by(stride)
                .map(|(e, v)| format!("g({e:.4})={v:.4e}"))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(Error::WindowNoSignChange { lo, hi, sweep: dump }.at(Stage::EnergyScan));
        };
        let tol = Tolerance {
            rel: 1e-15,
            abs: 1e-15,
            residual: settings.tolerance,
            max_iterations: settings.max_iterations,
        };
        let root = brent(g, a, b, tol).stage(Stage::EnergyScan)?;
        (root.x, root.iterations, root.fx.abs())
    };

    let op = effective_operator(potential, pair, qn.l, energy, grid).stage(Stage::Eigenvalue)?;
    let lambda = nth_eigenvalue(&op, n).stage(Stage::Eigenvalue)?;
    let mut warnings = Vec::new();
    let resolution = op.resolution(lambda);
    if resolution > 0.5 {
        warnings.push(format!(
            "grid resolves the level poorly: max h*k = {resolution:.3}"
        ));
    }
    let interior = eigenvector(&op, lambda);
    let node_count = count_nodes(&interior);
    if settings.check_nodes && node_count != qn.n {
        return Err(Error::LevelIdentification {
            expected: qn.n,
            found: node_count,
        }
        .at(Stage::EnergyScan));
    }
    let mut radii = Vec::with_capacity(interior.len() + 2);
    radii.push(grid.r_min);
    radii.extend_from_slice(&op.radii);
    radii.push(grid.r_max);
    let mut wavefunction = Vec::with_capacity(interior.len() + 2);
    wavefunction.push(0.0);
    wavefunction.extend(interior);
    wavefunction.push(0.0);

    Ok(OracleSolution {
        qn,
        binding_energy: energy,
        mass: energy + pair.constituent_mass(),
        eigenvalue: lambda,
        node_count,
        radii,
        wavefunction,
        outer_iterations: iterations,
        residual,
        fall_to_center: ftc,
        warnings,
    })
}
