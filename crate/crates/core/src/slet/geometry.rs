//! Expansion point `r0` and the quantities fixed there: ξ, Q, ω, the shift β
//! and the leading energy E₀.

use crate::error::{Error, Result};
use crate::pair::ParticlePair;
use crate::potentials::PotentialModel;
use crate::roots::{brent, scan_sign_changes, Spacing, Tolerance};

use super::{QuantumNumbers, SolverSettings};

/// Everything `geometry_at` learns about the potential at one trial `r0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub r0: f64,
    pub v: f64,
    pub v1: f64,
    pub v2: f64,
    /// `ξ = √(1 + [2η/r0V′]²)`; infinite in the nonrelativistic limit.
    pub xi: f64,
    pub q: f64,
    pub omega: f64,
}

/// `ξ`, `Q` and `ω` at `r0`.
///
/// With `t = r0V′/η`, `Q = (μ/2η)(r0²V′)²(1+ξ)` is evaluated as
/// `μ r0³ V′ (t + √(t²+4))/2`, which stays finite as `η → ∞`.
pub fn geometry_at(potential: &PotentialModel, pair: &ParticlePair, r0: f64) -> Result<Geometry> {
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(Error::Domain(format!("r0 must be positive, got {r0}")));
    }
    let v = potential.evaluate(r0)?;
    let v1 = potential.derivative(r0, 1)?;
    let v2 = potential.derivative(r0, 2)?;
    if !(v1 > 0.0) {
        return Err(Error::NonMonotonePoint { r0, slope: v1 });
    }
    let mu = pair.mu();
    let t = r0 * v1 / pair.eta();
    let xi = if t == 0.0 {
        f64::INFINITY
    } else {
        (1.0 + 4.0 / (t * t)).sqrt()
    };
    let d = 0.5 * (t + (t * t + 4.0).sqrt());
    let q = mu * r0.powi(3) * v1 * d;
    let bracket = 3.0 + r0 * v2 / v1 - t / d;
    if !(bracket >= 0.0) {
        return Err(Error::NoHarmonicRegime { r0, bracket });
    }
    let omega = bracket.sqrt() / mu;
    Ok(Geometry {
        r0,
        v,
        v1,
        v2,
        xi,
        q,
        omega,
    })
}

/// `β = −½ − μ(n+½)ω` and `l̄ = l − β`.
pub fn shift_and_lbar(pair: &ParticlePair, n: u32, omega: f64, l: u32) -> (f64, f64) {
    let beta = -0.5 - pair.mu() * (n as f64 + 0.5) * omega;
    (beta, l as f64 - beta)
}

/// `F(r0) = r0²V′·√(2μ(1+ξ)/η) − [1 + 2l + μ(2n+1)ω]`, evaluated as
/// `2√Q − [1 + 2l + μ(2n+1)ω]` (the same quantity, finite at `η = ∞`).
pub fn residual(geometry: &Geometry, pair: &ParticlePair, qn: QuantumNumbers) -> f64 {
    let rhs = 1.0 + 2.0 * qn.l as f64 + pair.mu() * (2.0 * qn.n as f64 + 1.0) * geometry.omega;
    2.0 * geometry.q.sqrt() - rhs
}

/// `E₀ = V − η + √(η² + ηQ/(μr0²))`, rewritten as
/// `V + (Q/μr0²)/(1 + √(1+s))` with `s = Q/(μηr0²)` to avoid cancellation.
pub fn leading_energy(potential: &PotentialModel, pair: &ParticlePair, r0: f64, q: f64) -> Result<f64> {
    let v = potential.evaluate(r0)?;
    Ok(leading_energy_from(v, pair, r0, q))
}

pub(crate) fn leading_energy_from(v: f64, pair: &ParticlePair, r0: f64, q: f64) -> f64 {
    let kinetic = q / (pair.mu() * r0 * r0);
    let s = kinetic / pair.eta();
    v + kinetic / (1.0 + (1.0 + s).sqrt())
}

/// `√(1 + Q/(μηr0²))`, which equals `1 + (E₀ − V)/η`.
pub fn denominator(pair: &ParticlePair, r0: f64, q: f64) -> f64 {
    (1.0 + q / (pair.mu() * pair.eta() * r0 * r0)).sqrt()
}

/// Converged expansion point.
#[derive(Debug, Clone, PartialEq)]
pub struct R0Solution {
    pub r0: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Every root found in the bracket, in increasing order.
    pub roots: Vec<f64>,
}

/// Root of [`residual`] in `settings.r0_bracket`. Points with no valid
/// geometry are skipped by the scan. When several roots exist the one with
/// the lowest `E₀` is returned.
pub fn solve_r0(
    potential: &PotentialModel,
    pair: &ParticlePair,
    qn: QuantumNumbers,
    settings: &SolverSettings,
) -> Result<R0Solution> {
    settings.validate()?;
    let (lo, hi) = settings.r0_bracket;
    let f = |r: f64| -> Result<f64> { Ok(residual(&geometry_at(potential, pair, r)?, pair, qn)) };
    let brackets = scan_sign_changes(
        |r| f(r).ok(),
        lo,
        hi,
        settings.scan_panels,
        Spacing::Logarithmic,
    );
    if brackets.is_empty() {
        return Err(Error::BracketingFailure { lo, hi });
    }
    let tol = Tolerance {
        rel: settings.r0_tolerance,
        abs: 0.0,
        residual: 0.0,
        max_iterations: settings.max_iterations,
    };
    let mut found = Vec::new();
    let mut first_error = None;
    for b in &brackets {
        match brent(f, b.lo, b.hi, tol) {
            Ok(root) => found.push(root),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let mut best: Option<(f64, usize)> = None;
    for (i, root) in found.iter().enumerate() {
        let g = geometry_at(potential, pair, root.x)?;
        let e0 = leading_energy_from(g.v, pair, root.x, g.q);
        if best.is_none_or(|(e, _)| e0 < e) {
            best = Some((e0, i));
        }
    }
    let Some((_, index)) = best else {
        return Err(first_error.unwrap_or(Error::BracketingFailure { lo, hi }));
    };
    let root = found[index];
    Ok(R0Solution {
        r0: root.x,
        residual: root.fx,
        iterations: root.iterations,
        roots: found.iter().map(|r| r.x).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cornell() -> (PotentialModel, ParticlePair) {
        (PotentialModel::cornell(0.25, 0.18), ParticlePair::equal(1.45).unwrap())
    }

    #[test]
    fn q_matches_direct_expression() {
        let (pot, pair) = cornell();
        for r0 in [0.5, 1.7, 3.0, 9.0] {
            let g = geometry_at(&pot, &pair, r0).unwrap();
            let eta = pair.eta();
            let direct = pair.mu() / (2.0 * eta) * (r0 * r0 * g.v1).powi(2) * (1.0 + g.xi);
            assert!((g.q - direct).abs() <= 1e-12 * direct, "r0 = {r0}");
            let xi = (1.0 + (2.0 * eta / (r0 * g.v1)).powi(2)).sqrt();
            assert!((g.xi - xi).abs() <= 1e-12 * xi);
        }
    }

    #[test]
    fn nonrelativistic_q() {
        let pot = PotentialModel::oscillator(1.0);
        let pair = ParticlePair::equal(1.31).unwrap();
        let huge = ParticlePair::equal(1.31).unwrap();
        let r0 = 1.3;
        // Large eta through the direct Q formula at eta = 1e8.
        let eta = 1e8;
        let v1 = pot.derivative(r0, 1).unwrap();
        let xi = (1.0 + (2.0 * eta / (r0 * v1)).powi(2)).sqrt();
        let q_direct = huge.mu() / (2.0 * eta) * (r0 * r0 * v1).powi(2) * (1.0 + xi);
        let nr = huge.mu() * r0.powi(3) * v1;
        assert!((q_direct - nr).abs() <= 1e-4 * nr);
        let g = geometry_at(&pot, &pair.nonrelativistic(), r0).unwrap();
        assert!((g.q - nr).abs() <= 1e-15 * nr);
        assert!(g.xi.is_infinite());
    }

    #[test]
    fn geometry_errors() {
        let pair = ParticlePair::equal(1.0).unwrap();
        let falling = PotentialModel::linear(-1.0);
        assert!(matches!(
            geometry_at(&falling, &pair, 1.0),
            Err(Error::NonMonotonePoint { .. })
        ));
        // −r^(−4): V′ > 0 but 3 + r0V″/V′ = 3 − 5 < 0.
        let steep: PotentialModel = "custom:-1*r^-4".parse().unwrap();
        assert!(matches!(
            geometry_at(&steep, &pair.nonrelativistic(), 1.0),
            Err(Error::NoHarmonicRegime { .. })
        ));
        assert!(matches!(
            geometry_at(&falling, &pair, -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn shift_examples() {
        let pair = ParticlePair::equal(2.0).unwrap(); // mu = 1
        let (beta, lbar) = shift_and_lbar(&pair, 0, 1.0, 0);
        assert_eq!((beta, lbar), (-1.0, 1.0));
        for n in 0..5u32 {
            let omega = 0.37 + n as f64;
            let (beta, _) = shift_and_lbar(&pair, n, omega, 2);
            let identity = (2.0 * beta + 1.0) / (2.0 * pair.mu()) + (n as f64 + 0.5) * omega;
            assert!(identity.abs() < 1e-14);
        }
    }

    #[test]
    fn leading_energy_forms_agree() {
        let (pot, pair) = cornell();
        let (r0, q) = (2.2, 3.1);
        let v = pot.evaluate(r0).unwrap();
        let eta = pair.eta();
        let textbook = v - eta + (eta * eta + eta * q / (pair.mu() * r0 * r0)).sqrt();
        let e0 = leading_energy(&pot, &pair, r0, q).unwrap();
        assert!((e0 - textbook).abs() < 1e-13);
        assert_eq!(leading_energy(&pot, &pair, r0, 0.0).unwrap(), v);
        let d1 = 1.0 + (e0 - v) / eta;
        let d2 = denominator(&pair, r0, q);
        assert!((d1 - d2).abs() <= 1e-12 * d2);
    }

    #[test]
    fn oscillator_root_is_self_consistent() {
        let pot = PotentialModel::oscillator(1.0);
        let pair = ParticlePair::equal(1.31).unwrap();
        let settings = SolverSettings::default();
        for n in 0..3 {
            for l in 0..3 {
                let qn = QuantumNumbers::new(n, l);
                let sol = solve_r0(&pot, &pair, qn, &settings).unwrap();
                let g = geometry_at(&pot, &pair, sol.r0).unwrap();
                let (_, lbar) = shift_and_lbar(&pair, n, g.omega, l);
                assert!((g.q.sqrt() - lbar).abs() <= 1e-8 * lbar);
                assert_eq!(sol.roots.len(), 1);
            }
        }
    }

    #[test]
    fn bracketing_failure_for_decreasing_potential() {
        let pot = PotentialModel::linear(-0.2);
        let pair = ParticlePair::equal(1.0).unwrap();
        let err = solve_r0(&pot, &pair, QuantumNumbers::new(0, 0), &SolverSettings::default())
            .unwrap_err();
        assert!(matches!(err, Error::BracketingFailure { .. }));
    }
}
