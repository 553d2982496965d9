//! Shifted-l expansion for the reduced semi-relativistic radial equation.
//!
//! [`solve`] runs the whole chain: `r0` from the self-consistency condition,
//! ξ/Q/ω there, the shift β, the leading energy E₀, the Taylor coefficients,
//! α₁ → E₂ → δ₁, δ₂ → α₂ → E₃, and finally `E = E₀ + E₂/l̄² + E₃/l̄³`.

mod coefficients;
mod corrections;
mod coulomb;
mod geometry;

pub use coefficients::{taylor_coefficients, TaylorCoefficients};
pub use corrections::{
    alpha1_closed_form, alpha_corrections, correction_energies, AlphaCorrections,
    CorrectionEnergies,
};
pub use coulomb::{coulomb_closed_form, coulomb_reference, CoulombClosedForm, CoulombReference};
pub use geometry::{
    denominator, geometry_at, leading_energy, residual, shift_and_lbar, solve_r0, Geometry,
    R0Solution,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage, StageExt};
use crate::pair::ParticlePair;
use crate::perturbation::{DEFAULT_BASIS_MARGIN, MIN_BASIS_MARGIN};
use crate::potentials::PotentialModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub n: u32,
    pub l: u32,
}

impl QuantumNumbers {
    pub fn new(n: u32, l: u32) -> Self {
        Self { n, l }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Search interval for `r0` (GeV⁻¹).
    pub r0_bracket: (f64, f64),
    /// Relative tolerance on `r0`.
    pub r0_tolerance: f64,
    pub max_iterations: usize,
    /// Logarithmic panels used to locate sign changes.
    pub scan_panels: usize,
    /// Oscillator basis for the perturbation series; `None` means `n + 40`.
    pub pt_basis_size: Option<usize>,
    /// When false, α₁ comes from the closed form and α₂ is taken as 0.
    pub pt_enabled: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            r0_bracket: (1e-3, 1e3),
            r0_tolerance: 1e-12,
            max_iterations: 200,
            scan_panels: 200,
            pt_basis_size: None,
            pt_enabled: true,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.r0_bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "r0 bracket must satisfy 0 < lo < hi, got ({lo}, {hi})"
            )));
        }
        if !(self.r0_tolerance > 0.0 && self.r0_tolerance < 1.0) {
            return Err(Error::InvalidInput(format!(
                "r0 tolerance must lie in (0, 1), got {}",
                self.r0_tolerance
            )));
        }
        if self.max_iterations == 0 || self.scan_panels == 0 {
            return Err(Error::InvalidInput(
                "iteration and panel counts must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn basis_for(&self, n: u32) -> Result<usize> {
        let n = n as usize;
        match self.pt_basis_size {
            None => Ok(n + DEFAULT_BASIS_MARGIN),
            Some(b) if b >= n + MIN_BASIS_MARGIN => Ok(b),
            Some(b) => Err(Error::InvalidInput(format!(
                "perturbation basis {b} is below n + {MIN_BASIS_MARGIN}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub r0_iterations: usize,
    /// `F(r0)` at the returned root.
    pub r0_residual: f64,
    /// Roots of `F` found in the bracket.
    pub r0_roots: Vec<f64>,
    /// `|√Q − l̄|/l̄`.
    pub q_lbar_mismatch: f64,
    pub alpha1_closed_form: f64,
    pub c1: f64,
    pub c3: f64,
    pub pt_basis_size: usize,
    /// `D = 1 + (E₀ − V(r0))/η`.
    pub denominator: f64,
    /// `β(β+1)/2μ`.
    pub centrifugal: f64,
    pub warnings: Vec<String>,
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Every intermediate of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SletSolution {
    pub qn: QuantumNumbers,
    pub r0: f64,
    pub omega: f64,
    /// Infinite in the nonrelativistic limit; serialised as `null` then.
    #[serde(with = "infinite_as_null")]
    pub xi: f64,
    pub q: f64,
    pub beta: f64,
    pub lbar: f64,
    pub v_at_r0: f64,
    pub e0: f64,
    pub eps: [f64; 4],
    pub delta: [f64; 6],
    pub eps_bar: [f64; 4],
    pub delta_bar: [f64; 6],
    pub alpha1: f64,
    pub alpha2: f64,
    pub e2: f64,
    pub e3: f64,
    pub e2_term: f64,
    pub e3_term: f64,
    pub binding_energy: f64,
    pub mass: f64,
    pub diagnostics: Diagnostics,
}

/// Full expansion for one `(n, l)`. Errors carry the failing stage.
pub fn solve(
    potential: &PotentialModel,
    pair: &ParticlePair,
    qn: QuantumNumbers,
    settings: &SolverSettings,
) -> Result<SletSolution> {
    settings.validate()?;
    let basis = settings.basis_for(qn.n)?;
    let mu = pair.mu();

    let root = solve_r0(potential, pair, qn, settings).stage(Stage::SolveR0)?;
    let mut warnings = Vec::new();
    if root.roots.len() > 1 {
        warnings.push(format!(
            "{} roots of the r0 condition in the bracket; kept the lowest E0 at r0 = {}",
            root.roots.len(),
            root.r0
        ));
    }

    let g = geometry_at(potential, pair, root.r0).stage(Stage::Geometry)?;
    let (beta, lbar) = shift_and_lbar(pair, qn.n, g.omega, qn.l);
    let mismatch = (g.q.sqrt() - lbar).abs() / lbar;
    if mismatch > 1e-8 {
        warnings.push(format!("sqrt(Q) and lbar differ by {mismatch:e} (relative)"));
    }
    let e0 = leading_energy(potential, pair, g.r0, g.q).stage(Stage::LeadingEnergy)?;

    let partial = taylor_coefficients(potential, pair, g.r0, g.q, beta, e0, None)
        .stage(Stage::TaylorCoefficients)?;
    let eps_bar = partial.eps_bar(mu, g.omega);
    let first = alpha_corrections(qn.n, g.omega, eps_bar, None, basis, settings.pt_enabled)
        .stage(Stage::AlphaCorrections)?;

    let partial_energy = correction_energies(
        g.r0, g.q, e0, g.v, mu, pair.eta(), beta, first.alpha1, None, lbar,
    )
    .stage(Stage::CorrectionEnergies)?;

    let full = taylor_coefficients(potential, pair, g.r0, g.q, beta, e0, Some(partial_energy.e2))
        .stage(Stage::TaylorCoefficients)?;
    let delta = full.delta().stage(Stage::TaylorCoefficients)?;
    let delta_bar = full.delta_bar(mu, g.omega).stage(Stage::TaylorCoefficients)?;
    let second = alpha_corrections(
        qn.n,
        g.omega,
        eps_bar,
        Some(delta_bar),
        basis,
        settings.pt_enabled,
    )
    .stage(Stage::AlphaCorrections)?;
    let alpha2 = second.alpha2.unwrap_or(0.0);

    let energy = correction_energies(
        g.r0,
        g.q,
        e0,
        g.v,
        mu,
        pair.eta(),
        beta,
        first.alpha1,
        Some(alpha2),
        lbar,
    )
    .stage(Stage::CorrectionEnergies)?;

    let binding_energy = e0 + energy.e2_term + energy.e3_term;
    Ok(SletSolution {
        qn,
        r0: g.r0,
        omega: g.omega,
        xi: g.xi,
        q: g.q,
        beta,
        lbar,
        v_at_r0: g.v,
        e0,
        eps: full.eps,
        delta,
        eps_bar,
        delta_bar,
        alpha1: first.alpha1,
        alpha2,
        e2: energy.e2,
        e3: energy.e3,
        e2_term: energy.e2_term,
        e3_term: energy.e3_term,
        binding_energy,
        mass: binding_energy + pair.constituent_mass(),
        diagnostics: Diagnostics {
            r0_iterations: root.iterations,
            r0_residual: root.residual,
            r0_roots: root.roots,
            q_lbar_mismatch: mismatch,
            alpha1_closed_form: first.alpha1_closed_form,
            c1: second.c1,
            c3: second.c3,
            pt_basis_size: basis,
            denominator: energy.denominator,
            centrifugal: energy.centrifugal,
            warnings,
        },
    })
}
