//! Anharmonic corrections α₁, α₂ and the energy terms they feed.

use crate::error::{Error, Result};
use crate::perturbation::{alpha_from_series, rspt_coefficients_checked, AnharmonicProblem};

/// Standard closed form of the λ² coefficient:
///
/// ```text
/// α₁ = (1+2n)ε̄₂ + 3(1+2n+2n²)ε̄₄ − ω⁻¹[ε̄₁² + 6(1+2n)ε̄₁ε̄₃ + (11+30n+30n²)ε̄₃²]
/// ```
pub fn alpha1_closed_form(n: u32, omega: f64, eps_bar: [f64; 4]) -> f64 {
    let n = n as f64;
    let [e1, e2, e3, e4] = eps_bar;
    (1.0 + 2.0 * n) * e2 + 3.0 * (1.0 + 2.0 * n + 2.0 * n * n) * e4
        - (e1 * e1 + 6.0 * (1.0 + 2.0 * n) * e1 * e3 + (11.0 + 30.0 * n + 30.0 * n * n) * e3 * e3)
            / omega
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaCorrections {
    pub alpha1: f64,
    /// Present once the δ̄'s were supplied.
    pub alpha2: Option<f64>,
    pub alpha1_closed_form: f64,
    /// Odd-order series coefficients (zero up to rounding).
    pub c1: f64,
    pub c3: f64,
}

/// α₁ (and α₂ when `delta_bar` is given) as the λ² and λ⁴ coefficients of
/// the anharmonic oscillator built from the scaled coefficients.
///
/// In the coordinate `y = √(2μω)·x` the perturbation `εᵢxⁱ` reads `ε̄ᵢyⁱ` and
/// the oscillator keeps its levels `(k+½)ω` with mass `1/(2ω)`, so only `ω`
/// and the bars are needed.
///
/// With `use_series = false` the closed form is used for α₁ and α₂ is 0.
pub fn alpha_corrections(
    n: u32,
    omega: f64,
    eps_bar: [f64; 4],
    delta_bar: Option<[f64; 6]>,
    basis_size: usize,
    use_series: bool,
) -> Result<AlphaCorrections> {
    let closed = alpha1_closed_form(n, omega, eps_bar);
    if !use_series {
        return Ok(AlphaCorrections {
            alpha1: closed,
            alpha2: delta_bar.map(|_| 0.0),
            alpha1_closed_form: closed,
            c1: 0.0,
            c3: 0.0,
        });
    }
    let problem =
        AnharmonicProblem::from_coefficients(0.5 / omega, omega, n as usize, eps_bar, delta_bar)?;
    let series = rspt_coefficients_checked(&problem, basis_size)?;
    let (alpha1, alpha2) = alpha_from_series(&series)?;

    // Compare on the size of the individual terms so that a near-cancelling
    // α₁ does not trip on rounding.
    let [e1, e2, e3, e4] = eps_bar.map(f64::abs);
    let nf = n as f64;
    let terms = (1.0 + 2.0 * nf) * e2
        + 3.0 * (1.0 + 2.0 * nf + 2.0 * nf * nf) * e4
        + (e1 * e1 + 6.0 * (1.0 + 2.0 * nf) * e1 * e3 + (11.0 + 30.0 * nf * (1.0 + nf)) * e3 * e3)
            / omega;
    let scale = alpha1.abs().max(closed.abs()).max(terms);
    if (alpha1 - closed).abs() > 1e-8 * scale {
        return Err(Error::InternalInconsistency(format!(
            "alpha1 from the series ({alpha1:e}) and the closed form ({closed:e}) disagree"
        )));
    }
    Ok(AlphaCorrections {
        alpha1,
        alpha2: delta_bar.map(|_| alpha2),
        alpha1_closed_form: closed,
        c1: series.c1,
        c3: series.c3,
    })
}

/// Second and third summands of the energy expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionEnergies {
    /// `(β(β+1)/2μ + α₁)/(r0²D)`.
    pub e2_term: f64,
    /// `α₂/(r0²D·l̄)`.
    pub e3_term: f64,
    /// `E₂ = Q·(β(β+1)/2μ + α₁)/(r0²D)`, the input to `δ₁, δ₂`.
    pub e2: f64,
    /// `E₃ = Q·α₂/(r0²D)`.
    pub e3: f64,
    /// `β(β+1)/2μ`, the centrifugal remainder carried with α₁.
    pub centrifugal: f64,
    /// `D = 1 + (E₀ − V(r0))/η`.
    pub denominator: f64,
}

/// `E₂/l̄²` and `E₃/l̄³` (with `Q = l̄²`).
///
/// The shifted centrifugal barrier leaves `β(β+1)/(2μr²)` at order `l̄⁰`,
/// which enters alongside α₁. `alpha2 = None` yields `E₃ = 0`.
#[allow(clippy::too_many_arguments)]
pub fn correction_energies(
    r0: f64,
    q: f64,
    e0: f64,
    v_at_r0: f64,
    mu: f64,
    eta: f64,
    beta: f64,
    alpha1: f64,
    alpha2: Option<f64>,
    lbar: f64,
) -> Result<CorrectionEnergies> {
    let denominator = 1.0 + (e0 - v_at_r0) / eta;
    if !(denominator > 0.0) {
        return Err(Error::InternalInconsistency(format!(
            "non-positive denominator 1 + (E0 - V)/eta = {denominator}"
        )));
    }
    let other = (1.0 + q / (mu * eta * r0 * r0)).sqrt();
    if (denominator - other).abs() > 1e-12 * other {
        return Err(Error::InternalInconsistency(format!(
            "denominator {denominator} disagrees with sqrt(1 + Q/(mu eta r0^2)) = {other}"
        )));
    }
    let centrifugal = beta * (beta + 1.0) / (2.0 * mu);
    let base = r0 * r0 * denominator;
    let e2 = q * (centrifugal + alpha1) / base;
    let a2 = alpha2.unwrap_or(0.0);
    Ok(CorrectionEnergies {
        e2_term: (centrifugal + alpha1) / base,
        e3_term: a2 / (base * lbar),
        e2,
        e3: q * a2 / base,
        centrifugal,
        denominator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pair::ParticlePair;
    use crate::slet::geometry::leading_energy_from;
    use proptest::prelude::*;

    #[test]
    fn closed_form_examples() {
        let omega = 1.7;
        assert!((alpha1_closed_form(0, omega, [0.3, 0.0, 0.0, 0.0]) + 0.09 / omega).abs() < 1e-15);
        assert!((alpha1_closed_form(1, omega, [0.0, 0.0, 0.0, 0.2]) - 15.0 * 0.2).abs() < 1e-14);
    }

    #[test]
    fn series_reproduces_closed_form_examples() {
        let omega = 2.3;
        let a = alpha_corrections(0, omega, [0.4, 0.0, 0.0, 0.0], None, 40, true).unwrap();
        assert!((a.alpha1 + 0.16 / omega).abs() < 1e-13);
        assert!(a.alpha2.is_none());
        let a = alpha_corrections(1, omega, [0.0, 0.0, 0.0, 0.1], None, 41, true).unwrap();
        assert!((a.alpha1 - 1.5).abs() < 1e-13);
    }

    #[test]
    fn zero_alphas_give_zero_terms() {
        let pair = ParticlePair::equal(1.45).unwrap();
        let e0 = leading_energy_from(0.3, &pair, 2.0, 4.0);
        let c = correction_energies(2.0, 4.0, e0, 0.3, 0.725, 2.9, -1.0, 0.0, Some(0.0), 2.0)
            .unwrap();
        assert_eq!(c.e3_term, 0.0);
        // β = −1 also removes the centrifugal remainder.
        assert_eq!(c.e2_term, 0.0);
    }

    #[test]
    fn inconsistent_denominator_is_rejected() {
        let err = correction_energies(2.0, 4.0, -10.0, 0.3, 0.725, 2.9, -1.0, 0.1, None, 2.0)
            .unwrap_err();
        assert!(matches!(err, Error::InternalInconsistency(_)));
        let err = correction_energies(2.0, 4.0, 0.9, 0.3, 0.725, 2.9, -1.0, 0.1, None, 2.0)
            .unwrap_err();
        assert!(matches!(err, Error::InternalInconsistency(_)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn closed_form_matches_series(
            e1 in -1.0f64..1.0,
            e2 in -1.0f64..1.0,
            e3 in -1.0f64..1.0,
            e4 in -1.0f64..1.0,
            omega in 0.3f64..5.0,
            n in 0u32..5,
        ) {
            let a = alpha_corrections(n, omega, [e1, e2, e3, e4], None, n as usize + 40, true);
            let a = a.unwrap();
            let closed = a.alpha1_closed_form;
            let scale = a.alpha1.abs().max(closed.abs());
            prop_assume!(scale > 1e-12);
            prop_assert!((a.alpha1 - closed).abs() <= 1e-8 * scale);
        }

        #[test]
        fn odd_only_ground_state_is_lowered(
            e1 in -1.0f64..1.0,
            e3 in -1.0f64..1.0,
            omega in 0.3f64..5.0,
        ) {
            let a = alpha_corrections(0, omega, [e1, 0.0, e3, 0.0], None, 40, true).unwrap();
            prop_assert!(a.alpha1 <= 0.0);
            prop_assert!(a.c1.abs() <= 1e-10 && a.c3.abs() <= 1e-10);
        }
    }
}
