//! Taylor coefficients of the shifted radial equation about `r0`.

use crate::error::{Error, Result};
use crate::pair::ParticlePair;
use crate::potentials::PotentialModel;

/// `ε₁..ε₄` and `δ₁..δ₆`. `δ₁` and `δ₂` involve E₂ and stay unset until it is
/// known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorCoefficients {
    pub eps: [f64; 4],
    /// `δ₃..δ₆`.
    pub delta_tail: [f64; 4],
    /// `δ₁, δ₂`.
    pub delta_head: Option<[f64; 2]>,
}

impl TaylorCoefficients {
    pub fn is_complete(&self) -> bool {
        self.delta_head.is_some()
    }

    pub fn delta(&self) -> Result<[f64; 6]> {
        let [d1, d2] = self.delta_head.ok_or(Error::Sequencing)?;
        let [d3, d4, d5, d6] = self.delta_tail;
        Ok([d1, d2, d3, d4, d5, d6])
    }

    /// `ε̄ᵢ = εᵢ/(2μω)^{i/2}`.
    pub fn eps_bar(&self, mu: f64, omega: f64) -> [f64; 4] {
        scale(self.eps, mu, omega)
    }

    /// `δ̄ᵢ = δᵢ/(2μω)^{i/2}`.
    pub fn delta_bar(&self, mu: f64, omega: f64) -> Result<[f64; 6]> {
        Ok(scale(self.delta()?, mu, omega))
    }
}

fn scale<const N: usize>(c: [f64; N], mu: f64, omega: f64) -> [f64; N] {
    let s = (2.0 * mu * omega).sqrt();
    let mut out = c;
    for (i, v) in out.iter_mut().enumerate() {
        *v /= s.powi(i as i32 + 1);
    }
    out
}

const FACTORIAL: [f64; 7] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];

/// Coefficients at `r0`. Pass `e2 = None` for the partial set (ε's and
/// `δ₃..δ₆`); `Some(E₂)` also fills `δ₁, δ₂`.
pub fn taylor_coefficients(
    potential: &PotentialModel,
    pair: &ParticlePair,
    r0: f64,
    q: f64,
    beta: f64,
    e0: f64,
    e2: Option<f64>,
) -> Result<TaylorCoefficients> {
    let mu = pair.mu();
    let eta = pair.eta();
    let v = potential.derivatives(r0)?;
    let gamma = potential.gamma_derivatives(pair, r0)?;
    // γ⁽ʲ⁾ + V⁽ʲ⁾E₀/η, scaled by r0^{j+2}/(j! Q).
    let g = |j: usize| (gamma[j] + v[j] * e0 / eta) * r0.powi(j as i32 + 2) / (FACTORIAL[j] * q);

    let b1 = 2.0 * beta + 1.0;
    let eps = [
        -b1 / mu,
        3.0 * b1 / (2.0 * mu),
        -2.0 / mu + g(3),
        2.5 / mu + g(4),
    ];
    let delta_tail = [
        -2.0 * b1 / mu,
        5.0 * b1 / (2.0 * mu),
        -3.0 / mu + g(5),
        3.5 / mu + g(6),
    ];
    let delta_head = e2.map(|e2| {
        let bb = beta * (beta + 1.0);
        [
            -bb / mu + r0.powi(3) * v[1] * e2 / (q * eta),
            1.5 * bb / mu + r0.powi(4) * v[2] * e2 / (2.0 * q * eta),
        ]
    });
    Ok(TaylorCoefficients {
        eps,
        delta_tail,
        delta_head,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_shift_factor() {
        let pot = PotentialModel::cornell(0.25, 0.18);
        let pair = ParticlePair::equal(1.45).unwrap();
        let c = taylor_coefficients(&pot, &pair, 2.0, 4.0, -0.5, 0.3, None).unwrap();
        assert_eq!(c.eps[0], 0.0);
        assert_eq!(c.eps[1], 0.0);
        assert_eq!(c.delta_tail[0], 0.0);
        assert_eq!(c.delta_tail[1], 0.0);
    }

    #[test]
    fn sequencing() {
        let pot = PotentialModel::oscillator(1.0);
        let pair = ParticlePair::equal(1.31).unwrap();
        let c = taylor_coefficients(&pot, &pair, 1.0, 2.0, -1.2, 1.0, None).unwrap();
        assert!(!c.is_complete());
        assert!(matches!(c.delta(), Err(Error::Sequencing)));
        assert!(matches!(c.delta_bar(0.655, 2.0), Err(Error::Sequencing)));
        let c = taylor_coefficients(&pot, &pair, 1.0, 2.0, -1.2, 1.0, Some(0.1)).unwrap();
        assert!(c.delta().is_ok());
    }

    #[test]
    fn linear_third_order_only_from_gamma() {
        // V = br: V‴ = 0, and γ‴ = −(1/2η)(b²r²)‴ = 0 as well, so ε₃ = −2/μ.
        let pot = PotentialModel::linear(0.18);
        let pair = ParticlePair::equal(1.45).unwrap();
        let c = taylor_coefficients(&pot, &pair, 3.0, 5.0, -1.1, 0.8, None).unwrap();
        assert!((c.eps[2] + 2.0 / pair.mu()).abs() < 1e-14);
        // ε₄ likewise has no potential contribution.
        assert!((c.eps[3] - 2.5 / pair.mu()).abs() < 1e-14);
    }

    #[test]
    fn oscillator_sixth_order() {
        // V = r²/2: V⁽⁶⁾ = 0 and (r⁴/4)⁽⁶⁾ = 0, so δ₆ = 7/(2μ) exactly.
        let pot = PotentialModel::oscillator(1.0);
        let pair = ParticlePair::equal(1.31).unwrap();
        let c = taylor_coefficients(&pot, &pair, 1.4, 3.0, -1.3, 1.7, Some(0.02)).unwrap();
        assert_eq!(c.delta_tail[3], 3.5 / pair.mu());
        // δ₅ also has no potential part: (r⁴/4)⁽⁵⁾ = 0.
        assert_eq!(c.delta_tail[2], -3.0 / pair.mu());
        // ε₄ picks up γ⁗ = −(1/2η)·(r⁴/4)⁗ = −3/η.
        let q = 3.0;
        let expected = 2.5 / pair.mu() + 1.4f64.powi(6) / (24.0 * q) * (-3.0 / pair.eta());
        assert!((c.eps[3] - expected).abs() < 1e-14);
    }

    #[test]
    fn scaling() {
        let c = TaylorCoefficients {
            eps: [1.0, 1.0, 1.0, 1.0],
            delta_tail: [1.0; 4],
            delta_head: Some([1.0, 1.0]),
        };
        // 2μω = 4 → factors 2, 4, 8, ...
        let e = c.eps_bar(1.0, 2.0);
        assert_eq!(e, [0.5, 0.25, 0.125, 0.0625]);
        let d = c.delta_bar(1.0, 2.0).unwrap();
        assert_eq!(d[5], 1.0 / 64.0);
    }
}
