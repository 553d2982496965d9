//! Closed-form S-wave Coulomb results for equal masses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoulombClosedForm {
    pub q: f64,
    pub r0: f64,
    pub e0: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoulombReference {
    pub exact_mass: f64,
    pub upper_bound_mass: f64,
}

fn check(m: f64, alpha: f64, n: u32) -> Result<f64> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::InvalidInput(format!("mass must be positive, got {m}")));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidInput(format!(
            "coupling must be positive, got {alpha}"
        )));
    }
    let k = 2.0 * n as f64 + 2.0;
    if alpha >= k {
        return Err(Error::UnphysicalCoupling { alpha, n });
    }
    Ok(k)
}

/// `2m√(1 − α²/(2n+2)²)`.
fn bound_mass(m: f64, alpha: f64, k: f64) -> f64 {
    2.0 * m * (1.0 - alpha * alpha / (k * k)).sqrt()
}

/// S-wave result for `V = −α/r` and two particles of mass `m`:
/// `Q = (2n+2)²/4`, `r0 = ((2n+2)²/2m)√(1/α² − 1/(2n+2)²)`,
/// `M = 2m√(1 − α²/(2n+2)²)` and `E₀ = M − 2m`.
pub fn coulomb_closed_form(m: f64, alpha: f64, n: u32) -> Result<CoulombClosedForm> {
    let k = check(m, alpha, n)?;
    let mass = bound_mass(m, alpha, k);
    Ok(CoulombClosedForm {
        q: k * k / 4.0,
        r0: k * k / (2.0 * m) * (1.0 / (alpha * alpha) - 1.0 / (k * k)).sqrt(),
        e0: mass - 2.0 * m,
        mass,
    })
}

/// Exact mass `2m/√(1 + α²/(2n+2)²)` and the upper bound
/// `2m√(1 − α²/(2n+2)²)`.
pub fn coulomb_reference(m: f64, alpha: f64, n: u32) -> Result<CoulombReference> {
    let k = check(m, alpha, n)?;
    Ok(CoulombReference {
        exact_mass: 2.0 * m / (1.0 + alpha * alpha / (k * k)).sqrt(),
        upper_bound_mass: bound_mass(m, alpha, k),
    })
}
