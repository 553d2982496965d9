use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two constituents of masses `m1`, `m2` (GeV) together with the derived
/// reduced mass `mu`, the relativistic parameter `nu = m1³m2³/(m1³+m2³)` and
/// `eta = nu/mu²`.
///
/// The nonrelativistic limit is represented by `eta = +∞`; every formula in
/// the crate that divides by `eta` then drops the corresponding term exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticlePair {
    m1: f64,
    m2: f64,
    mu: f64,
    nu: f64,
    eta: f64,
}

impl ParticlePair {
    pub fn new(m1: f64, m2: f64) -> Result<Self> {
        if !(m1.is_finite() && m1 > 0.0 && m2.is_finite() && m2 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "masses must be positive and finite, got m1 = {m1}, m2 = {m2}"
            )));
        }
        let mu = m1 * m2 / (m1 + m2);
        let (c1, c2) = (m1.powi(3), m2.powi(3));
        let nu = c1 * c2 / (c1 + c2);
        let eta = nu / (mu * mu);
        Ok(Self {
            m1,
            m2,
            mu,
            nu,
            eta,
        })
    }

    pub fn equal(m: f64) -> Result<Self> {
        Self::new(m, m)
    }

    /// Same masses with the `(v/c)²` corrections switched off (`eta = ∞`).
    pub fn nonrelativistic(mut self) -> Self {
        self.eta = f64::INFINITY;
        self
    }

    pub fn is_nonrelativistic(&self) -> bool {
        self.eta.is_infinite()
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `m1 + m2`; the bound-state mass is this plus the binding energy.
    pub fn constituent_mass(&self) -> f64 {
        self.m1 + self.m2
    }
}
