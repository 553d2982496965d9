use std::fmt;

use thiserror::Error;

/// Pipeline stage that produced an error, used to label failures bubbling
/// out of [`crate::slet::solve`] and [`crate::oracle::solve_selfconsistent`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    SolveR0,
    Geometry,
    LeadingEnergy,
    TaylorCoefficients,
    AlphaCorrections,
    CorrectionEnergies,
    FallToCenter,
    EnergyScan,
    Eigenvalue,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::SolveR0 => "solve_r0",
            Stage::Geometry => "geometry_at",
            Stage::LeadingEnergy => "leading_energy",
            Stage::TaylorCoefficients => "taylor_coefficients",
            Stage::AlphaCorrections => "alpha_corrections",
            Stage::CorrectionEnergies => "correction_energies",
            Stage::FallToCenter => "fall_to_center_check",
            Stage::EnergyScan => "solve_selfconsistent",
            Stage::Eigenvalue => "nth_eigenvalue",
        };
        f.write_str(name)
    }
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidInput,
    Convergence,
    Unphysical,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("derivative order {0} is not supported (maximum is 6)")]
    UnsupportedOrder(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("potential is not increasing at r0 = {r0} (V'(r0) = {slope})")]
    NonMonotonePoint { r0: f64, slope: f64 },

    #[error("no harmonic regime at r0 = {r0}: frequency bracket is {bracket}")]
    NoHarmonicRegime { r0: f64, bracket: f64 },

    #[error("no sign change of the r0 residual on [{lo}, {hi}]")]
    BracketingFailure { lo: f64, hi: f64 },

    #[error("root finder did not converge after {iterations} iterations")]
    Convergence { iterations: usize },

    #[error("delta_1 and delta_2 need E2, which is not available yet")]
    Sequencing,

    #[error("perturbation series changed by {change:e} (relative) when the basis grew from {basis} to {doubled}")]
    BasisNotConverged {
        basis: usize,
        doubled: usize,
        change: f64,
    },

    #[error("odd-order series coefficients are not zero (c1 = {c1:e}, c3 = {c3:e})")]
    ParityViolation { c1: f64, c3: f64 },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("coupling alpha = {alpha} is unphysical for n = {n} (needs alpha < 2n + 2)")]
    UnphysicalCoupling { alpha: f64, n: u32 },

    #[error("supercritical inverse-square attraction: strength {strength} <= -1/4")]
    SupercriticalCoupling { strength: f64 },

    #[error("no sign change of g(E) on [{lo}, {hi}]; sweep: {sweep}")]
    WindowNoSignChange { lo: f64, hi: f64, sweep: String },

    #[error("converged level has {found} nodes, expected {expected}")]
    LevelIdentification { expected: u32, found: u32 },

    #[error("bisection interval exhausted while isolating eigenvalue {index}")]
    EigenvalueBisection { index: usize },

    #[error("{stage}: {source}")]
    AtStage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(self, stage: Stage) -> Self {
        match self {
            Error::AtStage { .. } => self,
            other => Error::AtStage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// Innermost error, with any stage labels peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStage { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self.root() {
            Error::Domain(_)
            | Error::UnsupportedOrder(_)
            | Error::InvalidInput(_)
            | Error::Sequencing => ErrorKind::InvalidInput,
            Error::BracketingFailure { .. }
            | Error::Convergence { .. }
            | Error::BasisNotConverged { .. }
            | Error::WindowNoSignChange { .. }
            | Error::LevelIdentification { .. }
            | Error::EigenvalueBisection { .. } => ErrorKind::Convergence,
            Error::NonMonotonePoint { .. }
            | Error::NoHarmonicRegime { .. }
            | Error::UnphysicalCoupling { .. }
            | Error::SupercriticalCoupling { .. } => ErrorKind::Unphysical,
            Error::ParityViolation { .. } | Error::InternalInconsistency(_) | Error::AtStage { .. } => {
                ErrorKind::Internal
            }
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}
