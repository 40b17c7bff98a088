//! The space of Lax tuples, the period map and everything built on it.

mod dtoda;
mod flow;
mod free_energy;
mod generating;
pub mod grunsky;
mod invert;
mod lax;
mod omega;
mod periods;
mod potentials;
mod vector_field;

pub use dtoda::{dtoda_reduce, dtoda_residual, DTodaSeries};
pub use flow::{flow, flow_difference, Direction};
pub use free_energy::{closed_form_f_monomial, free_energy, j_functions, JFunctions};
pub use generating::{Generating, GeneratingSet, Term};
pub use grunsky::{expand_omega_in_chart, grunsky_table, GrunskyTable, OmegaExpansion};
pub use invert::{invert_period_map, InvertOptions, TimeTarget};
pub use lax::{Disk, DiskSamples, LaxTuple, Tangent};
pub use omega::{faber_omega, omega_projection, Omega};
pub use periods::{period_map, period_times, PeriodData};
pub use potentials::{
    orlov, phi, phi_with_tails, s_function, string_residual, SFunction, StringResidual,
};
pub use vector_field::whitham_vector_field;

use thiserror::Error;

use crate::contour::ContourError;
use crate::laurent::LaurentError;

/// Time index `(α, n)`: `marker` 0 is the point at infinity, `a ≥ 1` the
/// finite marked points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct TimeIndex {
    pub marker: usize,
    pub n: usize,
}

impl TimeIndex {
    pub fn new(marker: usize, n: usize) -> Self {
        TimeIndex { marker, n }
    }

    /// Every flow index with `n ≤ depth` for `m` finite marked points.
    pub fn all(m: usize, depth: usize) -> Vec<TimeIndex> {
        let mut out: Vec<TimeIndex> = (1..=depth).map(|n| TimeIndex::new(0, n)).collect();
        for a in 1..=m {
            out.extend((0..=depth).map(|n| TimeIndex::new(a, n)));
        }
        out
    }
}

impl std::fmt::Display for TimeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.marker, self.n)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HierarchyError {
    #[error("invalid Lax tuple: {0}")]
    InvalidLax(String),
    #[error("contour overlap: {0}")]
    ContourOverlap(String),
    #[error("degenerate generating function on disk {disk}: {detail}")]
    DegenerateH { disk: usize, detail: String },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("split inconsistent: residual {0:e}")]
    SplitInconsistent(f64),
    #[error("contour collision during flow: {0}")]
    ContourCollision(String),
    #[error("Jacobian singular at the current iterate")]
    JacobianSingular,
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("J-function needs a logarithm for term z0^{j} za^{k}")]
    JLogObstruction { j: i32, k: i32 },
    #[error("truncation too short for {what}: tail estimate {tail:e}")]
    TruncationTooShort { what: String, tail: f64 },
    #[error("operation needs M = 1, got M = {0}")]
    WrongM(usize),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Contour(#[from] ContourError),
}

impl HierarchyError {
    /// Variant name, used as the error tag in reports and exit messages.
    pub fn kind(&self) -> &'static str {
        match self {
            HierarchyError::InvalidLax(_) => "InvalidLax",
            HierarchyError::ContourOverlap(_) => "ContourOverlap",
            HierarchyError::DegenerateH { .. } => "DegenerateH",
            HierarchyError::IndexOutOfRange(_) => "IndexOutOfRange",
            HierarchyError::SplitInconsistent(_) => "SplitInconsistent",
            HierarchyError::ContourCollision(_) => "ContourCollision",
            HierarchyError::JacobianSingular => "JacobianSingular",
            HierarchyError::NoConvergence { .. } => "NoConvergence",
            HierarchyError::JLogObstruction { .. } => "JLogObstruction",
            HierarchyError::TruncationTooShort { .. } => "TruncationTooShort",
            HierarchyError::WrongM(_) => "WrongM",
            HierarchyError::Laurent(_) => "LaurentError",
            HierarchyError::Contour(_) => "ContourError",
        }
    }
}

pub type Result<T> = std::result::Result<T, HierarchyError>;
