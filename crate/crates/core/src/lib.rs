//! Exact construction and verification of the level-17 modular objects
//! behind a family of Ramanujan–Sato series for 1/π.
//!
//! The crate builds the modular functions r, s and the weight-two forms z, Ω
//! (plus the derived Hauptmodul pair x, w) as exact truncated q-expansions,
//! proves the algebraic identities relating them by Sturm-bound expansion,
//! generates the holonomic coefficient sequence A_n, derives and verifies
//! modular equations Ψ_n, certifies the singular values of x at CM points,
//! and evaluates the resulting 1/π series to arbitrary precision.

pub mod bigfloat;
pub mod catalog;
pub mod forms;
pub mod modeq;
pub mod piseries;
pub mod recurrence;
pub mod series;
pub mod singular;
pub mod surd;

pub use catalog::{IdentityReport, ModularCatalog};
pub use recurrence::CoeffSequence;
pub use series::{pochhammer_block, EtaQuotientSpec, QSeries, SeriesError, Q};
pub use surd::QuadSurd;

/// Crate-level error type aggregating the module-specific failures.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Series(#[from] series::SeriesError),
    #[error("unknown catalog name {0:?}")]
    UnknownName(String),
    #[error("unknown identity {0:?}")]
    UnknownIdentity(String),
    #[error(transparent)]
    Modeq(#[from] modeq::ModeqError),
    #[error(transparent)]
    Numeric(#[from] bigfloat::NumericError),
    #[error(transparent)]
    Surd(#[from] surd::SurdError),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
