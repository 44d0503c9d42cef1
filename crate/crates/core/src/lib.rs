//! Numerical checks of local-realist representations of quantum correlations.
//!
//! - [`hilbert`]: dense complex operators, states, tensor products.
//! - [`spin`]: singlet correlations and the CHSH combination.
//! - [`lhv`]: finite hidden-variable models, exact and sampled.
//! - [`epr`]: position/momentum correlations and classical processes that
//!   reproduce them.
//! - [`spatial`]: detectors localized in space and the large-distance limit.
//! - [`context`]: commuting operator families and lattice translations.

pub mod context;
pub mod epr;
pub mod hilbert;
pub mod lhv;
pub mod sampling;
pub mod spatial;
pub mod spin;

pub use sampling::McEstimate;
pub use spin::{ChshSettings, Correlation, UnitVector3};
