//! Exact sublinear expectations on finite filtered sample spaces.
//!
//! The sample space is a finite tree whose levels generate the filtration.
//! Every non-leaf node carries a finite set of one-step laws; pasting them
//! gives a rectangular credal set Θ and the sublinear expectation
//! `E(X) = sup_{θ∈Θ} E_θ[X]`, computed by backward induction.
//!
//! On top of the engine sit verification tools for the classical results
//! that carry over to this setting: Doob's and Kolmogorov's inequalities,
//! optional sampling, uniform integrability, Peng independence, and a
//! seeded simulation harness for the strong laws of large numbers.

pub mod credal;
pub mod distribution;
pub mod error;
pub mod exact;
pub mod inequality;
pub mod integrability;
pub mod lln;
pub mod martingale;
pub mod testing;
pub mod tree;

pub use credal::{CredalKernel, CredalModel, MeasureSet, StrategyMeasure};
pub use error::{Error, Result};
pub use martingale::{ProcessClass, ProcessKind};
pub use tree::{AdaptedProcess, Event, NodeId, RandomVariable, StoppingTime, TreeSpace};

/// Engine version string echoed in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
