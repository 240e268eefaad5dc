//! Cusped Cayley graphs, singular-value diagnostics and flow-space contraction
//! checks for representations of relatively hyperbolic groups.
//!
//! Modules, bottom-up:
//! - [`group`]: words, exact matrix images, ball enumeration, peripheral bookkeeping.
//! - [`linalg`]: singular values, wedge powers, Grassmannians, inner products.
//! - [`cusp`]: combinatorial horoballs and truncated cusped Cayley graphs.
//! - [`diagnostics`]: gap profiles, envelope fits, limit sets, growth laws.
//! - [`flow`]: thick/thin segmentation, splittings, norm fields, kappa.
//! - [`report`]: run configuration, orchestration, reports and comparison.

pub mod cusp;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod group;
pub mod linalg;
pub mod report;

pub use error::{Error, Result};
