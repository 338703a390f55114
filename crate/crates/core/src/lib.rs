//! Exact truncated q-series arithmetic for Nahm sums, infinite products and
//! the identities relating them.

pub mod bailey;
pub mod catalog;
pub mod dense;
pub mod discover;
pub mod error;
pub mod int;
pub mod nahm;
pub mod qfactors;
pub mod rat;
pub mod series;

pub use error::{Error, Result};
pub use nahm::{eval_nahm, eval_sumspec, LatticeCoset, NahmSpec, QuadExpr, SumSpec};
pub use qfactors::{eval_product, PochFactor, ProductSpec, SignedMonomial};
pub use rat::Rat;
pub use series::{Comparison, Order, PuiseuxSeries};
