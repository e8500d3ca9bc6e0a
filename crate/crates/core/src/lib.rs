//! Minimum stabbing number perfect matchings and spanning trees of planar
//! point sets.
//!
//! The crate builds cut-based LP relaxations over the complete geometric graph,
//! solves them with a bounded-variable simplex and lazily separated blossom or
//! connectivity cuts, and derives integral structures by iterated rounding or
//! branch-and-bound. Brute-force enumeration certifies results at small scale.

pub mod cuts;
pub mod error;
pub mod geom;
pub mod instance;
pub mod lp;
pub mod models;
pub mod oracle;
pub mod solve;

pub use error::{Error, Result};
