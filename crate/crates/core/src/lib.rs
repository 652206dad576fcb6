//! Locality-sensitive hashing for the (r1, r2)-near neighbor problem.
//!
//! Four constructions share one query loop: independent concatenations,
//! tensored collections, pairwise-independent sampling from pools, and a
//! hybrid of the last two. Parameters are sized with exact arithmetic in
//! [`calc`]; [`oracle`] holds the ground truth used to check them.

pub mod calc;
pub mod cli;
pub mod error;
pub mod families;
pub mod index;
pub mod oracle;
pub mod par;
pub mod points;
pub mod schemes;
pub mod sketch;

pub use error::{Error, Result};
