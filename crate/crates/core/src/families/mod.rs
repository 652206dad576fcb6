//! Locality-sensitive hash families.
//!
//! A family is a seeded sampler of hash functions over one point space.
//! Every sampled function maps a point to a single 64-bit word; tuples of
//! values are reduced to one word with [`fingerprint`].

mod bit_sampling;
mod minhash;
mod powered;
pub mod universal;

use std::fmt;

pub use bit_sampling::{bit_sampling_family, BitSample, BitSampling};
pub use minhash::{minhash_family, MinHash, MinHashFn, PERMUTATION_UNIVERSE_LIMIT};
pub use powered::{power, Powered, PoweredFn};
pub use universal::{derive_seed, fingerprint, Fingerprinter, MultiplyShift, PairwiseHash};

use crate::error::{Error, Result};

/// The `(r1, r2, p1, p2)` locality-sensitivity of a family: pairs within `r1`
/// collide with probability at least `p1`, pairs at distance `r2` or more with
/// probability at most `p2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sensitivity {
    r1: f64,
    r2: f64,
    p1: f64,
    p2: f64,
}

impl Sensitivity {
    pub fn new(r1: f64, r2: f64, p1: f64, p2: f64) -> Result<Self> {
        if !(r1 > 0.0 && r1 < r2 && r2.is_finite()) {
            return Err(Error::invalid(format!("need 0 < r1 < r2, got r1 = {r1}, r2 = {r2}")));
        }
        if !(p2 > 0.0 && p2 < p1 && p1 < 1.0) {
            return Err(Error::invalid(format!("need 0 < p2 < p1 < 1, got p1 = {p1}, p2 = {p2}")));
        }
        Ok(Self { r1, r2, p1, p2 })
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }
}

/// Point space descriptor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// `{0,1}^d` under Hamming distance.
    Hamming { d: usize },
    /// Non-empty subsets of `[0, universe)` under Jaccard distance `1 - J`.
    Jaccard { universe: u32 },
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Hamming { d } => write!(f, "hamming d={d}"),
            Space::Jaccard { universe } => write!(f, "jaccard u={universe}"),
        }
    }
}

/// A sampled hash function.
pub trait HashFn<P>: Send + Sync {
    fn hash(&self, x: &P) -> u64;
}

/// A samplable distribution over hash functions on one point space.
///
/// Evaluation assumes a point that passed [`HashFamily::check_point`].
pub trait HashFamily: Clone + Send + Sync {
    type Point: Clone + Send + Sync;
    type Func: HashFn<Self::Point>;

    fn space(&self) -> Space;

    /// Draws a function; equal seeds give functionally identical draws.
    fn sample(&self, seed: u64) -> Self::Func;

    fn check_point(&self, x: &Self::Point) -> Result<()>;

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64;

    /// Exact `Pr[h(x) = h(y)]` for a pair at `distance`.
    fn collision_probability(&self, distance: f64) -> f64;

    /// Sensitivity for the radii `r1 < r2`.
    fn sensitivity(&self, r1: f64, r2: f64) -> Result<Sensitivity> {
        Sensitivity::new(
            r1,
            r2,
            self.collision_probability(r1),
            self.collision_probability(r2),
        )
    }
}
