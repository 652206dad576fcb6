use super::universal::{derive_seed, fingerprint};
use super::{HashFamily, HashFn, Space};
use crate::error::Result;

const POWER_STREAM: u64 = 0x0070_6f77_6572;

/// The powered family `H^k`: a draw concatenates `k` independent base draws,
/// reduced to one word by fingerprinting. `H^0` is a single constant function
/// and `H^1` coincides with the base family seed for seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Powered<F> {
    base: F,
    k: usize,
}

pub fn power<F: HashFamily>(family: F, k: usize) -> Powered<F> {
    Powered { base: family, k }
}

impl<F: HashFamily> Powered<F> {
    pub fn base(&self) -> &F {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

pub struct PoweredFn<G> {
    parts: Vec<G>,
}

impl<G> PoweredFn<G> {
    pub fn parts(&self) -> &[G] {
        &self.parts
    }
}

impl<G> PoweredFn<G> {
    /// The raw `k`-tuple of base hash values.
    pub fn tuple<P>(&self, x: &P) -> Vec<u64>
    where
        G: HashFn<P>,
    {
        self.parts.iter().map(|h| h.hash(x)).collect()
    }
}

impl<P, G: HashFn<P>> HashFn<P> for PoweredFn<G> {
    fn hash(&self, x: &P) -> u64 {
        match self.parts.as_slice() {
            [] => 0,
            [h] => h.hash(x),
            _ => fingerprint(&self.tuple(x)),
        }
    }
}

impl<F: HashFamily> HashFamily for Powered<F> {
    type Point = F::Point;
    type Func = PoweredFn<F::Func>;

    fn space(&self) -> Space {
        self.base.space()
    }

    fn sample(&self, seed: u64) -> Self::Func {
        let parts = (0..self.k)
            .map(|i| {
                let s = if i == 0 {
                    seed
                } else {
                    derive_seed(seed, POWER_STREAM, i as u64)
                };
                self.base.sample(s)
            })
            .collect();
        PoweredFn { parts }
    }

    fn check_point(&self, x: &Self::Point) -> Result<()> {
        self.base.check_point(x)
    }

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64 {
        self.base.distance(x, y)
    }

    fn collision_probability(&self, distance: f64) -> f64 {
        self.base.collision_probability(distance).powi(self.k as i32)
    }
}
