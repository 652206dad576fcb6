//! Word-level universal hashing: seed derivation, the multiply-add-shift
//! scheme over 64-bit keys, pairwise-independent index maps `[L] -> [m]`,
//! and tuple fingerprinting.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of the `index`-th draw of `stream` from a parent seed.
///
/// Distinct `(stream, index)` pairs give unrelated child seeds, which is what
/// lets trials and draws be evaluated in any order.
#[inline]
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let s = mix64(seed ^ 0x6a09_e667_f3bc_c909);
    let s = mix64(s ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    mix64(s ^ index.wrapping_add(0x3c6e_f372_fe94_f82b))
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strongly universal multiply-add-shift hashing of 64-bit keys to 64-bit
/// values: `h(x) = ((a*x + b) mod 2^128) >> 64` with `a, b` uniform 128-bit
/// words. For `x != y` the pair `(h(x), h(y))` is uniform over all pairs, so
/// any fixed subset of output bits is strongly universal as well.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MultiplyShift {
    a: u128,
    b: u128,
}

impl MultiplyShift {
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        Self {
            a: rng.random(),
            b: rng.random(),
        }
    }

    #[inline]
    pub fn hash(&self, x: u64) -> u64 {
        (self.a.wrapping_mul(x as u128).wrapping_add(self.b) >> 64) as u64
    }

    /// Top output bit; `Pr[bit(x) = bit(y)] = 1/2` exactly for `x != y`.
    #[inline]
    pub fn bit(&self, x: u64) -> bool {
        self.hash(x) >> 63 == 1
    }

    /// Maps `x` into `[0, m)` by scaling the 64-bit output.
    #[inline]
    pub fn hash_into(&self, x: u64, m: u64) -> u64 {
        ((self.hash(x) as u128 * m as u128) >> 64) as u64
    }
}

/// Largest domain a [`PairwiseHash`] accepts.
pub const MAX_PAIRWISE_DOMAIN: u64 = 1 << 63;

/// A pairwise-independent function `f: [L] -> [m]` (0-based on both sides).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairwiseHash {
    domain: u64,
    range: u64,
    inner: MultiplyShift,
}

impl PairwiseHash {
    pub fn new(domain: u64, range: u64, seed: u64) -> Result<Self> {
        if domain == 0 || range == 0 {
            return Err(Error::invalid(format!(
                "pairwise hash needs a non-empty domain and range (L = {domain}, m = {range})"
            )));
        }
        if domain > MAX_PAIRWISE_DOMAIN {
            return Err(Error::out_of_range(format!(
                "pairwise hash domain {domain} exceeds 2^63"
            )));
        }
        Ok(Self {
            domain,
            range,
            inner: MultiplyShift::from_seed(seed),
        })
    }

    pub fn domain(&self) -> u64 {
        self.domain
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    #[inline]
    pub fn eval(&self, l: u64) -> u64 {
        debug_assert!(l < self.domain);
        self.inner.hash_into(l, self.range)
    }

    /// The full function table `[f(0), ..., f(L-1)]`.
    pub fn table(&self) -> Vec<u64> {
        (0..self.domain).map(|l| self.eval(l)).collect()
    }
}

const MERSENNE_61: u64 = (1 << 61) - 1;

#[inline]
fn mul_mod_m61(a: u64, b: u64) -> u64 {
    let p = a as u128 * b as u128;
    let lo = (p as u64) & MERSENNE_61;
    let hi = (p >> 61) as u64;
    let s = lo + hi;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

#[inline]
fn add_mod_m61(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

/// Seeded tuple digest: a polynomial hash over GF(2^61 - 1) evaluated at a
/// random point (each word contributes its two 32-bit halves, the tuple
/// length is the leading coefficient), followed by a multiply-add-shift
/// finalizer to spread the 61-bit residue over a full word.
///
/// Two distinct tuples of length at most `n` collide with probability at most
/// `(2n + 1) / (2^61 - 1) + 2^-64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fingerprinter {
    point: u64,
    finalizer: MultiplyShift,
}

impl Fingerprinter {
    pub fn new(seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        Self {
            point: rng.random_range(1..MERSENNE_61),
            finalizer: MultiplyShift::from_seed(rng.random()),
        }
    }

    #[inline]
    pub fn fingerprint(&self, values: &[u64]) -> u64 {
        let mut acc = (values.len() as u64) % MERSENNE_61;
        for &v in values {
            acc = add_mod_m61(mul_mod_m61(acc, self.point), v & 0xffff_ffff);
            acc = add_mod_m61(mul_mod_m61(acc, self.point), v >> 32);
        }
        self.finalizer.hash(acc)
    }

    /// Fingerprint of a tuple given as an iterator; same value as
    /// [`Fingerprinter::fingerprint`] on the collected slice.
    #[inline]
    pub fn fingerprint_iter<I>(&self, len: usize, values: I) -> u64
    where
        I: IntoIterator<Item = u64>,
    {
        let mut acc = (len as u64) % MERSENNE_61;
        let mut seen = 0usize;
        for v in values {
            acc = add_mod_m61(mul_mod_m61(acc, self.point), v & 0xffff_ffff);
            acc = add_mod_m61(mul_mod_m61(acc, self.point), v >> 32);
            seen += 1;
        }
        debug_assert_eq!(seen, len);
        self.finalizer.hash(acc)
    }
}

const DEFAULT_FINGERPRINT_SEED: u64 = 0x4c53_4858_3166_7072;

/// Fingerprint with the crate-wide default key.
pub fn fingerprint(values: &[u64]) -> u64 {
    static DEFAULT: OnceLock<Fingerprinter> = OnceLock::new();
    DEFAULT
        .get_or_init(|| Fingerprinter::new(DEFAULT_FINGERPRINT_SEED))
        .fingerprint(values)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn mersenne_arithmetic() {
        let a = MERSENNE_61 - 1;
        assert_eq!(mul_mod_m61(a, a), 1);
        assert_eq!(add_mod_m61(a, 1), 0);
        assert_eq!(mul_mod_m61(1 << 40, 1 << 40), 1 << 19);
    }

    #[test]
    fn pairwise_rejects_empty() {
        assert!(PairwiseHash::new(0, 3, 1).is_err());
        assert!(PairwiseHash::new(3, 0, 1).is_err());
        assert!(PairwiseHash::new(u64::MAX, 3, 1).is_err());
    }

    #[test]
    fn pairwise_single_bucket() {
        let f = PairwiseHash::new(100, 1, 42).unwrap();
        assert!(f.table().iter().all(|&v| v == 0));
    }

    #[test]
    fn pairwise_is_deterministic() {
        let f = PairwiseHash::new(64, 8, 9).unwrap();
        let g = PairwiseHash::new(64, 8, 9).unwrap();
        assert_eq!(f.table(), g.table());
        assert!(f.table().iter().all(|&v| v < 8));
    }

    #[test]
    fn pairwise_collision_rate() {
        // Pr[f(3) = f(17)] <= 1/8, checked against 1/8 + 3 sigma.
        let trials = 100_000u64;
        let hits = (0..trials)
            .filter(|&s| {
                let f = PairwiseHash::new(64, 8, derive_seed(11, 0, s)).unwrap();
                f.eval(3) == f.eval(17)
            })
            .count() as f64;
        let p = 1.0 / 8.0;
        let bound = p + 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
        assert!(hits / trials as f64 <= bound, "{}", hits / trials as f64);
    }

    #[test]
    fn one_bit_map_is_balanced_on_pairs() {
        let trials = 100_000u64;
        let agree = (0..trials)
            .filter(|&s| {
                let h = MultiplyShift::from_seed(s);
                h.bit(5) == h.bit(1 << 40)
            })
            .count() as f64
            / trials as f64;
        let sigma = (0.25 / trials as f64).sqrt();
        assert!((agree - 0.5).abs() <= 3.0 * sigma, "{agree}");
    }

    #[test]
    fn fingerprint_separates_prefixes() {
        let t = [7u64, 0, 0, 1 << 63];
        for len in 0..t.len() {
            assert_ne!(fingerprint(&t[..len]), fingerprint(&t[..len + 1]));
        }
        assert_ne!(fingerprint(&[]), fingerprint(&[0]));
        assert_eq!(fingerprint(&t), fingerprint(&t));
    }

    #[test]
    fn fingerprint_iter_matches_slice() {
        let fp = Fingerprinter::new(3);
        let t = [1u64, u64::MAX, 12345678901234];
        assert_eq!(fp.fingerprint(&t), fp.fingerprint_iter(3, t.iter().copied()));
    }

    #[test]
    fn fingerprint_birthday_bound() {
        let mut rng = rng_from_seed(2024);
        let mut seen = HashSet::with_capacity(1_000_000);
        let mut tuples = HashSet::with_capacity(1_000_000);
        let mut collisions = 0;
        while tuples.len() < 1_000_000 {
            let len = rng.random_range(1..=6);
            let t: Vec<u64> = (0..len).map(|_| rng.random_range(0..1 << 20)).collect();
            if !tuples.insert(t.clone()) {
                continue;
            }
            if !seen.insert(fingerprint(&t)) {
                collisions += 1;
            }
        }
        assert!(collisions <= 3, "{collisions} fingerprint collisions");
    }
}
