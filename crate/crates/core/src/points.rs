//! Point types for the two supported spaces.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// A fixed-length bit vector, packed little-endian into 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % 64 == 0 {
                words.push(0);
            }
            if b {
                words[len / 64] |= 1 << (len % 64);
            }
            len += 1;
        }
        Self { len, words }
    }

    /// Builds from packed words; bits at positions `>= len` must be zero.
    pub fn from_words(len: usize, words: Vec<u64>) -> Result<Self> {
        if words.len() != len.div_ceil(64) {
            return Err(Error::LengthMismatch {
                expected: len.div_ceil(64),
                found: words.len(),
            });
        }
        if !len.is_multiple_of(64) && words[len / 64] >> (len % 64) != 0 {
            return Err(Error::invalid("bits set beyond the vector length"));
        }
        Ok(Self { len, words })
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self::from_bits((0..len).map(|_| rng.random::<bool>()))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn complement(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if !self.len.is_multiple_of(64) {
            if let Some(last) = words.last_mut() {
                *last &= (1 << (self.len % 64)) - 1;
            }
        }
        Self {
            len: self.len,
            words,
        }
    }

    /// Hamming distance. Panics on length mismatch.
    pub fn hamming(&self, other: &Self) -> u32 {
        assert_eq!(self.len, other.len, "hamming distance on unequal lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => return Err(Error::invalid(format!("unexpected character {other:?} in bit string"))),
            }
        }
        Ok(Self::from_bits(bits))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A finite set of integers, stored sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetPoint(Vec<u32>);

impl SetPoint {
    /// Sorts and deduplicates the input.
    pub fn new(mut elems: Vec<u32>) -> Self {
        elems.sort_unstable();
        elems.dedup();
        Self(elems)
    }

    /// Requires a strictly increasing sequence.
    pub fn from_sorted(elems: Vec<u32>) -> Result<Self> {
        if elems.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("set elements must be strictly increasing"));
        }
        Ok(Self(elems))
    }

    pub fn elements(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn intersection_size(&self, other: &Self) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        let (a, b) = (&self.0, &other.0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    /// Jaccard similarity `|A ∩ B| / |A ∪ B|`; two empty sets have similarity 1.
    pub fn jaccard(&self, other: &Self) -> f64 {
        let inter = self.intersection_size(other);
        let union = self.len() + other.len() - inter;
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }
}

impl fmt::Display for SetPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}
