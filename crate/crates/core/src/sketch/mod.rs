//! One-bit similarity sketches.
//!
//! Bit `i` of `s(x)` is `f_i(h_i(x))` for a drawn `h_i` and a universal
//! one-bit map `f_i`, so two points agree on a bit with probability
//! `(1 + Pr[h_i(x) = h_i(y)]) / 2`. A candidate is reported when its sketch
//! distance to the query is below `theta = floor((1 - lambda) b)`.

mod file;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

pub use file::{read_sketches, write_sketches, SKETCH_MAGIC};

use crate::calc::{CollisionProbs, Dd, Prob};
use crate::error::{Error, Result};
use crate::families::universal::{derive_seed, MultiplyShift};
use crate::families::{HashFamily, HashFn, Sensitivity};

const SKETCH_FN_STREAM: u64 = 11;
const SKETCH_BIT_STREAM: u64 = 12;

/// Sketch length and decision threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SketchParams {
    /// Bits per sketch, a multiple of 64.
    pub b: usize,
    /// Agreement fraction `(1 + p2)/2 + (p1 - p2)/4`.
    pub lambda: f64,
    /// Report iff `sketch_distance < theta`.
    pub theta: u64,
}

impl SketchParams {
    /// Fixed `b` (rounded up to a multiple of 64) with the threshold for `probs`.
    pub fn with_bits(bits: usize, probs: &CollisionProbs) -> Result<Self> {
        let (p1, p2) = gap(probs)?;
        if bits == 0 {
            return Err(Error::invalid("sketch length must be positive"));
        }
        let b = bits.div_ceil(64) * 64;
        // 1 - lambda = (2 - p1 - p2) / 4
        let two = BigRational::from_integer(BigInt::from(2));
        let frac = (two - &p1 - &p2) / BigRational::from_integer(BigInt::from(4));
        let theta = (frac.clone() * BigRational::from_integer(BigInt::from(b)))
            .floor()
            .to_integer()
            .to_u64()
            .expect("theta lies in [0, b]");
        let lambda = 1.0 - frac.to_f64().expect("finite");
        Ok(Self { b, lambda, theta })
    }

    pub fn accepts(&self, distance: u64) -> bool {
        distance < self.theta
    }
}

fn ratio(p: &Prob) -> BigRational {
    BigRational::new(BigInt::from(p.numer().clone()), BigInt::from(p.denom().clone()))
}

fn gap(probs: &CollisionProbs) -> Result<(BigRational, BigRational)> {
    let (p1, p2) = (ratio(&probs.p1), ratio(&probs.p2));
    if p1 <= p2 {
        return Err(Error::NoProbabilityGap);
    }
    Ok((p1, p2))
}

/// Unrounded `8 ln(4n) / (p1 - p2)^2`.
pub fn raw_sketch_bits(n: u64, probs: &CollisionProbs) -> Result<Dd> {
    let (p1, p2) = gap(probs)?;
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let d = p1 - p2;
    let (num, den) = (d.numer() * d.numer(), d.denom() * d.denom());
    let inv_gap2 = Dd::from_ratio(den.magnitude(), num.magnitude());
    let four_n = Dd::from_u64(n) * Dd::from_f64(4.0);
    Ok(Dd::from_f64(8.0) * four_n.ln() * inv_gap2)
}

/// `b = 64 ceil(8 ln(4n) / (p1 - p2)^2 / 64)`, so each pair fails with
/// probability at most `1/(4n)`.
pub fn derive_sketch_params(n: u64, probs: &CollisionProbs) -> Result<SketchParams> {
    let raw = raw_sketch_bits(n, probs)?;
    let words = (raw * Dd::from_f64(1.0 / 64.0)).ceil();
    let words = words
        .to_biguint()
        .and_then(|w| w.to_usize())
        .filter(|&w| w > 0 && w <= usize::MAX / 64)
        .ok_or_else(|| Error::out_of_range("sketch length does not fit in memory"))?;
    SketchParams::with_bits(words * 64, probs)
}

/// [`derive_sketch_params`] at the sensitivity's probabilities.
pub fn sketch_params_for(n: u64, s: &Sensitivity) -> Result<SketchParams> {
    derive_sketch_params(n, &CollisionProbs::from_f64(s.p1(), s.p2())?)
}

/// A packed `b`-bit sketch; bits past `b` are zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sketch {
    words: Vec<u64>,
    bits: usize,
}

impl Sketch {
    pub fn from_words(bits: usize, words: Vec<u64>) -> Result<Self> {
        if words.len() != bits.div_ceil(64) {
            return Err(Error::LengthMismatch {
                expected: bits.div_ceil(64),
                found: words.len(),
            });
        }
        if !bits.is_multiple_of(64) {
            let mask = !0u64 << (bits % 64);
            if words.last().is_some_and(|w| w & mask != 0) {
                return Err(Error::invalid("sketch has bits set past its length"));
            }
        }
        Ok(Self { words, bits })
    }

    pub fn len(&self) -> usize {
        self.bits
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.bits);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }
}

/// Number of differing bits, one popcount per word.
pub fn sketch_distance(a: &Sketch, b: &Sketch) -> Result<u64> {
    if a.bits != b.bits {
        return Err(Error::LengthMismatch {
            expected: a.bits,
            found: b.bits,
        });
    }
    Ok(a.words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| u64::from((x ^ y).count_ones()))
        .sum())
}

/// `b` drawn functions and `b` one-bit maps.
pub struct Sketcher<F: HashFamily> {
    family: F,
    funcs: Vec<F::Func>,
    maps: Vec<MultiplyShift>,
    seed: u64,
}

impl<F: HashFamily> Sketcher<F> {
    pub fn new(family: F, bits: usize, seed: u64) -> Result<Self> {
        if bits == 0 {
            return Err(Error::invalid("sketch length must be positive"));
        }
        let funcs = (0..bits as u64)
            .map(|i| family.sample(derive_seed(seed, SKETCH_FN_STREAM, i)))
            .collect();
        let maps = (0..bits as u64)
            .map(|i| MultiplyShift::from_seed(derive_seed(seed, SKETCH_BIT_STREAM, i)))
            .collect();
        Ok(Self {
            family,
            funcs,
            maps,
            seed,
        })
    }

    pub fn bits(&self) -> usize {
        self.funcs.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn family(&self) -> &F {
        &self.family
    }

    pub fn sketch(&self, x: &F::Point) -> Result<Sketch> {
        self.family.check_point(x)?;
        let mut words = vec![0u64; self.bits().div_ceil(64)];
        for (i, (h, f)) in self.funcs.iter().zip(&self.maps).enumerate() {
            if f.bit(h.hash(x)) {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        Ok(Sketch {
            words,
            bits: self.bits(),
        })
    }
}

/// Hoeffding tail `exp(-b (p1 - p2)^2 / 8)` for one pair.
pub fn hoeffding_bound(b: u64, p1: f64, p2: f64) -> f64 {
    let gap = p1 - p2;
    (-(b as f64) * gap * gap / 8.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::bit_sampling_family;
    use crate::families::universal::rng_from_seed;
    use crate::points::BitVector;

    fn probs(a: &str, b: &str) -> CollisionProbs {
        CollisionProbs::parse(a, b).unwrap()
    }

    #[test]
    fn threshold_from_agreement_fraction() {
        let p = SketchParams::with_bits(128, &probs("0.5", "0.25")).unwrap();
        assert_eq!(p.lambda, 0.6875);
        assert_eq!(p.theta, 40);
    }

    #[test]
    fn desk_scale_length() {
        let raw = raw_sketch_bits(1024, &probs("0.5", "0.25")).unwrap().to_f64();
        assert!((raw - 1064.674069340076).abs() < 1e-9, "{raw}");
        let p = derive_sketch_params(1024, &probs("0.5", "0.25")).unwrap();
        assert_eq!(p.b, 1088);
        assert_eq!(p.theta, 340);
    }

    #[test]
    fn doubling_n_adds_a_constant() {
        let pr = probs("0.5", "0.25");
        for n in [3u64, 1000, 1 << 40] {
            let a = raw_sketch_bits(n, &pr).unwrap();
            let b = raw_sketch_bits(2 * n, &pr).unwrap();
            let step = (b - a).to_f64();
            assert!((step - 8.0 * std::f64::consts::LN_2 * 16.0).abs() < 1e-9);
        }
    }

    #[test]
    fn no_gap_is_rejected() {
        let err = derive_sketch_params(10, &probs("0.5", "0.5")).unwrap_err();
        assert!(err.to_string().contains("sketching requires a probability gap"));
    }

    #[test]
    fn distance_basics() {
        let f = bit_sampling_family(64).unwrap();
        let sk = Sketcher::new(f, 128, 3).unwrap();
        let x = BitVector::random(64, &mut rng_from_seed(1));
        let a = sk.sketch(&x).unwrap();
        assert_eq!(a, sk.sketch(&x).unwrap());
        assert_eq!(sketch_distance(&a, &a).unwrap(), 0);
        let c = Sketch::from_words(128, a.words().iter().map(|w| !w).collect()).unwrap();
        assert_eq!(sketch_distance(&a, &c).unwrap(), 128);
        let short = Sketch::from_words(64, vec![0]).unwrap();
        assert!(sketch_distance(&a, &short).is_err());
    }

    #[test]
    fn padding_stays_clear() {
        let f = bit_sampling_family(8).unwrap();
        let sk = Sketcher::new(f, 70, 9).unwrap();
        let s = sk.sketch(&BitVector::random(8, &mut rng_from_seed(2))).unwrap();
        assert_eq!(s.words()[1] >> 6, 0);
        assert!(Sketch::from_words(70, vec![0, 1 << 6]).is_err());
    }

    #[test]
    fn hoeffding_values() {
        assert!((hoeffding_bound(800, 0.5, 0.25) - 1.9304541362277093e-3).abs() < 1e-15);
        assert_eq!(hoeffding_bound(0, 0.5, 0.25), 1.0);
        let a = hoeffding_bound(100, 0.7, 0.2);
        assert!((hoeffding_bound(200, 0.7, 0.2) - a * a).abs() < 1e-15);
    }
}
