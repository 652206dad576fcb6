use rand::Rng;

use super::universal::rng_from_seed;
use super::{HashFamily, HashFn, Space};
use crate::error::{Error, Result};
use crate::points::BitVector;

/// Bit sampling on `{0,1}^d`: `h(x) = x_i` for a uniform coordinate `i`.
/// A pair at Hamming distance `t` collides with probability `1 - t/d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BitSampling {
    d: usize,
}

pub fn bit_sampling_family(d: usize) -> Result<BitSampling> {
    if d == 0 {
        return Err(Error::invalid("bit sampling needs dimension d >= 1"));
    }
    Ok(BitSampling { d })
}

impl BitSampling {
    pub fn dim(&self) -> usize {
        self.d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BitSample {
    coord: usize,
}

impl BitSample {
    pub fn coordinate(&self) -> usize {
        self.coord
    }
}

impl HashFn<BitVector> for BitSample {
    #[inline]
    fn hash(&self, x: &BitVector) -> u64 {
        x.get(self.coord) as u64
    }
}

impl HashFamily for BitSampling {
    type Point = BitVector;
    type Func = BitSample;

    fn space(&self) -> Space {
        Space::Hamming { d: self.d }
    }

    fn sample(&self, seed: u64) -> BitSample {
        BitSample {
            coord: rng_from_seed(seed).random_range(0..self.d),
        }
    }

    fn check_point(&self, x: &BitVector) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::SpaceMismatch {
                expected: self.space().to_string(),
                reason: format!("bit vector has length {}", x.len()),
            });
        }
        Ok(())
    }

    fn distance(&self, x: &BitVector, y: &BitVector) -> f64 {
        x.hamming(y) as f64
    }

    fn collision_probability(&self, distance: f64) -> f64 {
        (1.0 - distance / self.d as f64).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::derive_seed;

    #[test]
    fn rejects_zero_dimension() {
        assert!(bit_sampling_family(0).is_err());
    }

    #[test]
    fn identical_points_always_collide() {
        let f = bit_sampling_family(32).unwrap();
        let x = BitVector::random(32, &mut rng_from_seed(1));
        assert!((0..1000).all(|s| {
            let h = f.sample(s);
            h.hash(&x) == h.hash(&x)
        }));
    }

    #[test]
    fn complementary_points_never_collide() {
        let f = bit_sampling_family(8).unwrap();
        let x = BitVector::parse("01101001").unwrap();
        let y = x.complement();
        assert!((0..1000).all(|s| {
            let h = f.sample(s);
            h.hash(&x) != h.hash(&y)
        }));
    }

    #[test]
    fn collision_rate_matches_closed_form() {
        // d = 128, distance 16: 1 - 16/128 = 0.875.
        let f = bit_sampling_family(128).unwrap();
        let mut rng = rng_from_seed(3);
        let x = BitVector::random(128, &mut rng);
        let mut y = x.clone();
        for i in 0..16 {
            y.flip(i * 8);
        }
        let trials = 100_000u64;
        let hits = (0..trials)
            .filter(|&s| {
                let h = f.sample(derive_seed(77, 0, s));
                h.hash(&x) == h.hash(&y)
            })
            .count() as f64;
        let p = f.collision_probability(16.0);
        assert_eq!(p, 0.875);
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((hits / trials as f64 - p).abs() <= 3.0 * sigma);
    }

    #[test]
    fn wrong_length_is_a_space_mismatch() {
        let f = bit_sampling_family(16).unwrap();
        let err = f.check_point(&BitVector::zeros(15)).unwrap_err();
        assert!(err.to_string().contains("hamming d=16"), "{err}");
    }
}
