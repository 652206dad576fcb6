use rand::seq::SliceRandom;
use rand::Rng;

use super::universal::{mix64, rng_from_seed, MultiplyShift};
use super::{HashFamily, HashFn, Space};
use crate::error::{Error, Result};
use crate::points::SetPoint;

/// Universes up to this size use exact random permutations; larger ones use a
/// strongly universal priority function.
pub const PERMUTATION_UNIVERSE_LIMIT: u32 = 1 << 16;

/// MinHash over non-empty subsets of `[0, universe)`. With exact permutations
/// the collision probability of `A, B` is their Jaccard similarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinHash {
    universe: u32,
}

pub fn minhash_family(universe: u32) -> Result<MinHash> {
    if universe == 0 {
        return Err(Error::invalid("minhash needs a universe of size >= 1"));
    }
    Ok(MinHash { universe })
}

impl MinHash {
    pub fn universe(&self) -> u32 {
        self.universe
    }
}

/// A drawn MinHash function. Hashes a set to its minimum-priority element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinHashFn {
    /// `ranks[a]` is the position of `a` in a uniform random permutation.
    Permutation(Vec<u32>),
    /// Priority `(mix64(h(a)), a)` under a multiply-add-shift `h`. The fixed
    /// bijection keeps strong universality and breaks up the linear structure
    /// that skews the argmin on runs of consecutive elements.
    Universal(MultiplyShift),
}

impl MinHashFn {
    /// Builds the function for an explicit permutation given as ranks.
    pub fn from_ranks(ranks: Vec<u32>) -> Result<Self> {
        let mut seen = vec![false; ranks.len()];
        for &r in &ranks {
            match seen.get_mut(r as usize) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::invalid("ranks are not a permutation")),
            }
        }
        Ok(MinHashFn::Permutation(ranks))
    }
}

impl HashFn<SetPoint> for MinHashFn {
    fn hash(&self, x: &SetPoint) -> u64 {
        let elems = x.elements();
        let best = match self {
            MinHashFn::Permutation(ranks) => elems.iter().min_by_key(|&&a| ranks[a as usize]),
            MinHashFn::Universal(h) => elems.iter().min_by_key(|&&a| (mix64(h.hash(a as u64)), a)),
        };
        best.map_or(u64::MAX, |&a| a as u64)
    }
}

impl HashFamily for MinHash {
    type Point = SetPoint;
    type Func = MinHashFn;

    fn space(&self) -> Space {
        Space::Jaccard {
            universe: self.universe,
        }
    }

    fn sample(&self, seed: u64) -> MinHashFn {
        let mut rng = rng_from_seed(seed);
        if self.universe <= PERMUTATION_UNIVERSE_LIMIT {
            let mut order: Vec<u32> = (0..self.universe).collect();
            order.shuffle(&mut rng);
            let mut ranks = vec![0u32; self.universe as usize];
            for (pos, &a) in order.iter().enumerate() {
                ranks[a as usize] = pos as u32;
            }
            MinHashFn::Permutation(ranks)
        } else {
            MinHashFn::Universal(MultiplyShift::from_seed(rng.random()))
        }
    }

    fn check_point(&self, x: &SetPoint) -> Result<()> {
        let mismatch = |reason: String| Error::SpaceMismatch {
            expected: self.space().to_string(),
            reason,
        };
        if x.is_empty() {
            return Err(mismatch("empty set".into()));
        }
        if let Some(&max) = x.elements().last() {
            if max >= self.universe {
                return Err(mismatch(format!("element {max} outside the universe")));
            }
        }
        Ok(())
    }

    fn distance(&self, x: &SetPoint, y: &SetPoint) -> f64 {
        1.0 - x.jaccard(y)
    }

    fn collision_probability(&self, distance: f64) -> f64 {
        (1.0 - distance).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_permutations(n: u32) -> Vec<Vec<u32>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in all_permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn exhaustive_permutations_give_jaccard() {
        let a = SetPoint::new(vec![1, 2, 3]);
        let b = SetPoint::new(vec![2, 3, 4]);
        let perms = all_permutations(6);
        assert_eq!(perms.len(), 720);
        let hits = perms
            .into_iter()
            .filter(|ranks| {
                let h = MinHashFn::from_ranks(ranks.clone()).unwrap();
                h.hash(&a) == h.hash(&b)
            })
            .count();
        assert_eq!(hits, 360);
        assert_eq!(a.jaccard(&b), 0.5);
    }

    #[test]
    fn equal_and_disjoint_sets() {
        let f = minhash_family(100).unwrap();
        let a = SetPoint::new(vec![3, 50, 99]);
        let b = SetPoint::new(vec![4, 51]);
        for s in 0..500 {
            let h = f.sample(s);
            assert_eq!(h.hash(&a), h.hash(&a.clone()));
            assert_ne!(h.hash(&a), h.hash(&b));
        }
    }

    #[test]
    fn large_universe_uses_priority_function() {
        let f = minhash_family(PERMUTATION_UNIVERSE_LIMIT + 1).unwrap();
        assert!(matches!(f.sample(1), MinHashFn::Universal(_)));
        let a = SetPoint::new(vec![0, 70_000]);
        let h = f.sample(1);
        assert!(a.elements().contains(&(h.hash(&a) as u32)));
    }

    #[test]
    fn rejects_invalid_points() {
        let f = minhash_family(10).unwrap();
        assert!(f.check_point(&SetPoint::new(vec![])).is_err());
        assert!(f.check_point(&SetPoint::new(vec![10])).is_err());
        assert!(f.check_point(&SetPoint::new(vec![0, 9])).is_ok());
        assert!(minhash_family(0).is_err());
        assert!(MinHashFn::from_ranks(vec![0, 0, 1]).is_err());
    }

    #[test]
    fn same_seed_same_function() {
        let f = minhash_family(6).unwrap();
        assert_eq!(f.sample(9), f.sample(9));
    }
}
