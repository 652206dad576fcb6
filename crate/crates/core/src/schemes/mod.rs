//! The four ways of building `L` bucket-key functions from few family draws.
//!
//! * `im`: `L` independent draws from `H^k` (`H = L k`).
//! * `ai`: tensoring; `eta` repetitions of all `m1^t m2` combinations of `t`
//!   banks of `m1` draws from `H^k1` and one bank of `m2` draws from `H^k2`.
//! * `dkt`: `k` pools of `m` draws; key `l` picks `h_{i, f_i(l)}` from pool
//!   `i` through pairwise-independent `f_i: [L] -> [m]`.
//! * `hybrid`: two DKT collections of `L1` and `L2` keys, paired into
//!   `L = L1 L2` keys.

mod source;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::calc::exact::{self, CollisionProbs, Epsilon};
use crate::error::{Error, Result};

pub use crate::calc::exact::dkt_failure_bound;
pub use source::{Evaluation, HashSource, MAX_BUILD_LOOKUPS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Im,
    Ai,
    Dkt,
    Hybrid,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [SchemeKind::Im, SchemeKind::Ai, SchemeKind::Dkt, SchemeKind::Hybrid];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Im => "im",
            SchemeKind::Ai => "ai",
            SchemeKind::Dkt => "dkt",
            SchemeKind::Hybrid => "hybrid",
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            SchemeKind::Im => 0,
            SchemeKind::Ai => 1,
            SchemeKind::Dkt => 2,
            SchemeKind::Hybrid => 3,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        SchemeKind::ALL.get(tag as usize).copied()
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown scheme {s:?} (expected im, ai, dkt or hybrid)")))
    }
}

/// Optional parameter pins for [`derive_params`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    /// AI tensoring width; defaults to `argmin_t H`.
    pub t: Option<u64>,
    /// DKT margin; defaults to the preset 1/4.
    pub eps: Option<Epsilon>,
    /// Size the hybrid collections for sketch-based candidate filtering.
    pub sketching: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ImParams {
    pub k: u64,
    pub l: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AiParams {
    pub t: u64,
    pub k: u64,
    pub k1: u64,
    pub k2: u64,
    pub m1: u64,
    pub m2: u64,
    pub eta: u64,
    /// Single-repetition success probability for a pair at `p1`.
    pub phi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DktParams {
    pub k: u64,
    pub m: u64,
    pub l: u64,
    pub eps: Epsilon,
}

/// One DKT collection of the hybrid scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Collection {
    pub k: u64,
    pub m: u64,
    pub l: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HybridParams {
    pub k: u64,
    pub first: Collection,
    pub second: Collection,
    pub eps: Epsilon,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeParams {
    Im(ImParams),
    Ai(AiParams),
    Dkt(DktParams),
    Hybrid(HybridParams),
}

impl SchemeParams {
    pub fn kind(&self) -> SchemeKind {
        match self {
            SchemeParams::Im(_) => SchemeKind::Im,
            SchemeParams::Ai(_) => SchemeKind::Ai,
            SchemeParams::Dkt(_) => SchemeKind::Dkt,
            SchemeParams::Hybrid(_) => SchemeKind::Hybrid,
        }
    }

    /// `k` of the underlying powering.
    pub fn k(&self) -> u64 {
        match self {
            SchemeParams::Im(p) => p.k,
            SchemeParams::Ai(p) => p.k,
            SchemeParams::Dkt(p) => p.k,
            SchemeParams::Hybrid(p) => p.k,
        }
    }

    /// Number of bucket keys `L`, or `None` if it does not fit a word.
    pub fn lookups(&self) -> Option<u64> {
        match self {
            SchemeParams::Im(p) => Some(p.l),
            SchemeParams::Ai(p) => {
                let combos = p.m1.checked_pow(u32::try_from(p.t).ok()?)?;
                p.eta.checked_mul(combos)?.checked_mul(p.m2)
            }
            SchemeParams::Dkt(p) => Some(p.l),
            SchemeParams::Hybrid(p) => p.first.l.checked_mul(p.second.l),
        }
    }

    /// Number of drawn base functions `H` (also the per-query evaluation count).
    pub fn hash_count(&self) -> Option<u64> {
        match self {
            SchemeParams::Im(p) => p.l.checked_mul(p.k),
            SchemeParams::Ai(p) => {
                let banks = p.m1.checked_mul(p.k1)?.checked_mul(p.t)?;
                p.eta.checked_mul(banks.checked_add(p.m2.checked_mul(p.k2)?)?)
            }
            SchemeParams::Dkt(p) => p.k.checked_mul(p.m),
            SchemeParams::Hybrid(p) => p
                .first
                .k
                .checked_mul(p.first.m)?
                .checked_add(p.second.k.checked_mul(p.second.m)?),
        }
    }
}

fn word(v: &BigUint, what: &str) -> Result<u64> {
    v.to_u64()
        .ok_or_else(|| Error::out_of_range(format!("{what} = {v} does not fit a machine word")))
}

/// Resolves the integer parameters of a scheme for `n` points.
pub fn derive_params(kind: SchemeKind, n: u64, probs: &CollisionProbs, overrides: &Overrides) -> Result<SchemeParams> {
    let params = match kind {
        SchemeKind::Im => {
            let s = exact::size_im(n, probs)?;
            SchemeParams::Im(ImParams {
                k: s.k,
                l: word(&s.l, "L")?,
            })
        }
        SchemeKind::Ai => {
            let s = exact::size_ai(n, probs, overrides.t)?;
            SchemeParams::Ai(AiParams {
                t: s.t,
                k: s.k,
                k1: s.k1,
                k2: s.k2,
                m1: word(&s.m1, "m1")?,
                m2: word(&s.m2, "m2")?,
                eta: word(&s.eta, "eta")?,
                phi: s.phi.to_f64(),
            })
        }
        SchemeKind::Dkt => {
            let s = exact::size_dkt(n, probs, overrides.eps)?;
            SchemeParams::Dkt(DktParams {
                k: s.k,
                m: word(&s.m, "m")?,
                l: word(&s.l, "L")?,
                eps: s.eps,
            })
        }
        SchemeKind::Hybrid => {
            let s = exact::size_hybrid(n, probs, overrides.sketching)?;
            SchemeParams::Hybrid(HybridParams {
                k: s.k,
                first: Collection {
                    k: s.k1,
                    m: word(&s.m1, "m1")?,
                    l: word(&s.l1, "L1")?,
                },
                second: Collection {
                    k: s.k2,
                    m: word(&s.m2, "m2")?,
                    l: word(&s.l2, "L2")?,
                },
                eps: s.eps,
            })
        }
    };
    if params.lookups().is_none() || params.hash_count().is_none() {
        return Err(Error::out_of_range(format!("{kind} counts do not fit a machine word")));
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probs(p1: &str, p2: &str) -> CollisionProbs {
        CollisionProbs::parse(p1, p2).unwrap()
    }

    #[test]
    fn parses_kinds() {
        for k in SchemeKind::ALL {
            assert_eq!(k.as_str().parse::<SchemeKind>().unwrap(), k);
            assert_eq!(SchemeKind::from_tag(k.tag()), Some(k));
        }
        assert!("lsh".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn derived_examples() {
        let half = probs("0.5", "0.5");
        let none = Overrides::default();
        let im = derive_params(SchemeKind::Im, 1 << 30, &half, &none).unwrap();
        assert_eq!(im, SchemeParams::Im(ImParams { k: 30, l: 744_261_118 }));

        let SchemeParams::Dkt(d) = derive_params(SchemeKind::Dkt, 1 << 30, &half, &none).unwrap() else {
            panic!()
        };
        assert_eq!((d.k, d.m, d.l), (30, 300, 1_488_522_236));

        let SchemeParams::Hybrid(h) = derive_params(SchemeKind::Hybrid, 1 << 10, &half, &none).unwrap() else {
            panic!()
        };
        assert_eq!((h.first.k, h.second.k), (5, 5));
        assert_eq!((h.first.l, h.second.l, h.first.m, h.second.m), (192, 192, 33, 33));

        let pinned = Overrides {
            t: Some(6),
            ..Overrides::default()
        };
        let SchemeParams::Ai(a) = derive_params(SchemeKind::Ai, 1 << 30, &half, &pinned).unwrap() else {
            panic!()
        };
        assert_eq!((a.k1, a.k2, a.m1, a.m2), (5, 0, 6, 1));
    }

    #[test]
    fn desk_scale_parameters() {
        // d = 128, r1 = 16, r2 = 48 under bit sampling
        let p = probs("0.875", "0.625");
        for kind in SchemeKind::ALL {
            let params = derive_params(kind, 1025, &p, &Overrides::default()).unwrap();
            assert_eq!(params.k(), 15, "{kind}");
        }
        let SchemeParams::Im(im) = derive_params(SchemeKind::Im, 1025, &p, &Overrides::default()).unwrap() else {
            panic!()
        };
        assert_eq!(im.l, 6);
    }

    #[test]
    fn ai_l_bound_on_a_grid() {
        for n in [1u64 << 10, 1 << 20, 1 << 30] {
            for p1 in ["0.1", "0.5", "0.9"] {
                let p1v: f64 = p1.parse().unwrap();
                for p2 in [p1v / 4.0, p1v / 2.0, 0.9 * p1v] {
                    let pr = CollisionProbs::new(exact::Prob::parse(p1).unwrap(), exact::Prob::from_f64(p2).unwrap())
                        .unwrap();
                    let s = exact::size_ai(n, &pr, None).unwrap();
                    let bound = 16.0 * std::f64::consts::E / p1v.powi(s.k as i32);
                    assert!(crate::calc::Dd::from_biguint(&s.lookups()).to_f64() <= bound);
                }
            }
        }
    }

    #[test]
    fn out_of_word_range_is_rejected() {
        let p = probs("0.01", "0.009");
        assert!(derive_params(SchemeKind::Im, u64::MAX, &p, &Overrides::default()).is_err());
    }
}
