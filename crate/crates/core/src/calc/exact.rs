//! Exact sizing of the four frameworks.
//!
//! Probabilities are exact rationals. Ceilings of rational quantities are
//! computed with big-integer division; ceilings of irrational quantities
//! (anything with a logarithm) go through [`Dd`].

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::xp::Dd;
use crate::error::{Error, Result};

/// Largest `k` the calculators accept.
pub const MAX_K: u64 = 1_000_000;
/// Results at or beyond `2^MAX_COUNT_BITS` are rejected.
pub const MAX_COUNT_BITS: u64 = 1024;
/// Exact big-integer powers are used while they stay below this many bits.
const EXACT_POWER_BITS: u64 = 1 << 22;

/// An exact probability in the open interval (0, 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prob {
    num: BigUint,
    den: BigUint,
    label: String,
}

impl Prob {
    pub fn from_ratio(num: u64, den: u64) -> Result<Self> {
        Self::new(BigUint::from(num), BigUint::from(den), format!("{num}/{den}"))
    }

    fn new(num: BigUint, den: BigUint, label: String) -> Result<Self> {
        if num.is_zero() || num >= den {
            return Err(Error::invalid(format!("probability {label} must lie in (0, 1)")));
        }
        let g = num.gcd(&den);
        Ok(Self {
            num: num / &g,
            den: den / &g,
            label,
        })
    }

    /// The exact binary value of a double.
    pub fn from_f64(p: f64) -> Result<Self> {
        let r = BigRational::from_float(p)
            .ok_or_else(|| Error::invalid(format!("probability {p} is not finite")))?;
        if !r.is_positive() {
            return Err(Error::invalid(format!("probability {p} must lie in (0, 1)")));
        }
        let (n, d) = r.into_raw();
        Self::new(
            n.to_biguint().expect("positive"),
            d.to_biguint().expect("positive"),
            format!("{p}"),
        )
    }

    /// Parses a decimal (`0.875`, `.5`, `1e-3`) or fraction (`7/8`) exactly.
    pub fn parse(s: &str) -> Result<Self> {
        let (num, den) = parse_exact(s)?;
        Self::new(num, den, s.trim().to_string())
    }

    pub fn numer(&self) -> &BigUint {
        &self.num
    }

    pub fn denom(&self) -> &BigUint {
        &self.den
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn to_dd(&self) -> Dd {
        Dd::from_ratio(&self.num, &self.den)
    }

    /// `self^k` as an exact probability.
    pub fn pow(&self, k: u64) -> Result<Prob> {
        let bits = k.saturating_mul(self.den.bits());
        if bits > EXACT_POWER_BITS {
            return Err(Error::out_of_range(format!("{}^{k} is too large to evaluate exactly", self.label)));
        }
        let e = u32::try_from(k).map_err(|_| Error::out_of_range("exponent too large"))?;
        Ok(Prob {
            num: self.num.pow(e),
            den: self.den.pow(e),
            label: format!("({})^{k}", self.label),
        })
    }

    /// `(1/self)^k` in double-double, exact-then-rounded when affordable.
    pub fn inv_pow_dd(&self, k: u64) -> Result<Dd> {
        let v = match self.pow(k) {
            Ok(p) => Dd::from_ratio(&p.den, &p.num),
            Err(_) => self.to_dd().recip().powi(k),
        };
        if !v.is_finite() || v.hi() > 1e300 {
            return Err(Error::out_of_range(format!("1/{}^{k} underflows the working precision", self.label)));
        }
        Ok(v)
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn parse_exact(s: &str) -> Result<(BigUint, BigUint)> {
    let s = s.trim();
    let bad = || Error::invalid(format!("cannot parse {s:?} as a non-negative exact number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigUint = n.trim().parse().map_err(|_| bad())?;
        let d: BigUint = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok((n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigUint = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigUint::from(10u32);
    if scale >= 0 {
        Ok((digits * ten.pow(scale as u32), BigUint::one()))
    } else {
        Ok((digits, ten.pow((-scale) as u32)))
    }
}

/// An exact positive rational margin (the DKT `ε`).
pub type Epsilon = Ratio<u64>;

pub fn parse_epsilon(s: &str) -> Result<Epsilon> {
    let (n, d) = parse_exact(s)?;
    let g = n.gcd(&d);
    let (n, d) = (n / &g, d / &g);
    let (Some(n), Some(d)) = (n.to_u64(), d.to_u64()) else {
        return Err(Error::invalid(format!("epsilon {s:?} has too many digits")));
    };
    if n == 0 {
        return Err(Error::invalid("epsilon must be positive"));
    }
    Ok(Ratio::new(n, d))
}

fn eps_dd(eps: Epsilon) -> Dd {
    Dd::from_u64(*eps.numer()) / Dd::from_u64(*eps.denom())
}

/// A pair of collision probabilities `0 < p2 <= p1 < 1` for the calculators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollisionProbs {
    pub p1: Prob,
    pub p2: Prob,
}

impl CollisionProbs {
    pub fn new(p1: Prob, p2: Prob) -> Result<Self> {
        if &p2.num * &p1.den > &p1.num * &p2.den {
            return Err(Error::invalid(format!("need p2 <= p1, got p1 = {p1}, p2 = {p2}")));
        }
        Ok(Self { p1, p2 })
    }

    pub fn parse(p1: &str, p2: &str) -> Result<Self> {
        Self::new(Prob::parse(p1)?, Prob::parse(p2)?)
    }

    pub fn from_f64(p1: f64, p2: f64) -> Result<Self> {
        Self::new(Prob::from_f64(p1)?, Prob::from_f64(p2)?)
    }
}

/// `ceil(num / den)`.
fn ceil_div(num: &BigUint, den: &BigUint) -> BigUint {
    let (q, r) = num.div_rem(den);
    if r.is_zero() {
        q
    } else {
        q + 1u32
    }
}

fn ceil_dd(x: Dd, what: &str) -> Result<BigUint> {
    if !x.is_finite() || x.hi() < 0.0 {
        return Err(Error::out_of_range(format!("{what} is not a finite non-negative value")));
    }
    let v = x.ceil().to_biguint().expect("integral double-double");
    check_count(v, what)
}

fn check_count(v: BigUint, what: &str) -> Result<BigUint> {
    if v.bits() > MAX_COUNT_BITS {
        return Err(Error::out_of_range(format!("{what} exceeds 2^{MAX_COUNT_BITS}")));
    }
    Ok(v)
}

/// Smallest `k >= 1` with `n * p2^k <= 1`, i.e. `ceil(log n / log(1/p2))`.
pub fn k_for(n: u64, p2: &Prob) -> Result<u64> {
    if n < 2 {
        return Err(Error::invalid(format!("need n >= 2, got {n}")));
    }
    let estimate = Dd::from_u64(n).ln() / p2.to_dd().recip().ln();
    if estimate.hi().is_nan() || estimate.hi() >= MAX_K as f64 {
        return Err(Error::out_of_range(format!(
            "k = log n / log(1/p2) = {estimate} exceeds {MAX_K} (p2 = {p2})"
        )));
    }
    let k0 = (estimate.ceil().to_f64() as u64).max(1);
    let holds = |k: u64| -> Option<bool> {
        if k.saturating_mul(p2.den.bits()) > EXACT_POWER_BITS {
            return None;
        }
        let e = k as u32;
        Some(BigUint::from(n) * p2.num.pow(e) <= p2.den.pow(e))
    };
    match holds(k0) {
        None => {
            // too large to verify exactly; the estimate must be unambiguous
            let frac = (estimate - estimate.floor()).to_f64();
            if frac.min(1.0 - frac) < 1e-20 {
                return Err(Error::out_of_range(format!("cannot round k = {estimate} reliably")));
            }
            Ok(k0)
        }
        Some(_) => {
            let mut k = k0;
            while !holds(k).unwrap_or(true) {
                k += 1;
            }
            while k > 1 && holds(k - 1).unwrap_or(false) {
                k -= 1;
            }
            Ok(k)
        }
    }
}

/// Indyk-Motwani: `k = ceil(log n / log(1/p2))`, `L = ceil(ln 2 / p1^k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImSizing {
    pub k: u64,
    pub l: BigUint,
}

impl ImSizing {
    pub fn hash_count(&self) -> BigUint {
        &self.l * self.k
    }
}

pub fn size_im(n: u64, probs: &CollisionProbs) -> Result<ImSizing> {
    let k = k_for(n, &probs.p2)?;
    let l = ceil_dd(Dd::LN2 * probs.p1.inv_pow_dd(k)?, "L")?;
    Ok(ImSizing { k, l })
}

/// Andoni-Indyk tensoring with all integer constraints:
/// `k1 = floor(k/t)`, `k2 = k - t k1`, `m1 = ceil(1/(t p1^k1))`,
/// `m2 = ceil(1/p1^k2)`, `phi = (1-(1-p1^k1)^m1)^t (1-(1-p1^k2)^m2)`,
/// `eta = ceil(ln 2 / phi)`, `L = eta m1^t m2`, `H = eta (m1 k1 t + m2 k2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AiSizing {
    pub k: u64,
    pub t: u64,
    pub k1: u64,
    pub k2: u64,
    pub m1: BigUint,
    pub m2: BigUint,
    pub eta: BigUint,
    pub phi: Dd,
}

impl AiSizing {
    pub fn lookups(&self) -> BigUint {
        &self.eta * self.m1.pow(self.t as u32) * &self.m2
    }

    pub fn hash_count(&self) -> BigUint {
        &self.eta * (&self.m1 * (self.k1 * self.t) + &self.m2 * self.k2)
    }
}

/// `1 - (1 - q)^m` for an exact probability `q` (given through its inverse
/// power) and integer `m`.
fn at_least_one(q: Dd, m: &BigUint) -> Dd {
    if q >= Dd::ONE {
        return Dd::ONE;
    }
    let log_miss = (Dd::ONE - q).ln() * Dd::from_biguint(m);
    Dd::ONE - log_miss.exp()
}

pub fn size_ai_with_t(k: u64, t: u64, p1: &Prob) -> Result<AiSizing> {
    if t == 0 || t > k {
        return Err(Error::invalid(format!("tensoring width t = {t} must lie in 1..={k}")));
    }
    let k1 = k / t;
    let k2 = k - t * k1;
    let p_k1 = p1.pow(k1)?;
    let p_k2 = p1.pow(k2)?;
    let m1 = check_count(ceil_div(&p_k1.den, &(&p_k1.num * t)), "m1")?;
    let m2 = check_count(ceil_div(&p_k2.den, &p_k2.num), "m2")?;
    let q1 = p_k1.inv_pow_dd(1)?.recip();
    let q2 = p_k2.inv_pow_dd(1)?.recip();
    let phi = at_least_one(q1, &m1).powi(t) * at_least_one(q2, &m2);
    if phi.hi().is_nan() || phi.hi() <= 1e-300 {
        return Err(Error::out_of_range("AI collision probability phi underflows"));
    }
    let eta = ceil_dd(Dd::LN2 / phi, "eta")?;
    let sizing = AiSizing {
        k,
        t,
        k1,
        k2,
        m1,
        m2,
        eta,
        phi,
    };
    check_count(sizing.lookups(), "L")?;
    check_count(sizing.hash_count(), "H")?;
    Ok(sizing)
}

/// AI sizing at a fixed `t`, or at `t = argmin H` over `1..=k` (ties to the
/// smaller `t`).
pub fn size_ai(n: u64, probs: &CollisionProbs, t: Option<u64>) -> Result<AiSizing> {
    let k = k_for(n, &probs.p2)?;
    if let Some(t) = t {
        return size_ai_with_t(k, t, &probs.p1);
    }
    let mut best: Option<(BigUint, AiSizing)> = None;
    let mut last_err = None;
    for t in 1..=k {
        match size_ai_with_t(k, t, &probs.p1) {
            Ok(s) => {
                let h = s.hash_count();
                if best.as_ref().is_none_or(|(bh, _)| h < *bh) {
                    best = Some((h, s));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.map(|(_, s)| s)
        .ok_or_else(|| last_err.unwrap_or_else(|| Error::out_of_range("no admissible t")))
}

/// The margin used by the default DKT preset.
pub fn eps_dkt_default() -> Epsilon {
    Ratio::new(1, 4)
}

/// The margin used by each collection of the hybrid scheme.
pub fn eps_hybrid() -> Epsilon {
    Ratio::new(1, 6)
}

/// The hybrid margin when sketches replace distance computations.
pub fn eps_hybrid_sketching() -> Epsilon {
    Ratio::new(1, 10)
}

/// Smallest `m` meeting `m >= ceil(((1-p1)/p1) * k / ln(1+eps))`, at least 1.
pub fn dkt_min_pool(p1: &Prob, k: u64, eps: Epsilon) -> Result<BigUint> {
    if k == 0 {
        return Ok(BigUint::one());
    }
    let odds = Dd::from_ratio(&(&p1.den - &p1.num), &p1.num);
    let m = ceil_dd(odds * Dd::from_u64(k) / (Dd::ONE + eps_dd(eps)).ln(), "m")?;
    Ok(m.max(BigUint::one()))
}

/// The no-collision upper bound `(1 + eps mu) / (1 + (1 + eps) mu)` for a
/// pair with `mu = L p^k` expected key collisions.
pub fn dkt_failure_bound(mu: f64, eps: f64) -> f64 {
    (1.0 + eps * mu) / (1.0 + (1.0 + eps) * mu)
}

/// Dahlgaard-Knudsen-Thorup sampling: `k` pools of `m` functions, `L` keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DktSizing {
    pub k: u64,
    pub m: BigUint,
    pub l: BigUint,
    pub eps: Epsilon,
}

impl DktSizing {
    pub fn hash_count(&self) -> BigUint {
        &self.m * self.k
    }
}

/// DKT sizing for a given `k`. With the default margin (1/4) uses the
/// Default preset `m = ceil(5k/p1)`, `L = ceil(2 ln 2 / p1^k)`; any other
/// `eps < 1` uses the minimal pool and `L = ceil(p1^-k / (1 - eps))`, the
/// smallest `L` whose failure bound is at most 1/2.
pub fn size_dkt_for_k(k: u64, p1: &Prob, eps: Option<Epsilon>) -> Result<DktSizing> {
    let eps = eps.unwrap_or_else(eps_dkt_default);
    if eps == eps_dkt_default() {
        let m = check_count(ceil_div(&(&p1.den * (5 * k)), &p1.num), "m")?;
        let l = ceil_dd(Dd::LN2 * Dd::from_f64(2.0) * p1.inv_pow_dd(k)?, "L")?;
        return Ok(DktSizing { k, m, l, eps });
    }
    if eps >= Ratio::from_integer(1) {
        return Err(Error::invalid(format!("epsilon {eps} must be below 1")));
    }
    let m = dkt_min_pool(p1, k, eps)?;
    let l = match p1.pow(k) {
        Ok(pk) => {
            // L = ceil(den^k * d / (num^k * (d - n))) for eps = n/d
            let (n, d) = (BigUint::from(*eps.numer()), BigUint::from(*eps.denom()));
            ceil_div(&(&pk.den * &d), &(&pk.num * (&d - &n)))
        }
        Err(_) => {
            let mu = Dd::ONE / (Dd::ONE - eps_dd(eps));
            ceil_dd(mu * p1.inv_pow_dd(k)?, "L")?
        }
    };
    Ok(DktSizing {
        k,
        m,
        l: check_count(l, "L")?,
        eps,
    })
}

pub fn size_dkt(n: u64, probs: &CollisionProbs, eps: Option<Epsilon>) -> Result<DktSizing> {
    size_dkt_for_k(k_for(n, &probs.p2)?, &probs.p1, eps)
}

/// The hybrid scheme: two DKT collections for `k1 = ceil(k/2)` and
/// `k2 = floor(k/2)` with `L_i = ceil(mu / p1^k_i)`, tensored into
/// `L = L1 L2` keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HybridSizing {
    pub k: u64,
    pub k1: u64,
    pub k2: u64,
    pub l1: BigUint,
    pub l2: BigUint,
    pub m1: BigUint,
    pub m2: BigUint,
    pub eps: Epsilon,
}

impl HybridSizing {
    pub fn lookups(&self) -> BigUint {
        &self.l1 * &self.l2
    }

    pub fn hash_count(&self) -> BigUint {
        &self.m1 * self.k1 + &self.m2 * self.k2
    }
}

/// With `sketching`, each collection must fail with probability at most 1/8,
/// which `eps = 1/6` cannot reach; that mode uses `eps = 1/10`, `mu = 24`.
pub fn size_hybrid(n: u64, probs: &CollisionProbs, sketching: bool) -> Result<HybridSizing> {
    let k = k_for(n, &probs.p2)?;
    let (eps, mu) = if sketching {
        (eps_hybrid_sketching(), 24u32)
    } else {
        (eps_hybrid(), 6u32)
    };
    let k1 = k.div_ceil(2);
    let k2 = k / 2;
    let collection = |ki: u64| -> Result<(BigUint, BigUint)> {
        let pk = probs.p1.pow(ki)?;
        let l = check_count(ceil_div(&(&pk.den * mu), &pk.num), "L_i")?;
        Ok((l, dkt_min_pool(&probs.p1, ki, eps)?))
    };
    let (l1, m1) = collection(k1)?;
    let (l2, m2) = collection(k2)?;
    let s = HybridSizing {
        k,
        k1,
        k2,
        l1,
        l2,
        m1,
        m2,
        eps,
    };
    check_count(s.lookups(), "L")?;
    Ok(s)
}

/// DKT applied to the powered family `H^tau`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerSizing {
    pub tau: u64,
    pub inner: DktSizing,
}

impl CornerSizing {
    pub fn hash_count(&self) -> BigUint {
        self.inner.hash_count() * self.tau
    }
}

/// `ceil(1 / ln(1/p1))`.
pub fn corner_tau(p1: &Prob) -> Result<u64> {
    let t = ceil_dd(p1.to_dd().recip().ln().recip(), "tau")?;
    t.to_u64()
        .filter(|&t| t <= MAX_K)
        .ok_or_else(|| Error::out_of_range("tau too large"))
}

pub fn size_corner_at(n: u64, probs: &CollisionProbs, tau: u64) -> Result<CornerSizing> {
    let p1 = probs.p1.pow(tau)?;
    let p2 = probs.p2.pow(tau)?;
    let k = k_for(n, &p2)?;
    Ok(CornerSizing {
        tau,
        inner: size_dkt_for_k(k, &p1, None)?,
    })
}

/// The better (fewer hash functions, ties to `tau = 1`) of plain DKT and DKT
/// on `H^tau*` with `tau* = ceil(1/ln(1/p1))`.
pub fn size_corner(n: u64, probs: &CollisionProbs) -> Result<CornerSizing> {
    let plain = size_corner_at(n, probs, 1)?;
    let tau = corner_tau(&probs.p1)?;
    if tau <= 1 {
        return Ok(plain);
    }
    match size_corner_at(n, probs, tau) {
        Ok(powered) if powered.hash_count() < plain.hash_count() => Ok(powered),
        _ => Ok(plain),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probs(p1: &str, p2: &str) -> CollisionProbs {
        CollisionProbs::parse(p1, p2).unwrap()
    }

    #[test]
    fn parses_exact_decimals() {
        let p = Prob::parse("0.875").unwrap();
        assert_eq!((p.numer().clone(), p.denom().clone()), (7u32.into(), 8u32.into()));
        let p = Prob::parse("1e-1").unwrap();
        assert_eq!(p.denom(), &BigUint::from(10u32));
        let p = Prob::parse("3/12").unwrap();
        assert_eq!((p.numer().clone(), p.denom().clone()), (1u32.into(), 4u32.into()));
        assert!(Prob::parse("1").is_err());
        assert!(Prob::parse("0").is_err());
        assert!(Prob::parse("-0.5").is_err());
        assert!(Prob::parse("abc").is_err());
        assert!(Prob::parse(".").is_err());
        assert!(Prob::from_f64(0.5).is_ok());
        assert!(Prob::from_f64(f64::NAN).is_err());
    }

    #[test]
    fn collision_probs_order() {
        assert!(CollisionProbs::parse("0.5", "0.5").is_ok());
        assert!(CollisionProbs::parse("0.25", "0.5").is_err());
    }

    #[test]
    fn k_is_exact_on_integer_boundaries() {
        let half = Prob::parse("0.5").unwrap();
        assert_eq!(k_for(1 << 30, &half).unwrap(), 30);
        assert_eq!(k_for((1 << 30) + 1, &half).unwrap(), 31);
        assert_eq!(k_for(2, &Prob::parse("0.25").unwrap()).unwrap(), 1);
        assert_eq!(k_for(1_000_000, &Prob::parse("0.1").unwrap()).unwrap(), 6);
        assert_eq!(k_for(1024, &Prob::parse("0.625").unwrap()).unwrap(), 15);
        assert!(k_for(1, &half).is_err());
    }

    #[test]
    fn im_example() {
        let s = size_im(1 << 30, &probs("0.5", "0.5")).unwrap();
        assert_eq!(s.k, 30);
        assert_eq!(s.l, BigUint::from(744_261_118u64));
        assert_eq!(s.hash_count(), BigUint::from(22_327_833_540u64));
    }

    #[test]
    fn dkt_example() {
        let s = size_dkt(1 << 30, &probs("0.5", "0.5"), None).unwrap();
        assert_eq!((s.k, s.m.clone(), s.l.clone()), (30, 300u32.into(), 1_488_522_236u64.into()));
        assert_eq!(s.hash_count(), BigUint::from(9000u32));
    }

    #[test]
    fn ai_example_at_fixed_t() {
        let p1 = Prob::parse("0.5").unwrap();
        let s = size_ai_with_t(30, 6, &p1).unwrap();
        assert_eq!((s.k1, s.k2), (5, 0));
        assert_eq!((s.m1.clone(), s.m2.clone()), (6u32.into(), 1u32.into()));
    }

    #[test]
    fn ai_with_t_one_degenerates() {
        let p1 = Prob::parse("0.5").unwrap();
        let s = size_ai_with_t(10, 1, &p1).unwrap();
        assert_eq!((s.k1, s.k2, s.m2.clone()), (10, 0, BigUint::one()));
        assert_eq!(s.m1, BigUint::from(1024u32));
    }

    #[test]
    fn ai_argmin_small_case() {
        // p2 = 0.05: k = 7, the scan picks t = 2 (k1 = 3, k2 = 1, m1 = 4, m2 = 2, eta = 6).
        let s = size_ai(1 << 30, &probs("0.5", "0.05"), None).unwrap();
        assert_eq!((s.k, s.t, s.k1, s.k2), (7, 2, 3, 1));
        assert_eq!((s.m1.clone(), s.m2.clone(), s.eta.clone()), (4u32.into(), 2u32.into(), 6u32.into()));
        assert_eq!(s.hash_count(), BigUint::from(156u32));
    }

    #[test]
    fn hybrid_example() {
        let s = size_hybrid(1 << 10, &probs("0.5", "0.5"), false).unwrap();
        assert_eq!((s.k, s.k1, s.k2), (10, 5, 5));
        assert_eq!((s.l1.clone(), s.l2.clone()), (192u32.into(), 192u32.into()));
        assert_eq!(s.lookups(), BigUint::from(36_864u32));
        assert_eq!((s.m1.clone(), s.m2.clone()), (33u32.into(), 33u32.into()));
        assert_eq!(s.hash_count(), BigUint::from(330u32));
    }

    #[test]
    fn hybrid_sketching_mode_meets_one_eighth() {
        let s = size_hybrid(1 << 10, &probs("0.875", "0.625"), true).unwrap();
        for (l, k) in [(&s.l1, s.k1), (&s.l2, s.k2)] {
            let mu = Dd::from_biguint(l).to_f64() * 0.875f64.powi(k as i32);
            assert!(dkt_failure_bound(mu, 0.1) <= 0.125, "{mu}");
        }
    }

    #[test]
    fn dkt_custom_eps_reaches_one_half() {
        let p1 = Prob::parse("0.5").unwrap();
        let eps = parse_epsilon("1/6").unwrap();
        let s = size_dkt_for_k(10, &p1, Some(eps)).unwrap();
        // mu* = 6/5, L = ceil(1.2 * 1024) = 1229
        assert_eq!(s.l, BigUint::from(1229u32));
        assert_eq!(s.m, BigUint::from(65u32));
        let mu = 1229.0 / 1024.0;
        assert!(dkt_failure_bound(mu, 1.0 / 6.0) <= 0.5);
        assert!(size_dkt_for_k(10, &p1, Some(parse_epsilon("1").unwrap())).is_err());
    }

    #[test]
    fn default_pool_meets_pool_precondition() {
        for p in ["0.1", "0.5", "0.875", "0.99"] {
            let p1 = Prob::parse(p).unwrap();
            for k in [1, 5, 30, 99] {
                let s = size_dkt_for_k(k, &p1, None).unwrap();
                assert!(s.m >= dkt_min_pool(&p1, k, eps_dkt_default()).unwrap(), "{p} {k}");
            }
        }
    }

    #[test]
    fn failure_bound_values() {
        assert!((dkt_failure_bound(6.0, 1.0 / 6.0) - 0.25).abs() < 1e-15);
        let b = dkt_failure_bound(2.0 * std::f64::consts::LN_2, 0.25);
        assert!((b - 0.492_732_768_003_010_96).abs() < 1e-14 && b <= 0.5);
        assert!((dkt_failure_bound(1e12, 0.25) - 0.2).abs() < 1e-11);
    }

    #[test]
    fn corner_tau_values() {
        assert_eq!(corner_tau(&Prob::parse("0.5").unwrap()).unwrap(), 2);
        assert_eq!(corner_tau(&Prob::parse("0.1").unwrap()).unwrap(), 1);
        assert_eq!(corner_tau(&Prob::parse("0.9").unwrap()).unwrap(), 10);
    }

    #[test]
    fn corner_beats_plain_dkt_near_one() {
        let p = probs("0.9", "0.5");
        let plain = size_dkt(1 << 30, &p, None).unwrap();
        let corner = size_corner(1 << 30, &p).unwrap();
        assert_eq!(plain.hash_count(), BigUint::from(5010u32));
        assert_eq!(corner.tau, 10);
        // k' = 3 exactly since 0.5^10 = 2^-10
        assert_eq!(corner.inner.k, 3);
        assert_eq!(corner.hash_count(), BigUint::from(1320u32));
    }

    #[test]
    fn rejects_out_of_range() {
        let p = probs("0.9999999", "0.9999998");
        assert!(matches!(size_im(1 << 30, &p), Err(Error::OutOfRange(_))));
    }
}
