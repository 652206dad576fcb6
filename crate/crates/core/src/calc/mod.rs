//! Closed-form calculators: `rho`, exact hash-function and lookup counts for
//! every framework, the powered corner-case variant of DKT, and CSV tables of
//! `log2 H` against `p2`.

pub mod exact;
pub mod xp;

use std::fmt;
use std::io::Write;

use num_bigint::BigUint;

pub use exact::{dkt_failure_bound, CollisionProbs, Epsilon, Prob};
use exact::{size_ai, size_corner, size_dkt, size_hybrid, size_im};
pub use xp::Dd;

use crate::error::{Error, Result};
use crate::schemes::{Overrides, SchemeKind};

/// `ln(1/p1) / ln(1/p2)`, in (0, 1).
pub fn rho(p1: &Prob, p2: &Prob) -> Result<Dd> {
    let probs = CollisionProbs::new(p1.clone(), p2.clone())?;
    if probs.p1 == probs.p2 || p1.numer() * p2.denom() == p2.numer() * p1.denom() {
        return Err(Error::invalid("rho needs p2 < p1"));
    }
    Ok(p1.to_dd().recip().ln() / p2.to_dd().recip().ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CountScheme {
    Im,
    Ai,
    Dkt,
    Hybrid,
    CornerDkt,
}

impl CountScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            CountScheme::Im => "im",
            CountScheme::Ai => "ai",
            CountScheme::Dkt => "dkt",
            CountScheme::Hybrid => "hybrid",
            CountScheme::CornerDkt => "corner-dkt",
        }
    }
}

impl From<SchemeKind> for CountScheme {
    fn from(k: SchemeKind) -> Self {
        match k {
            SchemeKind::Im => CountScheme::Im,
            SchemeKind::Ai => CountScheme::Ai,
            SchemeKind::Dkt => CountScheme::Dkt,
            SchemeKind::Hybrid => CountScheme::Hybrid,
        }
    }
}

impl fmt::Display for CountScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The auxiliary parameter of a row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Aux {
    None,
    T(u64),
    Tau(u64),
    Eps(Epsilon),
}

impl fmt::Display for Aux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aux::None => Ok(()),
            Aux::T(t) => write!(f, "t={t}"),
            Aux::Tau(t) => write!(f, "tau={t}"),
            Aux::Eps(e) => write!(f, "eps={e}"),
        }
    }
}

/// One scheme's exact counts at `(n, p1, p2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountRow {
    pub scheme: CountScheme,
    pub n: u64,
    pub p1: Prob,
    pub p2: Prob,
    pub k: u64,
    pub aux: Aux,
    pub l: BigUint,
    pub h: BigUint,
}

impl CountRow {
    pub fn log2_h(&self) -> f64 {
        (Dd::from_biguint(&self.h).ln() / Dd::LN2).to_f64()
    }
}

pub fn scheme_counts(kind: SchemeKind, n: u64, probs: &CollisionProbs, overrides: &Overrides) -> Result<CountRow> {
    let row = |k, aux, l, h| CountRow {
        scheme: kind.into(),
        n,
        p1: probs.p1.clone(),
        p2: probs.p2.clone(),
        k,
        aux,
        l,
        h,
    };
    Ok(match kind {
        SchemeKind::Im => {
            let s = size_im(n, probs)?;
            row(s.k, Aux::None, s.l.clone(), s.hash_count())
        }
        SchemeKind::Ai => {
            let s = size_ai(n, probs, overrides.t)?;
            row(s.k, Aux::T(s.t), s.lookups(), s.hash_count())
        }
        SchemeKind::Dkt => {
            let s = size_dkt(n, probs, overrides.eps)?;
            row(s.k, Aux::Eps(s.eps), s.l.clone(), s.hash_count())
        }
        SchemeKind::Hybrid => {
            let s = size_hybrid(n, probs, overrides.sketching)?;
            row(s.k, Aux::Eps(s.eps), s.lookups(), s.hash_count())
        }
    })
}

/// DKT on `H^tau`, reporting `k` of the powered family, `tau` as aux, and
/// `H` in base-family evaluations.
pub fn corner_counts(n: u64, probs: &CollisionProbs) -> Result<CountRow> {
    let s = size_corner(n, probs)?;
    Ok(CountRow {
        scheme: CountScheme::CornerDkt,
        n,
        p1: probs.p1.clone(),
        p2: probs.p2.clone(),
        k: s.inner.k,
        aux: Aux::Tau(s.tau),
        l: s.inner.l.clone(),
        h: s.hash_count(),
    })
}

/// The schemes of the comparison table, in emission order.
pub const FIGURE_SCHEMES: [CountScheme; 4] = [
    CountScheme::Im,
    CountScheme::Ai,
    CountScheme::Dkt,
    CountScheme::CornerDkt,
];

/// Rows for im, ai (t = argmin H), dkt and corner-dkt at every `p2` of the
/// grid, scheme-major.
pub fn figure_table(n: u64, p1: &Prob, p2_grid: &[Prob]) -> Result<Vec<CountRow>> {
    let grid = p2_grid
        .iter()
        .map(|p2| CollisionProbs::new(p1.clone(), p2.clone()))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(grid.len() * FIGURE_SCHEMES.len());
    let none = Overrides::default();
    for scheme in FIGURE_SCHEMES {
        for probs in &grid {
            rows.push(match scheme {
                CountScheme::Im => scheme_counts(SchemeKind::Im, n, probs, &none)?,
                CountScheme::Ai => scheme_counts(SchemeKind::Ai, n, probs, &none)?,
                CountScheme::Dkt => scheme_counts(SchemeKind::Dkt, n, probs, &none)?,
                CountScheme::Hybrid => scheme_counts(SchemeKind::Hybrid, n, probs, &none)?,
                CountScheme::CornerDkt => corner_counts(n, probs)?,
            });
        }
    }
    Ok(rows)
}

/// Parses `start:end:step` into exact probabilities, inclusive of `end`.
pub fn parse_grid(spec: &str) -> Result<Vec<Prob>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, end, step] = parts.as_slice() else {
        return Err(Error::invalid(format!("grid {spec:?} is not start:end:step")));
    };
    let start = Prob::parse(start)?;
    let end = Prob::parse(end)?;
    let step = Prob::parse(step)?;
    let mut out = Vec::new();
    // work over a common denominator so 0.05 + 0.05 + ... stays exact
    let den = start.denom() * end.denom() * step.denom();
    let to_units = |p: &Prob| p.numer() * (&den / p.denom());
    let (mut cur, last, inc) = (to_units(&start), to_units(&end), to_units(&step));
    let digits = [start.label(), end.label(), step.label()]
        .iter()
        .map(|l| l.split_once('.').map_or(0, |(_, f)| f.len()))
        .max()
        .unwrap_or(0);
    while cur <= last {
        let label = decimal_label(&cur, &den, digits);
        out.push(Prob::parse(&label).or_else(|_| Prob::parse(&format!("{cur}/{den}")))?);
        cur += &inc;
    }
    Ok(out)
}

fn decimal_label(num: &BigUint, den: &BigUint, digits: usize) -> String {
    let scaled = num * BigUint::from(10u32).pow(digits as u32);
    if &scaled % den != BigUint::ZERO {
        return format!("{num}/{den}");
    }
    let v = (scaled / den).to_string();
    if digits == 0 {
        return v;
    }
    let v = format!("{v:0>width$}", width = digits + 1);
    let (i, f) = v.split_at(v.len() - digits);
    format!("{i}.{f}")
}

pub const CSV_HEADER: [&str; 9] = ["scheme", "n", "p1", "p2", "k", "aux", "L", "H", "log2H"];

/// Writes rows as RFC 4180 CSV with a header row.
pub fn write_csv<W: Write>(out: W, rows: &[CountRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.scheme.to_string(),
            r.n.to_string(),
            r.p1.to_string(),
            r.p2.to_string(),
            r.k.to_string(),
            r.aux.to_string(),
            r.l.to_string(),
            r.h.to_string(),
            format!("{:?}", r.log2_h()),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
