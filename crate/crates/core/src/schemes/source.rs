use super::{AiParams, Collection, DktParams, HybridParams, ImParams, SchemeParams};
use crate::error::{Error, Result};
use crate::families::universal::{derive_seed, Fingerprinter, PairwiseHash};
use crate::families::{HashFamily, HashFn};

const FUNCTION_STREAM: u64 = 1;
const PAIRWISE_STREAM: u64 = 2;
const FINGERPRINT_STREAM: u64 = 3;

/// Largest `L` a source will materialize keys for.
pub const MAX_BUILD_LOOKUPS: u64 = 1 << 26;

/// Keys of one point plus the number of base-function evaluations spent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub keys: Vec<u64>,
    pub base_evaluations: u64,
}

/// Where the `l`-th key takes its base functions from.
#[derive(Clone, Debug)]
enum Layout {
    Im(ImParams),
    Ai(AiParams),
    Dkt {
        params: DktParams,
        select: Vec<PairwiseHash>,
    },
    Hybrid {
        params: HybridParams,
        first: Vec<PairwiseHash>,
        second: Vec<PairwiseHash>,
    },
}

/// A built scheme: the drawn base functions and the recipe turning their
/// values into `L` bucket keys. Immutable once built.
pub struct HashSource<F: HashFamily> {
    family: F,
    params: SchemeParams,
    seed: u64,
    funcs: Vec<F::Func>,
    layout: Layout,
    fingerprinter: Fingerprinter,
    lookups: u64,
}

fn usize_of(v: u64) -> usize {
    usize::try_from(v).expect("bounded by MAX_BUILD_LOOKUPS")
}

fn check_collection(c: &Collection, what: &str) -> Result<()> {
    if c.m == 0 || c.l == 0 {
        return Err(Error::invalid(format!("{what}: m and L must be positive")));
    }
    Ok(())
}

fn selectors(k: u64, l: u64, m: u64, seed: u64, offset: u64) -> Result<Vec<PairwiseHash>> {
    (0..k)
        .map(|i| PairwiseHash::new(l, m, derive_seed(seed, PAIRWISE_STREAM, offset + i)))
        .collect()
}

impl<F: HashFamily> HashSource<F> {
    /// Draws exactly `H` base functions from `family` and the auxiliary
    /// pairwise hashes, all derived from `seed`.
    pub fn build(family: F, params: SchemeParams, seed: u64) -> Result<Self> {
        let lookups = params
            .lookups()
            .filter(|&l| l <= MAX_BUILD_LOOKUPS)
            .ok_or_else(|| Error::out_of_range(format!("L exceeds the build limit of {MAX_BUILD_LOOKUPS} keys")))?;
        let hash_count = params
            .hash_count()
            .filter(|&h| h <= MAX_BUILD_LOOKUPS)
            .ok_or_else(|| Error::out_of_range("H exceeds the build limit"))?;
        let layout = match params {
            SchemeParams::Im(p) => {
                if p.l == 0 {
                    return Err(Error::invalid("im: L must be positive"));
                }
                Layout::Im(p)
            }
            SchemeParams::Ai(p) => {
                if p.t == 0 || p.m1 == 0 || p.m2 == 0 || p.eta == 0 || p.k1 * p.t + p.k2 != p.k {
                    return Err(Error::invalid(format!("ai: inconsistent parameters {p:?}")));
                }
                Layout::Ai(p)
            }
            SchemeParams::Dkt(p) => {
                check_collection(&Collection { k: p.k, m: p.m, l: p.l }, "dkt")?;
                Layout::Dkt {
                    params: p,
                    select: selectors(p.k, p.l, p.m, seed, 0)?,
                }
            }
            SchemeParams::Hybrid(p) => {
                check_collection(&p.first, "hybrid first collection")?;
                check_collection(&p.second, "hybrid second collection")?;
                Layout::Hybrid {
                    params: p,
                    first: selectors(p.first.k, p.first.l, p.first.m, seed, 0)?,
                    second: selectors(p.second.k, p.second.l, p.second.m, seed, p.first.k)?,
                }
            }
        };
        let funcs = (0..hash_count)
            .map(|i| family.sample(derive_seed(seed, FUNCTION_STREAM, i)))
            .collect();
        Ok(Self {
            family,
            params,
            seed,
            funcs,
            layout,
            fingerprinter: Fingerprinter::new(derive_seed(seed, FINGERPRINT_STREAM, 0)),
            lookups,
        })
    }

    pub fn family(&self) -> &F {
        &self.family
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `L`.
    pub fn lookups(&self) -> usize {
        usize_of(self.lookups)
    }

    /// Number of stored base functions, `H`.
    pub fn num_functions(&self) -> usize {
        self.funcs.len()
    }

    pub fn functions(&self) -> &[F::Func] {
        &self.funcs
    }

    pub fn fingerprinter(&self) -> &Fingerprinter {
        &self.fingerprinter
    }

    /// Values of every base function at `x`, with the evaluation count.
    fn base_values(&self, x: &F::Point) -> (Vec<u64>, u64) {
        let mut evaluations = 0u64;
        let values = self
            .funcs
            .iter()
            .map(|h| {
                evaluations += 1;
                h.hash(x)
            })
            .collect();
        (values, evaluations)
    }

    /// Fingerprints of `g_1(x), ..., g_L(x)` in key order.
    pub fn evaluate_all(&self, x: &F::Point) -> Result<Vec<u64>> {
        Ok(self.evaluate_counted(x)?.keys)
    }

    pub fn evaluate_counted(&self, x: &F::Point) -> Result<Evaluation> {
        self.family.check_point(x)?;
        let (values, base_evaluations) = self.base_values(x);
        let keys = self.keys_from_values(&values);
        debug_assert_eq!(keys.len(), self.lookups());
        Ok(Evaluation { keys, base_evaluations })
    }

    fn keys_from_values(&self, v: &[u64]) -> Vec<u64> {
        let fp = &self.fingerprinter;
        match &self.layout {
            Layout::Im(p) => {
                let k = usize_of(p.k);
                (0..usize_of(p.l)).map(|l| fp.fingerprint(&v[l * k..(l + 1) * k])).collect()
            }
            Layout::Ai(p) => {
                let (t, m1, m2, k1, k2) = (usize_of(p.t), usize_of(p.m1), usize_of(p.m2), usize_of(p.k1), usize_of(p.k2));
                let rep_len = t * m1 * k1 + m2 * k2;
                let combos = self.lookups() / usize_of(p.eta);
                let mut keys = Vec::with_capacity(self.lookups());
                let mut inner = vec![0u64; t + 1];
                for rep in 0..usize_of(p.eta) {
                    let block = &v[rep * rep_len..(rep + 1) * rep_len];
                    let banks: Vec<u64> = block[..t * m1 * k1].chunks(k1.max(1)).map(|c| fp.fingerprint(c)).collect();
                    let banks = if k1 == 0 { vec![fp.fingerprint(&[]); t * m1] } else { banks };
                    let last: Vec<u64> = (0..m2)
                        .map(|j| fp.fingerprint(&block[t * m1 * k1 + j * k2..t * m1 * k1 + (j + 1) * k2]))
                        .collect();
                    for combo in 0..combos {
                        let (choice, last_j) = ai_decode(combo, t, m1, m2);
                        for (c, j) in choice.iter().enumerate() {
                            inner[c] = banks[c * m1 + j];
                        }
                        inner[t] = last[last_j];
                        keys.push(fp.fingerprint(&inner));
                    }
                }
                keys
            }
            Layout::Dkt { params, select } => dkt_keys(fp, v, params.m, params.l, select),
            Layout::Hybrid { params, first, second } => {
                let split = usize_of(params.first.k * params.first.m);
                let g1 = dkt_keys(fp, &v[..split], params.first.m, params.first.l, first);
                let g2 = dkt_keys(fp, &v[split..], params.second.m, params.second.l, second);
                let mut keys = Vec::with_capacity(g1.len() * g2.len());
                for &a in &g1 {
                    for &b in &g2 {
                        keys.push(fp.fingerprint(&[a, b]));
                    }
                }
                keys
            }
        }
    }

    /// Indices into the base-function bank whose values make up key `l`, in
    /// tuple order.
    pub fn key_members(&self, l: usize) -> Vec<usize> {
        assert!(l < self.lookups(), "key index {l} out of range");
        match &self.layout {
            Layout::Im(p) => {
                let k = usize_of(p.k);
                (l * k..(l + 1) * k).collect()
            }
            Layout::Ai(p) => {
                let (t, m1, m2, k1, k2) = (usize_of(p.t), usize_of(p.m1), usize_of(p.m2), usize_of(p.k1), usize_of(p.k2));
                let rep_len = t * m1 * k1 + m2 * k2;
                let combos = self.lookups() / usize_of(p.eta);
                let (rep, combo) = (l / combos, l % combos);
                let (choice, last_j) = ai_decode(combo, t, m1, m2);
                let base = rep * rep_len;
                let mut out = Vec::with_capacity(usize_of(p.k));
                for (c, j) in choice.into_iter().enumerate() {
                    let start = base + (c * m1 + j) * k1;
                    out.extend(start..start + k1);
                }
                let start = base + t * m1 * k1 + last_j * k2;
                out.extend(start..start + k2);
                out
            }
            Layout::Dkt { params, select } => dkt_members(l as u64, params.m, select, 0),
            Layout::Hybrid { params, first, second } => {
                let l2 = usize_of(params.second.l);
                let (i, j) = (l / l2, l % l2);
                let mut out = dkt_members(i as u64, params.first.m, first, 0);
                out.extend(dkt_members(j as u64, params.second.m, second, usize_of(params.first.k * params.first.m)));
                out
            }
        }
    }

    /// The raw (unfingerprinted) tuple `g_l(x)`.
    pub fn raw_key(&self, x: &F::Point, l: usize) -> Result<Vec<u64>> {
        self.family.check_point(x)?;
        Ok(self.key_members(l).into_iter().map(|i| self.funcs[i].hash(x)).collect())
    }

    /// Whether `g_l(x) = g_l(y)` as raw tuples for some `l`.
    pub fn collides_raw(&self, x: &F::Point, y: &F::Point) -> Result<bool> {
        self.family.check_point(x)?;
        self.family.check_point(y)?;
        let eq: Vec<bool> = self.funcs.iter().map(|h| h.hash(x) == h.hash(y)).collect();
        let all = |idx: std::ops::Range<usize>| eq[idx].iter().all(|&e| e);
        Ok(match &self.layout {
            Layout::Im(p) => {
                let k = usize_of(p.k);
                (0..usize_of(p.l)).any(|l| eq[l * k..(l + 1) * k].iter().all(|&e| e))
            }
            Layout::Ai(p) => {
                // a repetition matches iff every bank and the last bank hold a matching tuple
                let (t, m1, m2, k1, k2) = (usize_of(p.t), usize_of(p.m1), usize_of(p.m2), usize_of(p.k1), usize_of(p.k2));
                let rep_len = t * m1 * k1 + m2 * k2;
                (0..usize_of(p.eta)).any(|rep| {
                    let base = rep * rep_len;
                    let banks_ok = (0..t).all(|c| {
                        (0..m1).any(|j| all(base + (c * m1 + j) * k1..base + (c * m1 + j + 1) * k1))
                    });
                    let tail = base + t * m1 * k1;
                    banks_ok && (0..m2).any(|j| all(tail + j * k2..tail + (j + 1) * k2))
                })
            }
            Layout::Dkt { params, select } => dkt_any(&eq, params.m, params.l, select, 0),
            Layout::Hybrid { params, first, second } => {
                let split = usize_of(params.first.k * params.first.m);
                dkt_any(&eq, params.first.m, params.first.l, first, 0)
                    && dkt_any(&eq, params.second.m, params.second.l, second, split)
            }
        })
    }
}

/// Mixed-radix decoding of an AI combination index: `t` digits base `m1`
/// (most significant first) followed by one digit base `m2`.
fn ai_decode(mut combo: usize, t: usize, m1: usize, m2: usize) -> (Vec<usize>, usize) {
    let last = combo % m2;
    combo /= m2;
    let mut choice = vec![0; t];
    for c in (0..t).rev() {
        choice[c] = combo % m1;
        combo /= m1;
    }
    (choice, last)
}

fn dkt_keys(fp: &Fingerprinter, v: &[u64], m: u64, l: u64, select: &[PairwiseHash]) -> Vec<u64> {
    let m = usize_of(m);
    let k = select.len();
    (0..l)
        .map(|key| fp.fingerprint_iter(k, select.iter().enumerate().map(|(i, f)| v[i * m + usize_of(f.eval(key))])))
        .collect()
}

fn dkt_members(l: u64, m: u64, select: &[PairwiseHash], offset: usize) -> Vec<usize> {
    let m = usize_of(m);
    select
        .iter()
        .enumerate()
        .map(|(i, f)| offset + i * m + usize_of(f.eval(l)))
        .collect()
}

fn dkt_any(eq: &[bool], m: u64, l: u64, select: &[PairwiseHash], offset: usize) -> bool {
    let m = usize_of(m);
    (0..l).any(|key| {
        select
            .iter()
            .enumerate()
            .all(|(i, f)| eq[offset + i * m + usize_of(f.eval(key))])
    })
}
