//! `LSHX1` index container.
//!
//! Little-endian throughout: magic, version, space, sensitivity, scheme
//! parameters and seed, then the points and the `L` tables with keys in
//! ascending order. Hash functions are re-derived from the seed on load.

use std::io::{Read, Write};

use num_rational::Ratio;

use super::{NnIndex, Table};
use crate::error::{Error, Result};
use crate::families::{bit_sampling_family, minhash_family, BitSampling, HashFamily, MinHash, Sensitivity, Space};
use crate::points::{BitVector, SetPoint};
use crate::schemes::{AiParams, Collection, DktParams, HashSource, HybridParams, ImParams, SchemeKind, SchemeParams};

pub const INDEX_MAGIC: &[u8; 6] = b"LSHX1\n";
pub const INDEX_VERSION: u32 = 1;

/// Families whose indexes can be written to and read from disk.
pub trait Persist: HashFamily + Sized {
    fn from_space(space: Space) -> Result<Self>;
    fn write_point<W: Write>(&self, out: &mut W, x: &Self::Point) -> Result<()>;
    fn read_point<R: Read>(&self, input: &mut R) -> Result<Self::Point>;
}

impl Persist for BitSampling {
    fn from_space(space: Space) -> Result<Self> {
        match space {
            Space::Hamming { d } => bit_sampling_family(d),
            other => Err(Error::Format(format!("expected a hamming index, found {other}"))),
        }
    }

    fn write_point<W: Write>(&self, out: &mut W, x: &BitVector) -> Result<()> {
        for w in x.words() {
            put_u64(out, *w)?;
        }
        Ok(())
    }

    fn read_point<R: Read>(&self, input: &mut R) -> Result<BitVector> {
        let words = (0..self.dim().div_ceil(64)).map(|_| get_u64(input)).collect::<Result<_>>()?;
        BitVector::from_words(self.dim(), words)
    }
}

impl Persist for MinHash {
    fn from_space(space: Space) -> Result<Self> {
        match space {
            Space::Jaccard { universe } => minhash_family(universe),
            other => Err(Error::Format(format!("expected a jaccard index, found {other}"))),
        }
    }

    fn write_point<W: Write>(&self, out: &mut W, x: &SetPoint) -> Result<()> {
        put_u64(out, x.len() as u64)?;
        for &e in x.elements() {
            out.write_all(&e.to_le_bytes())?;
        }
        Ok(())
    }

    fn read_point<R: Read>(&self, input: &mut R) -> Result<SetPoint> {
        let len = get_u64(input)?;
        if len > u64::from(self.universe()) {
            return Err(Error::Format(format!("set of {len} elements exceeds the universe")));
        }
        let elems = (0..len).map(|_| get_u32(input)).collect::<Result<_>>()?;
        let x = SetPoint::from_sorted(elems)?;
        self.check_point(&x)?;
        Ok(x)
    }
}

fn put_u64<W: Write>(out: &mut W, v: u64) -> Result<()> {
    out.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f64<W: Write>(out: &mut W, v: f64) -> Result<()> {
    put_u64(out, v.to_bits())
}

fn get_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_u8<R: Read>(input: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    input.read_exact(&mut b)?;
    Ok(b[0])
}

fn get_f64<R: Read>(input: &mut R) -> Result<f64> {
    Ok(f64::from_bits(get_u64(input)?))
}

fn get_len<R: Read>(input: &mut R, what: &str) -> Result<usize> {
    let v = get_u64(input)?;
    usize::try_from(v)
        .ok()
        .filter(|&v| v <= u32::MAX as usize)
        .ok_or_else(|| Error::Format(format!("{what} count {v} is too large")))
}

fn write_params<W: Write>(out: &mut W, params: &SchemeParams) -> Result<()> {
    out.write_all(&[params.kind().tag()])?;
    let eps = |out: &mut W, e: &Ratio<u64>| -> Result<()> {
        put_u64(out, *e.numer())?;
        put_u64(out, *e.denom())
    };
    match params {
        SchemeParams::Im(p) => [p.k, p.l].iter().try_for_each(|&v| put_u64(out, v)),
        SchemeParams::Ai(p) => {
            [p.t, p.k, p.k1, p.k2, p.m1, p.m2, p.eta].iter().try_for_each(|&v| put_u64(out, v))?;
            put_f64(out, p.phi)
        }
        SchemeParams::Dkt(p) => {
            [p.k, p.m, p.l].iter().try_for_each(|&v| put_u64(out, v))?;
            eps(out, &p.eps)
        }
        SchemeParams::Hybrid(p) => {
            let (a, b) = (p.first, p.second);
            [p.k, a.k, a.m, a.l, b.k, b.m, b.l].iter().try_for_each(|&v| put_u64(out, v))?;
            eps(out, &p.eps)
        }
    }
}

fn read_params<R: Read>(input: &mut R) -> Result<SchemeParams> {
    let tag = get_u8(input)?;
    let kind = SchemeKind::from_tag(tag).ok_or_else(|| Error::Format(format!("unknown scheme tag {tag}")))?;
    let mut ints = |n: usize| (0..n).map(|_| get_u64(input)).collect::<Result<Vec<_>>>();
    let params = match kind {
        SchemeKind::Im => {
            let v = ints(2)?;
            SchemeParams::Im(ImParams { k: v[0], l: v[1] })
        }
        SchemeKind::Ai => {
            let v = ints(7)?;
            SchemeParams::Ai(AiParams {
                t: v[0],
                k: v[1],
                k1: v[2],
                k2: v[3],
                m1: v[4],
                m2: v[5],
                eta: v[6],
                phi: get_f64(input)?,
            })
        }
        SchemeKind::Dkt => {
            let v = ints(5)?;
            SchemeParams::Dkt(DktParams {
                k: v[0],
                m: v[1],
                l: v[2],
                eps: read_eps(v[3], v[4])?,
            })
        }
        SchemeKind::Hybrid => {
            let v = ints(9)?;
            SchemeParams::Hybrid(HybridParams {
                k: v[0],
                first: Collection { k: v[1], m: v[2], l: v[3] },
                second: Collection { k: v[4], m: v[5], l: v[6] },
                eps: read_eps(v[7], v[8])?,
            })
        }
    };
    Ok(params)
}

fn read_eps(num: u64, den: u64) -> Result<Ratio<u64>> {
    if den == 0 {
        return Err(Error::Format("zero denominator in epsilon".into()));
    }
    Ok(Ratio::new(num, den))
}

fn space_tag(space: Space) -> (u8, u64) {
    match space {
        Space::Hamming { d } => (0, d as u64),
        Space::Jaccard { universe } => (1, u64::from(universe)),
    }
}

impl<F: Persist> NnIndex<F> {
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let out = &mut out;
        out.write_all(INDEX_MAGIC)?;
        out.write_all(&INDEX_VERSION.to_le_bytes())?;
        let (tag, dim) = space_tag(self.source.family().space());
        out.write_all(&[tag])?;
        put_u64(out, dim)?;
        let s = &self.sensitivity;
        for v in [s.r1(), s.r2(), s.p1(), s.p2()] {
            put_f64(out, v)?;
        }
        write_params(out, self.source.params())?;
        put_u64(out, self.source.seed())?;
        put_u64(out, self.points.len() as u64)?;
        for (id, x) in self.ids.iter().zip(&self.points) {
            put_u64(out, *id)?;
            self.source.family().write_point(out, x)?;
        }
        put_u64(out, self.tables.len() as u64)?;
        for table in &self.tables {
            put_u64(out, table.len() as u64)?;
            for (key, bucket) in table.buckets() {
                put_u64(out, key)?;
                put_u64(out, bucket.len() as u64)?;
                for &pos in bucket {
                    out.write_all(&pos.to_le_bytes())?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Reads an index written by [`write_to`](Self::write_to), rebuilding the
    /// hash source from the stored parameters and seed.
    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let input = &mut input;
        let mut magic = [0u8; 6];
        input.read_exact(&mut magic)?;
        if &magic != INDEX_MAGIC {
            return Err(Error::Format("not an LSHX1 index".into()));
        }
        let version = get_u32(input)?;
        if version != INDEX_VERSION {
            return Err(Error::Format(format!("unsupported index version {version}")));
        }
        let space = match (get_u8(input)?, get_u64(input)?) {
            (0, d) => Space::Hamming {
                d: usize::try_from(d).map_err(|_| Error::Format("dimension too large".into()))?,
            },
            (1, u) => Space::Jaccard {
                universe: u32::try_from(u).map_err(|_| Error::Format("universe too large".into()))?,
            },
            (t, _) => return Err(Error::Format(format!("unknown space tag {t}"))),
        };
        let family = F::from_space(space)?;
        let (r1, r2, p1, p2) = (get_f64(input)?, get_f64(input)?, get_f64(input)?, get_f64(input)?);
        let sensitivity = Sensitivity::new(r1, r2, p1, p2)?;
        let params = read_params(input)?;
        let seed = get_u64(input)?;
        let source = HashSource::build(family, params, seed)?;
        let n = get_len(input, "point")?;
        let mut ids = Vec::with_capacity(n.min(1 << 20));
        let mut points = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            ids.push(get_u64(input)?);
            points.push(source.family().read_point(input)?);
        }
        let l = get_u64(input)?;
        if l != source.lookups() as u64 {
            return Err(Error::Format(format!("index has {l} tables, parameters give {}", source.lookups())));
        }
        let mut tables = Vec::with_capacity(source.lookups());
        for _ in 0..l {
            let keys = get_len(input, "bucket")?;
            let mut pairs = Vec::with_capacity(n.min(1 << 20));
            let mut placed = vec![false; n];
            let mut last = None;
            for _ in 0..keys {
                let key = get_u64(input)?;
                if last.is_some_and(|k| k >= key) {
                    return Err(Error::Format("bucket keys not strictly increasing".into()));
                }
                last = Some(key);
                let len = get_len(input, "bucket entry")?;
                if len == 0 {
                    return Err(Error::Format("empty bucket".into()));
                }
                for _ in 0..len {
                    let pos = get_u32(input)?;
                    match placed.get_mut(pos as usize) {
                        Some(p) if !*p => *p = true,
                        Some(_) => return Err(Error::Format(format!("point {pos} stored twice in one table"))),
                        None => return Err(Error::Format(format!("bucket references missing point {pos}"))),
                    }
                    pairs.push((key, pos));
                }
            }
            let table = Table::from_pairs(pairs);
            if table.entries() != n {
                return Err(Error::Format(format!("table holds {} entries for {n} points", table.entries())));
            }
            tables.push(table);
        }
        let mut rest = [0u8; 1];
        if input.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes after index".into()));
        }
        Ok(NnIndex::from_parts(source, sensitivity, ids, points, tables))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calc::CollisionProbs;
    use crate::families::universal::rng_from_seed;
    use crate::index::build_index;
    use crate::schemes::{derive_params, Overrides};

    fn hamming_index(kind: SchemeKind, seed: u64) -> NnIndex<BitSampling> {
        let f = bit_sampling_family(40).unwrap();
        let probs = CollisionProbs::parse("0.75", "0.25").unwrap();
        let params = derive_params(kind, 64, &probs, &Overrides::default()).unwrap();
        let mut rng = rng_from_seed(seed);
        let pts: Vec<_> = (0..64u64).map(|i| (i * 3, BitVector::random(40, &mut rng))).collect();
        let s = Sensitivity::new(10.0, 30.0, 0.75, 0.25).unwrap();
        build_index(pts, HashSource::build(f, params, seed).unwrap(), s).unwrap()
    }

    fn bytes<F: Persist>(idx: &NnIndex<F>) -> Vec<u8> {
        let mut buf = Vec::new();
        idx.write_to(&mut buf).unwrap();
        buf
    }

    #[test]
    fn identical_builds_serialize_identically() {
        for kind in SchemeKind::ALL {
            assert_eq!(bytes(&hamming_index(kind, 5)), bytes(&hamming_index(kind, 5)));
        }
    }

    #[test]
    fn round_trip_preserves_queries() {
        let mut rng = rng_from_seed(99);
        for kind in SchemeKind::ALL {
            let idx = hamming_index(kind, 11);
            let buf = bytes(&idx);
            assert_eq!(&buf[..6], b"LSHX1\n");
            let back = NnIndex::<BitSampling>::read_from(&buf[..]).unwrap();
            assert_eq!(bytes(&back), buf);
            for _ in 0..20 {
                let q = BitVector::random(40, &mut rng);
                assert_eq!(idx.query(&q).unwrap(), back.query(&q).unwrap());
            }
        }
    }

    #[test]
    fn jaccard_round_trip() {
        let f = minhash_family(100).unwrap();
        let params = SchemeParams::Im(ImParams { k: 2, l: 5 });
        let pts = vec![(0, SetPoint::new(vec![1, 2, 3])), (1, SetPoint::new(vec![50, 99]))];
        let s = Sensitivity::new(0.2, 0.6, 0.8, 0.4).unwrap();
        let idx = build_index(pts, HashSource::build(f, params, 1).unwrap(), s).unwrap();
        let back = NnIndex::<MinHash>::read_from(&bytes(&idx)[..]).unwrap();
        assert_eq!(back.points(), idx.points());
        assert!(NnIndex::<BitSampling>::read_from(&bytes(&idx)[..]).is_err());
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let buf = bytes(&hamming_index(SchemeKind::Im, 1));
        assert!(NnIndex::<BitSampling>::read_from(&buf[..buf.len() - 1]).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(NnIndex::<BitSampling>::read_from(&extra[..]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(NnIndex::<BitSampling>::read_from(&bad[..]).is_err());
        let mut ver = buf;
        ver[6] = 2;
        assert!(NnIndex::<BitSampling>::read_from(&ver[..]).is_err());
    }
}
