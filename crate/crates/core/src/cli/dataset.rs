//! Text datasets: a `# space=hamming d=<int>` or `# space=jaccard u=<int>`
//! header, then one point per line. Ids are line order from 0.

use std::io::{BufRead, Write};

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::families::universal::rng_from_seed;
use crate::families::Space;
use crate::points::{BitVector, SetPoint};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Points {
    Hamming(Vec<BitVector>),
    Jaccard(Vec<SetPoint>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub space: Space,
    pub points: Points,
}

impl Dataset {
    pub fn hamming(d: usize, points: Vec<BitVector>) -> Self {
        Self {
            space: Space::Hamming { d },
            points: Points::Hamming(points),
        }
    }

    pub fn jaccard(universe: u32, points: Vec<SetPoint>) -> Self {
        Self {
            space: Space::Jaccard { universe },
            points: Points::Jaccard(points),
        }
    }

    pub fn len(&self) -> usize {
        match &self.points {
            Points::Hamming(p) => p.len(),
            Points::Jaccard(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line?,
            None => return Err(Error::Parse { line: 1, msg: "empty dataset".into() }),
        };
        let space = parse_header(&header)?;
        let mut hamming = Vec::new();
        let mut sets = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            let at = |msg: String| Error::Parse { line: i + 1, msg };
            match space {
                Space::Hamming { d } => {
                    let x = BitVector::parse(text).map_err(|e| at(e.to_string()))?;
                    if x.len() != d {
                        return Err(at(format!("expected {d} bits, found {}", x.len())));
                    }
                    hamming.push(x);
                }
                Space::Jaccard { universe } => {
                    let elems = text
                        .split_ascii_whitespace()
                        .map(|t| t.parse::<u32>().map_err(|_| at(format!("bad element {t:?}"))))
                        .collect::<Result<Vec<_>>>()?;
                    if let Some(&e) = elems.iter().find(|&&e| e >= universe) {
                        return Err(at(format!("element {e} outside universe {universe}")));
                    }
                    sets.push(SetPoint::from_sorted(elems).map_err(|e| at(e.to_string()))?);
                }
            }
        }
        Ok(match space {
            Space::Hamming { d } => Dataset::hamming(d, hamming),
            Space::Jaccard { universe } => Dataset::jaccard(universe, sets),
        })
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        match &self.points {
            Points::Hamming(p) => {
                let Space::Hamming { d } = self.space else { unreachable!() };
                writeln!(out, "# space=hamming d={d}")?;
                p.iter().try_for_each(|x| writeln!(out, "{x}"))?;
            }
            Points::Jaccard(p) => {
                let Space::Jaccard { universe } = self.space else { unreachable!() };
                writeln!(out, "# space=jaccard u={universe}")?;
                p.iter().try_for_each(|x| writeln!(out, "{x}"))?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn parse_header(line: &str) -> Result<Space> {
    let bad = |msg: &str| Error::Parse { line: 1, msg: msg.into() };
    let rest = line
        .strip_prefix('#')
        .ok_or_else(|| bad("missing header `# space=...`"))?;
    let fields: Vec<&str> = rest.split_ascii_whitespace().collect();
    let value = |key: &str| {
        fields
            .iter()
            .find_map(|f| f.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
            .ok_or_else(|| bad(&format!("header lacks {key}=")))
    };
    match value("space")? {
        "hamming" => {
            let d = value("d")?.parse().ok().filter(|&d| d > 0).ok_or_else(|| bad("d must be a positive integer"))?;
            Ok(Space::Hamming { d })
        }
        "jaccard" => {
            let u = value("u")?.parse().ok().filter(|&u| u > 0).ok_or_else(|| bad("u must be a positive integer"))?;
            Ok(Space::Jaccard { universe: u })
        }
        other => Err(bad(&format!("unknown space {other:?}"))),
    }
}

/// A Hamming instance with one near point: `far` random points at distance
/// at least `far_min` from a random query, then one point at distance `near`.
/// Returns the data (planted point last) and the query.
pub fn planted_hamming(d: usize, far: usize, near: usize, far_min: u32, seed: u64) -> Result<(Dataset, BitVector)> {
    if near > d || far_min as usize > d {
        return Err(Error::invalid("distances exceed the dimension"));
    }
    let mut rng = rng_from_seed(seed);
    let q = BitVector::random(d, &mut rng);
    let mut points = Vec::with_capacity(far + 1);
    let mut attempts = 0u64;
    while points.len() < far {
        let x = BitVector::random(d, &mut rng);
        if q.hamming(&x) >= far_min {
            points.push(x);
        }
        attempts += 1;
        if attempts > 1000 * (far as u64 + 1) {
            return Err(Error::invalid("far-point distance is unreachable by random sampling"));
        }
    }
    let mut planted = q.clone();
    for i in sample(&mut rng, d, near) {
        planted.flip(i);
    }
    points.push(planted);
    Ok((Dataset::hamming(d, points), q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamming_round_trip() {
        let text = "# space=hamming d=4\n0101\n1111\n\n";
        let ds = Dataset::read(text.as_bytes()).unwrap();
        assert_eq!(ds.len(), 2);
        let mut out = Vec::new();
        ds.write(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "# space=hamming d=4\n0101\n1111\n");
    }

    #[test]
    fn jaccard_round_trip() {
        let text = "# space=jaccard u=10\n1 2 3\n0 9\n";
        let ds = Dataset::read(text.as_bytes()).unwrap();
        let mut out = Vec::new();
        ds.write(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn malformed_inputs() {
        for (text, line) in [
            ("", 1),
            ("space=hamming d=4\n", 1),
            ("# space=euclid d=4\n", 1),
            ("# space=hamming d=0\n", 1),
            ("# space=hamming d=4\n010\n", 2),
            ("# space=hamming d=4\n0101\n01x1\n", 3),
            ("# space=jaccard u=5\n1 5\n", 2),
            ("# space=jaccard u=5\n3 1\n", 2),
        ] {
            match Dataset::read(text.as_bytes()) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn planted_instance_shape() {
        let (ds, q) = planted_hamming(128, 200, 16, 48, 3).unwrap();
        let Points::Hamming(p) = &ds.points else { panic!() };
        assert_eq!(p.len(), 201);
        assert_eq!(q.hamming(&p[200]), 16);
        assert!(p[..200].iter().all(|x| q.hamming(x) >= 48));
        assert_eq!(planted_hamming(128, 200, 16, 48, 3).unwrap().0, ds);
    }
}
