//! Bucket tables and the early-terminating query loop.

mod codec;
mod table;

pub use codec::{Persist, INDEX_MAGIC, INDEX_VERSION};
pub use table::Table;

use crate::error::{Error, Result};
use crate::families::{HashFamily, Sensitivity};
use crate::schemes::HashSource;
use crate::sketch::{sketch_distance, Sketch, Sketcher};

/// Per-query work counters, returned by value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub base_hash_evaluations: u64,
    /// Buckets probed; the 1-based table index of the hit, or `L` on a miss.
    pub lookups: u64,
    /// True-distance computations against candidates.
    pub distance_computations: u64,
    /// Sketch comparisons against candidates (sketch queries only).
    pub sketch_comparisons: u64,
    pub returned: Option<u64>,
}

/// `L` hash tables over a single copy of the point set.
pub struct NnIndex<F: HashFamily> {
    source: HashSource<F>,
    sensitivity: Sensitivity,
    ids: Vec<u64>,
    points: Vec<F::Point>,
    tables: Vec<Table>,
}

/// Hashes every point into each of the source's `L` tables.
pub fn build_index<F, I>(points: I, source: HashSource<F>, s: Sensitivity) -> Result<NnIndex<F>>
where
    F: HashFamily,
    I: IntoIterator<Item = (u64, F::Point)>,
{
    let mut pairs: Vec<Vec<(u64, u32)>> = vec![Vec::new(); source.lookups()];
    let mut ids = Vec::new();
    let mut stored = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (id, x) in points {
        if !seen.insert(id) {
            return Err(Error::DuplicateId(id));
        }
        let pos = u32::try_from(stored.len()).map_err(|_| Error::out_of_range("more than 2^32 points"))?;
        let keys = source.evaluate_all(&x)?;
        for (table, key) in pairs.iter_mut().zip(keys) {
            table.push((key, pos));
        }
        ids.push(id);
        stored.push(x);
    }
    let index = NnIndex {
        tables: pairs.into_iter().map(Table::from_pairs).collect(),
        source,
        sensitivity: s,
        ids,
        points: stored,
    };
    Ok(index)
}

impl<F: HashFamily> NnIndex<F> {
    pub(crate) fn from_parts(
        source: HashSource<F>,
        sensitivity: Sensitivity,
        ids: Vec<u64>,
        points: Vec<F::Point>,
        tables: Vec<Table>,
    ) -> Self {
        Self {
            source,
            sensitivity,
            ids,
            points,
            tables,
        }
    }

    pub fn source(&self) -> &HashSource<F> {
        &self.source
    }

    pub fn sensitivity(&self) -> &Sensitivity {
        &self.sensitivity
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn points(&self) -> &[F::Point] {
        &self.points
    }

    pub fn point(&self, id: u64) -> Option<&F::Point> {
        self.ids.iter().position(|&i| i == id).map(|p| &self.points[p])
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    /// Scans tables `1..=L` in order and returns the first candidate closer
    /// than `r2`.
    pub fn query(&self, q: &F::Point) -> Result<(Option<u64>, QueryStats)> {
        let family = self.source.family();
        let r2 = self.sensitivity.r2();
        self.scan(q, |pos, stats| {
            stats.distance_computations += 1;
            Ok(family.distance(q, &self.points[pos]) < r2)
        })
    }

    /// Like [`query`](Self::query) but accepts a candidate when its sketch is
    /// within `threshold` (strictly) of the query's.
    pub fn query_with_sketches(
        &self,
        q: &F::Point,
        sketcher: &Sketcher<F>,
        sketches: &[Sketch],
        threshold: u64,
    ) -> Result<(Option<u64>, QueryStats)> {
        if sketches.len() != self.points.len() {
            return Err(Error::LengthMismatch {
                expected: self.points.len(),
                found: sketches.len(),
            });
        }
        let sq = sketcher.sketch(q)?;
        self.scan(q, |pos, stats| {
            stats.sketch_comparisons += 1;
            Ok(sketch_distance(&sq, &sketches[pos])? < threshold)
        })
    }

    /// Sketches of the stored points, in storage order.
    pub fn sketch_points(&self, sketcher: &Sketcher<F>) -> Result<Vec<Sketch>> {
        self.points.iter().map(|x| sketcher.sketch(x)).collect()
    }

    fn scan<A>(&self, q: &F::Point, mut accept: A) -> Result<(Option<u64>, QueryStats)>
    where
        A: FnMut(usize, &mut QueryStats) -> Result<bool>,
    {
        let eval = self.source.evaluate_counted(q)?;
        let mut stats = QueryStats {
            base_hash_evaluations: eval.base_evaluations,
            ..QueryStats::default()
        };
        for (l, (table, key)) in self.tables.iter().zip(&eval.keys).enumerate() {
            stats.lookups = l as u64 + 1;
            for &pos in table.get(*key).unwrap_or(&[]) {
                if accept(pos as usize, &mut stats)? {
                    let id = self.ids[pos as usize];
                    stats.returned = Some(id);
                    return Ok((Some(id), stats));
                }
            }
        }
        stats.lookups = self.tables.len() as u64;
        Ok((None, stats))
    }
}
