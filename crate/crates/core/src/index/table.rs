//! Immutable bucket table: sorted distinct keys, bucket offsets, and one flat
//! array of point positions.

/// One hash table mapping keys to the positions of the points stored under
/// them. Buckets list positions in increasing order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    keys: Vec<u64>,
    /// `offsets[i]..offsets[i + 1]` is bucket `i` in `positions`.
    offsets: Vec<u32>,
    positions: Vec<u32>,
}

impl Table {
    /// Groups `(key, position)` pairs into buckets.
    pub(crate) fn from_pairs(mut pairs: Vec<(u64, u32)>) -> Self {
        pairs.sort_unstable();
        let mut t = Table {
            keys: Vec::new(),
            offsets: Vec::new(),
            positions: Vec::with_capacity(pairs.len()),
        };
        for (key, pos) in pairs {
            if t.keys.last() != Some(&key) {
                t.keys.push(key);
                t.offsets.push(t.positions.len() as u32);
            }
            t.positions.push(pos);
        }
        if !t.keys.is_empty() {
            t.offsets.push(t.positions.len() as u32);
        }
        t
    }

    /// Positions stored under `key`.
    pub fn get(&self, key: u64) -> Option<&[u32]> {
        let i = self.keys.binary_search(&key).ok()?;
        Some(self.bucket(i))
    }

    fn bucket(&self, i: usize) -> &[u32] {
        &self.positions[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    /// Number of distinct keys.
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Total stored positions over all buckets.
    pub fn entries(&self) -> usize {
        self.positions.len()
    }

    /// Buckets in increasing key order.
    pub fn buckets(&self) -> impl Iterator<Item = (u64, &[u32])> + '_ {
        self.keys.iter().enumerate().map(|(i, &k)| (k, self.bucket(i)))
    }
}
