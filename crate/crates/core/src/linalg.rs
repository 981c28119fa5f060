//! Exact rank computations over the rationals.

use std::collections::BTreeMap;

use crate::arith::Rat;

/// Sparse vector with ordered keys.
pub type SparseVec<K> = BTreeMap<K, Rat>;

/// Incremental row echelon form; each stored row is normalized to leading coefficient 1.
#[derive(Clone, Debug)]
pub struct Echelon<K: Ord + Clone> {
    rows: BTreeMap<K, SparseVec<K>>,
}

impl<K: Ord + Clone> Default for Echelon<K> {
    fn default() -> Self {
        Echelon { rows: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> Echelon<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the stored rows.
    pub fn reduce(&self, mut v: SparseVec<K>) -> SparseVec<K> {
        v.retain(|_, c| !c.is_zero());
        loop {
            let pivot = v.keys().find(|k| self.rows.contains_key(*k)).cloned();
            let Some(k) = pivot else { return v };
            let c = v[&k].clone();
            for (kk, x) in &self.rows[&k] {
                let e = v.entry(kk.clone()).or_default();
                *e -= &(&c * x);
                if e.is_zero() {
                    v.remove(kk);
                }
            }
        }
    }

    /// Adds `v` to the span; returns whether the rank grew.
    pub fn insert(&mut self, v: SparseVec<K>) -> bool {
        let v = self.reduce(v);
        let Some((lead, c)) = v.iter().next().map(|(k, c)| (k.clone(), c.clone())) else {
            return false;
        };
        let inv = c.recip();
        let row: SparseVec<K> = v.into_iter().map(|(k, x)| (k, x * &inv)).collect();
        // keep stored rows reduced against the new pivot
        for other in self.rows.values_mut() {
            if let Some(f) = other.get(&lead).cloned() {
                for (k, x) in &row {
                    let e = other.entry(k.clone()).or_default();
                    *e -= &(&f * x);
                    if e.is_zero() {
                        other.remove(k);
                    }
                }
            }
        }
        self.rows.insert(lead, row);
        true
    }
}

/// Rank of a family of sparse vectors.
pub fn rank<K: Ord + Clone>(vectors: impl IntoIterator<Item = SparseVec<K>>) -> usize {
    let mut e = Echelon::new();
    for v in vectors {
        e.insert(v);
    }
    e.rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[(u32, i64)]) -> SparseVec<u32> {
        xs.iter().map(|&(k, c)| (k, Rat::int(c))).collect()
    }

    #[test]
    fn ranks() {
        assert_eq!(rank(vec![v(&[(0, 1), (1, 2)]), v(&[(0, 2), (1, 4)])]), 1);
        assert_eq!(rank(vec![v(&[(0, 1), (1, 2)]), v(&[(1, 1)]), v(&[(0, 3)])]), 2);
        assert_eq!(rank(vec![v(&[]), v(&[(5, 0)])]), 0);
        assert_eq!(rank(vec![v(&[(0, 1), (2, 1)]), v(&[(1, 1), (2, 1)]), v(&[(0, 1), (1, -1)])]), 2);
        assert_eq!(rank(vec![v(&[(0, 1), (2, 1)]), v(&[(1, 1), (2, 1)]), v(&[(0, 1), (1, 1)])]), 3);
    }
}
