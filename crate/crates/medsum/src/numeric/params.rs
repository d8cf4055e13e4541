//! Named parameter collections.
//!
//! Every learnable array is addressed by a string name. The set is ordered
//! (BTreeMap) so initialization, serialization and gradient checking walk the
//! parameters in one deterministic order.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::array::Array;

/// An ordered name → array map. Gradients use the same representation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamSet {
    entries: BTreeMap<String, Array>,
}

impl ParamSet {
    pub fn new() -> Self {
        ParamSet {
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, name: &str, array: Array) {
        self.entries.insert(name.to_string(), array);
    }

    pub fn get(&self, name: &str) -> Result<&Array> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::Contract(format!("unknown parameter `{name}`")))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Array> {
        self.entries
            .get_mut(name)
            .ok_or_else(|| Error::Contract(format!("unknown parameter `{name}`")))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    /// Iteration in sorted-name order.
    pub fn iter(&self) -> impl Iterator<Item = (&String, &Array)> {
        self.entries.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Array)> {
        self.entries.iter_mut()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar values across all arrays.
    pub fn scalar_count(&self) -> usize {
        self.entries.values().map(Array::len).sum()
    }

    /// Fill every array with uniform(lo, hi) draws, in sorted-name order.
    pub fn init_uniform<R: Rng>(&mut self, lo: f64, hi: f64, rng: &mut R) {
        for (_, array) in self.entries.iter_mut() {
            for v in array.data_mut() {
                *v = rng.gen_range(lo..hi);
            }
        }
    }

    /// Same names, all-zero arrays of matching shapes.
    pub fn zeros_like(&self) -> ParamSet {
        let mut out = ParamSet::new();
        for (name, array) in self.iter() {
            out.insert(name, Array::zeros(array.shape().to_vec()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn init_is_deterministic_and_order_independent() {
        let mut a = ParamSet::new();
        a.insert("b", Array::zeros(vec![2]));
        a.insert("a", Array::zeros(vec![3]));
        let mut b = ParamSet::new();
        b.insert("a", Array::zeros(vec![3]));
        b.insert("b", Array::zeros(vec![2]));
        a.init_uniform(-0.1, 0.1, &mut ChaCha8Rng::seed_from_u64(3));
        b.init_uniform(-0.1, 0.1, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }
}
