//! Sum-tree storage of a complex vector with length-squared sampling.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// A complex vector stored under a binary sum tree of squared magnitudes.
///
/// The tree is implicit: node 1 is the root, node `x` has children `2x` and
/// `2x + 1`, and the leaves occupy `cap..2 * cap` where `cap` is the length
/// rounded up to a power of two. Padding leaves hold 0. Reading an entry is
/// O(1); writing and sampling walk one root-to-leaf path.
///
/// Storage is dense (one leaf per coordinate), so zero entries cost as much
/// as non-zero ones.
#[derive(Debug, Clone)]
pub struct SampledVector {
    values: Vec<Complex64>,
    tree: Vec<f64>,
    cap: usize,
}

impl SampledVector {
    pub fn build(values: &[Complex64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyVector);
        }
        let cap = values.len().next_power_of_two();
        let mut v = SampledVector {
            values: values.to_vec(),
            tree: vec![0.0; 2 * cap],
            cap,
        };
        v.rebuild();
        Ok(v)
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::build(&c)
    }

    /// Length-`n` vector of zeros.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::build(&vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn read(&self, i: usize) -> Result<Complex64> {
        self.values
            .get(i)
            .copied()
            .ok_or_else(|| Error::index(i, self.len()))
    }

    pub fn write(&mut self, i: usize, value: Complex64) -> Result<()> {
        self.write_counted(i, value).map(|_| ())
    }

    /// Writes `value` and returns the number of tree nodes touched.
    pub fn write_counted(&mut self, i: usize, value: Complex64) -> Result<usize> {
        if i >= self.len() {
            return Err(Error::index(i, self.len()));
        }
        self.values[i] = value;
        let mut node = self.cap + i;
        self.tree[node] = value.norm_sqr();
        let mut touched = 1;
        while node > 1 {
            node /= 2;
            self.tree[node] = self.tree[2 * node] + self.tree[2 * node + 1];
            touched += 1;
        }
        Ok(touched)
    }

    /// Squared magnitude of entry `i` as stored in its leaf.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.tree[self.cap + i]
    }

    /// `‖v‖²`, read from the root.
    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.tree[1]
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Recompute every node bottom-up from the stored values.
    pub fn rebuild(&mut self) {
        for (i, v) in self.values.iter().enumerate() {
            self.tree[self.cap + i] = v.norm_sqr();
        }
        for leaf in self.tree[self.cap + self.values.len()..].iter_mut() {
            *leaf = 0.0;
        }
        for node in (1..self.cap).rev() {
            self.tree[node] = self.tree[2 * node] + self.tree[2 * node + 1];
        }
    }

    /// Draw `i` with probability `|v(i)|² / ‖v‖²`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        self.sample_counted(rng).map(|(i, _)| i)
    }

    /// Like [`sample`](Self::sample), also returning the number of nodes visited.
    pub fn sample_counted<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(usize, usize)> {
        if !(self.norm_sq() > 0.0) {
            return Err(Error::ZeroNormSample);
        }
        let mut node = 1;
        let mut visited = 1;
        while node < self.cap {
            let left = self.tree[2 * node];
            let right = self.tree[2 * node + 1];
            let total = left + right;
            // Both children zero only happens through rounding; go left.
            node = if total <= 0.0 || rng.random::<f64>() * total < left {
                2 * node
            } else {
                2 * node + 1
            };
            visited += 1;
        }
        let i = node - self.cap;
        debug_assert!(i < self.len());
        Ok((i, visited))
    }

    /// Largest deviation of an internal node from the sum of its children,
    /// relative to the root.
    pub fn consistency_defect(&self) -> f64 {
        let root = self.norm_sq().max(f64::MIN_POSITIVE);
        (1..self.cap)
            .map(|node| (self.tree[node] - (self.tree[2 * node] + self.tree[2 * node + 1])).abs())
            .fold(0.0, f64::max)
            / root
    }

    /// Smallest value stored anywhere in the tree.
    pub fn min_node(&self) -> f64 {
        self.tree[1..].iter().copied().fold(f64::INFINITY, f64::min)
    }
}
