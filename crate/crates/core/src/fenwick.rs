//! Binary indexed tree over non-negative weights, used for drawing indices
//! proportionally to weight with removal.

use rand::Rng;

#[derive(Debug, Clone)]
pub struct WeightedFenwick {
    tree: Vec<f64>,
    values: Vec<f64>,
    remaining: usize,
}

impl WeightedFenwick {
    pub fn new(weights: &[f64]) -> Self {
        let n = weights.len();
        let mut tree = vec![0.0; n + 1];
        for (i, &w) in weights.iter().enumerate() {
            debug_assert!(w >= 0.0 && w.is_finite());
            tree[i + 1] += w;
            let parent = (i + 1) + ((i + 1) & (!(i + 1) + 1));
            if parent <= n {
                let v = tree[i + 1];
                tree[parent] += v;
            }
        }
        let remaining = weights.iter().filter(|&&w| w > 0.0).count();
        Self {
            tree,
            values: weights.to_vec(),
            remaining,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.remaining == 0
    }

    /// Number of indices that still carry positive weight.
    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Sum of weights of indices `0..end`.
    pub fn prefix(&self, end: usize) -> f64 {
        let mut s = 0.0;
        let mut k = end;
        while k > 0 {
            s += self.tree[k];
            k &= k - 1;
        }
        s
    }

    pub fn total(&self) -> f64 {
        self.prefix(self.values.len())
    }

    /// Zeroes the weight of index `i`.
    pub fn remove(&mut self, i: usize) {
        let w = self.values[i];
        if w == 0.0 {
            return;
        }
        self.values[i] = 0.0;
        self.remaining -= 1;
        let n = self.values.len();
        let mut k = i + 1;
        while k <= n {
            self.tree[k] -= w;
            k += k & (!k + 1);
        }
    }

    /// Smallest index whose inclusive prefix sum exceeds `target`.
    fn descend(&self, mut target: f64) -> usize {
        let n = self.values.len();
        let mut pos = 0usize;
        let mut step = if n == 0 {
            0
        } else {
            1usize << (usize::BITS - 1 - n.leading_zeros())
        };
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }

    /// Draws an index with probability proportional to its current weight.
    /// Returns `None` once every weight has been removed.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        if self.remaining == 0 {
            return None;
        }
        let total = self.total();
        let mut idx = self.descend(rng.random::<f64>() * total);
        // Rounding in the running sums can land the descent on a removed slot
        // or past the end; snap to the nearest live index.
        if idx >= self.values.len() || self.values[idx] == 0.0 {
            idx = self.nearest_live(idx.min(self.values.len() - 1));
        }
        Some(idx)
    }

    fn nearest_live(&self, from: usize) -> usize {
        let n = self.values.len();
        for d in 0..n {
            if from >= d && self.values[from - d] > 0.0 {
                return from - d;
            }
            if from + d < n && self.values[from + d] > 0.0 {
                return from + d;
            }
        }
        unreachable!("sample() checked that a live index exists")
    }

    /// Draws and removes an index.
    pub fn take<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<usize> {
        let i = self.sample(rng)?;
        self.remove(i);
        Some(i)
    }
}
