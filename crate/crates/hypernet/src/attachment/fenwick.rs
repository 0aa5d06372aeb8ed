//! Append-only Fenwick tree over f64 weights with O(log n) update and
//! prefix-target search, used for within-bucket weighted sampling.

#[derive(Debug, Clone, Default)]
pub(crate) struct Fenwick {
    tree: Vec<f64>,
    vals: Vec<f64>,
}

impl Fenwick {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.vals[i]
    }

    /// Sum of values at indices `< i`.
    pub fn prefix(&self, i: usize) -> f64 {
        let mut j = i;
        let mut sum = 0.0;
        while j > 0 {
            sum += self.tree[j - 1];
            j -= j & j.wrapping_neg();
        }
        sum
    }

    pub fn total(&self) -> f64 {
        self.prefix(self.len())
    }

    /// Append a new slot with weight `w`.
    pub fn push(&mut self, w: f64) {
        self.vals.push(w);
        let j = self.vals.len();
        let lowbit = j & j.wrapping_neg();
        // tree[j] aggregates vals[j-lowbit .. j] (1-based)
        let node = w + self.prefix(j - 1) - self.prefix(j - lowbit);
        self.tree.push(node);
    }

    pub fn add(&mut self, i: usize, delta: f64) {
        self.vals[i] += delta;
        let mut j = i + 1;
        while j <= self.tree.len() {
            self.tree[j - 1] += delta;
            j += j & j.wrapping_neg();
        }
    }

    pub fn set(&mut self, i: usize, w: f64) {
        let delta = w - self.vals[i];
        self.add(i, delta);
    }

    /// Drop the last slot.
    pub fn pop(&mut self) {
        let last = self.len() - 1;
        self.set(last, 0.0);
        self.vals.pop();
        self.tree.pop();
    }

    /// Smallest index whose inclusive prefix sum exceeds `target`; expects
    /// `0 <= target < total()`. Clamps to the last slot on float edge cases.
    pub fn search(&self, mut target: f64) -> usize {
        let n = self.len();
        let mut pos = 0usize;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next - 1] <= target {
                target -= self.tree[next - 1];
                pos = next;
            }
            step >>= 1;
        }
        pos.min(n - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_set_prefix_roundtrip() {
        let mut f = Fenwick::new();
        let ws = [2.0, 0.5, 3.0, 1.0, 4.0, 0.25, 7.0];
        for &w in &ws {
            f.push(w);
        }
        let mut acc = 0.0;
        for (i, &w) in ws.iter().enumerate() {
            assert!((f.prefix(i) - acc).abs() < 1e-12);
            acc += w;
        }
        assert!((f.total() - acc).abs() < 1e-12);

        f.set(2, 10.0);
        assert!((f.total() - (acc + 7.0)).abs() < 1e-12);
        assert_eq!(f.value(2), 10.0);
    }

    #[test]
    fn search_finds_owning_slot() {
        let mut f = Fenwick::new();
        for &w in &[1.0, 2.0, 3.0, 4.0] {
            f.push(w);
        }
        assert_eq!(f.search(0.0), 0);
        assert_eq!(f.search(0.999), 0);
        assert_eq!(f.search(1.0), 1);
        assert_eq!(f.search(2.5), 1);
        assert_eq!(f.search(3.0), 2);
        assert_eq!(f.search(5.999), 2);
        assert_eq!(f.search(6.0), 3);
        assert_eq!(f.search(9.999), 3);
    }

    #[test]
    fn pop_keeps_sums_consistent() {
        let mut f = Fenwick::new();
        for &w in &[1.0, 2.0, 3.0] {
            f.push(w);
        }
        f.pop();
        assert_eq!(f.len(), 2);
        assert!((f.total() - 3.0).abs() < 1e-12);
        f.push(5.0);
        assert!((f.total() - 8.0).abs() < 1e-12);
        assert_eq!(f.search(3.5), 2);
    }
}
