use std::mem;

/// Union-find over `0..len` with union by rank and path halving.
#[derive(Clone, Debug)]
pub struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
    count: usize,
}

impl DisjointSets {
    pub fn new(len: usize) -> Self {
        DisjointSets { parent: (0..len).collect(), rank: vec![0; len], count: len }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Number of disjoint sets.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            let grandparent = self.parent[self.parent[x]];
            self.parent[x] = grandparent;
            x = grandparent;
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns the new root if they were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> Option<usize> {
        let mut ra = self.find(a);
        let mut rb = self.find(b);
        if ra == rb {
            return None;
        }
        if self.rank[ra] < self.rank[rb] {
            mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        if self.rank[ra] == self.rank[rb] {
            self.rank[ra] += 1;
        }
        self.count -= 1;
        Some(ra)
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Compact labels `0..count`, numbered by first appearance.
    pub fn labels(&mut self) -> Vec<usize> {
        let mut compact = vec![usize::MAX; self.len()];
        let mut next = 0;
        (0..self.len())
            .map(|v| {
                let root = self.find(v);
                if compact[root] == usize::MAX {
                    compact[root] = next;
                    next += 1;
                }
                compact[root]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_decrements_count_once() {
        let mut d = DisjointSets::new(5);
        assert_eq!(d.count(), 5);
        assert!(d.union(0, 1).is_some());
        assert_eq!(d.count(), 4);
        assert!(d.union(1, 0).is_none());
        assert_eq!(d.count(), 4);
        d.union(2, 3);
        d.union(1, 3);
        assert_eq!(d.count(), 2);
        assert!(d.same(0, 2));
        assert!(!d.same(0, 4));
    }

    #[test]
    fn find_is_idempotent() {
        let mut d = DisjointSets::new(10);
        for i in 0..9 {
            d.union(i, i + 1);
        }
        let r = d.find(7);
        assert_eq!(d.find(r), r);
        assert_eq!(d.labels(), vec![0; 10]);
    }

    #[test]
    fn labels_are_compact() {
        let mut d = DisjointSets::new(4);
        d.union(3, 1);
        assert_eq!(d.labels(), vec![0, 1, 2, 1]);
    }
}
