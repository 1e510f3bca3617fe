//! Order-statistic counting over an availability bitmap.
//!
//! A Fenwick tree of 0/1 counts indexed by wealth rank. It answers "how many
//! agents are still available in ranks `[a, b)`" and "which rank holds the
//! k-th available agent" in `O(log n)`.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone)]
pub struct RankSelect {
    tree: Vec<u32>,
    available: Vec<bool>,
    total: usize,
    top_bit: usize,
}

impl RankSelect {
    /// All `n` positions available.
    pub fn full(n: usize) -> Self {
        let mut tree = vec![0u32; n + 1];
        for (i, slot) in tree.iter_mut().enumerate().skip(1) {
            *slot = (i & i.wrapping_neg()) as u32;
        }
        let top_bit = if n == 0 {
            0
        } else {
            1usize << (usize::BITS - 1 - n.leading_zeros())
        };
        RankSelect {
            tree,
            available: vec![true; n],
            total: n,
            top_bit,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.available.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.available.is_empty()
    }

    /// Number of positions still available.
    #[inline]
    pub fn remaining(&self) -> usize {
        self.total
    }

    #[inline]
    pub fn is_available(&self, pos: usize) -> bool {
        self.available[pos]
    }

    pub fn remove(&mut self, pos: usize) {
        assert!(self.available[pos], "position {pos} removed twice");
        self.available[pos] = false;
        self.total -= 1;
        let mut i = pos + 1;
        while i < self.tree.len() {
            self.tree[i] -= 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Available positions in `[0, end)`.
    pub fn prefix(&self, end: usize) -> usize {
        let mut i = end;
        let mut acc = 0usize;
        while i > 0 {
            acc += self.tree[i] as usize;
            i &= i - 1;
        }
        acc
    }

    /// Available positions in `[start, end)`.
    #[inline]
    pub fn count(&self, start: usize, end: usize) -> usize {
        if start >= end {
            0
        } else {
            self.prefix(end) - self.prefix(start)
        }
    }

    /// Position of the `k`-th available entry (0-based).
    pub fn select(&self, k: usize) -> usize {
        debug_assert!(k < self.total);
        let mut pos = 0usize;
        let mut rem = k;
        let mut step = self.top_bit;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && (self.tree[next] as usize) <= rem {
                pos = next;
                rem -= self.tree[next] as usize;
            }
            step >>= 1;
        }
        pos
    }
}
