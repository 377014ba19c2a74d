use std::collections::BTreeSet;

use crate::structure::Elem;

/// All `k`-tuples over `pool`, in lexicographic order of pool positions.
pub fn tuples(pool: &[Elem], k: usize) -> Tuples<'_> {
    Tuples {
        pool,
        idx: vec![0; k],
        done: pool.is_empty() && k > 0,
    }
}

pub struct Tuples<'a> {
    pool: &'a [Elem],
    idx: Vec<usize>,
    done: bool,
}

impl Iterator for Tuples<'_> {
    type Item = Vec<Elem>;

    fn next(&mut self) -> Option<Vec<Elem>> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().map(|i| self.pool[*i]).collect();
        // odometer increment, last position fastest
        let mut pos = self.idx.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.idx[pos] += 1;
            if self.idx[pos] < self.pool.len() {
                break;
            }
            self.idx[pos] = 0;
        }
        Some(out)
    }
}

/// All subsets of `items`, ordered by the bitmask over item positions.
pub fn subsets(items: &[Elem]) -> impl Iterator<Item = BTreeSet<Elem>> + '_ {
    assert!(items.len() < 32, "subset enumeration over {} items", items.len());
    (0u32..(1u32 << items.len())).map(move |mask| {
        items
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, e)| *e)
            .collect()
    })
}

/// Calls `visit` on every permutation of `0..n` (Heap-free recursive order).
pub fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], visit: &mut dyn FnMut(&[usize])) {
        if prefix.len() == used.len() {
            visit(prefix);
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, visit);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    go(&mut Vec::with_capacity(n), &mut vec![false; n], &mut visit);
}
