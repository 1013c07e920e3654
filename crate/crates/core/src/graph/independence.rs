//! Independence numbers.
//!
//! Graphs up to the exact limit go through a bitset branch-and-bound (maximum
//! clique of the complement with greedy-coloring bounds). Larger graphs get a
//! greedy independent set as the lower bound and a greedy clique cover as the
//! upper bound.

use fixedbitset::FixedBitSet;

use super::Graph;
use crate::error::Result;

/// Exact search is used at or below this many vertices by default.
pub const DEFAULT_EXACT_LIMIT: usize = 64;

/// Hard ceiling of the exact solver (one `u128` mask per vertex).
pub const MAX_EXACT_LIMIT: usize = 128;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaResult {
    /// Size of `witness`.
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
    /// An independent set of the queried graph, sorted.
    pub witness: Vec<usize>,
}

/// `true` iff no two distinct members of `set` are adjacent.
pub fn is_independent_set(g: &Graph, set: &[usize]) -> Result<bool> {
    for &v in set {
        g.check_vertex(v)?;
    }
    for (k, &u) in set.iter().enumerate() {
        for &v in &set[k + 1..] {
            if g.has_edge(u, v) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Independence number of `g`; exact when `g` has at most
/// `min(exact_limit, MAX_EXACT_LIMIT)` vertices.
pub fn independence_number(g: &Graph, exact_limit: usize) -> AlphaResult {
    let n = g.vertex_count();
    if n <= exact_limit.min(MAX_EXACT_LIMIT) {
        let witness = ExactSolver::new(g).solve();
        let size = witness.len();
        return AlphaResult {
            lower: size,
            upper: size,
            exact: true,
            witness,
        };
    }
    let witness = greedy_independent_set(g);
    let upper = greedy_clique_cover(g);
    AlphaResult {
        lower: witness.len(),
        upper,
        exact: witness.len() == upper,
        witness,
    }
}

/// Repeatedly take a minimum-degree vertex of the remaining graph and delete
/// its closed neighborhood.
fn greedy_independent_set(g: &Graph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut alive = FixedBitSet::with_capacity(n);
    alive.insert_range(..);
    let mut out = Vec::new();
    while alive.count_ones(..) > 0 {
        let v = alive
            .ones()
            .min_by_key(|&v| g.row(v).intersection(&alive).count())
            .expect("non-empty");
        out.push(v);
        alive.set(v, false);
        alive.difference_with(g.row(v));
    }
    out.sort_unstable();
    out
}

/// Number of cliques in a greedy partition of the vertices into cliques.
fn greedy_clique_cover(g: &Graph) -> usize {
    let n = g.vertex_count();
    let mut uncovered = FixedBitSet::with_capacity(n);
    uncovered.insert_range(..);
    let mut cliques = 0;
    while let Some(v) = uncovered.ones().next() {
        cliques += 1;
        uncovered.set(v, false);
        let mut candidates = g.row(v).clone();
        candidates.intersect_with(&uncovered);
        while let Some(w) = candidates
            .ones()
            .max_by_key(|&w| g.row(w).intersection(&candidates).count())
        {
            uncovered.set(w, false);
            candidates.set(w, false);
            candidates.intersect_with(g.row(w));
        }
    }
    cliques
}

struct ExactSolver {
    /// `compatible[v]`: vertices that may join an independent set with `v`.
    compatible: Vec<u128>,
    best: u128,
    best_size: u32,
}

impl ExactSolver {
    fn new(g: &Graph) -> Self {
        let n = g.vertex_count();
        debug_assert!(n <= MAX_EXACT_LIMIT);
        let all = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
        let compatible = (0..n)
            .map(|v| {
                let mut adj = 1u128 << v;
                for w in g.neighbors(v) {
                    adj |= 1u128 << w;
                }
                all & !adj
            })
            .collect();
        ExactSolver {
            compatible,
            best: 0,
            best_size: 0,
        }
    }

    fn solve(mut self) -> Vec<usize> {
        let n = self.compatible.len();
        let all = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
        self.expand(all, 0, 0);
        let mut out = Vec::with_capacity(self.best_size as usize);
        let mut m = self.best;
        while m != 0 {
            out.push(m.trailing_zeros() as usize);
            m &= m - 1;
        }
        out
    }

    /// Greedy partition of `candidates` into cliques of the graph. Returns
    /// the vertices in class order together with the running class count,
    /// which bounds the independent vertices available from that prefix.
    fn color_classes(&self, candidates: u128) -> Vec<(usize, u32)> {
        let mut order = Vec::with_capacity(candidates.count_ones() as usize);
        let mut uncolored = candidates;
        let mut color = 0;
        while uncolored != 0 {
            color += 1;
            let mut open = uncolored;
            while open != 0 {
                let v = open.trailing_zeros() as usize;
                open &= !self.compatible[v] & !(1u128 << v);
                uncolored &= !(1u128 << v);
                order.push((v, color));
            }
        }
        order
    }

    fn expand(&mut self, mut candidates: u128, current: u128, size: u32) {
        let order = self.color_classes(candidates);
        for &(v, bound) in order.iter().rev() {
            if size + bound <= self.best_size {
                return;
            }
            let bit = 1u128 << v;
            let next = candidates & self.compatible[v];
            if next == 0 {
                if size + 1 > self.best_size {
                    self.best_size = size + 1;
                    self.best = current | bit;
                }
            } else {
                self.expand(next, current | bit, size + 1);
            }
            candidates &= !bit;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{clique, cycle, edgeless, iterated_c5};

    fn exact(g: &Graph) -> usize {
        let r = independence_number(g, DEFAULT_EXACT_LIMIT);
        assert!(r.exact);
        assert!(is_independent_set(g, &r.witness).unwrap());
        r.lower
    }

    #[test]
    fn small_named_graphs() {
        assert_eq!(exact(&clique(5).unwrap()), 1);
        assert_eq!(exact(&edgeless(7).unwrap()), 7);
        assert_eq!(exact(&cycle(5).unwrap()), 2);
        assert_eq!(exact(&cycle(9).unwrap()), 4);
        assert_eq!(exact(&Graph::new(1).unwrap()), 1);
    }

    #[test]
    fn c5_square_and_iterated() {
        let c5 = cycle(5).unwrap();
        assert_eq!(exact(&c5.strong_product(&c5).unwrap()), 5);
        assert_eq!(exact(&iterated_c5(2).unwrap()), 4);
    }

    #[test]
    fn full_width_masks() {
        assert_eq!(exact(&edgeless(64).unwrap()), 64);
        let r = independence_number(&edgeless(128).unwrap(), MAX_EXACT_LIMIT);
        assert!(r.exact);
        assert_eq!(r.lower, 128);
    }

    #[test]
    fn bounds_above_exact_limit() {
        let g = cycle(9).unwrap();
        let r = independence_number(&g, 4);
        assert!(is_independent_set(&g, &r.witness).unwrap());
        assert!(r.lower <= 4 && 4 <= r.upper);
        let k = clique(70).unwrap();
        let r = independence_number(&k, 64);
        assert_eq!((r.lower, r.upper, r.exact), (1, 1, true));
        let e = edgeless(70).unwrap();
        let r = independence_number(&e, 64);
        assert_eq!((r.lower, r.upper, r.exact), (70, 70, true));
    }

    #[test]
    fn independent_set_checks() {
        let c5 = cycle(5).unwrap();
        assert!(is_independent_set(&c5, &[0, 2]).unwrap());
        assert!(!is_independent_set(&c5, &[0, 1]).unwrap());
        assert!(is_independent_set(&c5, &[3]).unwrap());
        assert!(!is_independent_set(&clique(3).unwrap(), &[0, 1]).unwrap());
        assert!(is_independent_set(&c5, &[7]).is_err());
    }
}
