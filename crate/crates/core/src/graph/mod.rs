//! Undirected graphs with implicit self-loops.
//!
//! Only proper edges are stored. Every vertex is adjacent to itself, and
//! neighborhoods, powers, products and independence checks all treat it
//! that way.

mod generators;
mod independence;
mod io;

use std::collections::VecDeque;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

pub use generators::{clique, cycle, edgeless, erdos_renyi, iterated_c5, iterated_c5_product_witness};
pub use independence::{independence_number, is_independent_set, AlphaResult, DEFAULT_EXACT_LIMIT, MAX_EXACT_LIMIT};

/// Largest vertex count a strong product may produce unless the caller
/// passes its own limit.
pub const DEFAULT_PRODUCT_LIMIT: usize = 1 << 14;

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    rows: Vec<FixedBitSet>,
}

impl Graph {
    /// Graph with `vertex_count` vertices and no proper edges.
    pub fn new(vertex_count: usize) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::EmptyGraph);
        }
        Ok(Graph {
            vertex_count,
            rows: vec![FixedBitSet::with_capacity(vertex_count); vertex_count],
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.vertex_count {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v,
                vertex_count: self.vertex_count,
            })
        }
    }

    /// Inserts the proper edge `{u, v}`. Returns `false` if it was already
    /// present. Asking for a self-loop is a no-op that returns `false`.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v || self.rows[u].contains(v) {
            return Ok(false);
        }
        self.rows[u].insert(v);
        self.rows[v].insert(u);
        Ok(true)
    }

    /// Whether `{u, v}` is a proper edge.
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && u < self.vertex_count && self.rows[u].contains(v)
    }

    /// Adjacency including the implicit self-loop.
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        (u == v && u < self.vertex_count) || self.has_edge(u, v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rows[v].count_ones(..)
    }

    /// Proper neighbors of `v` in increasing order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[v].ones()
    }

    /// `{u : δ(u, v) ≤ 1}`, sorted.
    pub fn closed_neighborhood(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.rows[v].ones().collect();
        let pos = out.partition_point(|&u| u < v);
        out.insert(pos, v);
        out
    }

    pub(crate) fn row(&self, v: usize) -> &FixedBitSet {
        &self.rows[v]
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum::<usize>() / 2
    }

    /// Proper edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertex_count).flat_map(move |u| self.rows[u].ones().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn is_clique(&self) -> bool {
        self.edge_count() == self.vertex_count * (self.vertex_count - 1) / 2
    }

    pub fn is_edgeless(&self) -> bool {
        self.edge_count() == 0
    }

    /// Breadth-first distances from `source`, stopping after `max_depth` hops.
    fn bfs(&self, source: usize, max_depth: usize) -> Vec<u32> {
        let mut dist = vec![DistanceMatrix::INFINITE; self.vertex_count];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if du as usize >= max_depth {
                continue;
            }
            for w in self.rows[u].ones() {
                if dist[w] == DistanceMatrix::INFINITE {
                    dist[w] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// All-pairs shortest-path distances.
    pub fn all_pairs_distances(&self) -> DistanceMatrix {
        let n = self.vertex_count;
        let mut entries = Vec::with_capacity(n * n);
        for v in 0..n {
            entries.extend(self.bfs(v, usize::MAX));
        }
        DistanceMatrix { n, entries }
    }

    /// `{u : δ(u, v) ≤ m}`, sorted. Always contains `v`.
    pub fn neighborhood(&self, v: usize, m: usize) -> Result<Vec<usize>> {
        self.check_vertex(v)?;
        Ok(self
            .bfs(v, m)
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != DistanceMatrix::INFINITE)
            .map(|(u, _)| u)
            .collect())
    }

    /// The `m`-th power: same vertices, `u ~ v` iff `δ(u, v) ≤ m`.
    pub fn power(&self, m: usize) -> Graph {
        let n = self.vertex_count;
        let mut out = Graph::new(n).expect("non-empty");
        for v in 0..n {
            for (u, &d) in self.bfs(v, m).iter().enumerate() {
                if u != v && d != DistanceMatrix::INFINITE {
                    out.rows[v].insert(u);
                }
            }
        }
        out
    }

    /// Strong product with the default size limit. See
    /// [`Graph::strong_product_with_limit`].
    pub fn strong_product(&self, other: &Graph) -> Result<Graph> {
        self.strong_product_with_limit(other, DEFAULT_PRODUCT_LIMIT)
    }

    /// Strong product `self ⊠ other`.
    ///
    /// The pair `(a, b)` with `a` a vertex of `self` and `b` a vertex of
    /// `other` is flattened row-major to `a * other.vertex_count() + b`
    /// (see [`product_index`] and [`product_pair`]). `(a, b) ~ (c, d)` iff
    /// `a ~ c` in `self` and `b ~ d` in `other`, self-loops included.
    pub fn strong_product_with_limit(&self, other: &Graph, limit: usize) -> Result<Graph> {
        let requested = self.vertex_count.checked_mul(other.vertex_count).unwrap_or(usize::MAX);
        if requested > limit {
            return Err(Error::SizeLimit { requested, limit });
        }
        let n2 = other.vertex_count;
        let mut out = Graph::new(requested)?;
        for a in 0..self.vertex_count {
            let left = self.closed_neighborhood(a);
            for b in 0..n2 {
                let src = product_index(a, b, n2);
                let right = other.closed_neighborhood(b);
                for &c in &left {
                    for &d in &right {
                        let dst = product_index(c, d, n2);
                        if dst != src {
                            out.rows[src].insert(dst);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Flat index of the pair `(a, b)` in a product whose right factor has
/// `right_count` vertices.
pub fn product_index(a: usize, b: usize, right_count: usize) -> usize {
    a * right_count + b
}

/// Inverse of [`product_index`].
pub fn product_pair(index: usize, right_count: usize) -> (usize, usize) {
    (index / right_count, index % right_count)
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("vertex_count", &self.vertex_count)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

/// Shortest-path distances between every pair of vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<u32>,
}

impl DistanceMatrix {
    const INFINITE: u32 = u32::MAX;

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// `None` when `u` and `v` lie in different components.
    pub fn get(&self, u: usize, v: usize) -> Option<usize> {
        match self.entries[u * self.n + v] {
            Self::INFINITE => None,
            d => Some(d as usize),
        }
    }

    /// `δ(u, v) ≤ m`, with disconnected pairs never within range.
    pub fn within(&self, u: usize, v: usize, m: usize) -> bool {
        let d = self.entries[u * self.n + v];
        d != Self::INFINITE && d as usize <= m
    }

    /// Largest finite distance.
    pub fn diameter(&self) -> usize {
        self.entries
            .iter()
            .filter(|&&d| d != Self::INFINITE)
            .map(|&d| d as usize)
            .max()
            .unwrap_or(0)
    }
}
