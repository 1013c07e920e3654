use rand::Rng;

use super::{product_index, Graph, DEFAULT_PRODUCT_LIMIT};
use crate::error::{Error, Result};

/// Cycle on `nv` vertices; `i ~ i+1 mod nv`. One vertex gives a single
/// vertex, two give a single edge.
pub fn cycle(nv: usize) -> Result<Graph> {
    let mut g = Graph::new(nv)?;
    for v in 0..nv {
        g.add_edge(v, (v + 1) % nv)?;
    }
    Ok(g)
}

pub fn clique(nv: usize) -> Result<Graph> {
    let mut g = Graph::new(nv)?;
    for u in 0..nv {
        for v in u + 1..nv {
            g.add_edge(u, v)?;
        }
    }
    Ok(g)
}

pub fn edgeless(nv: usize) -> Result<Graph> {
    Graph::new(nv)
}

/// G(nv, p): every unordered pair `u < v`, visited in lexicographic order,
/// is included with probability `p` using one Bernoulli draw from `rng`.
pub fn erdos_renyi<R: Rng + ?Sized>(nv: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Probability {
            what: "edge probability",
            value: p,
        });
    }
    let mut g = Graph::new(nv)?;
    for u in 0..nv {
        for v in u + 1..nv {
            if rng.gen_bool(p) {
                g.add_edge(u, v)?;
            }
        }
    }
    Ok(g)
}

/// The iterated 5-cycle `G_k`: `G_1 = C5`, and `G_k` replaces every vertex
/// of `G_{k-1}` with a copy of C5 and every edge with a complete bipartite
/// `K_{5,5}` between the two copies.
///
/// Vertex `(x, c)`, with `x` a vertex of `G_{k-1}` and `c` a position in the
/// C5 copy, is stored at index `5 * x + c`.
pub fn iterated_c5(k: u32) -> Result<Graph> {
    if k == 0 {
        return Err(Error::InvalidParameter("iterated C5 needs k ≥ 1".into()));
    }
    let requested = 5usize
        .checked_pow(k)
        .filter(|&n| n <= DEFAULT_PRODUCT_LIMIT)
        .ok_or(Error::SizeLimit {
            requested: 5usize.saturating_pow(k),
            limit: DEFAULT_PRODUCT_LIMIT,
        })?;
    let c5 = cycle(5)?;
    let mut g = c5.clone();
    for _ in 1..k {
        let outer = g;
        let mut next = Graph::new(outer.vertex_count() * 5)?;
        for x in 0..outer.vertex_count() {
            for (a, b) in c5.edges() {
                next.add_edge(5 * x + a, 5 * x + b)?;
            }
            for y in outer.neighbors(x).filter(|&y| y > x) {
                for a in 0..5 {
                    for b in 0..5 {
                        next.add_edge(5 * x + a, 5 * y + b)?;
                    }
                }
            }
        }
        g = next;
    }
    debug_assert_eq!(g.vertex_count(), requested);
    Ok(g)
}

/// Independent set of C5 ⊠ C5 of size 5: `{(i, 2i mod 5)}`.
const C5_SQUARE_WITNESS: [(usize, usize); 5] = [(0, 0), (1, 2), (2, 4), (3, 1), (4, 3)];

/// An independent set of size `5^k` in `G_k ⊠ G_k`, as flat product
/// indices (row-major, see [`product_index`]).
///
/// Built by induction: a vertex of `G_k` is `(x, c)` with `x` in `G_{k-1}`;
/// the set keeps `((x, c), (y, c'))` whenever `(x, y)` lies in the level
/// `k − 1` set and `(c, c')` lies in the C5 ⊠ C5 set.
pub fn iterated_c5_product_witness(k: u32) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::InvalidParameter("iterated C5 needs k ≥ 1".into()));
    }
    let mut pairs: Vec<(usize, usize)> = C5_SQUARE_WITNESS.to_vec();
    for _ in 1..k {
        pairs = pairs
            .iter()
            .flat_map(|&(x, y)| C5_SQUARE_WITNESS.iter().map(move |&(c, d)| (5 * x + c, 5 * y + d)))
            .collect();
    }
    let side = 5usize.pow(k);
    let mut out: Vec<usize> = pairs.into_iter().map(|(a, b)| product_index(a, b, side)).collect();
    out.sort_unstable();
    Ok(out)
}
