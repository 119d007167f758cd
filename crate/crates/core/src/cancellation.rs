//! Brute-force verification of the polymer cancellation sum: for a connected
//! bicolored graph, the signed sum of cluster coefficients over admissible
//! multi-indices collapses to 1 exactly when the graph is articulation-free,
//! and to 0 otherwise.

use crate::error::{Error, Result};
use crate::graph::ColoredGraph;

/// Brute-force guard: the polymer search is exponential in the vertex count.
pub const CANCELLATION_CAP: usize = 7;

/// A candidate polymer: vertex set plus the edges of `g` internal to it.
#[derive(Clone, Copy)]
struct Polymer {
    verts: u32,
    edges: u64,
    size: u32,
    n_white: u32,
}

/// Compute the admissible multi-index sum for a connected graph.
///
/// A multi-index is a collection of distinct vertex subsets (polymers), each
/// inducing a connected spanning subgraph of `g`, with multiplicity one on
/// every polymer. Exactly one marked polymer contains all white labels; the
/// rest meet the white set in at most one label. The collection must cover
/// every edge of `g`, overlap pairwise in at most one label, and satisfy the
/// label-count identity `n + k = |V_0| + sum (|V_i| - 1)`. Each admissible
/// multi-index contributes the cluster coefficient
/// `c_I = sum over connected spanning subgraphs G of the polymer intersection
/// graph of (-1)^{|E(G)|}`.
pub fn multiindex_cancellation_sum(g: &ColoredGraph) -> Result<i64> {
    if g.n_vertices() > CANCELLATION_CAP {
        return Err(Error::SizeLimit {
            what: "total vertices",
            requested: g.n_vertices(),
            cap: CANCELLATION_CAP,
        });
    }
    if !g.is_connected() {
        return Err(Error::Domain(
            "cancellation sum requires a connected graph".into(),
        ));
    }

    let n = g.n_vertices();
    let whites: u32 = (1u32 << g.n_white()) - 1;
    let full: u32 = (1u32 << n) - 1;

    // Edge bit positions of g, for the edge-cover bookkeeping.
    let edge_mask = g.edge_mask();

    // All polymer candidates: |V| >= 2 and g[V] connected spanning V.
    let mut polymers: Vec<Polymer> = Vec::new();
    for verts in 1u32..=full {
        if verts.count_ones() < 2 || !g.connected_on(verts) {
            continue;
        }
        // connected_on treats isolated vertices in V as disconnected pieces,
        // so reaching here means g[V] is connected and spans V.
        let mut edges = 0u64;
        for j in 1..n {
            for i in 0..j {
                if (verts >> i & 1 == 1) && (verts >> j & 1 == 1) && g.has_edge0(i, j) {
                    edges |= 1 << crate::graph::pair_index(i, j);
                }
            }
        }
        polymers.push(Polymer {
            verts,
            edges,
            size: verts.count_ones(),
            n_white: (verts & whites).count_ones(),
        });
    }

    let mut total: i64 = 0;
    for (ri, root) in polymers.iter().enumerate() {
        if root.verts & whites != whites {
            continue;
        }
        let budget = n as i64 - root.size as i64;
        let mut chosen: Vec<usize> = vec![ri];
        search(
            &polymers,
            root.edges,
            edge_mask,
            budget,
            &mut chosen,
            &mut total,
        );
    }
    Ok(total)
}

/// DFS over collections of attached polymers. Branches on the polymers able
/// to cover the first yet-uncovered edge; admissible collections internalize
/// each edge in exactly one polymer, so every collection is generated once.
fn search(
    polymers: &[Polymer],
    covered: u64,
    edge_mask: u64,
    budget: i64,
    chosen: &mut Vec<usize>,
    total: &mut i64,
) {
    let uncovered = edge_mask & !covered;
    if uncovered == 0 {
        if budget == 0 {
            *total += cluster_coefficient(polymers, chosen);
        }
        return;
    }
    if budget <= 0 {
        return;
    }
    let first = uncovered & uncovered.wrapping_neg();
    for (pi, p) in polymers.iter().enumerate() {
        if p.edges & first == 0 {
            continue;
        }
        // Attached polymers meet the white set in at most one label. The
        // marked root carries the white labels; an attached copy of the same
        // vertex set dies on the overlap check below.
        if p.n_white > 1 {
            continue;
        }
        if (p.size as i64 - 1) > budget {
            continue;
        }
        // Pairwise overlaps of at most one label.
        if chosen
            .iter()
            .any(|&ci| (polymers[ci].verts & p.verts).count_ones() > 1)
        {
            continue;
        }
        chosen.push(pi);
        search(
            polymers,
            covered | p.edges,
            edge_mask,
            budget - (p.size as i64 - 1),
            chosen,
            total,
        );
        chosen.pop();
    }
}

/// `c_I` for a collection with unit multiplicities: sum over connected
/// spanning subgraphs of the polymer intersection graph of `(-1)^{edges}`.
fn cluster_coefficient(polymers: &[Polymer], chosen: &[usize]) -> i64 {
    let r = chosen.len();
    if r == 1 {
        return 1;
    }
    // Intersection-graph edges between the chosen polymers.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for a in 0..r {
        for b in (a + 1)..r {
            if polymers[chosen[a]].verts & polymers[chosen[b]].verts != 0 {
                pairs.push((a, b));
            }
        }
    }
    let m = pairs.len();
    let mut sum: i64 = 0;
    'subsets: for sub in 0u32..(1u32 << m) {
        // Spanning connectivity of the selected intersection edges.
        let mut adj = vec![0u32; r];
        for (bit, &(a, b)) in pairs.iter().enumerate() {
            if sub >> bit & 1 == 1 {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
        }
        let mut seen: u32 = 1;
        let mut frontier: u32 = 1;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let nb = adj[v] & !seen;
            seen |= nb;
            frontier |= nb;
        }
        if seen != (1u32 << r) - 1 {
            continue 'subsets;
        }
        sum += if sub.count_ones() % 2 == 0 { 1 } else { -1 };
    }
    sum
}
