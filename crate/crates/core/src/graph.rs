//! Bicolored labeled graphs and the connectivity classes used throughout the
//! expansion: connected, articulation-free and 2-connected graphs with `n`
//! white (root) and `k` black (field) vertices.
//!
//! Graphs are stored as an edge bitmask over vertex pairs, which keeps
//! exhaustive enumeration of all `2^C(n+k,2)` edge subsets cheap for the small
//! instances the engine verifies against.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default cap on total vertices for exhaustive enumeration.
pub const DEFAULT_ENUM_CAP: usize = 9;

/// Hard limit imposed by the 64-bit edge mask: C(11,2) = 55.
pub const MAX_VERTICES: usize = 11;

/// Index of the pair {i,j} (0-based, i < j) in the edge bitmask.
#[inline]
pub(crate) fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    j * (j - 1) / 2 + i
}

/// A labeled simple graph with `n_white` white vertices (labels 1..n) and
/// `n_black` black vertices (labels n+1..n+k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColoredGraph {
    n_white: u8,
    n_black: u8,
    /// Bit `pair_index(i, j)` is set iff {i+1, j+1} is an edge.
    edges: u64,
}

/// Serialized form: 1-based labels, matching the on-disk JSON schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub n_white: usize,
    pub n_black: usize,
    pub edges: Vec<[usize; 2]>,
}

/// The nested graph classes of the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphClass {
    /// Every edge subset on the vertex set.
    All,
    /// Connected graphs spanning all vertices.
    Connected,
    /// Connected and free of articulation vertices (the class of h-coefficients).
    ArticulationFree,
    /// Free of articulation and nodal vertices (the class of c-coefficients).
    TwoConnected,
}

impl GraphClass {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(GraphClass::All),
            "conn" | "connected" => Ok(GraphClass::Connected),
            "af" | "articulation-free" => Ok(GraphClass::ArticulationFree),
            "two" | "2conn" | "two-connected" => Ok(GraphClass::TwoConnected),
            other => Err(Error::Config(format!("unknown graph class '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GraphClass::All => "all",
            GraphClass::Connected => "conn",
            GraphClass::ArticulationFree => "af",
            GraphClass::TwoConnected => "two",
        }
    }
}

/// Output of [`ColoredGraph::classify_vertices`]: 1-based labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexClasses {
    pub cutpoints: Vec<usize>,
    pub articulation: Vec<usize>,
    pub nodal: Vec<usize>,
}

impl ColoredGraph {
    /// Build a graph from 1-based edge labels.
    pub fn new(n_white: usize, n_black: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let n = n_white + n_black;
        if n_white < 1 {
            return Err(Error::Domain("at least one white vertex required".into()));
        }
        if n < 2 {
            return Err(Error::Domain(
                "single vertices are not considered as graphs".into(),
            ));
        }
        if n > MAX_VERTICES {
            return Err(Error::SizeLimit {
                what: "total vertices",
                requested: n,
                cap: MAX_VERTICES,
            });
        }
        let mut mask = 0u64;
        for &(a, b) in edges {
            if a == b {
                return Err(Error::Domain(format!("self-loop at vertex {a}")));
            }
            if a < 1 || a > n || b < 1 || b > n {
                return Err(Error::Domain(format!(
                    "edge ({a},{b}) outside label range 1..{n}"
                )));
            }
            let (i, j) = if a < b { (a - 1, b - 1) } else { (b - 1, a - 1) };
            mask |= 1 << pair_index(i, j);
        }
        Ok(Self {
            n_white: n_white as u8,
            n_black: n_black as u8,
            edges: mask,
        })
    }

    pub(crate) fn from_mask(n_white: usize, n_black: usize, mask: u64) -> Self {
        Self {
            n_white: n_white as u8,
            n_black: n_black as u8,
            edges: mask,
        }
    }

    pub fn n_white(&self) -> usize {
        self.n_white as usize
    }

    pub fn n_black(&self) -> usize {
        self.n_black as usize
    }

    pub fn n_vertices(&self) -> usize {
        (self.n_white + self.n_black) as usize
    }

    pub fn edge_mask(&self) -> u64 {
        self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.count_ones() as usize
    }

    /// Edge check with 0-based vertex indices.
    #[inline]
    pub fn has_edge0(&self, i: usize, j: usize) -> bool {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.edges >> pair_index(i, j) & 1 == 1
    }

    /// Edge list with 1-based labels, lexicographically sorted.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let n = self.n_vertices();
        let mut out = Vec::with_capacity(self.n_edges());
        for j in 1..n {
            for i in 0..j {
                if self.has_edge0(i, j) {
                    out.push((i + 1, j + 1));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n_white: self.n_white(),
            n_black: self.n_black(),
            edges: self.edge_list().iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn from_json(j: &GraphJson) -> Result<Self> {
        let edges: Vec<(usize, usize)> = j.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::new(j.n_white, j.n_black, &edges)
    }

    /// Adjacency bitmask (0-based) of a vertex within an allowed vertex set.
    #[inline]
    fn neighbors_in(&self, v: usize, allowed: u32) -> u32 {
        let mut out = 0u32;
        let n = self.n_vertices();
        for u in 0..n {
            if u != v && (allowed >> u & 1 == 1) && self.has_edge0(u, v) {
                out |= 1 << u;
            }
        }
        out
    }

    /// Connectivity of the subgraph induced on `verts` (0-based bitmask).
    /// Empty sets and singletons count as connected.
    pub(crate) fn connected_on(&self, verts: u32) -> bool {
        if verts == 0 {
            return true;
        }
        let start = verts.trailing_zeros() as usize;
        let mut seen = 1u32 << start;
        let mut frontier = seen;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let nb = self.neighbors_in(v, verts) & !seen;
            seen |= nb;
            frontier |= nb;
        }
        seen == verts
    }

    fn full_vertex_mask(&self) -> u32 {
        (1u32 << self.n_vertices()) - 1
    }

    pub fn is_connected(&self) -> bool {
        self.connected_on(self.full_vertex_mask())
    }

    fn white_mask(&self) -> u32 {
        (1u32 << self.n_white()) - 1
    }

    /// Components of the graph after deleting vertex `v` (0-based), as bitmasks.
    fn components_without(&self, v: usize) -> Vec<u32> {
        let mut remaining = self.full_vertex_mask() & !(1 << v);
        let mut comps = Vec::new();
        while remaining != 0 {
            let start = remaining.trailing_zeros() as usize;
            let mut seen = 1u32 << start;
            let mut frontier = seen;
            while frontier != 0 {
                let u = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let nb = self.neighbors_in(u, remaining) & !seen;
                seen |= nb;
                frontier |= nb;
            }
            comps.push(seen);
            remaining &= !seen;
        }
        comps
    }

    /// Cutpoints, articulation vertices and nodal vertices of a connected graph.
    ///
    /// A cutpoint disconnects the graph on removal. An articulation vertex is a
    /// cutpoint leaving at least one piece with no white vertex. A nodal vertex
    /// is a cutpoint through which all paths between some pair of white
    /// vertices pass; cutpoints split this way between articulation and nodal,
    /// so the two sets partition the cutpoints.
    pub fn classify_vertices(&self) -> Result<VertexClasses> {
        if !self.is_connected() {
            return Err(Error::Domain(
                "classify_vertices requires a connected graph".into(),
            ));
        }
        let whites = self.white_mask();
        let mut cutpoints = Vec::new();
        let mut articulation = Vec::new();
        let mut nodal = Vec::new();
        for v in 0..self.n_vertices() {
            let comps = self.components_without(v);
            if comps.len() < 2 {
                continue;
            }
            cutpoints.push(v + 1);
            let has_whiteless = comps.iter().any(|&c| c & whites == 0);
            // Separated white pair: two white vertices (both != v) in
            // different pieces.
            let pieces_with_white = comps.iter().filter(|&&c| c & whites != 0).count();
            let separates_whites = pieces_with_white >= 2;
            if has_whiteless {
                articulation.push(v + 1);
            } else {
                debug_assert!(separates_whites);
                nodal.push(v + 1);
            }
        }
        Ok(VertexClasses {
            cutpoints,
            articulation,
            nodal,
        })
    }

    /// True if some vertex is an articulation vertex (assumes connected).
    fn has_articulation(&self) -> bool {
        let whites = self.white_mask();
        (0..self.n_vertices()).any(|v| {
            let comps = self.components_without(v);
            comps.len() >= 2 && comps.iter().any(|&c| c & whites == 0)
        })
    }

    /// True if some vertex disconnects the graph (assumes connected).
    fn has_cutpoint(&self) -> bool {
        (0..self.n_vertices()).any(|v| self.components_without(v).len() >= 2)
    }

    /// Membership test for the given class.
    pub fn is_in(&self, class: GraphClass) -> bool {
        match class {
            GraphClass::All => true,
            GraphClass::Connected => self.is_connected(),
            GraphClass::ArticulationFree => self.is_connected() && !self.has_articulation(),
            GraphClass::TwoConnected => self.is_connected() && !self.has_cutpoint(),
        }
    }

    /// Relabel black vertices by `perm` (0-based permutation of 0..n_black).
    fn permute_blacks(&self, perm: &[usize]) -> u64 {
        let n = self.n_vertices();
        let nw = self.n_white();
        let map = |v: usize| if v < nw { v } else { nw + perm[v - nw] };
        let mut mask = 0u64;
        for j in 1..n {
            for i in 0..j {
                if self.has_edge0(i, j) {
                    let (a, b) = (map(i), map(j));
                    let (a, b) = if a < b { (a, b) } else { (b, a) };
                    mask |= 1 << pair_index(a, b);
                }
            }
        }
        mask
    }

    /// Canonical edge mask under the white-fixing, black-permuting group.
    pub fn canonical_mask(&self) -> u64 {
        let k = self.n_black();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best = self.permute_blacks(&perm);
        while next_permutation(&mut perm) {
            let m = self.permute_blacks(&perm);
            if m < best {
                best = m;
            }
        }
        best
    }
}

/// In-place lexicographic next permutation; false once exhausted.
fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Enumerate every labeled graph of the class, in increasing edge-bitmask
/// order. The cap guards the `2^C(n+k,2)` sweep.
pub fn enumerate(
    n_white: usize,
    n_black: usize,
    class: GraphClass,
    cap: usize,
) -> Result<Vec<ColoredGraph>> {
    let n = n_white + n_black;
    if n_white < 1 || n < 2 {
        return Err(Error::Domain(
            "need n_white >= 1 and at least two vertices".into(),
        ));
    }
    if n > cap || n > MAX_VERTICES {
        return Err(Error::SizeLimit {
            what: "total vertices",
            requested: n,
            cap: cap.min(MAX_VERTICES),
        });
    }
    let n_pairs = n * (n - 1) / 2;
    let mut out = Vec::new();
    for mask in 0..(1u64 << n_pairs) {
        let g = ColoredGraph::from_mask(n_white, n_black, mask);
        if g.is_in(class) {
            out.push(g);
        }
    }
    Ok(out)
}

/// Number of labeled graphs in the class.
pub fn count(n_white: usize, n_black: usize, class: GraphClass, cap: usize) -> Result<usize> {
    Ok(enumerate(n_white, n_black, class, cap)?.len())
}

/// Group labeled graphs by color-preserving isomorphism (white labels fixed,
/// black labels permute). Returns `(representative, multiplicity)` pairs in
/// deterministic order; multiplicities sum to the input count.
pub fn iso_classes(graphs: &[ColoredGraph]) -> Result<Vec<(ColoredGraph, usize)>> {
    let mut classes: Vec<(u64, ColoredGraph, usize)> = Vec::new();
    let mut shape: Option<(usize, usize)> = None;
    for g in graphs {
        match shape {
            None => shape = Some((g.n_white(), g.n_black())),
            Some(s) if s != (g.n_white(), g.n_black()) => {
                return Err(Error::Domain(
                    "iso_classes requires graphs of one (n_white, n_black) shape".into(),
                ))
            }
            _ => {}
        }
        let canon = g.canonical_mask();
        match classes.iter_mut().find(|(c, _, _)| *c == canon) {
            Some((_, _, mult)) => *mult += 1,
            None => classes.push((canon, *g, 1)),
        }
    }
    classes.sort_by_key(|&(c, _, _)| c);
    Ok(classes.into_iter().map(|(_, g, m)| (g, m)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(nw: usize, nb: usize, edges: &[(usize, usize)]) -> ColoredGraph {
        ColoredGraph::new(nw, nb, edges).unwrap()
    }

    #[test]
    fn rejects_degenerate_graphs() {
        assert!(ColoredGraph::new(1, 0, &[]).is_err());
        assert!(ColoredGraph::new(0, 2, &[(1, 2)]).is_err());
        assert!(ColoredGraph::new(2, 0, &[(1, 1)]).is_err());
        assert!(ColoredGraph::new(2, 0, &[(1, 3)]).is_err());
    }

    #[test]
    fn enumerate_two_connected_small() {
        let gs = enumerate(2, 0, GraphClass::TwoConnected, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(gs.len(), 1);
        assert_eq!(gs[0].edge_list(), vec![(1, 2)]);

        // Brute force over all 8 edge subsets on 3 vertices leaves only the
        // triangle 2-connected.
        let gs = enumerate(2, 1, GraphClass::TwoConnected, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(gs.len(), 1);
        assert_eq!(gs[0].n_edges(), 3);
    }

    #[test]
    fn enumerate_af_2_1() {
        // Triangle and the path 1-3-2 through the black vertex.
        let gs = enumerate(2, 1, GraphClass::ArticulationFree, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(gs.len(), 2);
        let path = g(2, 1, &[(1, 3), (2, 3)]);
        let tri = g(2, 1, &[(1, 2), (1, 3), (2, 3)]);
        assert!(gs.contains(&path));
        assert!(gs.contains(&tri));
    }

    #[test]
    fn enumerate_connected_4() {
        assert_eq!(count(4, 0, GraphClass::Connected, DEFAULT_ENUM_CAP).unwrap(), 38);
    }

    #[test]
    fn enumerate_cap() {
        let err = enumerate(2, 8, GraphClass::All, DEFAULT_ENUM_CAP).unwrap_err();
        assert!(matches!(err, Error::SizeLimit { cap: 9, .. }));
    }

    #[test]
    fn classify_path_through_black() {
        let p = g(2, 1, &[(1, 3), (2, 3)]);
        let c = p.classify_vertices().unwrap();
        assert_eq!(c.cutpoints, vec![3]);
        assert!(c.articulation.is_empty());
        assert_eq!(c.nodal, vec![3]);
    }

    #[test]
    fn classify_triangle() {
        let t = g(2, 1, &[(1, 2), (1, 3), (2, 3)]);
        let c = t.classify_vertices().unwrap();
        assert!(c.cutpoints.is_empty());
        assert!(c.articulation.is_empty());
        assert!(c.nodal.is_empty());
    }

    #[test]
    fn classify_white_articulation() {
        // Path 3(b)-1(w)-2(w): removing white 1 leaves the black piece {3}.
        let p = g(2, 1, &[(1, 3), (1, 2)]);
        let c = p.classify_vertices().unwrap();
        assert_eq!(c.cutpoints, vec![1]);
        assert_eq!(c.articulation, vec![1]);
        assert!(c.nodal.is_empty());
    }

    #[test]
    fn classify_rejects_disconnected() {
        let d = g(2, 2, &[(1, 3), (2, 4)]);
        assert!(d.classify_vertices().is_err());
    }

    #[test]
    fn class_nesting_exhaustive() {
        for nw in 1..=3usize {
            for nb in 0..=(5 - nw) {
                if nw + nb < 2 {
                    continue;
                }
                let all = enumerate(nw, nb, GraphClass::All, DEFAULT_ENUM_CAP).unwrap();
                for g in all {
                    let two = g.is_in(GraphClass::TwoConnected);
                    let af = g.is_in(GraphClass::ArticulationFree);
                    let conn = g.is_in(GraphClass::Connected);
                    assert!(!two || af);
                    assert!(!af || conn);
                }
            }
        }
    }

    #[test]
    fn cutpoint_partition_exhaustive() {
        for nw in 2..=3usize {
            for nb in 0..=(5 - nw) {
                for g in enumerate(nw, nb, GraphClass::Connected, DEFAULT_ENUM_CAP).unwrap() {
                    let c = g.classify_vertices().unwrap();
                    let mut merged: Vec<usize> =
                        c.articulation.iter().chain(&c.nodal).copied().collect();
                    merged.sort_unstable();
                    assert_eq!(merged, c.cutpoints, "partition failed for {:?}", g);
                }
            }
        }
    }

    #[test]
    fn iso_classes_af_2_3() {
        let gs = enumerate(2, 1, GraphClass::ArticulationFree, DEFAULT_ENUM_CAP).unwrap();
        let classes = iso_classes(&gs).unwrap();
        assert_eq!(classes.len(), 2);
        assert!(classes.iter().all(|&(_, m)| m == 1));
    }

    #[test]
    fn iso_classes_multiplicities_sum() {
        let gs = enumerate(2, 4, GraphClass::ArticulationFree, DEFAULT_ENUM_CAP).unwrap();
        let classes = iso_classes(&gs).unwrap();
        let total: usize = classes.iter().map(|&(_, m)| m).sum();
        assert_eq!(total, gs.len());
        // Representatives must be pairwise non-isomorphic.
        for i in 0..classes.len() {
            for j in (i + 1)..classes.len() {
                assert_ne!(classes[i].0.canonical_mask(), classes[j].0.canonical_mask());
            }
        }
    }

    #[test]
    fn iso_classes_single() {
        let t = g(2, 1, &[(1, 2), (1, 3), (2, 3)]);
        let classes = iso_classes(&[t]).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].1, 1);
    }

    #[test]
    fn iso_classes_mixed_shapes_rejected() {
        let a = g(2, 1, &[(1, 3), (2, 3)]);
        let b = g(2, 0, &[(1, 2)]);
        assert!(iso_classes(&[a, b]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = g(2, 2, &[(1, 3), (2, 3), (3, 4), (1, 4)]);
        let j = t.to_json();
        assert_eq!(ColoredGraph::from_json(&j).unwrap(), t);
    }
}
