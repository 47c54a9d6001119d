//! Instance generators along the hardness reductions, with brute-force
//! oracles that give the ground truth for each generated instance.
//!
//! Nodes are 0-based in these types; the text formats print them 1-based.
//!
//! # Acyclic 2-disconnection by bipartitions
//!
//! A digraph `D = (V, A)` has an acyclic arc set `A′` with `(V, A ∖ A′)` not
//! weakly connected iff some bipartition `V = V₁ ⊔ V₂` (both nonempty) has
//! an acyclic set of crossing arcs. If the crossing arcs are acyclic, take
//! `A′` to be them; nothing joins `V₁` to `V₂` afterwards. Conversely, given
//! a solution, let `V₁` be one weak component of `(V, A ∖ A′)`: every arc
//! crossing `V₁` lies in `A′`, and subsets of acyclic sets are acyclic.
//!
//! Two nodes joined by antiparallel arcs must sit on the same side (else the
//! crossing arcs contain a 2-cycle), so the oracle first merges the
//! components of the antiparallel-arc graph and enumerates bipartitions of
//! the merged nodes only.

use std::collections::BTreeSet;

use itertools::Itertools;
use petgraph::algo::toposort;
use petgraph::graph::DiGraph;
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use thiserror::Error;

use crate::arrangement::{ArrangementError, ReluLayer};
use crate::exact::{int, zero_vec, RMatrix, Rational};
use crate::range::TwoLayerScalarNet;

pub const CUT_CAP: usize = 24;
pub const COLORING_CAP: usize = 24;
pub const BIPARTITION_CAP: usize = 26;
pub const PERMUTATION_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("instance size {size} exceeds the oracle cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ReductionError> {
    Err(ReductionError::Invalid(msg.into()))
}

/// Undirected graph with integer edge weights; edges stored as `(u, v, w)`
/// with `u < v`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, i64)>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, i64)>) -> Result<Self, ReductionError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (u, v, w) in edges {
            if u == v {
                return invalid(format!("self-loop at node {}", u + 1));
            }
            if u >= n || v >= n {
                return invalid(format!("edge ({}, {}) outside {} nodes", u + 1, v + 1, n));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return invalid(format!("duplicate edge ({}, {})", key.0 + 1, key.1 + 1));
            }
            out.push((key.0, key.1, w));
        }
        out.sort_unstable();
        Ok(WeightedGraph { n, edges: out })
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, i64)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search_by(|e| (e.0, e.1).cmp(&key)).is_ok()
    }

    /// Total weight of edges with exactly one end in `side`.
    pub fn cut_weight(&self, side: &[bool]) -> i64 {
        self.edges.iter().filter(|(u, v, _)| side[*u] != side[*v]).map(|e| e.2).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    arcs: Vec<(usize, usize)>,
}

impl Digraph {
    pub fn new(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, ReductionError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (u, v) in arcs {
            if u == v {
                return invalid(format!("self-loop at node {}", u + 1));
            }
            if u >= n || v >= n {
                return invalid(format!("arc ({}, {}) outside {} nodes", u + 1, v + 1, n));
            }
            if !seen.insert((u, v)) {
                return invalid(format!("duplicate arc ({}, {})", u + 1, v + 1));
            }
            out.push((u, v));
        }
        Ok(Digraph { n, arcs: out })
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph3 {
    n: usize,
    edges: Vec<[usize; 3]>,
}

impl Hypergraph3 {
    pub fn new(n: usize, edges: impl IntoIterator<Item = [usize; 3]>) -> Result<Self, ReductionError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for mut e in edges {
            e.sort_unstable();
            if e[0] == e[1] || e[1] == e[2] {
                return invalid("hyperedges need three distinct nodes");
            }
            if e[2] >= n {
                return invalid(format!("hyperedge node {} outside {} nodes", e[2] + 1, n));
            }
            if !seen.insert(e) {
                return invalid(format!("duplicate hyperedge {{{}, {}, {}}}", e[0] + 1, e[1] + 1, e[2] + 1));
            }
            out.push(e);
        }
        out.sort_unstable();
        Ok(Hypergraph3 { n, edges: out })
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[[usize; 3]] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.contains(&v)).count()
    }
}

/// `S` as a 0/1 side vector.
fn mask_side(n: usize, mask: u64) -> Vec<bool> {
    (0..n).map(|i| i + 1 < n && mask >> i & 1 == 1).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    /// Nodes in `S`; the last node is never in `S`.
    pub side: Vec<usize>,
    pub weight: i64,
}

/// First cut of positive weight over the masks of the first `n − 1` nodes,
/// in increasing mask order.
pub fn positive_cut_oracle(g: &WeightedGraph, cap: usize) -> Result<Option<Cut>, ReductionError> {
    let n = g.nodes();
    if n > cap {
        return Err(ReductionError::CapExceeded { size: n, cap });
    }
    if n < 2 {
        return Ok(None);
    }
    let found = (1u64..1 << (n - 1)).into_par_iter().find_first(|&mask| g.cut_weight(&mask_side(n, mask)) > 0);
    Ok(found.map(|mask| {
        let side = mask_side(n, mask);
        Cut { weight: g.cut_weight(&side), side: (0..n).filter(|&i| side[i]).collect() }
    }))
}

/// `f(x) = Σ_{ij} w_ij ([x_i − x_j]_+ + [x_j − x_i]_+)`, whose value at an
/// indicator vector is the cut weight. A graph without edges gives the zero
/// map on a single zero row.
pub fn positive_cut_to_network(g: &WeightedGraph) -> Result<TwoLayerScalarNet, ReductionError> {
    let n = g.nodes();
    if n == 0 {
        return invalid("graph needs at least one node");
    }
    let mut rows = Vec::new();
    let mut weights = Vec::new();
    for &(u, v, w) in g.edges() {
        for (a, b) in [(u, v), (v, u)] {
            let mut row = zero_vec(n);
            row[a] = int(1);
            row[b] = int(-1);
            rows.push(row);
            weights.push(int(w));
        }
    }
    if rows.is_empty() {
        rows.push(zero_vec(n));
        weights.push(int(0));
    }
    let w1 = RMatrix::from_rows(rows, n).expect("width n");
    Ok(TwoLayerScalarNet::new(w1, weights).expect("one weight per row"))
}

/// Complete graph with weight `(b − a)·b` on edges of `g` and `−a·b` on
/// non-edges; its cut weights are `b²|E(S, V∖S)| − ab|S||V∖S|`, positive
/// exactly when the cut density exceeds `a/b`. Weights of `g` are ignored.
pub fn densest_cut_to_positive_cut(g: &WeightedGraph, a: i64, b: i64) -> Result<WeightedGraph, ReductionError> {
    if !(0 <= a && a < b) {
        return invalid(format!("need 0 <= a < b, got a = {a}, b = {b}"));
    }
    let n = g.nodes();
    let edges = (0..n).tuple_combinations().map(|(u, v)| {
        let w = if g.has_edge(u, v) { (b - a) * b } else { -a * b };
        (u, v, w)
    });
    WeightedGraph::new(n, edges)
}

/// One row per arc `(i, j)`: `+1` in column `i`, `−1` in column `j`, with
/// the last node's column dropped (it is pinned to 0). Zero biases.
pub fn digraph_to_layer(d: &Digraph) -> Result<ReluLayer, ReductionError> {
    let n = d.nodes();
    if n < 2 {
        return invalid("digraph needs at least two nodes");
    }
    if d.arcs().is_empty() {
        return invalid("digraph needs at least one arc");
    }
    let cols = n - 1;
    let rows = d
        .arcs()
        .iter()
        .map(|&(i, j)| {
            let mut row = zero_vec(cols);
            if i < cols {
                row[i] = int(1);
            }
            if j < cols {
                row[j] = int(-1);
            }
            row
        })
        .collect();
    Ok(ReluLayer::homogeneous(RMatrix::from_rows(rows, cols).expect("width n - 1"))?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoDisconnection {
    /// One side of the split (the last node is always on the other side).
    pub side: Vec<usize>,
    /// Arcs removed: exactly the arcs crossing the split.
    pub removed: Vec<(usize, usize)>,
}

fn is_acyclic(n: usize, arcs: impl Iterator<Item = (usize, usize)>) -> bool {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, 0);
    for _ in 0..n {
        g.add_node(());
    }
    for (u, v) in arcs {
        g.add_edge((u as u32).into(), (v as u32).into(), ());
    }
    toposort(&g, None).is_ok()
}

fn weakly_connected(n: usize, arcs: impl Iterator<Item = (usize, usize)>) -> bool {
    if n <= 1 {
        return true;
    }
    let mut uf = UnionFind::new(n);
    let mut parts = n;
    for (u, v) in arcs {
        if uf.union(u, v) {
            parts -= 1;
        }
    }
    parts == 1
}

/// Checks a claimed solution: removed arcs belong to `d` and are acyclic, and
/// the remaining digraph is not weakly connected.
pub fn check_two_disconnection(d: &Digraph, removed: &[(usize, usize)]) -> bool {
    let removed_set: BTreeSet<(usize, usize)> = removed.iter().copied().collect();
    let arcs: BTreeSet<(usize, usize)> = d.arcs().iter().copied().collect();
    removed_set.is_subset(&arcs)
        && is_acyclic(d.nodes(), removed_set.iter().copied())
        && !weakly_connected(d.nodes(), d.arcs().iter().copied().filter(|a| !removed_set.contains(a)))
}

/// Components of the antiparallel-arc graph, numbered by smallest member.
fn antiparallel_classes(d: &Digraph) -> (Vec<usize>, usize) {
    let n = d.nodes();
    let arcs: BTreeSet<(usize, usize)> = d.arcs().iter().copied().collect();
    let mut uf = UnionFind::new(n);
    for &(u, v) in d.arcs() {
        if arcs.contains(&(v, u)) {
            uf.union(u, v);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut rep_label = vec![usize::MAX; n];
    let mut classes = 0;
    for v in 0..n {
        let r = uf.find(v);
        if rep_label[r] == usize::MAX {
            rep_label[r] = classes;
            classes += 1;
        }
        label[v] = rep_label[r];
    }
    (label, classes)
}

/// Decides acyclic 2-disconnection by scanning bipartitions of the merged
/// nodes (see module docs). `cap` bounds the number of merged nodes.
pub fn acyclic_2disconnection_oracle(d: &Digraph, cap: usize) -> Result<Option<TwoDisconnection>, ReductionError> {
    let n = d.nodes();
    if n < 2 {
        return Ok(None);
    }
    let (label, k) = antiparallel_classes(d);
    if k > cap {
        return Err(ReductionError::CapExceeded { size: k, cap });
    }
    if k < 2 {
        return Ok(None);
    }
    let side_of = |mask: u64| -> Vec<bool> { label.iter().map(|&c| c + 1 < k && mask >> c & 1 == 1).collect() };
    let crossing = |side: &[bool]| -> Vec<(usize, usize)> {
        d.arcs().iter().copied().filter(|&(u, v)| side[u] != side[v]).collect()
    };
    let found = (1u64..1 << (k - 1)).into_par_iter().find_first(|&mask| {
        let side = side_of(mask);
        is_acyclic(n, crossing(&side).into_iter())
    });
    Ok(found.map(|mask| {
        let side = side_of(mask);
        let removed = crossing(&side);
        debug_assert!(check_two_disconnection(d, &removed));
        TwoDisconnection { side: (0..n).filter(|&v| side[v]).collect(), removed }
    }))
}

/// Independent check over node orders: for every permutation `π`, the arcs
/// going forward in `π` are acyclic; the digraph is a yes-instance iff for
/// some `π` the remaining arcs are not weakly connected. Returns the removed
/// arc set of the first such order.
pub fn acyclic_2disconnection_by_orders(d: &Digraph, cap: usize) -> Result<Option<Vec<(usize, usize)>>, ReductionError> {
    let n = d.nodes();
    if n > cap {
        return Err(ReductionError::CapExceeded { size: n, cap });
    }
    for order in (0..n).permutations(n) {
        let mut pos = vec![0; n];
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
        }
        let (forward, rest): (Vec<_>, Vec<_>) = d.arcs().iter().copied().partition(|&(u, v)| pos[u] < pos[v]);
        if !weakly_connected(n, rest.into_iter()) {
            return Ok(Some(forward));
        }
    }
    Ok(None)
}

/// First 2-coloring (bit `i` of the mask colors node `i`; the last node has
/// color 0) with no monochromatic hyperedge.
pub fn coloring_oracle(h: &Hypergraph3, cap: usize) -> Result<Option<Vec<bool>>, ReductionError> {
    let n = h.nodes();
    if n > cap {
        return Err(ReductionError::CapExceeded { size: n, cap });
    }
    if n == 0 {
        return Ok(Some(Vec::new()));
    }
    let ok = |colors: &[bool]| h.edges().iter().all(|e| !(colors[e[0]] == colors[e[1]] && colors[e[1]] == colors[e[2]]));
    let found = (0u64..1 << (n - 1)).into_par_iter().find_first(|&mask| ok(&mask_side(n, mask)));
    Ok(found.map(|mask| mask_side(n, mask)))
}

/// Node numbering of the hypergraph construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypergraphLayout {
    /// `U_i`: `v_i` for every node, then `e_i, e_i′` per hyperedge.
    pub u: [Vec<usize>; 2],
    /// `X_v`: `x_v, x_v′`, then `x_{v,e,0}, x_{v,e,1}` per incident hyperedge.
    pub x: Vec<Vec<usize>>,
    /// `q_{e,0}, q′_{e,0}, q_{e,1}, q′_{e,1}` per hyperedge.
    pub q: Vec<usize>,
    pub total: usize,
}

impl HypergraphLayout {
    pub fn new(h: &Hypergraph3) -> Self {
        let n = h.nodes();
        let m = h.edges().len();
        let mut next = 0;
        let mut take = |k: usize| {
            let ids: Vec<usize> = (next..next + k).collect();
            next += k;
            ids
        };
        let u0 = take(n + 2 * m);
        let u1 = take(n + 2 * m);
        let x: Vec<Vec<usize>> = (0..n).map(|v| take(2 * h.degree(v) + 2)).collect();
        let q = take(4 * m);
        HypergraphLayout { u: [u0, u1], x, q, total: next }
    }

    fn node(&self, v: usize, i: usize) -> usize {
        self.u[i][v]
    }

    fn edge_node(&self, n: usize, e: usize, i: usize, primed: bool) -> usize {
        self.u[i][n + 2 * e + usize::from(primed)]
    }

    fn x_node(&self, v: usize, primed: bool) -> usize {
        self.x[v][usize::from(primed)]
    }

    /// `x_{v,e,i}` where `slot` is the position of `e` among hyperedges at `v`.
    fn x_edge(&self, v: usize, slot: usize, i: usize) -> usize {
        self.x[v][2 + 2 * slot + i]
    }

    fn q_node(&self, e: usize, i: usize, primed: bool) -> usize {
        self.q[4 * e + 2 * i + usize::from(primed)]
    }
}

/// The hypergraph 2-coloring construction: `H` is 2-colorable without
/// monochromatic hyperedges iff the digraph has an acyclic 2-disconnection.
/// For a hyperedge `{u, v, w}` with `u < v < w` the three nodes take the
/// roles in that order.
pub fn hypergraph_to_digraph(h: &Hypergraph3) -> Digraph {
    hypergraph_construction(h).0
}

pub fn hypergraph_construction(h: &Hypergraph3) -> (Digraph, HypergraphLayout) {
    let n = h.nodes();
    let layout = HypergraphLayout::new(h);
    let mut arcs = Vec::new();
    let path = |nodes: &[usize], arcs: &mut Vec<(usize, usize)>| {
        for w in nodes.windows(2) {
            arcs.push((w[0], w[1]));
            arcs.push((w[1], w[0]));
        }
    };
    path(&layout.u[0], &mut arcs);
    path(&layout.u[1], &mut arcs);
    for xv in &layout.x {
        path(xv, &mut arcs);
    }
    for v in 0..n {
        let (v0, v1) = (layout.node(v, 0), layout.node(v, 1));
        let (xv, xv2) = (layout.x_node(v, false), layout.x_node(v, true));
        arcs.extend([(v0, xv), (xv, v1), (v1, xv2), (xv2, v0)]);
    }
    let slot = |v: usize, e: usize| h.edges()[..e].iter().filter(|f| f.contains(&v)).count();
    for (e, &[u, v, w]) in h.edges().iter().enumerate() {
        for i in 0..2 {
            let q = layout.q_node(e, i, false);
            let q2 = layout.q_node(e, i, true);
            let ei = layout.edge_node(n, e, i, false);
            let ei2 = layout.edge_node(n, e, i, true);
            let xu = layout.x_edge(u, slot(u, e), i);
            let xv = layout.x_edge(v, slot(v, e), i);
            let xw = layout.x_edge(w, slot(w, e), i);
            arcs.extend([(q, q2), (q2, q)]);
            arcs.extend([(xu, ei), (ei, q), (q, ei2), (ei2, xu)]);
            arcs.extend([(xv, q), (q, xw), (xw, q2), (q2, xv)]);
        }
    }
    let digraph = Digraph::new(layout.total, arcs).expect("construction has no repeated arcs");
    (digraph, layout)
}

/// Arc count of the construction: paths contribute `2(|P| − 1)` each, plus
/// 4 per node and 20 per hyperedge.
pub fn hypergraph_arc_count(h: &Hypergraph3) -> usize {
    let n = h.nodes();
    let m = h.edges().len();
    let path = |k: usize| 2 * k.saturating_sub(1);
    2 * path(n + 2 * m) + (0..n).map(|v| path(2 * h.degree(v) + 2)).sum::<usize>() + 4 * n + 20 * m
}

/// Cut weight of the image of [`densest_cut_to_positive_cut`] predicted from
/// the original graph.
pub fn densest_cut_image_weight(g: &WeightedGraph, side: &[bool], a: i64, b: i64) -> i64 {
    let crossing = g.edges().iter().filter(|(u, v, _)| side[*u] != side[*v]).count() as i64;
    let s = side.iter().filter(|&&x| x).count() as i64;
    let rest = g.nodes() as i64 - s;
    b * b * crossing - a * b * s * rest
}

/// Indicator vector of a node set, as a point.
pub fn indicator(n: usize, side: &[usize]) -> Vec<Rational> {
    let mut x = zero_vec(n);
    for &v in side {
        x[v] = int(1);
    }
    x
}
