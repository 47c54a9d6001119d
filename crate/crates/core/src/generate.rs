//! Seeded random instances with small entries. Used by the self test, the
//! examples and the test suites.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arrangement::ReluLayer;
use crate::exact::{int, rank, ratio, RMatrix, RVector, Rational};
use crate::range::TwoLayerScalarNet;
use crate::reductions::{Digraph, Hypergraph3, WeightedGraph};
use crate::zonotope::Zonotope;

pub type InstanceRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn int_vec(rng: &mut InstanceRng, len: usize, bound: i64) -> RVector {
    (0..len).map(|_| int(rng.gen_range(-bound..=bound))).collect()
}

pub fn int_matrix(rng: &mut InstanceRng, rows: usize, cols: usize, bound: i64) -> RMatrix {
    RMatrix::from_rows((0..rows).map(|_| int_vec(rng, cols, bound)).collect(), cols).expect("width cols")
}

/// `p/q` with `p` in `[-bound, bound]` and `q` in `1..=3`.
pub fn small_rational(rng: &mut InstanceRng, bound: i64) -> Rational {
    ratio(rng.gen_range(-bound..=bound), rng.gen_range(1..=3))
}

pub fn rational_matrix(rng: &mut InstanceRng, rows: usize, cols: usize, bound: i64) -> RMatrix {
    let data = (0..rows).map(|_| (0..cols).map(|_| small_rational(rng, bound)).collect()).collect();
    RMatrix::from_rows(data, cols).expect("width cols")
}

/// Layer with entries and biases of the form `p/q` as in [`small_rational`].
pub fn rational_layer(rng: &mut InstanceRng, d: usize, m: usize, bound: i64) -> ReluLayer {
    let bias = (0..m).map(|_| small_rational(rng, bound)).collect();
    ReluLayer::new(rational_matrix(rng, m, d, bound), bias).expect("m, d >= 1")
}

/// `m × d` layer, entries and biases in `[-bound, bound]`.
pub fn layer(rng: &mut InstanceRng, d: usize, m: usize, bound: i64) -> ReluLayer {
    ReluLayer::new(int_matrix(rng, m, d, bound), int_vec(rng, m, bound)).expect("m, d >= 1")
}

pub fn homogeneous_layer(rng: &mut InstanceRng, d: usize, m: usize, bound: i64) -> ReluLayer {
    ReluLayer::homogeneous(int_matrix(rng, m, d, bound)).expect("m, d >= 1")
}

/// Two-layer scalar net; biases drawn only when `biased`.
pub fn two_layer(rng: &mut InstanceRng, d: usize, m: usize, bound: i64, biased: bool) -> TwoLayerScalarNet {
    let w1 = int_matrix(rng, m, d, bound);
    let w2 = int_vec(rng, m, bound);
    if biased {
        let b1 = int_vec(rng, m, bound);
        let b2 = int_vec(rng, 1, bound).pop();
        TwoLayerScalarNet::with_biases(w1, w2, Some(b1), b2).expect("shapes agree")
    } else {
        TwoLayerScalarNet::new(w1, w2).expect("shapes agree")
    }
}

/// Each pair is an edge with probability `density`; weights are nonzero in
/// `[-bound, bound]`.
pub fn graph(rng: &mut InstanceRng, n: usize, density: f64, bound: i64) -> WeightedGraph {
    let mut edges = Vec::new();
    for (u, v) in (0..n).tuple_combinations() {
        if rng.gen_bool(density) {
            let mut w = 0;
            while w == 0 {
                w = rng.gen_range(-bound..=bound);
            }
            edges.push((u, v, w));
        }
    }
    WeightedGraph::new(n, edges).expect("valid edges")
}

/// Each ordered pair is an arc with probability `density`; at least one arc.
pub fn digraph(rng: &mut InstanceRng, n: usize, density: f64) -> Digraph {
    assert!(n >= 2, "digraphs need two nodes");
    let mut arcs: Vec<(usize, usize)> =
        (0..n).cartesian_product(0..n).filter(|(u, v)| u != v).filter(|_| rng.gen_bool(density)).collect();
    if arcs.is_empty() {
        let u = rng.gen_range(0..n);
        let v = (u + rng.gen_range(1..n)) % n;
        arcs.push((u, v));
    }
    Digraph::new(n, arcs).expect("valid arcs")
}

pub fn zonotope(rng: &mut InstanceRng, d: usize, n: usize, bound: i64) -> Zonotope {
    Zonotope::new(int_matrix(rng, n, d, bound)).expect("d >= 1")
}

/// `k` linearly independent integer vectors in `ℝᵈ`.
pub fn independent_basis(rng: &mut InstanceRng, k: usize, d: usize, bound: i64) -> Vec<RVector> {
    assert!(k <= d, "at most d independent vectors");
    loop {
        let m = int_matrix(rng, k, d, bound);
        if rank(&m) == k {
            return m.to_rows();
        }
    }
}

/// Every 3-uniform hypergraph on `n` nodes: all subsets of the `C(n, 3)`
/// triples.
pub fn all_hypergraphs(n: usize) -> Vec<Hypergraph3> {
    let triples: Vec<[usize; 3]> = (0..n).tuple_combinations().map(|(a, b, c)| [a, b, c]).collect();
    triples
        .iter()
        .copied()
        .powerset()
        .map(|edges| Hypergraph3::new(n, edges).expect("valid triples"))
        .collect()
}
