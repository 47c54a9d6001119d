//! Instance generators with known answers: cuts become two-layer networks,
//! digraphs become single layers, hypergraphs become digraphs.
//!
//! cargo run --example reductions

use relu_cert::injectivity::layer_injectivity;
use relu_cert::range::positivity;
use relu_cert::reductions::{
    acyclic_2disconnection_oracle, coloring_oracle, digraph_to_layer, hypergraph_construction,
    positive_cut_oracle, positive_cut_to_network, Digraph, Hypergraph3, WeightedGraph, BIPARTITION_CAP,
    COLORING_CAP, CUT_CAP,
};

fn main() {
    for w in [1, -1] {
        let k3 = WeightedGraph::new(3, [(0, 1, w), (1, 2, w), (0, 2, w)]).unwrap();
        let net = positive_cut_to_network(&k3).unwrap();
        println!(
            "triangle with weight {w}: positive cut = {}, network positive = {}",
            positive_cut_oracle(&k3, CUT_CAP).unwrap().is_some(),
            positivity(&net).unwrap().answer
        );
    }

    let cycle = Digraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
    let doubled = Digraph::new(3, [(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]).unwrap();
    for (name, d) in [("directed triangle", &cycle), ("doubled triangle", &doubled)] {
        let split = acyclic_2disconnection_oracle(d, BIPARTITION_CAP).unwrap();
        let layer = digraph_to_layer(d).unwrap();
        println!(
            "{name}: acyclic 2-disconnection = {}, layer injective = {}",
            split.is_some(),
            layer_injectivity(&layer).unwrap().injective
        );
    }

    let complete = Hypergraph3::new(4, [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]).unwrap();
    let (d, layout) = hypergraph_construction(&complete);
    println!(
        "all triples on 4 nodes: 2-colorable = {}, digraph has {} nodes and {} arcs, yes-instance = {}",
        coloring_oracle(&complete, COLORING_CAP).unwrap().is_some(),
        layout.total,
        d.arcs().len(),
        acyclic_2disconnection_oracle(&d, BIPARTITION_CAP).unwrap().is_some()
    );
}
