//! Injectivity of single ReLU layers: the branching search against the
//! cell-by-cell oracle, and a deep network checked region by region.
//!
//! cargo run --example injectivity

use relu_cert::arrangement::{AffineLayer, LayeredNetwork, ReluLayer};
use relu_cert::exact::{format_vec, qvec, RMatrix};
use relu_cert::generate;
use relu_cert::injectivity::{
    deep_injectivity_bruteforce, injective_oracle, layer_injectivity, search_tree_bound, DEFAULT_NEURON_CAP,
};

fn main() {
    // [x - 1, 1 - x]_+ is injective, [0, -x]_+ is not.
    let hinge = ReluLayer::new(RMatrix::from_i64(&[&[1], &[-1]]), qvec(&[-1, 1])).unwrap();
    let flat = ReluLayer::homogeneous(RMatrix::from_i64(&[&[0], &[-1]])).unwrap();
    for (name, layer) in [("hinge", &hinge), ("flat", &flat)] {
        let v = layer_injectivity(layer).unwrap();
        println!("{name}: injective = {}, oracle agrees = {}", v.injective, injective_oracle(layer).injective == v.injective);
        if let Some(c) = v.collision() {
            println!("  {} and {} both map to {}", format_vec(&c.first), format_vec(&c.second), format_vec(&c.image));
        }
    }

    let mut rng = generate::seeded(11);
    let layer = generate::layer(&mut rng, 3, 40, 3);
    let v = layer_injectivity(&layer).unwrap();
    println!(
        "random 40 x 3 layer: injective = {}, search nodes = {} (bound {})",
        v.injective,
        v.examined,
        search_tree_bound(3)
    );

    // Two stacked identities on the line: x -> [x]_+ - [-x]_+ is a bijection,
    // but a second rectification folds the negative half away.
    let split = AffineLayer::new(RMatrix::from_i64(&[&[1], &[-1]]), qvec(&[0, 0])).unwrap();
    let fold = AffineLayer::new(RMatrix::from_i64(&[&[1, -1]]), qvec(&[0])).unwrap();
    let net = LayeredNetwork::new(vec![split.clone(), fold.clone()], None).unwrap();
    let v = deep_injectivity_bruteforce(&net, DEFAULT_NEURON_CAP).unwrap();
    println!("relu(relu(x) - relu(-x)): injective = {}", v.injective);
    let net = LayeredNetwork::new(vec![split], Some(fold)).unwrap();
    let v = deep_injectivity_bruteforce(&net, DEFAULT_NEURON_CAP).unwrap();
    println!("relu(x) - relu(-x): injective = {}", v.injective);
}
