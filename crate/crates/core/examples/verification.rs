//! Exact output-range verification over polytopes, and the embedding of a
//! positivity question into a verification question over a small ball.
//!
//! cargo run --example verification

use relu_cert::exact::{format_vec, int, qvec, ratio, RMatrix};
use relu_cert::lp::Polyhedron;
use relu_cert::range::{positivity, TwoLayerScalarNet};
use relu_cert::verification::{build_verification_instance, exact_max, inscribed_box, verify, MaxValue};

fn main() {
    // f(x, y) = [x + y - 1]_+ - 2 [x - y]_+ on [-1, 2]^2.
    let f = TwoLayerScalarNet::with_biases(
        RMatrix::from_i64(&[&[1, 1], &[1, -1]]),
        qvec(&[1, -2]),
        Some(qvec(&[-1, 0])),
        None,
    )
    .unwrap();
    let square = Polyhedron::cube(2, &int(-1), &int(2));
    let m = exact_max(&f, &square).unwrap();
    if let MaxValue::Attained { value, point } = &m.max {
        println!("max f = {value} at {} over {} linear pieces", format_vec(point), m.pieces);
    }
    for t in [int(2), ratio(5, 2), int(3)] {
        let v = verify(&f, &square, &t).unwrap();
        println!("f <= {t} on the square: {}", v.answer);
    }

    // A positivity instance on R^2, embedded around z in R^4.
    let g = TwoLayerScalarNet::new(RMatrix::from_i64(&[&[1, 0], &[0, 1], &[1, 1]]), qvec(&[1, 1, -1])).unwrap();
    let center = qvec(&[1, 0, -1, 2]);
    let basis = vec![qvec(&[1, 1, 0, 0]), qvec(&[0, 0, 1, -1])];
    let t = int(7);
    let h = build_verification_instance(&g, &center, &basis, &t).unwrap();
    let domain = inscribed_box(&center, &basis, &ratio(1, 2)).unwrap();
    let positive = positivity(&g).unwrap().answer;
    let safe = verify(&h, &domain, &t).unwrap().answer;
    println!("g positive somewhere: {positive}; embedded bound holds: {safe}");
}
