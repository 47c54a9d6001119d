//! Positivity, surjectivity and the zero-map test for two-layer scalar
//! networks `x -> v . [W x + b]_+ + c`.
//!
//! cargo run --example range

use relu_cert::exact::{format_vec, qvec, RMatrix};
use relu_cert::range::{positivity, surjectivity, zero_map_check, RangeCertificate, TwoLayerScalarNet, ZeroMapVerdict};

fn net(rows: &[&[i64]], out: &[i64]) -> TwoLayerScalarNet {
    TwoLayerScalarNet::new(RMatrix::from_i64(rows), qvec(out)).unwrap()
}

fn main() {
    let identity = net(&[&[1], &[-1]], &[1, -1]);
    let abs = net(&[&[1], &[-1]], &[1, 1]);
    let cancel = net(&[&[1, 1], &[2, 2]], &[2, -1]);

    for (name, n) in [("identity", &identity), ("abs", &abs), ("cancel", &cancel)] {
        let s = surjectivity(n).unwrap();
        let p = positivity(n).unwrap();
        let z = zero_map_check(n).unwrap();
        println!("{name}: surjective = {}, positive somewhere = {}, zero map = {}", s.answer, p.answer, z == ZeroMapVerdict::Zero);
        match s.certificate {
            RangeCertificate::RayPair { positive, negative } => {
                println!("  f > 0 along {}, f < 0 along {}", format_vec(&positive), format_vec(&negative));
            }
            other => println!("  {other:?}"),
        }
    }

    // Biases never change the verdict.
    let shifted = TwoLayerScalarNet::with_biases(
        RMatrix::from_i64(&[&[1], &[-1]]),
        qvec(&[1, 1]),
        Some(qvec(&[-3, 5])),
        Some(qvec(&[-100])[0].clone()),
    )
    .unwrap();
    println!("abs with biases: surjective = {}", surjectivity(&shifted).unwrap().answer);
}
