//! Shrinking a half-space cover of a polytope to at most `d + 1` members.
//!
//! cargo run --example helly

use relu_cert::exact::{int, qvec, RVector, Rational};
use relu_cert::lp::{covers, helly_cover, Polyhedron};

fn main() {
    // Seven half-planes covering the square [-1, 1]^2; at most three are
    // needed in the plane.
    let square = Polyhedron::cube(2, &int(-1), &int(1));
    let halfspaces: Vec<(RVector, Rational)> = vec![
        (qvec(&[1, 0]), int(1)),
        (qvec(&[1, 1]), int(3)),
        (qvec(&[0, 1]), int(2)),
        (qvec(&[-1, 0]), int(1)),
        (qvec(&[-1, -1]), int(5)),
        (qvec(&[0, -1]), int(4)),
        (qvec(&[1, -1]), int(2)),
    ];
    let chosen = helly_cover(&square, &halfspaces).unwrap();
    println!("kept {:?} of {} half-planes; still a cover: {}", chosen, halfspaces.len(), covers(&square, &halfspaces, &chosen).unwrap());
}
