//! Zonotope containment through the support function
//! `h(x) = sum [g_i . x]_+`, cross-checked against vertex membership.
//!
//! cargo run --example zonotope

use relu_cert::exact::format_vec;
use relu_cert::zonotope::{contains, contains_by_vertices, support, vertices, Zonotope};

fn main() {
    let square = Zonotope::from_i64(&[&[1, 0], &[0, 1]]);
    let hexagon = Zonotope::from_i64(&[&[1, 0], &[0, 1], &[1, 1]]);
    let diamond = Zonotope::from_i64(&[&[1, 1], &[1, -1]]);

    println!("hexagon vertices:");
    for v in vertices(&hexagon).unwrap() {
        println!("  {}", format_vec(&v));
    }

    for (outer_name, outer, inner_name, inner) in [
        ("hexagon", &hexagon, "square", &square),
        ("square", &square, "hexagon", &hexagon),
        ("diamond", &diamond, "square", &square),
    ] {
        let c = contains(outer, inner).unwrap();
        print!("{inner_name} in {outer_name}: {}", c.contained);
        if let Some(r) = &c.separating_direction {
            print!(
                " (along {}: inner reaches {}, outer only {})",
                format_vec(r),
                support(inner, r).unwrap(),
                support(outer, r).unwrap()
            );
        }
        println!("; vertex check agrees: {}", contains_by_vertices(outer, inner).unwrap() == c.contained);
    }
}
