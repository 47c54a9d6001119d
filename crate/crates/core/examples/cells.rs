//! Cells and rays of a hyperplane arrangement.
//!
//! cargo run --example cells

use relu_cert::arrangement::{enumerate_cells_counted, enumerate_rays, ReluLayer};
use relu_cert::exact::{format_vec, qvec, RMatrix};

fn main() {
    let w = RMatrix::from_i64(&[&[1, 0], &[0, 1], &[1, 1]]);
    let layer = ReluLayer::new(w.clone(), qvec(&[0, 0, -1])).unwrap();
    let run = enumerate_cells_counted(&layer);
    println!("{} cells, {} feasibility LPs", run.cells.len(), run.lp_calls);
    for cell in &run.cells {
        println!("  {cell}");
    }

    println!("rays of the central fan:");
    for ray in enumerate_rays(&w).unwrap() {
        println!("  {} (on hyperplanes {:?})", format_vec(&ray.direction), ray.zero_set);
    }
}
