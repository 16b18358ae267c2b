//! Delta-partitions: every cell is short or a single jump of the scale.
//!
//! Run with `cargo run --example partitions`.

use tscale::{make_delta_partition, refine, riemann_sum, verify_delta_property, Tag, TimeScale};

fn main() -> tscale::Result<()> {
    let scale = TimeScale::hybrid();
    let f = |t: f64| t * t;

    for delta in [0.5, 0.25] {
        let p = make_delta_partition(&scale, 0.0, 3.0, delta)?;
        println!("delta = {delta}: {:?}", p.points());
        assert!(verify_delta_property(&scale, &p, delta));
    }

    // Tags live in [t_{i-1}, t_i), so the jump cell [1, 2] always contributes f(1).
    // Both sums approach the integral as the dense cells shrink.
    let mut p = make_delta_partition(&scale, 0.0, 3.0, 0.5)?;
    println!("\n{:>6} {:>12} {:>12}", "cells", "left tags", "mid tags");
    for _ in 0..6 {
        let left = riemann_sum(&scale, &p, &f, Tag::Left)?;
        let mid = riemann_sum(&scale, &p, &f, Tag::Fraction(0.5))?;
        println!("{:>6} {:>12.6} {:>12.6}", p.len() - 1, left, mid);
        p = refine(&scale, &p)?;
    }
    println!("exact: 1/3 + 1 + 19/3 = {:.6}", 1.0 / 3.0 + 1.0 + 19.0 / 3.0);
    Ok(())
}
