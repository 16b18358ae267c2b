//! Building time scales and navigating them with the jump operators.
//!
//! Run with `cargo run --example scales`.

use tscale::{Segment, TimeScale};

fn main() -> tscale::Result<()> {
    let hybrid = TimeScale::hybrid();
    let q: TimeScale = r#"{"kind":"geometric","start":1,"ratio":2}"#.parse()?;
    let mixed: TimeScale = r#"{"kind":"union",
        "blocks":[{"interval":[0,1]},{"point":1.5},{"point":2.25}],
        "tail":{"kind":"integers","start":3}}"#
        .parse()?;

    println!("{:>8} {:>8} {:>8} {:>6}  class", "t", "sigma", "rho", "mu");
    for (name, scale, points) in [
        ("hybrid", &hybrid, &[0.5, 1.0, 2.0][..]),
        ("q = 2", &q, &[1.0, 4.0, 64.0][..]),
        ("union", &mixed, &[1.0, 1.5, 2.25, 3.0][..]),
    ] {
        println!("{name}");
        for &t in points {
            let class = scale.classify(t)?;
            println!(
                "{:>8} {:>8} {:>8} {:>6}  left {}, right {}",
                t,
                scale.sigma(t)?,
                scale.rho(t)?,
                scale.graininess(t)?,
                if class.left_dense() { "dense" } else { "scattered" },
                if class.right_dense() { "dense" } else { "scattered" },
            );
        }
    }

    // Points off the scale are rounded to their neighbours.
    println!("\nfloor(1.8) = {}, ceil(1.8) = {}", mixed.floor(1.8)?, mixed.ceil(1.8)?);

    println!("\n[0, 5] in the union scale:");
    for seg in mixed.decompose(0.0, 5.0)? {
        match seg {
            Segment::DenseRun { lo, hi } => println!("  dense run [{lo}, {hi}]"),
            Segment::Jump { at, next, gap } => println!("  jump {at} -> {next} (mu = {gap})"),
        }
    }
    Ok(())
}
