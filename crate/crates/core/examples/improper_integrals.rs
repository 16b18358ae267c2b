//! Improper integrals over [a, inf) by doubling targets until increments stall.
//!
//! Run with `cargo run --example improper_integrals`.

use tscale::{DeltaIntegrator, TimeScale};

fn main() -> tscale::Result<()> {
    let integ = DeltaIntegrator::default();
    let q = TimeScale::geometric(1.0, 2.0)?;
    let (r, trace) = integ.improper_traced(&q, &|t: f64| t.powi(-2), 1.0, 1e-8)?;
    println!("q = 2, integral of t^-2 from 1: {} (converged: {})", r.value, r.converged);
    println!("{:>12} {:>14} {:>12}", "target", "partial", "increment");
    for step in trace.iter().take(8) {
        println!("{:>12} {:>14.10} {:>12.3e}", step.target, step.partial, step.increment);
    }
    println!("... {} targets in total", trace.len());

    let r = integ.improper(&TimeScale::reals(0.0), &|t: f64| (-t).exp(), 0.0, 1e-8)?;
    println!("\nreals, integral of exp(-t) from 0: {:.10}", r.value);

    let r = integ.improper(&TimeScale::integers(0.0), &|t: f64| 0.5f64.powf(t), 0.0, 1e-10)?;
    println!("integers, sum of 2^-t from 0: {:.10}", r.value);

    // A divergent integral comes back flagged instead of failing outright.
    let r = integ.improper(&TimeScale::integers(1.0), &|t: f64| 1.0 / t, 1.0, 1e-6)?;
    println!(
        "harmonic series: converged = {}, partial {:.3} at {}",
        r.converged, r.value, r.truncation_point
    );
    Ok(())
}
