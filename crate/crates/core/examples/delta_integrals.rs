//! Bounded delta-integrals: exact sums on jumps, adaptive quadrature on dense runs.
//!
//! Run with `cargo run --example delta_integrals`.

use tscale::{delta_integral, single_step_integral, TimeScale};

fn main() -> tscale::Result<()> {
    let cases: [(&str, TimeScale, f64, f64, f64); 4] = [
        ("integers, sum of t over 0..10", TimeScale::integers(0.0), 0.0, 10.0, 45.0),
        ("reals, t over [0, 3]", TimeScale::reals(0.0), 0.0, 3.0, 4.5),
        ("hybrid, t over [0, 3]", TimeScale::hybrid(), 0.0, 3.0, 4.0),
        ("q = 2, t over [1, 16]", TimeScale::geometric(1.0, 2.0)?, 1.0, 16.0, 85.0),
    ];
    for (label, scale, a, b, expected) in cases {
        let r = delta_integral(&scale, &|t: f64| t, a, b, 1e-10)?;
        println!(
            "{label:<32} {:>12.9}  expected {expected:<5} err est {:.1e}, {} evaluations",
            r.value, r.abs_error_estimate, r.evaluations
        );
    }

    // Over a single jump the integral is mu(t) f(t), with no quadrature error.
    let q = TimeScale::geometric(1.0, 3.0)?;
    let f = |t: f64| t.sqrt();
    let t = 9.0;
    println!(
        "\nq = 3: integral over [9, sigma(9)] = {} = mu(9) f(9) = {}",
        single_step_integral(&q, &f, t)?,
        q.graininess(t)? * f(t)
    );

    // Reversed bounds are rejected rather than silently negated.
    let err = delta_integral(&TimeScale::reals(0.0), &f, 2.0, 1.0, 1e-8).unwrap_err();
    println!("reversed bounds: {err}");
    Ok(())
}
