//! The expression language used for integrands and kernels.
//!
//! Run with `cargo run --example expressions`.

use tscale::{delta_integral, parse_expr, Bindings, TimeScale};

fn main() -> tscale::Result<()> {
    for src in ["2*t+1", "-t^2", "2^3^2", "exp(-t/x)/x", "if(t<=x, 1/(x+1), 0)", "min(t, 1)*sgn(t-2)"] {
        let e = parse_expr(src)?;
        let vars: Vec<_> = e.free_vars().into_iter().map(|v| v.name()).collect();
        let support = e.row_support().map(|s| s.to_string()).unwrap_or_else(|| "-".into());
        println!(
            "{src:<22} canonical {:<26} vars {vars:?} row support {support} value at (x, t) = (4, 2): {:?}",
            e.to_string(),
            e.eval(&Bindings::xt(4.0, 2.0))
        );
    }

    println!("\nrejected:");
    for src in ["2**t", "sin(t", "t < 1", "foo(t)", "max(t)", "y + 1"] {
        println!("{}\n", parse_expr(src).unwrap_err());
    }

    println!("domain errors are reported, not swallowed:");
    println!("  log(t) at t = 0: {:?}", parse_expr("log(t)")?.eval(&Bindings::t(0.0)));

    // Expressions plug straight into the integrator.
    let f = parse_expr("t^2")?.to_function(TimeScale::integers(0.0), 0.0)?;
    let r = delta_integral(f.scale(), &f.as_fn(), 0.0, 4.0, 1e-10)?;
    println!("\nsum of t^2 over 0..4 = {}", r.value);
    Ok(())
}
