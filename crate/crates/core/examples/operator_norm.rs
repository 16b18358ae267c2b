//! Lower bounds on the operator norm from sign-matched extremal functions.
//!
//! Run with `cargo run --release --example operator_norm`.

use tscale::kernel::{estimate_m, extremal_function};
use tscale::{operator_norm_lower_bound, Kernel, RegularityConfig, TimeScale};

fn main() -> tscale::Result<()> {
    let z = TimeScale::integers(0.0);
    // Alternating weights (-1)^k / (n+1) on row n: each row has l1 mass 1.
    let k = Kernel::new(z.clone(), 0.0, z, 0.0, |n, k| {
        if k <= n {
            (if k as i64 % 2 == 0 { 1.0 } else { -1.0 }) / (n + 1.0)
        } else {
            0.0
        }
    })?
    .with_row_support(|n| n);

    let m = estimate_m(&k, &RegularityConfig::default())?;
    println!("sup of row l1 norms on the probes: {:.12}", m.value);

    // f = sgn K(x0, .) up to p attains the row norm at x0.
    let f = extremal_function(&k, 6.0, 100.0)?;
    let values: Vec<f64> = (0..8).map(|t| f.eval(f64::from(t))).collect();
    println!("extremal function for x0 = 6: {values:?} ...");

    let probes = [1.0, 10.0, 100.0, 1000.0];
    for &x0 in &probes {
        let bound = operator_norm_lower_bound(&k, &[x0], &probes, 1e-9)?;
        println!("  x0 = {x0:>6}: |Lf(x0)| = {bound:.12}");
    }
    let bound = operator_norm_lower_bound(&k, &probes, &probes, 1e-9)?;
    println!("||L|| >= {bound:.12}");
    Ok(())
}
