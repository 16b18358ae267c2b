//! Recovering the kernel of a linear operator from its action on basis elements.
//!
//! Run with `cargo run --release --example kernel_extraction`.

use std::sync::Arc;

use tscale::dual::from_values;
use tscale::{
    basis_element, builtin_operator, extract_kernel, verify_reconstruction, IsolatedScale,
    LinearOperator, ScaleFunction, TimeScale,
};

/// `(Lf)(n) = (f(n) + f(n + 1)) / 2` on the integers.
struct PairMean;

impl LinearOperator for PairMean {
    fn name(&self) -> &str {
        "pair-mean"
    }

    fn apply(&self, f: &ScaleFunction, x: f64) -> tscale::Result<f64> {
        Ok(0.5 * (f.eval(x) + f.eval(x + 1.0)))
    }
}

fn main() -> tscale::Result<()> {
    let z = TimeScale::integers(0.0);
    let iso = IsolatedScale::new(z.clone(), 0.0)?;
    let xs: Vec<f64> = (0..=10).map(f64::from).collect();
    let tests: Vec<ScaleFunction> = (1..=12)
        .map(|k| basis_element(&iso, k))
        .chain([from_values(&iso, vec![1.0, -2.0, 0.5, 4.0], 0.0)])
        .collect::<tscale::Result<_>>()?;

    let ops: Vec<Arc<dyn LinearOperator>> = vec![
        builtin_operator("shift", &iso).expect("built-in"),
        builtin_operator("cesaro", &iso).expect("built-in"),
        Arc::new(PairMean),
    ];
    for op in ops {
        let ex = extract_kernel(Arc::clone(&op), z.clone(), 0.0, &iso, 16)?;
        println!("{}: K(x, t) for x, t = 0..5", op.name());
        for x in 0..5 {
            let row: Vec<String> = (0..5)
                .map(|t| format!("{:6.3}", ex.kernel.eval(f64::from(x), f64::from(t))))
                .collect();
            println!("  {}", row.join(" "));
        }
        let report = verify_reconstruction(op.as_ref(), &ex.kernel, &tests, &xs, 1e-12)?;
        println!(
            "  reconstruction on {} functions: pass = {}, max |diff| = {:.1e}, linearity warnings: {}\n",
            tests.len(),
            report.pass,
            report.max_abs_diff,
            ex.warnings.len()
        );
    }
    Ok(())
}
