//! Kernel transforms and the four regularity conditions, on Cesaro means.
//!
//! Run with `cargo run --release --example cesaro_regularity`.

use tscale::{
    limit_at_infinity, parse_expr, regularity_report, LimitConfig, RegularityConfig, ScaleFunction,
    TimeScale,
};

fn main() -> tscale::Result<()> {
    let z = TimeScale::integers(0.0);
    // The if-guard doubles as a row-support hint, so each row is a finite sum.
    let cesaro = parse_expr("if(t <= x, 1/(x+1), 0)")?.to_kernel(z.clone(), 0.0, z.clone(), 0.0)?;

    let f = ScaleFunction::on(z.clone(), |n| 3.0 + 1.0 / (n + 1.0));
    let lf = cesaro.transform(&f, 1e-10);
    println!("f(n) = 3 + 1/(n+1), (Lf)(n) for n = 0..5:");
    for n in 0..5 {
        println!("  {n}: {:.6}", lf.eval(f64::from(n)));
    }
    let cfg = LimitConfig { horizon: 1e5, ..LimitConfig::default() };
    println!("lim Lf: {:?}", limit_at_infinity(&lf, &cfg)?.status);

    // Means tame a bounded divergent sequence; they still wobble by about 1/n,
    // so the tolerance must sit above 1/horizon.
    let signs = ScaleFunction::on(z.clone(), |n| if n as i64 % 2 == 0 { 1.0 } else { -1.0 });
    let ls = cesaro.transform(&signs, 1e-10);
    let loose = LimitConfig { tol: 1e-4, ..cfg };
    println!("lim (-1)^n:    {:?}", limit_at_infinity(&signs, &loose)?.status);
    println!("lim L((-1)^n): {:?}", limit_at_infinity(&ls, &loose)?.status);

    let rcfg = RegularityConfig::default();
    for (name, k) in [("cesaro", cesaro.clone()), ("2 x cesaro", cesaro.scaled(2.0))] {
        let report = regularity_report(&k, &rcfg)?;
        let c = &report.conditions;
        println!(
            "\n{name}: M >= {:.6}; (i) {} (ii) {} (iii) {} (iv) {}; verdict {:?}",
            report.m_estimate, c.i.passed, c.ii.passed, c.iii.passed, c.iv.passed, report.verdict
        );
    }
    Ok(())
}
