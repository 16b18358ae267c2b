//! Diagnosing limits at infinity and membership in C_T and C0_T.
//!
//! Run with `cargo run --example limits`.

use tscale::{limit_at_infinity, membership_report, LimitConfig, MembershipConfig, ScaleFunction, TimeScale};

fn main() -> tscale::Result<()> {
    let z = TimeScale::integers(1.0);
    let cases: [(&str, ScaleFunction); 4] = [
        ("2 + 1/n", ScaleFunction::on(z.clone(), |n| 2.0 + 1.0 / n)),
        ("1/sqrt(n)", ScaleFunction::on(z.clone(), |n| 1.0 / n.sqrt())),
        ("(-1)^n", ScaleFunction::on(z.clone(), |n| if n as i64 % 2 == 0 { 1.0 } else { -1.0 })),
        ("log(n)", ScaleFunction::on(z.clone(), f64::ln)),
    ];
    let cfg = LimitConfig::default();
    let mcfg = MembershipConfig::default();
    for (name, f) in &cases {
        let d = limit_at_infinity(f, &cfg)?;
        let m = membership_report(f, &mcfg)?;
        println!(
            "{name:<10} limit {:<24} C: {:<16} C0: {:?}",
            format!("{:?}", d.status),
            format!("{:?}", m.in_c),
            m.in_c0
        );
    }
    Ok(())
}
