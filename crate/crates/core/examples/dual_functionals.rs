//! Bounded functionals on convergent functions over an isolated scale.
//!
//! Run with `cargo run --example dual_functionals`.

use tscale::dual::{ell1_norm, from_ell1, functional_norm_bounded, SummableSequence};
use tscale::{
    apply_functional, functional_norm, norm_witness, schauder_expand, to_ell1, DualRep,
    IsolatedScale, LimitConfig, ScaleFunction, TimeScale,
};

fn main() -> tscale::Result<()> {
    let q = IsolatedScale::new(TimeScale::geometric(1.0, 2.0)?, 1.0)?;
    // Points double, so the horizon must be large for 1/t to settle below tol.
    let cfg = LimitConfig { horizon: 1e9, ..LimitConfig::default() };

    // F(f) = 2 lim f + f(t_1) - 3 f(t_3).
    let rep = DualRep::finite(2.0, vec![1.0, 0.0, -3.0]);
    let f = ScaleFunction::on(q.scale().clone(), |t| 1.0 + 1.0 / t);
    let value = apply_functional(&rep, &f, &q, &cfg)?;
    println!("F(1 + 1/t) = {:.8} (+- {:.1e})", value.value, value.error_bound);
    println!("expected   = {:.8}", 2.0 * 1.0 + 2.0 - 3.0 * 1.25);

    let norm = functional_norm(&rep);
    let w = norm_witness(&rep, &q, 3)?;
    let attained = apply_functional(&rep, &w, &q, &cfg)?.value;
    println!("\n||F|| = {norm}, F(witness) = {attained}");
    let samples: Vec<f64> = q.points(5)?.into_iter().map(|t| w.eval(t)).collect();
    println!("witness on t_1..t_5: {samples:?}");

    // The dual is isometric to l1: (b, b_1, b_2, ...).
    let seq = to_ell1(&rep)?;
    println!("\nl1 image {seq:?}, norm {}", ell1_norm(&seq));
    assert_eq!(from_ell1(&seq), rep);

    // Infinitely many coefficients with a certified tail bound.
    let geo = DualRep::generated(1.0, SummableSequence::geometric(1.0, 0.5));
    let est = functional_norm_bounded(&geo, 1e-12);
    println!("geometric coefficients: ||F|| = {:.12} +- {:.1e}", est.value, est.error_bound);

    // Schauder coordinates: f = l e + sum (f(t_n) - l) e_n.
    let exp = schauder_expand(&f, &q, 5, &cfg)?;
    println!("\nSchauder: limit {:.8}, coefficients {:?}", exp.limit, exp.coefficients);
    Ok(())
}
